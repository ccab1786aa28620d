#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "condenser/config.hpp"
#include "condenser/green.hpp"
#include "condenser/problems.hpp"
#include "condenser/verify.hpp"

namespace condenser {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exit codes of the `run` subcommand.
//   0 solved, all assertions hold
//   1 configuration / input error
//   2 solver failure (non-convergence, PD certification failure)
//   3 assertion failures (report still written)
enum ExitCode : int { kOk = 0, kConfigError = 1, kSolverError = 2, kAssertionFailure = 3 };

struct AssertionOutcome {
  std::string name;
  bool pass = false;
  double value = 0.0;
};

// Everything one pipeline run produces.
struct RunArtifacts {
  RunConfig config;
  ExampleGeometry geom;
  KernelOperator K;
  Eigen::MatrixXd columns;
  KernelOperator G;
  ExternalField field;
  Constraint xi;
  Preflight pre;
  SolveReport green;        // Green-side solve (primary)
  SolveReport direct;       // signed cross-solve, when enabled and feasible
  Recovered recovered;
  FrostmanReport frostman;
  SupportReport support;
  std::vector<double> escape_energies;  // halfspace-plane geometries only
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
  std::vector<AssertionOutcome> assertions;
  std::map<std::string, double> timings;  // seconds
  int exit_code = kOk;
};

RunArtifacts run_pipeline(const RunConfig& cfg);

// Deterministic JSON report. Timings are confined to the "timings" object so
// byte-identity can be checked with it stripped.
std::string report_json(const RunArtifacts& a, bool include_timings = true);

// value, objective, duality_gap, mass_deficit, runtime rows for each setting
// of `param` (truncation_radius | resolution | alpha). threads <= 0 reads
// CONDENSER_LAB_THREADS, defaulting to 1.
std::string sweep_csv(const RunConfig& base, const std::string& param,
                      const std::vector<double>& values, int threads = 0);

// 200 samples of U_g and W along [from, to] out of a stored report
// (single sample when from == to). Throws when the segment leaves the
// bounding box of the stored nodes.
std::string slice_csv(const std::string& report_path, const Eigen::Vector3d& from,
                      const Eigen::Vector3d& to);

}  // namespace condenser

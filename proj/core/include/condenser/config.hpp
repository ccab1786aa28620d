#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace condenser {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Run configuration, normally parsed from a small TOML-style file with
// sections [geometry], [kernel], [field], [constraint], [solver], [assertions].
struct GeometryConfig {
  std::string example = "concentric";  // ex1..ex5, tube, full-ball, tangent-sphere,
                                       // halfspace-plane, cusp, concentric, solid-ball
  int resolution = 12;
  double truncation_radius = 8.0;
  std::string points_file;             // overrides `example` when set
  std::string domain = "ball";         // for points_file: ball | halfspace | horn
  double domain_radius = 1.0;
};

struct KernelConfig {
  double alpha = 2.0;
  double diag_scale = 1.0;
};

struct FieldConfig {
  std::string kind = "zero";  // zero | values | swept
  std::string values_file;    // per-F-node values, one per line; "inf" allowed
  // swept sources: x, y, z, charge; attached to the nearest node inside D
  std::vector<std::array<double, 4>> atoms;
};

struct ConstraintConfig {
  std::string kind = "none";  // none | density | annuli-decay
  double scale = 1.0;
  double decay_power = 3.0;
};

struct SolverConfig {
  double tol = 1e-9;
  int max_iter = 50000;
  std::uint64_t seed = 42;
  double renorm_tol = 0.02;
  double pot_tol = 1e-3;
  bool direct_solve = true;  // run the signed cross-solve for the duality gap
};

struct AssertionsConfig {
  bool expect_feasible = true;
  bool expect_energy_escape = false;
  std::optional<double> max_duality_gap;
  std::optional<double> max_frostman_rel;
  std::optional<double> max_mass_deficit;
  std::optional<double> min_support_fraction;
  std::optional<double> min_boundary_fraction;
  std::optional<double> max_escape_ratio;  // last/first ring energy
};

struct RunConfig {
  std::string name;
  GeometryConfig geometry;
  KernelConfig kernel;
  FieldConfig field;
  ConstraintConfig constraint;
  SolverConfig solver;
  AssertionsConfig assertions;
};

RunConfig parse_config(std::istream& in, const std::string& name);
RunConfig parse_config_file(const std::string& path);

}  // namespace condenser

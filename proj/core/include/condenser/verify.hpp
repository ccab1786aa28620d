#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "condenser/geometry.hpp"
#include "condenser/kernel.hpp"
#include "condenser/problems.hpp"

namespace condenser {

struct FrostmanOptions {
  double rel_tol = 1e-3;            // violations pass when <= rel_tol * |w|
  double exceptional_budget = 1e-3; // quadrature-weight fraction excludable from the lower bound
  double active_tol = 1e-9;         // residual cap mass below this counts as saturated
  double support_threshold = 1e-8;  // of total mass
};

// Two-sided check of the variational conditions for a solved lambda:
// W = G lambda + f must be >= w off the saturated set (up to an exceptional
// set of small quadrature weight) and <= w on the support.
struct FrostmanReport {
  double w = 0.0;
  double lower_violation = 0.0;   // max (w - W)+ over admissible nodes, after exclusions
  double upper_violation = 0.0;   // max (W - w)+ over support nodes
  double excluded_fraction = 0.0; // quadrature fraction actually excluded
  int support_count = 0;
  bool pass = false;
};

FrostmanReport frostman_check(const KernelOperator& G, const Eigen::VectorXd& lambda,
                              const ExternalField& field, const Constraint& xi,
                              const Eigen::VectorXd& quad_f, const FrostmanOptions& opts = {});

// Quadrature-weight fraction of F carrying the support, and the share of the
// solved mass sitting on boundary-classified nodes (NaN without flags).
struct SupportReport {
  double support_fraction = 0.0;
  double boundary_fraction = std::numeric_limits<double>::quiet_NaN();
  int support_count = 0;
};

SupportReport support_check(const Eigen::VectorXd& lambda, const Eigen::VectorXd& quad_f,
                            const std::vector<uint8_t>& f_boundary,
                            double support_threshold = 1e-8);

// min over probe points of w - U_g(lambda - minus) evaluated by direct kernel
// sums; positive margin witnesses the strict inequality off the reduced set.
struct ProbeReport {
  double margin = 0.0;
  double max_potential = 0.0;
};

ProbeReport strict_inequality_probe(const PointCloud& cloud, double alpha,
                                    const DiscreteMeasure& lambda_global,
                                    const DiscreteMeasure& minus_global, double w,
                                    const std::vector<int>& probe_nodes);

// Randomized end-to-end invariant sweep; deterministic for a fixed seed.
struct InvariantResult {
  std::string name;
  bool pass = false;
  double value = 0.0;   // measured residual or quantity
  double bound = 0.0;   // tolerance it was held to
};

struct InvariantLedger {
  std::vector<InvariantResult> entries;
  bool all_pass() const;
};

// sizes: any of "small", "medium". Empty list gives an empty ledger.
InvariantLedger run_invariant_suite(uint64_t seed, const std::vector<std::string>& sizes);

// Granular checks, exposed so tests can inject faults.
InvariantResult check_symmetry(const KernelOperator& K);
InvariantResult check_pd_diag(const KernelOperator& K);  // positive regularized diagonal
// Sweeping never raises the potential: max over the witnesses of
// (U^swept - U^mu) / |U^mu| must stay below tol. Witnesses need clearance
// from the complement nodes, where the discrete sweep concentrates into
// point masses; a witness within one shell gap sees spikes of either sign.
InvariantResult check_domination(const KernelOperator& K, const PointCloud& cloud, double alpha,
                                 const DiscreteMeasure& mu, const DiscreteMeasure& swept,
                                 const std::vector<Eigen::VectorXd>& probe_points, double tol);
InvariantResult check_domination(const KernelOperator& K, const PointCloud& cloud, double alpha,
                                 const DiscreteMeasure& mu, const DiscreteMeasure& swept,
                                 const std::vector<int>& probe_nodes, double tol);

}  // namespace condenser

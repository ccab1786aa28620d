#pragma once

#include <Eigen/Dense>

#include <vector>

#include "condenser/geometry.hpp"
#include "condenser/kernel.hpp"

namespace condenser {

struct BalayageOptions {
  double tol = 1e-10;   // KKT tolerance relative to max|K_QF mu|
  int max_iter = 400;   // active-set exchanges
};

// Sweep of mu onto the Dc nodes: the nearest point to mu, in the energy norm
// of K, among nonnegative measures on the Dc block. No mass constraint; the
// mass defect 1 - nu(Q)/mu(F) is the truncation diagnostic.
// KKT at the solution: U^nu = U^mu at nodes with nu > 0, U^nu >= U^mu at the
// rest (up to tol).
struct BalayageResult {
  DiscreteMeasure nu;        // supported on the operator's Dc nodes
  double mass_defect = 0.0;  // (mu(F) - nu(Q)) / mu(F)
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

BalayageResult balayage(const KernelOperator& K, const DiscreteMeasure& mu,
                        const BalayageOptions& opts = {});

// Sweep against an explicit right-hand side: u_mu_on_q holds the potential of
// the source sampled at the operator's Dc nodes, in block order. Lets callers
// sweep sources that are not operator nodes (probe atoms, continuous charges).
BalayageResult balayage_rhs(const KernelOperator& K, const Eigen::VectorXd& u_mu_on_q,
                            double mu_mass, const BalayageOptions& opts = {});

// Columns of the balayage operator: column j is the sweep of the unit atom at
// the j-th F node. Shape (number of Dc nodes) x (number of F nodes). Column
// solves share factorizations across equal active sets and are warm-started
// from the previous column. Results are cached per operator content
// (positions + alpha + diagonal policy), so Green assembly and repeated
// potential evaluations reuse the same columns.
Eigen::MatrixXd balayage_columns(const KernelOperator& K, const BalayageOptions& opts = {});

// Sweep of mu computed by superposing cached columns; valid when mu >= 0.
DiscreteMeasure apply_columns(const KernelOperator& K, const Eigen::MatrixXd& columns,
                              const DiscreteMeasure& mu);

// Closed-form harmonic-measure oracle for the sphere |x| = a, source y with
// |y| < a, alpha = 2, n = 3: density (a^2 - |y|^2) / (4 pi a |x - y|^3) against
// the nodes' quadrature weights. Total mass tends to 1 with refinement; kept
// independent of the projection solver so tests can cross-check it.
DiscreteMeasure sphere_harmonic_measure(const PointCloud& cloud,
                                        const std::vector<int>& sphere_nodes, double a,
                                        const Eigen::Vector3d& y);

}  // namespace condenser

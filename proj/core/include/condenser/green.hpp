#pragma once

#include <Eigen/Dense>

#include "condenser/balayage.hpp"
#include "condenser/kernel.hpp"
#include "condenser/qp.hpp"

namespace condenser {

struct GreenOptions {
  double asymmetry_tol = 1e-3;  // relative to max |G|
  double diag_floor = 0.1;      // of the uncorrected self-value
  BalayageOptions balayage;
};

// Gram matrix of the swept differences over the F nodes: with S = K_FQ * B,
// G = K_FF - S - S^T + B^T K_QQ B, so mu^T G mu is the signed energy of
// mu - beta(mu) to roundoff for every mu, not just at KKT points. The raw
// product is symmetrized to (G + G^T)/2; the pre-symmetrization asymmetry is
// recorded on the operator and must stay within asymmetry_tol. Diagonals are
// floored at diag_floor times the uncorrected self-value. The result is
// PD-certified like any operator.
KernelOperator green_matrix(const KernelOperator& K, const Eigen::MatrixXd& columns,
                            const GreenOptions& opts = {});

// E(mu - beta_mu) under the full signed Riesz form (diagonal included).
double green_energy_via_identity(const KernelOperator& K, const DiscreteMeasure& mu,
                                 const DiscreteMeasure& beta_mu);

struct CapacityResult {
  double capacity = 0.0;  // 1 / min energy
  double w = 0.0;         // minimal energy over the probability simplex
  DiscreteMeasure lambda; // minimizer (mass 1)
  bool converged = false;
};

// 1 / inf { nu^T G nu : nu a probability measure on e_nodes }. e_nodes are
// operator-local row indices into G.
CapacityResult green_capacity(const KernelOperator& G, const std::vector<int>& e_rows,
                              const QpOptions& opts = {});

}  // namespace condenser

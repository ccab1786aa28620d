#pragma once

#include <Eigen/Dense>

#include <optional>

namespace condenser {

// minimize w^T Q w + 2 c^T w  over  { 0 <= w <= caps, sum w = mass }.
// Q must be symmetric PD. caps of size 0 means unbounded above; mass unset
// drops the equality constraint (plain bound-constrained problem).
struct QpProblem {
  const Eigen::MatrixXd* Q = nullptr;
  Eigen::VectorXd c;                 // size N, or 0 for a zero linear term
  std::optional<double> mass;
  Eigen::VectorXd caps;              // size N, or 0 for no caps
};

struct QpOptions {
  double tol = 1e-9;       // on the KKT residual ||w - project(w - grad f(w))||_1
  int max_iter = 50000;
  bool polish = true;      // reduced KKT refinement once the active set settles
};

struct QpSolution {
  Eigen::VectorXd w;
  double objective = 0.0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  double multiplier = 0.0;  // equality dual on the (Qw + c) scale; 0 when mass unset
  int iterations = 0;
  bool converged = false;
};

// Euclidean projection onto { 0 <= w <= caps, sum w = mass } by bisection on
// the shift tau in w_i = clamp(v_i - tau, 0, caps_i); terminates when the mass
// mismatch is <= 1e-12 * max(1, mass). caps of size 0 means no upper bounds.
// Throws when sum(caps) < mass. shift_out receives the final tau when non-null.
Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, const Eigen::VectorXd& caps,
                                       double mass, double* shift_out = nullptr);

// Projected gradient descent with Barzilai-Borwein steps and a monotone
// safeguard (a step never increases the objective). Deterministic: fixed
// iteration order, no randomness; identical inputs give identical output.
// Non-convergence is reported through converged=false, never a wrong answer.
QpSolution solve(const QpProblem& p, const QpOptions& opts = {},
                 const Eigen::VectorXd* start = nullptr);

// Signed condenser variant: minimize over (wp, wm)
//   wp^T A wp - 2 wp^T C wm + wm^T B wm + 2 f^T wp
// with wp in { 0 <= wp <= caps_p, sum = mass_p } and wm in the mass_m simplex.
// The quadratic form is PD because it equals (wp,-wm)^T K (wp,-wm) for the
// PD kernel K = [[A, C],[C^T, B]].
struct TwoBlockSolution {
  Eigen::VectorXd wp, wm;
  double objective = 0.0;
  double kkt_residual = std::numeric_limits<double>::infinity();
  double multiplier_p = 0.0;
  double multiplier_m = 0.0;
  int iterations = 0;
  bool converged = false;
};

TwoBlockSolution solve_two_block(Eigen::Ref<const Eigen::MatrixXd> A,
                                 Eigen::Ref<const Eigen::MatrixXd> C,
                                 Eigen::Ref<const Eigen::MatrixXd> B,
                                 const Eigen::VectorXd& f, double mass_p, double mass_m,
                                 const Eigen::VectorXd& caps_p, const QpOptions& opts = {},
                                 const Eigen::VectorXd* start_p = nullptr,
                                 const Eigen::VectorXd* start_m = nullptr);

}  // namespace condenser

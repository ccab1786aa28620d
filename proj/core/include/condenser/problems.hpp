#pragma once

#include <Eigen/Dense>

#include <map>
#include <string>
#include <vector>

#include "condenser/balayage.hpp"
#include "condenser/geometry.hpp"
#include "condenser/green.hpp"
#include "condenser/kernel.hpp"
#include "condenser/qp.hpp"

namespace condenser {

// External field acting on the positive plate.
//  Zero   - no field.
//  Values - lower-semicontinuous field sampled per F node; +inf removes a node.
//  Swept  - f = U^zeta - U^{beta zeta} for a signed source zeta inside D;
//           always admissible, and f = G zeta when zeta sits on F nodes.
struct ExternalField {
  enum class Kind { Zero, Values, Swept };
  Kind kind = Kind::Zero;
  Eigen::VectorXd f;          // per F row of the operator; empty means zero
  DiscreteMeasure zeta;       // Swept only: sources (global ids, signed)
  DiscreteMeasure beta_zeta;  // Swept only: their sweep (global Dc ids)

  double at(int f_row) const { return f.size() ? f(f_row) : 0.0; }
  bool finite_at(int f_row) const { return std::isfinite(at(f_row)); }
};

ExternalField zero_field();
ExternalField values_field(Eigen::VectorXd f);  // entries may be +inf, never -inf/NaN

// Builds the swept field for zeta supported on nodes strictly inside D
// (F or Probe labels). F-node sources reuse the cached balayage columns;
// probe sources get dedicated sweeps.
ExternalField swept_field(const PointCloud& cloud, const KernelOperator& K,
                          const Eigen::MatrixXd& columns, const DiscreteMeasure& zeta,
                          const BalayageOptions& opts = {});

// Upper constraint xi on the positive plate; caps are per F row.
struct Constraint {
  Eigen::VectorXd caps;  // size 0 = unconstrained
  bool constrained() const { return caps.size() > 0; }
};

Constraint unconstrained();
Constraint density_constraint(const ExampleGeometry& g, double scale);        // caps = scale * quad
Constraint annuli_decay_constraint(const ExampleGeometry& g, double power = 3.0);

// Feasibility triage before any solve. Unconstrained problems need at least
// one finite-field node; constrained ones need the finite-field caps to hold
// more than unit mass.
struct Preflight {
  bool feasible = false;
  double finite_cap_mass = 0.0;
  int finite_nodes = 0;
  std::string reason;
};

Preflight preflight(const ExternalField& field, const Constraint& xi, int n_f);

struct SolveReport {
  bool converged = false;
  double objective = 0.0;
  double frostman_w = 0.0;
  double multiplier = 0.0;
  double mass_deficit = std::numeric_limits<double>::quiet_NaN();
  double support_fraction = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  Eigen::VectorXd lambda;           // per F row; exactly 0 on removed nodes
  Eigen::VectorXd wm;               // direct solve only: negative plate per Dc row
  std::map<std::string, double> residuals;
  std::map<std::string, double> invariants;
};

// min nu^T G nu + 2 <f, nu> over { 0 <= nu <= caps, nu(F) = 1 } on the finite-
// field nodes. frostman_w: <W,lambda> unconstrained; the (xi-lambda)-average of
// W when constrained (the two agree when no cap saturates). When the field is
// Swept the report records the identity residual
// |objective - (||nu+zeta||_G^2 - ||zeta||_G^2)| (zeta on F nodes only).
SolveReport solve_green_problem(const KernelOperator& G, const ExternalField& field,
                                const Constraint& xi, const QpOptions& opts = {});

// Negative plate from the solved positive plate: minus = B lambda, with mass
// deficit 1 - minus(Q). Renormalizes to unit mass when deficit < renorm_tol,
// otherwise leaves the raw sweep and sets renormalized = false.
struct Recovered {
  DiscreteMeasure minus;      // global Dc ids
  double deficit = 0.0;
  bool renormalized = false;
};

Recovered recover_condenser(const KernelOperator& K, const Eigen::MatrixXd& columns,
                            const Eigen::VectorXd& lambda, double renorm_tol = 0.02);

// Joint signed solve over (mu_plus on F, mu_minus on Dc), masses (1,1),
// objective ||mu_plus - mu_minus||_K^2 + 2 <f, mu_plus>.
SolveReport solve_condenser_direct(const KernelOperator& K, const ExternalField& field,
                                   const Constraint& xi, const QpOptions& opts = {});

// Equilibrium measure gamma = lambda / w of a node set E under G: gamma(E)
// equals the capacity 1/w, its energy equals gamma(E), and U^gamma is ~1 on
// the support and >= 1 - tol across E.
struct EquilibriumResult {
  DiscreteMeasure gamma;  // operator-local rows of G
  double capacity = 0.0;
  double w = 0.0;
  double pot_min_over_e = 0.0;
  double pot_max_on_support = 0.0;
  bool converged = false;
};

EquilibriumResult equilibrium_measure(const KernelOperator& G, const std::vector<int>& e_rows,
                                      const QpOptions& opts = {});

// Constrained/unconstrained equivalence probe. Solves the f = 0 problem under
// caps xi, forms theta = q (xi - lambda0) with q = 1/(xi(F) - 1) and the field
// f = -q U^xi, re-solves both the unconstrained and the q*xi-capped weighted
// problems, and reports how far theta is from being their common minimizer.
struct DualityExperiment {
  Eigen::VectorXd lambda0, theta, field_f;
  double q = 0.0;
  double w_prime = 0.0;              // (xi-lambda0)-average of U^{lambda0}
  double l1_unconstrained = 0.0;     // |theta - argmin| over the simplex
  double l1_capped = 0.0;            // same under caps q*xi
  double objective_gap = 0.0;        // relative gap between the two re-solves
  double eq_residual_on_support = 0.0;   // max |W_theta + q w'| on supp(theta)
  double lower_residual_off_support = 0.0;  // max (-q w' - W_theta)_+ elsewhere
  bool converged = false;
};

DualityExperiment duality_experiment(const KernelOperator& G, const Eigen::VectorXd& xi_caps,
                                     const QpOptions& opts = {});

// Green energies of the uniform unit measures on the rings of a
// HalfspacePlane geometry. Decay of these energies is the witness that the
// unconstrained problem on this geometry loses mass to infinity.
std::vector<double> escape_probe_energies(const KernelOperator& G,
                                          const std::vector<int>& annulus,
                                          const Eigen::VectorXd& quad_f);

}  // namespace condenser

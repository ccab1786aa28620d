#include "condenser/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace condenser {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> admissible_rows(const ExternalField& field, int n_f) {
  std::vector<int> rows;
  rows.reserve(n_f);
  for (int i = 0; i < n_f; ++i)
    if (field.finite_at(i)) rows.push_back(i);
  return rows;
}

// frostman_w over the admissible rows: the lambda-average of W when no caps
// are present, the (xi - lambda)-average when they are. The two agree when no
// cap saturates.
double frostman_value(const Eigen::VectorXd& W, const Eigen::VectorXd& lam,
                      const Eigen::VectorXd& caps, const std::vector<int>& rows) {
  if (caps.size() > 0) {
    double num = 0.0, den = 0.0;
    for (int i : rows) {
      const double slack = caps(i) - lam(i);
      num += W(i) * slack;
      den += slack;
    }
    if (den > 1e-12) return num / den;
  }
  double v = 0.0;
  for (int i : rows) v += W(i) * lam(i);
  return v;
}

int support_count(const Eigen::VectorXd& lam, double mass) {
  const double thr = 1e-8 * std::max(mass, 1e-300);
  int c = 0;
  for (int i = 0; i < lam.size(); ++i)
    if (lam(i) > thr) ++c;
  return c;
}

}  // namespace

ExternalField zero_field() { return {}; }

ExternalField values_field(Eigen::VectorXd f) {
  for (int i = 0; i < f.size(); ++i)
    if (std::isnan(f(i)) || f(i) == -kInf)
      throw std::invalid_argument("values_field: entries must be finite or +inf");
  ExternalField out;
  out.kind = ExternalField::Kind::Values;
  out.f = std::move(f);
  return out;
}

ExternalField swept_field(const PointCloud& cloud, const KernelOperator& K,
                          const Eigen::MatrixXd& columns, const DiscreteMeasure& zeta,
                          const BalayageOptions& opts) {
  const int nf = K.n_f;
  const int nq = K.size() - nf;
  Eigen::VectorXd u_zeta = Eigen::VectorXd::Zero(nf);
  Eigen::VectorXd beta_w = Eigen::VectorXd::Zero(nq);

  for (size_t k = 0; k < zeta.nodes.size(); ++k) {
    const int g = zeta.nodes[k];
    const double c = zeta.w(static_cast<int>(k));
    const int loc = K.local_index(g);
    if (loc >= 0 && loc < nf) {
      u_zeta += c * K.m.col(loc).head(nf);
      beta_w += c * columns.col(loc);
    } else if (loc < 0 && cloud.labels[g] == PlateLabel::Probe) {
      const Eigen::VectorXd x = cloud.point(g);
      Eigen::VectorXd rhs(nq);
      for (int q = 0; q < nq; ++q)
        rhs(q) = riesz_kernel(cloud.point(K.nodes[nf + q]), x, K.alpha, K.dim);
      const BalayageResult swept = balayage_rhs(K, rhs, 1.0, opts);
      beta_w += c * swept.nu.w;
      for (int i = 0; i < nf; ++i)
        u_zeta(i) += c * riesz_kernel(cloud.point(K.nodes[i]), x, K.alpha, K.dim);
    } else {
      throw std::invalid_argument("swept_field: sources must sit on F or probe nodes");
    }
  }

  ExternalField out;
  out.kind = ExternalField::Kind::Swept;
  out.f = u_zeta - K.fq() * beta_w;
  out.zeta = zeta;
  out.beta_zeta.nodes.assign(K.nodes.begin() + nf, K.nodes.end());
  out.beta_zeta.w = beta_w;
  return out;
}

Constraint unconstrained() { return {}; }

Constraint density_constraint(const ExampleGeometry& g, double scale) {
  Constraint c;
  c.caps.resize(static_cast<int>(g.f_nodes.size()));
  for (size_t i = 0; i < g.f_nodes.size(); ++i)
    c.caps(static_cast<int>(i)) = scale * g.cloud.quad(g.f_nodes[i]);
  return c;
}

Constraint annuli_decay_constraint(const ExampleGeometry& g, double power) {
  if (g.annulus.size() != g.f_nodes.size())
    throw std::invalid_argument("annuli_decay_constraint: geometry carries no annulus index");
  Constraint c;
  c.caps.resize(static_cast<int>(g.f_nodes.size()));
  for (size_t i = 0; i < g.f_nodes.size(); ++i) {
    const double k = std::max(1, g.annulus[i]);
    c.caps(static_cast<int>(i)) = g.cloud.quad(g.f_nodes[i]) * std::pow(k, -power);
  }
  return c;
}

Preflight preflight(const ExternalField& field, const Constraint& xi, int n_f) {
  if (xi.constrained() && xi.caps.size() != n_f)
    throw std::invalid_argument("preflight: cap vector size mismatch");
  Preflight out;
  for (int i = 0; i < n_f; ++i) {
    if (!field.finite_at(i)) continue;
    ++out.finite_nodes;
    if (xi.constrained()) out.finite_cap_mass += xi.caps(i);
  }
  if (!xi.constrained()) {
    out.feasible = out.finite_nodes > 0;
    if (!out.feasible) out.reason = "no node admits a finite field value";
  } else {
    out.feasible = out.finite_cap_mass > 1.0;
    if (!out.feasible) out.reason = "finite-cap mass does not exceed the unit charge";
  }
  return out;
}

SolveReport solve_green_problem(const KernelOperator& G, const ExternalField& field,
                                const Constraint& xi, const QpOptions& opts) {
  const int n = G.n_f;
  const std::vector<int> rows = admissible_rows(field, n);
  const int m = static_cast<int>(rows.size());
  if (m == 0) throw std::runtime_error("solve_green_problem: no admissible nodes");
  if (xi.constrained() && xi.caps.size() != n)
    throw std::invalid_argument("solve_green_problem: cap vector size mismatch");

  Eigen::MatrixXd sub(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) sub(a, b) = G.m(rows[a], rows[b]);

  QpProblem p;
  p.Q = &sub;
  p.c.resize(m);
  for (int a = 0; a < m; ++a) p.c(a) = field.at(rows[a]);
  p.mass = 1.0;
  if (xi.constrained()) {
    p.caps.resize(m);
    for (int a = 0; a < m; ++a) p.caps(a) = xi.caps(rows[a]);
  }
  const QpSolution s = solve(p, opts);

  SolveReport rep;
  rep.converged = s.converged;
  rep.objective = s.objective;
  rep.multiplier = s.multiplier;
  rep.iterations = s.iterations;
  rep.lambda = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < m; ++a) rep.lambda(rows[a]) = s.w(a);

  Eigen::VectorXd W = G.m * rep.lambda;
  for (int a = 0; a < m; ++a) W(rows[a]) += field.at(rows[a]);
  rep.frostman_w = frostman_value(W, rep.lambda, xi.caps, rows);
  rep.support_fraction = static_cast<double>(support_count(rep.lambda, 1.0)) / n;

  rep.residuals["kkt"] = s.kkt_residual;
  rep.residuals["mass"] = std::abs(rep.lambda.sum() - 1.0);
  rep.residuals["multiplier_vs_w"] = std::abs(s.multiplier - rep.frostman_w);

  if (field.kind == ExternalField::Kind::Swept) {
    // When every source is an F node the objective must match
    // ||nu + zeta||_G^2 - ||zeta||_G^2.
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    bool on_f = true;
    for (size_t k = 0; k < field.zeta.nodes.size(); ++k) {
      const int loc = G.local_index(field.zeta.nodes[k]);
      if (loc < 0) {
        on_f = false;
        break;
      }
      z(loc) += field.zeta.w(static_cast<int>(k));
    }
    if (on_f) {
      const Eigen::VectorXd sum = rep.lambda + z;
      const double identity =
          sum.dot(G.m * sum) - z.dot(G.m * z);
      rep.residuals["swept_identity"] =
          std::abs(rep.objective - identity) / std::max(1.0, std::abs(rep.objective));
    }
  }
  return rep;
}

Recovered recover_condenser(const KernelOperator& K, const Eigen::MatrixXd& columns,
                            const Eigen::VectorXd& lambda, double renorm_tol) {
  if (lambda.size() != K.n_f)
    throw std::invalid_argument("recover_condenser: lambda size mismatch");
  Recovered out;
  out.minus.nodes.assign(K.nodes.begin() + K.n_f, K.nodes.end());
  out.minus.w = columns * lambda;
  const double target = lambda.sum();
  const double got = out.minus.w.sum();
  out.deficit = target != 0.0 ? (target - got) / target : 0.0;
  if (std::abs(out.deficit) < renorm_tol && got > 0.0) {
    out.minus.w *= target / got;
    out.renormalized = true;
  }
  return out;
}

SolveReport solve_condenser_direct(const KernelOperator& K, const ExternalField& field,
                                   const Constraint& xi, const QpOptions& opts) {
  const int nf = K.n_f;
  const int nq = K.size() - nf;
  if (nq == 0) throw std::invalid_argument("solve_condenser_direct: no Dc nodes");
  const std::vector<int> rows = admissible_rows(field, nf);
  const int m = static_cast<int>(rows.size());
  if (m == 0) throw std::runtime_error("solve_condenser_direct: no admissible nodes");

  Eigen::MatrixXd A(m, m), C(m, nq);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) A(a, b) = K.m(rows[a], rows[b]);
    C.row(a) = K.m.row(rows[a]).tail(nq);
  }
  Eigen::VectorXd f(m);
  for (int a = 0; a < m; ++a) f(a) = field.at(rows[a]);
  Eigen::VectorXd caps;
  if (xi.constrained()) {
    if (xi.caps.size() != nf)
      throw std::invalid_argument("solve_condenser_direct: cap vector size mismatch");
    caps.resize(m);
    for (int a = 0; a < m; ++a) caps(a) = xi.caps(rows[a]);
  }

  const TwoBlockSolution s = solve_two_block(A, C, K.qq(), f, 1.0, 1.0, caps, opts);

  SolveReport rep;
  rep.converged = s.converged;
  rep.objective = s.objective;
  rep.multiplier = s.multiplier_p;
  rep.iterations = s.iterations;
  rep.lambda = Eigen::VectorXd::Zero(nf);
  for (int a = 0; a < m; ++a) rep.lambda(rows[a]) = s.wp(a);
  rep.wm = s.wm;

  Eigen::VectorXd W = K.ff() * rep.lambda - K.fq() * s.wm;
  for (int a = 0; a < m; ++a) W(rows[a]) += field.at(rows[a]);
  Eigen::VectorXd caps_full = xi.caps;
  rep.frostman_w = frostman_value(W, rep.lambda, caps_full, rows);
  rep.support_fraction = static_cast<double>(support_count(rep.lambda, 1.0)) / nf;
  rep.residuals["kkt"] = s.kkt_residual;
  rep.residuals["mass"] = std::abs(rep.lambda.sum() - 1.0) + std::abs(s.wm.sum() - 1.0);
  return rep;
}

EquilibriumResult equilibrium_measure(const KernelOperator& G, const std::vector<int>& e_rows,
                                      const QpOptions& opts) {
  const CapacityResult cap = green_capacity(G, e_rows, opts);
  EquilibriumResult out;
  out.capacity = cap.capacity;
  out.w = cap.w;
  out.converged = cap.converged;
  out.gamma.nodes = e_rows;
  out.gamma.w = cap.lambda.w / cap.w;

  const int m = static_cast<int>(e_rows.size());
  Eigen::VectorXd pot(m);
  for (int a = 0; a < m; ++a) {
    double v = 0.0;
    for (int b = 0; b < m; ++b) v += G.m(e_rows[a], e_rows[b]) * out.gamma.w(b);
    pot(a) = v;
  }
  out.pot_min_over_e = pot.minCoeff();
  const double thr = 1e-8 * out.gamma.w.sum();
  out.pot_max_on_support = -kInf;
  for (int a = 0; a < m; ++a)
    if (out.gamma.w(a) > thr) out.pot_max_on_support = std::max(out.pot_max_on_support, pot(a));
  return out;
}

DualityExperiment duality_experiment(const KernelOperator& G, const Eigen::VectorXd& xi_caps,
                                     const QpOptions& opts) {
  const int n = G.n_f;
  if (xi_caps.size() != n) throw std::invalid_argument("duality_experiment: cap size mismatch");
  const double xi_mass = xi_caps.sum();
  if (!(xi_mass > 1.0))
    throw std::invalid_argument("duality_experiment: caps must hold more than unit mass");

  DualityExperiment out;
  // base capped problem, no field
  QpProblem p0;
  p0.Q = &G.m;
  p0.mass = 1.0;
  p0.caps = xi_caps;
  const QpSolution s0 = solve(p0, opts);
  out.lambda0 = s0.w;

  out.q = 1.0 / (xi_mass - 1.0);
  out.theta = out.q * (xi_caps - s0.w);

  const Eigen::VectorXd u_lambda0 = G.m * s0.w;
  const Eigen::VectorXd slack = xi_caps - s0.w;
  out.w_prime = u_lambda0.dot(slack) / slack.sum();
  out.field_f = -out.q * (G.m * xi_caps);

  QpProblem pu;
  pu.Q = &G.m;
  pu.c = out.field_f;
  pu.mass = 1.0;
  const QpSolution su = solve(pu, opts);

  QpProblem pc = pu;
  pc.caps = out.q * xi_caps;
  const QpSolution sc = solve(pc, opts);

  out.l1_unconstrained = (out.theta - su.w).lpNorm<1>();
  out.l1_capped = (out.theta - sc.w).lpNorm<1>();
  out.objective_gap = std::abs(su.objective - sc.objective) /
                      std::max({std::abs(su.objective), std::abs(sc.objective), 1e-300});

  const Eigen::VectorXd w_theta = G.m * out.theta + out.field_f;
  const double level = -out.q * out.w_prime;
  const double thr = 1e-8;
  out.eq_residual_on_support = 0.0;
  out.lower_residual_off_support = 0.0;
  for (int i = 0; i < n; ++i) {
    if (out.theta(i) > thr)
      out.eq_residual_on_support =
          std::max(out.eq_residual_on_support, std::abs(w_theta(i) - level));
    else
      out.lower_residual_off_support =
          std::max(out.lower_residual_off_support, level - w_theta(i));
  }
  out.converged = s0.converged && su.converged && sc.converged;
  return out;
}

std::vector<double> escape_probe_energies(const KernelOperator& G,
                                          const std::vector<int>& annulus,
                                          const Eigen::VectorXd& quad_f) {
  const int n = G.n_f;
  if (static_cast<int>(annulus.size()) != n || quad_f.size() != n)
    throw std::invalid_argument("escape_probe_energies: annulus/quad size mismatch");
  const int rings = *std::max_element(annulus.begin(), annulus.end());
  std::vector<double> energies;
  for (int k = 1; k <= rings; ++k) {
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      if (annulus[i] == k) {
        nu(i) = quad_f(i);
        total += quad_f(i);
      }
    if (total <= 0.0) continue;
    nu /= total;
    energies.push_back(nu.dot(G.m * nu));
  }
  return energies;
}

}  // namespace condenser

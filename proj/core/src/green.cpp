#include "condenser/green.hpp"

#include <Eigen/Cholesky>

#include <stdexcept>
#include <string>

namespace condenser {

KernelOperator green_matrix(const KernelOperator& K, const Eigen::MatrixXd& columns,
                            const GreenOptions& opts) {
  const int nf = K.n_f;
  const int nq = K.size() - nf;
  if (columns.rows() != nq || columns.cols() != nf)
    throw std::invalid_argument("green_matrix: column matrix shape mismatch");

  const Eigen::MatrixXd cross = K.fq() * columns;
  Eigen::MatrixXd raw =
      K.ff() - cross - cross.transpose() + columns.transpose() * (K.qq() * columns);

  const double scale = raw.cwiseAbs().maxCoeff();
  const double asym = (raw - raw.transpose()).cwiseAbs().maxCoeff();
  if (asym > opts.asymmetry_tol * scale)
    throw std::runtime_error("green_matrix: asymmetry " + std::to_string(asym) +
                             " exceeds tolerance " +
                             std::to_string(opts.asymmetry_tol * scale));

  KernelOperator G;
  G.kind = KernelKind::Green;
  G.alpha = K.alpha;
  G.dim = K.dim;
  G.nodes.assign(K.nodes.begin(), K.nodes.begin() + nf);
  G.n_f = nf;
  G.asymmetry = asym;
  G.m = 0.5 * (raw + raw.transpose());

  G.self_values.resize(nf);
  for (int i = 0; i < nf; ++i) {
    const double uncorrected = K.self_values(i);
    const double floor = opts.diag_floor * uncorrected;
    if (G.m(i, i) < floor) {
      G.m(i, i) = floor;
      ++G.floored_diagonals;
    }
    G.self_values(i) = G.m(i, i);
  }

  G.diag_scale = K.diag_scale;
  Eigen::LLT<Eigen::MatrixXd> llt(G.m);
  while (llt.info() != Eigen::Success && G.escalations < 8) {
    G.m.diagonal() *= 2.0;
    G.diag_scale *= 2.0;
    ++G.escalations;
    llt.compute(G.m);
  }
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("green_matrix: not positive definite after escalation");
  G.self_values = G.m.diagonal();
  return G;
}

double green_energy_via_identity(const KernelOperator& K, const DiscreteMeasure& mu,
                                 const DiscreteMeasure& beta_mu) {
  return energy(K, mu, mu) - 2.0 * energy(K, mu, beta_mu) + energy(K, beta_mu, beta_mu);
}

CapacityResult green_capacity(const KernelOperator& G, const std::vector<int>& e_rows,
                              const QpOptions& opts) {
  const int m = static_cast<int>(e_rows.size());
  if (m == 0) throw std::invalid_argument("green_capacity: empty node set");
  Eigen::MatrixXd sub(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) sub(a, b) = G.m(e_rows[a], e_rows[b]);

  QpProblem p;
  p.Q = &sub;
  p.c = Eigen::VectorXd::Zero(m);
  p.mass = 1.0;
  const QpSolution s = solve(p, opts);

  CapacityResult out;
  out.w = s.objective;
  out.capacity = 1.0 / s.objective;
  out.lambda.nodes.resize(e_rows.size());
  for (int a = 0; a < m; ++a) out.lambda.nodes[a] = G.nodes[e_rows[a]];
  out.lambda.w = s.w;
  out.converged = s.converged;
  return out;
}

}  // namespace condenser

#include "condenser/balayage.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace condenser {

namespace {

// Nonnegative projection in the A-metric: minimize x^T A x - 2 b^T x over
// x >= 0, by block principal pivoting on the passive set. A is PD, so Murty's
// single-exchange fallback terminates finitely.
struct NnlsWorkspace {
  std::vector<int> passive;             // sorted index set of the cached factorization
  Eigen::LLT<Eigen::MatrixXd> llt;      // over A(passive, passive)
  bool valid = false;
};

struct NnlsResult {
  Eigen::VectorXd w;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

void factorize(Eigen::Ref<const Eigen::MatrixXd> A, const std::vector<int>& idx,
               NnlsWorkspace& ws) {
  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd sub(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      const double v = A(idx[a], idx[b]);
      sub(a, b) = v;
      sub(b, a) = v;
    }
  ws.llt.compute(sub);
  ws.passive = idx;
  ws.valid = ws.llt.info() == Eigen::Success;
}

NnlsResult nnls(Eigen::Ref<const Eigen::MatrixXd> A, const Eigen::VectorXd& b,
                const BalayageOptions& opts, std::vector<uint8_t>& mask, NnlsWorkspace& ws) {
  const int n = static_cast<int>(b.size());
  NnlsResult res;
  const double bscale = std::max(1e-300, b.cwiseAbs().maxCoeff());
  const double tol_g = opts.tol * bscale;

  if (static_cast<int>(mask.size()) != n) {
    // cold start: passive set from the unconstrained solve
    mask.assign(n, 0);
    Eigen::LLT<Eigen::MatrixXd> full(A);
    if (full.info() != Eigen::Success)
      throw std::runtime_error("balayage: complement block lost positive definiteness");
    const Eigen::VectorXd x = full.solve(b);
    for (int i = 0; i < n; ++i) mask[i] = x(i) > 0.0 ? 1 : 0;
  }

  int stalls = 0;
  int last_infeasible = n + 1;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = -b;

  for (int it = 0; it < opts.max_iter; ++it) {
    std::vector<int> idx;
    idx.reserve(n);
    for (int i = 0; i < n; ++i)
      if (mask[i]) idx.push_back(i);

    Eigen::VectorXd x;
    if (!idx.empty()) {
      if (!ws.valid || ws.passive != idx) factorize(A, idx, ws);
      if (!ws.valid) throw std::runtime_error("balayage: passive block factorization failed");
      Eigen::VectorXd bp(idx.size());
      for (size_t a = 0; a < idx.size(); ++a) bp(static_cast<int>(a)) = b(idx[a]);
      x = ws.llt.solve(bp);
    }

    w.setZero();
    for (size_t a = 0; a < idx.size(); ++a) w(idx[a]) = x(static_cast<int>(a));
    // gradient (scaled by 1/2): A w - b, via the passive columns only
    g = -b;
    for (size_t a = 0; a < idx.size(); ++a) g += x(static_cast<int>(a)) * A.col(idx[a]);

    const double wscale = std::max(1.0, w.cwiseAbs().maxCoeff());
    const double tol_w = opts.tol * wscale;
    std::vector<int> neg_w, neg_g;
    for (size_t a = 0; a < idx.size(); ++a)
      if (x(static_cast<int>(a)) < -tol_w) neg_w.push_back(idx[a]);
    for (int i = 0; i < n; ++i)
      if (!mask[i] && g(i) < -tol_g) neg_g.push_back(i);

    const int bad = static_cast<int>(neg_w.size() + neg_g.size());
    res.iterations = it + 1;
    if (bad == 0) {
      res.converged = true;
      break;
    }
    if (bad < last_infeasible) {
      last_infeasible = bad;
      stalls = 0;
    } else {
      ++stalls;
    }
    if (stalls < 4) {  // full exchange
      for (int i : neg_w) mask[i] = 0;
      for (int i : neg_g) mask[i] = 1;
    } else {  // single exchange, largest index first: finite for PD blocks
      int worst = -1;
      for (int i : neg_w) worst = std::max(worst, i);
      for (int i : neg_g) worst = std::max(worst, i);
      if (worst >= 0) mask[worst] = !mask[worst];
    }
  }

  w = w.cwiseMax(0.0);
  res.w = w;
  res.kkt_residual = (w - (w - g).cwiseMax(0.0)).lpNorm<1>();
  return res;
}

uint64_t fnv1a(const void* data, size_t len, uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t operator_fingerprint(const KernelOperator& K) {
  uint64_t h = fnv1a(&K.alpha, sizeof(double));
  const int n = K.size();
  h = fnv1a(&n, sizeof(int), h);
  h = fnv1a(&K.n_f, sizeof(int), h);
  h = fnv1a(&K.diag_scale, sizeof(double), h);
  if (!K.nodes.empty()) h = fnv1a(K.nodes.data(), K.nodes.size() * sizeof(int), h);
  if (K.size() > 0) {
    const Eigen::VectorXd d = K.m.diagonal();
    h = fnv1a(d.data(), static_cast<size_t>(d.size()) * sizeof(double), h);
    const Eigen::VectorXd r0 = K.m.row(0);
    h = fnv1a(r0.data(), static_cast<size_t>(r0.size()) * sizeof(double), h);
  }
  return h;
}

struct ColumnCache {
  std::mutex mu;
  std::deque<std::pair<uint64_t, std::shared_ptr<const Eigen::MatrixXd>>> entries;

  std::shared_ptr<const Eigen::MatrixXd> find(uint64_t key) {
    std::lock_guard<std::mutex> lock(mu);
    for (auto& e : entries)
      if (e.first == key) return e.second;
    return nullptr;
  }
  void put(uint64_t key, std::shared_ptr<const Eigen::MatrixXd> v) {
    std::lock_guard<std::mutex> lock(mu);
    entries.emplace_back(key, std::move(v));
    while (entries.size() > 6) entries.pop_front();
  }
};

ColumnCache& cache() {
  static ColumnCache c;
  return c;
}

BalayageResult sweep_rhs(const KernelOperator& K, const Eigen::VectorXd& rhs, double source_mass,
                         const BalayageOptions& opts, std::vector<uint8_t>* mask_io,
                         NnlsWorkspace* ws_io) {
  const int nq = K.size() - K.n_f;
  if (nq <= 0) throw std::invalid_argument("balayage: operator has no Dc nodes");
  if (rhs.size() != nq) throw std::invalid_argument("balayage: rhs size mismatch");

  std::vector<uint8_t> local_mask;
  NnlsWorkspace local_ws;
  std::vector<uint8_t>& mask = mask_io ? *mask_io : local_mask;
  NnlsWorkspace& ws = ws_io ? *ws_io : local_ws;

  const NnlsResult r = nnls(K.qq(), rhs, opts, mask, ws);
  if (!r.converged)
    throw std::runtime_error("balayage: projection solver did not converge (residual " +
                             std::to_string(r.kkt_residual) + ")");

  BalayageResult out;
  out.nu.nodes.assign(K.nodes.begin() + K.n_f, K.nodes.end());
  out.nu.w = r.w;
  out.kkt_residual = r.kkt_residual;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.mass_defect = source_mass != 0.0 ? (source_mass - r.w.sum()) / source_mass : 0.0;
  return out;
}

}  // namespace

BalayageResult balayage(const KernelOperator& K, const DiscreteMeasure& mu,
                        const BalayageOptions& opts) {
  if (!mu.nonnegative()) throw std::invalid_argument("balayage: measure must be nonnegative");
  const int nq = K.size() - K.n_f;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nq);
  for (size_t k = 0; k < mu.nodes.size(); ++k) {
    const int j = K.local_index(mu.nodes[k]);
    if (j < 0 || j >= K.n_f)
      throw std::invalid_argument("balayage: measure must live on the operator's F nodes");
    rhs += mu.w(static_cast<int>(k)) * K.m.col(j).tail(nq);
  }
  return sweep_rhs(K, rhs, mu.mass(), opts, nullptr, nullptr);
}

BalayageResult balayage_rhs(const KernelOperator& K, const Eigen::VectorXd& u_mu_on_q,
                            double mu_mass, const BalayageOptions& opts) {
  return sweep_rhs(K, u_mu_on_q, mu_mass, opts, nullptr, nullptr);
}

Eigen::MatrixXd balayage_columns(const KernelOperator& K, const BalayageOptions& opts) {
  const uint64_t key = operator_fingerprint(K);
  if (auto hit = cache().find(key)) return *hit;

  const int nq = K.size() - K.n_f;
  if (nq <= 0) throw std::invalid_argument("balayage_columns: operator has no Dc nodes");
  Eigen::MatrixXd B(nq, K.n_f);
  std::vector<uint8_t> mask;  // carried between columns
  NnlsWorkspace ws;
  for (int j = 0; j < K.n_f; ++j) {
    const Eigen::VectorXd rhs = K.m.col(j).tail(nq);
    const BalayageResult r = sweep_rhs(K, rhs, 1.0, opts, &mask, &ws);
    B.col(j) = r.nu.w;
  }
  cache().put(key, std::make_shared<Eigen::MatrixXd>(B));
  return B;
}

DiscreteMeasure apply_columns(const KernelOperator& K, const Eigen::MatrixXd& columns,
                              const DiscreteMeasure& mu) {
  const int nq = K.size() - K.n_f;
  if (columns.rows() != nq || columns.cols() != K.n_f)
    throw std::invalid_argument("apply_columns: column matrix shape mismatch");
  Eigen::VectorXd mf = Eigen::VectorXd::Zero(K.n_f);
  for (size_t k = 0; k < mu.nodes.size(); ++k) {
    const int j = K.local_index(mu.nodes[k]);
    if (j < 0 || j >= K.n_f)
      throw std::invalid_argument("apply_columns: measure must live on F nodes");
    mf(j) += mu.w(static_cast<int>(k));
  }
  DiscreteMeasure out;
  out.nodes.assign(K.nodes.begin() + K.n_f, K.nodes.end());
  out.w = columns * mf;
  return out;
}

DiscreteMeasure sphere_harmonic_measure(const PointCloud& cloud,
                                        const std::vector<int>& sphere_nodes, double a,
                                        const Eigen::Vector3d& y) {
  if (!(y.norm() < a))
    throw std::invalid_argument("sphere_harmonic_measure: source must be inside the sphere");
  DiscreteMeasure out;
  out.nodes = sphere_nodes;
  out.w.resize(static_cast<int>(sphere_nodes.size()));
  const double c = (a * a - y.squaredNorm()) / (4.0 * std::numbers::pi * a);
  for (size_t k = 0; k < sphere_nodes.size(); ++k) {
    const Eigen::Vector3d x = cloud.point(sphere_nodes[k]).head<3>();
    const double d = (x - y).norm();
    out.w(static_cast<int>(k)) = cloud.quad(sphere_nodes[k]) * c / (d * d * d);
  }
  return out;
}

}  // namespace condenser

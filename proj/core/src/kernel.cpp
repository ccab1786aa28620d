#include "condenser/kernel.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace condenser {

int KernelOperator::local_index(int global_node) const {
  if (lookup_.empty()) {
    int maxid = -1;
    for (int id : nodes) maxid = std::max(maxid, id);
    lookup_.assign(maxid + 1, -1);
    for (int i = 0; i < static_cast<int>(nodes.size()); ++i) lookup_[nodes[i]] = i;
  }
  if (global_node < 0 || global_node >= static_cast<int>(lookup_.size())) return -1;
  return lookup_[global_node];
}

double riesz_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double alpha, int n) {
  if (!(alpha > 0.0 && alpha <= 2.0) || n < 3 || alpha > n)
    throw std::invalid_argument("riesz kernel requires 0 < alpha <= 2 <= n, n >= 3");
  const double d = (x - y).norm();
  if (d <= 0.0) throw std::invalid_argument("riesz kernel evaluated on the diagonal");
  return std::pow(d, alpha - n);
}

KernelOperator assemble(const PointCloud& cloud, double alpha, const AssembleOptions& opts) {
  if (!(alpha > 0.0 && alpha <= 2.0) || cloud.dim < 3 || alpha > cloud.dim)
    throw std::invalid_argument("assemble requires 0 < alpha <= 2 <= n, n >= 3");

  KernelOperator K;
  K.kind = KernelKind::Riesz;
  K.alpha = alpha;
  K.dim = cloud.dim;
  for (int i = 0; i < cloud.size(); ++i)
    if (cloud.labels[i] == PlateLabel::F) K.nodes.push_back(i);
  K.n_f = static_cast<int>(K.nodes.size());
  for (int i = 0; i < cloud.size(); ++i)
    if (cloud.labels[i] == PlateLabel::Dc) K.nodes.push_back(i);

  const int n = static_cast<int>(K.nodes.size());
  if (n < 1) throw std::invalid_argument("assemble: no F or Dc nodes");

  const Eigen::VectorXd sep = separation_radii_lenient(cloud);
  Eigen::VectorXd base_diag(n);
  for (int i = 0; i < n; ++i) base_diag(i) = std::pow(sep(K.nodes[i]), alpha - cloud.dim);

  K.m.resize(n, n);
  for (int i = 0; i < n; ++i) {
    K.m(i, i) = 0.0;  // set below
    const auto xi = cloud.pts.row(K.nodes[i]);
    for (int j = i + 1; j < n; ++j) {
      const double d = (xi - cloud.pts.row(K.nodes[j])).norm();
      const double v = std::pow(d, alpha - cloud.dim);
      K.m(i, j) = v;
      K.m(j, i) = v;
    }
  }

  double scale = opts.diag_scale;
  for (int attempt = 0;; ++attempt) {
    K.m.diagonal() = scale * base_diag;
    Eigen::LLT<Eigen::MatrixXd> llt(K.m);
    if (llt.info() == Eigen::Success) {
      K.self_values = K.m.diagonal();
      K.diag_scale = scale;
      K.escalations = attempt;
      return K;
    }
    if (attempt >= opts.max_escalations)
      throw std::runtime_error("assemble: factorization failed after " +
                               std::to_string(attempt + 1) + " attempts (diag_scale " +
                               std::to_string(scale) + ")");
    scale *= 2.0;
  }
}

Eigen::VectorXd potential(const KernelOperator& K, const DiscreteMeasure& mu,
                          const std::vector<int>& query) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(K.size());
  for (size_t k = 0; k < mu.nodes.size(); ++k) {
    const int j = K.local_index(mu.nodes[k]);
    if (j < 0)
      throw std::invalid_argument("potential: measure node " + std::to_string(mu.nodes[k]) +
                                  " is not in the operator");
    acc += mu.w(static_cast<int>(k)) * K.m.col(j);
  }
  Eigen::VectorXd out(query.size());
  for (size_t q = 0; q < query.size(); ++q) {
    const int i = K.local_index(query[q]);
    if (i < 0)
      throw std::invalid_argument("potential: query node " + std::to_string(query[q]) +
                                  " is not in the operator");
    out(static_cast<int>(q)) = acc(i);
  }
  return out;
}

namespace {

double energy_impl(const KernelOperator& K, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                   bool include_diag) {
  double acc = 0.0;
  for (size_t a = 0; a < mu.nodes.size(); ++a) {
    const int i = K.local_index(mu.nodes[a]);
    if (i < 0) throw std::invalid_argument("energy: node not in operator");
    double row = 0.0;
    for (size_t b = 0; b < nu.nodes.size(); ++b) {
      const int j = K.local_index(nu.nodes[b]);
      if (j < 0) throw std::invalid_argument("energy: node not in operator");
      if (!include_diag && i == j) continue;
      row += K.m(i, j) * nu.w(static_cast<int>(b));
    }
    acc += mu.w(static_cast<int>(a)) * row;
  }
  return acc;
}

}  // namespace

double energy(const KernelOperator& K, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return energy_impl(K, mu, nu, true);
}

double offdiag_energy(const KernelOperator& K, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu) {
  return energy_impl(K, mu, nu, false);
}

double riesz_potential_at(const PointCloud& cloud, const DiscreteMeasure& mu, double alpha,
                          const Eigen::VectorXd& x) {
  double acc = 0.0;
  for (size_t k = 0; k < mu.nodes.size(); ++k) {
    const Eigen::VectorXd y = cloud.point(mu.nodes[k]);
    acc += mu.w(static_cast<int>(k)) * riesz_kernel(x, y, alpha, cloud.dim);
  }
  return acc;
}

namespace {
constexpr char kMagic[4] = {'K', 'O', 'P', '1'};
}

void dump_kernel(const KernelOperator& K, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dump_kernel: cannot open " + path);
  char header[16] = {};
  std::memcpy(header, kMagic, 4);
  const uint32_t size = static_cast<uint32_t>(K.size());
  const float alpha = static_cast<float>(K.alpha);
  const uint32_t dim = static_cast<uint32_t>(K.dim);
  std::memcpy(header + 4, &size, 4);
  std::memcpy(header + 8, &alpha, 4);
  std::memcpy(header + 12, &dim, 4);
  out.write(header, 16);
  // row-major doubles; the storage is column-major but the matrix is symmetric
  for (int i = 0; i < K.size(); ++i) {
    Eigen::VectorXd row = K.m.row(i).transpose();
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double)) * K.size());
  }
  if (!out) throw std::runtime_error("dump_kernel: write failed for " + path);
}

KernelOperator load_kernel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_kernel: cannot open " + path);
  char header[16];
  in.read(header, 16);
  if (!in || std::memcmp(header, kMagic, 4) != 0)
    throw std::runtime_error("load_kernel: bad magic in " + path);
  uint32_t size = 0, dim = 0;
  float alpha = 0;
  std::memcpy(&size, header + 4, 4);
  std::memcpy(&alpha, header + 8, 4);
  std::memcpy(&dim, header + 12, 4);

  KernelOperator K;
  K.alpha = alpha;
  K.dim = static_cast<int>(dim);
  K.m.resize(size, size);
  std::vector<double> row(size);
  for (uint32_t i = 0; i < size; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(sizeof(double)) * size);
    if (!in) throw std::runtime_error("load_kernel: truncated matrix in " + path);
    for (uint32_t j = 0; j < size; ++j) K.m(static_cast<int>(i), static_cast<int>(j)) = row[j];
  }
  K.nodes.resize(size);
  for (uint32_t i = 0; i < size; ++i) K.nodes[i] = static_cast<int>(i);
  K.n_f = static_cast<int>(size);
  K.self_values = K.m.diagonal();
  return K;
}

}  // namespace condenser

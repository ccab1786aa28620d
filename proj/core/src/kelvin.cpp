#include "condenser/kelvin.hpp"

#include <cmath>
#include <stdexcept>

namespace condenser {

Eigen::VectorXd kelvin_invert_point(const Eigen::VectorXd& x, const Eigen::VectorXd& x0) {
  const Eigen::VectorXd d = x - x0;
  const double r2 = d.squaredNorm();
  if (r2 == 0.0) throw std::invalid_argument("kelvin_invert_point: x coincides with the pole");
  return x0 + d / r2;
}

PointCloud kelvin_invert(const PointCloud& cloud, const Eigen::VectorXd& x0) {
  if (x0.size() != cloud.dim) throw std::invalid_argument("kelvin_invert: pole dimension");
  PointCloud out;
  out.dim = cloud.dim;
  const int n = cloud.size();
  out.pts.resize(n, cloud.dim);
  out.labels = cloud.labels;
  out.quad.resize(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd p = cloud.point(i);
    out.pts.row(i) = kelvin_invert_point(p, x0).transpose();
    const double r = (p - x0).norm();
    out.quad(i) = cloud.quad(i) * std::pow(r, -2.0 * (cloud.dim - 1));
  }
  return out;
}

DiscreteMeasure kelvin_measure(const PointCloud& cloud, const DiscreteMeasure& nu, double alpha,
                               const Eigen::VectorXd& x0) {
  DiscreteMeasure out;
  out.nodes = nu.nodes;
  out.w.resize(nu.w.size());
  for (size_t k = 0; k < nu.nodes.size(); ++k) {
    const double r = (cloud.point(nu.nodes[k]) - x0).norm();
    if (r == 0.0) throw std::invalid_argument("kelvin_measure: support touches the pole");
    out.w(static_cast<int>(k)) = std::pow(r, alpha - cloud.dim) * nu.w(static_cast<int>(k));
  }
  return out;
}

KelvinCheck kelvin_check(const PointCloud& cloud, const DiscreteMeasure& nu, double alpha,
                         const Eigen::VectorXd& x0,
                         const std::vector<Eigen::VectorXd>& probes) {
  const PointCloud inv = kelvin_invert(cloud, x0);
  const DiscreteMeasure nu_star = kelvin_measure(cloud, nu, alpha, x0);

  KelvinCheck out;
  for (const Eigen::VectorXd& x : probes) {
    const double u = riesz_potential_at(cloud, nu, alpha, x);
    const Eigen::VectorXd xs = kelvin_invert_point(x, x0);
    const double us = riesz_potential_at(inv, nu_star, alpha, xs);
    const double predicted = std::pow((x - x0).norm(), alpha - cloud.dim) * us;
    out.potential_residual =
        std::max(out.potential_residual, std::abs(u - predicted) / std::max(1e-300, std::abs(u)));
  }

  // off-diagonal self-energy before and after inversion
  double e = 0.0, es = 0.0;
  const int m = static_cast<int>(nu.nodes.size());
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (nu.nodes[a] == nu.nodes[b]) continue;
      e += nu.w(a) * nu.w(b) *
           riesz_kernel(cloud.point(nu.nodes[a]), cloud.point(nu.nodes[b]), alpha, cloud.dim);
      es += nu_star.w(a) * nu_star.w(b) *
            riesz_kernel(inv.point(nu.nodes[a]), inv.point(nu.nodes[b]), alpha, cloud.dim);
    }
  out.energy_residual = std::abs(e - es) / std::max(1e-300, std::abs(e));
  return out;
}

}  // namespace condenser

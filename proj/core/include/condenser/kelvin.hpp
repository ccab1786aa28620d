#pragma once

#include <Eigen/Dense>

#include "condenser/geometry.hpp"
#include "condenser/kernel.hpp"

namespace condenser {

// x* = x0 + (x - x0) / |x - x0|^2. Requires x != x0.
Eigen::VectorXd kelvin_invert_point(const Eigen::VectorXd& x, const Eigen::VectorXd& x0);

// Inversion of a whole cloud about x0 (which must not coincide with a node).
// Labels carry over; quadrature weights are pushed forward with the surface
// Jacobian |x - x0|^(-2(n-1)). Distance identity:
//   |x* - y*| = |x - y| / (|x0 - x| |x0 - y|).
PointCloud kelvin_invert(const PointCloud& cloud, const Eigen::VectorXd& x0);

// Image of nu under inversion, on the inverted cloud (same node ids):
// w*_i = |x_i - x0|^(alpha - n) w_i. Potentials transform as
//   U^{nu*}(x*) = |x - x0|^(n - alpha) U^{nu}(x),
// exactly for off-support evaluation points, and off-diagonal energies are
// preserved exactly.
DiscreteMeasure kelvin_measure(const PointCloud& cloud, const DiscreteMeasure& nu, double alpha,
                               const Eigen::VectorXd& x0);

// max over probe points of the relative potential-identity residual, and the
// relative off-diagonal energy gap. Probes must avoid the support and x0.
struct KelvinCheck {
  double potential_residual = 0.0;
  double energy_residual = 0.0;
};

KelvinCheck kelvin_check(const PointCloud& cloud, const DiscreteMeasure& nu, double alpha,
                         const Eigen::VectorXd& x0,
                         const std::vector<Eigen::VectorXd>& probes);

}  // namespace condenser

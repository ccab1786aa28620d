#include "condenser/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace condenser {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kShellGrowth = 1.2599210498948732;  // 2^(1/3)

double dist_to_segment(const Eigen::Vector3d& x, double seg_len) {
  // segment [0, seg_len) on the x1 axis
  const double t = std::clamp(x(0), 0.0, seg_len);
  return (x - Eigen::Vector3d(t, 0, 0)).norm();
}

struct Builder {
  std::vector<Eigen::Vector3d> pts;
  std::vector<PlateLabel> labels;
  std::vector<double> quad;

  int add(const Eigen::Vector3d& p, PlateLabel label, double w) {
    pts.push_back(p);
    labels.push_back(label);
    quad.push_back(w);
    return static_cast<int>(pts.size()) - 1;
  }

  PointCloud finish() const {
    PointCloud c;
    c.dim = 3;
    c.pts.resize(static_cast<int>(pts.size()), 3);
    c.labels = labels;
    c.quad.resize(static_cast<int>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i) {
      c.pts.row(static_cast<int>(i)) = pts[i].transpose();
      c.quad(static_cast<int>(i)) = quad[i];
    }
    return c;
  }
};

// Nested complement shells for a ball domain: radii gamma^k from the unit
// sphere outward, per-shell counts independent of the truncation radius so a
// larger radius only appends nodes.
void add_ball_complement(Builder& b, std::vector<int>& q_nodes, int resolution,
                         double truncation_radius) {
  const std::vector<double> radii = shell_radii(truncation_radius);
  const int base = 4 * resolution * resolution;
  for (size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    const int count =
        std::max(48, static_cast<int>(std::lround(base * std::pow(kShellGrowth, -2.0 * k))));
    std::vector<Eigen::Vector3d> shell;
    fibonacci_sphere(shell, Eigen::Vector3d::Zero(), r, count);
    const double below = (k == 0) ? 0.0 : (r - radii[k - 1]);
    const double above = (k + 1 < radii.size()) ? (radii[k + 1] - r) : r * (kShellGrowth - 1.0);
    const double slab = 0.5 * (below + above) + ((k == 0) ? 0.25 * above : 0.0);
    const double w = (4.0 * kPi * r * r / count) * slab;
    for (const auto& p : shell) q_nodes.push_back(b.add(p, PlateLabel::Dc, w));
  }
}

void add_sphere_probes(Builder& b, std::vector<int>& probe_nodes, double r, int count,
                       const std::function<bool(const Eigen::Vector3d&)>& keep) {
  std::vector<Eigen::Vector3d> pts;
  fibonacci_sphere(pts, Eigen::Vector3d::Zero(), r, count);
  for (const auto& p : pts)
    if (!keep || keep(p)) probe_nodes.push_back(b.add(p, PlateLabel::Probe, 1.0));
}

// Grid fill of a ball of radius `a` (cells of side h, centers offset by h/2 so
// the layout is symmetric and origin-free). Keeps |p| <= a - h/2.
void grid_ball(Builder& b, std::vector<int>& f_nodes, std::vector<uint8_t>& boundary, double a,
               double h) {
  const int m = static_cast<int>(std::ceil(a / h)) + 1;
  for (int i = -m; i < m; ++i)
    for (int j = -m; j < m; ++j)
      for (int k = -m; k < m; ++k) {
        const Eigen::Vector3d p((i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h);
        if (p.norm() > a - 0.5 * h) continue;
        f_nodes.push_back(b.add(p, PlateLabel::F, h * h * h));
        boundary.push_back(p.norm() > a - 2.0 * h ? 1 : 0);
      }
}

// Polar disc layout in a plane x1 = x1_level, radius rmax, target spacing h.
// Ring radii (j + 0.5) h with near-exact polar cell areas.
void polar_disc(Builder& b, std::vector<int>& out, PlateLabel label, double x1_level, double rmax,
                double h, double slab, std::vector<double>* ring_radius = nullptr) {
  for (int j = 0;; ++j) {
    const double rho = (j + 0.5) * h;
    if (rho > rmax) break;
    const int m = std::max(6, static_cast<int>(std::lround(2.0 * kPi * rho / h)));
    const double offset = 2.0 * kPi * 0.381966 * j;  // golden shift decorrelates rings
    const double cell = rho * h * (2.0 * kPi / m) * (slab > 0 ? slab : 1.0);
    for (int t = 0; t < m; ++t) {
      const double phi = offset + 2.0 * kPi * t / m;
      out.push_back(b.add(Eigen::Vector3d(x1_level, rho * std::cos(phi), rho * std::sin(phi)),
                          label, cell));
      if (ring_radius) ring_radius->push_back(rho);
    }
  }
}

ExampleGeometry make_concentric(int resolution, double truncation_radius, bool solid) {
  Builder b;
  ExampleGeometry g;
  g.domain = DomainSpec{DomainSpec::Kind::Ball, 1.0};
  const double a = 0.5;

  if (solid) {
    const double h = 1.0 / resolution;
    grid_ball(b, g.f_nodes, g.f_boundary, a, h);
    g.f_spacing = h;
  } else {
    const int count = 2 * resolution * resolution;
    std::vector<Eigen::Vector3d> sphere;
    fibonacci_sphere(sphere, Eigen::Vector3d::Zero(), a, count);
    const double w = 4.0 * kPi * a * a / count;
    for (const auto& p : sphere) {
      g.f_nodes.push_back(b.add(p, PlateLabel::F, w));
      g.f_boundary.push_back(1);  // a sphere is all relative boundary
    }
    g.f_spacing = std::sqrt(4.0 * kPi * a * a / count);
  }

  add_ball_complement(b, g.q_nodes, resolution, truncation_radius);
  add_sphere_probes(b, g.probe_nodes, 0.72, 12, nullptr);
  add_sphere_probes(b, g.probe_nodes, 0.90, 12, nullptr);

  g.cloud = b.finish();
  g.name = solid ? "solid-ball" : "concentric";
  return g;
}

ExampleGeometry make_full_ball(int resolution, double truncation_radius) {
  Builder b;
  ExampleGeometry g;
  g.domain = DomainSpec{DomainSpec::Kind::Ball, 1.0};
  const double h = 2.0 / resolution;
  grid_ball(b, g.f_nodes, g.f_boundary, 1.0, h);
  g.f_spacing = h;
  add_ball_complement(b, g.q_nodes, resolution, truncation_radius);
  add_sphere_probes(b, g.probe_nodes, 1.0 - 0.2 * h, 12, nullptr);
  g.cloud = b.finish();
  g.name = "full-ball";
  return g;
}

ExampleGeometry make_tangent_sphere(int resolution, double truncation_radius) {
  Builder b;
  ExampleGeometry g;
  g.domain = DomainSpec{DomainSpec::Kind::Ball, 1.0};
  const Eigen::Vector3d c(0.5, 0, 0);
  const double a = 0.5;
  const int count = 2 * resolution * resolution;
  const double h = std::sqrt(4.0 * kPi * a * a / count);
  std::vector<Eigen::Vector3d> sphere;
  fibonacci_sphere(sphere, c, a, count);
  // the sphere is internally tangent to the domain at (1,0,0); trim one
  // spacing of clearance so F stays strictly inside D
  for (const auto& p : sphere) {
    if (p.norm() > 1.0 - 0.75 * h) continue;
    g.f_nodes.push_back(b.add(p, PlateLabel::F, 4.0 * kPi * a * a / count));
    g.f_boundary.push_back(p.norm() > 1.0 - 2.5 * h ? 1 : 0);
  }
  g.f_spacing = h;
  add_ball_complement(b, g.q_nodes, resolution, truncation_radius);
  add_sphere_probes(b, g.probe_nodes, 0.93, 16, [&](const Eigen::Vector3d& p) {
    return (p - c).norm() > a + 2.0 * h;
  });
  g.cloud = b.finish();
  g.name = "tangent-sphere";
  return g;
}

ExampleGeometry make_tube(int resolution, double truncation_radius) {
  Builder b;
  ExampleGeometry g;
  g.domain = DomainSpec{DomainSpec::Kind::Ball, 1.0};
  const double rho_t = 0.15;  // tube radius around the segment [0,1) e_1
  const double h = 0.6 / resolution;
  const int m1 = static_cast<int>(std::ceil(1.2 / h)) + 1;
  const int m2 = static_cast<int>(std::ceil((rho_t + h) / h)) + 1;
  for (int i = -m2; i < m1; ++i)
    for (int j = -m2; j < m2; ++j)
      for (int k = -m2; k < m2; ++k) {
        const Eigen::Vector3d p((i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h);
        const double d = dist_to_segment(p, 1.0);
        if (d > rho_t || p.norm() > 1.0 - 0.5 * h) continue;
        g.f_nodes.push_back(b.add(p, PlateLabel::F, h * h * h));
        const bool near_wall = (rho_t - d) < 1.5 * h;
        const bool near_dome = p.norm() > 1.0 - 2.0 * h;
        g.f_boundary.push_back((near_wall || near_dome) ? 1 : 0);
      }
  g.f_spacing = h;
  add_ball_complement(b, g.q_nodes, resolution, truncation_radius);
  add_sphere_probes(b, g.probe_nodes, 0.8, 16, [&](const Eigen::Vector3d& p) {
    return dist_to_segment(p, 1.0) > rho_t + 2.0 * h;
  });
  g.cloud = b.finish();
  g.name = "tube";
  return g;
}

ExampleGeometry make_halfspace_plane(int resolution, double truncation_radius) {
  Builder b;
  ExampleGeometry g;
  g.domain = DomainSpec{DomainSpec::Kind::HalfSpace};
  const double rmax_f = 5.0;    // five unit rings
  const double height = 0.5;    // plate distance from the boundary plane
  const double h = 4.0 / resolution;
  std::vector<double> ring_radius;
  polar_disc(b, g.f_nodes, PlateLabel::F, height, rmax_f, h, 0.0, &ring_radius);
  g.f_spacing = h;
  for (size_t i = 0; i < g.f_nodes.size(); ++i) {
    const double rho = ring_radius[i];
    g.annulus.push_back(std::max(1, static_cast<int>(std::ceil(rho))));
    g.f_boundary.push_back(rho > rmax_f - 2.0 * h ? 1 : 0);
  }

  // complement boundary plane: fine rings under the plate footprint, then
  // geometrically coarsening rings out to the truncation radius
  {
    std::vector<double> radii;
    for (int j = 0;; ++j) {
      const double rho = (j + 0.5) * h;
      if (rho > rmax_f + 2.0) break;
      radii.push_back(rho);
    }
    double step = h;
    for (double rho = radii.back() + step;;) {
      step *= 1.22;
      rho += step;
      if (rho > truncation_radius) break;
      radii.push_back(rho);
    }
    for (size_t j = 0; j < radii.size(); ++j) {
      const double rho = radii[j];
      const double below = (j == 0) ? 2.0 * rho : rho - radii[j - 1];
      const double above = (j + 1 < radii.size()) ? radii[j + 1] - rho : below;
      const double dr = 0.5 * (below + above);
      const double local = std::max(h, 0.8 * dr);
      const int m = std::max(6, static_cast<int>(std::lround(2.0 * kPi * rho / local)));
      const double offset = 2.0 * kPi * 0.381966 * j;
      const double cell = rho * dr * (2.0 * kPi / m);
      for (int t = 0; t < m; ++t) {
        const double phi = offset + 2.0 * kPi * t / m;
        g.q_nodes.push_back(b.add(
            Eigen::Vector3d(0.0, rho * std::cos(phi), rho * std::sin(phi)), PlateLabel::Dc, cell));
      }
    }
  }
  // sparse depth layers so the complement is a volume, not just its boundary
  for (double depth : {0.6, 1.8, 4.2}) {
    std::vector<int> tmp;
    polar_disc(b, tmp, PlateLabel::Dc, -depth, 0.7 * truncation_radius, 4.0 * h, 1.2 * depth);
    g.q_nodes.insert(g.q_nodes.end(), tmp.begin(), tmp.end());
  }
  for (double x1 : {0.35, 0.65}) {
    for (double rho : {0.8, 2.1, 3.4}) {
      g.probe_nodes.push_back(
          b.add(Eigen::Vector3d(x1, rho * 0.70710678, rho * 0.70710678), PlateLabel::Probe, 1.0));
      g.probe_nodes.push_back(
          b.add(Eigen::Vector3d(x1, -rho * 0.5, rho * 0.8660254), PlateLabel::Probe, 1.0));
    }
  }
  g.cloud = b.finish();
  g.name = "halfspace-plane";
  return g;
}

ExampleGeometry make_cusp(int resolution, double truncation_radius) {
  Builder b;
  ExampleGeometry g;
  g.domain = DomainSpec{DomainSpec::Kind::Horn};
  const double dx = 1.2 / resolution;

  // plate: surface of revolution rho = exp(-x1), rings from x1 = 2 until the
  // radius pinches below a quarter spacing
  double x_end = 2.0;
  for (int j = 0;; ++j) {
    const double x = 2.0 + (j + 0.5) * dx;
    const double rho = std::exp(-x);
    if (rho < 0.25 * dx) break;
    x_end = x;
    const int m = std::max(4, static_cast<int>(std::lround(2.0 * kPi * rho / dx)));
    const double stretch = std::sqrt(1.0 + rho * rho);  // |d rho / d x1| = rho
    const double cell = 2.0 * kPi * rho * dx * stretch / m;
    const double offset = 2.0 * kPi * 0.381966 * j;
    for (int t = 0; t < m; ++t) {
      const double phi = offset + 2.0 * kPi * t / m;
      g.f_nodes.push_back(
          b.add(Eigen::Vector3d(x, rho * std::cos(phi), rho * std::sin(phi)), PlateLabel::F, cell));
      g.f_boundary.push_back(j == 0 ? 1 : 0);  // open end at x1 = 2
    }
  }
  g.f_spacing = dx;

  // complement: horn wall rho = 1/x1 (it belongs to D^c), the entry face
  // x1 = 1, a second wall layer, and a coarse back plane
  const double x_wall_end = std::min(truncation_radius, x_end + 2.0);
  const double dw = 1.6 * dx;
  for (int j = 0;; ++j) {
    const double x = 1.0 + (j + 0.5) * dw;
    if (x > x_wall_end) break;
    for (double factor : {1.0, 1.35}) {
      const double rho = factor / x;
      const int m = std::max(6, static_cast<int>(std::lround(2.0 * kPi * rho / dw)));
      const double stretch = std::sqrt(1.0 + 1.0 / (x * x));
      const double cell = 2.0 * kPi * rho * dw * stretch / m * (factor == 1.0 ? 1.0 : 2.0);
      const double offset = 2.0 * kPi * (factor == 1.0 ? 0.381966 : 0.190983) * j;
      for (int t = 0; t < m; ++t) {
        const double phi = offset + 2.0 * kPi * t / m;
        g.q_nodes.push_back(b.add(Eigen::Vector3d(x, rho * std::cos(phi), rho * std::sin(phi)),
                                  PlateLabel::Dc, cell));
      }
    }
  }
  {
    std::vector<int> tmp;
    polar_disc(b, tmp, PlateLabel::Dc, 1.0 - 0.25 * dw, 1.0, dw, 0.5);
    g.q_nodes.insert(g.q_nodes.end(), tmp.begin(), tmp.end());
    tmp.clear();
    polar_disc(b, tmp, PlateLabel::Dc, 0.4, 1.4, 3.0 * dw, 1.0);
    g.q_nodes.insert(g.q_nodes.end(), tmp.begin(), tmp.end());
  }
  // probes between the plate and the wall
  for (double x : {2.2, 2.8, 3.4}) {
    const double rho = 0.5 * (std::exp(-x) + 1.0 / x);
    g.probe_nodes.push_back(b.add(Eigen::Vector3d(x, rho, 0), PlateLabel::Probe, 1.0));
    g.probe_nodes.push_back(b.add(Eigen::Vector3d(x, 0, -rho), PlateLabel::Probe, 1.0));
  }
  g.cloud = b.finish();
  g.name = "cusp";
  return g;
}

}  // namespace

const char* to_string(PlateLabel label) {
  switch (label) {
    case PlateLabel::F: return "F";
    case PlateLabel::Dc: return "Dc";
    case PlateLabel::Probe: return "probe";
  }
  return "?";
}

PlateLabel parse_label(const std::string& s) {
  if (s == "F") return PlateLabel::F;
  if (s == "Dc") return PlateLabel::Dc;
  if (s == "probe") return PlateLabel::Probe;
  throw std::invalid_argument("unknown plate label: '" + s + "'");
}

std::vector<int> PointCloud::nodes_of(PlateLabel label) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

void PointCloud::validate() const {
  const int n = size();
  if (static_cast<int>(labels.size()) != n || quad.size() != n)
    throw std::invalid_argument("point cloud: labels/quad size mismatch");
  if (dim < 3) throw std::invalid_argument("point cloud: dim must be >= 3");
  for (int i = 0; i < n; ++i) {
    if (!pts.row(i).allFinite())
      throw std::invalid_argument("point cloud: non-finite coordinate at node " +
                                  std::to_string(i));
    if (labels[i] != PlateLabel::Probe && !(quad(i) > 0.0))
      throw std::invalid_argument("point cloud: nonpositive quadrature weight at node " +
                                  std::to_string(i));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if ((pts.row(i) - pts.row(j)).norm() < 1e-12)
        throw std::invalid_argument("point cloud: nodes " + std::to_string(i) + " and " +
                                    std::to_string(j) + " coincide");
    }
}

bool DomainSpec::contains(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::Ball: return x.norm() < radius;
    case Kind::HalfSpace: return x(0) > 0.0;
    case Kind::Horn: {
      if (x(0) <= 1.0) return false;
      const double rho2 = x.tail(x.size() - 1).squaredNorm();
      return rho2 < 1.0 / (x(0) * x(0));
    }
  }
  return false;
}

double DomainSpec::boundary_distance(const Eigen::VectorXd& x) const {
  switch (kind) {
    case Kind::Ball: return std::abs(radius - x.norm());
    case Kind::HalfSpace: return std::abs(x(0));
    case Kind::Horn: {
      // coarse but monotone: min of distance to the entry face and to the wall
      const double rho = x.tail(x.size() - 1).norm();
      const double wall = std::abs(1.0 / std::max(1.0, x(0)) - rho);
      return std::min(std::abs(x(0) - 1.0), wall);
    }
  }
  return 0.0;
}

ExampleName parse_example_name(const std::string& s) {
  if (s == "ex1" || s == "tube") return ExampleName::Tube;
  if (s == "ex2" || s == "full-ball" || s == "fullball") return ExampleName::FullBall;
  if (s == "ex3" || s == "tangent-sphere") return ExampleName::TangentSphere;
  if (s == "ex4" || s == "halfspace-plane") return ExampleName::HalfspacePlane;
  if (s == "ex5" || s == "cusp") return ExampleName::Cusp;
  if (s == "concentric") return ExampleName::Concentric;
  if (s == "solid-ball" || s == "solidball") return ExampleName::SolidBall;
  throw std::invalid_argument("unknown example name: '" + s + "'");
}

const char* to_string(ExampleName name) {
  switch (name) {
    case ExampleName::Tube: return "tube";
    case ExampleName::FullBall: return "full-ball";
    case ExampleName::TangentSphere: return "tangent-sphere";
    case ExampleName::HalfspacePlane: return "halfspace-plane";
    case ExampleName::Cusp: return "cusp";
    case ExampleName::Concentric: return "concentric";
    case ExampleName::SolidBall: return "solid-ball";
  }
  return "?";
}

std::vector<double> shell_radii(double truncation_radius) {
  std::vector<double> out;
  double r = 1.0;
  while (r <= truncation_radius * (1.0 + 1e-9)) {
    out.push_back(r);
    r *= kShellGrowth;
  }
  return out;
}

void fibonacci_sphere(std::vector<Eigen::Vector3d>& pts, const Eigen::Vector3d& c, double r,
                      int count) {
  const double ga = kPi * (3.0 - std::sqrt(5.0));  // golden angle
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = ga * i;
    pts.emplace_back(c + r * Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z));
  }
}

ExampleGeometry generate_example(ExampleName name, int resolution, double truncation_radius) {
  if (resolution < 4) throw std::invalid_argument("resolution too small (need >= 4)");
  if (!(truncation_radius > 0) || !std::isfinite(truncation_radius))
    throw std::invalid_argument("truncation_radius must be positive and finite");

  ExampleGeometry g;
  switch (name) {
    case ExampleName::Concentric: g = make_concentric(resolution, truncation_radius, false); break;
    case ExampleName::SolidBall: g = make_concentric(resolution, truncation_radius, true); break;
    case ExampleName::FullBall: g = make_full_ball(resolution, truncation_radius); break;
    case ExampleName::TangentSphere: g = make_tangent_sphere(resolution, truncation_radius); break;
    case ExampleName::Tube: g = make_tube(resolution, truncation_radius); break;
    case ExampleName::HalfspacePlane:
      g = make_halfspace_plane(resolution, truncation_radius);
      break;
    case ExampleName::Cusp: g = make_cusp(resolution, truncation_radius); break;
  }

  double circum = 0.0;
  for (int i : g.f_nodes) circum = std::max(circum, g.cloud.pts.row(i).norm());
  if (truncation_radius <= circum)
    throw std::invalid_argument("truncation_radius must exceed the F circumradius (" +
                                std::to_string(circum) + ")");
  for (int i : g.f_nodes)
    if (!g.domain.contains(g.cloud.point(i)))
      throw std::invalid_argument("generated F node " + std::to_string(i) + " escapes the domain");
  g.cloud.validate();
  return g;
}

namespace {

Eigen::VectorXd separation_impl(const PointCloud& cloud, bool lenient) {
  const int n = cloud.size();
  if (n < 2) throw std::invalid_argument("separation radii need at least 2 nodes");
  Eigen::VectorXd nearest_same = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  Eigen::VectorXd nearest_any = nearest_same;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double d = (cloud.pts.row(i) - cloud.pts.row(j)).norm();
      nearest_any(i) = std::min(nearest_any(i), d);
      nearest_any(j) = std::min(nearest_any(j), d);
      if (cloud.labels[i] == cloud.labels[j]) {
        nearest_same(i) = std::min(nearest_same(i), d);
        nearest_same(j) = std::min(nearest_same(j), d);
      }
    }
  }
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    if (std::isinf(nearest_same(i))) {
      if (!lenient)
        throw std::invalid_argument("separation radius undefined: node " + std::to_string(i) +
                                    " is alone in its label class");
      out(i) = 0.5 * nearest_any(i);
    } else {
      out(i) = 0.5 * nearest_same(i);
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd separation_radii(const PointCloud& cloud) { return separation_impl(cloud, false); }

Eigen::VectorXd separation_radii_lenient(const PointCloud& cloud) {
  return separation_impl(cloud, true);
}

PointCloud load_points(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("point CSV: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) header.push_back(tok);
  }
  if (header.size() < 5 || header.back() != "weight" || header[header.size() - 2] != "label")
    throw std::invalid_argument("point CSV: header must be x1,...,xn,label,weight");
  const int dim = static_cast<int>(header.size()) - 2;
  for (int d = 0; d < dim; ++d)
    if (header[d] != "x" + std::to_string(d + 1))
      throw std::invalid_argument("point CSV: coordinate column " + std::to_string(d + 1) +
                                  " must be named x" + std::to_string(d + 1));
  if (dim < 3) throw std::invalid_argument("point CSV: need dimension >= 3");

  std::vector<std::vector<double>> rows;
  std::vector<PlateLabel> labels;
  std::vector<double> weights;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    if (static_cast<int>(cells.size()) != dim + 2)
      throw std::invalid_argument("point CSV line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(dim + 2) + " cells, got " +
                                  std::to_string(cells.size()));
    std::vector<double> row(dim);
    try {
      for (int d = 0; d < dim; ++d) row[d] = std::stod(cells[d]);
      weights.push_back(std::stod(cells[dim + 1]));
    } catch (const std::exception&) {
      throw std::invalid_argument("point CSV line " + std::to_string(lineno) +
                                  ": malformed number");
    }
    labels.push_back(parse_label(cells[dim]));
    rows.push_back(std::move(row));
  }

  PointCloud c;
  c.dim = dim;
  c.pts.resize(static_cast<int>(rows.size()), dim);
  c.quad.resize(static_cast<int>(rows.size()));
  c.labels = labels;
  for (size_t i = 0; i < rows.size(); ++i) {
    for (int d = 0; d < dim; ++d) c.pts(static_cast<int>(i), d) = rows[i][d];
    c.quad(static_cast<int>(i)) = weights[i];
  }
  c.validate();
  return c;
}

PointCloud load_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open point file: " + path);
  return load_points(in);
}

void save_points(const PointCloud& cloud, std::ostream& out) {
  for (int d = 0; d < cloud.dim; ++d) out << "x" << (d + 1) << ",";
  out << "label,weight\n";
  out.precision(17);
  for (int i = 0; i < cloud.size(); ++i) {
    for (int d = 0; d < cloud.dim; ++d) out << cloud.pts(i, d) << ",";
    out << to_string(cloud.labels[i]) << "," << cloud.quad(i) << "\n";
  }
}

}  // namespace condenser

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace condenser {

// Node roles. F carries the positive plate, Dc the complement plate,
// Probe nodes are evaluation-only and never enter assembled operators.
enum class PlateLabel : uint8_t { F, Dc, Probe };

const char* to_string(PlateLabel label);
PlateLabel parse_label(const std::string& s);

// Finite node set in R^n, n >= 3. Invariants (checked by validate()):
// all coordinates finite, no two nodes within 1e-12, quadrature weights
// strictly positive for F and Dc nodes.
struct PointCloud {
  int dim = 3;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pts;  // N x dim
  std::vector<PlateLabel> labels;
  Eigen::VectorXd quad;  // per-node quadrature weight

  int size() const { return static_cast<int>(pts.rows()); }
  Eigen::VectorXd point(int i) const { return pts.row(i).transpose(); }
  std::vector<int> nodes_of(PlateLabel label) const;

  void validate() const;  // throws std::invalid_argument with node index
};

// Weights supported on a subset of cloud nodes. Weights may be negative only
// where an operation explicitly allows signed measures.
struct DiscreteMeasure {
  std::vector<int> nodes;  // global node ids, strictly increasing not required
  Eigen::VectorXd w;

  double mass() const { return w.size() ? w.sum() : 0.0; }
  bool nonnegative(double tol = 0.0) const { return w.size() == 0 || w.minCoeff() >= -tol; }
};

// Domains D with analytically known complement. Used for validation, probe
// placement and boundary classification of generated geometries.
struct DomainSpec {
  enum class Kind { Ball, HalfSpace, Horn };
  Kind kind = Kind::Ball;
  double radius = 1.0;  // Ball only

  // Ball:      D = { |x| < radius }
  // HalfSpace: D = { x1 > 0 }
  // Horn:      D = { x1 > 1, x2^2 + x3^2 < 1/x1^2 }
  bool contains(const Eigen::VectorXd& x) const;
  double boundary_distance(const Eigen::VectorXd& x) const;  // >= 0, 0 on the boundary
};

enum class ExampleName {
  Tube,            // ex1: ball, F = solid tube around a radius segment
  FullBall,        // ex2: ball, F fills D on a rejection-sampled grid
  TangentSphere,   // ex3: ball, F = internally tangent sphere
  HalfspacePlane,  // ex4: half-space, F = parallel plane disc (annuli)
  Cusp,            // ex5: horn domain, F = exponentially pinching surface
  Concentric,      // closed-form capacitor: F = sphere(0,1/2) in the unit ball
  SolidBall,       // F = solid ball radius 1/2 in the unit ball
};

ExampleName parse_example_name(const std::string& s);  // ex1..ex5 or descriptive slug
const char* to_string(ExampleName name);

// A generated instance. f_nodes/q_nodes/probe_nodes index into cloud.
// f_boundary is parallel to f_nodes (true when the node sits within ~1.5
// local spacings of the relative boundary of the F set). annulus is parallel
// to f_nodes for HalfspacePlane (1-based ring index), empty otherwise.
struct ExampleGeometry {
  std::string name;
  PointCloud cloud;
  DomainSpec domain;
  std::vector<int> f_nodes;
  std::vector<int> q_nodes;
  std::vector<int> probe_nodes;
  std::vector<uint8_t> f_boundary;
  std::vector<int> annulus;
  double f_spacing = 0.0;  // representative F node spacing
};

// Deterministic generators. resolution scales node counts; truncation_radius
// bounds the discretized part of D^c (must exceed the F circumradius).
// Doubling truncation_radius only appends D^c nodes: existing node positions,
// separation radii and quadrature weights are unchanged.
ExampleGeometry generate_example(ExampleName name, int resolution, double truncation_radius);

// Half the distance to the nearest node of the same label class.
// Throws when a class present in the cloud has exactly one node.
Eigen::VectorXd separation_radii(const PointCloud& cloud);

// Lenient variant used by operator assembly: a singleton class falls back to
// the nearest node of any class. Throws only for a single-node cloud.
Eigen::VectorXd separation_radii_lenient(const PointCloud& cloud);

// CSV exchange format: header "x1,...,xn,label,weight", label in {F, Dc, probe}.
PointCloud load_points(std::istream& in);
PointCloud load_points_file(const std::string& path);
void save_points(const PointCloud& cloud, std::ostream& out);

// Nested shell radii gamma^k, gamma = 2^(1/3), while gamma^k <= truncation_radius
// (relative slack 1e-9 so R = 8 includes the shell at exactly 8).
std::vector<double> shell_radii(double truncation_radius);

// Deterministic near-uniform sphere layout (golden-angle spiral), radius r
// around center c. Appends to pts.
void fibonacci_sphere(std::vector<Eigen::Vector3d>& pts, const Eigen::Vector3d& c, double r,
                      int count);

}  // namespace condenser

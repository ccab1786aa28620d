#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "condenser/geometry.hpp"

using namespace condenser;

namespace {

// Brute-force half nearest same-label distance, the quantity separation_radii
// is supposed to produce.
Eigen::VectorXd oracle_separation(const PointCloud& cloud) {
  const int n = cloud.size();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (j == i || cloud.labels[j] != cloud.labels[i]) continue;
      best = std::min(best, (cloud.pts.row(i) - cloud.pts.row(j)).norm());
    }
    out(i) = 0.5 * best;
  }
  return out;
}

PointCloud two_sphere_cloud(int nf, int nq) {
  PointCloud cloud;
  cloud.dim = 3;
  std::vector<Eigen::Vector3d> pts;
  fibonacci_sphere(pts, Eigen::Vector3d::Zero(), 0.5, nf);
  fibonacci_sphere(pts, Eigen::Vector3d::Zero(), 1.0, nq);
  cloud.pts.resize(static_cast<int>(pts.size()), 3);
  for (size_t i = 0; i < pts.size(); ++i) cloud.pts.row(static_cast<int>(i)) = pts[i];
  cloud.labels.assign(pts.size(), PlateLabel::Dc);
  std::fill(cloud.labels.begin(), cloud.labels.begin() + nf, PlateLabel::F);
  cloud.quad = Eigen::VectorXd::Constant(static_cast<int>(pts.size()), 1.0 / nf);
  return cloud;
}

}  // namespace

TEST_CASE("separation radii match the brute-force oracle") {
  const PointCloud cloud = two_sphere_cloud(60, 110);
  const Eigen::VectorXd got = separation_radii(cloud);
  const Eigen::VectorXd want = oracle_separation(cloud);
  REQUIRE(got.size() == want.size());
  CHECK((got - want).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("separation radii reject singleton classes, the lenient variant does not") {
  PointCloud cloud = two_sphere_cloud(60, 110);
  cloud.labels[0] = PlateLabel::Probe;  // exactly one probe node
  CHECK_THROWS_AS(separation_radii(cloud), std::invalid_argument);
  const Eigen::VectorXd lenient = separation_radii_lenient(cloud);
  CHECK(lenient.size() == cloud.size());
  CHECK(lenient.minCoeff() > 0.0);
}

TEST_CASE("point cloud validation pinpoints the offending node") {
  PointCloud cloud = two_sphere_cloud(20, 30);
  CHECK_NOTHROW(cloud.validate());

  PointCloud dup = cloud;
  dup.pts.row(3) = dup.pts.row(7);
  dup.labels[3] = dup.labels[7];
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);

  PointCloud nonfinite = cloud;
  nonfinite.pts(5, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(nonfinite.validate(), std::invalid_argument);

  PointCloud badweight = cloud;
  badweight.quad(2) = 0.0;
  CHECK_THROWS_AS(badweight.validate(), std::invalid_argument);
}

TEST_CASE("every generator produces a valid, well-formed geometry") {
  for (ExampleName name :
       {ExampleName::Tube, ExampleName::FullBall, ExampleName::TangentSphere,
        ExampleName::HalfspacePlane, ExampleName::Cusp, ExampleName::Concentric,
        ExampleName::SolidBall}) {
    CAPTURE(to_string(name));
    const ExampleGeometry g = generate_example(name, 8, 8.0);
    CHECK_NOTHROW(g.cloud.validate());
    CHECK(g.f_nodes.size() > 0);
    CHECK(g.q_nodes.size() > 0);
    CHECK(g.probe_nodes.size() > 0);
    CHECK(g.f_boundary.size() == g.f_nodes.size());
    CHECK(g.f_spacing > 0.0);
    if (name == ExampleName::HalfspacePlane) {
      CHECK(g.annulus.size() == g.f_nodes.size());
      for (int a : g.annulus) CHECK(a >= 1);
    } else {
      CHECK(g.annulus.empty());
    }
    for (int i : g.f_nodes) {
      CHECK(g.cloud.labels[i] == PlateLabel::F);
      CHECK(g.domain.contains(g.cloud.point(i)));
    }
    for (int i : g.q_nodes) {
      CHECK(g.cloud.labels[i] == PlateLabel::Dc);
      // outside the open domain; the innermost shell rides the boundary itself
      const Eigen::VectorXd x = g.cloud.point(i);
      CHECK((!g.domain.contains(x) || g.domain.boundary_distance(x) <= 1e-12));
    }
    for (int i : g.probe_nodes) CHECK(g.cloud.labels[i] == PlateLabel::Probe);
  }
}

TEST_CASE("growing the truncation radius only appends complement shells") {
  // layout is F block, then Dc shells, then probes; a larger radius inserts
  // extra shells between the shared Dc prefix and the probe tail
  for (ExampleName name : {ExampleName::Concentric, ExampleName::Tube}) {
    CAPTURE(to_string(name));
    const ExampleGeometry g4 = generate_example(name, 6, 4.0);
    const ExampleGeometry g8 = generate_example(name, 6, 8.0);
    REQUIRE(g8.cloud.size() > g4.cloud.size());
    CHECK(g8.f_nodes == g4.f_nodes);
    REQUIRE(g8.q_nodes.size() > g4.q_nodes.size());

    const int shared = g4.q_nodes.back() + 1;  // F block plus the common shells
    REQUIRE(g4.q_nodes.front() == static_cast<int>(g4.f_nodes.size()));
    CHECK(g8.cloud.pts.topRows(shared) == g4.cloud.pts.topRows(shared));
    CHECK(g8.cloud.quad.head(shared) == g4.cloud.quad.head(shared));
    for (int i = 0; i < shared; ++i) CHECK(g8.cloud.labels[i] == g4.cloud.labels[i]);

    const Eigen::VectorXd s4 = separation_radii_lenient(g4.cloud);
    const Eigen::VectorXd s8 = separation_radii_lenient(g8.cloud);
    CHECK((s8.head(shared) - s4.head(shared)).lpNorm<Eigen::Infinity>() <= 1e-14);
  }

  // the horn re-lays its lateral wall when the radius grows; only the positive
  // plate is stable there
  const ExampleGeometry c4 = generate_example(ExampleName::Cusp, 6, 4.0);
  const ExampleGeometry c8 = generate_example(ExampleName::Cusp, 6, 8.0);
  CHECK(c8.f_nodes == c4.f_nodes);
  CHECK(c8.cloud.pts.topRows(static_cast<int>(c4.f_nodes.size())) ==
        c4.cloud.pts.topRows(static_cast<int>(c4.f_nodes.size())));
  CHECK(c8.q_nodes.size() > c4.q_nodes.size());
}

TEST_CASE("truncation radius must exceed the positive plate") {
  CHECK_THROWS_AS(generate_example(ExampleName::Concentric, 6, 0.4), std::invalid_argument);
}

TEST_CASE("example names parse from both aliases and slugs") {
  CHECK(parse_example_name("ex1") == ExampleName::Tube);
  CHECK(parse_example_name("ex2") == ExampleName::FullBall);
  CHECK(parse_example_name("ex3") == ExampleName::TangentSphere);
  CHECK(parse_example_name("ex4") == ExampleName::HalfspacePlane);
  CHECK(parse_example_name("ex5") == ExampleName::Cusp);
  CHECK(parse_example_name("concentric") == ExampleName::Concentric);
  CHECK(parse_example_name("solid-ball") == ExampleName::SolidBall);
  for (ExampleName name : {ExampleName::Tube, ExampleName::SolidBall})
    CHECK(parse_example_name(to_string(name)) == name);
  CHECK_THROWS_AS(parse_example_name("ex9"), std::invalid_argument);
}

TEST_CASE("CSV round trip preserves the cloud") {
  const ExampleGeometry g = generate_example(ExampleName::TangentSphere, 5, 4.0);
  std::stringstream buf;
  save_points(g.cloud, buf);

  std::string header;
  std::getline(buf, header);
  CHECK(header == "x1,x2,x3,label,weight");
  buf.seekg(0);

  const PointCloud back = load_points(buf);
  REQUIRE(back.size() == g.cloud.size());
  CHECK((back.pts - g.cloud.pts).lpNorm<Eigen::Infinity>() <= 1e-15);
  CHECK((back.quad - g.cloud.quad).lpNorm<Eigen::Infinity>() <= 1e-15);
  for (int i = 0; i < back.size(); ++i) CHECK(back.labels[i] == g.cloud.labels[i]);
}

TEST_CASE("the point reader rejects malformed rows") {
  {
    std::stringstream bad("x1,x2,x3,label,weight\n0,0,0,QQ,1\n");
    CHECK_THROWS_AS(load_points(bad), std::invalid_argument);
  }
  {
    std::stringstream bad("x1,x2,x3,label,weight\n0,0,zero,F,1\n");
    CHECK_THROWS_AS(load_points(bad), std::invalid_argument);
  }
  {
    std::stringstream bad("x1,x2,label,weight\n");  // fewer than 3 coordinates
    CHECK_THROWS_AS(load_points(bad), std::invalid_argument);
  }
}

TEST_CASE("plate labels round trip through their names") {
  for (PlateLabel l : {PlateLabel::F, PlateLabel::Dc, PlateLabel::Probe})
    CHECK(parse_label(to_string(l)) == l);
  CHECK_THROWS_AS(parse_label("plate"), std::invalid_argument);
}

TEST_CASE("shell radii grow by cube root of two up to the truncation") {
  const std::vector<double> radii = shell_radii(8.0);
  REQUIRE(radii.size() >= 2);
  CHECK(radii.front() == 1.0);
  CHECK(radii.back() == doctest::Approx(8.0).epsilon(1e-9));
  for (size_t k = 1; k < radii.size(); ++k)
    CHECK(radii[k] / radii[k - 1] == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
}

TEST_CASE("domains classify points and measure boundary distance") {
  DomainSpec ball{DomainSpec::Kind::Ball, 1.0};
  CHECK(ball.contains(Eigen::Vector3d(0.2, 0.1, 0.0)));
  CHECK(!ball.contains(Eigen::Vector3d(1.5, 0.0, 0.0)));
  CHECK(ball.boundary_distance(Eigen::Vector3d(0.5, 0.0, 0.0)) == doctest::Approx(0.5));

  DomainSpec half{DomainSpec::Kind::HalfSpace};
  CHECK(half.contains(Eigen::Vector3d(0.1, -4.0, 9.0)));
  CHECK(!half.contains(Eigen::Vector3d(-0.1, 0.0, 0.0)));
  CHECK(half.boundary_distance(Eigen::Vector3d(0.3, 1.0, 1.0)) == doctest::Approx(0.3));

  DomainSpec horn{DomainSpec::Kind::Horn};
  CHECK(horn.contains(Eigen::Vector3d(2.0, 0.1, 0.1)));
  CHECK(!horn.contains(Eigen::Vector3d(0.5, 0.0, 0.0)));   // x1 <= 1
  CHECK(!horn.contains(Eigen::Vector3d(2.0, 0.5, 0.0)));   // outside the pinch
}

TEST_CASE("discrete measures report mass and sign") {
  DiscreteMeasure mu;
  CHECK(mu.mass() == 0.0);
  CHECK(mu.nonnegative());
  mu.nodes = {0, 2};
  mu.w = (Eigen::VectorXd(2) << 0.75, 0.25).finished();
  CHECK(mu.mass() == doctest::Approx(1.0));
  mu.w(1) = -0.1;
  CHECK(!mu.nonnegative());
  CHECK(mu.nonnegative(0.2));
}

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <vector>

#include "condenser/balayage.hpp"
#include "condenser/geometry.hpp"
#include "condenser/green.hpp"
#include "condenser/kernel.hpp"
#include "condenser/problems.hpp"
#include "condenser/verify.hpp"

using namespace condenser;

namespace {

// A hand-sized operator whose matrix is chosen directly, so every number in
// the checks below is computable on paper.
KernelOperator toy_operator(const Eigen::MatrixXd& m) {
  KernelOperator K;
  K.kind = KernelKind::Green;
  K.alpha = 2.0;
  K.dim = 3;
  K.m = m;
  K.self_values = m.diagonal();
  K.n_f = static_cast<int>(m.rows());
  K.nodes.resize(K.n_f);
  std::iota(K.nodes.begin(), K.nodes.end(), 0);
  return K;
}

}  // namespace

TEST_CASE("the two-sided level check accepts a solved equilibrium") {
  const ExampleGeometry g = generate_example(ExampleName::TangentSphere, 6, 4.0);
  AssembleOptions opts;
  opts.diag_scale = 1.8;
  const KernelOperator K = assemble(g.cloud, 2.0, opts);
  const KernelOperator G = green_matrix(K, balayage_columns(K));

  const SolveReport rep = solve_green_problem(G, zero_field(), unconstrained());
  REQUIRE(rep.converged);

  Eigen::VectorXd quad_f(G.n_f);
  for (int i = 0; i < G.n_f; ++i) quad_f(i) = g.cloud.quad(g.f_nodes[i]);

  const FrostmanReport fr = frostman_check(G, rep.lambda, zero_field(), unconstrained(), quad_f);
  CHECK(fr.pass);
  CHECK(fr.w == doctest::Approx(rep.frostman_w).epsilon(1e-9));
  CHECK(fr.lower_violation <= 1e-3 * std::abs(fr.w));
  CHECK(fr.upper_violation <= 1e-3 * std::abs(fr.w));
  CHECK(fr.excluded_fraction <= 1e-3);
  CHECK(fr.support_count > 0);
}

TEST_CASE("the level check rejects a measure that is not an equilibrium") {
  const ExampleGeometry g = generate_example(ExampleName::TangentSphere, 6, 4.0);
  AssembleOptions opts;
  opts.diag_scale = 1.8;
  const KernelOperator K = assemble(g.cloud, 2.0, opts);
  const KernelOperator G = green_matrix(K, balayage_columns(K));

  // uniform mass on an asymmetric set leaves the potential far from level
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(G.n_f, 1.0 / G.n_f);
  Eigen::VectorXd quad_f(G.n_f);
  for (int i = 0; i < G.n_f; ++i) quad_f(i) = g.cloud.quad(g.f_nodes[i]);

  const FrostmanReport fr = frostman_check(G, uniform, zero_field(), unconstrained(), quad_f);
  CHECK(!fr.pass);
}

TEST_CASE("the exceptional budget absorbs violations of tiny quadrature weight") {
  const KernelOperator G = toy_operator(Eigen::MatrixXd::Identity(3, 3));
  Eigen::VectorXd lambda(3), quad(3);
  lambda << 0.5, 0.5, 0.0;  // W = lambda, level 0.5, node 2 sits at W = 0

  quad << 1.0, 1.0, 1e-4;   // violating node is within the 0.1% budget
  FrostmanReport fr = frostman_check(G, lambda, zero_field(), unconstrained(), quad);
  CHECK(fr.w == doctest::Approx(0.5));
  CHECK(fr.pass);
  CHECK(fr.lower_violation == 0.0);
  CHECK(fr.excluded_fraction > 0.0);
  CHECK(fr.excluded_fraction <= 1e-3);

  quad << 1.0, 1.0, 1.0;    // the same violation is now too heavy to excuse
  fr = frostman_check(G, lambda, zero_field(), unconstrained(), quad);
  CHECK(!fr.pass);
  CHECK(fr.lower_violation == doctest::Approx(0.5));
  CHECK(fr.excluded_fraction == 0.0);
}

TEST_CASE("saturated nodes are exempt from the lower bound") {
  // under a binding cap the carrying node may sit below the level
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 0.1, 0.1, 1.0;
  const KernelOperator G = toy_operator(m);

  Constraint xi;
  xi.caps = (Eigen::VectorXd(2) << 0.3, 1.0).finished();
  Eigen::VectorXd lambda = (Eigen::VectorXd(2) << 0.3, 0.7).finished();
  const Eigen::VectorXd quad = Eigen::VectorXd::Ones(2);

  // W = (0.37, 0.73); node 0 is saturated, so the level comes from node 1
  const FrostmanReport fr = frostman_check(G, lambda, zero_field(), xi, quad);
  CHECK(fr.w == doctest::Approx(0.73));
  CHECK(fr.pass);
  CHECK(fr.lower_violation == 0.0);
}

TEST_CASE("support fractions weigh quadrature, boundary fractions weigh mass") {
  Eigen::VectorXd lambda(3), quad(3);
  lambda << 0.7, 0.3, 1e-12;
  quad << 0.2, 0.3, 0.5;
  const std::vector<uint8_t> boundary = {1, 0, 0};

  const SupportReport rep = support_check(lambda, quad, boundary);
  CHECK(rep.support_count == 2);
  CHECK(rep.support_fraction == doctest::Approx(0.5));
  CHECK(rep.boundary_fraction == doctest::Approx(0.7));

  const SupportReport no_flags = support_check(lambda, quad, {});
  CHECK(std::isnan(no_flags.boundary_fraction));
}

TEST_CASE("probe points witness the strict inequality away from the plates") {
  const ExampleGeometry g = generate_example(ExampleName::Concentric, 6, 4.0);
  const KernelOperator K = assemble(g.cloud, 2.0);
  const Eigen::MatrixXd B = balayage_columns(K);
  const KernelOperator G = green_matrix(K, B);

  const SolveReport rep = solve_green_problem(G, zero_field(), unconstrained());
  REQUIRE(rep.converged);
  const Recovered rec = recover_condenser(K, B, rep.lambda);

  DiscreteMeasure lambda_global;
  for (int i = 0; i < G.n_f; ++i)
    if (rep.lambda(i) > 0.0) lambda_global.nodes.push_back(g.f_nodes[i]);
  lambda_global.w.resize(static_cast<int>(lambda_global.nodes.size()));
  int k = 0;
  for (int i = 0; i < G.n_f; ++i)
    if (rep.lambda(i) > 0.0) lambda_global.w(k++) = rep.lambda(i);

  const ProbeReport probe = strict_inequality_probe(g.cloud, 2.0, lambda_global, rec.minus,
                                                    rep.frostman_w, g.probe_nodes);
  CHECK(probe.margin > 0.0);
  CHECK(probe.max_potential < rep.frostman_w);
}

TEST_CASE("the randomized suite passes and is reproducible") {
  const InvariantLedger a = run_invariant_suite(42, {"small"});
  CHECK(a.all_pass());
  CHECK(a.entries.size() >= 7);

  const InvariantLedger b = run_invariant_suite(42, {"small"});
  REQUIRE(a.entries.size() == b.entries.size());
  for (size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].name == b.entries[i].name);
    CHECK(a.entries[i].value == b.entries[i].value);
  }

  CHECK(run_invariant_suite(42, {}).entries.empty());
  CHECK(run_invariant_suite(42, {}).all_pass());
  CHECK_THROWS_AS(run_invariant_suite(42, {"huge"}), std::invalid_argument);
}

TEST_CASE("granular checks catch injected faults") {
  const ExampleGeometry g = generate_example(ExampleName::Concentric, 5, 4.0);
  const KernelOperator K = assemble(g.cloud, 2.0);

  CHECK(check_symmetry(K).pass);
  CHECK(check_pd_diag(K).pass);

  KernelOperator crooked = K;
  crooked.m(0, 1) += 1e-3;
  CHECK(!check_symmetry(crooked).pass);

  KernelOperator sunk = K;
  sunk.m(2, 2) = -1.0;
  sunk.self_values(2) = -1.0;
  CHECK(!check_pd_diag(sunk).pass);

  // domination: an inflated sweep rises above the source potential at the probes
  const Eigen::MatrixXd B = balayage_columns(K);
  DiscreteMeasure mu;
  mu.nodes = {g.f_nodes[0]};
  mu.w = Eigen::VectorXd::Ones(1);
  DiscreteMeasure swept = apply_columns(K, B, mu);
  CHECK(check_domination(K, g.cloud, 2.0, mu, swept, g.probe_nodes, 0.02).pass);
  swept.w *= 2.0;
  CHECK(!check_domination(K, g.cloud, 2.0, mu, swept, g.probe_nodes, 0.02).pass);
}

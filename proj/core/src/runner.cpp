#include "condenser/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "condenser/balayage.hpp"
#include "condenser/kelvin.hpp"

namespace condenser {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ExampleGeometry geometry_from_config(const GeometryConfig& gc) {
  if (gc.points_file.empty())
    return generate_example(parse_example_name(gc.example), gc.resolution, gc.truncation_radius);

  ExampleGeometry g;
  g.name = "custom";
  g.cloud = load_points_file(gc.points_file);
  g.cloud.validate();
  if (gc.domain == "ball") {
    g.domain.kind = DomainSpec::Kind::Ball;
    g.domain.radius = gc.domain_radius;
  } else if (gc.domain == "halfspace") {
    g.domain.kind = DomainSpec::Kind::HalfSpace;
  } else if (gc.domain == "horn") {
    g.domain.kind = DomainSpec::Kind::Horn;
  } else {
    throw ConfigError("geometry: unknown domain '" + gc.domain + "'");
  }
  g.f_nodes = g.cloud.nodes_of(PlateLabel::F);
  g.q_nodes = g.cloud.nodes_of(PlateLabel::Dc);
  g.probe_nodes = g.cloud.nodes_of(PlateLabel::Probe);
  if (g.f_nodes.empty() || g.q_nodes.empty())
    throw ConfigError("geometry: points file needs F and Dc nodes");
  for (int i : g.f_nodes)
    if (!g.domain.contains(g.cloud.point(i)))
      throw ConfigError("geometry: F node " + std::to_string(i) + " lies outside the domain");
  for (int i : g.q_nodes)
    if (g.domain.contains(g.cloud.point(i)))
      throw ConfigError("geometry: Dc node " + std::to_string(i) + " lies inside the domain");
  return g;
}

ExternalField field_from_config(const RunConfig& cfg, const ExampleGeometry& g,
                                const KernelOperator& K, const Eigen::MatrixXd& columns) {
  if (cfg.field.kind == "zero") return zero_field();

  if (cfg.field.kind == "values") {
    std::ifstream in(cfg.field.values_file);
    if (!in) throw ConfigError("field: cannot open values file " + cfg.field.values_file);
    std::vector<double> vals;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
      ++ln;
      if (line.empty() || line[0] == '#') continue;
      if (line == "inf" || line == "+inf") {
        vals.push_back(std::numeric_limits<double>::infinity());
        continue;
      }
      try {
        size_t used = 0;
        vals.push_back(std::stod(line, &used));
        if (used != line.size()) throw std::invalid_argument(line);
      } catch (const std::exception&) {
        throw ConfigError("field: values file line " + std::to_string(ln) +
                          ": expected a number or inf");
      }
    }
    if (vals.size() != g.f_nodes.size())
      throw ConfigError("field: values file holds " + std::to_string(vals.size()) +
                        " entries for " + std::to_string(g.f_nodes.size()) + " F nodes");
    return values_field(Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size())));
  }

  // swept: attach each atom to the nearest node strictly inside D
  DiscreteMeasure zeta;
  std::vector<int> candidates = g.f_nodes;
  candidates.insert(candidates.end(), g.probe_nodes.begin(), g.probe_nodes.end());
  std::vector<double> weights;
  for (const auto& atom : cfg.field.atoms) {
    Eigen::Vector3d x(atom[0], atom[1], atom[2]);
    if (!g.domain.contains(x))
      throw ConfigError("field: swept atom lies outside the domain");
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i : candidates) {
      const double d = (g.cloud.point(i).head<3>() - x).norm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    zeta.nodes.push_back(best);
    weights.push_back(atom[3]);
  }
  zeta.w = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<int>(weights.size()));
  return swept_field(g.cloud, K, columns, zeta);
}

Constraint constraint_from_config(const RunConfig& cfg, const ExampleGeometry& g) {
  if (cfg.constraint.kind == "none") return unconstrained();
  if (cfg.constraint.kind == "density") return density_constraint(g, cfg.constraint.scale);
  try {
    return annuli_decay_constraint(g, cfg.constraint.decay_power);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

RunArtifacts run_pipeline(const RunConfig& cfg) {
  RunArtifacts a;
  a.config = cfg;
  const auto t_total = Clock::now();

  auto t = Clock::now();
  a.geom = geometry_from_config(cfg.geometry);
  a.timings["generate"] = seconds_since(t);

  t = Clock::now();
  AssembleOptions ao;
  ao.diag_scale = cfg.kernel.diag_scale;
  try {
    a.K = assemble(a.geom.cloud, cfg.kernel.alpha, ao);
  } catch (const std::exception& e) {
    throw SolverError(std::string("assemble: ") + e.what());
  }
  a.timings["assemble"] = seconds_since(t);

  t = Clock::now();
  BalayageOptions bo;
  bo.tol = std::min(1e-12, cfg.solver.tol);
  try {
    a.columns = balayage_columns(a.K, bo);
    a.G = green_matrix(a.K, a.columns);
  } catch (const std::exception& e) {
    throw SolverError(std::string("green assembly: ") + e.what());
  }
  a.timings["columns"] = seconds_since(t);

  a.field = field_from_config(cfg, a.geom, a.K, a.columns);
  a.xi = constraint_from_config(cfg, a.geom);
  a.pre = preflight(a.field, a.xi, a.K.n_f);

  if (!a.pre.feasible) {
    if (cfg.assertions.expect_feasible)
      throw ConfigError("preflight: infeasible problem (" + a.pre.reason + ")");
    a.assertions.push_back({"infeasible_as_expected", true, 0.0});
    a.exit_code = kOk;
    a.timings["total"] = seconds_since(t_total);
    return a;
  }

  QpOptions qo;
  qo.tol = cfg.solver.tol;
  qo.max_iter = cfg.solver.max_iter;

  t = Clock::now();
  a.green = solve_green_problem(a.G, a.field, a.xi, qo);
  a.timings["solve"] = seconds_since(t);
  if (!a.green.converged) a.exit_code = kSolverError;

  a.recovered = recover_condenser(a.K, a.columns, a.green.lambda, cfg.solver.renorm_tol);
  a.green.mass_deficit = a.recovered.deficit;

  if (cfg.solver.direct_solve) {
    t = Clock::now();
    a.direct = solve_condenser_direct(a.K, a.field, a.xi, qo);
    a.timings["direct"] = seconds_since(t);
    if (!a.direct.converged) a.exit_code = kSolverError;
    a.duality_gap = std::abs(a.green.objective - a.direct.objective) /
                    std::max(1.0, std::abs(a.green.objective));
  }

  t = Clock::now();
  Eigen::VectorXd quad_f(a.K.n_f);
  for (int i = 0; i < a.K.n_f; ++i) quad_f(i) = a.geom.cloud.quad(a.K.nodes[i]);
  FrostmanOptions fo;
  fo.rel_tol = cfg.assertions.max_frostman_rel.value_or(cfg.solver.pot_tol);
  a.frostman = frostman_check(a.G, a.green.lambda, a.field, a.xi, quad_f, fo);
  a.support = support_check(a.green.lambda, quad_f, a.geom.f_boundary);
  if (!a.geom.annulus.empty())
    a.escape_energies = escape_probe_energies(a.G, a.geom.annulus, quad_f);
  a.timings["verify"] = seconds_since(t);

  a.assertions.push_back({"feasible_as_expected", a.pre.feasible == cfg.assertions.expect_feasible,
                          a.pre.feasible ? 1.0 : 0.0});
  if (cfg.assertions.max_frostman_rel) {
    const double rel = std::max(a.frostman.lower_violation, a.frostman.upper_violation) /
                       std::max(std::abs(a.frostman.w), 1e-300);
    a.assertions.push_back({"frostman", a.frostman.pass, rel});
  }
  if (cfg.assertions.max_duality_gap && cfg.solver.direct_solve)
    a.assertions.push_back(
        {"duality_gap", a.duality_gap <= *cfg.assertions.max_duality_gap, a.duality_gap});
  if (cfg.assertions.max_mass_deficit)
    a.assertions.push_back({"mass_deficit",
                            std::abs(a.recovered.deficit) <= *cfg.assertions.max_mass_deficit,
                            a.recovered.deficit});
  if (cfg.assertions.min_support_fraction)
    a.assertions.push_back({"support_fraction",
                            a.support.support_fraction >= *cfg.assertions.min_support_fraction,
                            a.support.support_fraction});
  if (cfg.assertions.min_boundary_fraction)
    a.assertions.push_back({"boundary_fraction",
                            a.support.boundary_fraction >= *cfg.assertions.min_boundary_fraction,
                            a.support.boundary_fraction});
  if (cfg.assertions.expect_energy_escape) {
    if (a.escape_energies.size() < 2)
      throw ConfigError("assertions: energy escape needs a ringed geometry");
    const double ratio = a.escape_energies.back() / a.escape_energies.front();
    a.assertions.push_back(
        {"no_energy_escape", ratio > cfg.assertions.max_escape_ratio.value_or(0.2), ratio});
  }

  if (a.exit_code == kOk)
    for (const AssertionOutcome& o : a.assertions)
      if (!o.pass) a.exit_code = kAssertionFailure;

  a.timings["total"] = seconds_since(t_total);
  return a;
}

std::string sweep_csv(const RunConfig& base, const std::string& param,
                      const std::vector<double>& values, int threads) {
  if (param != "truncation_radius" && param != "resolution" && param != "alpha")
    throw ConfigError("sweep: parameter must be truncation_radius, resolution, or alpha");
  if (values.empty()) throw ConfigError("sweep: no values given");

  if (threads <= 0) {
    threads = 1;
    if (const char* env = std::getenv("CONDENSER_LAB_THREADS")) {
      try {
        threads = std::max(1, std::stoi(env));
      } catch (const std::exception&) {
        throw ConfigError("sweep: CONDENSER_LAB_THREADS is not a number");
      }
    }
  }
  threads = std::min<int>(threads, static_cast<int>(values.size()));

  struct Row {
    double value = 0.0;
    double objective = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    double deficit = std::numeric_limits<double>::quiet_NaN();
    double runtime = 0.0;
    std::string error;
  };
  std::vector<Row> rows(values.size());
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= values.size()) break;
      Row& row = rows[i];
      row.value = values[i];
      RunConfig cfg = base;
      if (param == "truncation_radius") cfg.geometry.truncation_radius = values[i];
      else if (param == "resolution") cfg.geometry.resolution = static_cast<int>(values[i]);
      else cfg.kernel.alpha = values[i];
      try {
        const RunArtifacts a = run_pipeline(cfg);
        row.objective = a.green.objective;
        row.gap = a.duality_gap;
        row.deficit = a.recovered.deficit;
        row.runtime = a.timings.at("total");
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();

  for (const Row& row : rows)
    if (!row.error.empty()) throw SolverError("sweep at " + param + " = " +
                                              std::to_string(row.value) + ": " + row.error);

  std::ostringstream out;
  out.precision(17);
  out << "value,objective,duality_gap,mass_deficit,runtime_seconds\n";
  for (const Row& row : rows)
    out << row.value << ',' << row.objective << ',' << row.gap << ',' << row.deficit << ','
        << row.runtime << '\n';
  return out.str();
}

}  // namespace condenser

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "condenser/runner.hpp"

namespace condenser {

namespace {

using ordered_json = nlohmann::ordered_json;

// non-finite doubles serialize as null already; this keeps the intent visible
ordered_json num_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json measure_state(const PointCloud& cloud, const std::vector<int>& nodes,
                           const Eigen::VectorXd& w) {
  ordered_json out;
  ordered_json xs = ordered_json::array();
  ordered_json ws = ordered_json::array();
  for (size_t k = 0; k < nodes.size(); ++k) {
    if (w(static_cast<int>(k)) == 0.0) continue;
    ordered_json x = ordered_json::array();
    for (int d = 0; d < cloud.dim; ++d) x.push_back(cloud.pts(nodes[k], d));
    xs.push_back(std::move(x));
    ws.push_back(w(static_cast<int>(k)));
  }
  out["x"] = std::move(xs);
  out["w"] = std::move(ws);
  return out;
}

struct StoredMeasure {
  Eigen::MatrixXd x;  // m x dim
  Eigen::VectorXd w;
};

StoredMeasure read_measure(const ordered_json& j, int dim) {
  StoredMeasure m;
  const auto& xs = j.at("x");
  const auto& ws = j.at("w");
  m.x.resize(static_cast<int>(xs.size()), dim);
  m.w.resize(static_cast<int>(ws.size()));
  for (size_t k = 0; k < xs.size(); ++k) {
    for (int d = 0; d < dim; ++d) m.x(static_cast<int>(k), d) = xs[k][d].get<double>();
    m.w(static_cast<int>(k)) = ws[k].get<double>();
  }
  return m;
}

double potential_of(const StoredMeasure& m, double alpha, int dim, const Eigen::Vector3d& x) {
  double u = 0.0;
  for (int k = 0; k < m.w.size(); ++k) {
    const double r = (m.x.row(k).transpose() - x).norm();
    u += m.w(k) * std::pow(r, alpha - dim);
  }
  return u;
}

}  // namespace

std::string report_json(const RunArtifacts& a, bool include_timings) {
  ordered_json j;
  j["name"] = a.config.name;
  j["example"] = a.geom.name;
  j["alpha"] = a.config.kernel.alpha;
  j["seed"] = a.config.solver.seed;
  j["exit_code"] = a.exit_code;
  j["feasible"] = a.pre.feasible;

  ordered_json pre;
  pre["finite_nodes"] = a.pre.finite_nodes;
  pre["finite_cap_mass"] = a.pre.finite_cap_mass;
  pre["reason"] = a.pre.reason;
  j["preflight"] = std::move(pre);

  j["objective"] = num_or_null(a.pre.feasible ? a.green.objective
                                              : std::numeric_limits<double>::quiet_NaN());
  j["frostman_w"] = num_or_null(a.green.frostman_w);
  j["duality_gap"] = num_or_null(a.duality_gap);
  j["mass_deficit"] = num_or_null(a.recovered.minus.nodes.empty()
                                      ? std::numeric_limits<double>::quiet_NaN()
                                      : a.recovered.deficit);
  j["support_fraction"] = num_or_null(a.support.support_fraction);
  j["boundary_fraction"] = num_or_null(a.support.boundary_fraction);
  const bool pure_capacity = a.config.field.kind == "zero" && !a.xi.constrained();
  j["capacity"] = pure_capacity && a.pre.feasible && a.green.objective > 0.0
                      ? num_or_null(1.0 / a.green.objective)
                      : ordered_json(nullptr);

  ordered_json res;
  for (const auto& [k, v] : a.green.residuals) res[k] = num_or_null(v);
  for (const auto& [k, v] : a.direct.residuals) res["direct_" + k] = num_or_null(v);
  j["residuals"] = std::move(res);

  ordered_json inv;
  inv["kernel_escalations"] = a.K.escalations;
  inv["green_asymmetry"] = num_or_null(a.G.asymmetry);
  inv["green_floored_diagonals"] = a.G.floored_diagonals;
  inv["green_escalations"] = a.G.escalations;
  if (a.columns.size() > 0) {
    const Eigen::VectorXd defect =
        Eigen::VectorXd::Ones(a.columns.cols()) - a.columns.colwise().sum().transpose();
    inv["column_mass_defect_max"] = num_or_null(defect.maxCoeff());
  }
  inv["frostman_level"] = num_or_null(a.frostman.w);
  inv["frostman_lower_violation"] = num_or_null(a.frostman.lower_violation);
  inv["frostman_upper_violation"] = num_or_null(a.frostman.upper_violation);
  inv["frostman_excluded_fraction"] = num_or_null(a.frostman.excluded_fraction);
  inv["frostman_pass"] = a.frostman.pass;
  inv["renormalized"] = a.recovered.renormalized;
  for (const auto& [k, v] : a.green.invariants) inv[k] = num_or_null(v);
  if (!a.escape_energies.empty()) {
    inv["escape_ratio"] =
        num_or_null(a.escape_energies.back() / a.escape_energies.front());
  }
  j["invariants"] = std::move(inv);

  ordered_json asserts = ordered_json::array();
  for (const AssertionOutcome& o : a.assertions) {
    ordered_json e;
    e["name"] = o.name;
    e["pass"] = o.pass;
    e["value"] = num_or_null(o.value);
    asserts.push_back(std::move(e));
  }
  j["assertions"] = std::move(asserts);

  if (!a.escape_energies.empty()) j["escape_energies"] = a.escape_energies;

  if (a.config.solver.direct_solve && a.pre.feasible && a.direct.lambda.size() > 0) {
    ordered_json d;
    d["objective"] = num_or_null(a.direct.objective);
    d["frostman_w"] = num_or_null(a.direct.frostman_w);
    d["support_fraction"] = num_or_null(a.direct.support_fraction);
    d["iterations"] = a.direct.iterations;
    j["direct"] = std::move(d);
  }

  // enough state to re-evaluate potentials along a segment later
  if (a.pre.feasible && a.green.lambda.size() > 0) {
    ordered_json st;
    st["alpha"] = a.config.kernel.alpha;
    st["dim"] = a.geom.cloud.dim;
    st["w"] = num_or_null(a.green.frostman_w);
    st["lambda"] = measure_state(a.geom.cloud, a.geom.f_nodes, a.green.lambda);
    st["minus"] = measure_state(a.geom.cloud, a.recovered.minus.nodes, a.recovered.minus.w);
    if (a.field.kind == ExternalField::Kind::Swept) {
      Eigen::VectorXd zw = a.field.zeta.w;
      ordered_json zx = ordered_json::array();
      ordered_json zws = ordered_json::array();
      for (size_t k = 0; k < a.field.zeta.nodes.size(); ++k) {
        ordered_json x = ordered_json::array();
        for (int d = 0; d < a.geom.cloud.dim; ++d)
          x.push_back(a.geom.cloud.pts(a.field.zeta.nodes[k], d));
        zx.push_back(std::move(x));
        zws.push_back(zw(static_cast<int>(k)));
      }
      ordered_json z;
      z["x"] = std::move(zx);
      z["w"] = std::move(zws);
      st["zeta"] = std::move(z);
      st["beta_zeta"] =
          measure_state(a.geom.cloud, a.field.beta_zeta.nodes, a.field.beta_zeta.w);
    }
    Eigen::VectorXd lo = a.geom.cloud.pts.colwise().minCoeff();
    Eigen::VectorXd hi = a.geom.cloud.pts.colwise().maxCoeff();
    ordered_json bb;
    bb["min"] = std::vector<double>(lo.data(), lo.data() + lo.size());
    bb["max"] = std::vector<double>(hi.data(), hi.data() + hi.size());
    st["bbox"] = std::move(bb);
    j["state"] = std::move(st);
  }

  if (include_timings) {
    ordered_json t;
    for (const auto& [k, v] : a.timings) t[k] = v;
    j["timings"] = std::move(t);
  }
  return j.dump(2) + "\n";
}

std::string slice_csv(const std::string& report_path, const Eigen::Vector3d& from,
                      const Eigen::Vector3d& to) {
  std::ifstream in(report_path);
  if (!in) throw std::invalid_argument("slice: cannot open report " + report_path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument("slice: report is not valid JSON: " + std::string(e.what()));
  }
  if (!j.contains("state"))
    throw std::invalid_argument("slice: report carries no state section (infeasible run?)");
  const auto& st = j["state"];
  const int dim = st.at("dim").get<int>();
  if (dim != 3) throw std::invalid_argument("slice: only 3-d reports supported");
  const double alpha = st.at("alpha").get<double>();
  const StoredMeasure lambda = read_measure(st.at("lambda"), dim);
  const StoredMeasure minus = read_measure(st.at("minus"), dim);
  const bool swept = st.contains("zeta");
  StoredMeasure zeta, beta_zeta;
  if (swept) {
    zeta = read_measure(st.at("zeta"), dim);
    beta_zeta = read_measure(st.at("beta_zeta"), dim);
  }

  Eigen::Vector3d lo, hi;
  for (int d = 0; d < 3; ++d) {
    lo(d) = st.at("bbox").at("min")[d].get<double>();
    hi(d) = st.at("bbox").at("max")[d].get<double>();
  }
  const double slack = 1e-9 * (hi - lo).norm();
  for (const Eigen::Vector3d& p : {from, to})
    for (int d = 0; d < 3; ++d)
      if (p(d) < lo(d) - slack || p(d) > hi(d) + slack)
        throw std::invalid_argument("slice: segment leaves the stored bounding box");

  const double level = j.contains("frostman_w") && j["frostman_w"].is_number()
                           ? j["frostman_w"].get<double>()
                           : std::numeric_limits<double>::quiet_NaN();

  const bool single = (from - to).norm() == 0.0;
  const int samples = single ? 1 : 200;
  std::ostringstream out;
  out.precision(17);
  out << "t,x,y,z,u_g,w_field,frostman_w\n";
  for (int i = 0; i < samples; ++i) {
    const double t = single ? 0.0 : static_cast<double>(i) / (samples - 1);
    const Eigen::Vector3d x = from + t * (to - from);
    const double u_g = potential_of(lambda, alpha, dim, x) - potential_of(minus, alpha, dim, x);
    double field = 0.0;
    if (swept)
      field = potential_of(zeta, alpha, dim, x) - potential_of(beta_zeta, alpha, dim, x);
    out << t << ',' << x(0) << ',' << x(1) << ',' << x(2) << ',' << u_g << ',' << (u_g + field)
        << ',' << level << '\n';
  }
  return out.str();
}

}  // namespace condenser

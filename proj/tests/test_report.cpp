#include <doctest.h>

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "condenser/runner.hpp"
#include "support.hpp"

using namespace condenser;
using nlohmann::json;

namespace {

RunConfig small_config() {
  std::stringstream in(R"(
[geometry]
example = "concentric"
resolution = 6
truncation_radius = 4.0
[kernel]
alpha = 2.0
)");
  return parse_config(in, "report-test");
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("reports expose the full result schema") {
  const RunArtifacts a = run_pipeline(small_config());
  const json j = json::parse(report_json(a));

  for (const char* key :
       {"name", "example", "alpha", "seed", "objective", "frostman_w", "duality_gap",
        "mass_deficit", "support_fraction", "residuals", "invariants", "timings",
        "assertions", "exit_code", "preflight", "state", "direct", "capacity"})
    CHECK_MESSAGE(j.contains(key), key);

  CHECK(j["name"] == "report-test");
  CHECK(j["example"] == "concentric");
  CHECK(j["alpha"] == 2.0);
  CHECK(j["exit_code"] == 0);
  CHECK(j["objective"].is_number());
  CHECK(j["residuals"].is_object());
  CHECK(j["residuals"].contains("kkt"));
  CHECK(j["invariants"].is_object());
  CHECK(j["timings"].is_object());
  CHECK(j["timings"].contains("total"));
  CHECK(j["state"].is_object());
  CHECK(j["assertions"].is_array());

  // a pure capacity run reports capacity = 1 / objective
  CHECK(j["capacity"].get<double>() ==
        doctest::Approx(1.0 / j["objective"].get<double>()).epsilon(1e-12));
}

TEST_CASE("reports are byte-identical across runs once timings are stripped") {
  const RunConfig cfg = small_config();
  const RunArtifacts a = run_pipeline(cfg);
  const RunArtifacts b = run_pipeline(cfg);

  const std::string ja = report_json(a, /*include_timings=*/false);
  const std::string jb = report_json(b, /*include_timings=*/false);
  CHECK(ja == jb);

  CHECK(!json::parse(ja).contains("timings"));
  CHECK(json::parse(report_json(a, true)).contains("timings"));

  // with timings the texts differ, but nothing else does
  json full_a = json::parse(report_json(a, true));
  json full_b = json::parse(report_json(b, true));
  full_a.erase("timings");
  full_b.erase("timings");
  CHECK(full_a.dump() == full_b.dump());
}

TEST_CASE("slices sample the stored potentials along a segment") {
  testsupport::ScratchDir dir;
  const std::string report_path = dir.file("report.json");
  const RunArtifacts a = run_pipeline(small_config());
  testsupport::write_file(report_path, report_json(a));

  const std::string csv =
      slice_csv(report_path, Eigen::Vector3d(-0.4, 0.0, 0.0), Eigen::Vector3d(0.4, 0.0, 0.0));
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,x,y,z,u_g,w_field,frostman_w");
  CHECK(count_lines(csv) == 201);  // header + 200 samples

  // the last column repeats the solved level on every row
  std::string row;
  std::getline(lines, row);
  const double level = std::stod(row.substr(row.rfind(',') + 1));
  CHECK(level == doctest::Approx(a.green.frostman_w).epsilon(1e-12));

  // a degenerate segment yields a single sample
  const std::string point_csv =
      slice_csv(report_path, Eigen::Vector3d(0.2, 0.0, 0.0), Eigen::Vector3d(0.2, 0.0, 0.0));
  CHECK(count_lines(point_csv) == 2);

  // segments outside the stored bounding box are rejected
  CHECK_THROWS(slice_csv(report_path, Eigen::Vector3d(0.0, 0.0, 0.0),
                         Eigen::Vector3d(50.0, 0.0, 0.0)));
  CHECK_THROWS(slice_csv(dir.file("missing.json"), Eigen::Vector3d(0.0, 0.0, 0.0),
                         Eigen::Vector3d(0.1, 0.0, 0.0)));
}

TEST_CASE("sweeps emit one reproducible row per parameter value") {
  const RunConfig cfg = small_config();
  const std::string csv = sweep_csv(cfg, "resolution", {5.0, 6.0});
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "value,objective,duality_gap,mass_deficit,runtime_seconds");
  CHECK(count_lines(csv) == 3);

  // physics columns are deterministic; runtimes are not
  auto physics = [](const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string row;
    std::getline(in, row);
    while (std::getline(in, row)) out.push_back(row.substr(0, row.rfind(',')));
    return out;
  };
  CHECK(physics(csv) == physics(sweep_csv(cfg, "resolution", {5.0, 6.0})));

  // worker threads do not change the physics
  CHECK(physics(csv) == physics(sweep_csv(cfg, "resolution", {5.0, 6.0}, 2)));

  CHECK_THROWS_AS(sweep_csv(cfg, "tol", {1.0}), ConfigError);
  CHECK_THROWS_AS(sweep_csv(cfg, "resolution", {}), ConfigError);
}

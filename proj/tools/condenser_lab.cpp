#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "condenser/runner.hpp"

namespace {

using condenser::ConfigError;
using condenser::SolverError;

std::vector<double> parse_value_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    size_t used = 0;
    out.push_back(std::stod(cell, &used));
    if (used != cell.size()) throw ConfigError("bad numeric list entry '" + cell + "'");
  }
  if (out.empty()) throw ConfigError("empty numeric list");
  return out;
}

Eigen::Vector3d parse_point(const std::string& s) {
  const std::vector<double> v = parse_value_list(s);
  if (v.size() != 3) throw ConfigError("points take exactly 3 coordinates, got '" + s + "'");
  return Eigen::Vector3d(v[0], v[1], v[2]);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

int cmd_run(const std::string& config_path, const std::string& report_path,
            const std::string& kernel_path, const std::string& green_path,
            const std::string& points_path, bool no_timings) {
  const condenser::RunConfig cfg = condenser::parse_config_file(config_path);
  const condenser::RunArtifacts a = condenser::run_pipeline(cfg);
  write_text(report_path, condenser::report_json(a, !no_timings));
  if (!kernel_path.empty()) condenser::dump_kernel(a.K, kernel_path);
  if (!green_path.empty()) condenser::dump_kernel(a.G, green_path);
  if (!points_path.empty()) {
    std::ofstream out(points_path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + points_path);
    condenser::save_points(a.geom.cloud, out);
  }
  for (const condenser::AssertionOutcome& o : a.assertions)
    if (!o.pass)
      std::cerr << "assertion failed: " << o.name << " (value " << o.value << ")\n";
  return a.exit_code;
}

int cmd_suite(uint64_t seed, std::vector<std::string> sizes) {
  if (sizes.empty()) sizes = {"small", "medium"};
  const condenser::InvariantLedger ledger = condenser::run_invariant_suite(seed, sizes);
  for (const condenser::InvariantResult& r : ledger.entries)
    std::cout << (r.pass ? "pass" : "FAIL") << "  " << r.name << "  value=" << r.value
              << "  bound=" << r.bound << "\n";
  std::cout << (ledger.all_pass() ? "suite: all invariants hold\n"
                                  : "suite: invariant failures\n");
  return ledger.all_pass() ? condenser::kOk : condenser::kAssertionFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"condenser-lab: discrete Riesz condenser solver"};
  app.require_subcommand(1);

  std::string config_path, report_path, kernel_path, green_path, points_path;
  bool no_timings = false;
  CLI::App* run = app.add_subcommand("run", "solve one configured problem");
  run->add_option("-c,--config", config_path, "config file")->required();
  run->add_option("-o,--report", report_path, "report JSON path ('-' for stdout)");
  run->add_option("--dump-kernel", kernel_path, "write the Riesz operator dump");
  run->add_option("--dump-green", green_path, "write the Green operator dump");
  run->add_option("--save-points", points_path, "write the generated nodes as CSV");
  run->add_flag("--no-timings", no_timings, "omit the timings object from the report");

  std::string sweep_param, sweep_values, sweep_out;
  int sweep_threads = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "re-run over a parameter list, CSV out");
  sweep->add_option("-c,--config", config_path, "config file")->required();
  sweep->add_option("-p,--param", sweep_param, "truncation_radius | resolution | alpha")
      ->required();
  sweep->add_option("-v,--values", sweep_values, "comma-separated values")->required();
  sweep->add_option("-o,--out", sweep_out, "CSV path ('-' for stdout)");
  sweep->add_option("-j,--threads", sweep_threads,
                    "worker threads (default: CONDENSER_LAB_THREADS or 1)");

  std::string slice_report, slice_from, slice_to, slice_out;
  CLI::App* slice = app.add_subcommand("slice", "sample potentials along a segment");
  slice->add_option("-r,--report", slice_report, "report JSON from a previous run")->required();
  slice->add_option("--from", slice_from, "segment start x,y,z")->required();
  slice->add_option("--to", slice_to, "segment end x,y,z")->required();
  slice->add_option("-o,--out", slice_out, "CSV path ('-' for stdout)");

  uint64_t seed = 42;
  std::vector<std::string> sizes;
  CLI::App* suite = app.add_subcommand("suite", "randomized invariant checks");
  suite->add_option("-s,--seed", seed, "RNG seed");
  suite->add_option("--size", sizes, "small and/or medium (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : condenser::kConfigError;
  }

  try {
    if (run->parsed())
      return cmd_run(config_path, report_path, kernel_path, green_path, points_path, no_timings);
    if (sweep->parsed()) {
      const condenser::RunConfig cfg = condenser::parse_config_file(config_path);
      write_text(sweep_out,
                 condenser::sweep_csv(cfg, sweep_param, parse_value_list(sweep_values),
                                      sweep_threads));
      return condenser::kOk;
    }
    if (slice->parsed()) {
      write_text(slice_out, condenser::slice_csv(slice_report, parse_point(slice_from),
                                                 parse_point(slice_to)));
      return condenser::kOk;
    }
    return cmd_suite(seed, sizes);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return condenser::kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return condenser::kConfigError;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return condenser::kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return condenser::kSolverError;
  }
}

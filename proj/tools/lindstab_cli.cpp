// Batch runner: one experiment per invocation, CSV/JSON artifacts out.
//
// Exit status: 0 all assertions passed, 1 an assertion failed (or the numerics gave up),
// 2 bad usage or config, 3 resource ceiling.

#include "lindstab/experiments.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace lindstab;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Run lindstab experiments from a JSON config or a named preset."};
  std::string config_path, preset, out_dir, format = "csv";
  std::uint64_t seed = 0;
  int threads = 1;
  auto* cfg_opt = app.add_option("--config", config_path, "experiment config (JSON)");
  auto* preset_opt = app.add_option("--preset", preset, "named preset")->check(CLI::IsMember(preset_names()));
  cfg_opt->excludes(preset_opt);
  auto* seed_opt = app.add_option("--seed", seed, "root seed (overrides the config)");
  app.add_option("--threads", threads, "worker cap")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory (stdout when omitted)");
  app.add_option("--format", format, "results format")->check(CLI::IsMember({"csv", "json"}));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (config_path.empty() && preset.empty()) {
    std::cerr << "error: one of --config or --preset is required\n";
    return 2;
  }

  RunOptions opt;
  if (*seed_opt) opt.seed = seed;
  opt.threads = threads;
  ExperimentResult result;
  try {
    if (!preset.empty()) {
      result = run_preset(preset, opt);
    } else {
      const json cfg = parse_json(read_file(config_path));
      result = run_experiment(cfg, opt);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (e.line) std::cerr << " (line " << e.line << ")";
    if (!e.field.empty()) std::cerr << " at " << e.field;
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "resource ceiling: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  const json report = result.report();
  const std::string results = format == "csv" ? result.table.str() : result.table.to_json().dump(2) + "\n";
  try {
    if (out_dir.empty()) {
      std::cout << results;
    } else {
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / ("results." + format), results);
      write_file(fs::path(out_dir) / "summary.json", report.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  for (const Assertion& a : result.assertions)
    std::cerr << (a.passed ? "ok   " : "FAIL ") << a.name << (a.detail.empty() ? "" : " (" + a.detail + ")") << "\n";
  return result.passed() ? 0 : 1;
}

#include "doctest.h"

#include "json.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("LINDSTAB_CLI");
  REQUIRE_MESSAGE(p != nullptr, "LINDSTAB_CLI not set");
  return p;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("lindstab_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args, const fs::path& err = "/dev/null") {
  const std::string cmd = cli() + " " + args + " > /dev/null 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("lindstab_cli_test_" + name + ".json");
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("malformed JSON exits 2 without artifacts") {
  const fs::path out = scratch("malformed");
  const fs::path err = scratch("malformed.err");
  const fs::path cfg = write_config("malformed", "{\"experiment\": \"spectrum\",\n  \"model\": {\n}");
  CHECK(run("--config " + cfg.string() + " --out " + out.string(), err) == 2);
  CHECK_FALSE(fs::exists(out));
  CHECK(slurp(err).find("line") != std::string::npos);
}

TEST_CASE("schema errors name the field") {
  const fs::path err = scratch("schema.err");
  const fs::path cfg = write_config("schema", R"({"experiment": "spectrum", "model": {"family": "amplitude-damping"}})");
  CHECK(run("--config " + cfg.string(), err) == 2);
  CHECK(slurp(err).find("/model/geometry") != std::string::npos);

  const fs::path cfg2 = write_config("unknown", R"({"experiment": "nonsense"})");
  CHECK(run("--config " + cfg2.string()) == 2);
  CHECK(run("--preset no-such-preset") == 2);
  CHECK(run("") == 2);
  CHECK(run("--preset appendix-instability --format xml") == 2);
}

TEST_CASE("resource ceiling exits 3") {
  const fs::path cfg = write_config(
      "big", R"({"experiment": "spectrum", "model": {"family": "amplitude-damping", "geometry": {"extent": [8]}}})");
  CHECK(run("--config " + cfg.string()) == 3);
}

TEST_CASE("spectrum experiment") {
  const fs::path out = scratch("spectrum");
  const fs::path cfg = write_config(
      "spectrum", R"({"experiment": "spectrum", "model": {"family": "amplitude-damping", "geometry": {"extent": [2]}}})");
  REQUIRE(run("--config " + cfg.string() + " --out " + out.string()) == 0);
  const std::string csv = slurp(out / "results.csv");
  CHECK(csv.rfind("index,re,im\n", 0) == 0);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["passed"] == true);
  CHECK(summary["gap"].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(summary["stationary_dim"] == 1);
}

TEST_CASE("json results format") {
  const fs::path out = scratch("jsonfmt");
  const fs::path cfg = write_config(
      "jsonfmt", R"({"experiment": "spectrum", "model": {"family": "dephasing", "geometry": {"extent": [1]}}})");
  REQUIRE(run("--config " + cfg.string() + " --format json --out " + out.string()) == 0);
  const auto res = nlohmann::json::parse(slurp(out / "results.json"));
  CHECK(res["header"].size() == 3);
  CHECK(res["rows"].size() == 4);
}

TEST_CASE("presets are reproducible byte for byte") {
  const fs::path a = scratch("preset_a"), b = scratch("preset_b");
  REQUIRE(run("--preset four-level-instability --seed 7 --out " + a.string()) == 0);
  REQUIRE(run("--preset four-level-instability --seed 7 --out " + b.string()) == 0);
  const std::string csv = slurp(a / "results.csv");
  CHECK(csv.size() > 100);
  CHECK(csv == slurp(b / "results.csv"));
}

TEST_CASE("seeds drive randomized experiments") {
  const fs::path cfg = write_config("corr", R"({"experiment": "correlations", "samples": 5, "max_dim": 3})");
  const fs::path a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
  REQUIRE(run("--config " + cfg.string() + " --seed 1 --out " + a.string()) == 0);
  REQUIRE(run("--config " + cfg.string() + " --seed 1 --threads 2 --out " + b.string()) == 0);
  REQUIRE(run("--config " + cfg.string() + " --seed 2 --out " + c.string()) == 0);
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  CHECK(slurp(a / "results.csv") != slurp(c / "results.csv"));
}

TEST_CASE("assertion failures exit 1") {
  const std::string model = R"("model": {"family": "amplitude-damping", "geometry": {"extent": [1]}})";
  const fs::path ok = write_config("expect_ok", R"({"experiment": "spectrum", )" + model + R"(, "expect": {"gap": [0.49, 0.51]}})");
  CHECK(run("--config " + ok.string()) == 0);
  const fs::path out = scratch("expect_fail");
  const fs::path bad = write_config("expect_fail", R"({"experiment": "spectrum", )" + model + R"(, "expect": {"gap": [0.9, 1.1]}})");
  CHECK(run("--config " + bad.string() + " --out " + out.string()) == 1);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["passed"] == false);
  const fs::path typo = write_config("expect_typo", R"({"experiment": "spectrum", )" + model + R"(, "expect": {"gapp": [0, 1]}})");
  CHECK(run("--config " + typo.string()) == 2);
}

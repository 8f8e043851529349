#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>

#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WDT_CLI_PATH) + " " + args;
  const int st = std::system(cmd.c_str());
  REQUIRE(st != -1);
  return WEXITSTATUS(st);
}

fs::path write_config(const fs::path& dir, const std::string& label, json extra = {}) {
  json j;
  j["bhm"] = {{"m_sites", 50}, {"interaction", 0.1}, {"impurity_site", 25}};
  j["quench"] = {{"lambda_i", 0.0}, {"lambda_f", 0.5}, {"tau", 1.0}};
  j["beta_true"] = 1.0;
  j["n_steps"] = 120;
  j["n_meas"] = 200;
  j["seed"] = 33;
  j["bayes"] = {{"n_beta", 80}, {"n_df", 50}};
  j["out_dir"] = dir.string();
  j["label"] = label;
  for (auto& [k, v] : extra.items()) j[k] = v;
  const fs::path path = dir / (label + "_config.json");
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  return path;
}

}  // namespace

TEST_CASE("help and version exit cleanly") {
  CHECK(run_cli("--help > /dev/null 2>&1") == 0);
  CHECK(run_cli("--version > /dev/null 2>&1") == 0);
  CHECK(run_cli("chi --help > /dev/null 2>&1") == 0);
}

TEST_CASE("config problems exit with the config status") {
  const auto dir = wdt_test::test_dir("cli_config");
  // missing required --config
  CHECK(run_cli("chi -o " + (dir / "x.txt").string() + " > /dev/null 2>&1") == 2);
  // config file does not exist
  CHECK(run_cli("chi -c " + (dir / "absent.json").string() + " -o " +
                (dir / "x.txt").string() + " > /dev/null 2>&1") == 2);
  // malformed json
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{ not json";
  }
  CHECK(run_cli("chi -c " + (dir / "bad.json").string() + " -o " + (dir / "x.txt").string() +
                " > /dev/null 2>&1") == 2);
  // unknown config key
  {
    std::ofstream bad(dir / "unknown.json");
    bad << R"({"no_such_field": 1})";
  }
  CHECK(run_cli("chi -c " + (dir / "unknown.json").string() + " -o " +
                (dir / "x.txt").string() + " > /dev/null 2>&1") == 2);
  // unknown subcommand
  CHECK(run_cli("frobnicate > /dev/null 2>&1") == 2);
}

TEST_CASE("overrides are validated") {
  const auto dir = wdt_test::test_dir("cli_set");
  const auto cfg = write_config(dir, "s");
  const std::string base = "chi -c " + cfg.string() + " -o " + (dir / "out.txt").string();
  CHECK(run_cli(base + " --set n_steps > /dev/null 2>&1") == 2);        // no '='
  CHECK(run_cli(base + " --set unknown.key=3 > /dev/null 2>&1") == 2);  // bad key
  CHECK(run_cli(base + " --set n_steps=-4 > /dev/null 2>&1") == 2);     // invalid value
  CHECK(run_cli(base + " --set n_steps=64 > /dev/null 2>&1") == 0);
  const std::string text = wdt_test::slurp((dir / "out.txt").string());
  CHECK(text.find("wdt charfn") != std::string::npos);
  CHECK(text.find("n_steps 64") != std::string::npos);
}

TEST_CASE("staged pipeline drives every subcommand") {
  const auto dir = wdt_test::test_dir("cli_pipeline");
  const auto cfg = write_config(dir, "p");
  const std::string c = " -c " + cfg.string() + " ";
  const auto p = [&](const char* name) { return (dir / name).string(); };

  CHECK(run_cli("chi" + c + "-o " + p("fwd.txt") + " > /dev/null 2>&1") == 0);
  CHECK(run_cli("chi" + c + "--backward -o " + p("bwd.txt") + " > /dev/null 2>&1") == 0);
  CHECK(fs::exists(dir / "fwd.txt"));
  CHECK(fs::exists(dir / "bwd.txt"));

  CHECK(run_cli("sample" + c + "--chi " + p("fwd.txt") + " --stream 0 -o " + p("fwd_rec.txt") +
                " > /dev/null 2>&1") == 0);
  CHECK(run_cli("sample" + c + "--chi " + p("bwd.txt") + " --stream 1 -o " + p("bwd_rec.txt") +
                " > /dev/null 2>&1") == 0);

  CHECK(run_cli("reconstruct" + c + "--forward " + p("fwd_rec.txt") + " --backward " +
                p("bwd_rec.txt") + " --out-forward " + p("df.txt") + " --out-backward " +
                p("db.txt") + " > /dev/null 2>&1") == 0);

  CHECK(run_cli("infer" + c + "--forward " + p("df.txt") + " --backward " + p("db.txt") +
                " > " + p("infer.json") + " 2> /dev/null") == 0);
  const json out = json::parse(wdt_test::slurp(p("infer.json")));
  CHECK(out.contains("bayes_beta_mean"));
  CHECK(out["bayes_beta_mean"].get<double>() > 0.0);
  CHECK(out.contains("freq_beta"));

  // missing input surfaces the io status
  CHECK(run_cli("sample" + c + "--chi " + p("nope.txt") + " -o " + p("x.txt") +
                " > /dev/null 2>&1") == 5);
}

TEST_CASE("run emits the merged result record") {
  const auto dir = wdt_test::test_dir("cli_run");
  const auto cfg = write_config(dir, "r");
  CHECK(run_cli("run -c " + cfg.string() + " > " + (dir / "run.json").string() +
                " 2> /dev/null") == 0);
  const json out = json::parse(wdt_test::slurp((dir / "run.json").string()));
  CHECK(out.contains("summary_path"));
  CHECK(out["beta_true"].get<double>() == 1.0);
  CHECK(fs::exists(dir / "r_summary.txt"));
  CHECK(fs::exists(dir / "r_workdist_forward.txt"));
}

TEST_CASE("calibrate --check gates on the aggregate thresholds") {
  const auto dir = wdt_test::test_dir("cli_calibrate");
  // Noiseless experiments are all identical, so with 200 of them every
  // posterior decile lands in one bin and the decile gate must trip.
  const auto cfg = write_config(dir, "c",
                                json{{"n_meas", 0},
                                     {"n_experiments", 200},
                                     {"bhm", json{{"m_sites", 100},
                                                  {"interaction", 0.1},
                                                  {"impurity_site", 50}}},
                                     {"bayes", json{{"n_beta", 60}, {"n_df", 40}}}});
  CHECK(run_cli("calibrate -c " + cfg.string() + " > " + (dir / "cal.json").string() +
                " 2> /dev/null") == 0);
  const json out = json::parse(wdt_test::slurp((dir / "cal.json").string()));
  CHECK(out["per_beta"][0]["n_completed"].get<int>() == 200);
  CHECK(run_cli("calibrate --check -c " + cfg.string() + " > /dev/null 2>&1") == 4);
  CHECK(fs::exists(dir / "c_calibration.csv"));
  CHECK(fs::exists(dir / "c_experiments.csv"));
}

TEST_CASE("oracle table subcommand") {
  const auto dir = wdt_test::test_dir("cli_oracle");
  const std::string path = (dir / "oracle.txt").string();
  CHECK(run_cli("oracle -o " + path + " > /dev/null 2>&1") == 0);
  CHECK(fs::exists(path));
  CHECK(wdt_test::slurp(path).size() > 0);
}

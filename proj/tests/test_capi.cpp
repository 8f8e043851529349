#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "test_util.hpp"
#include "wdt/wdt.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
struct ConfigHandle {
  wdt_config* c = nullptr;
  ~ConfigHandle() { wdt_config_free(c); }
};
struct ResultHandle {
  wdt_result* r = nullptr;
  ~ResultHandle() { wdt_result_free(r); }
};

std::string take_string(char* s) {
  std::string out = s ? s : "";
  wdt_string_free(s);
  return out;
}

std::string small_config(const fs::path& dir, const char* label) {
  json j;
  j["bhm"] = {{"m_sites", 50}, {"interaction", 0.1}, {"impurity_site", 25}};
  j["quench"] = {{"lambda_i", 0.0}, {"lambda_f", 0.5}, {"tau", 1.0}};
  j["beta_true"] = 1.0;
  j["n_steps"] = 120;
  j["n_meas"] = 200;
  j["seed"] = 21;
  j["bayes"] = {{"n_beta", 80}, {"n_df", 50}};
  j["out_dir"] = dir.string();
  j["label"] = label;
  return j.dump();
}
}  // namespace

TEST_CASE("version and error state") {
  REQUIRE(wdt_version() != nullptr);
  CHECK(std::strlen(wdt_version()) > 0);
  CHECK(std::string(wdt_last_error()) == "");
}

TEST_CASE("config parse, dump, hash, override") {
  ConfigHandle cfg;
  REQUIRE(wdt_config_parse("{}", &cfg.c) == WDT_OK);
  char* dump = nullptr;
  REQUIRE(wdt_config_dump(cfg.c, &dump) == WDT_OK);
  const std::string text = take_string(dump);
  const json j = json::parse(text);
  CHECK(j["engine"] == "bogoliubov");
  CHECK(j["n_steps"] == 500);

  uint64_t h1 = 0, h2 = 0;
  REQUIRE(wdt_config_hash(cfg.c, &h1) == WDT_OK);
  REQUIRE(wdt_config_override(cfg.c, "quench.lambda_f", "0.7") == WDT_OK);
  REQUIRE(wdt_config_hash(cfg.c, &h2) == WDT_OK);
  CHECK(h1 != h2);
  char* dump2 = nullptr;
  REQUIRE(wdt_config_dump(cfg.c, &dump2) == WDT_OK);
  CHECK(json::parse(take_string(dump2))["quench"]["lambda_f"] == 0.7);

  CHECK(wdt_config_override(cfg.c, "nope", "1") == WDT_CONFIG_ERROR);
  CHECK(std::string(wdt_last_error()).size() > 0);
}

TEST_CASE("config failure modes") {
  wdt_config* c = nullptr;
  CHECK(wdt_config_parse("{bad json", &c) == WDT_CONFIG_ERROR);
  CHECK(c == nullptr);
  CHECK(wdt_config_parse(R"({"unknown_key": 3})", &c) == WDT_CONFIG_ERROR);
  CHECK(wdt_config_parse(nullptr, &c) == WDT_CONFIG_ERROR);
  CHECK(wdt_config_load("/does/not/exist.json", &c) == WDT_CONFIG_ERROR);
}

TEST_CASE("stage-by-stage pipeline through files") {
  const auto dir = wdt_test::test_dir("capi_stages");
  ConfigHandle cfg;
  REQUIRE(wdt_config_parse(small_config(dir, "stage").c_str(), &cfg.c) == WDT_OK);

  const std::string fwd = (dir / "fwd_chi.txt").string();
  const std::string bwd = (dir / "bwd_chi.txt").string();
  REQUIRE(wdt_chi(cfg.c, 0, fwd.c_str()) == WDT_OK);
  REQUIRE(wdt_chi(cfg.c, 1, bwd.c_str()) == WDT_OK);
  CHECK(fs::exists(fwd));
  CHECK(fs::exists(bwd));

  const std::string fwd_rec = (dir / "fwd_rec.txt").string();
  const std::string bwd_rec = (dir / "bwd_rec.txt").string();
  REQUIRE(wdt_sample(cfg.c, fwd.c_str(), 0, fwd_rec.c_str()) == WDT_OK);
  REQUIRE(wdt_sample(cfg.c, bwd.c_str(), 1, bwd_rec.c_str()) == WDT_OK);

  const std::string fwd_dist = (dir / "fwd_dist.txt").string();
  const std::string bwd_dist = (dir / "bwd_dist.txt").string();
  REQUIRE(wdt_reconstruct(cfg.c, fwd_rec.c_str(), bwd_rec.c_str(), fwd_dist.c_str(),
                          bwd_dist.c_str()) == WDT_OK);

  ResultHandle res;
  REQUIRE(wdt_infer(cfg.c, fwd_dist.c_str(), bwd_dist.c_str(), &res.r) == WDT_OK);
  double beta_mean = 0.0, beta_hat = 0.0;
  REQUIRE(wdt_result_scalar(res.r, "bayes_beta_mean", &beta_mean) == WDT_OK);
  REQUIRE(wdt_result_scalar(res.r, "freq_beta", &beta_hat) == WDT_OK);
  CHECK(beta_mean > 0.1);
  CHECK(beta_mean < 10.0);
  CHECK(beta_hat > 0.1);
  // inference artifacts land in out_dir
  CHECK(fs::exists(dir / "stage_infer_summary.txt"));
}

TEST_CASE("single-call run matches the staged result shape") {
  const auto dir = wdt_test::test_dir("capi_run");
  ConfigHandle cfg;
  REQUIRE(wdt_config_parse(small_config(dir, "full").c_str(), &cfg.c) == WDT_OK);
  ResultHandle res;
  REQUIRE(wdt_run(cfg.c, &res.r) == WDT_OK);

  char* out = nullptr;
  REQUIRE(wdt_result_json(res.r, &out) == WDT_OK);
  const json j = json::parse(take_string(out));
  CHECK(j.contains("bayes_beta_mean"));
  CHECK(j.contains("freq_beta"));
  CHECK(j.contains("summary_path"));
  CHECK(j["beta_true"] == 1.0);

  double v = 0.0;
  REQUIRE(wdt_result_scalar(res.r, "n_rows", &v) == WDT_OK);
  CHECK(v >= 3.0);
  CHECK(wdt_result_scalar(res.r, "no_such_key", &v) == WDT_CONFIG_ERROR);
  // JSON-pointer addressing works too
  REQUIRE(wdt_result_scalar(res.r, "/bayes_beta_mean", &v) == WDT_OK);
  CHECK(v > 0.0);
  CHECK(fs::exists(dir / "full_summary.txt"));
}

TEST_CASE("run is deterministic through the api") {
  const auto dir = wdt_test::test_dir("capi_det");
  ConfigHandle cfg;
  REQUIRE(wdt_config_parse(small_config(dir, "det").c_str(), &cfg.c) == WDT_OK);
  double a = 0.0, b = 0.0;
  {
    ResultHandle r1;
    REQUIRE(wdt_run(cfg.c, &r1.r) == WDT_OK);
    REQUIRE(wdt_result_scalar(r1.r, "freq_beta", &a) == WDT_OK);
  }
  {
    ResultHandle r2;
    REQUIRE(wdt_run(cfg.c, &r2.r) == WDT_OK);
    REQUIRE(wdt_result_scalar(r2.r, "freq_beta", &b) == WDT_OK);
  }
  CHECK(a == b);
}

TEST_CASE("sample and reconstruct argument validation") {
  const auto dir = wdt_test::test_dir("capi_guards");
  ConfigHandle cfg;
  REQUIRE(wdt_config_parse(small_config(dir, "g").c_str(), &cfg.c) == WDT_OK);
  const std::string fwd = (dir / "f.txt").string();
  REQUIRE(wdt_chi(cfg.c, 0, fwd.c_str()) == WDT_OK);

  // sampling an already-sampled series is rejected
  const std::string rec = (dir / "r.txt").string();
  REQUIRE(wdt_sample(cfg.c, fwd.c_str(), 0, rec.c_str()) == WDT_OK);
  CHECK(wdt_sample(cfg.c, rec.c_str(), 0, (dir / "rr.txt").string().c_str()) ==
        WDT_CONFIG_ERROR);

  // n_meas = 0 cannot sample
  ConfigHandle noisefree;
  REQUIRE(wdt_config_parse(small_config(dir, "g0").c_str(), &noisefree.c) == WDT_OK);
  REQUIRE(wdt_config_override(noisefree.c, "n_meas", "0") == WDT_OK);
  CHECK(wdt_sample(noisefree.c, fwd.c_str(), 0, rec.c_str()) == WDT_CONFIG_ERROR);

  // reconstruct needs matching grids: build a mismatched series
  ConfigHandle other;
  REQUIRE(wdt_config_parse(small_config(dir, "g2").c_str(), &other.c) == WDT_OK);
  REQUIRE(wdt_config_override(other.c, "n_steps", "64") == WDT_OK);
  const std::string bwd_small = (dir / "b64.txt").string();
  REQUIRE(wdt_chi(other.c, 1, bwd_small.c_str()) == WDT_OK);
  CHECK(wdt_reconstruct(cfg.c, fwd.c_str(), bwd_small.c_str(),
                        (dir / "df.txt").string().c_str(),
                        (dir / "db.txt").string().c_str()) == WDT_CONFIG_ERROR);
  // missing input file maps to the io status
  CHECK(wdt_reconstruct(cfg.c, (dir / "missing.txt").string().c_str(), fwd.c_str(),
                        (dir / "df.txt").string().c_str(),
                        (dir / "db.txt").string().c_str()) == WDT_IO_ERROR);
  // null arguments are config errors
  CHECK(wdt_chi(nullptr, 0, fwd.c_str()) == WDT_CONFIG_ERROR);
  CHECK(wdt_chi(cfg.c, 0, nullptr) == WDT_CONFIG_ERROR);
}

TEST_CASE("noiseless calibrate passes its own check") {
  const auto dir = wdt_test::test_dir("capi_calib");
  ConfigHandle cfg;
  REQUIRE(wdt_config_parse(small_config(dir, "cal").c_str(), &cfg.c) == WDT_OK);
  REQUIRE(wdt_config_override(cfg.c, "n_meas", "0") == WDT_OK);
  REQUIRE(wdt_config_override(cfg.c, "n_experiments", "2") == WDT_OK);
  // noiseless calibration is gated on windowing bias alone; use a denser
  // chain and grid so the reconstruction sits well inside the 5% gate
  REQUIRE(wdt_config_override(cfg.c, "bhm.m_sites", "200") == WDT_OK);
  REQUIRE(wdt_config_override(cfg.c, "bhm.impurity_site", "100") == WDT_OK);
  REQUIRE(wdt_config_override(cfg.c, "n_steps", "400") == WDT_OK);
  ResultHandle res;
  const wdt_status st = wdt_calibrate(cfg.c, 1, &res.r);
  REQUIRE(res.r != nullptr);
  CHECK(st == WDT_OK);
  double ok = 0.0;
  REQUIRE(wdt_result_scalar(res.r, "check_ok", &ok) == WDT_OK);
  CHECK(ok == 1.0);
  double bias = 0.0;
  REQUIRE(wdt_result_scalar(res.r, "/per_beta/0/bias_frac", &bias) == WDT_OK);
  CHECK(std::abs(bias) < 0.05);
  CHECK(fs::exists(dir / "cal_calibration.csv"));
}

TEST_CASE("oracle fixture file") {
  const auto dir = wdt_test::test_dir("capi_oracle");
  const std::string path = (dir / "oracle.txt").string();
  REQUIRE(wdt_oracle_table(path.c_str()) == WDT_OK);
  CHECK(fs::exists(path));
  CHECK(wdt_oracle_table(nullptr) == WDT_CONFIG_ERROR);
}

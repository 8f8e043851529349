// Command-line front end; everything goes through the public C API.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wdt/wdt.h"

namespace {

struct ConfigDeleter {
  void operator()(wdt_config* c) const { wdt_config_free(c); }
};
struct ResultDeleter {
  void operator()(wdt_result* r) const { wdt_result_free(r); }
};
using ConfigPtr = std::unique_ptr<wdt_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<wdt_result, ResultDeleter>;

int fail(wdt_status st) {
  std::fprintf(stderr, "error: %s\n", wdt_last_error());
  return static_cast<int>(st);
}

// Load --config and apply --set key=value overrides in order.
int load_config(const std::string& path, const std::vector<std::string>& sets, ConfigPtr& out) {
  wdt_config* raw = nullptr;
  if (wdt_status st = wdt_config_load(path.c_str(), &raw); st != WDT_OK) return fail(st);
  out.reset(raw);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return static_cast<int>(WDT_CONFIG_ERROR);
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (wdt_status st = wdt_config_override(out.get(), key.c_str(), value.c_str()); st != WDT_OK)
      return fail(st);
  }
  return 0;
}

int print_result(const wdt_result* r) {
  char* text = nullptr;
  if (wdt_status st = wdt_result_json(r, &text); st != WDT_OK) return fail(st);
  std::printf("%s\n", text);
  wdt_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"work-distribution thermometry toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wdt_version()));

  std::string config_path;
  std::vector<std::string> sets;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON config file")->required();
    sub->add_option("--set", sets, "override a config field, key=value (repeatable)");
  };

  // chi
  auto* chi = app.add_subcommand("chi", "exact characteristic-function series");
  add_common(chi);
  bool chi_backward = false;
  std::string chi_out;
  chi->add_flag("--backward", chi_backward, "time-reversed protocol");
  chi->add_option("-o,--out", chi_out, "output series file")->required();

  // sample
  auto* sample = app.add_subcommand("sample", "simulated qubit measurement record");
  add_common(sample);
  std::string sample_chi, sample_out;
  std::uint64_t sample_stream = 0;
  sample->add_option("--chi", sample_chi, "exact series file")->required();
  sample->add_option("--stream", sample_stream, "RNG substream index (default 0)");
  sample->add_option("-o,--out", sample_out, "output series file")->required();

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "windowed Fourier work distributions");
  add_common(rec);
  std::string rec_f, rec_b, rec_fo, rec_bo;
  rec->add_option("--forward", rec_f, "forward series file")->required();
  rec->add_option("--backward", rec_b, "backward series file")->required();
  rec->add_option("--out-forward", rec_fo, "forward distribution output")->required();
  rec->add_option("--out-backward", rec_bo, "backward distribution output")->required();

  // infer
  auto* infer = app.add_subcommand("infer", "beta / dF inference from two distributions");
  add_common(infer);
  std::string inf_f, inf_b;
  infer->add_option("--forward", inf_f, "forward distribution file")->required();
  infer->add_option("--backward", inf_b, "backward distribution file")->required();

  // run
  auto* run = app.add_subcommand("run", "one end-to-end experiment");
  add_common(run);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "repeated-experiment calibration sweep");
  add_common(cal);
  bool cal_check = false;
  cal->add_flag("--check", cal_check, "apply bias/width/decile thresholds");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "reference-oracle fixture table");
  std::string oracle_out;
  oracle->add_option("-o,--out", oracle_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(WDT_CONFIG_ERROR);
  }

  if (oracle->parsed()) {
    if (wdt_status st = wdt_oracle_table(oracle_out.c_str()); st != WDT_OK) return fail(st);
    std::printf("wrote %s\n", oracle_out.c_str());
    return 0;
  }

  ConfigPtr cfg;
  if (int rc = load_config(config_path, sets, cfg); rc != 0) return rc;

  if (chi->parsed()) {
    if (wdt_status st = wdt_chi(cfg.get(), chi_backward ? 1 : 0, chi_out.c_str()); st != WDT_OK)
      return fail(st);
    std::printf("wrote %s\n", chi_out.c_str());
    return 0;
  }

  if (sample->parsed()) {
    if (wdt_status st =
            wdt_sample(cfg.get(), sample_chi.c_str(), sample_stream, sample_out.c_str());
        st != WDT_OK)
      return fail(st);
    std::printf("wrote %s\n", sample_out.c_str());
    return 0;
  }

  if (rec->parsed()) {
    if (wdt_status st = wdt_reconstruct(cfg.get(), rec_f.c_str(), rec_b.c_str(), rec_fo.c_str(),
                                        rec_bo.c_str());
        st != WDT_OK)
      return fail(st);
    std::printf("wrote %s\nwrote %s\n", rec_fo.c_str(), rec_bo.c_str());
    return 0;
  }

  if (infer->parsed()) {
    wdt_result* raw = nullptr;
    if (wdt_status st = wdt_infer(cfg.get(), inf_f.c_str(), inf_b.c_str(), &raw); st != WDT_OK)
      return fail(st);
    ResultPtr res(raw);
    return print_result(res.get());
  }

  if (run->parsed()) {
    wdt_result* raw = nullptr;
    if (wdt_status st = wdt_run(cfg.get(), &raw); st != WDT_OK) return fail(st);
    ResultPtr res(raw);
    return print_result(res.get());
  }

  if (cal->parsed()) {
    wdt_result* raw = nullptr;
    const wdt_status st = wdt_calibrate(cfg.get(), cal_check ? 1 : 0, &raw);
    ResultPtr res(raw);
    if (res) print_result(res.get());
    if (st != WDT_OK) return fail(st);
    return 0;
  }

  return static_cast<int>(WDT_CONFIG_ERROR);
}

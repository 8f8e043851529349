#include "wdt/wdt.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "reference/oracles.hpp"
#include "wdt/bogoliubov.hpp"
#include "wdt/errors.hpp"
#include "wdt/harness.hpp"
#include "wdt/io.hpp"
#include "wdt/rng.hpp"
#include "wdt/tebd.hpp"

using nlohmann::json;

struct wdt_config {
  wdt::ExperimentConfig cfg;
};

struct wdt_result {
  json j;
};

namespace {

thread_local std::string g_error;

wdt_status status_from(wdt::errc c) {
  switch (c) {
    case wdt::errc::ok: return WDT_OK;
    case wdt::errc::config: return WDT_CONFIG_ERROR;
    case wdt::errc::numeric: return WDT_NUMERIC_ERROR;
    case wdt::errc::threshold: return WDT_THRESHOLD_ERROR;
    case wdt::errc::io: return WDT_IO_ERROR;
    default: return WDT_ERROR;
  }
}

template <typename F>
wdt_status guard(F&& f) {
  g_error.clear();
  try {
    return f();
  } catch (const wdt::Error& e) {
    g_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_error = e.what();
    return WDT_ERROR;
  } catch (...) {
    g_error = "unknown failure";
    return WDT_ERROR;
  }
}

wdt_status fail_config(const std::string& msg) {
  g_error = msg;
  return WDT_CONFIG_ERROR;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string out_path(const wdt::ExperimentConfig& cfg, const std::string& suffix) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / (cfg.label + "_" + suffix)).string();
}

// One direction of the exact series; window selection matches the full run
// (auto T always derives from the forward-quench cumulants).
wdt::CharFnSeries single_series(const wdt::ExperimentConfig& cfg, bool backward) {
  cfg.validate();
  const double beta = cfg.beta_true;
  const wdt::QuenchSpec q = backward ? cfg.quench.reversed() : cfg.quench;
  wdt::CharFnSeries s;
  if (cfg.engine == "bogoliubov") {
    const wdt::BogoliubovModel model(cfg.bhm);
    double t_window = cfg.t_window;
    if (!(t_window > 0.0)) {
      const wdt::QuenchIntegrals qi = wdt::quench_integrals(model, cfg.quench);
      const wdt::Cumulants c = wdt::work_cumulants(model, qi, beta);
      t_window = wdt::choose_window_size(beta, std::sqrt(c.sigma2));
    }
    s = wdt::chi_series_bogoliubov(model, q, beta, t_window, cfg.n_steps);
  } else {
    if (!(cfg.t_window > 0.0))
      throw wdt::ConfigError("t_window must be set explicitly for the tebd engine");
    const wdt::TebdEngine engine(cfg.bhm, cfg.tebd);
    s = engine.chi_series(q, beta, cfg.t_window, cfg.n_steps);
  }
  s.tag = backward ? "backward" : "forward";
  s.beta = beta;
  return s;
}

// Mean / std of a reconstructed distribution (negative excursions clipped).
std::pair<double, double> dist_moments(const wdt::WorkDistEstimate& d) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    const double p = std::max(d.p[i], 0.0);
    s0 += p;
    s1 += p * d.w_grid[i];
    s2 += p * d.w_grid[i] * d.w_grid[i];
  }
  if (!(s0 > 0.0)) throw wdt::NumericError("work distribution carries no positive mass");
  const double mu = s1 / s0;
  return {mu, std::sqrt(std::max(s2 / s0 - mu * mu, 0.0))};
}

json outcome_json(const wdt::ExperimentOutcome& o) {
  json j;
  j["seed"] = o.seed;
  j["beta_true"] = o.beta_true;
  j["t_window"] = o.t_window;
  j["n_rows"] = o.n_rows;
  j["clamp_count"] = o.clamp_count;
  j["freq_ok"] = o.has_freq && o.freq.ok;
  if (o.has_freq && o.freq.ok) {
    j["freq_beta"] = o.freq.beta_hat;
    j["freq_beta_err"] = std::sqrt(std::max(o.freq.var_beta, 0.0));
    j["freq_df"] = o.freq.df_hat;
    j["freq_df_err"] = std::sqrt(std::max(o.freq.var_df, 0.0));
    j["freq_n_used"] = o.freq.n_used;
  }
  j["bayes_ok"] = o.has_bayes;
  if (o.has_bayes) {
    j["bayes_beta_mean"] = o.bayes.beta_mean;
    j["bayes_beta_std"] = o.bayes.beta_std;
    j["bayes_df_mean"] = o.bayes.df_mean;
    j["bayes_df_std"] = o.bayes.df_std;
    j["log_evidence"] = o.bayes.log_evidence;
    j["boundary_mass"] = o.bayes.boundary_mass;
    j["decile_true"] = o.decile;
    j["cdf_true"] = o.cdf_true;
    j["grid_widenings"] = o.widenings;
    j["pilot_fallback"] = o.pilot_fallback;
  }
  return j;
}

// Summary-record values are bare tokens; recover numbers where they parse
// cleanly so result lookups stay numeric.
json token_to_json(const std::string& v) {
  if (!v.empty() && v.find_first_of(" \t") == std::string::npos) {
    errno = 0;
    char* end = nullptr;
    const long long i = std::strtoll(v.c_str(), &end, 10);
    if (end && *end == '\0' && errno == 0) return json(i);
    end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end && *end == '\0' && errno == 0 && std::isfinite(d)) return json(d);
  }
  return json(v);
}

void write_infer_files(const wdt::ExperimentConfig& cfg, const wdt::ExperimentOutcome& out,
                       const wdt::PipelineArtifacts& art) {
  wdt::Table ratio;
  ratio.meta.emplace_back("label", cfg.label);
  ratio.columns = {"w", "lbar", "variance", "bias", "included"};
  for (const auto& p : art.ratio_points)
    ratio.rows.push_back({p.w, p.lbar, p.var, p.bias, p.included ? 1.0 : 0.0});
  wdt::write_table(out_path(cfg, "logratio.csv"), ratio);

  if (art.has_posterior) wdt::write_posterior(out_path(cfg, "posterior.txt"), art.posterior);

  wdt::SummaryRecord s;
  s.set_int("n_rows", out.n_rows);
  s.set_double("t_window", out.t_window);
  s.set_int("freq_ok", out.has_freq && out.freq.ok);
  if (out.has_freq && out.freq.ok) {
    s.set_double("freq_beta", out.freq.beta_hat);
    s.set_double("freq_beta_err", std::sqrt(std::max(out.freq.var_beta, 0.0)));
    s.set_double("freq_df", out.freq.df_hat);
    s.set_double("freq_df_err", std::sqrt(std::max(out.freq.var_df, 0.0)));
    s.set_int("freq_n_used", out.freq.n_used);
  }
  s.set_int("bayes_ok", out.has_bayes);
  if (out.has_bayes) {
    s.set_double("bayes_beta_mean", out.bayes.beta_mean);
    s.set_double("bayes_beta_std", out.bayes.beta_std);
    s.set_double("bayes_df_mean", out.bayes.df_mean);
    s.set_double("bayes_df_std", out.bayes.df_std);
    s.set_double("log_evidence", out.bayes.log_evidence);
    s.set_double("boundary_mass", out.bayes.boundary_mass);
    s.set_int("grid_widenings", out.widenings);
    s.set_int("pilot_fallback", out.pilot_fallback);
    if (art.has_posterior)
      for (int q = 1; q <= 9; ++q)
        s.set_double("beta_q" + std::to_string(10 * q),
                     wdt::posterior_beta_quantile(art.posterior, 0.1 * q));
  }
  wdt::write_summary(out_path(cfg, "infer_summary.txt"), s);
}

}  // namespace

extern "C" {

const char* wdt_version(void) { return "1.0.0"; }

const char* wdt_last_error(void) { return g_error.c_str(); }

wdt_status wdt_config_parse(const char* json_text, wdt_config** out) {
  if (!json_text || !out) return fail_config("wdt_config_parse: null argument");
  *out = nullptr;
  return guard([&] {
    auto* h = new wdt_config{wdt::config_from_json(json_text)};
    h->cfg.validate();
    *out = h;
    return WDT_OK;
  });
}

wdt_status wdt_config_load(const char* path, wdt_config** out) {
  if (!path || !out) return fail_config("wdt_config_load: null argument");
  *out = nullptr;
  return guard([&] {
    auto* h = new wdt_config{wdt::load_config(path)};
    h->cfg.validate();
    *out = h;
    return WDT_OK;
  });
}

wdt_status wdt_config_override(wdt_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return fail_config("wdt_config_override: null argument");
  return guard([&] {
    wdt::apply_override(cfg->cfg, key, value);
    cfg->cfg.validate();
    return WDT_OK;
  });
}

wdt_status wdt_config_dump(const wdt_config* cfg, char** json_out) {
  if (!cfg || !json_out) return fail_config("wdt_config_dump: null argument");
  *json_out = nullptr;
  return guard([&] {
    *json_out = dup_string(wdt::config_to_json(cfg->cfg));
    if (!*json_out) throw std::bad_alloc();
    return WDT_OK;
  });
}

wdt_status wdt_config_hash(const wdt_config* cfg, uint64_t* out) {
  if (!cfg || !out) return fail_config("wdt_config_hash: null argument");
  return guard([&] {
    *out = wdt::config_hash(cfg->cfg);
    return WDT_OK;
  });
}

void wdt_config_free(wdt_config* cfg) { delete cfg; }

wdt_status wdt_chi(const wdt_config* cfg, int backward, const char* out_path_) {
  if (!cfg || !out_path_) return fail_config("wdt_chi: null argument");
  return guard([&] {
    wdt::write_charfn(out_path_, single_series(cfg->cfg, backward != 0));
    return WDT_OK;
  });
}

wdt_status wdt_sample(const wdt_config* cfg, const char* chi_path, uint64_t stream,
                      const char* out_path_) {
  if (!cfg || !chi_path || !out_path_) return fail_config("wdt_sample: null argument");
  return guard([&] {
    if (cfg->cfg.n_meas <= 0)
      throw wdt::ConfigError("n_meas must be positive to simulate a measurement record");
    const wdt::CharFnSeries exact = wdt::read_charfn(chi_path);
    if (exact.provenance != wdt::Provenance::Exact)
      throw wdt::ConfigError("sample input must be an exact series");
    const wdt::CharFnSeries rec = wdt::sample_series(
        exact, cfg->cfg.qubit, cfg->cfg.n_meas, wdt::substream_key(cfg->cfg.seed, stream));
    wdt::write_charfn(out_path_, rec);
    return WDT_OK;
  });
}

wdt_status wdt_reconstruct(const wdt_config* cfg, const char* fwd_chi, const char* bwd_chi,
                           const char* fwd_out, const char* bwd_out) {
  if (!cfg || !fwd_chi || !bwd_chi || !fwd_out || !bwd_out)
    return fail_config("wdt_reconstruct: null argument");
  return guard([&] {
    const wdt::CharFnSeries sf = wdt::read_charfn(fwd_chi);
    const wdt::CharFnSeries sb = wdt::read_charfn(bwd_chi);
    if (sf.t_window != sb.t_window || sf.n_steps != sb.n_steps)
      throw wdt::ConfigError("forward/backward series disagree on the u grid");
    const wdt::ShortTimeCumulants cf = wdt::short_time_cumulants(sf);
    const wdt::ShortTimeCumulants cb = wdt::short_time_cumulants(sb);
    // W grid covers the forward support and the mirrored backward support.
    const wdt::GridBounds grid =
        wdt::choose_w_grid(sf.t_window, cf.mu, std::sqrt(std::max(cf.sigma2, 0.0)), -cb.mu,
                           std::sqrt(std::max(cb.sigma2, 0.0)));
    wdt::write_workdist(fwd_out,
                        wdt::work_distribution(sf, cfg->cfg.window, grid.k_min, grid.k_max));
    wdt::write_workdist(bwd_out,
                        wdt::work_distribution(sb, cfg->cfg.window, -grid.k_max, -grid.k_min));
    return WDT_OK;
  });
}

wdt_status wdt_infer(const wdt_config* cfg, const char* fwd_dist, const char* bwd_dist,
                     wdt_result** out) {
  if (!cfg || !fwd_dist || !bwd_dist || !out) return fail_config("wdt_infer: null argument");
  *out = nullptr;
  return guard([&] {
    const wdt::WorkDistEstimate df = wdt::read_workdist(fwd_dist);
    const wdt::WorkDistEstimate db = wdt::read_workdist(bwd_dist);
    wdt::InferenceInputs in;
    in.obs = wdt::pair_observation(df, db);
    const auto [mu_f, sigma_f] = dist_moments(df);
    const auto [mu_b, sigma_b] = dist_moments(db);
    (void)sigma_b;
    in.mu_f = mu_f;
    in.sigma_f = sigma_f;
    in.mu_b = mu_b;
    in.t_window = df.t_window;
    in.beta_ref = cfg->cfg.beta_true;
    in.seed = cfg->cfg.seed;
    in.noiseless = true;
    for (const auto& row : in.obs)
      if (row.var_f > 0.0 || row.var_b > 0.0) in.noiseless = false;

    wdt::PipelineArtifacts art;
    const wdt::ExperimentOutcome o = wdt::run_inference(cfg->cfg, std::move(in), &art);
    write_infer_files(cfg->cfg, o, art);
    *out = new wdt_result{outcome_json(o)};
    return WDT_OK;
  });
}

wdt_status wdt_run(const wdt_config* cfg, wdt_result** out) {
  if (!cfg || !out) return fail_config("wdt_run: null argument");
  *out = nullptr;
  return guard([&] {
    const wdt::ExperimentOutcome o = wdt::run_experiment(cfg->cfg, true);
    json j;
    const std::string spath = out_path(cfg->cfg, "summary.txt");
    const wdt::SummaryRecord rec = wdt::read_summary(spath);
    for (const auto& [key, value] : rec.items) j[key] = token_to_json(value);
    j.update(outcome_json(o));
    j["summary_path"] = spath;
    *out = new wdt_result{std::move(j)};
    return WDT_OK;
  });
}

wdt_status wdt_calibrate(const wdt_config* cfg, int check, wdt_result** out) {
  if (!cfg || !out) return fail_config("wdt_calibrate: null argument");
  *out = nullptr;
  return guard([&] {
    const wdt::CalibrationResult res = wdt::run_calibration(cfg->cfg);
    wdt::write_calibration_outputs(cfg->cfg, res);
    std::string report;
    const bool ok = wdt::calibration_check(res, &report);

    json j;
    j["check_ok"] = ok;
    j["report"] = report;
    j["n_experiments"] = cfg->cfg.n_experiments;
    json arr = json::array();
    for (const auto& a : res.per_beta) {
      json e;
      e["beta_true"] = a.beta_true;
      e["n_experiments"] = a.n_experiments;
      e["n_completed"] = a.n_completed;
      e["mean_beta"] = a.mean_beta;
      e["std_beta"] = a.std_beta;
      e["mean_post_std"] = a.mean_post_std;
      e["bias_frac"] = a.bias_frac;
      e["frac_std"] = a.frac_std;
      e["freq_mean_beta"] = a.freq_mean_beta;
      e["freq_std_beta"] = a.freq_std_beta;
      e["decile_counts"] = a.decile_counts;
      arr.push_back(std::move(e));
    }
    j["per_beta"] = std::move(arr);
    *out = new wdt_result{std::move(j)};
    if (check && !ok) {
      g_error = report;
      return WDT_THRESHOLD_ERROR;
    }
    return WDT_OK;
  });
}

wdt_status wdt_oracle_table(const char* out_path_) {
  if (!out_path_) return fail_config("wdt_oracle_table: null argument");
  return guard([&] {
    wdt::ref::write_oracle_fixture(out_path_);
    return WDT_OK;
  });
}

wdt_status wdt_result_scalar(const wdt_result* r, const char* key, double* out) {
  if (!r || !key || !out) return fail_config("wdt_result_scalar: null argument");
  return guard([&] {
    const json* v = nullptr;
    if (key[0] == '/') {
      try {
        const auto ptr = json::json_pointer(key);
        if (!r->j.contains(ptr)) throw wdt::ConfigError(std::string("no result field ") + key);
        v = &r->j.at(ptr);
      } catch (const json::exception& e) {
        throw wdt::ConfigError(std::string("bad result pointer: ") + e.what());
      }
    } else {
      const auto it = r->j.find(key);
      if (it == r->j.end()) throw wdt::ConfigError(std::string("no result field ") + key);
      v = &*it;
    }
    if (v->is_boolean())
      *out = v->get<bool>() ? 1.0 : 0.0;
    else if (v->is_number())
      *out = v->get<double>();
    else
      throw wdt::ConfigError(std::string("result field is not numeric: ") + key);
    return WDT_OK;
  });
}

wdt_status wdt_result_json(const wdt_result* r, char** json_out) {
  if (!r || !json_out) return fail_config("wdt_result_json: null argument");
  *json_out = nullptr;
  return guard([&] {
    *json_out = dup_string(r->j.dump(2));
    if (!*json_out) throw std::bad_alloc();
    return WDT_OK;
  });
}

void wdt_result_free(wdt_result* r) { delete r; }

void wdt_string_free(char* s) { std::free(s); }

}  // extern "C"

#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bogoliubov.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace wdt {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string shape_name(QuenchShape s) {
  switch (s) {
    case QuenchShape::SinSquaredRamp: return "sin2";
    case QuenchShape::Linear: return "linear";
    case QuenchShape::PiecewiseTable: return "table";
  }
  return "sin2";
}

QuenchShape shape_from(const std::string& s) {
  if (s == "sin2") return QuenchShape::SinSquaredRamp;
  if (s == "linear") return QuenchShape::Linear;
  if (s == "table") return QuenchShape::PiecewiseTable;
  throw ConfigError("unknown quench shape '" + s + "'");
}

std::string window_name(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

Window window_from(const std::string& s) {
  if (s == "hann") return Window::Hann;
  if (s == "rectangular") return Window::Rectangular;
  throw ConfigError("unknown window '" + s + "'");
}

void expect_keys(const json& j, const char* where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(std::string("config section '") + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(std::string("unknown config key '") + where + "." + it.key() + "'");
  }
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) j.at(key).get_to(out);
}

std::complex<double> complex_from(const json& j, const char* where) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(std::string(where) + " must be a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  const double r = std::log(hi / lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[i] = lo * std::exp(r * i);
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g(n);
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) g[i] = lo + h * i;
  g.back() = hi;
  return g;
}

int pool_threads() {
  const char* env = std::getenv("WDT_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<int>(std::min<long>(v, 128));
}

std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

void BayesGridOptions::validate() const {
  if (n_beta < 8 || n_df < 8) throw ConfigError("bayes: grids need at least 8 points");
  if (!(beta_span > 1.0)) throw ConfigError("bayes: beta_span must exceed 1");
  if (!(sigma_mult > 0.0) || pilot_mult < 0.0)
    throw ConfigError("bayes: grid width multipliers out of range");
  if (!(boundary_tol > 0.0 && boundary_tol <= 1.0))
    throw ConfigError("bayes: boundary_tol out of range");
  if (max_widenings < 0 || max_widenings > 8)
    throw ConfigError("bayes: max_widenings out of range");
}

void ExperimentConfig::validate() const {
  if (engine != "bogoliubov" && engine != "tebd")
    throw ConfigError("engine must be 'bogoliubov' or 'tebd'");
  if (inference != "bayes" && inference != "freq" && inference != "both")
    throw ConfigError("inference must be 'bayes', 'freq', or 'both'");
  bhm.validate();
  quench.validate();
  qubit.validate();
  bayes.validate();
  tebd.validate();
  if (!(beta_true > 0.0)) throw ConfigError("beta_true must be positive");
  if (t_window < 0.0) throw ConfigError("t_window must be >= 0");
  if (n_steps < 2) throw ConfigError("n_steps must be >= 2");
  if (n_meas < 0) throw ConfigError("n_meas must be >= 0");
  if (n_experiments < 1) throw ConfigError("n_experiments must be >= 1");
  for (double b : beta_list)
    if (!(b > 0.0)) throw ConfigError("beta_list entries must be positive");
  if (label.empty() || label.find('/') != std::string::npos)
    throw ConfigError("label must be a non-empty file-name fragment");
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    expect_keys(j, "config",
                {"engine", "bhm", "quench", "qubit", "beta_true", "t_window", "n_steps",
                 "n_meas", "seed", "inference", "n_experiments", "beta_list", "window",
                 "bayes", "tebd", "out_dir", "label"});
    get_if(j, "engine", cfg.engine);
    if (j.contains("bhm")) {
      const json& b = j["bhm"];
      expect_keys(b, "bhm",
                  {"m_sites", "hopping", "interaction", "chem_potential", "density", "eta",
                   "impurity_site", "lattice_const"});
      get_if(b, "m_sites", cfg.bhm.m_sites);
      get_if(b, "hopping", cfg.bhm.hopping);
      get_if(b, "interaction", cfg.bhm.interaction);
      get_if(b, "chem_potential", cfg.bhm.chem_potential);
      get_if(b, "density", cfg.bhm.density);
      get_if(b, "eta", cfg.bhm.eta);
      get_if(b, "impurity_site", cfg.bhm.impurity_site);
      get_if(b, "lattice_const", cfg.bhm.lattice_const);
    }
    if (j.contains("quench")) {
      const json& q = j["quench"];
      expect_keys(q, "quench", {"shape", "lambda_i", "lambda_f", "tau", "table"});
      if (q.contains("shape")) cfg.quench.shape = shape_from(q["shape"].get<std::string>());
      get_if(q, "lambda_i", cfg.quench.lambda_i);
      get_if(q, "lambda_f", cfg.quench.lambda_f);
      get_if(q, "tau", cfg.quench.tau);
      if (q.contains("table")) {
        cfg.quench.table.clear();
        for (const json& row : q["table"]) {
          if (!row.is_array() || row.size() != 2)
            throw ConfigError("quench.table rows must be [t, lambda] pairs");
          cfg.quench.table.emplace_back(row[0].get<double>(), row[1].get<double>());
        }
      }
    }
    if (j.contains("qubit")) {
      const json& q = j["qubit"];
      expect_keys(q, "qubit", {"s_down", "s_up", "delta"});
      if (q.contains("s_down")) cfg.qubit.s_down = complex_from(q["s_down"], "qubit.s_down");
      if (q.contains("s_up")) cfg.qubit.s_up = complex_from(q["s_up"], "qubit.s_up");
      get_if(q, "delta", cfg.qubit.delta);
    }
    get_if(j, "beta_true", cfg.beta_true);
    get_if(j, "t_window", cfg.t_window);
    get_if(j, "n_steps", cfg.n_steps);
    get_if(j, "n_meas", cfg.n_meas);
    get_if(j, "seed", cfg.seed);
    get_if(j, "inference", cfg.inference);
    get_if(j, "n_experiments", cfg.n_experiments);
    get_if(j, "beta_list", cfg.beta_list);
    if (j.contains("window")) cfg.window = window_from(j["window"].get<std::string>());
    if (j.contains("bayes")) {
      const json& b = j["bayes"];
      expect_keys(b, "bayes",
                  {"n_beta", "n_df", "beta_span", "sigma_mult", "pilot_mult", "boundary_tol",
                   "max_widenings"});
      get_if(b, "n_beta", cfg.bayes.n_beta);
      get_if(b, "n_df", cfg.bayes.n_df);
      get_if(b, "beta_span", cfg.bayes.beta_span);
      get_if(b, "sigma_mult", cfg.bayes.sigma_mult);
      get_if(b, "pilot_mult", cfg.bayes.pilot_mult);
      get_if(b, "boundary_tol", cfg.bayes.boundary_tol);
      get_if(b, "max_widenings", cfg.bayes.max_widenings);
    }
    if (j.contains("tebd")) {
      const json& t = j["tebd"];
      expect_keys(t, "tebd",
                  {"d", "d_max", "dt_real", "dt_imag", "midpoint_lambda", "svd_rel_cutoff",
                   "trunc_warn_threshold"});
      get_if(t, "d", cfg.tebd.d);
      get_if(t, "d_max", cfg.tebd.d_max);
      get_if(t, "dt_real", cfg.tebd.dt_real);
      get_if(t, "dt_imag", cfg.tebd.dt_imag);
      get_if(t, "midpoint_lambda", cfg.tebd.midpoint_lambda);
      get_if(t, "svd_rel_cutoff", cfg.tebd.svd_rel_cutoff);
      get_if(t, "trunc_warn_threshold", cfg.tebd.trunc_warn_threshold);
    }
    get_if(j, "out_dir", cfg.out_dir);
    get_if(j, "label", cfg.label);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["engine"] = cfg.engine;
  j["bhm"] = {{"m_sites", cfg.bhm.m_sites},
              {"hopping", cfg.bhm.hopping},
              {"interaction", cfg.bhm.interaction},
              {"chem_potential", cfg.bhm.chem_potential},
              {"density", cfg.bhm.density},
              {"eta", cfg.bhm.eta},
              {"impurity_site", cfg.bhm.impurity_site},
              {"lattice_const", cfg.bhm.lattice_const}};
  json table = json::array();
  for (const auto& [t, v] : cfg.quench.table) table.push_back({t, v});
  j["quench"] = {{"shape", shape_name(cfg.quench.shape)},
                 {"lambda_i", cfg.quench.lambda_i},
                 {"lambda_f", cfg.quench.lambda_f},
                 {"tau", cfg.quench.tau},
                 {"table", table}};
  j["qubit"] = {{"s_down", {cfg.qubit.s_down.real(), cfg.qubit.s_down.imag()}},
                {"s_up", {cfg.qubit.s_up.real(), cfg.qubit.s_up.imag()}},
                {"delta", cfg.qubit.delta}};
  j["beta_true"] = cfg.beta_true;
  j["t_window"] = cfg.t_window;
  j["n_steps"] = cfg.n_steps;
  j["n_meas"] = cfg.n_meas;
  j["seed"] = cfg.seed;
  j["inference"] = cfg.inference;
  j["n_experiments"] = cfg.n_experiments;
  j["beta_list"] = cfg.beta_list;
  j["window"] = window_name(cfg.window);
  j["bayes"] = {{"n_beta", cfg.bayes.n_beta},
                {"n_df", cfg.bayes.n_df},
                {"beta_span", cfg.bayes.beta_span},
                {"sigma_mult", cfg.bayes.sigma_mult},
                {"pilot_mult", cfg.bayes.pilot_mult},
                {"boundary_tol", cfg.bayes.boundary_tol},
                {"max_widenings", cfg.bayes.max_widenings}};
  j["tebd"] = {{"d", cfg.tebd.d},
               {"d_max", cfg.tebd.d_max},
               {"dt_real", cfg.tebd.dt_real},
               {"dt_imag", cfg.tebd.dt_imag},
               {"midpoint_lambda", cfg.tebd.midpoint_lambda},
               {"svd_rel_cutoff", cfg.tebd.svd_rel_cutoff},
               {"trunc_warn_threshold", cfg.tebd.trunc_warn_threshold}};
  j["out_dir"] = cfg.out_dir;
  j["label"] = cfg.label;
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key.empty()) throw ConfigError("empty override key");
  json j = json::parse(config_to_json(cfg));
  std::string ptr = "/" + key;
  for (char& c : ptr)
    if (c == '.') c = '/';
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = value;  // bare strings need no quotes on the command line
  }
  try {
    j[json::json_pointer(ptr)] = v;
  } catch (const json::exception& e) {
    throw ConfigError("override '" + key + "': " + e.what());
  }
  cfg = config_from_json(j.dump());
}

uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string dump = json::parse(config_to_json(cfg)).dump();
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

PreparedModel prepare_model(const ExperimentConfig& cfg, double beta) {
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  PreparedModel prep;
  prep.beta = beta;

  if (cfg.engine == "bogoliubov") {
    const BogoliubovModel model(cfg.bhm);
    const QuenchSpec qb = cfg.quench.reversed();
    const QuenchIntegrals qi_f = quench_integrals(model, cfg.quench);
    const QuenchIntegrals qi_b = quench_integrals(model, qb);
    const Cumulants cf = work_cumulants(model, qi_f, beta);
    const Cumulants cb = work_cumulants(model, qi_b, beta);
    prep.mu_f = cf.mu;
    prep.sigma_f = std::sqrt(cf.sigma2);
    prep.mu_b = cb.mu;
    prep.sigma_b = std::sqrt(cb.sigma2);
    prep.t_window =
        cfg.t_window > 0.0 ? cfg.t_window : choose_window_size(beta, prep.sigma_f);
    prep.exact_f = chi_series_bogoliubov(model, cfg.quench, beta, prep.t_window, cfg.n_steps);
    prep.exact_b = chi_series_bogoliubov(model, qb, beta, prep.t_window, cfg.n_steps);
    prep.df_analytic =
        model.delta_f(cfg.quench.lambda_start(), cfg.quench.lambda_end(), beta);
  } else {
    if (!(cfg.t_window > 0.0))
      throw ConfigError("t_window must be set explicitly for the tebd engine");
    prep.t_window = cfg.t_window;
    const TebdEngine engine(cfg.bhm, cfg.tebd);
    prep.exact_f = engine.chi_series(cfg.quench, beta, prep.t_window, cfg.n_steps);
    prep.exact_b = engine.chi_series(cfg.quench.reversed(), beta, prep.t_window, cfg.n_steps);
    const ShortTimeCumulants cf = short_time_cumulants(prep.exact_f);
    const ShortTimeCumulants cb = short_time_cumulants(prep.exact_b);
    prep.mu_f = cf.mu;
    prep.sigma_f = std::sqrt(cf.sigma2);
    prep.mu_b = cb.mu;
    prep.sigma_b = std::sqrt(cb.sigma2);
    prep.df_analytic = 0.5 * (prep.mu_f - prep.mu_b);
  }
  prep.exact_f.tag = "forward";
  prep.exact_b.tag = "backward";
  prep.exact_f.beta = beta;
  prep.exact_b.beta = beta;
  // W grid covers the forward support and the mirrored backward support
  prep.grid = choose_w_grid(prep.t_window, prep.mu_f, prep.sigma_f, -prep.mu_b, prep.sigma_b);
  prep.diag = diagnose_window(prep.exact_f, prep.sigma_f, beta);
  return prep;
}

ExperimentOutcome run_inference(const ExperimentConfig& cfg, InferenceInputs in,
                                PipelineArtifacts* artifacts) {
  ExperimentOutcome out;
  out.seed = in.seed;
  out.beta_true = in.beta_ref;
  out.t_window = in.t_window;
  out.n_rows = static_cast<int>(in.obs.size());

  LogRatioOptions ropt;
  ropt.seed = substream_key(in.seed, 2);
  const std::vector<LogRatioPoint> pts = log_ratio_points(in.obs, ropt);
  const FitResult fit = weighted_fit(pts);
  if (cfg.want_freq()) {
    out.freq = fit;
    out.has_freq = true;
  }
  if (artifacts) artifacts->ratio_points = pts;

  if (cfg.want_bayes()) {
    Observation obs = std::move(in.obs);
    if (in.noiseless) {
      // exact distributions carry zero variance; inject a tiny floor so the
      // likelihood is defined and the posterior collapses to grid resolution.
      // 1e-10 keeps |log L| ~ 1e11 at most, where doubles still resolve the
      // O(1) structure that survives normalization; much tighter floors push
      // |log L| past 1e15 and the stored densities lose their mantissa bits.
      double peak = 0.0;
      for (const auto& r : obs) peak = std::max({peak, std::abs(r.p_f), std::abs(r.p_b)});
      const double floor_var = std::max(peak * peak * 1e-10, 1e-300);
      for (auto& r : obs) {
        r.var_f = floor_var;
        r.var_b = floor_var;
      }
    }

    // pilot-centered grids; fall back to fluctuation-dissipation estimates
    const double df_fd = 0.5 * (in.mu_f - in.mu_b);
    double beta0, df_center;
    if (fit.ok && fit.beta_hat > 0.0) {
      beta0 = fit.beta_hat;
      df_center = fit.df_hat;
    } else {
      out.pilot_fallback = true;
      const double beta_fd = 2.0 * (in.mu_f - df_fd) / (in.sigma_f * in.sigma_f);
      beta0 = beta_fd > 0.0 ? beta_fd : kPi / in.t_window;
      df_center = df_fd;
    }
    const int n_w = std::max(out.n_rows, 1);
    double half = std::max(cfg.bayes.sigma_mult * in.sigma_f / std::sqrt(double(n_w)),
                           cfg.bayes.pilot_mult * std::sqrt(std::max(fit.var_df, 0.0)));
    if (!(half > 0.0)) half = std::max(1e-6, 1e-3 * std::abs(df_center));
    double span = cfg.bayes.beta_span;

    Posterior post;
    for (int attempt = 0;; ++attempt) {
      const std::vector<double> bgrid =
          geometric_grid(beta0 / span, beta0 * span, cfg.bayes.n_beta);
      const std::vector<double> dgrid =
          linear_grid(df_center - half, df_center + half, cfg.bayes.n_df);
      post = compute_posterior(obs, bgrid, dgrid);
      out.widenings = attempt;
      if (post.boundary_mass <= cfg.bayes.boundary_tol || attempt >= cfg.bayes.max_widenings)
        break;
      span *= 2.0;
      half *= 4.0;
    }
    out.bayes = summarize(post);
    out.has_bayes = true;
    if (in.beta_ref > 0.0) {
      out.decile = posterior_beta_decile(post, in.beta_ref);
      out.cdf_true = posterior_beta_cdf(post, in.beta_ref);
    }
    if (artifacts) {
      artifacts->posterior = std::move(post);
      artifacts->has_posterior = true;
    }
  }
  return out;
}

ExperimentOutcome run_one(const ExperimentConfig& cfg, const PreparedModel& prep, uint64_t seed,
                          PipelineArtifacts* artifacts) {
  CharFnSeries sf, sb;
  if (cfg.n_meas > 0) {
    sf = sample_series(prep.exact_f, cfg.qubit, cfg.n_meas, substream_key(seed, 0));
    sb = sample_series(prep.exact_b, cfg.qubit, cfg.n_meas, substream_key(seed, 1));
  } else {
    sf = prep.exact_f;
    sb = prep.exact_b;
  }

  const WorkDistEstimate dist_f =
      work_distribution(sf, cfg.window, prep.grid.k_min, prep.grid.k_max);
  const WorkDistEstimate dist_b =
      work_distribution(sb, cfg.window, -prep.grid.k_max, -prep.grid.k_min);

  InferenceInputs in;
  in.obs = pair_observation(dist_f, dist_b);
  in.sigma_f = prep.sigma_f;
  in.mu_f = prep.mu_f;
  in.mu_b = prep.mu_b;
  in.t_window = prep.t_window;
  in.beta_ref = prep.beta;
  in.seed = seed;
  in.noiseless = cfg.n_meas == 0;

  if (artifacts) {
    artifacts->chi_f = sf;
    artifacts->chi_b = sb;
    artifacts->dist_f = dist_f;
    artifacts->dist_b = dist_b;
  }
  ExperimentOutcome out = run_inference(cfg, std::move(in), artifacts);
  out.clamp_count = sf.clamp_count + sb.clamp_count;
  return out;
}

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& suffix) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / (cfg.label + "_" + suffix)).string();
}

void write_run_files(const ExperimentConfig& cfg, const PreparedModel& prep,
                     const ExperimentOutcome& out, const PipelineArtifacts& art) {
  write_charfn(out_path(cfg, "charfn_forward.txt"), art.chi_f);
  write_charfn(out_path(cfg, "charfn_backward.txt"), art.chi_b);
  write_workdist(out_path(cfg, "workdist_forward.txt"), art.dist_f);
  write_workdist(out_path(cfg, "workdist_backward.txt"), art.dist_b);

  Table ratio;
  ratio.meta.emplace_back("label", cfg.label);
  ratio.columns = {"w", "lbar", "variance", "bias", "included"};
  for (const auto& p : art.ratio_points)
    ratio.rows.push_back({p.w, p.lbar, p.var, p.bias, p.included ? 1.0 : 0.0});
  write_table(out_path(cfg, "logratio.csv"), ratio);

  if (art.has_posterior) write_posterior(out_path(cfg, "posterior.txt"), art.posterior);

  SummaryRecord s;
  s.set("config_hash", hash_hex(config_hash(cfg)));
  s.set("engine", cfg.engine);
  s.set_int("seed", static_cast<long long>(out.seed));
  s.set_double("beta_true", out.beta_true);
  s.set_double("t_window", out.t_window);
  s.set_int("n_steps", cfg.n_steps);
  s.set_int("n_meas", cfg.n_meas);
  s.set("window", window_name(cfg.window));
  s.set_int("n_rows", out.n_rows);
  s.set_int("clamp_count", out.clamp_count);
  s.set_double("mu_f", prep.mu_f);
  s.set_double("sigma_f", prep.sigma_f);
  s.set_double("mu_b", prep.mu_b);
  s.set_double("sigma_b", prep.sigma_b);
  s.set_double("df_analytic", prep.df_analytic);
  s.set_double("aliasing_ratio", prep.diag.aliasing_ratio);
  s.set_double("leakage_ratio", prep.diag.leakage_ratio);
  s.set_int("aliasing_ok", prep.diag.aliasing_ok);
  s.set_int("leakage_ok", prep.diag.leakage_ok);
  if (cfg.engine == "tebd")
    s.set_double("truncation_weight", art.chi_f.truncation_weight + art.chi_b.truncation_weight);
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
    s.set_int("decile_true", out.decile);
    s.set_double("cdf_true", out.cdf_true);
    s.set_int("grid_widenings", out.widenings);
    s.set_int("pilot_fallback", out.pilot_fallback);
    if (art.has_posterior)
      for (int q = 1; q <= 9; ++q)
        s.set_double("beta_q" + std::to_string(10 * q),
                     posterior_beta_quantile(art.posterior, 0.1 * q));
  }
  write_summary(out_path(cfg, "summary.txt"), s);
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_files,
                                 PipelineArtifacts* artifacts) {
  cfg.validate();
  const PreparedModel prep = prepare_model(cfg, cfg.beta_true);
  PipelineArtifacts local;
  PipelineArtifacts* art = artifacts ? artifacts : &local;
  const ExperimentOutcome out = run_one(cfg, prep, cfg.seed, art);
  if (write_files) write_run_files(cfg, prep, out, *art);
  return out;
}

// ---------------------------------------------------------------------------
// calibration
// ---------------------------------------------------------------------------

CalibrationResult run_calibration(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<double> betas = cfg.beta_list;
  if (betas.empty()) betas.push_back(cfg.beta_true);
  const int n_exp = cfg.n_experiments;
  const int n_threads = pool_threads();

  CalibrationResult result;
  result.experiments.resize(betas.size() * static_cast<size_t>(n_exp));

  for (size_t b = 0; b < betas.size(); ++b) {
    const PreparedModel prep = prepare_model(cfg, betas[b]);
    const uint64_t sweep_seed = substream_key(cfg.seed, static_cast<uint64_t>(b) + 1);

    std::exception_ptr first_error;
    std::mutex err_mutex;
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n_exp) return;
        try {
          const uint64_t seed = substream_key(sweep_seed, static_cast<uint64_t>(i) + 1);
          result.experiments[b * n_exp + i] = run_one(cfg, prep, seed, nullptr);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    CalibrationAggregate agg;
    agg.beta_true = betas[b];
    agg.n_experiments = n_exp;
    double sum = 0.0, sum2 = 0.0, sump = 0.0;
    double fsum = 0.0, fsum2 = 0.0;
    int nb = 0, nf = 0;
    for (int i = 0; i < n_exp; ++i) {
      const ExperimentOutcome& e = result.experiments[b * n_exp + i];
      if (e.has_bayes) {
        sum += e.bayes.beta_mean;
        sum2 += e.bayes.beta_mean * e.bayes.beta_mean;
        sump += e.bayes.beta_std;
        ++agg.decile_counts[std::clamp(e.decile, 0, 9)];
        ++nb;
      }
      if (e.has_freq && e.freq.ok) {
        fsum += e.freq.beta_hat;
        fsum2 += e.freq.beta_hat * e.freq.beta_hat;
        ++nf;
      }
    }
    agg.n_completed = nb > 0 ? nb : nf;
    if (nb > 0) {
      agg.mean_beta = sum / nb;
      agg.std_beta = nb > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / nb) / (nb - 1))) : 0.0;
      agg.mean_post_std = sump / nb;
      agg.bias_frac = (agg.mean_beta - agg.beta_true) / agg.beta_true;
      agg.frac_std = agg.mean_post_std / agg.beta_true;
    }
    if (nf > 0) {
      agg.freq_mean_beta = fsum / nf;
      agg.freq_std_beta =
          nf > 1 ? std::sqrt(std::max(0.0, (fsum2 - fsum * fsum / nf) / (nf - 1))) : 0.0;
    }
    result.per_beta.push_back(agg);
  }
  return result;
}

void write_calibration_outputs(const ExperimentConfig& cfg, const CalibrationResult& result) {
  Table per_beta;
  per_beta.meta.emplace_back("config_hash", hash_hex(config_hash(cfg)));
  per_beta.meta.emplace_back("label", cfg.label);
  per_beta.columns = {"beta",      "n",        "mean_beta",      "std_beta",
                      "mean_post_std", "bias_frac", "frac_std",   "freq_mean_beta",
                      "freq_std_beta"};
  for (int d = 0; d < 10; ++d) per_beta.columns.push_back("decile_" + std::to_string(d));
  for (const auto& a : result.per_beta) {
    std::vector<double> row = {a.beta_true,
                               static_cast<double>(a.n_completed),
                               a.mean_beta,
                               a.std_beta,
                               a.mean_post_std,
                               a.bias_frac,
                               a.frac_std,
                               a.freq_mean_beta,
                               a.freq_std_beta};
    for (int d = 0; d < 10; ++d) row.push_back(a.decile_counts[d]);
    per_beta.rows.push_back(std::move(row));
  }
  write_table(out_path(cfg, "calibration.csv"), per_beta);

  Table runs;
  runs.meta.emplace_back("config_hash", hash_hex(config_hash(cfg)));
  runs.columns = {"sweep",      "index",    "beta_true",      "bayes_beta_mean",
                  "bayes_beta_std", "bayes_df_mean", "decile", "cdf_true",
                  "freq_ok",    "freq_beta", "widenings"};
  const int n_exp = cfg.n_experiments;
  for (size_t b = 0; b < result.per_beta.size(); ++b)
    for (int i = 0; i < n_exp; ++i) {
      const ExperimentOutcome& e = result.experiments[b * n_exp + i];
      runs.rows.push_back({static_cast<double>(b), static_cast<double>(i), e.beta_true,
                           e.bayes.beta_mean, e.bayes.beta_std, e.bayes.df_mean,
                           static_cast<double>(e.decile), e.cdf_true,
                           e.has_freq && e.freq.ok ? 1.0 : 0.0, e.freq.beta_hat,
                           static_cast<double>(e.widenings)});
    }
  write_table(out_path(cfg, "experiments.csv"), runs);
}

bool calibration_check(const CalibrationResult& result, std::string* report) {
  bool ok = true;
  std::ostringstream ss;
  for (const auto& a : result.per_beta) {
    const bool bias_ok = std::abs(a.bias_frac) <= 0.05;
    const bool width_ok = a.frac_std <= 0.15;
    bool decile_ok = true;
    if (a.n_completed >= 200) {
      for (int d = 0; d < 10; ++d) {
        const double f = static_cast<double>(a.decile_counts[d]) / a.n_completed;
        if (f < 0.04 || f > 0.17) decile_ok = false;
      }
    }
    ss << "beta " << a.beta_true << ": bias " << a.bias_frac << (bias_ok ? " ok" : " FAIL")
       << ", frac_std " << a.frac_std << (width_ok ? " ok" : " FAIL");
    if (a.n_completed >= 200) ss << ", deciles " << (decile_ok ? "ok" : "FAIL");
    ss << "\n";
    ok = ok && bias_ok && width_ok && decile_ok;
  }
  if (report) *report = ss.str();
  return ok;
}

}  // namespace wdt

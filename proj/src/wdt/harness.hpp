#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bayes.hpp"
#include "freq.hpp"
#include "io.hpp"
#include "model.hpp"
#include "spectral.hpp"
#include "tebd.hpp"

namespace wdt {

struct BayesGridOptions {
  int n_beta = 400;
  int n_df = 400;
  double beta_span = 10.0;  // log-spaced grid over [beta0/span, beta0*span]
  // Initial dF half-width: max(sigma_mult * sigma_F / sqrt(N_W), pilot_mult * sigma_dF_pilot)
  double sigma_mult = 4.0;
  double pilot_mult = 10.0;
  double boundary_tol = 0.01;  // widen the grid while edge mass exceeds this
  int max_widenings = 3;

  void validate() const;
};

struct ExperimentConfig {
  std::string engine = "bogoliubov";  // bogoliubov | tebd
  BhmParams bhm;
  QuenchSpec quench;
  QubitConfig qubit;
  double beta_true = 1.0;
  double t_window = 0.0;  // 0 => auto: T = pi beta (1 + 4 e^{-sigma beta})
  int n_steps = 500;
  long n_meas = 500;  // 0 => noiseless pipeline (exact series, floored variances)
  uint64_t seed = 1;
  std::string inference = "both";  // bayes | freq | both
  int n_experiments = 200;
  std::vector<double> beta_list;  // calibration sweep; empty => {beta_true}
  Window window = Window::Rectangular;
  BayesGridOptions bayes;
  TebdOptions tebd;
  std::string out_dir = ".";
  std::string label = "run";

  void validate() const;
  bool want_bayes() const { return inference == "bayes" || inference == "both"; }
  bool want_freq() const { return inference == "freq" || inference == "both"; }
};

// JSON round trip; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);
// Dotted key ("quench.lambda_f") with a JSON-literal value ("0.5", "[1,5]").
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);
// FNV-1a over the canonical (sorted-key) JSON dump.
uint64_t config_hash(const ExperimentConfig& cfg);

// Exact model ingredients shared by every experiment at one temperature.
struct PreparedModel {
  double beta = 0.0;
  double t_window = 0.0;
  CharFnSeries exact_f;
  CharFnSeries exact_b;
  double mu_f = 0.0, sigma_f = 0.0;  // forward work mean / std
  double mu_b = 0.0, sigma_b = 0.0;  // backward work mean / std
  double df_analytic = 0.0;          // Bogoliubov engine only; else short-time estimate
  GridBounds grid;
  LeakageReport diag;
};

PreparedModel prepare_model(const ExperimentConfig& cfg, double beta);

struct ExperimentOutcome {
  uint64_t seed = 0;
  double beta_true = 0.0;
  double t_window = 0.0;
  int n_rows = 0;
  int clamp_count = 0;
  FitResult freq;
  bool has_freq = false;
  PosteriorSummary bayes;
  bool has_bayes = false;
  int decile = -1;          // decile of beta_true under the posterior
  double cdf_true = 0.0;    // posterior CDF at beta_true
  int widenings = 0;        // dF/beta grid enlargements triggered
  bool pilot_fallback = false;
};

struct PipelineArtifacts {
  CharFnSeries chi_f, chi_b;
  WorkDistEstimate dist_f, dist_b;
  std::vector<LogRatioPoint> ratio_points;
  Posterior posterior;
  bool has_posterior = false;
};

// Inputs for the inference stage alone (used by the file-driven CLI path).
struct InferenceInputs {
  Observation obs;
  double sigma_f = 0.0;  // forward work std, sets the dF grid scale
  double mu_f = 0.0;     // fluctuation-dissipation fallbacks for the pilot
  double mu_b = 0.0;
  double t_window = 0.0;
  double beta_ref = 0.0;    // reference beta for decile/CDF diagnostics
  uint64_t seed = 0;        // resampling stream
  bool noiseless = false;   // all-zero variances: floor them for the Bayes route
};

// Frequentist fit + Bayesian posterior on a paired observation.
ExperimentOutcome run_inference(const ExperimentConfig& cfg, InferenceInputs in,
                                PipelineArtifacts* artifacts = nullptr);

// One experiment against a prepared model; artifacts optional.
ExperimentOutcome run_one(const ExperimentConfig& cfg, const PreparedModel& prep, uint64_t seed,
                          PipelineArtifacts* artifacts = nullptr);

// prepare_model at beta_true + run_one at cfg.seed; writes result files when
// write_files is set (charfn/workdist/posterior/summary under out_dir).
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, bool write_files,
                                 PipelineArtifacts* artifacts = nullptr);

struct CalibrationAggregate {
  double beta_true = 0.0;
  int n_experiments = 0;
  int n_completed = 0;
  double mean_beta = 0.0;      // mean of posterior means
  double std_beta = 0.0;       // scatter of posterior means
  double mean_post_std = 0.0;  // average posterior width
  double bias_frac = 0.0;      // (mean_beta - beta_true) / beta_true
  double frac_std = 0.0;       // mean_post_std / beta_true
  double freq_mean_beta = 0.0;
  double freq_std_beta = 0.0;
  std::array<int, 10> decile_counts{};
};

struct CalibrationResult {
  std::vector<CalibrationAggregate> per_beta;
  std::vector<ExperimentOutcome> experiments;  // sweep-major, experiment-minor
};

// n_experiments per beta in beta_list (or {beta_true}); per-experiment seeds
// derive from (cfg.seed, sweep index, experiment index).  Honors WDT_THREADS.
CalibrationResult run_calibration(const ExperimentConfig& cfg);

void write_calibration_outputs(const ExperimentConfig& cfg, const CalibrationResult& result);

// Threshold check behind `calibrate --check`: |bias| <= 5%, mean posterior
// width <= 15% of beta, and (when n >= 200) decile fractions in [0.04, 0.17].
bool calibration_check(const CalibrationResult& result, std::string* report = nullptr);

}  // namespace wdt

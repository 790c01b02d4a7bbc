#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "branchz/core.hpp"
#include "branchz/estimators.hpp"
#include "branchz/profiles.hpp"
#include "branchz/simulator.hpp"

namespace branchz {

enum class DownsampleMode : uint8_t { measurements, loads };

std::string to_string(DownsampleMode mode);
DownsampleMode parse_downsample_mode(const std::string& text);

/// Everything that defines one Monte-Carlo scenario family.
struct ScenarioConfig {
  size_t k_segments = 4;
  double length_min_m = 100.0;
  double length_max_m = 300.0;
  CableParams cable = CableParams::nayy_4x150_se();
  CircuitMode mode = CircuitMode::AcMagnitude;
  size_t t_steps = 1440;
  double dt_s = 60.0;
  double source_v = 400.0;
  uint64_t seed = 1;

  // profile source: CSV path, or synthetic when empty
  std::string profile_csv;
  size_t synth_profiles = 55;
  double synth_peak_w = 4000.0;

  // AC load angle: Q = P * tan_phi. Unset means matched to the cable angle
  // (tan_phi = x/r), which keeps magnitude-domain arithmetic exact.
  std::optional<double> load_power_factor;

  double i_floor = 1e-6;
  double sweep_tol_v = 1e-8;
  int sweep_max_iter = 100;
  double collapse_floor_frac = 0.5;
  DownsampleMode downsample_mode = DownsampleMode::measurements;

  double tan_phi() const;
  AcOptions ac_options() const;
  void validate() const;
};

/// One sampled scenario: branch geometry plus loads in mode-appropriate
/// units (amperes for DC, watts for AC).
struct Scenario {
  BranchSpec branch;
  LoadAssignment loads;
  uint64_t run_seed = 0;
  std::vector<double> lengths_m;
};

/// Loads the profile CSV or generates the synthetic set named by the config.
ProfileSet resolve_profile_set(const ScenarioConfig& config);

/// Draws segment lengths ~ U(min, max) and assigns load profiles for one
/// run. All randomness is derived from (config.seed, run_index), so any run
/// reproduces in isolation.
Scenario sample_scenario(const ScenarioConfig& config, size_t run_index,
                         const ProfileSet& profiles);
Scenario sample_scenario(const ScenarioConfig& config, size_t run_index);

/// Relative error metric in percent; the denominator is the ESTIMATE.
double epsilon(double z_true, double z_hat);

/// Linear-interpolation (type 7) quantile of an ascending-sorted vector.
double quantile_type7(std::span<const double> sorted, double p);

struct MethodOutcome {
  Method method = Method::lin;
  bool ok = false;
  std::string error;
  double z_hat = 0.0;
  double eps_pct = 0.0;        // |z_true - z_hat| / z_hat * 100
  double eps_truth_pct = 0.0;  // diagnostic variant with z_true denominator
  bool clamped = false;
  bool fallback = false;
  std::optional<RegressionFit> fit;
  double max_lb = 0.0;
  std::optional<double> min_ub;
};

struct FactorOutcome {
  size_t factor = 1;
  double dt_s = 60.0;
  size_t n_valid = 0;
  size_t n_invalid = 0;
  size_t n_no_ub = 0;       // valid samples lacking an upper bound
  size_t n_dropped = 0;     // trailing samples dropped by downsampling
  double max_f = 0.0;       // over valid samples
  std::vector<MethodOutcome> methods;
};

struct RunRecord {
  size_t run_index = 0;
  uint64_t run_seed = 0;
  bool ok = false;
  std::string error;
  double z_true = 0.0;
  bool scalar_total_exact = true;  // uniform cable angle
  std::vector<FactorOutcome> factors;
};

struct MethodAggregate {
  size_t factor = 1;
  Method method = Method::lin;
  size_t n = 0;  // runs contributing
  double median_eps = 0.0;
  double q25_eps = 0.0;
  double q75_eps = 0.0;
  double max_eps = 0.0;
  double mean_eps = 0.0;
  size_t clamped_runs = 0;
  size_t fallback_runs = 0;
  size_t failed_runs = 0;
};

struct StudyReport {
  ScenarioConfig config;
  size_t n_s = 0;
  std::vector<Method> methods;
  std::vector<size_t> factors;
  std::vector<RunRecord> runs;
  std::vector<MethodAggregate> aggregates;
  size_t failed_runs = 0;

  const MethodAggregate& aggregate(Method method, size_t factor = 1) const;
};

/// Runs the full protocol: sample, simulate, (optionally) downsample per
/// factor, derive, estimate with every method, aggregate quantiles.
/// Individual run failures are recorded and excluded from aggregates; the
/// study throws SimulationError when more than 10% of runs fail. Results are
/// bit-identical for any jobs value (0 = hardware concurrency).
StudyReport run_study(const ScenarioConfig& config, size_t n_s,
                      std::span<const Method> methods,
                      std::span<const size_t> downsample_factors = {},
                      unsigned jobs = 0);

/// Per-run max participation factor at one downsample factor, with
/// cross-run quantiles.
struct MaxFStats {
  size_t factor = 1;
  std::vector<double> per_run;  // ok runs, ascending run_index
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

MaxFStats max_participation_stats(const StudyReport& report, size_t factor = 1);

}  // namespace branchz

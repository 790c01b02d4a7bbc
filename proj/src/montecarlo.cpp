#include "branchz/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "branchz/bounds.hpp"
#include "branchz/errors.hpp"
#include "branchz/rng.hpp"

namespace branchz {
namespace {

constexpr uint64_t kRunKey = 0x52554e;      // per-run master stream
constexpr uint64_t kLengthKey = 0x4c454e;   // segment length draws
constexpr uint64_t kAssignKey = 0x4c4f4144; // profile-to-node assignment
constexpr uint64_t kSynthKey = 0x50524f46;  // synthetic profile generation

}  // namespace

std::string to_string(DownsampleMode mode) {
  return mode == DownsampleMode::measurements ? "measurements" : "loads";
}

DownsampleMode parse_downsample_mode(const std::string& text) {
  if (text == "measurements") return DownsampleMode::measurements;
  if (text == "loads") return DownsampleMode::loads;
  throw ValidationError("unknown downsample mode: " + text);
}

double ScenarioConfig::tan_phi() const {
  if (!load_power_factor) {
    // Matched angle: the drop phasor is collinear with the load current, so
    // magnitude arithmetic on the boundary measurements is consistent.
    return cable.x_per_km / cable.r_per_km;
  }
  const double pf = *load_power_factor;
  return std::sqrt(1.0 - pf * pf) / pf;
}

AcOptions ScenarioConfig::ac_options() const {
  AcOptions opts;
  opts.tol_v = sweep_tol_v;
  opts.max_iter = sweep_max_iter;
  opts.collapse_floor_frac = collapse_floor_frac;
  opts.tan_phi = tan_phi();
  return opts;
}

void ScenarioConfig::validate() const {
  cable.validate();
  if (k_segments < 1) throw ValidationError("k_segments must be >= 1");
  if (!(length_min_m > 0.0)) throw ValidationError("length_min_m must be positive");
  if (!(length_max_m >= length_min_m))
    throw ValidationError("length_max_m must be >= length_min_m");
  if (t_steps < 2) throw ValidationError("t_steps must be >= 2");
  if (!(dt_s > 0.0)) throw ValidationError("dt_s must be positive");
  if (!(source_v > 0.0)) throw ValidationError("source_v must be positive");
  if (profile_csv.empty()) {
    if (synth_profiles < 1) throw ValidationError("synth_profiles must be >= 1");
    if (!(synth_peak_w > 0.0)) throw ValidationError("synth_peak_w must be positive");
  }
  if (load_power_factor) {
    const double pf = *load_power_factor;
    if (!(pf > 0.0) || pf > 1.0)
      throw ValidationError("load power factor must lie in (0, 1]");
  }
  if (!(i_floor >= 0.0)) throw ValidationError("i_floor must be >= 0");
  if (!(sweep_tol_v > 0.0)) throw ValidationError("sweep_tol_v must be positive");
  if (sweep_max_iter < 1) throw ValidationError("sweep_max_iter must be >= 1");
  if (!(collapse_floor_frac >= 0.0) || collapse_floor_frac >= 1.0)
    throw ValidationError("collapse_floor_frac must lie in [0, 1)");
  if (mode == CircuitMode::Dc && cable.x_per_km != 0.0)
    throw ValidationError("dc mode requires cable_x_per_km = 0");
}

ProfileSet resolve_profile_set(const ScenarioConfig& config) {
  if (!config.profile_csv.empty())
    return load_profiles_csv(config.profile_csv, config.dt_s);
  return generate_synthetic(config.synth_profiles, config.t_steps,
                            mix_seed({config.seed, kSynthKey}),
                            config.synth_peak_w, config.dt_s);
}

Scenario sample_scenario(const ScenarioConfig& config, size_t run_index,
                         const ProfileSet& profiles) {
  config.validate();
  if (profiles.steps() < config.t_steps)
    throw ValidationError("profile set is shorter than t_steps");

  Scenario out;
  out.run_seed = mix_seed({config.seed, kRunKey, run_index});

  Rng len_rng = Rng::stream({out.run_seed, kLengthKey});
  out.lengths_m.reserve(config.k_segments);
  for (size_t k = 0; k < config.k_segments; ++k)
    out.lengths_m.push_back(len_rng.uniform(config.length_min_m, config.length_max_m));
  out.branch = build_branch(out.lengths_m, config.cable, config.mode);

  out.loads = assign_loads(profiles, config.k_segments,
                           mix_seed({out.run_seed, kAssignKey}));
  // Trim to the study horizon; profiles may carry more steps than needed.
  for (auto& series : out.loads.intermediate) series.resize(config.t_steps);
  out.loads.tail.resize(config.t_steps);

  if (config.mode == CircuitMode::Dc) {
    // DC loads are current sinks; profiles are in watts, so convert at the
    // source voltage to keep magnitudes in a comparable range.
    const double inv_v = 1.0 / config.source_v;
    for (auto& series : out.loads.intermediate)
      for (double& w : series) w *= inv_v;
    for (double& w : out.loads.tail) w *= inv_v;
  }
  return out;
}

Scenario sample_scenario(const ScenarioConfig& config, size_t run_index) {
  const ProfileSet profiles = resolve_profile_set(config);
  return sample_scenario(config, run_index, profiles);
}

double epsilon(double z_true, double z_hat) {
  if (!(z_hat > 0.0))
    throw ValidationError("epsilon is undefined for a non-positive estimate");
  return std::abs(z_true - z_hat) / z_hat * 100.0;
}

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  if (!(p >= 0.0) || p > 1.0) throw ValidationError("quantile p must lie in [0, 1]");
  if (sorted.size() == 1) return sorted[0];
  const double h = p * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

MethodOutcome run_method(Method method, const MeasurementSeries& series,
                         std::span<const DerivedSample> derived, double z_true,
                         double i_floor) {
  MethodOutcome out;
  out.method = method;
  try {
    if (method == Method::k2_exact) {
      const K2Result k2 = estimate_k2_exact(series, i_floor);
      out.z_hat = k2.total();
    } else {
      const EstimationResult est = estimate(method, derived);
      out.z_hat = est.z_hat;
      out.clamped = est.clamped;
      out.fallback = est.fallback;
      out.fit = est.fit;
      out.max_lb = est.max_lb;
      out.min_ub = est.min_ub;
    }
    out.eps_pct = epsilon(z_true, out.z_hat);
    out.eps_truth_pct = std::abs(z_true - out.z_hat) / z_true * 100.0;
    out.ok = true;
  } catch (const Error& err) {
    out.ok = false;
    out.error = err.what();
  }
  return out;
}

FactorOutcome run_factor(const ScenarioConfig& config, const Scenario& scenario,
                         const MeasurementSeries& base_series, size_t factor,
                         std::span<const Method> methods, double z_true) {
  FactorOutcome out;
  out.factor = factor;
  out.dt_s = config.dt_s * static_cast<double>(factor);

  MeasurementSeries series;
  if (factor == 1) {
    series = base_series;
  } else if (config.downsample_mode == DownsampleMode::measurements) {
    Downsampled ds = downsample(base_series, factor);
    series = std::move(ds.series);
    out.n_dropped = ds.dropped_samples;
  } else {
    LoadAssignment coarse = downsample_loads(scenario.loads, factor);
    out.n_dropped = scenario.loads.steps() - coarse.steps() * factor;
    series = run_series(scenario.branch, config.source_v, coarse, out.dt_s,
                        config.ac_options());
  }

  const std::vector<DerivedSample> derived = derive_samples(series, config.i_floor);
  for (const DerivedSample& d : derived) {
    if (!d.valid) {
      ++out.n_invalid;
      continue;
    }
    ++out.n_valid;
    out.max_f = std::max(out.max_f, d.f);
    if (!d.z_ub) ++out.n_no_ub;
  }

  out.methods.reserve(methods.size());
  for (Method method : methods)
    out.methods.push_back(run_method(method, series, derived, z_true, config.i_floor));
  return out;
}

RunRecord run_one(const ScenarioConfig& config, const ProfileSet& profiles,
                  size_t run_index, std::span<const Method> methods,
                  std::span<const size_t> factors) {
  RunRecord rec;
  rec.run_index = run_index;
  try {
    const Scenario scenario = sample_scenario(config, run_index, profiles);
    rec.run_seed = scenario.run_seed;
    rec.z_true = scenario.branch.total_z_mag();
    rec.scalar_total_exact = scenario.branch.uniform_angle();

    const MeasurementSeries base_series =
        run_series(scenario.branch, config.source_v, scenario.loads, config.dt_s,
                   config.ac_options());

    rec.factors.reserve(factors.size());
    for (size_t factor : factors)
      rec.factors.push_back(
          run_factor(config, scenario, base_series, factor, methods, rec.z_true));

    // Isolated invalid steps are data and are simply disregarded, but a run
    // that yields no usable sample at any resolution has failed outright
    // (e.g. the power flow diverged or collapsed at every step).
    bool any_valid = false;
    for (const FactorOutcome& fo : rec.factors) any_valid |= fo.n_valid > 0;
    if (!any_valid) throw EvidenceError("no valid samples at any resolution");
    rec.ok = true;
  } catch (const Error& err) {
    rec.ok = false;
    rec.error = err.what();
    rec.factors.clear();
  }
  return rec;
}

std::vector<MethodAggregate> aggregate_runs(const std::vector<RunRecord>& runs,
                                            std::span<const Method> methods,
                                            std::span<const size_t> factors) {
  std::vector<MethodAggregate> out;
  out.reserve(methods.size() * factors.size());
  for (size_t fi = 0; fi < factors.size(); ++fi) {
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      MethodAggregate agg;
      agg.factor = factors[fi];
      agg.method = methods[mi];
      std::vector<double> eps;
      double sum = 0.0;
      for (const RunRecord& rec : runs) {
        if (!rec.ok) continue;
        const MethodOutcome& mo = rec.factors[fi].methods[mi];
        if (!mo.ok) {
          ++agg.failed_runs;
          continue;
        }
        eps.push_back(mo.eps_pct);
        sum += mo.eps_pct;
        if (mo.clamped) ++agg.clamped_runs;
        if (mo.fallback) ++agg.fallback_runs;
      }
      agg.n = eps.size();
      if (!eps.empty()) {
        std::sort(eps.begin(), eps.end());
        agg.q25_eps = quantile_type7(eps, 0.25);
        agg.median_eps = quantile_type7(eps, 0.50);
        agg.q75_eps = quantile_type7(eps, 0.75);
        agg.max_eps = eps.back();
        agg.mean_eps = sum / static_cast<double>(eps.size());
      }
      out.push_back(std::move(agg));
    }
  }
  return out;
}

}  // namespace

const MethodAggregate& StudyReport::aggregate(Method method, size_t factor) const {
  for (const MethodAggregate& agg : aggregates)
    if (agg.method == method && agg.factor == factor) return agg;
  throw ValidationError("no aggregate for method " + to_string(method) +
                        " at factor " + std::to_string(factor));
}

StudyReport run_study(const ScenarioConfig& config, size_t n_s,
                      std::span<const Method> methods,
                      std::span<const size_t> downsample_factors, unsigned jobs) {
  config.validate();
  if (n_s < 1) throw ValidationError("n_s must be >= 1");
  if (methods.empty()) throw ValidationError("at least one method is required");
  for (Method m : methods)
    if (m == Method::k2_exact && config.k_segments != 2)
      throw ValidationError("k2_exact requires a two-segment branch");

  std::vector<size_t> factors(downsample_factors.begin(), downsample_factors.end());
  if (factors.empty()) factors.push_back(1);
  for (size_t f : factors)
    if (f < 1) throw ValidationError("downsample factors must be >= 1");

  StudyReport report;
  report.config = config;
  report.n_s = n_s;
  report.methods.assign(methods.begin(), methods.end());
  report.factors = factors;
  report.runs.resize(n_s);

  const ProfileSet profiles = resolve_profile_set(config);

  unsigned workers = jobs == 0 ? std::thread::hardware_concurrency() : jobs;
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(n_s));

  if (workers == 1) {
    for (size_t i = 0; i < n_s; ++i)
      report.runs[i] = run_one(config, profiles, i, methods, factors);
  } else {
    // Runs are independent; each lands in its preassigned slot, so the
    // report is byte-identical regardless of worker count or scheduling.
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const size_t i = next.fetch_add(1);
          if (i >= n_s) return;
          try {
            report.runs[i] = run_one(config, profiles, i, methods, factors);
          } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (const RunRecord& rec : report.runs)
    if (!rec.ok) ++report.failed_runs;
  if (report.failed_runs * 10 > n_s)
    throw SimulationError(std::to_string(report.failed_runs) + " of " +
                          std::to_string(n_s) + " runs failed (limit is 10%)");

  report.aggregates = aggregate_runs(report.runs, methods, factors);
  return report;
}

MaxFStats max_participation_stats(const StudyReport& report, size_t factor) {
  size_t fi = report.factors.size();
  for (size_t i = 0; i < report.factors.size(); ++i)
    if (report.factors[i] == factor) fi = i;
  if (fi == report.factors.size())
    throw ValidationError("factor " + std::to_string(factor) +
                          " is not part of this study");

  MaxFStats stats;
  stats.factor = factor;
  for (const RunRecord& rec : report.runs)
    if (rec.ok) stats.per_run.push_back(rec.factors[fi].max_f);
  if (stats.per_run.empty()) throw EvidenceError("no successful runs");

  std::vector<double> sorted = stats.per_run;
  std::sort(sorted.begin(), sorted.end());
  stats.min = sorted.front();
  stats.q25 = quantile_type7(sorted, 0.25);
  stats.median = quantile_type7(sorted, 0.50);
  stats.q75 = quantile_type7(sorted, 0.75);
  stats.max = sorted.back();
  return stats;
}

}  // namespace branchz

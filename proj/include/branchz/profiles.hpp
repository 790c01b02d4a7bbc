#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "branchz/core.hpp"
#include "branchz/simulator.hpp"

namespace branchz {

/// Named household power series sharing one clock.
struct ProfileSet {
  double dt_s = 60.0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> series;  // watts, one per name, length T

  size_t steps() const { return series.empty() ? 0 : series.front().size(); }
  size_t count() const { return series.size(); }
  void validate() const;
};

/// Reads a profile CSV: header row of profile names, one row per time step,
/// watt values, '.' decimals, no index column. Ragged rows, negative or
/// non-numeric cells are rejected with their location.
ProfileSet load_profiles_csv(const std::string& path, double dt_s);

/// Synthetic household demand: per profile a standby floor with cycling
/// noise, a diurnally shaped always-on base, plus appliance events whose
/// start minutes follow the same day shape. Deterministic for a fixed seed;
/// all values in [0, ~peak_w] scale.
/// The exact distribution is documented in the README.
ProfileSet generate_synthetic(size_t n_profiles, size_t t_steps, uint64_t seed,
                              double peak_w, double dt_s = 60.0);

/// Draws K-1 intermediate profiles plus one tail profile uniformly with
/// replacement. Values are watts; callers convert for DC scenarios.
LoadAssignment assign_loads(const ProfileSet& set, size_t k_segments,
                            uint64_t rng_seed);

/// Interval-averaged series plus the count of trailing samples that did not
/// fill a whole window and were dropped.
struct Downsampled {
  MeasurementSeries series;
  size_t dropped_samples = 0;
};

/// Meter-style downsampling: each output sample is the arithmetic mean of
/// `factor` consecutive input samples per channel; dt_s scales by factor.
/// A window containing any failed input sample is marked failed.
Downsampled downsample(const MeasurementSeries& series, size_t factor);

/// Interval-averages a load assignment (used by the loads-then-resimulate
/// downsampling variant). Trailing remainder dropped.
LoadAssignment downsample_loads(const LoadAssignment& loads, size_t factor);

}  // namespace branchz

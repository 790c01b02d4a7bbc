#pragma once

#include <optional>
#include <span>
#include <vector>

#include "branchz/core.hpp"

namespace branchz {

/// Tightest per-step bracket over a sample set. min_ub is absent when no
/// sample carries an upper bound.
struct TightestBounds {
  double max_lb = 0.0;
  std::optional<double> min_ub;
  size_t n_lb = 0;  // valid samples contributing a lower bound
  size_t n_ub = 0;  // valid samples contributing an upper bound
};

/// Turns boundary magnitudes into per-step drop, participation factor and
/// impedance bounds, applying the assumption filters:
///   dv = v_in - v_out, f = i_out/i_in, z_lb = dv/i_in, z_ub = dv/i_out.
/// A sample is invalid (with reason) when the simulation step failed, when
/// i_in <= i_floor, when i_out > i_in or when dv < 0. A valid sample with
/// i_out <= i_floor keeps z_lb and f but carries no upper bound. Invalidity
/// is data, not failure.
std::vector<DerivedSample> derive_samples(const MeasurementSeries& series,
                                          double i_floor = 1e-6);

/// Highest lower bound and lowest upper bound over the valid samples.
/// Throws EvidenceError when no valid sample exists.
TightestBounds tightest_bounds(std::span<const DerivedSample> samples);

}  // namespace branchz

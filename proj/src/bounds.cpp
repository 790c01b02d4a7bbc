#include "branchz/bounds.hpp"

#include <algorithm>

namespace branchz {

std::vector<DerivedSample> derive_samples(const MeasurementSeries& series,
                                          double i_floor) {
  if (!(i_floor >= 0.0)) throw ValidationError("i_floor must be >= 0");

  std::vector<DerivedSample> out;
  out.reserve(series.size());
  for (const MeasurementSample& m : series.samples) {
    DerivedSample d;
    d.t = m.t;
    if (!m.ok) {
      d.reason = m.fault;
      out.push_back(d);
      continue;
    }
    d.dv = m.v_in - m.v_out;
    if (m.i_in <= i_floor) {
      d.reason = SampleFault::low_input_current;
      out.push_back(d);
      continue;
    }
    if (m.i_out > m.i_in) {
      d.reason = SampleFault::reversed_current;
      out.push_back(d);
      continue;
    }
    if (d.dv < 0.0) {
      d.reason = SampleFault::negative_drop;
      out.push_back(d);
      continue;
    }
    d.valid = true;
    d.f = m.i_out / m.i_in;
    d.z_lb = d.dv / m.i_in;
    if (m.i_out > i_floor) d.z_ub = d.dv / m.i_out;
    out.push_back(d);
  }
  return out;
}

TightestBounds tightest_bounds(std::span<const DerivedSample> samples) {
  TightestBounds tb;
  for (const DerivedSample& d : samples) {
    if (!d.valid) continue;
    if (tb.n_lb == 0 || d.z_lb > tb.max_lb) tb.max_lb = d.z_lb;
    ++tb.n_lb;
    if (d.z_ub) {
      if (!tb.min_ub || *d.z_ub < *tb.min_ub) tb.min_ub = *d.z_ub;
      ++tb.n_ub;
    }
  }
  if (tb.n_lb == 0) {
    throw EvidenceError("no valid samples: every time step was rejected");
  }
  return tb;
}

}  // namespace branchz

#include "branchz/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace branchz {

namespace {

constexpr double kSpanEps = 1e-12;  // relative f-range below which the design is singular

struct UsedSamples {
  std::vector<FitPoint> points;
  std::vector<double> weights;
};

EstimationResult mean_fallback(Method method,
                               std::span<const DerivedSample> samples) {
  EstimationResult r = estimate_mean_lb_ub(samples);
  r.method = method;
  r.fallback = true;
  return r;
}

EstimationResult finish_regression(Method method, WeightMode mode,
                                   const UsedSamples& used,
                                   std::span<const DerivedSample> samples) {
  const TightestBounds tb = tightest_bounds(samples);
  RegressionFit fit;
  try {
    fit = wls_fit(used.points, used.weights);
  } catch (const SingularDesignError&) {
    return mean_fallback(method, samples);
  }
  fit.weight_mode = mode;

  EstimationResult r;
  r.method = method;
  r.fit = fit;
  r.max_lb = tb.max_lb;
  r.min_ub = tb.min_ub;
  // Evaluate the regression line at f = 1, then project into the proven
  // bracket: a value outside [max_lb, min_ub] is certainly improvable. When
  // a true f = 1 sample exists the bracket collapses and the result is exact.
  r.raw_z_hat = fit.beta0 * 1.0 + fit.beta1;
  double z = std::max(r.raw_z_hat, tb.max_lb);
  if (tb.min_ub && *tb.min_ub >= tb.max_lb) z = std::min(z, *tb.min_ub);
  r.z_hat = z;
  r.clamped = r.z_hat != r.raw_z_hat;
  return r;
}

}  // namespace

RegressionFit wls_fit(std::span<const FitPoint> points,
                      std::span<const double> weights) {
  if (points.size() != weights.size()) {
    throw ValidationError("wls_fit: points and weights lengths differ");
  }
  if (points.size() < 2) {
    throw SingularDesignError("wls_fit: need at least two points");
  }
  double f_min = points[0].f, f_max = points[0].f;
  for (const FitPoint& p : points) {
    f_min = std::min(f_min, p.f);
    f_max = std::max(f_max, p.f);
  }
  if (f_max - f_min <= kSpanEps * std::max(1.0, std::abs(f_max))) {
    throw SingularDesignError("wls_fit: all f values identical, slope undefined");
  }

  double w_sum = 0.0, f_mean = 0.0, z_mean = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    if (!(weights[i] > 0.0)) {
      throw ValidationError("wls_fit: weights must be > 0");
    }
    w_sum += weights[i];
    f_mean += weights[i] * points[i].f;
    z_mean += weights[i] * points[i].z_lb;
  }
  f_mean /= w_sum;
  z_mean /= w_sum;

  double s_ff = 0.0, s_fz = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    double df = points[i].f - f_mean;
    s_ff += weights[i] * df * df;
    s_fz += weights[i] * df * (points[i].z_lb - z_mean);
  }
  if (!(s_ff > 0.0)) {
    throw SingularDesignError("wls_fit: zero weighted variance in f");
  }

  RegressionFit fit;
  fit.beta0 = s_fz / s_ff;
  fit.beta1 = z_mean - fit.beta0 * f_mean;
  fit.n_used = points.size();
  return fit;
}

EstimationResult estimate_lin(std::span<const DerivedSample> samples) {
  UsedSamples used;
  for (const DerivedSample& d : samples) {
    if (!d.valid) continue;
    used.points.push_back({d.f, d.z_lb});
    used.weights.push_back(1.0);
  }
  if (used.points.empty()) {
    throw EvidenceError("no valid samples: every time step was rejected");
  }
  return finish_regression(Method::lin, WeightMode::none, used, samples);
}

EstimationResult estimate_lin_w(std::span<const DerivedSample> samples,
                                int power) {
  if (power != 1 && power != 2) {
    throw ValidationError("estimate_lin_w: power must be 1 or 2");
  }
  UsedSamples used;
  size_t n_valid = 0;
  for (const DerivedSample& d : samples) {
    if (!d.valid) continue;
    ++n_valid;
    if (d.f <= 0.0) continue;  // zero weight, excluded
    used.points.push_back({d.f, d.z_lb});
    used.weights.push_back(power == 1 ? d.f : d.f * d.f);
  }
  if (n_valid == 0) {
    throw EvidenceError("no valid samples: every time step was rejected");
  }
  if (used.points.empty()) {
    throw EvidenceError("all regression weights are zero (every valid sample has f = 0)");
  }
  return finish_regression(power == 1 ? Method::lin_w : Method::lin_w2,
                           power == 1 ? WeightMode::f : WeightMode::f2, used,
                           samples);
}

EstimationResult estimate_mean_lb_ub(std::span<const DerivedSample> samples) {
  const TightestBounds tb = tightest_bounds(samples);
  if (!tb.min_ub) {
    throw EvidenceError("no sample carries an upper bound (i_out never above floor)");
  }
  EstimationResult r;
  r.method = Method::mean_lb_ub;
  r.max_lb = tb.max_lb;
  r.min_ub = tb.min_ub;
  r.z_hat = tb.max_lb + (*tb.min_ub - tb.max_lb) / 2.0;
  r.raw_z_hat = r.z_hat;
  return r;
}

EstimationResult estimate(Method method, std::span<const DerivedSample> samples) {
  switch (method) {
    case Method::lin: return estimate_lin(samples);
    case Method::lin_w: return estimate_lin_w(samples, 1);
    case Method::lin_w2: return estimate_lin_w(samples, 2);
    case Method::mean_lb_ub: return estimate_mean_lb_ub(samples);
    case Method::k2_exact:
      throw ValidationError("k2_exact works on the raw measurement series; use estimate_k2_exact");
  }
  throw ValidationError("unknown method");
}

K2Result estimate_k2_exact(const MeasurementSeries& series, double i_floor) {
  // Normal equations of dv = z1*i_in + z2*i_out over the usable steps.
  double saa = 0.0, sab = 0.0, sbb = 0.0, sad = 0.0, sbd = 0.0;
  size_t n_used = 0;
  for (const MeasurementSample& m : series.samples) {
    if (!m.ok || m.i_in <= i_floor || m.i_out > m.i_in) continue;
    double dv = m.v_in - m.v_out;
    if (dv < 0.0) continue;
    saa += m.i_in * m.i_in;
    sab += m.i_in * m.i_out;
    sbb += m.i_out * m.i_out;
    sad += m.i_in * dv;
    sbd += m.i_out * dv;
    ++n_used;
  }
  if (n_used < 2) {
    throw EvidenceError("k2_exact: fewer than two usable time steps");
  }
  double det = saa * sbb - sab * sab;
  if (!(det > 1e-12 * saa * sbb)) {
    throw SingularDesignError(
        "k2_exact: (i_in, i_out) rows are proportional, segments not separable");
  }
  K2Result r;
  r.z1 = (sbb * sad - sab * sbd) / det;
  r.z2 = (saa * sbd - sab * sad) / det;
  r.n_used = n_used;
  return r;
}

}  // namespace branchz

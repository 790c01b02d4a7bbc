#pragma once

#include <span>
#include <vector>

#include "branchz/bounds.hpp"
#include "branchz/core.hpp"

namespace branchz {

/// One (f, z_lb) observation for the line fit.
struct FitPoint {
  double f = 0.0;
  double z_lb = 0.0;
};

/// Closed-form weighted least squares for z_lb ~ beta0 * f + beta1 via the
/// 2x2 weighted normal equations. Unit weights reduce to ordinary least
/// squares; scaling all weights by a positive constant leaves the fit
/// unchanged. Throws SingularDesignError when the used f values do not span
/// a range (all identical), ValidationError on length mismatch or
/// non-positive weights.
RegressionFit wls_fit(std::span<const FitPoint> points,
                      std::span<const double> weights);

/// Unweighted regression of z_lb on f evaluated at f = 1, projected into
/// the proven bracket [max_lb, min_ub]. Falls back to mean_lb_ub (flagged)
/// on a singular design.
EstimationResult estimate_lin(std::span<const DerivedSample> samples);

/// Weighted variant with w = f^power (power 1 or 2). Samples at f = 0 carry
/// zero weight and are excluded; the same bracket projection applies.
EstimationResult estimate_lin_w(std::span<const DerivedSample> samples,
                                int power);

/// Midpoint of the tightest bracket: max_lb + (min_ub - max_lb) / 2.
EstimationResult estimate_mean_lb_ub(std::span<const DerivedSample> samples);

/// Dispatch for the sample-based methods (not k2_exact).
EstimationResult estimate(Method method, std::span<const DerivedSample> samples);

/// Exact two-segment identification: with K = 2 the intermediate draw is
/// i_in - i_out by Kirchhoff, so dv = z1*i_in + z2*i_out is solvable for
/// (z1, z2) by least squares over the usable steps.
struct K2Result {
  double z1 = 0.0;
  double z2 = 0.0;
  size_t n_used = 0;
  double total() const { return z1 + z2; }
};

/// Throws SingularDesignError when all (i_in, i_out) rows are proportional,
/// EvidenceError when fewer than two usable steps exist.
K2Result estimate_k2_exact(const MeasurementSeries& series,
                           double i_floor = 1e-6);

}  // namespace branchz

#pragma once

// Independent recomputations used only by the test suite. Each oracle solves
// the same problem as the library through a different route (dense linear
// algebra, closed forms, Newton iteration) so agreement is evidence, not
// tautology.

#include <complex>
#include <span>
#include <vector>

#include "branchz/core.hpp"
#include "branchz/estimators.hpp"

namespace oracle {

/// Weighted least squares via SVD pseudo-inverse of the sqrt(w)-scaled
/// design matrix [f 1].
branchz::RegressionFit wls_pinv(std::span<const branchz::FitPoint> points,
                                std::span<const double> weights);

/// DC ladder solved by dense nodal analysis (conductance matrix, LU).
/// Returns K+1 node voltages, index 0 = source.
std::vector<double> dc_node_voltages(const branchz::BranchSpec& branch,
                                     double source_v,
                                     std::span<const double> loads_a,
                                     double tail_a);

/// Exact |v_out| of a single-segment constant-power load from the two-bus
/// quadratic; Q = p_w * tan_phi.
double two_bus_vout(std::complex<double> z, double source_v, double p_w,
                    double tan_phi);

/// Full Newton-Raphson nodal solve of the AC chain with numeric Jacobian.
/// Returns K+1 node voltages, index 0 = source. Throws on non-convergence.
std::vector<std::complex<double>> ac_newton(const branchz::BranchSpec& branch,
                                            double source_v,
                                            std::span<const double> loads_w,
                                            double tail_w, double tan_phi);

}  // namespace oracle

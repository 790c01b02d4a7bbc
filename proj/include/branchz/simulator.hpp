#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "branchz/core.hpp"

namespace branchz {

/// Load series assigned to the K-1 intermediate nodes plus the tail load at
/// the out-node. Values are amperes (DC current sinks) or watts (AC constant
/// power), all >= 0. The tail load sits beyond the measurement point and is
/// what drives i_out; without it i_out = 0 and f = 0 at every step.
struct LoadAssignment {
  std::vector<std::vector<double>> intermediate;  // K-1 series of length T
  std::vector<double> tail;                       // length T
  std::vector<std::string> intermediate_names;
  std::string tail_name;

  size_t steps() const { return tail.size(); }
  void validate(size_t segment_count) const;
};

/// Full circuit state of one solved time step.
struct SweepSolution {
  std::vector<std::complex<double>> node_voltages;    // K+1, index 0 = source
  std::vector<std::complex<double>> segment_currents; // K
  int iterations = 0;
  bool converged = false;
};

/// Backward/forward sweep controls. tan_phi fixes the constant-power load
/// angle (Q = P * tan_phi); 0 means unity power factor.
struct AcOptions {
  double tol_v = 1e-8;
  int max_iter = 100;
  double collapse_floor_frac = 0.5;  // |v| below this fraction of the source aborts
  double tan_phi = 0.0;
};

/// Sweep diverged; carries the last iterate for inspection.
class ConvergenceError : public SimulationError {
 public:
  ConvergenceError(const std::string& what, SweepSolution last)
      : SimulationError(what), last_iterate(std::move(last)) {}
  SweepSolution last_iterate;
};

/// A node voltage fell below the collapse floor; the scenario is infeasible.
class InfeasibleError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Exact single-pass solve of the resistive chain: currents accumulate from
/// the tail backward, voltages drop from the source forward.
SweepSolution solve_dc_step(const BranchSpec& branch, double source_v,
                            std::span<const double> loads_a, double tail_a);

/// Backward/forward sweep for constant-power loads. Iterates until the
/// largest node-voltage change is below opts.tol_v.
SweepSolution solve_ac_step(const BranchSpec& branch,
                            std::complex<double> source_v,
                            std::span<const double> loads_w, double tail_w,
                            const AcOptions& opts = {});

/// Solves every step of the assignment and exports boundary magnitudes.
/// Steps that do not converge (or collapse) become invalid samples with the
/// fault recorded; they are never dropped silently.
MeasurementSeries run_series(const BranchSpec& branch, double source_v,
                             const LoadAssignment& loads, double dt_s,
                             const AcOptions& opts = {});

}  // namespace branchz

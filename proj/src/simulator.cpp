#include "branchz/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace branchz {

namespace {

void check_loads_nonnegative(std::span<const double> loads, double tail) {
  for (size_t j = 0; j < loads.size(); ++j) {
    if (!(loads[j] >= 0.0)) {
      throw ValidationError("assumption 1 violated: load at node " +
                            std::to_string(j + 1) + " is negative (" +
                            std::to_string(loads[j]) + ")");
    }
  }
  if (!(tail >= 0.0)) {
    throw ValidationError("assumption 1 violated: tail load is negative (" +
                          std::to_string(tail) + ")");
  }
}

}  // namespace

void LoadAssignment::validate(size_t segment_count) const {
  if (intermediate.size() + 1 != segment_count) {
    throw ValidationError("load assignment has " +
                          std::to_string(intermediate.size()) +
                          " intermediate series, branch with K=" +
                          std::to_string(segment_count) + " needs K-1");
  }
  size_t t = tail.size();
  for (const auto& series : intermediate) {
    if (series.size() != t) {
      throw ValidationError("load series lengths differ");
    }
  }
}

SweepSolution solve_dc_step(const BranchSpec& branch, double source_v,
                            std::span<const double> loads_a, double tail_a) {
  if (branch.mode != CircuitMode::Dc) {
    throw ValidationError("solve_dc_step needs a DC-mode branch");
  }
  const size_t k_count = branch.segment_count();
  if (loads_a.size() + 1 != k_count) {
    throw ValidationError("expected K-1 intermediate loads");
  }
  check_loads_nonnegative(loads_a, tail_a);

  SweepSolution sol;
  sol.segment_currents.assign(k_count, {0.0, 0.0});
  sol.node_voltages.assign(k_count + 1, {0.0, 0.0});

  // Kirchhoff backward: segment k carries the tail plus everything drawn
  // downstream of node k.
  sol.segment_currents[k_count - 1] = tail_a;
  for (size_t k = k_count - 1; k-- > 0;) {
    sol.segment_currents[k] = sol.segment_currents[k + 1] + loads_a[k];
  }
  sol.node_voltages[0] = source_v;
  for (size_t k = 0; k < k_count; ++k) {
    sol.node_voltages[k + 1] =
        sol.node_voltages[k] - branch.segments[k].z * sol.segment_currents[k];
  }
  sol.iterations = 1;
  sol.converged = true;
  return sol;
}

SweepSolution solve_ac_step(const BranchSpec& branch,
                            std::complex<double> source_v,
                            std::span<const double> loads_w, double tail_w,
                            const AcOptions& opts) {
  if (branch.mode != CircuitMode::AcMagnitude) {
    throw ValidationError("solve_ac_step needs an AC-mode branch");
  }
  const size_t k_count = branch.segment_count();
  if (loads_w.size() + 1 != k_count) {
    throw ValidationError("expected K-1 intermediate loads");
  }
  if (!(opts.tol_v > 0.0)) throw ValidationError("sweep tolerance must be > 0");
  check_loads_nonnegative(loads_w, tail_w);

  const double v_floor = opts.collapse_floor_frac * std::abs(source_v);
  const std::complex<double> q_factor{1.0, opts.tan_phi};  // S = P * (1 + j tan)

  SweepSolution sol;
  sol.node_voltages.assign(k_count + 1, source_v);
  sol.segment_currents.assign(k_count, {0.0, 0.0});

  std::vector<std::complex<double>> next_v(k_count + 1, source_v);
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    // backward: accumulate conj(S/v) load currents with the latest voltages
    std::complex<double> tail_s = tail_w * q_factor;
    sol.segment_currents[k_count - 1] =
        tail_w == 0.0 ? std::complex<double>{0.0, 0.0}
                      : std::conj(tail_s / sol.node_voltages[k_count]);
    for (size_t k = k_count - 1; k-- > 0;) {
      std::complex<double> s = loads_w[k] * q_factor;
      std::complex<double> draw =
          loads_w[k] == 0.0 ? std::complex<double>{0.0, 0.0}
                            : std::conj(s / sol.node_voltages[k + 1]);
      sol.segment_currents[k] = sol.segment_currents[k + 1] + draw;
    }
    // forward: propagate drops from the source
    next_v[0] = source_v;
    for (size_t k = 0; k < k_count; ++k) {
      next_v[k + 1] = next_v[k] - branch.segments[k].z * sol.segment_currents[k];
    }
    double delta = 0.0;
    for (size_t n = 0; n <= k_count; ++n) {
      delta = std::max(delta, std::abs(next_v[n] - sol.node_voltages[n]));
      sol.node_voltages[n] = next_v[n];
    }
    sol.iterations = iter;
    for (size_t n = 0; n <= k_count; ++n) {
      if (std::abs(sol.node_voltages[n]) < v_floor) {
        throw InfeasibleError("voltage collapse at node " + std::to_string(n) +
                              ": |v| = " +
                              std::to_string(std::abs(sol.node_voltages[n])) +
                              " V below floor " + std::to_string(v_floor) +
                              " V");
      }
    }
    if (delta < opts.tol_v) {
      sol.converged = true;
      return sol;
    }
  }
  throw ConvergenceError("backward/forward sweep did not converge within " +
                             std::to_string(opts.max_iter) + " iterations",
                         sol);
}

MeasurementSeries run_series(const BranchSpec& branch, double source_v,
                             const LoadAssignment& loads, double dt_s,
                             const AcOptions& opts) {
  loads.validate(branch.segment_count());
  if (!(dt_s > 0.0)) throw ValidationError("dt_s must be > 0");

  const size_t k_count = branch.segment_count();
  const size_t t_count = loads.steps();
  std::vector<double> step_loads(k_count - 1);

  MeasurementSeries series;
  series.dt_s = dt_s;
  series.samples.reserve(t_count);

  for (size_t t = 0; t < t_count; ++t) {
    for (size_t j = 0; j + 1 < k_count; ++j) step_loads[j] = loads.intermediate[j][t];
    double tail = loads.tail[t];

    MeasurementSample sample;
    sample.t = static_cast<int64_t>(t);
    try {
      SweepSolution sol =
          branch.mode == CircuitMode::Dc
              ? solve_dc_step(branch, source_v, step_loads, tail)
              : solve_ac_step(branch, source_v, step_loads, tail, opts);
      sample.v_in = std::abs(sol.node_voltages.front());
      sample.v_out = std::abs(sol.node_voltages.back());
      sample.i_in = std::abs(sol.segment_currents.front());
      sample.i_out = std::abs(sol.segment_currents.back());
    } catch (const ConvergenceError&) {
      sample.ok = false;
      sample.fault = SampleFault::not_converged;
    } catch (const InfeasibleError&) {
      sample.ok = false;
      sample.fault = SampleFault::voltage_collapse;
    }
    series.samples.push_back(sample);
  }
  return series;
}

}  // namespace branchz

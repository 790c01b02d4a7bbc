#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "branchz/errors.hpp"

namespace branchz {

enum class CircuitMode : uint8_t { Dc, AcMagnitude };

std::string to_string(CircuitMode mode);
CircuitMode parse_circuit_mode(const std::string& text);

/// Per-km line parameters of one cable type.
struct CableParams {
  double r_per_km = 0.0;  // ohm/km, > 0
  double x_per_km = 0.0;  // ohm/km, >= 0
  std::string label;

  std::complex<double> z_per_km() const { return {r_per_km, x_per_km}; }

  /// Impedance angle atan2(x, r) in radians.
  double angle() const { return std::atan2(x_per_km, r_per_km); }

  void validate() const;

  /// Catalogue values for the NAYY 4x150 SE cable common in German LV grids
  /// (matches the pandapower std_type table).
  static CableParams nayy_4x150_se() {
    return {0.208, 0.08, "NAYY 4x150 SE"};
  }
};

/// One series impedance element of a branch.
struct SegmentSpec {
  double length_m = 0.0;
  CableParams cable;
  std::complex<double> z;  // ohm, derived from length and cable
};

/// Chain of K segments between a measured in-node and out-node.
struct BranchSpec {
  std::vector<SegmentSpec> segments;
  CircuitMode mode = CircuitMode::Dc;

  size_t segment_count() const { return segments.size(); }

  /// Complex sum of segment impedances.
  std::complex<double> total_z() const;

  /// Scalar total impedance |sum z_k|. Under a single cable type this equals
  /// the sum of segment magnitudes, which is the estimation target.
  double total_z_mag() const { return std::abs(total_z()); }

  /// True when all segments share one impedance angle, so |sum z_k| equals
  /// sum |z_k| and the scalar total is exact. Mixed cables make the scalar
  /// reading an inequality; reports carry this flag.
  bool uniform_angle() const;
};

/// Builds a branch from segment lengths and a single cable type.
/// z_k = length_m/1000 * (r + jx). DC mode requires x_per_km == 0.
BranchSpec build_branch(const std::vector<double>& lengths_m,
                        const CableParams& cable, CircuitMode mode);

/// Why a sample or derived sample was rejected (or none).
enum class SampleFault : uint8_t {
  none = 0,
  not_converged,      // power-flow sweep hit max_iter
  voltage_collapse,   // node voltage fell below the configured floor
  low_input_current,  // i_in <= i_floor, participation factor undefined
  reversed_current,   // i_out > i_in, Assumption 2 violated
  negative_drop,      // v_out > v_in, Assumption 2 violated
};

std::string to_string(SampleFault fault);

/// Boundary magnitudes of one time step.
struct MeasurementSample {
  int64_t t = 0;       // step index
  double v_in = 0.0;   // V
  double v_out = 0.0;  // V
  double i_in = 0.0;   // A
  double i_out = 0.0;  // A
  bool ok = true;      // false when the simulation step failed
  SampleFault fault = SampleFault::none;
};

/// Uniformly sampled boundary measurement vectors.
struct MeasurementSeries {
  double dt_s = 60.0;
  std::vector<MeasurementSample> samples;

  size_t size() const { return samples.size(); }
};

/// Per-step quantities derived from one measurement sample (Assumption
/// filtering applied). z_ub is absent when i_out is at or below the floor;
/// the sample then still carries its lower bound and f.
struct DerivedSample {
  int64_t t = 0;
  double dv = 0.0;    // V
  double f = 0.0;     // i_out / i_in, in [0, 1] when valid
  double z_lb = 0.0;  // ohm
  std::optional<double> z_ub;
  bool valid = false;
  SampleFault reason = SampleFault::none;
};

enum class WeightMode : uint8_t { none, f, f2 };

std::string to_string(WeightMode mode);

/// Result of the line fit z_lb ~ beta0 * f + beta1.
struct RegressionFit {
  double beta0 = 0.0;  // slope, ohm per unit f
  double beta1 = 0.0;  // intercept, ohm
  WeightMode weight_mode = WeightMode::none;
  size_t n_used = 0;
};

enum class Method : uint8_t { lin, lin_w, lin_w2, mean_lb_ub, k2_exact };

std::string to_string(Method method);
Method parse_method(const std::string& text);

/// Scalar total-impedance estimate plus the evidence behind it.
struct EstimationResult {
  Method method = Method::lin;
  double z_hat = 0.0;  // ohm
  std::optional<RegressionFit> fit;
  double max_lb = 0.0;
  std::optional<double> min_ub;
  double raw_z_hat = 0.0;  // regression value before the bracket clamp
  bool clamped = false;    // z_hat was projected into [max_lb, min_ub]
  bool fallback = false;   // singular design, fell back to mean_lb_ub
};

}  // namespace branchz

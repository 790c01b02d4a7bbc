#include "branchz/core.hpp"

#include <cmath>

namespace branchz {

std::string to_string(CircuitMode mode) {
  return mode == CircuitMode::Dc ? "dc" : "ac";
}

CircuitMode parse_circuit_mode(const std::string& text) {
  if (text == "dc") return CircuitMode::Dc;
  if (text == "ac") return CircuitMode::AcMagnitude;
  throw ValidationError("unknown circuit mode '" + text + "' (expected dc or ac)");
}

void CableParams::validate() const {
  if (!(r_per_km > 0.0)) {
    throw ValidationError("cable r_per_km must be > 0, got " +
                          std::to_string(r_per_km));
  }
  if (!(x_per_km >= 0.0)) {
    throw ValidationError("cable x_per_km must be >= 0, got " +
                          std::to_string(x_per_km));
  }
}

std::complex<double> BranchSpec::total_z() const {
  std::complex<double> sum{0.0, 0.0};
  for (const auto& seg : segments) sum += seg.z;
  return sum;
}

bool BranchSpec::uniform_angle() const {
  for (const auto& seg : segments) {
    // cross product of (r, x) pairs; zero means parallel impedance vectors
    const auto& a = segments.front().z;
    double cross = a.real() * seg.z.imag() - a.imag() * seg.z.real();
    if (std::abs(cross) > 1e-12 * std::abs(a) * std::abs(seg.z)) return false;
  }
  return true;
}

BranchSpec build_branch(const std::vector<double>& lengths_m,
                        const CableParams& cable, CircuitMode mode) {
  cable.validate();
  if (lengths_m.empty()) {
    throw ValidationError("branch needs at least one segment length");
  }
  if (mode == CircuitMode::Dc && cable.x_per_km != 0.0) {
    throw ValidationError(
        "DC mode requires a purely resistive cable (x_per_km == 0)");
  }
  BranchSpec branch;
  branch.mode = mode;
  branch.segments.reserve(lengths_m.size());
  for (size_t k = 0; k < lengths_m.size(); ++k) {
    double len = lengths_m[k];
    if (!(len > 0.0)) {
      throw ValidationError("segment " + std::to_string(k + 1) +
                            " length must be > 0, got " + std::to_string(len));
    }
    SegmentSpec seg;
    seg.length_m = len;
    seg.cable = cable;
    seg.z = (len / 1000.0) * cable.z_per_km();
    branch.segments.push_back(std::move(seg));
  }
  return branch;
}

std::string to_string(SampleFault fault) {
  switch (fault) {
    case SampleFault::none: return "none";
    case SampleFault::not_converged: return "not_converged";
    case SampleFault::voltage_collapse: return "voltage_collapse";
    case SampleFault::low_input_current: return "low_input_current";
    case SampleFault::reversed_current: return "reversed_current";
    case SampleFault::negative_drop: return "negative_drop";
  }
  return "unknown";
}

std::string to_string(WeightMode mode) {
  switch (mode) {
    case WeightMode::none: return "none";
    case WeightMode::f: return "f";
    case WeightMode::f2: return "f2";
  }
  return "unknown";
}

std::string to_string(Method method) {
  switch (method) {
    case Method::lin: return "lin";
    case Method::lin_w: return "lin_w";
    case Method::lin_w2: return "lin_w2";
    case Method::mean_lb_ub: return "mean_lb_ub";
    case Method::k2_exact: return "k2_exact";
  }
  return "unknown";
}

Method parse_method(const std::string& text) {
  if (text == "lin") return Method::lin;
  if (text == "lin_w") return Method::lin_w;
  if (text == "lin_w2") return Method::lin_w2;
  if (text == "mean_lb_ub") return Method::mean_lb_ub;
  if (text == "k2_exact") return Method::k2_exact;
  throw ValidationError("unknown method '" + text +
                        "' (expected lin, lin_w, lin_w2, mean_lb_ub or k2_exact)");
}

}  // namespace branchz

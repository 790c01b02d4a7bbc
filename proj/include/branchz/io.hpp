#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "branchz/core.hpp"
#include "branchz/montecarlo.hpp"

namespace branchz {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

/// Writes "t,v_in,v_out,i_in,i_out" rows for every valid sample. Invalid
/// samples (simulation faults) are omitted, leaving gaps in t; returns how
/// many were skipped.
size_t write_measurements_csv(const std::string& path,
                              const MeasurementSeries& series);

/// Reads a measurement CSV. t is a step index and must be strictly
/// increasing; gaps (from skipped invalid samples) are allowed.
MeasurementSeries read_measurements_csv(const std::string& path);

struct TruthSegment {
  double length_m = 0.0;
  double r_ohm = 0.0;
  double x_ohm = 0.0;
};

struct TruthSidecar {
  double z_true_ohm = 0.0;
  std::vector<TruthSegment> segments;
  uint64_t seed = 0;
  CircuitMode mode = CircuitMode::Dc;
};

TruthSidecar make_truth_sidecar(const BranchSpec& branch, uint64_t seed);
void write_truth_json(const std::string& path, const TruthSidecar& truth);
TruthSidecar read_truth_json(const std::string& path);

/// Per-method results for one measurement series, as emitted by the
/// `estimate` subcommand.
struct EstimateReport {
  size_t n_samples = 0;
  size_t n_valid = 0;
  size_t n_invalid = 0;
  double max_f = 0.0;
  std::vector<MethodOutcome> methods;
};

EstimateReport estimate_series(const MeasurementSeries& series,
                               std::span<const Method> methods, double i_floor);
std::string estimate_report_json(const EstimateReport& report);
void write_estimate_json(const std::string& path, const EstimateReport& report);

void write_study_json(const std::string& path, const StudyReport& report);
std::string study_report_json(const StudyReport& report);

/// "k,method,q25,median,q75" over one study per branch depth.
void write_k_sweep_csv(const std::string& path,
                       std::span<const std::pair<size_t, StudyReport>> studies);
void write_k_sweep_maxf_csv(const std::string& path,
                            std::span<const std::pair<size_t, StudyReport>> studies);

/// "dt_s,method,mean_eps" across the downsample factors of one study.
void write_dt_sweep_csv(const std::string& path, const StudyReport& report);
void write_dt_sweep_maxf_csv(const std::string& path, const StudyReport& report);

/// "method,median,q75,max" at factor 1.
void write_method_table_csv(const std::string& path, const StudyReport& report);
void write_method_table_maxf_csv(const std::string& path, const StudyReport& report);

}  // namespace branchz

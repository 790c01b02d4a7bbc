#include "branchz/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "branchz/bounds.hpp"
#include "branchz/errors.hpp"
#include "branchz/estimators.hpp"

#include "json.hpp"

namespace branchz {
namespace {

using json = nlohmann::ordered_json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open for reading: " + path);
  return in;
}

double parse_field(const std::string& text, const std::string& path, size_t line) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("not a number: '" + text + "'", path, line);
  if (!std::isfinite(value))
    throw ParseError("non-finite value: '" + text + "'", path, line);
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  for (;;) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

json fit_to_json(const RegressionFit& fit) {
  json j;
  j["beta0"] = fit.beta0;
  j["beta1"] = fit.beta1;
  j["weight"] = to_string(fit.weight_mode);
  j["n_used"] = fit.n_used;
  return j;
}

json method_outcome_to_json(const MethodOutcome& mo, bool with_eps) {
  json j;
  j["method"] = to_string(mo.method);
  j["ok"] = mo.ok;
  if (!mo.ok) {
    j["error"] = mo.error;
    return j;
  }
  j["z_hat"] = mo.z_hat;
  if (with_eps) {
    j["eps_pct"] = mo.eps_pct;
    j["eps_truth_pct"] = mo.eps_truth_pct;
  }
  j["clamped"] = mo.clamped;
  j["fallback"] = mo.fallback;
  if (mo.fit) j["fit"] = fit_to_json(*mo.fit);
  j["max_lb"] = mo.max_lb;
  j["min_ub"] = mo.min_ub ? json(*mo.min_ub) : json(nullptr);
  return j;
}

json config_to_json(const ScenarioConfig& c) {
  json j;
  j["k"] = c.k_segments;
  j["length_min_m"] = c.length_min_m;
  j["length_max_m"] = c.length_max_m;
  j["cable"] = {{"r_per_km", c.cable.r_per_km},
                {"x_per_km", c.cable.x_per_km},
                {"label", c.cable.label}};
  j["mode"] = to_string(c.mode);
  j["t_steps"] = c.t_steps;
  j["dt_s"] = c.dt_s;
  j["source_v"] = c.source_v;
  j["seed"] = c.seed;
  j["profile_csv"] = c.profile_csv;
  j["synth_profiles"] = c.synth_profiles;
  j["synth_peak_w"] = c.synth_peak_w;
  j["load_power_factor"] =
      c.load_power_factor ? json(*c.load_power_factor) : json(nullptr);
  j["i_floor"] = c.i_floor;
  j["sweep_tol_v"] = c.sweep_tol_v;
  j["sweep_max_iter"] = c.sweep_max_iter;
  j["collapse_floor_frac"] = c.collapse_floor_frac;
  j["downsample_mode"] = to_string(c.downsample_mode);
  return j;
}

json parse_json_file(const std::string& path) {
  std::ifstream in = open_in(path);
  try {
    return json::parse(in);
  } catch (const std::exception& err) {
    throw ParseError(path + ": " + err.what());
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error("double formatting failed");
  return std::string(buf, ptr);
}

size_t write_measurements_csv(const std::string& path,
                              const MeasurementSeries& series) {
  std::ofstream out = open_out(path);
  out << "t,v_in,v_out,i_in,i_out\n";
  size_t skipped = 0;
  for (const MeasurementSample& s : series.samples) {
    if (!s.ok) {
      ++skipped;
      continue;
    }
    out << format_double(s.t) << ',' << format_double(s.v_in) << ','
        << format_double(s.v_out) << ',' << format_double(s.i_in) << ','
        << format_double(s.i_out) << '\n';
  }
  if (!out) throw ValidationError("write failed: " + path);
  return skipped;
}

MeasurementSeries read_measurements_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("empty file; expected a header row", path, 1);
  if (strip_cr(line) != "t,v_in,v_out,i_in,i_out")
    throw ParseError("expected header 't,v_in,v_out,i_in,i_out'", path, 1);

  MeasurementSeries series;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 5)
      throw ParseError(
          "expected 5 fields, got " + std::to_string(fields.size()), path, line_no);
    MeasurementSample s;
    s.t = parse_field(fields[0], path, line_no);
    s.v_in = parse_field(fields[1], path, line_no);
    s.v_out = parse_field(fields[2], path, line_no);
    s.i_in = parse_field(fields[3], path, line_no);
    s.i_out = parse_field(fields[4], path, line_no);
    if (!series.samples.empty() && s.t <= series.samples.back().t)
      throw ParseError("t must be strictly increasing", path, line_no);
    series.samples.push_back(s);
  }
  return series;
}

TruthSidecar make_truth_sidecar(const BranchSpec& branch, uint64_t seed) {
  TruthSidecar truth;
  truth.z_true_ohm = branch.total_z_mag();
  truth.seed = seed;
  truth.mode = branch.mode;
  truth.segments.reserve(branch.segments.size());
  for (const SegmentSpec& seg : branch.segments)
    truth.segments.push_back({seg.length_m, seg.z.real(), seg.z.imag()});
  return truth;
}

void write_truth_json(const std::string& path, const TruthSidecar& truth) {
  json j;
  j["z_true_ohm"] = truth.z_true_ohm;
  j["segments"] = json::array();
  for (const TruthSegment& seg : truth.segments)
    j["segments"].push_back({{"length_m", seg.length_m},
                             {"r_ohm", seg.r_ohm},
                             {"x_ohm", seg.x_ohm}});
  j["seed"] = truth.seed;
  j["mode"] = to_string(truth.mode);
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw ValidationError("write failed: " + path);
}

TruthSidecar read_truth_json(const std::string& path) {
  const json j = parse_json_file(path);
  TruthSidecar truth;
  try {
    truth.z_true_ohm = j.at("z_true_ohm").get<double>();
    truth.seed = j.at("seed").get<uint64_t>();
    truth.mode = parse_circuit_mode(j.at("mode").get<std::string>());
    for (const json& seg : j.at("segments"))
      truth.segments.push_back({seg.at("length_m").get<double>(),
                                seg.at("r_ohm").get<double>(),
                                seg.at("x_ohm").get<double>()});
  } catch (const json::exception& err) {
    throw ParseError(path + ": " + err.what());
  }
  return truth;
}

EstimateReport estimate_series(const MeasurementSeries& series,
                               std::span<const Method> methods, double i_floor) {
  EstimateReport report;
  report.n_samples = series.size();
  const std::vector<DerivedSample> derived = derive_samples(series, i_floor);
  for (const DerivedSample& d : derived) {
    if (!d.valid) {
      ++report.n_invalid;
      continue;
    }
    ++report.n_valid;
    report.max_f = std::max(report.max_f, d.f);
  }
  for (Method method : methods) {
    MethodOutcome mo;
    mo.method = method;
    try {
      if (method == Method::k2_exact) {
        mo.z_hat = estimate_k2_exact(series, i_floor).total();
      } else {
        const EstimationResult est = estimate(method, derived);
        mo.z_hat = est.z_hat;
        mo.clamped = est.clamped;
        mo.fallback = est.fallback;
        mo.fit = est.fit;
        mo.max_lb = est.max_lb;
        mo.min_ub = est.min_ub;
      }
      mo.ok = true;
    } catch (const Error& err) {
      mo.ok = false;
      mo.error = err.what();
    }
    report.methods.push_back(std::move(mo));
  }
  return report;
}

std::string estimate_report_json(const EstimateReport& report) {
  json j;
  j["n_samples"] = report.n_samples;
  j["n_valid"] = report.n_valid;
  j["n_invalid"] = report.n_invalid;
  j["max_f"] = report.max_f;
  j["methods"] = json::array();
  for (const MethodOutcome& mo : report.methods)
    j["methods"].push_back(method_outcome_to_json(mo, /*with_eps=*/false));
  return j.dump(2) + "\n";
}

void write_estimate_json(const std::string& path, const EstimateReport& report) {
  std::ofstream out = open_out(path);
  out << estimate_report_json(report);
  if (!out) throw ValidationError("write failed: " + path);
}

std::string study_report_json(const StudyReport& report) {
  json j;
  j["config"] = config_to_json(report.config);
  j["n_s"] = report.n_s;
  json methods = json::array();
  for (Method m : report.methods) methods.push_back(to_string(m));
  j["methods"] = std::move(methods);
  j["factors"] = report.factors;
  j["failed_runs"] = report.failed_runs;

  json runs = json::array();
  for (const RunRecord& rec : report.runs) {
    json r;
    r["run_index"] = rec.run_index;
    r["run_seed"] = rec.run_seed;
    r["ok"] = rec.ok;
    if (!rec.ok) {
      r["error"] = rec.error;
      runs.push_back(std::move(r));
      continue;
    }
    r["z_true"] = rec.z_true;
    r["scalar_total_exact"] = rec.scalar_total_exact;
    json factors = json::array();
    for (const FactorOutcome& fo : rec.factors) {
      json f;
      f["factor"] = fo.factor;
      f["dt_s"] = fo.dt_s;
      f["n_valid"] = fo.n_valid;
      f["n_invalid"] = fo.n_invalid;
      f["n_no_ub"] = fo.n_no_ub;
      f["n_dropped"] = fo.n_dropped;
      f["max_f"] = fo.max_f;
      json mos = json::array();
      for (const MethodOutcome& mo : fo.methods)
        mos.push_back(method_outcome_to_json(mo, /*with_eps=*/true));
      f["methods"] = std::move(mos);
      factors.push_back(std::move(f));
    }
    r["factors"] = std::move(factors);
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);

  json aggs = json::array();
  for (const MethodAggregate& agg : report.aggregates) {
    json a;
    a["factor"] = agg.factor;
    a["method"] = to_string(agg.method);
    a["n"] = agg.n;
    a["median_eps"] = agg.median_eps;
    a["q25_eps"] = agg.q25_eps;
    a["q75_eps"] = agg.q75_eps;
    a["max_eps"] = agg.max_eps;
    a["mean_eps"] = agg.mean_eps;
    a["clamped_runs"] = agg.clamped_runs;
    a["fallback_runs"] = agg.fallback_runs;
    a["failed_runs"] = agg.failed_runs;
    aggs.push_back(std::move(a));
  }
  j["aggregates"] = std::move(aggs);
  return j.dump(2) + "\n";
}

void write_study_json(const std::string& path, const StudyReport& report) {
  std::ofstream out = open_out(path);
  out << study_report_json(report);
  if (!out) throw ValidationError("write failed: " + path);
}

void write_k_sweep_csv(const std::string& path,
                       std::span<const std::pair<size_t, StudyReport>> studies) {
  std::ofstream out = open_out(path);
  out << "k,method,q25,median,q75\n";
  for (const auto& [k, report] : studies) {
    const size_t factor = report.factors.front();
    for (Method m : report.methods) {
      const MethodAggregate& agg = report.aggregate(m, factor);
      out << k << ',' << to_string(m) << ',' << format_double(agg.q25_eps) << ','
          << format_double(agg.median_eps) << ',' << format_double(agg.q75_eps)
          << '\n';
    }
  }
  if (!out) throw ValidationError("write failed: " + path);
}

void write_k_sweep_maxf_csv(const std::string& path,
                            std::span<const std::pair<size_t, StudyReport>> studies) {
  std::ofstream out = open_out(path);
  out << "k,run_index,max_f\n";
  for (const auto& [k, report] : studies)
    for (const RunRecord& rec : report.runs)
      if (rec.ok)
        out << k << ',' << rec.run_index << ','
            << format_double(rec.factors.front().max_f) << '\n';
  if (!out) throw ValidationError("write failed: " + path);
}

void write_dt_sweep_csv(const std::string& path, const StudyReport& report) {
  std::ofstream out = open_out(path);
  out << "dt_s,method,mean_eps\n";
  for (size_t factor : report.factors) {
    const double dt = report.config.dt_s * static_cast<double>(factor);
    for (Method m : report.methods) {
      const MethodAggregate& agg = report.aggregate(m, factor);
      out << format_double(dt) << ',' << to_string(m) << ','
          << format_double(agg.mean_eps) << '\n';
    }
  }
  if (!out) throw ValidationError("write failed: " + path);
}

void write_dt_sweep_maxf_csv(const std::string& path, const StudyReport& report) {
  std::ofstream out = open_out(path);
  out << "dt_s,run_index,max_f\n";
  for (size_t fi = 0; fi < report.factors.size(); ++fi) {
    const double dt =
        report.config.dt_s * static_cast<double>(report.factors[fi]);
    for (const RunRecord& rec : report.runs)
      if (rec.ok)
        out << format_double(dt) << ',' << rec.run_index << ','
            << format_double(rec.factors[fi].max_f) << '\n';
  }
  if (!out) throw ValidationError("write failed: " + path);
}

void write_method_table_csv(const std::string& path, const StudyReport& report) {
  std::ofstream out = open_out(path);
  out << "method,median,q75,max\n";
  const size_t factor = report.factors.front();
  for (Method m : report.methods) {
    const MethodAggregate& agg = report.aggregate(m, factor);
    out << to_string(m) << ',' << format_double(agg.median_eps) << ','
        << format_double(agg.q75_eps) << ',' << format_double(agg.max_eps) << '\n';
  }
  if (!out) throw ValidationError("write failed: " + path);
}

void write_method_table_maxf_csv(const std::string& path,
                                 const StudyReport& report) {
  std::ofstream out = open_out(path);
  out << "run_index,max_f\n";
  for (const RunRecord& rec : report.runs)
    if (rec.ok)
      out << rec.run_index << ',' << format_double(rec.factors.front().max_f)
          << '\n';
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace branchz

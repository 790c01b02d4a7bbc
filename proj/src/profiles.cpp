#include "branchz/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "branchz/rng.hpp"

namespace branchz {

void ProfileSet::validate() const {
  if (names.size() != series.size()) {
    throw ValidationError("profile names and series count differ");
  }
  if (!(dt_s > 0.0)) throw ValidationError("profile dt_s must be > 0");
  size_t t = steps();
  for (size_t i = 0; i < series.size(); ++i) {
    if (series[i].size() != t) {
      throw ValidationError("profile '" + names[i] + "' length differs");
    }
    for (double w : series[i]) {
      if (!(w >= 0.0)) {
        throw ValidationError("profile '" + names[i] + "' has a negative value");
      }
    }
  }
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    size_t a = cell.find_first_not_of(" \t\r");
    size_t b = cell.find_last_not_of(" \t\r");
    cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, const std::string& path, size_t row,
                  size_t col) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw ParseError("non-numeric cell '" + cell + "' in column " +
                         std::to_string(col),
                     path, row);
  }
  return value;
}

}  // namespace

ProfileSet load_profiles_csv(const std::string& path, double dt_s) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open profile CSV: " + path);

  ProfileSet set;
  set.dt_s = dt_s;

  std::string line;
  size_t row = 0;
  if (!std::getline(in, line)) throw ParseError("empty profile CSV", path, 1);
  ++row;
  set.names = split_csv_row(line);
  if (set.names.empty() || (set.names.size() == 1 && set.names[0].empty())) {
    throw ParseError("header row has no profile names", path, row);
  }
  set.series.assign(set.names.size(), {});

  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = split_csv_row(line);
    if (cells.size() != set.names.size()) {
      throw ParseError("ragged row: expected " +
                           std::to_string(set.names.size()) + " cells, got " +
                           std::to_string(cells.size()),
                       path, row);
    }
    for (size_t c = 0; c < cells.size(); ++c) {
      double w = parse_cell(cells[c], path, row, c + 1);
      if (w < 0.0) {
        throw ParseError("negative power " + cells[c] + " in column " +
                             std::to_string(c + 1),
                         path, row);
      }
      set.series[c].push_back(w);
    }
  }
  if (set.steps() == 0) throw ParseError("profile CSV has no data rows", path, row);
  set.validate();
  return set;
}

namespace {

// Relative appliance activity per hour of day, evening peak. Scaled per
// household by a random phase shift.
constexpr double kDayShape[24] = {0.20, 0.10, 0.08, 0.08, 0.12, 0.35,
                                  0.90, 1.60, 1.30, 1.00, 0.95, 1.05,
                                  1.30, 1.10, 0.95, 0.95, 1.15, 1.55,
                                  2.00, 2.20, 1.80, 1.20, 0.70, 0.40};
constexpr double kDayShapeMax = 2.20;
constexpr double kEventsPerDay = 22.0;

double day_weight(double minute_of_day) {
  double m = std::fmod(minute_of_day, 1440.0);
  if (m < 0) m += 1440.0;
  return kDayShape[static_cast<size_t>(m / 60.0) % 24];
}

}  // namespace

ProfileSet generate_synthetic(size_t n_profiles, size_t t_steps, uint64_t seed,
                              double peak_w, double dt_s) {
  if (n_profiles < 1) throw ValidationError("need at least one profile");
  if (t_steps < 1) throw ValidationError("need at least one time step");
  if (!(peak_w >= 0.0)) throw ValidationError("peak_w must be >= 0");
  if (!(dt_s > 0.0)) throw ValidationError("dt_s must be > 0");

  ProfileSet set;
  set.dt_s = dt_s;
  set.names.reserve(n_profiles);
  set.series.reserve(n_profiles);

  const double total_minutes = static_cast<double>(t_steps) * dt_s / 60.0;
  const double days = total_minutes / 1440.0;

  for (size_t p = 0; p < n_profiles; ++p) {
    Rng rng = Rng::stream({seed, 0x53594eULL, p});  // per-profile stream
    set.names.push_back("synthetic_" + std::to_string(p));

    const double standby_w = peak_w * rng.uniform(0.012, 0.03);
    const double base_amp_w = peak_w * rng.uniform(0.03, 0.08);
    const double phase_min = rng.uniform(-90.0, 90.0);

    std::vector<double> series(t_steps);
    for (size_t t = 0; t < t_steps; ++t) {
      const double minute = static_cast<double>(t) * dt_s / 60.0;
      // standby floor with compressor-style cycling noise
      double w = standby_w * (0.85 + 0.30 * rng.uniform());
      // diurnally shaped always-on activity. This couples households: every
      // base rises through the same evening hours, which is what keeps the
      // participation factor away from 1 on deep branches.
      w += base_amp_w * (day_weight(minute + phase_min) / kDayShapeMax) *
           (0.7 + 0.6 * rng.uniform());
      series[t] = w;
    }

    double mean_events = kEventsPerDay * days;
    size_t n_events = static_cast<size_t>(
        std::max(1.0, std::round(mean_events * rng.uniform(0.6, 1.4))));
    for (size_t e = 0; e < n_events; ++e) {
      // start minute follows the day shape (rejection sampling)
      double start_min = 0.0;
      for (int attempt = 0; attempt < 50; ++attempt) {
        start_min = rng.uniform() * total_minutes;
        double w = day_weight(start_min + phase_min);
        if (rng.uniform() * kDayShapeMax <= w) break;
      }
      double duration_min =
          std::min(120.0, 1.0 - 12.0 * std::log(1.0 - rng.uniform()));
      double power = (peak_w - standby_w) * std::pow(10.0, -1.2 * rng.uniform());

      size_t start = static_cast<size_t>(start_min * 60.0 / dt_s);
      size_t span = std::max<size_t>(
          1, static_cast<size_t>(std::round(duration_min * 60.0 / dt_s)));
      for (size_t t = start; t < std::min(start + span, t_steps); ++t) {
        series[t] += power;
      }
    }
    set.series.push_back(std::move(series));
  }
  set.validate();
  return set;
}

LoadAssignment assign_loads(const ProfileSet& set, size_t k_segments,
                            uint64_t rng_seed) {
  if (set.count() == 0) throw ValidationError("profile set is empty");
  if (k_segments < 1) throw ValidationError("K must be >= 1");
  set.validate();

  Rng rng = Rng::stream({rng_seed, 0x41534eULL});
  LoadAssignment loads;
  loads.intermediate.reserve(k_segments - 1);
  for (size_t j = 0; j + 1 < k_segments; ++j) {
    size_t pick = rng.index(set.count());
    loads.intermediate.push_back(set.series[pick]);
    loads.intermediate_names.push_back(set.names[pick]);
  }
  size_t tail_pick = rng.index(set.count());
  loads.tail = set.series[tail_pick];
  loads.tail_name = set.names[tail_pick];
  return loads;
}

Downsampled downsample(const MeasurementSeries& series, size_t factor) {
  if (factor < 1) throw ValidationError("downsample factor must be >= 1");
  if (factor == 1) return {series, 0};

  Downsampled out;
  out.series.dt_s = series.dt_s * static_cast<double>(factor);
  size_t windows = series.size() / factor;
  out.dropped_samples = series.size() - windows * factor;
  out.series.samples.reserve(windows);

  for (size_t w = 0; w < windows; ++w) {
    MeasurementSample avg;
    avg.t = static_cast<int64_t>(w);
    double v_in = 0, v_out = 0, i_in = 0, i_out = 0;
    for (size_t j = 0; j < factor; ++j) {
      const MeasurementSample& s = series.samples[w * factor + j];
      v_in += s.v_in;
      v_out += s.v_out;
      i_in += s.i_in;
      i_out += s.i_out;
      if (!s.ok && avg.ok) {
        avg.ok = false;
        avg.fault = s.fault;
      }
    }
    double n = static_cast<double>(factor);
    avg.v_in = v_in / n;
    avg.v_out = v_out / n;
    avg.i_in = i_in / n;
    avg.i_out = i_out / n;
    out.series.samples.push_back(avg);
  }
  return out;
}

namespace {

std::vector<double> average_windows(const std::vector<double>& in, size_t factor) {
  size_t windows = in.size() / factor;
  std::vector<double> out(windows);
  for (size_t w = 0; w < windows; ++w) {
    double acc = 0.0;
    for (size_t j = 0; j < factor; ++j) acc += in[w * factor + j];
    out[w] = acc / static_cast<double>(factor);
  }
  return out;
}

}  // namespace

LoadAssignment downsample_loads(const LoadAssignment& loads, size_t factor) {
  if (factor < 1) throw ValidationError("downsample factor must be >= 1");
  if (factor == 1) return loads;
  LoadAssignment out;
  out.intermediate_names = loads.intermediate_names;
  out.tail_name = loads.tail_name;
  out.intermediate.reserve(loads.intermediate.size());
  for (const auto& series : loads.intermediate) {
    out.intermediate.push_back(average_windows(series, factor));
  }
  out.tail = average_windows(loads.tail, factor);
  return out;
}

}  // namespace branchz

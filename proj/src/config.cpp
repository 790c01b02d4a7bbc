#include "branchz/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "branchz/errors.hpp"

namespace branchz {
namespace {

std::string trim(const std::string& text) {
  const size_t begin = text.find_first_not_of(" \t");
  if (begin == std::string::npos) return {};
  const size_t end = text.find_last_not_of(" \t");
  return text.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& origin, size_t line) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw ParseError("invalid number: '" + text + "'", origin, line);
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

struct KeyValue {
  std::string section;
  std::string key;
  std::string value;
  size_t line = 0;
};

std::vector<KeyValue> tokenize(const std::string& text, const std::string& origin) {
  std::vector<KeyValue> pairs;
  std::stringstream stream(text);
  std::string raw;
  std::string section;
  size_t line_no = 0;
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(stream, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("unterminated section header", origin, line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "study")
        throw ParseError("unknown section [" + section + "]", origin, line_no);
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key = value", origin, line_no);
    if (section.empty())
      throw ParseError("key outside any section", origin, line_no);
    KeyValue kv;
    kv.section = section;
    kv.key = trim(line.substr(0, eq));
    kv.value = trim(line.substr(eq + 1));
    kv.line = line_no;
    if (kv.key.empty()) throw ParseError("empty key", origin, line_no);
    if (!seen.insert({kv.section, kv.key}).second)
      throw ParseError("duplicate key '" + kv.key + "'", origin, line_no);
    pairs.push_back(std::move(kv));
  }
  return pairs;
}

void apply_scenario(ScenarioConfig& s, const KeyValue& kv, const std::string& origin) {
  const std::string& v = kv.value;
  const size_t ln = kv.line;
  if (kv.key == "mode") {
    try {
      s.mode = parse_circuit_mode(v);
    } catch (const ValidationError& err) {
      throw ParseError(err.what(), origin, ln);
    }
  } else if (kv.key == "k") {
    s.k_segments = parse_number<size_t>(v, origin, ln);
  } else if (kv.key == "length_min_m") {
    s.length_min_m = parse_number<double>(v, origin, ln);
  } else if (kv.key == "length_max_m") {
    s.length_max_m = parse_number<double>(v, origin, ln);
  } else if (kv.key == "t_steps") {
    s.t_steps = parse_number<size_t>(v, origin, ln);
  } else if (kv.key == "dt_s") {
    s.dt_s = parse_number<double>(v, origin, ln);
  } else if (kv.key == "source_v") {
    s.source_v = parse_number<double>(v, origin, ln);
  } else if (kv.key == "seed") {
    s.seed = parse_number<uint64_t>(v, origin, ln);
  } else if (kv.key == "cable_r_per_km") {
    s.cable.r_per_km = parse_number<double>(v, origin, ln);
  } else if (kv.key == "cable_x_per_km") {
    s.cable.x_per_km = parse_number<double>(v, origin, ln);
  } else if (kv.key == "cable_label") {
    s.cable.label = v;
  } else if (kv.key == "profile_csv") {
    s.profile_csv = v;
  } else if (kv.key == "synth_profiles") {
    s.synth_profiles = parse_number<size_t>(v, origin, ln);
  } else if (kv.key == "synth_peak_w") {
    s.synth_peak_w = parse_number<double>(v, origin, ln);
  } else if (kv.key == "load_pf") {
    if (v == "match") {
      s.load_power_factor.reset();
    } else {
      s.load_power_factor = parse_number<double>(v, origin, ln);
    }
  } else if (kv.key == "i_floor") {
    s.i_floor = parse_number<double>(v, origin, ln);
  } else if (kv.key == "sweep_tol_v") {
    s.sweep_tol_v = parse_number<double>(v, origin, ln);
  } else if (kv.key == "sweep_max_iter") {
    s.sweep_max_iter = parse_number<int>(v, origin, ln);
  } else if (kv.key == "collapse_floor_frac") {
    s.collapse_floor_frac = parse_number<double>(v, origin, ln);
  } else if (kv.key == "downsample_mode") {
    try {
      s.downsample_mode = parse_downsample_mode(v);
    } catch (const ValidationError& err) {
      throw ParseError(err.what(), origin, ln);
    }
  } else {
    throw ParseError("unknown key '" + kv.key + "' in [scenario]", origin, ln);
  }
}

void apply_study(StudySettings& st, const KeyValue& kv, const std::string& origin) {
  const std::string& v = kv.value;
  const size_t ln = kv.line;
  if (kv.key == "n_s") {
    st.n_s = parse_number<size_t>(v, origin, ln);
  } else if (kv.key == "methods") {
    try {
      st.methods = parse_method_list(v);
    } catch (const ValidationError& err) {
      throw ParseError(err.what(), origin, ln);
    }
  } else if (kv.key == "factors") {
    try {
      st.factors = parse_size_list(v);
    } catch (const ValidationError& err) {
      throw ParseError(err.what(), origin, ln);
    }
  } else if (kv.key == "k_values") {
    try {
      st.k_values = parse_size_list(v);
    } catch (const ValidationError& err) {
      throw ParseError(err.what(), origin, ln);
    }
  } else if (kv.key == "jobs") {
    st.jobs = parse_number<unsigned>(v, origin, ln);
  } else {
    throw ParseError("unknown key '" + kv.key + "' in [study]", origin, ln);
  }
}

}  // namespace

std::vector<Method> parse_method_list(const std::string& text) {
  std::vector<Method> methods;
  for (const std::string& item : split_list(text))
    methods.push_back(parse_method(item));
  if (methods.empty()) throw ValidationError("empty method list");
  return methods;
}

std::vector<size_t> parse_size_list(const std::string& text) {
  std::vector<size_t> values;
  for (const std::string& item : split_list(text)) {
    size_t value = 0;
    const char* begin = item.data();
    const char* end = begin + item.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
      throw ValidationError("invalid integer: '" + item + "'");
    values.push_back(value);
  }
  if (values.empty()) throw ValidationError("empty integer list");
  return values;
}

FullConfig parse_config(const std::string& text, const std::string& origin) {
  FullConfig config;
  for (const KeyValue& kv : tokenize(text, origin)) {
    if (kv.section == "scenario") {
      apply_scenario(config.scenario, kv, origin);
    } else {
      apply_study(config.study, kv, origin);
    }
  }
  config.scenario.validate();
  return config;
}

FullConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path);
}

}  // namespace branchz

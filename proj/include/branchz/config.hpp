#pragma once

#include <string>
#include <vector>

#include "branchz/montecarlo.hpp"

namespace branchz {

/// Study-level knobs layered on top of the scenario definition.
struct StudySettings {
  size_t n_s = 150;
  std::vector<Method> methods = {Method::lin, Method::lin_w, Method::lin_w2,
                                 Method::mean_lb_ub};
  std::vector<size_t> factors = {1};
  std::vector<size_t> k_values = {2, 4, 6, 8, 10, 12, 14};
  unsigned jobs = 0;  // 0 = hardware concurrency
};

struct FullConfig {
  ScenarioConfig scenario;
  StudySettings study;
};

/// Parses an INI file with [scenario] and [study] sections. Every key has a
/// default, so an empty file is valid; unknown sections, unknown keys, and
/// duplicate keys are rejected with the offending line number.
FullConfig load_config(const std::string& path);
FullConfig parse_config(const std::string& text, const std::string& origin);

std::vector<Method> parse_method_list(const std::string& text);
std::vector<size_t> parse_size_list(const std::string& text);

}  // namespace branchz

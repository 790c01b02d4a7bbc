#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "branchz/config.hpp"
#include "branchz/errors.hpp"
#include "branchz/io.hpp"
#include "branchz/montecarlo.hpp"
#include "branchz/simulator.hpp"

namespace fs = std::filesystem;

namespace {

using namespace branchz;

struct CommonFlags {
  std::string config_path;
  std::string out;
  std::optional<uint64_t> seed;
  std::optional<unsigned> jobs;
  std::string methods;
  std::string factors;
};

FullConfig load_checked(const std::string& path) {
  if (!fs::exists(path)) throw ValidationError("config not found: " + path);
  return load_config(path);
}

std::string sidecar_path(const std::string& out) {
  if (out.size() >= 4 && out.ends_with(".csv"))
    return out.substr(0, out.size() - 4) + ".truth.json";
  return out + ".truth.json";
}

int cmd_simulate(const CommonFlags& flags) {
  FullConfig config = load_checked(flags.config_path);
  if (flags.seed) config.scenario.seed = *flags.seed;

  const Scenario scenario = sample_scenario(config.scenario, 0);
  const MeasurementSeries series =
      run_series(scenario.branch, config.scenario.source_v, scenario.loads,
                 config.scenario.dt_s, config.scenario.ac_options());

  const size_t skipped = write_measurements_csv(flags.out, series);
  if (skipped > 0)
    std::cerr << "skipped " << skipped << " samples with simulation faults\n";

  const std::string truth_path = sidecar_path(flags.out);
  write_truth_json(truth_path,
                   make_truth_sidecar(scenario.branch, config.scenario.seed));

  std::cout << "wrote " << (series.size() - skipped) << " samples to " << flags.out
            << "\nwrote ground truth to " << truth_path << "\n";
  return 0;
}

int cmd_estimate(const std::string& measurements_path, const std::string& methods_arg,
                 const std::string& out) {
  if (!fs::exists(measurements_path))
    throw ValidationError("measurements not found: " + measurements_path);
  const MeasurementSeries series = read_measurements_csv(measurements_path);
  const std::vector<Method> methods = parse_method_list(methods_arg);

  const EstimateReport report = estimate_series(series, methods, /*i_floor=*/1e-6);
  if (report.n_valid == 0)
    throw EvidenceError("no valid samples in " + measurements_path + " (" +
                        std::to_string(report.n_invalid) + " invalid)");
  bool any_ok = false;
  for (const MethodOutcome& mo : report.methods) any_ok = any_ok || mo.ok;
  if (!any_ok)
    throw EvidenceError("every method failed; first error: " +
                        report.methods.front().error);

  if (out.empty()) {
    std::cout << estimate_report_json(report);
  } else {
    write_estimate_json(out, report);
  }
  return 0;
}

int cmd_study(const CommonFlags& flags, const std::string& kind) {
  FullConfig config = load_checked(flags.config_path);
  if (flags.seed) config.scenario.seed = *flags.seed;
  if (flags.jobs) config.study.jobs = *flags.jobs;
  if (!flags.methods.empty()) config.study.methods = parse_method_list(flags.methods);
  if (!flags.factors.empty()) config.study.factors = parse_size_list(flags.factors);

  fs::create_directories(flags.out);
  const fs::path out_dir(flags.out);
  const StudySettings& st = config.study;

  if (kind == "k_sweep") {
    std::vector<std::pair<size_t, StudyReport>> studies;
    studies.reserve(st.k_values.size());
    const std::vector<size_t> base_factor = {1};
    for (size_t k : st.k_values) {
      ScenarioConfig sc = config.scenario;
      sc.k_segments = k;
      StudyReport report = run_study(sc, st.n_s, st.methods, base_factor, st.jobs);
      write_study_json((out_dir / ("study_k" + std::to_string(k) + ".json")).string(),
                       report);
      std::cout << "k=" << k << ": " << st.n_s << " runs, " << report.failed_runs
                << " failed\n";
      studies.emplace_back(k, std::move(report));
    }
    write_k_sweep_csv((out_dir / "k_sweep.csv").string(), studies);
    write_k_sweep_maxf_csv((out_dir / "k_sweep_maxf.csv").string(), studies);
  } else if (kind == "dt_sweep") {
    const StudyReport report =
        run_study(config.scenario, st.n_s, st.methods, st.factors, st.jobs);
    write_study_json((out_dir / "study_dt_sweep.json").string(), report);
    write_dt_sweep_csv((out_dir / "dt_sweep.csv").string(), report);
    write_dt_sweep_maxf_csv((out_dir / "dt_sweep_maxf.csv").string(), report);
    std::cout << "dt_sweep: " << st.n_s << " runs x " << st.factors.size()
              << " factors, " << report.failed_runs << " failed\n";
  } else {  // method_table
    const std::vector<size_t> base_factor = {1};
    const StudyReport report =
        run_study(config.scenario, st.n_s, st.methods, base_factor, st.jobs);
    write_study_json((out_dir / "study_method_table.json").string(), report);
    write_method_table_csv((out_dir / "method_table.csv").string(), report);
    write_method_table_maxf_csv((out_dir / "method_table_maxf.csv").string(), report);
    std::cout << "method_table: " << st.n_s << " runs, " << report.failed_runs
              << " failed\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"branch impedance estimation from boundary measurements"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string kind;
  std::string measurements_path;
  std::string estimate_methods = "lin,lin_w,lin_w2,mean_lb_ub";

  CLI::App* sim = app.add_subcommand("simulate", "simulate one scenario to CSV");
  sim->add_option("--config", flags.config_path, "scenario config file")->required();
  sim->add_option("--out", flags.out, "measurement CSV path")->required();
  sim->add_option("--seed", flags.seed, "override the scenario seed");

  CLI::App* est = app.add_subcommand("estimate", "estimate impedance from a CSV");
  est->add_option("measurements", measurements_path, "measurement CSV")->required();
  est->add_option("--methods", estimate_methods, "comma-separated method list");
  est->add_option("--out", flags.out, "report JSON path (stdout when omitted)");

  CLI::App* study = app.add_subcommand("study", "run a Monte-Carlo study");
  study->add_option("--config", flags.config_path, "study config file")->required();
  study->add_option("--kind", kind, "study kind")
      ->required()
      ->check(CLI::IsMember({"k_sweep", "dt_sweep", "method_table"}));
  study->add_option("--out", flags.out, "output directory")->required();
  study->add_option("--jobs", flags.jobs, "worker cap (0 = hardware)");
  study->add_option("--seed", flags.seed, "override the study seed");
  study->add_option("--methods", flags.methods, "comma-separated method list");
  study->add_option("--factors", flags.factors, "comma-separated downsample factors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(flags);
    if (est->parsed()) return cmd_estimate(measurements_path, estimate_methods, flags.out);
    return cmd_study(flags, kind);
  } catch (const ValidationError& err) {
    std::cerr << err.what() << '\n';
    return 1;
  } catch (const EvidenceError& err) {
    std::cerr << err.what() << '\n';
    return 3;
  } catch (const SimulationError& err) {
    std::cerr << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << err.what() << '\n';
    return 2;
  }
}

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "branchz/bounds.hpp"
#include "branchz/errors.hpp"
#include "branchz/estimators.hpp"
#include "branchz/io.hpp"
#include "branchz/montecarlo.hpp"
#include "branchz/profiles.hpp"
#include "branchz/simulator.hpp"

namespace py = pybind11;
using namespace branchz;

PYBIND11_MODULE(_branchz, m) {
  m.doc() = "branch impedance estimation from boundary measurements";

  py::register_exception<SimulationError>(m, "SimulationError",
                                          PyExc_RuntimeError);
  py::register_exception<EvidenceError>(m, "EvidenceError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& err) {
      PyErr_SetString(PyExc_ValueError, err.what());
    }
  });

  py::enum_<CircuitMode>(m, "CircuitMode")
      .value("dc", CircuitMode::Dc)
      .value("ac", CircuitMode::AcMagnitude);

  py::enum_<Method>(m, "Method")
      .value("lin", Method::lin)
      .value("lin_w", Method::lin_w)
      .value("lin_w2", Method::lin_w2)
      .value("mean_lb_ub", Method::mean_lb_ub)
      .value("k2_exact", Method::k2_exact);

  py::enum_<DownsampleMode>(m, "DownsampleMode")
      .value("measurements", DownsampleMode::measurements)
      .value("loads", DownsampleMode::loads);

  py::enum_<SampleFault>(m, "SampleFault")
      .value("none", SampleFault::none)
      .value("not_converged", SampleFault::not_converged)
      .value("voltage_collapse", SampleFault::voltage_collapse)
      .value("low_input_current", SampleFault::low_input_current)
      .value("reversed_current", SampleFault::reversed_current)
      .value("negative_drop", SampleFault::negative_drop);

  py::enum_<WeightMode>(m, "WeightMode")
      .value("none", WeightMode::none)
      .value("f", WeightMode::f)
      .value("f2", WeightMode::f2);

  py::class_<CableParams>(m, "CableParams")
      .def(py::init<double, double, std::string>(), py::arg("r_per_km"),
           py::arg("x_per_km"), py::arg("label") = "")
      .def_readwrite("r_per_km", &CableParams::r_per_km)
      .def_readwrite("x_per_km", &CableParams::x_per_km)
      .def_readwrite("label", &CableParams::label)
      .def("angle", &CableParams::angle)
      .def_static("nayy_4x150_se", &CableParams::nayy_4x150_se);

  py::class_<SegmentSpec>(m, "SegmentSpec")
      .def_readonly("length_m", &SegmentSpec::length_m)
      .def_readonly("cable", &SegmentSpec::cable)
      .def_readonly("z", &SegmentSpec::z);

  py::class_<BranchSpec>(m, "BranchSpec")
      .def_readonly("segments", &BranchSpec::segments)
      .def_readonly("mode", &BranchSpec::mode)
      .def("segment_count", &BranchSpec::segment_count)
      .def("total_z", &BranchSpec::total_z)
      .def("total_z_mag", &BranchSpec::total_z_mag)
      .def("uniform_angle", &BranchSpec::uniform_angle);

  m.def("build_branch", &build_branch, py::arg("lengths_m"), py::arg("cable"),
        py::arg("mode"));

  py::class_<LoadAssignment>(m, "LoadAssignment")
      .def(py::init<>())
      .def_readwrite("intermediate", &LoadAssignment::intermediate)
      .def_readwrite("tail", &LoadAssignment::tail)
      .def_readwrite("intermediate_names", &LoadAssignment::intermediate_names)
      .def_readwrite("tail_name", &LoadAssignment::tail_name)
      .def("steps", &LoadAssignment::steps);

  py::class_<AcOptions>(m, "AcOptions")
      .def(py::init<>())
      .def_readwrite("tol_v", &AcOptions::tol_v)
      .def_readwrite("max_iter", &AcOptions::max_iter)
      .def_readwrite("collapse_floor_frac", &AcOptions::collapse_floor_frac)
      .def_readwrite("tan_phi", &AcOptions::tan_phi);

  py::class_<MeasurementSample>(m, "MeasurementSample")
      .def(py::init<>())
      .def_readwrite("t", &MeasurementSample::t)
      .def_readwrite("v_in", &MeasurementSample::v_in)
      .def_readwrite("v_out", &MeasurementSample::v_out)
      .def_readwrite("i_in", &MeasurementSample::i_in)
      .def_readwrite("i_out", &MeasurementSample::i_out)
      .def_readwrite("ok", &MeasurementSample::ok)
      .def_readwrite("fault", &MeasurementSample::fault);

  py::class_<MeasurementSeries>(m, "MeasurementSeries")
      .def(py::init<>())
      .def_readwrite("dt_s", &MeasurementSeries::dt_s)
      .def_readwrite("samples", &MeasurementSeries::samples)
      .def("__len__", &MeasurementSeries::size);

  m.def("run_series", &run_series, py::arg("branch"), py::arg("source_v"),
        py::arg("loads"), py::arg("dt_s") = 60.0,
        py::arg("options") = AcOptions{});

  m.def(
      "solve_dc_step",
      [](const BranchSpec& branch, double source_v,
         const std::vector<double>& loads_a, double tail_a) {
        const SweepSolution sol = solve_dc_step(branch, source_v, loads_a, tail_a);
        return py::make_tuple(sol.node_voltages, sol.segment_currents);
      },
      py::arg("branch"), py::arg("source_v"), py::arg("loads_a"),
      py::arg("tail_a"));

  py::class_<DerivedSample>(m, "DerivedSample")
      .def_readonly("t", &DerivedSample::t)
      .def_readonly("dv", &DerivedSample::dv)
      .def_readonly("f", &DerivedSample::f)
      .def_readonly("z_lb", &DerivedSample::z_lb)
      .def_readonly("z_ub", &DerivedSample::z_ub)
      .def_readonly("valid", &DerivedSample::valid)
      .def_readonly("reason", &DerivedSample::reason);

  m.def("derive_samples", &derive_samples, py::arg("series"),
        py::arg("i_floor") = 1e-6);

  py::class_<TightestBounds>(m, "TightestBounds")
      .def_readonly("max_lb", &TightestBounds::max_lb)
      .def_readonly("min_ub", &TightestBounds::min_ub)
      .def_readonly("n_lb", &TightestBounds::n_lb)
      .def_readonly("n_ub", &TightestBounds::n_ub);

  m.def(
      "tightest_bounds",
      [](const std::vector<DerivedSample>& samples) {
        return tightest_bounds(samples);
      },
      py::arg("samples"));

  py::class_<FitPoint>(m, "FitPoint")
      .def(py::init<double, double>(), py::arg("f"), py::arg("z_lb"))
      .def_readwrite("f", &FitPoint::f)
      .def_readwrite("z_lb", &FitPoint::z_lb);

  py::class_<RegressionFit>(m, "RegressionFit")
      .def_readonly("beta0", &RegressionFit::beta0)
      .def_readonly("beta1", &RegressionFit::beta1)
      .def_readonly("weight_mode", &RegressionFit::weight_mode)
      .def_readonly("n_used", &RegressionFit::n_used);

  m.def(
      "wls_fit",
      [](const std::vector<FitPoint>& points, const std::vector<double>& weights) {
        return wls_fit(points, weights);
      },
      py::arg("points"), py::arg("weights"));

  py::class_<EstimationResult>(m, "EstimationResult")
      .def_readonly("method", &EstimationResult::method)
      .def_readonly("z_hat", &EstimationResult::z_hat)
      .def_readonly("fit", &EstimationResult::fit)
      .def_readonly("max_lb", &EstimationResult::max_lb)
      .def_readonly("min_ub", &EstimationResult::min_ub)
      .def_readonly("raw_z_hat", &EstimationResult::raw_z_hat)
      .def_readonly("clamped", &EstimationResult::clamped)
      .def_readonly("fallback", &EstimationResult::fallback);

  m.def(
      "estimate",
      [](Method method, const std::vector<DerivedSample>& samples) {
        return estimate(method, samples);
      },
      py::arg("method"), py::arg("samples"));

  py::class_<K2Result>(m, "K2Result")
      .def_readonly("z1", &K2Result::z1)
      .def_readonly("z2", &K2Result::z2)
      .def_readonly("n_used", &K2Result::n_used)
      .def("total", &K2Result::total);

  m.def("estimate_k2_exact", &estimate_k2_exact, py::arg("series"),
        py::arg("i_floor") = 1e-6);

  py::class_<ProfileSet>(m, "ProfileSet")
      .def(py::init<>())
      .def_readwrite("dt_s", &ProfileSet::dt_s)
      .def_readwrite("names", &ProfileSet::names)
      .def_readwrite("series", &ProfileSet::series)
      .def("steps", &ProfileSet::steps)
      .def("count", &ProfileSet::count);

  m.def("load_profiles_csv", &load_profiles_csv, py::arg("path"),
        py::arg("dt_s") = 60.0);
  m.def("generate_synthetic", &generate_synthetic, py::arg("n_profiles"),
        py::arg("t_steps"), py::arg("seed"), py::arg("peak_w"),
        py::arg("dt_s") = 60.0);
  m.def("assign_loads", &assign_loads, py::arg("profiles"), py::arg("k_segments"),
        py::arg("rng_seed"));

  py::class_<Downsampled>(m, "Downsampled")
      .def_readonly("series", &Downsampled::series)
      .def_readonly("dropped_samples", &Downsampled::dropped_samples);

  m.def("downsample", &downsample, py::arg("series"), py::arg("factor"));
  m.def("downsample_loads", &downsample_loads, py::arg("loads"), py::arg("factor"));

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("k_segments", &ScenarioConfig::k_segments)
      .def_readwrite("length_min_m", &ScenarioConfig::length_min_m)
      .def_readwrite("length_max_m", &ScenarioConfig::length_max_m)
      .def_readwrite("cable", &ScenarioConfig::cable)
      .def_readwrite("mode", &ScenarioConfig::mode)
      .def_readwrite("t_steps", &ScenarioConfig::t_steps)
      .def_readwrite("dt_s", &ScenarioConfig::dt_s)
      .def_readwrite("source_v", &ScenarioConfig::source_v)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("profile_csv", &ScenarioConfig::profile_csv)
      .def_readwrite("synth_profiles", &ScenarioConfig::synth_profiles)
      .def_readwrite("synth_peak_w", &ScenarioConfig::synth_peak_w)
      .def_readwrite("load_power_factor", &ScenarioConfig::load_power_factor)
      .def_readwrite("i_floor", &ScenarioConfig::i_floor)
      .def_readwrite("sweep_tol_v", &ScenarioConfig::sweep_tol_v)
      .def_readwrite("sweep_max_iter", &ScenarioConfig::sweep_max_iter)
      .def_readwrite("collapse_floor_frac", &ScenarioConfig::collapse_floor_frac)
      .def_readwrite("downsample_mode", &ScenarioConfig::downsample_mode)
      .def("tan_phi", &ScenarioConfig::tan_phi)
      .def("validate", &ScenarioConfig::validate);

  py::class_<Scenario>(m, "Scenario")
      .def_readonly("branch", &Scenario::branch)
      .def_readonly("loads", &Scenario::loads)
      .def_readonly("run_seed", &Scenario::run_seed)
      .def_readonly("lengths_m", &Scenario::lengths_m);

  m.def(
      "sample_scenario",
      [](const ScenarioConfig& config, size_t run_index) {
        return sample_scenario(config, run_index);
      },
      py::arg("config"), py::arg("run_index") = 0);

  m.def("epsilon", &epsilon, py::arg("z_true"), py::arg("z_hat"));
  m.def(
      "quantile_type7",
      [](const std::vector<double>& sorted, double p) {
        return quantile_type7(sorted, p);
      },
      py::arg("sorted"), py::arg("p"));

  py::class_<MethodOutcome>(m, "MethodOutcome")
      .def_readonly("method", &MethodOutcome::method)
      .def_readonly("ok", &MethodOutcome::ok)
      .def_readonly("error", &MethodOutcome::error)
      .def_readonly("z_hat", &MethodOutcome::z_hat)
      .def_readonly("eps_pct", &MethodOutcome::eps_pct)
      .def_readonly("eps_truth_pct", &MethodOutcome::eps_truth_pct)
      .def_readonly("clamped", &MethodOutcome::clamped)
      .def_readonly("fallback", &MethodOutcome::fallback)
      .def_readonly("fit", &MethodOutcome::fit)
      .def_readonly("max_lb", &MethodOutcome::max_lb)
      .def_readonly("min_ub", &MethodOutcome::min_ub);

  py::class_<FactorOutcome>(m, "FactorOutcome")
      .def_readonly("factor", &FactorOutcome::factor)
      .def_readonly("dt_s", &FactorOutcome::dt_s)
      .def_readonly("n_valid", &FactorOutcome::n_valid)
      .def_readonly("n_invalid", &FactorOutcome::n_invalid)
      .def_readonly("n_no_ub", &FactorOutcome::n_no_ub)
      .def_readonly("n_dropped", &FactorOutcome::n_dropped)
      .def_readonly("max_f", &FactorOutcome::max_f)
      .def_readonly("methods", &FactorOutcome::methods);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("run_index", &RunRecord::run_index)
      .def_readonly("run_seed", &RunRecord::run_seed)
      .def_readonly("ok", &RunRecord::ok)
      .def_readonly("error", &RunRecord::error)
      .def_readonly("z_true", &RunRecord::z_true)
      .def_readonly("scalar_total_exact", &RunRecord::scalar_total_exact)
      .def_readonly("factors", &RunRecord::factors);

  py::class_<MethodAggregate>(m, "MethodAggregate")
      .def_readonly("factor", &MethodAggregate::factor)
      .def_readonly("method", &MethodAggregate::method)
      .def_readonly("n", &MethodAggregate::n)
      .def_readonly("median_eps", &MethodAggregate::median_eps)
      .def_readonly("q25_eps", &MethodAggregate::q25_eps)
      .def_readonly("q75_eps", &MethodAggregate::q75_eps)
      .def_readonly("max_eps", &MethodAggregate::max_eps)
      .def_readonly("mean_eps", &MethodAggregate::mean_eps)
      .def_readonly("clamped_runs", &MethodAggregate::clamped_runs)
      .def_readonly("fallback_runs", &MethodAggregate::fallback_runs)
      .def_readonly("failed_runs", &MethodAggregate::failed_runs);

  py::class_<StudyReport>(m, "StudyReport")
      .def_readonly("config", &StudyReport::config)
      .def_readonly("n_s", &StudyReport::n_s)
      .def_readonly("methods", &StudyReport::methods)
      .def_readonly("factors", &StudyReport::factors)
      .def_readonly("runs", &StudyReport::runs)
      .def_readonly("aggregates", &StudyReport::aggregates)
      .def_readonly("failed_runs", &StudyReport::failed_runs)
      .def("aggregate", &StudyReport::aggregate, py::arg("method"),
           py::arg("factor") = 1, py::return_value_policy::reference_internal);

  m.def(
      "run_study",
      [](const ScenarioConfig& config, size_t n_s,
         const std::vector<Method>& methods, const std::vector<size_t>& factors,
         unsigned jobs) {
        py::gil_scoped_release release;
        return run_study(config, n_s, methods, factors, jobs);
      },
      py::arg("config"), py::arg("n_s"), py::arg("methods"),
      py::arg("factors") = std::vector<size_t>{}, py::arg("jobs") = 0);

  py::class_<MaxFStats>(m, "MaxFStats")
      .def_readonly("factor", &MaxFStats::factor)
      .def_readonly("per_run", &MaxFStats::per_run)
      .def_readonly("min", &MaxFStats::min)
      .def_readonly("q25", &MaxFStats::q25)
      .def_readonly("median", &MaxFStats::median)
      .def_readonly("q75", &MaxFStats::q75)
      .def_readonly("max", &MaxFStats::max);

  m.def("max_participation_stats", &max_participation_stats, py::arg("report"),
        py::arg("factor") = 1);

  py::class_<TruthSegment>(m, "TruthSegment")
      .def_readonly("length_m", &TruthSegment::length_m)
      .def_readonly("r_ohm", &TruthSegment::r_ohm)
      .def_readonly("x_ohm", &TruthSegment::x_ohm);

  py::class_<TruthSidecar>(m, "TruthSidecar")
      .def_readonly("z_true_ohm", &TruthSidecar::z_true_ohm)
      .def_readonly("segments", &TruthSidecar::segments)
      .def_readonly("seed", &TruthSidecar::seed)
      .def_readonly("mode", &TruthSidecar::mode);

  m.def("make_truth_sidecar", &make_truth_sidecar, py::arg("branch"),
        py::arg("seed"));
  m.def("write_truth_json", &write_truth_json, py::arg("path"), py::arg("truth"));
  m.def("read_truth_json", &read_truth_json, py::arg("path"));

  m.def("write_measurements_csv", &write_measurements_csv, py::arg("path"),
        py::arg("series"));
  m.def("read_measurements_csv", &read_measurements_csv, py::arg("path"));

  py::class_<EstimateReport>(m, "EstimateReport")
      .def_readonly("n_samples", &EstimateReport::n_samples)
      .def_readonly("n_valid", &EstimateReport::n_valid)
      .def_readonly("n_invalid", &EstimateReport::n_invalid)
      .def_readonly("max_f", &EstimateReport::max_f)
      .def_readonly("methods", &EstimateReport::methods);

  m.def(
      "estimate_series",
      [](const MeasurementSeries& series, const std::vector<Method>& methods,
         double i_floor) { return estimate_series(series, methods, i_floor); },
      py::arg("series"), py::arg("methods"), py::arg("i_floor") = 1e-6);
  m.def("estimate_report_json", &estimate_report_json, py::arg("report"));
  m.def("study_report_json", &study_report_json, py::arg("report"));
  m.def("format_double", &format_double, py::arg("value"));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "branchz/bounds.hpp"
#include "branchz/profiles.hpp"
#include "branchz/rng.hpp"
#include "branchz/simulator.hpp"

using namespace branchz;

namespace {

MeasurementSeries one_sample(double v_in, double v_out, double i_in, double i_out) {
  MeasurementSeries s;
  s.samples.push_back({0, v_in, v_out, i_in, i_out});
  return s;
}

}  // namespace

TEST_CASE("derive f=1 degenerate sample") {
  const auto d = derive_samples(one_sample(400.0, 398.0, 10.0, 10.0));
  REQUIRE(d.size() == 1);
  CHECK(d[0].valid);
  CHECK(d[0].dv == 2.0);
  CHECK(d[0].f == 1.0);
  CHECK(d[0].z_lb == 0.2);
  REQUIRE(d[0].z_ub.has_value());
  CHECK(*d[0].z_ub == 0.2);
}

TEST_CASE("derive mid-branch draw") {
  const auto d = derive_samples(one_sample(400.0, 398.0, 10.0, 5.0));
  REQUIRE(d.size() == 1);
  CHECK(d[0].valid);
  CHECK(d[0].f == 0.5);
  CHECK(d[0].z_lb == 0.2);
  CHECK(*d[0].z_ub == 0.4);
}

TEST_CASE("derive rejects assumption violations with reasons") {
  // rising voltage
  auto d = derive_samples(one_sample(400.0, 401.0, 10.0, 5.0));
  CHECK_FALSE(d[0].valid);
  CHECK(d[0].reason == SampleFault::negative_drop);

  // reversed current
  d = derive_samples(one_sample(400.0, 398.0, 5.0, 10.0));
  CHECK_FALSE(d[0].valid);
  CHECK(d[0].reason == SampleFault::reversed_current);

  // dead input
  d = derive_samples(one_sample(400.0, 400.0, 0.0, 0.0));
  CHECK_FALSE(d[0].valid);
  CHECK(d[0].reason == SampleFault::low_input_current);

  // simulation fault passes through
  MeasurementSeries s = one_sample(400.0, 398.0, 10.0, 5.0);
  s.samples[0].ok = false;
  s.samples[0].fault = SampleFault::voltage_collapse;
  d = derive_samples(s);
  CHECK_FALSE(d[0].valid);
  CHECK(d[0].reason == SampleFault::voltage_collapse);
}

TEST_CASE("derive keeps lb when i_out is at the floor") {
  const auto d = derive_samples(one_sample(400.0, 398.0, 10.0, 0.0));
  REQUIRE(d.size() == 1);
  CHECK(d[0].valid);
  CHECK(d[0].f == 0.0);
  CHECK(d[0].z_lb == 0.2);
  CHECK_FALSE(d[0].z_ub.has_value());
}

TEST_CASE("valid samples satisfy f in [0,1] and z_lb <= z_ub") {
  Rng rng(404);
  for (int trial = 0; trial < 500; ++trial) {
    const double i_in = rng.uniform(0.0, 20.0);
    const double i_out = rng.uniform(0.0, 25.0);
    const double v_out = rng.uniform(395.0, 405.0);
    const auto d = derive_samples(one_sample(400.0, v_out, i_in, i_out));
    if (!d[0].valid) continue;
    CHECK(d[0].f >= 0.0);
    CHECK(d[0].f <= 1.0);
    if (d[0].z_ub) CHECK(d[0].z_lb <= *d[0].z_ub);
  }
}

TEST_CASE("tightest_bounds picks max lb and min ub") {
  MeasurementSeries s;
  // z_lb = dv/i_in, z_ub = dv/i_out
  s.samples.push_back({0, 400.0, 399.0, 10.0, 2.0});  // lb 0.1, ub 0.5
  s.samples.push_back({1, 400.0, 398.0, 10.0, 5.0});  // lb 0.2, ub 0.4
  const auto d = derive_samples(s);
  const TightestBounds tb = tightest_bounds(d);
  CHECK(tb.max_lb == 0.2);
  REQUIRE(tb.min_ub.has_value());
  CHECK(*tb.min_ub == 0.4);
  CHECK(tb.n_lb == 2);
  CHECK(tb.n_ub == 2);
}

TEST_CASE("tightest_bounds collapses on an f=1 sample") {
  const auto d = derive_samples(one_sample(400.0, 398.0, 10.0, 10.0));
  const TightestBounds tb = tightest_bounds(d);
  CHECK(tb.max_lb == 0.2);
  CHECK(*tb.min_ub == 0.2);
}

TEST_CASE("tightest_bounds demands evidence") {
  const auto d = derive_samples(one_sample(400.0, 401.0, 10.0, 5.0));
  CHECK_THROWS_AS(tightest_bounds(d), EvidenceError);
}

TEST_CASE("dc bound soundness over seeded scenarios") {
  // z_lb <= z_true <= z_ub exactly, per valid sample, 100 runs
  const CableParams cable{0.208, 0.0, "dc"};
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng = Rng::stream({9000, seed});
    const size_t k = 2 + rng.index(2);  // short chains, K in {2, 3}
    std::vector<double> lengths;
    for (size_t i = 0; i < k; ++i) lengths.push_back(rng.uniform(100.0, 300.0));
    const BranchSpec b = build_branch(lengths, cable, CircuitMode::Dc);
    const double z_true = b.total_z_mag();

    const ProfileSet set = generate_synthetic(8, 48, seed, 4000.0);
    LoadAssignment loads = assign_loads(set, k, mix_seed({seed, 1}));
    for (auto& series : loads.intermediate)
      for (double& w : series) w /= 400.0;  // watts to amperes at the source
    for (double& w : loads.tail) w /= 400.0;

    const MeasurementSeries series = run_series(b, 400.0, loads, 60.0);
    const auto derived = derive_samples(series);
    size_t n_valid = 0;
    for (const DerivedSample& d : derived) {
      if (!d.valid) continue;
      ++n_valid;
      CHECK(d.z_lb <= z_true);
      if (d.z_ub) CHECK(z_true <= *d.z_ub);
    }
    REQUIRE(n_valid > 0);
    const TightestBounds tb = tightest_bounds(derived);
    CHECK(tb.max_lb <= z_true);
    if (tb.min_ub) {
      CHECK(z_true <= *tb.min_ub);
      CHECK(tb.max_lb <= *tb.min_ub);
    }
  }
}

TEST_CASE("ac-magnitude bound soundness within 1e-3 relative") {
  // matched load angle keeps magnitude arithmetic consistent; violations of
  // the bracket stay within a small relative tolerance and are counted
  const CableParams cable = CableParams::nayy_4x150_se();
  AcOptions opts;
  opts.tan_phi = cable.x_per_km / cable.r_per_km;
  size_t checked = 0, violations = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = Rng::stream({9100, seed});
    const size_t k = 3 + rng.index(4);
    std::vector<double> lengths;
    for (size_t i = 0; i < k; ++i) lengths.push_back(rng.uniform(100.0, 300.0));
    const BranchSpec b = build_branch(lengths, cable, CircuitMode::AcMagnitude);
    const double z_true = b.total_z_mag();

    const ProfileSet set = generate_synthetic(8, 96, seed, 4000.0);
    const LoadAssignment loads = assign_loads(set, k, mix_seed({seed, 2}));
    const MeasurementSeries series = run_series(b, 400.0, loads, 60.0, opts);
    for (const DerivedSample& d : derive_samples(series)) {
      if (!d.valid) continue;
      ++checked;
      if (d.z_lb > z_true * (1.0 + 1e-3)) ++violations;
      if (d.z_ub && *d.z_ub < z_true * (1.0 - 1e-3)) ++violations;
    }
  }
  REQUIRE(checked > 500);
  CHECK(violations == 0);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "branchz/estimators.hpp"
#include "branchz/profiles.hpp"
#include "branchz/rng.hpp"
#include "branchz/simulator.hpp"
#include "oracles.hpp"

using namespace branchz;

namespace {

DerivedSample valid_sample(double f, double z_lb) {
  DerivedSample d;
  d.f = f;
  d.z_lb = z_lb;
  d.z_ub = f > 0.0 ? std::optional<double>(z_lb / f) : std::nullopt;
  d.dv = 1.0;
  d.valid = true;
  return d;
}

}  // namespace

TEST_CASE("wls two-point exact interpolation") {
  const std::vector<FitPoint> pts = {{0.0, 1.0}, {1.0, 3.0}};
  const std::vector<double> w = {1.0, 1.0};
  const RegressionFit fit = wls_fit(pts, w);
  CHECK(fit.beta0 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(fit.beta1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fit.n_used == 2);
}

TEST_CASE("wls weight scale invariance") {
  Rng rng(17);
  std::vector<FitPoint> pts;
  std::vector<double> w1, w9;
  for (int i = 0; i < 20; ++i) {
    pts.push_back({rng.uniform(), rng.uniform(0.1, 0.5)});
    const double w = rng.uniform(0.2, 2.0);
    w1.push_back(w);
    w9.push_back(9.0 * w);
  }
  const RegressionFit a = wls_fit(pts, w1);
  const RegressionFit b = wls_fit(pts, w9);
  CHECK(a.beta0 == doctest::Approx(b.beta0).epsilon(1e-12));
  CHECK(a.beta1 == doctest::Approx(b.beta1).epsilon(1e-12));
}

TEST_CASE("wls matches the pseudo-inverse oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 3 + rng.index(20);
    std::vector<FitPoint> pts;
    std::vector<double> w;
    for (size_t i = 0; i < n; ++i) {
      pts.push_back({rng.uniform(), rng.uniform(0.0, 2.0)});
      w.push_back(rng.uniform(0.05, 3.0));
    }
    const RegressionFit mine = wls_fit(pts, w);
    const RegressionFit ref = oracle::wls_pinv(pts, w);
    CHECK(std::abs(mine.beta0 - ref.beta0) < 1e-10);
    CHECK(std::abs(mine.beta1 - ref.beta1) < 1e-10);
  }
}

TEST_CASE("wls unit weights equal ols") {
  Rng rng(29);
  std::vector<FitPoint> pts;
  for (int i = 0; i < 50; ++i) pts.push_back({rng.uniform(), rng.uniform(0.0, 1.0)});
  const std::vector<double> unit(pts.size(), 1.0);

  // direct OLS formulas
  double fm = 0.0, zm = 0.0;
  for (const FitPoint& p : pts) {
    fm += p.f;
    zm += p.z_lb;
  }
  fm /= static_cast<double>(pts.size());
  zm /= static_cast<double>(pts.size());
  double sff = 0.0, sfz = 0.0;
  for (const FitPoint& p : pts) {
    sff += (p.f - fm) * (p.f - fm);
    sfz += (p.f - fm) * (p.z_lb - zm);
  }
  const double beta0 = sfz / sff;
  const double beta1 = zm - beta0 * fm;

  const RegressionFit fit = wls_fit(pts, unit);
  CHECK(std::abs(fit.beta0 - beta0) < 1e-12);
  CHECK(std::abs(fit.beta1 - beta1) < 1e-12);
}

TEST_CASE("wls rejects bad input") {
  const std::vector<FitPoint> one = {{0.5, 1.0}};
  const std::vector<double> w1 = {1.0};
  CHECK_THROWS_AS(wls_fit(one, w1), SingularDesignError);

  const std::vector<FitPoint> flat = {{0.5, 1.0}, {0.5, 2.0}, {0.5, 3.0}};
  const std::vector<double> w3 = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(wls_fit(flat, w3), SingularDesignError);

  const std::vector<FitPoint> two = {{0.0, 1.0}, {1.0, 3.0}};
  const std::vector<double> mismatch = {1.0};
  CHECK_THROWS_AS(wls_fit(two, mismatch), ValidationError);
  const std::vector<double> zero_w = {1.0, 0.0};
  CHECK_THROWS_AS(wls_fit(two, zero_w), ValidationError);
}

TEST_CASE("estimate_lin two-point line") {
  const std::vector<DerivedSample> samples = {valid_sample(0.5, 0.2),
                                              valid_sample(1.0, 0.4)};
  const EstimationResult r = estimate_lin(samples);
  REQUIRE(r.fit.has_value());
  CHECK(r.fit->beta0 == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(r.fit->beta1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.z_hat == doctest::Approx(0.4).epsilon(1e-14));
  CHECK_FALSE(r.fallback);
}

TEST_CASE("estimate_lin singular design falls back to mean_lb_ub") {
  const std::vector<DerivedSample> samples = {valid_sample(1.0, 0.4),
                                              valid_sample(1.0, 0.4)};
  const EstimationResult r = estimate_lin(samples);
  CHECK(r.fallback);
  CHECK(r.method == Method::lin);
  CHECK(r.z_hat == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_FALSE(r.fit.has_value());
}

TEST_CASE("estimate_lin clamps into the observed bracket") {
  // three low points drag the line below max_lb: lifted
  std::vector<DerivedSample> low = {valid_sample(0.2, 0.30), valid_sample(0.4, 0.28),
                                    valid_sample(0.9, 0.05)};
  const EstimationResult lifted = estimate_lin(low);
  CHECK(lifted.clamped);
  CHECK(lifted.z_hat == lifted.max_lb);
  CHECK(lifted.raw_z_hat < lifted.max_lb);

  // concave wedge data (true total 1.0) overshoots the apex: cut at min_ub
  std::vector<DerivedSample> concave = {
      valid_sample(0.2, 0.2), valid_sample(0.3, 0.3), valid_sample(0.9, 0.95),
      valid_sample(0.95, 0.99)};
  const EstimationResult cut = estimate_lin(concave);
  REQUIRE(cut.min_ub.has_value());
  CHECK(cut.max_lb <= *cut.min_ub);
  CHECK(cut.raw_z_hat > *cut.min_ub);
  CHECK(cut.clamped);
  CHECK(cut.z_hat == *cut.min_ub);
}

TEST_CASE("weighted two-point fit matches the unweighted one") {
  const std::vector<DerivedSample> samples = {valid_sample(0.5, 0.2),
                                              valid_sample(1.0, 0.4)};
  const EstimationResult r1 = estimate_lin_w(samples, 1);
  const EstimationResult r2 = estimate_lin_w(samples, 2);
  CHECK(r1.z_hat == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(r2.z_hat == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(r1.fit->weight_mode == WeightMode::f);
  CHECK(r2.fit->weight_mode == WeightMode::f2);
}

TEST_CASE("lin_w drops f=0 samples and fails when none remain") {
  std::vector<DerivedSample> with_zero = {valid_sample(0.0, 0.1),
                                          valid_sample(0.5, 0.2),
                                          valid_sample(1.0, 0.4)};
  const EstimationResult r = estimate_lin_w(with_zero, 1);
  CHECK(r.fit->n_used == 2);

  std::vector<DerivedSample> all_zero = {valid_sample(0.0, 0.1),
                                         valid_sample(0.0, 0.2)};
  CHECK_THROWS_AS(estimate_lin_w(all_zero, 1), EvidenceError);
}

TEST_CASE("low-f samples biased low push lin_w above lin") {
  // exact wedge data plus a depressed low-f cluster
  std::vector<DerivedSample> samples;
  samples.push_back(valid_sample(0.95, 0.95));
  samples.push_back(valid_sample(0.9, 0.91));
  samples.push_back(valid_sample(0.85, 0.86));
  for (double f : {0.1, 0.15, 0.2, 0.25})
    samples.push_back(valid_sample(f, 0.3 * f));  // far below the apex ray
  const EstimationResult lin = estimate_lin(samples);
  const EstimationResult lw = estimate_lin_w(samples, 1);
  const EstimationResult lw2 = estimate_lin_w(samples, 2);
  CHECK(lw.raw_z_hat >= lin.raw_z_hat);
  CHECK(lw2.raw_z_hat >= lin.raw_z_hat);
}

TEST_CASE("mean_lb_ub midpoint and error cases") {
  std::vector<DerivedSample> samples = {valid_sample(0.5, 0.2),
                                        valid_sample(0.8, 0.24)};
  // bounds: lb max 0.24; ubs 0.4 and 0.3
  const EstimationResult r = estimate_mean_lb_ub(samples);
  CHECK(r.z_hat == doctest::Approx(0.24 + (0.3 - 0.24) / 2.0).epsilon(1e-14));

  std::vector<DerivedSample> no_ub = {valid_sample(0.0, 0.2)};
  CHECK_THROWS_AS(estimate_mean_lb_ub(no_ub), EvidenceError);

  std::vector<DerivedSample> none;
  CHECK_THROWS_AS(estimate_mean_lb_ub(none), EvidenceError);
  CHECK_THROWS_AS(estimate_lin(none), EvidenceError);
}

TEST_CASE("midpoint example from the bracket (0.2, 0.4)") {
  // one sample with lb 0.2 at f=0.5 gives ub 0.4; midpoint 0.3
  std::vector<DerivedSample> samples = {valid_sample(0.5, 0.2)};
  const EstimationResult r = estimate_mean_lb_ub(samples);
  CHECK(r.z_hat == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("estimate dispatcher routes and refuses k2") {
  std::vector<DerivedSample> samples = {valid_sample(0.5, 0.2),
                                        valid_sample(1.0, 0.4)};
  CHECK(estimate(Method::lin, samples).method == Method::lin);
  CHECK(estimate(Method::lin_w, samples).method == Method::lin_w);
  CHECK(estimate(Method::lin_w2, samples).method == Method::lin_w2);
  CHECK(estimate(Method::mean_lb_ub, samples).method == Method::mean_lb_ub);
  CHECK_THROWS_AS(estimate(Method::k2_exact, samples), ValidationError);
}

TEST_CASE("k2_exact recovers both segments from dc truth") {
  const CableParams cable{0.208, 0.0, "dc"};
  Rng rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const std::vector<double> lengths = {rng.uniform(100.0, 300.0),
                                         rng.uniform(100.0, 300.0)};
    const BranchSpec b = build_branch(lengths, cable, CircuitMode::Dc);
    LoadAssignment loads;
    loads.intermediate = {{}};
    for (int t = 0; t < 6; ++t) {
      loads.intermediate[0].push_back(rng.uniform(0.5, 20.0));
      loads.tail.push_back(rng.uniform(0.5, 20.0));
    }
    const MeasurementSeries series = run_series(b, 400.0, loads, 60.0);
    const K2Result r = estimate_k2_exact(series);
    CHECK(std::abs(r.z1 - b.segments[0].z.real()) <
          1e-9 * b.segments[0].z.real());
    CHECK(std::abs(r.z2 - b.segments[1].z.real()) <
          1e-9 * b.segments[1].z.real());
  }
}

TEST_CASE("k2_exact hand-solvable system") {
  // z1 = z2 = 0.2; two independent steps
  MeasurementSeries s;
  // step 1: i_in=10, i_out=4 -> dv = 0.2*10 + 0.2*4 = 2.8
  s.samples.push_back({0, 400.0, 397.2, 10.0, 4.0});
  // step 2: i_in=6, i_out=6 -> dv = 0.2*12 = 2.4
  s.samples.push_back({1, 400.0, 397.6, 6.0, 6.0});
  const K2Result r = estimate_k2_exact(s);
  CHECK(r.z1 == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.z2 == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(r.total() == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("k2_exact degenerate excitation errors") {
  // i_in == i_out at every step: columns proportional
  MeasurementSeries s;
  s.samples.push_back({0, 400.0, 398.0, 10.0, 10.0});
  s.samples.push_back({1, 400.0, 399.0, 5.0, 5.0});
  CHECK_THROWS_AS(estimate_k2_exact(s), SingularDesignError);

  MeasurementSeries single;
  single.samples.push_back({0, 400.0, 398.0, 10.0, 4.0});
  CHECK_THROWS_AS(estimate_k2_exact(single), EvidenceError);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "branchz/errors.hpp"
#include "branchz/profiles.hpp"
#include "branchz/rng.hpp"

using namespace branchz;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/branchz_test_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("rng streams are deterministic and independent") {
  Rng a = Rng::stream({1, 2, 3});
  Rng b = Rng::stream({1, 2, 3});
  for (int i = 0; i < 100; ++i) CHECK(a.raw() == b.raw());

  Rng c = Rng::stream({1, 2, 4});
  CHECK(Rng::stream({1, 2, 3}).raw() != c.raw());
}

TEST_CASE("rng uniform stays in range and fills it") {
  Rng r(99);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("profile csv happy path") {
  const std::string path = write_temp("profiles_ok.csv", "a,b\n0,0\n0,0\n0,0\n");
  const ProfileSet set = load_profiles_csv(path, 60.0);
  CHECK(set.count() == 2);
  CHECK(set.steps() == 3);
  CHECK(set.names[0] == "a");
  CHECK(set.names[1] == "b");
  for (const auto& series : set.series)
    for (double w : series) CHECK(w == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("profile csv rejects bad data with locations") {
  const std::string ragged = write_temp("profiles_ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(load_profiles_csv(ragged, 60.0), ParseError);

  const std::string negative = write_temp("profiles_neg.csv", "a,b\n1,-2\n");
  try {
    load_profiles_csv(negative, 60.0);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    const std::string what = err.what();
    // names the cell: row 2, column b
    CHECK(what.find(":2") != std::string::npos);
    CHECK(what.find("b") != std::string::npos);
  }

  const std::string alpha = write_temp("profiles_alpha.csv", "a\nxyz\n");
  CHECK_THROWS_AS(load_profiles_csv(alpha, 60.0), ParseError);

  const std::string empty = write_temp("profiles_empty.csv", "");
  CHECK_THROWS_AS(load_profiles_csv(empty, 60.0), ParseError);
  std::remove(ragged.c_str());
  std::remove(negative.c_str());
  std::remove(alpha.c_str());
  std::remove(empty.c_str());
}

TEST_CASE("profile csv with 1440 rows keeps T") {
  std::string content = "h1\n";
  for (int i = 0; i < 1440; ++i) content += "100\n";
  const std::string path = write_temp("profiles_1440.csv", content);
  const ProfileSet set = load_profiles_csv(path, 60.0);
  CHECK(set.steps() == 1440);
  CHECK(set.dt_s == 60.0);
  std::remove(path.c_str());
}

TEST_CASE("synthetic generation is deterministic") {
  const ProfileSet a = generate_synthetic(5, 500, 7, 4000.0);
  const ProfileSet b = generate_synthetic(5, 500, 7, 4000.0);
  REQUIRE(a.count() == b.count());
  for (size_t p = 0; p < a.count(); ++p)
    for (size_t t = 0; t < a.steps(); ++t) CHECK(a.series[p][t] == b.series[p][t]);

  const ProfileSet c = generate_synthetic(5, 500, 8, 4000.0);
  bool any_diff = false;
  for (size_t t = 0; t < a.steps(); ++t)
    any_diff = any_diff || a.series[0][t] != c.series[0][t];
  CHECK(any_diff);
}

TEST_CASE("synthetic peak_w zero gives all-zero profiles") {
  const ProfileSet set = generate_synthetic(3, 200, 1, 0.0);
  for (const auto& series : set.series)
    for (double w : series) CHECK(w == 0.0);
}

TEST_CASE("synthetic mean lies strictly inside (0, peak)") {
  // statistical check over many draws
  const double peak = 4000.0;
  size_t checked = 0;
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const ProfileSet set = generate_synthetic(25, 1440, seed, peak);
    for (const auto& series : set.series) {
      double mean = 0.0;
      for (double w : series) {
        CHECK(w >= 0.0);
        mean += w;
      }
      mean /= static_cast<double>(series.size());
      CHECK(mean > 0.0);
      CHECK(mean < peak);
      ++checked;
    }
  }
  CHECK(checked == 1000);
}

TEST_CASE("assign_loads shapes and determinism") {
  const ProfileSet set = generate_synthetic(6, 100, 3, 4000.0);

  const LoadAssignment k1 = assign_loads(set, 1, 42);
  CHECK(k1.intermediate.empty());
  CHECK(k1.tail.size() == 100);

  const LoadAssignment a = assign_loads(set, 4, 42);
  const LoadAssignment b = assign_loads(set, 4, 42);
  REQUIRE(a.intermediate.size() == 3);
  CHECK(a.tail_name == b.tail_name);
  for (size_t i = 0; i < 3; ++i)
    CHECK(a.intermediate_names[i] == b.intermediate_names[i]);
}

TEST_CASE("assign_loads draws uniformly with replacement") {
  ProfileSet set;
  set.dt_s = 60.0;
  set.names = {"p0", "p1", "p2", "p3", "p4"};
  set.series.assign(5, std::vector<double>(4, 1.0));

  // 10^4 tail draws over 5 profiles: frequency ~ 0.2 +- 0.02
  std::vector<size_t> hits(5, 0);
  const size_t draws = 10000;
  for (uint64_t s = 0; s < draws; ++s) {
    const LoadAssignment la = assign_loads(set, 1, mix_seed({77, s}));
    for (size_t p = 0; p < 5; ++p)
      if (la.tail_name == set.names[p]) ++hits[p];
  }
  for (size_t p = 0; p < 5; ++p) {
    const double freq = static_cast<double>(hits[p]) / static_cast<double>(draws);
    CHECK(freq == doctest::Approx(0.2).epsilon(0.1));  // 0.2 +- 0.02
  }
}

TEST_CASE("downsample factor 1 is the identity") {
  MeasurementSeries series;
  series.dt_s = 60.0;
  for (int t = 0; t < 5; ++t)
    series.samples.push_back({t, 400.0, 399.0, 10.0 + t, 5.0});
  const Downsampled ds = downsample(series, 1);
  CHECK(ds.dropped_samples == 0);
  REQUIRE(ds.series.size() == 5);
  CHECK(ds.series.dt_s == 60.0);
  for (size_t t = 0; t < 5; ++t) {
    CHECK(ds.series.samples[t].i_in == series.samples[t].i_in);
    CHECK(ds.series.samples[t].t == series.samples[t].t);
  }
}

TEST_CASE("downsample averages per channel") {
  MeasurementSeries series;
  series.dt_s = 60.0;
  series.samples.push_back({0, 400.0, 398.0, 10.0, 5.0});
  series.samples.push_back({1, 402.0, 396.0, 20.0, 7.0});
  const Downsampled ds = downsample(series, 2);
  REQUIRE(ds.series.size() == 1);
  CHECK(ds.series.dt_s == 120.0);
  CHECK(ds.series.samples[0].i_in == doctest::Approx(15.0).epsilon(1e-15));
  CHECK(ds.series.samples[0].i_out == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(ds.series.samples[0].v_in == doctest::Approx(401.0).epsilon(1e-15));
  CHECK(ds.series.samples[0].v_out == doctest::Approx(397.0).epsilon(1e-15));
}

TEST_CASE("downsample drops the trailing remainder and counts it") {
  MeasurementSeries series;
  series.dt_s = 60.0;
  for (int t = 0; t < 1443; ++t)
    series.samples.push_back({t, 400.0, 399.0, 10.0, 5.0});
  const Downsampled ds = downsample(series, 60);
  CHECK(ds.series.size() == 24);
  CHECK(ds.dropped_samples == 3);
  CHECK(ds.series.dt_s == 3600.0);
}

TEST_CASE("downsample window mean preserved exactly") {
  Rng r(5);
  MeasurementSeries series;
  series.dt_s = 60.0;
  for (int t = 0; t < 12; ++t)
    series.samples.push_back({t, 400.0 + r.uniform(), 399.0 + r.uniform(),
                              10.0 * r.uniform(), 5.0 * r.uniform()});
  const Downsampled ds = downsample(series, 3);
  REQUIRE(ds.series.size() == 4);
  for (size_t w = 0; w < 4; ++w) {
    double sum = 0.0;
    for (size_t j = 0; j < 3; ++j) sum += series.samples[3 * w + j].i_in;
    CHECK(ds.series.samples[w].i_in == doctest::Approx(sum / 3.0).epsilon(1e-15));
  }
}

TEST_CASE("downsample propagates window faults") {
  MeasurementSeries series;
  series.dt_s = 60.0;
  series.samples.push_back({0, 400.0, 398.0, 10.0, 5.0});
  MeasurementSample bad{1, 0.0, 0.0, 0.0, 0.0};
  bad.ok = false;
  bad.fault = SampleFault::not_converged;
  series.samples.push_back(bad);
  series.samples.push_back({2, 400.0, 398.0, 10.0, 5.0});
  series.samples.push_back({3, 400.0, 398.0, 10.0, 5.0});
  const Downsampled ds = downsample(series, 2);
  REQUIRE(ds.series.size() == 2);
  CHECK_FALSE(ds.series.samples[0].ok);
  CHECK(ds.series.samples[0].fault == SampleFault::not_converged);
  CHECK(ds.series.samples[1].ok);
}

TEST_CASE("downsample rejects factor 0") {
  MeasurementSeries series;
  series.samples.push_back({0, 400.0, 398.0, 10.0, 5.0});
  CHECK_THROWS_AS(downsample(series, 0), ValidationError);
}

TEST_CASE("downsample_loads averages load series") {
  LoadAssignment loads;
  loads.intermediate = {{1.0, 3.0, 5.0, 7.0}};
  loads.intermediate_names = {"a"};
  loads.tail = {2.0, 4.0, 6.0, 8.0};
  loads.tail_name = "b";
  const LoadAssignment ds = downsample_loads(loads, 2);
  REQUIRE(ds.steps() == 2);
  CHECK(ds.intermediate[0][0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(ds.intermediate[0][1] == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(ds.tail[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(ds.tail[1] == doctest::Approx(7.0).epsilon(1e-15));
}

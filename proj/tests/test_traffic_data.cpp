#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "corpus.hpp"
#include "onramp/control_volume.hpp"
#include "onramp/empirical.hpp"
#include "onramp/manifest.hpp"
#include "onramp/synth.hpp"
#include "onramp/trajectory.hpp"
#include "onramp/units.hpp"

using namespace onramp;

namespace {

// straight line x(t) = x0 + v t at fixed y, one segment on [t0, t1]
VehicleTrack line_track(int id, double x0, double v, double y, double t0,
                        double t1) {
  VehicleTrack tr;
  tr.id = id;
  tr.segments.push_back(hermite_segment(t0, t1, {x0, y}, {v, 0.0},
                                        {x0 + v * (t1 - t0), y}, {v, 0.0}));
  return tr;
}

}  // namespace

TEST_CASE("hermite segment matches its endpoint data") {
  const auto seg = hermite_segment(1.0, 3.0, {0.0, 0.0}, {2.0, 1.0},
                                   {10.0, -1.0}, {4.0, 0.5});
  CHECK(seg.position(1.0).x == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(seg.velocity(1.0).x == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(seg.position(3.0).x == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(seg.position(3.0).y == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(seg.velocity(3.0).y == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("track presence and bounded extrapolation") {
  const auto tr = line_track(1, 0.0, 10.0, 2.0, 5.0, 8.0);
  CHECK(tr.start_time() == 5.0);
  CHECK(tr.end_time() == 8.0);
  CHECK(tr.present(5.0));
  CHECK(tr.present(8.0));
  CHECK_FALSE(tr.present(8.01));
  // edge cubic extrapolates a bounded distance, then throws
  CHECK(tr.position(8.0 + 29.9).x == doctest::Approx(349.0).epsilon(1e-9));
  CHECK_THROWS_AS(tr.position(8.0 + 31.0), std::out_of_range);
  CHECK_THROWS_AS(tr.position(5.0 - 31.0), std::out_of_range);
}

TEST_CASE("track validation rejects gaps") {
  VehicleTrack tr;
  tr.id = 2;
  tr.segments.push_back(hermite_segment(0.0, 1.0, {0, 0}, {1, 0}, {1, 0}, {1, 0}));
  tr.segments.push_back(hermite_segment(1.5, 2.0, {1, 0}, {1, 0}, {2, 0}, {1, 0}));
  CHECK_THROWS_AS(tr.validate(), std::invalid_argument);
}

TEST_CASE("trajectory file round-trips") {
  std::vector<VehicleTrack> tracks;
  tracks.push_back(line_track(3, -50.0, 21.7, 1.875, 0.0, 12.5));
  tracks.push_back(line_track(7, -120.0, 15.0, -1.5, 3.0, 20.0));
  std::stringstream ss;
  write_tracks(ss, tracks);
  const auto back = read_tracks(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == 3);
  CHECK(back[1].id == 7);
  CHECK(back[1].segments.size() == tracks[1].segments.size());
  CHECK(back[0].position(6.0).x ==
        doctest::Approx(tracks[0].position(6.0).x).epsilon(1e-12));
}

TEST_CASE("trajectory reader skips leading comments and rejects garbage") {
  std::stringstream commented;
  commented << "# run metadata line\n# another\n";
  write_tracks(commented, std::vector<VehicleTrack>{});
  CHECK(read_tracks(commented).empty());
  std::stringstream garbage("vehicle,t0\n1,2\n");
  CHECK_THROWS_WITH_AS(read_tracks(garbage),
                       doctest::Contains("not a trajectory file"),
                       std::runtime_error);
}

TEST_CASE("measure_volume counts and averages inside the box") {
  // two vehicles inside the volume at t = 1, one of them gone by t = 3,
  // both gone by t = 11
  std::vector<VehicleTrack> tracks;
  tracks.push_back(line_track(1, -100.0, 10.0, 2.0, 0.0, 10.0));
  tracks.push_back(line_track(2, -40.0, 20.0, 5.0, 0.0, 2.0));
  const ControlVolume volume{-135.14, -10.0, 0.0, 11.25};
  const SeriesGrid grid{0.0, 1.0, 12};
  const auto series = measure_volume(tracks, volume, grid, Exec::serial);
  REQUIRE(series.density.size() == 12);
  const double km = volume.length() / 1000.0;
  CHECK(series.density[1] == doctest::Approx(2.0 / km).epsilon(1e-12));
  CHECK(series.speed[1] == doctest::Approx(units::ms_to_kmh(15.0)).epsilon(1e-12));
  // vehicle 2's record ended; only the slow one remains
  CHECK(series.density[3] == doctest::Approx(1.0 / km).epsilon(1e-12));
  CHECK(series.speed[3] == doctest::Approx(units::ms_to_kmh(10.0)).epsilon(1e-12));
  CHECK(series.flux[3] ==
        doctest::Approx(series.density[3] * series.speed[3]).epsilon(1e-12));
  // empty volume reports zero density and zero speed
  CHECK(series.density[11] == 0.0);
  CHECK(series.speed[11] == 0.0);
  const auto par = measure_volume(tracks, volume, grid, Exec::parallel);
  CHECK(par.density == series.density);
}

TEST_CASE("crossing times locate plane transits") {
  std::vector<VehicleTrack> tracks;
  tracks.push_back(line_track(1, -30.0, 15.0, 3.0, 0.0, 10.0));  // crosses at 2
  tracks.push_back(line_track(2, -30.0, 15.0, 20.0, 0.0, 10.0));  // outside y
  // starts far past the plane; even the capped backward extrapolation never
  // reaches it, so the vehicle is reported as skipped
  tracks.push_back(line_track(3, 500.0, 15.0, 3.0, 0.0, 10.0));
  const auto ct = crossing_times(tracks, 0.0, 0.0, 11.25);
  REQUIRE(ct.times.size() == 1);
  CHECK(ct.times[0] == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(ct.skipped == 1);
}

TEST_CASE("crossing times extrapolate the edge polynomial backwards") {
  // starts 15 m past the plane at t = 1: linear history crosses at t = 0
  std::vector<VehicleTrack> tracks;
  tracks.push_back(line_track(1, 15.0, 15.0, 3.0, 1.0, 5.0));
  const auto ct = crossing_times(tracks, 0.0, 0.0, 11.25);
  REQUIRE(ct.times.size() == 1);
  CHECK(ct.times[0] == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("per-second histogram bins a covering range") {
  const std::vector<double> times{0.1, 0.9, 1.5, 3.99};
  const auto hist = per_second_histogram(times, 0.0, 4.0);
  REQUIRE(hist.size() == 5);
  CHECK(hist[0] == 2);
  CHECK(hist[1] == 1);
  CHECK(hist[2] == 0);
  CHECK(hist[3] == 1);
}

TEST_CASE("kernel rate estimate") {
  const std::vector<double> one{10.0};
  // single event at the query point: phi(0) / h
  CHECK(kde_rate(one, 10.0) ==
        doctest::Approx(0.3989422804014327 / 0.75).epsilon(1e-12));
  // mass integrates to the event count
  const SeriesGrid grid{0.0, 0.05, 401};
  const auto series = kde_series(one, grid);
  double mass = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i)
    mass += 0.5 * (series[i] + series[i - 1]) * grid.dt;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("delay alignment shifts and trims") {
  std::array<EmpiricalSeries, 3> series;
  const SeriesGrid grid{0.0, 0.25, 40};
  for (auto& s : series) {
    s.grid = grid;
    for (int i = 0; i < grid.n; ++i) {
      s.density.push_back(static_cast<double>(i));
      s.speed.push_back(1.0);
      s.flux.push_back(static_cast<double>(i));
    }
  }
  const auto aligned = apply_delays(series, 0.5, 1.0);
  // road 2 reads 2 cells ahead, road 3 reads 4 cells ahead
  REQUIRE(aligned[0].density.size() == aligned[1].density.size());
  CHECK(aligned[1].density[0] == series[1].density[2]);
  CHECK(aligned[2].density[0] == series[2].density[4]);
  CHECK(aligned[0].density[0] == series[0].density[0]);
  CHECK(aligned[0].density.size() == 36);  // trimmed by the largest shift
  CHECK_THROWS_AS(apply_delays(series, 0.1, 0.0), std::domain_error);
  CHECK_THROWS_AS(apply_delays(series, 0.0, 11.0), std::domain_error);
}

TEST_CASE("training samples carry traces, fluxes and time") {
  std::array<EmpiricalSeries, 3> series;
  const SeriesGrid grid{0.0, 0.25, 3};
  for (int r = 0; r < 3; ++r) {
    series[r].grid = grid;
    for (int i = 0; i < grid.n; ++i) {
      series[r].density.push_back(10.0 * (r + 1) + i);
      series[r].speed.push_back(30.0);
      series[r].flux.push_back(100.0 * (r + 1) + i);
    }
  }
  const auto samples = to_training_samples(series);
  REQUIRE(samples.size() == 3);
  CHECK(samples[1].traces.rho1 == 11.0);
  CHECK(samples[1].traces.rho2 == 21.0);
  CHECK(samples[1].traces.rho3 == 31.0);
  CHECK(samples[1].target.f1 == 101.0);
  CHECK(samples[1].target.f3 == 301.0);
  CHECK(samples[1].t == 0.25);
}

TEST_CASE("manifest round-trips and groups splits") {
  std::vector<DatasetInfo> rows(3);
  rows[0] = {1, "day01", "06:00", 300.0, 150, 25, 72.5, 55.1,
             Split::train, 0.25, 9.0};
  rows[1].id = 2;
  rows[1].split = Split::test;
  rows[2].id = 3;
  rows[2].split = Split::application;
  std::stringstream ss;
  write_manifest(ss, rows);
  const auto back = read_manifest(ss);
  REQUIRE(back.size() == 3);
  CHECK(back[0].day == "day01");
  CHECK(back[0].start_time == "06:00");
  CHECK(back[0].duration_s == 300.0);
  CHECK(back[0].tau3 == 9.0);
  CHECK(back[0].split == Split::train);
  const auto groups = split_datasets(back);
  CHECK(groups.train == std::vector<int>{1});
  CHECK(groups.test == std::vector<int>{2});
  CHECK(groups.application == std::vector<int>{3});
}

TEST_CASE("split assignment covers the corpus 8/8/15") {
  CHECK(train_ids().size() == 8);
  CHECK(test_ids().size() == 8);
  CHECK(application_ids().size() == 15);
  int seen = 0;
  for (int id = 1; id <= 31; ++id) {
    (void)split_of(id);
    ++seen;
  }
  CHECK(seen == 31);
  CHECK_THROWS_AS(split_of(0), std::invalid_argument);
  CHECK_THROWS_AS(split_of(32), std::invalid_argument);
}

TEST_CASE("synthetic generator is deterministic") {
  SynthConfig cfg;
  cfg.duration = 60.0;
  cfg.seed = 42;
  const auto a = synth_generate(cfg);
  const auto b = synth_generate(cfg);
  REQUIRE(!a.empty());
  REQUIRE(a.size() == b.size());
  CHECK(a[5].position(a[5].start_time()).x ==
        b[5].position(b[5].start_time()).x);
  cfg.seed = 43;
  const auto c = synth_generate(cfg);
  CHECK(a.size() != c.size());  // different draw
}

TEST_CASE("free flow travels near the free speed") {
  SynthConfig cfg;
  cfg.duration = 120.0;
  cfg.ramp_rate = 0.02;
  cfg.main_rate = 0.08;  // sparse: negligible interaction
  cfg.seed = 7;
  const auto tracks = synth_generate(cfg);
  REQUIRE(tracks.size() > 5);
  const auto volume = default_control_volumes()[1];
  const SeriesGrid grid{0.0, 0.25, 480};
  const auto series = measure_volume(tracks, volume, grid);
  double vmax_seen = 0.0;
  int populated = 0;
  for (int i = 0; i < grid.n; ++i) {
    if (series.density[i] <= 0.0) continue;
    ++populated;
    vmax_seen = std::max(vmax_seen, series.speed[i]);
  }
  REQUIRE(populated > 50);
  CHECK(vmax_seen <= cfg.v_free[1] * 1.0001);
  CHECK(vmax_seen >= cfg.v_free[1] * 0.95);
}

TEST_CASE("merge zone transit takes merge_delay seconds") {
  SynthConfig cfg;
  cfg.duration = 90.0;
  cfg.ramp_rate = 0.05;
  cfg.main_rate = 0.05;
  cfg.merge_delay = 9.0;
  cfg.seed = 11;
  const auto tracks = synth_generate(cfg);
  const auto entry = crossing_times(tracks, -10.0, -3.75, 11.25);
  const auto exit = crossing_times(tracks, 10.0, -3.75, 11.25);
  REQUIRE(!entry.times.empty());
  REQUIRE(entry.times.size() == exit.times.size());
  // order through the zone is preserved: match k-th entry to k-th exit
  for (std::size_t k = 0; k < entry.times.size(); ++k)
    CHECK(exit.times[k] - entry.times[k] == doctest::Approx(9.0).epsilon(5e-3));
}

TEST_CASE("corpus is complete and reproducible") {
  const auto ids = tools::corpus_ids();
  CHECK(ids.size() == static_cast<std::size_t>(tools::kCorpusSize));
  CHECK(ids.front() == 1);
  CHECK(ids.back() == 31);
  const auto cfg = tools::corpus_config(17);
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(tools::corpus_config(0), std::invalid_argument);
  CHECK_THROWS_AS(tools::corpus_config(32), std::invalid_argument);
}

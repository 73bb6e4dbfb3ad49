#include "onramp/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "onramp/units.hpp"

namespace onramp {

EmpiricalSeries measure_volume(std::span<const VehicleTrack> tracks,
                               const ControlVolume& volume,
                               const SeriesGrid& grid, Exec exec) {
  if (grid.n < 0 || !(grid.dt > 0.0))
    throw std::invalid_argument("series grid needs dt > 0 and n >= 0");
  if (!(volume.length() > 0.0))
    throw std::invalid_argument("control volume needs positive length");

  EmpiricalSeries out;
  out.grid = grid;
  out.density.assign(static_cast<std::size_t>(grid.n), 0.0);
  out.speed.assign(static_cast<std::size_t>(grid.n), 0.0);
  out.flux.assign(static_cast<std::size_t>(grid.n), 0.0);

  const double km = volume.length() / 1000.0;
  parallel_for(exec, static_cast<std::size_t>(grid.n), [&](std::size_t i) {
    const double t = grid.time(static_cast<int>(i));
    int count = 0;
    double speed_sum = 0.0;
    for (const auto& track : tracks) {
      if (!track.present(t)) continue;
      const PlanePoint p = track.position(t);
      if (!volume.contains(p.x, p.y)) continue;
      const PlanePoint v = track.velocity(t);
      ++count;
      speed_sum += std::hypot(v.x, v.y);
    }
    if (count == 0) return;
    out.density[i] = static_cast<double>(count) / km;
    out.speed[i] = units::ms_to_kmh(speed_sum / static_cast<double>(count));
    out.flux[i] = out.density[i] * out.speed[i];
  });
  return out;
}

std::array<EmpiricalSeries, 3> apply_delays(
    const std::array<EmpiricalSeries, 3>& series, double tau2, double tau3) {
  const SeriesGrid& g = series[0].grid;
  for (const auto& s : series) {
    if (s.grid.dt != g.dt || s.grid.t0 != g.t0 || s.grid.n != g.n)
      throw std::invalid_argument("the three series must share one grid");
    if (s.density.size() != static_cast<std::size_t>(s.grid.n))
      throw std::invalid_argument("series length does not match its grid");
  }
  const auto to_steps = [&](double tau) {
    const double steps = tau / g.dt;
    const auto k = static_cast<std::ptrdiff_t>(std::lround(steps));
    if (std::abs(steps - static_cast<double>(k)) > 1e-9)
      throw std::domain_error("delay is not a multiple of the grid step");
    return k;
  };
  const std::ptrdiff_t k2 = to_steps(tau2), k3 = to_steps(tau3);
  const std::ptrdiff_t n = g.n;
  const std::ptrdiff_t lo = std::max({std::ptrdiff_t{0}, -k2, -k3});
  const std::ptrdiff_t hi = n - std::max({std::ptrdiff_t{0}, k2, k3});
  if (hi <= lo) throw std::domain_error("delays leave no common support");

  const std::array<std::ptrdiff_t, 3> shift = {0, k2, k3};
  std::array<EmpiricalSeries, 3> out;
  for (int r = 0; r < 3; ++r) {
    auto& dst = out[static_cast<std::size_t>(r)];
    const auto& src = series[static_cast<std::size_t>(r)];
    dst.grid = {g.time(static_cast<int>(lo)), g.dt, static_cast<int>(hi - lo)};
    const std::ptrdiff_t off = lo + shift[static_cast<std::size_t>(r)];
    const auto copy = [&](const std::vector<double>& from, std::vector<double>& to) {
      to.assign(from.begin() + off, from.begin() + off + (hi - lo));
    };
    copy(src.density, dst.density);
    copy(src.speed, dst.speed);
    copy(src.flux, dst.flux);
  }
  return out;
}

std::vector<TrainingSample> to_training_samples(
    const std::array<EmpiricalSeries, 3>& series) {
  const int n = series[0].grid.n;
  for (const auto& s : series)
    if (s.grid.n != n)
      throw std::invalid_argument("series must have equal length");
  std::vector<TrainingSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    TrainingSample s;
    s.traces = {series[0].density[ui], series[1].density[ui], series[2].density[ui]};
    s.target = {series[0].flux[ui], series[1].flux[ui], series[2].flux[ui]};
    s.t = series[0].grid.time(i);
    out.push_back(s);
  }
  return out;
}

namespace {

constexpr double kSampleStep = 0.05;  // [s] crossing search resolution

// Refines a bracketing interval [ta, tb] with x(ta) < plane <= x(tb).
double bisect_crossing(const VehicleTrack& track, double x_plane, double ta,
                       double tb) {
  for (int it = 0; it < 60 && tb - ta > 1e-6; ++it) {
    const double tm = 0.5 * (ta + tb);
    (track.position(tm).x < x_plane ? ta : tb) = tm;
  }
  return 0.5 * (ta + tb);
}

}  // namespace

CrossingTimes crossing_times(std::span<const VehicleTrack> tracks,
                             double x_plane, double y_min, double y_max) {
  CrossingTimes out;
  for (const auto& track : tracks) {
    if (track.segments.empty()) continue;
    const double lo = track.start_time() - VehicleTrack::kExtrapolationCap;
    const double hi = track.end_time() + VehicleTrack::kExtrapolationCap;
    bool found = false;
    double prev_t = lo;
    double prev_x = track.position(lo).x;
    for (double t = lo + kSampleStep; t < hi + kSampleStep; t += kSampleStep) {
      const double tc = std::min(t, hi);
      const double x = track.position(tc).x;
      if (prev_x < x_plane && x >= x_plane) {
        const double tx = bisect_crossing(track, x_plane, prev_t, tc);
        const double y = track.position(tx).y;
        if (y >= y_min && y <= y_max) {
          out.times.push_back(tx);
          found = true;
        }
      }
      prev_t = tc;
      prev_x = x;
      if (tc >= hi) break;
    }
    if (!found) {
      // Inside at the start of the record and no crossing recoverable.
      const PlanePoint p0 = track.position(track.start_time());
      if (p0.x >= x_plane && p0.y >= y_min && p0.y <= y_max) ++out.skipped;
    }
  }
  std::sort(out.times.begin(), out.times.end());
  return out;
}

std::vector<int> per_second_histogram(std::span<const double> times, double t0,
                                      double t1) {
  if (!(t1 >= t0)) throw std::invalid_argument("histogram needs t1 >= t0");
  const auto first = static_cast<std::ptrdiff_t>(std::floor(t0));
  const auto last = static_cast<std::ptrdiff_t>(std::floor(t1));
  std::vector<int> bins(static_cast<std::size_t>(last - first + 1), 0);
  for (double t : times) {
    if (t < t0 || t > t1) continue;
    const auto k = static_cast<std::ptrdiff_t>(std::floor(t)) - first;
    ++bins[static_cast<std::size_t>(k)];
  }
  return bins;
}

double kde_rate(std::span<const double> times, double t, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::domain_error("bandwidth must be positive");
  constexpr double inv_sqrt_2pi = 0.39894228040143268;
  double s = 0.0;
  for (double ti : times) {
    const double z = (t - ti) / bandwidth;
    s += std::exp(-0.5 * z * z);
  }
  return s * inv_sqrt_2pi / bandwidth;
}

std::vector<double> kde_series(std::span<const double> times,
                               const SeriesGrid& grid, double bandwidth) {
  std::vector<double> out(static_cast<std::size_t>(grid.n));
  for (int i = 0; i < grid.n; ++i)
    out[static_cast<std::size_t>(i)] = kde_rate(times, grid.time(i), bandwidth);
  return out;
}

}  // namespace onramp

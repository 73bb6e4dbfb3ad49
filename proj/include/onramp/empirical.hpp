#pragma once

#include <array>
#include <span>
#include <vector>

#include "onramp/control_volume.hpp"
#include "onramp/junction.hpp"
#include "onramp/parallel.hpp"
#include "onramp/trajectory.hpp"

namespace onramp {

/// Uniform time grid t_i = t0 + i * dt, i = 0..n-1.
struct SeriesGrid {
  double t0 = 0.0;
  double dt = 0.25;  // [s]
  int n = 0;

  double time(int i) const { return t0 + dt * static_cast<double>(i); }
};

/// Macroscopic state measured in one control volume.
struct EmpiricalSeries {
  SeriesGrid grid;
  std::vector<double> density;  // [veh/km]
  std::vector<double> speed;    // [km/h], 0 where the volume is empty
  std::vector<double> flux;     // [veh/h], density * speed pointwise
};

/// Counts vehicles inside the volume and averages their planar speeds at
/// every grid time.  A vehicle exists only on its recorded interval.
EmpiricalSeries measure_volume(std::span<const VehicleTrack> tracks,
                               const ControlVolume& volume,
                               const SeriesGrid& grid,
                               Exec exec = Exec::parallel);

/**
 * Shifts road 2 by tau2 and road 3 by tau3 (road 1 keeps its clock) and trims
 * all three to the indices where every shifted time stays inside the original
 * interval.  The delays must be multiples of the common grid step; an empty
 * trimmed support is a domain error.  The returned series share one grid
 * whose labels follow road 1.
 */
std::array<EmpiricalSeries, 3> apply_delays(
    const std::array<EmpiricalSeries, 3>& series, double tau2, double tau3);

/// (traces, target fluxes) rows from aligned per-road series, one per grid
/// point.
std::vector<TrainingSample> to_training_samples(
    const std::array<EmpiricalSeries, 3>& series);

// ---------------------------------------------------------------------------
// Boundary events

struct CrossingTimes {
  std::vector<double> times;  // sorted
  int skipped = 0;  // vehicles inside at the start whose crossing was never found
};

/**
 * Times at which vehicles cross the plane x = x_plane in +x direction with y
 * inside [y_min, y_max].  Vehicles already past the plane when their record
 * begins (or not yet past it when it ends) are handled by extrapolating the
 * edge polynomials up to the track's extrapolation cap; a vehicle that starts
 * beyond the plane and still yields no crossing is counted in `skipped`.
 * Crossings are located by sampling (0.05 s) and bisection to 1e-6 s.
 */
CrossingTimes crossing_times(std::span<const VehicleTrack> tracks,
                             double x_plane, double y_min, double y_max);

/// Per-second counts: bin k holds events in [floor(t0)+k, floor(t0)+k+1),
/// covering [t0, t1].  Events outside [t0, t1] are ignored.
std::vector<int> per_second_histogram(std::span<const double> times, double t0,
                                      double t1);

/// Gaussian kernel rate estimate (1/h) sum phi((t - t_i)/h) in events per
/// second; phi the standard normal density.
double kde_rate(std::span<const double> times, double t, double bandwidth = 0.75);

std::vector<double> kde_series(std::span<const double> times,
                               const SeriesGrid& grid, double bandwidth = 0.75);

}  // namespace onramp

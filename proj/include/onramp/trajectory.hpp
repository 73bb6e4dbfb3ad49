#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

namespace onramp {

struct PlanePoint {
  double x = 0.0, y = 0.0;  // [m]
};

/**
 * One cubic arc of a vehicle path in the plane on [t0, t1], coefficients in
 * local time s = t - t0:
 *
 *   x(s) = x[0] + x[1] s + x[2] s^2 + x[3] s^3,   same for y.
 */
struct CubicSegment {
  double t0 = 0.0, t1 = 0.0;  // [s]
  std::array<double, 4> x{};
  std::array<double, 4> y{};

  PlanePoint position(double t) const {
    const double s = t - t0;
    return {((x[3] * s + x[2]) * s + x[1]) * s + x[0],
            ((y[3] * s + y[2]) * s + y[1]) * s + y[0]};
  }
  PlanePoint velocity(double t) const {
    const double s = t - t0;
    return {(3.0 * x[3] * s + 2.0 * x[2]) * s + x[1],
            (3.0 * y[3] * s + 2.0 * y[2]) * s + y[1]};
  }
};

/// Cubic matching position and velocity at both ends (Hermite data).
CubicSegment hermite_segment(double t0, double t1, PlanePoint p0, PlanePoint v0,
                             PlanePoint p1, PlanePoint v1);

/**
 * Recorded path of one vehicle: contiguous cubic segments with increasing
 * times.  Outside its recorded interval the vehicle counts as absent, but
 * the edge polynomials may be extrapolated a bounded distance (30 s) for
 * boundary-crossing searches.
 */
struct VehicleTrack {
  int id = 0;
  std::vector<CubicSegment> segments;

  static constexpr double kExtrapolationCap = 30.0;  // [s]

  double start_time() const;
  double end_time() const;
  bool present(double t) const;  // t inside the recorded interval (closed)

  // Path evaluation; allows up to kExtrapolationCap beyond the recorded
  // interval (edge cubic extrapolated), throws std::out_of_range further out
  // or on an empty track.
  PlanePoint position(double t) const;
  PlanePoint velocity(double t) const;

  // Segments sorted, contiguous (1e-9 s tolerance) and nonempty in time.
  void validate() const;

 private:
  const CubicSegment& segment_at(double t) const;
};

// ---------------------------------------------------------------------------
// Trajectory file: CSV with a version header, one row per segment.
//
//   # onramp trajectories v1
//   vehicle,t0,t1,x0,x1,x2,x3,y0,y1,y2,y3
//
// Rows of one vehicle must be consecutive and time-ordered.

void write_tracks(std::ostream& os, std::span<const VehicleTrack> tracks);
std::vector<VehicleTrack> read_tracks(std::istream& is);

}  // namespace onramp

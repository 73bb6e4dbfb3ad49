#pragma once

#include <array>

namespace onramp {

/// Axis-aligned measurement rectangle in road coordinates, meters.  The
/// boundary counts as inside.
struct ControlVolume {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;

  bool contains(double x, double y) const {
    return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
  }
  // Longitudinal extent, the length densities are referred to.
  double length() const { return x_max - x_min; }
};

// Default junction geometry.  The merge sits at x = 0; the main carriageway
// runs along y in [0, 3 lanes * 3.75 m], the ramp lane below it.  Upstream
// volumes end 10 m before the merge and the downstream one starts 10 m
// after, leaving a gap so that volume 2 sees transit traffic only.
inline constexpr double kLaneWidth = 3.75;        // [m]
inline constexpr double kRoadHalfLength = 135.14; // [m] per-road model length
inline constexpr double kMergeGapHalf = 10.0;     // [m]

inline constexpr std::array<double, 3> kLaneCounts = {1.0, 3.0, 3.0};

/// Volumes of roads 1 (ramp), 2 (upstream carriageway), 3 (downstream).
inline std::array<ControlVolume, 3> default_control_volumes() {
  const double w = 3.0 * kLaneWidth;
  return {{
      {-kRoadHalfLength, -kMergeGapHalf, -kLaneWidth, 0.0},
      {-kRoadHalfLength, -kMergeGapHalf, 0.0, w},
      {kMergeGapHalf, kRoadHalfLength, 0.0, w},
  }};
}

}  // namespace onramp

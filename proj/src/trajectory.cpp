#include "onramp/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace onramp {

CubicSegment hermite_segment(double t0, double t1, PlanePoint p0, PlanePoint v0,
                             PlanePoint p1, PlanePoint v1) {
  if (!(t1 > t0)) throw std::invalid_argument("segment needs t1 > t0");
  const double h = t1 - t0;
  CubicSegment seg;
  seg.t0 = t0;
  seg.t1 = t1;
  const auto fill = [h](std::array<double, 4>& c, double a0, double d0, double a1,
                        double d1) {
    c[0] = a0;
    c[1] = d0;
    c[2] = (3.0 * (a1 - a0) - (2.0 * d0 + d1) * h) / (h * h);
    c[3] = (2.0 * (a0 - a1) + (d0 + d1) * h) / (h * h * h);
  };
  fill(seg.x, p0.x, v0.x, p1.x, v1.x);
  fill(seg.y, p0.y, v0.y, p1.y, v1.y);
  return seg;
}

double VehicleTrack::start_time() const {
  if (segments.empty()) throw std::out_of_range("empty track");
  return segments.front().t0;
}

double VehicleTrack::end_time() const {
  if (segments.empty()) throw std::out_of_range("empty track");
  return segments.back().t1;
}

bool VehicleTrack::present(double t) const {
  return !segments.empty() && t >= segments.front().t0 && t <= segments.back().t1;
}

const CubicSegment& VehicleTrack::segment_at(double t) const {
  if (segments.empty()) throw std::out_of_range("empty track");
  if (t <= segments.front().t1) return segments.front();
  if (t >= segments.back().t0) return segments.back();
  // first segment with t1 >= t
  const auto it = std::lower_bound(
      segments.begin(), segments.end(), t,
      [](const CubicSegment& s, double v) { return s.t1 < v; });
  return *it;
}

PlanePoint VehicleTrack::position(double t) const {
  if (t < start_time() - kExtrapolationCap || t > end_time() + kExtrapolationCap)
    throw std::out_of_range("time too far outside the recorded interval");
  return segment_at(t).position(t);
}

PlanePoint VehicleTrack::velocity(double t) const {
  if (t < start_time() - kExtrapolationCap || t > end_time() + kExtrapolationCap)
    throw std::out_of_range("time too far outside the recorded interval");
  return segment_at(t).velocity(t);
}

void VehicleTrack::validate() const {
  if (segments.empty()) throw std::invalid_argument("track without segments");
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (!(s.t1 > s.t0) || !std::isfinite(s.t0) || !std::isfinite(s.t1))
      throw std::invalid_argument("segment needs finite t1 > t0");
    if (i > 0 && std::abs(segments[i - 1].t1 - s.t0) > 1e-9)
      throw std::invalid_argument("segments must be contiguous in time");
  }
}

void write_tracks(std::ostream& os, std::span<const VehicleTrack> tracks) {
  os << "# onramp trajectories v1\n";
  os << "vehicle,t0,t1,x0,x1,x2,x3,y0,y1,y2,y3\n";
  os.precision(17);
  for (const auto& track : tracks)
    for (const auto& s : track.segments) {
      os << track.id << ',' << s.t0 << ',' << s.t1;
      for (double c : s.x) os << ',' << c;
      for (double c : s.y) os << ',' << c;
      os << '\n';
    }
}

std::vector<VehicleTrack> read_tracks(std::istream& is) {
  std::string line;
  // Run-metadata comments may precede the version line.
  bool versioned = false;
  while (std::getline(is, line)) {
    if (line.rfind("# onramp trajectories v1", 0) == 0) {
      versioned = true;
      break;
    }
    if (line.empty() || line[0] == '#') continue;
    break;
  }
  if (!versioned)
    throw std::runtime_error("not a trajectory file (missing version header)");
  if (!std::getline(is, line) || line.rfind("vehicle,", 0) != 0)
    throw std::runtime_error("trajectory file misses the column header");

  std::vector<VehicleTrack> tracks;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<double> vals;
    bool first = true;
    int id = 0;
    while (std::getline(ss, field, ',')) {
      if (first) {
        id = std::stoi(field);
        first = false;
      } else {
        vals.push_back(std::stod(field));
      }
    }
    if (vals.size() != 10)
      throw std::runtime_error("trajectory row must have 11 columns");
    CubicSegment seg;
    seg.t0 = vals[0];
    seg.t1 = vals[1];
    std::copy_n(vals.begin() + 2, 4, seg.x.begin());
    std::copy_n(vals.begin() + 6, 4, seg.y.begin());
    if (tracks.empty() || tracks.back().id != id) {
      tracks.push_back({id, {}});
    }
    tracks.back().segments.push_back(seg);
  }
  for (auto& t : tracks) t.validate();
  return tracks;
}

}  // namespace onramp

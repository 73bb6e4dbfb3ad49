#include "onramp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "onramp/control_volume.hpp"
#include "onramp/units.hpp"

namespace onramp {

namespace {

constexpr double kSpawnX = -220.0;        // roads 1 and 2 begin here
constexpr double kRemoveX = 220.0;        // road 3 ends here
constexpr double kBlockX = 185.0;         // stop line of the closure episode
constexpr double kJamSpacing = 7.5;       // m front-to-front at standstill
constexpr double kRelaxation = 1.0;       // s speed relaxation time
constexpr double kBrakeHorizon = 0.5;     // s horizon of the no-collision cap
constexpr double kWaitZone = -40.0;       // merge-slot candidates start here
constexpr double kSpawnClearance = 15.0;  // m free road required to spawn
// The simulation keeps running after the arrival window until every vehicle
// has left the road (bounded by this cap).  Trajectories truncated inside a
// standing queue would extrapolate into phantom plane crossings downstream.
constexpr double kDrainCap = 900.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Merge zone geometry: the ramp lane centre slides to the innermost main
// lane centre linearly in x across [-10, 10].
constexpr double kZoneIn = -kMergeGapHalf;
constexpr double kZoneOut = kMergeGapHalf;
constexpr double kRampSlope = kLaneWidth / (kZoneOut - kZoneIn);

double lane_y(int lane) {
  return lane == 0 ? -0.5 * kLaneWidth
                   : (static_cast<double>(lane) - 0.5) * kLaneWidth;
}

enum class Phase { upstream, zone, downstream, gone };

struct Knot {
  double t, x, y;
  double vx_in, vy_in;    // velocity closing the previous segment
  double vx_out, vy_out;  // velocity opening the next segment
};

struct Car {
  int lane = 0;  // 0 = ramp, 1..3 = main
  int tl = 1;    // chain lane past the zone; ramp cars may move over on exit
  Phase phase = Phase::upstream;
  double x = 0.0, v = 0.0;
  bool granted = false;  // holds the single outstanding merge slot
  std::vector<Knot> knots;
};

double car_y(const Car& c) {
  if (c.phase == Phase::zone && c.lane == 0)
    return lane_y(0) + (c.x - kZoneIn) * kRampSlope;
  return c.phase == Phase::upstream ? lane_y(c.lane) : lane_y(c.tl);
}

double car_vy(const Car& c) {
  return c.phase == Phase::zone && c.lane == 0 ? kRampSlope * c.v : 0.0;
}

void push_knot(Car& c, double t, double vx_in, double vy_in, double vx_out,
               double vy_out) {
  if (!c.knots.empty() && t - c.knots.back().t < 1e-9) return;
  c.knots.push_back({t, c.x, car_y(c), vx_in, vy_in, vx_out, vy_out});
}

void push_knot(Car& c, double t) {
  const double vx = c.v, vy = car_vy(c);
  push_knot(c, t, vx, vy, vx, vy);
}

// Speed that keeps the front-to-front gap above the jam spacing.
double safe_speed(double gap) {
  return std::max(0.0, (gap - kJamSpacing) / kBrakeHorizon);
}

struct Arrival {
  double t;
  int lane;
};

// Poisson stream with sinusoidal rate modulation, realized by thinning a
// homogeneous stream at the peak rate.  Main-road arrivals cycle through the
// three lanes.
void draw_arrivals(std::mt19937_64& rng, const SynthConfig& cfg, double rate,
                   bool ramp, std::vector<Arrival>& out) {
  if (rate <= 0.0) return;
  const double peak = rate * (1.0 + cfg.rate_amplitude);
  std::exponential_distribution<double> gap(peak);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int main_lane = 1;
  for (double t = gap(rng); t < cfg.duration; t += gap(rng)) {
    const double level =
        1.0 + cfg.rate_amplitude *
                  std::sin(2.0 * std::numbers::pi * t / cfg.rate_period);
    if (u01(rng) * (1.0 + cfg.rate_amplitude) > level) continue;
    out.push_back({t, ramp ? 0 : main_lane});
    if (!ramp) main_lane = main_lane % 3 + 1;
  }
}

}  // namespace

void SynthConfig::validate() const {
  const auto bad = [](const char* what) {
    throw std::invalid_argument(std::string("synth config: ") + what);
  };
  if (!(duration >= 0.0)) bad("duration must be >= 0");
  if (ramp_rate < 0.0 || main_rate < 0.0) bad("arrival rates must be >= 0");
  if (rate_amplitude < 0.0 || rate_amplitude > 1.0)
    bad("rate amplitude must lie in [0, 1]");
  if (!(rate_period > 0.0)) bad("rate period must be positive");
  for (double v : v_free)
    if (!(v > 0.0)) bad("free speeds must be positive");
  if (!(merge_delay > 0.0)) bad("merge delay must be positive");
  if (junction_capacity < 0.0) bad("junction capacity must be >= 0");
  if (ramp_priority < 0.0 || ramp_priority > 1.0)
    bad("ramp priority must lie in [0, 1]");
  if (block_duration < 0.0) bad("block duration must be >= 0");
  if (block_speed < 0.0) bad("block speed must be >= 0");
  if (!(dt > 0.0)) bad("dt must be positive");
  if (knot_dt < dt) bad("knot spacing must be at least dt");
}

std::vector<VehicleTrack> synth_generate(const SynthConfig& cfg) {
  cfg.validate();

  std::mt19937_64 rng(cfg.seed);
  std::vector<Arrival> arrivals;
  draw_arrivals(rng, cfg, cfg.ramp_rate, true, arrivals);
  draw_arrivals(rng, cfg, cfg.main_rate, false, arrivals);
  if (arrivals.empty()) return {};
  std::stable_sort(arrivals.begin(), arrivals.end(),
                   [](const Arrival& a, const Arrival& b) { return a.t < b.t; });

  std::array<std::vector<double>, 4> pending;  // arrival times per lane, FIFO
  for (const Arrival& a : arrivals)
    pending[static_cast<std::size_t>(a.lane)].push_back(a.t);
  std::array<std::size_t, 4> next_pending{};

  const std::array<double, 4> v_free_lane = {
      units::kmh_to_ms(cfg.v_free[0]), units::kmh_to_ms(cfg.v_free[1]),
      units::kmh_to_ms(cfg.v_free[1]), units::kmh_to_ms(cfg.v_free[1])};
  const double v_free_out = units::kmh_to_ms(cfg.v_free[2]);
  const double v_zone = (kZoneOut - kZoneIn) / cfg.merge_delay;
  const bool throttled = cfg.junction_capacity > 0.0;
  const double slot_period = throttled ? 1.0 / cfg.junction_capacity : 0.0;

  std::vector<Car> cars;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double next_release = 0.0;
  bool outstanding = false;

  const long knot_every = std::max(1L, std::lround(cfg.knot_dt / cfg.dt));
  const long n_steps =
      std::lround(std::ceil((cfg.duration + kDrainCap) / cfg.dt));
  double t_last = 0.0;

  // Per-step chain indices, rebuilt from scratch (vehicle counts are small).
  std::array<std::vector<int>, 4> up;     // upstream per lane, x ascending
  std::array<std::vector<int>, 4> ahead;  // zone + downstream per target lane

  for (long step = 0; step < n_steps; ++step) {
    const double t = static_cast<double>(step) * cfg.dt;
    const bool blocked = cfg.block_duration > 0.0 && t >= cfg.block_start &&
                         t < cfg.block_start + cfg.block_duration;

    for (auto& v : up) v.clear();
    for (auto& v : ahead) v.clear();
    for (int i = 0; i < static_cast<int>(cars.size()); ++i) {
      const Car& c = cars[static_cast<std::size_t>(i)];
      if (c.phase == Phase::upstream)
        up[static_cast<std::size_t>(c.lane)].push_back(i);
      else if (c.phase != Phase::gone)
        ahead[static_cast<std::size_t>(c.tl)].push_back(i);
    }
    const auto by_x = [&](int a, int b) {
      return cars[static_cast<std::size_t>(a)].x <
             cars[static_cast<std::size_t>(b)].x;
    };
    for (auto& v : up) std::sort(v.begin(), v.end(), by_x);
    for (auto& v : ahead) std::sort(v.begin(), v.end(), by_x);

    // Spawn pending arrivals whose lane has cleared.
    for (std::size_t lane = 0; lane < 4; ++lane) {
      auto& queue = pending[lane];
      auto& idx = next_pending[lane];
      while (idx < queue.size() && queue[idx] <= t) {
        const double rear =
            up[lane].empty() ? kInf
                             : cars[static_cast<std::size_t>(up[lane].front())].x;
        if (rear - kSpawnX < kSpawnClearance) break;
        Car c;
        c.lane = static_cast<int>(lane);
        c.tl = lane == 0 ? 1 : static_cast<int>(lane);
        c.x = kSpawnX;
        c.v = std::min(v_free_lane[lane], safe_speed(rear - kSpawnX));
        push_knot(c, t);
        up[lane].insert(up[lane].begin(), static_cast<int>(cars.size()));
        cars.push_back(std::move(c));
        ++idx;
      }
    }

    // Hand out at most one merge slot at a time.
    if (throttled && !outstanding && t >= next_release) {
      const auto candidate = [&](std::size_t lane) -> int {
        if (up[lane].empty()) return -1;
        const int i = up[lane].back();
        return cars[static_cast<std::size_t>(i)].x >= kWaitZone ? i : -1;
      };
      const int ramp = candidate(0);
      int main = -1;
      for (std::size_t lane = 1; lane < 4; ++lane) {
        const int i = candidate(lane);
        if (i >= 0 && (main < 0 || by_x(main, i))) main = i;
      }
      int pick = -1;
      if (ramp >= 0 && main >= 0)
        pick = u01(rng) < cfg.ramp_priority ? ramp : main;
      else
        pick = ramp >= 0 ? ramp : main;
      if (pick >= 0) {
        cars[static_cast<std::size_t>(pick)].granted = true;
        outstanding = true;
      } else {
        next_release = t;  // idle slots do not accumulate
      }
    }

    // Nearest vehicle strictly ahead of x on the target-lane chain.
    const auto chain_gap = [&](int target, double x) {
      for (int i : ahead[static_cast<std::size_t>(target)]) {
        const double lx = cars[static_cast<std::size_t>(i)].x;
        if (lx > x) return lx - x;
      }
      return kInf;
    };

    // Snapshot, then integrate everyone against it.
    struct Snap {
      double x, v;
      Phase phase;
    };
    std::vector<Snap> snap(cars.size());
    for (std::size_t i = 0; i < cars.size(); ++i)
      snap[i] = {cars[i].x, cars[i].v, cars[i].phase};

    for (std::size_t lane = 0; lane < 4; ++lane) {
      for (std::size_t k = 0; k < up[lane].size(); ++k) {
        const auto i = static_cast<std::size_t>(up[lane][k]);
        Car& c = cars[i];
        const bool front = k + 1 == up[lane].size();
        // The desired speed relaxes against the own lane only; vehicles in
        // the merge zone and beyond merely cap the speed of the lane's front
        // vehicle so that entering the zone stays collision-free.
        double gap_cap = front ? chain_gap(c.tl, snap[i].x)
                               : snap[static_cast<std::size_t>(
                                          up[lane][k + 1])]
                                         .x -
                                     snap[i].x;
        double gap_want = front ? kInf : gap_cap;
        if (throttled && !c.granted && front) {
          const double barrier = kZoneIn + kJamSpacing - snap[i].x;
          gap_cap = std::min(gap_cap, barrier);
          gap_want = std::min(gap_want, barrier);
        }
        const double v_t =
            v_free_lane[lane] * std::max(0.0, 1.0 - kJamSpacing / gap_want);
        double v1 = snap[i].v + cfg.dt * (v_t - snap[i].v) / kRelaxation;
        v1 = std::clamp(v1, 0.0, safe_speed(gap_cap));
        double x1 = snap[i].x + v1 * cfg.dt;

        if (x1 >= kZoneIn && snap[i].x < kZoneIn) {
          // Entry into the merge zone; split the step at the crossing.
          const double frac = (kZoneIn - snap[i].x) / (x1 - snap[i].x);
          const double tc = t + frac * cfg.dt;
          c.x = kZoneIn;
          c.v = v1;
          if (c.granted) {
            c.granted = false;
            outstanding = false;
            next_release = tc + slot_period;
          }
          const double vz = std::min(
              v_zone, safe_speed(chain_gap(c.tl, kZoneIn)));
          c.phase = Phase::zone;
          push_knot(c, tc, v1, 0.0, vz, c.lane == 0 ? kRampSlope * vz : 0.0);
          c.v = vz;
          c.x = kZoneIn + vz * (cfg.dt - frac * cfg.dt);
        } else {
          c.x = x1;
          c.v = v1;
        }
      }
    }

    for (std::size_t tl = 1; tl < 4; ++tl) {
      for (std::size_t k = 0; k < ahead[tl].size(); ++k) {
        const auto i = static_cast<std::size_t>(ahead[tl][k]);
        Car& c = cars[i];
        double gap = k + 1 < ahead[tl].size()
                         ? snap[static_cast<std::size_t>(ahead[tl][k + 1])].x -
                               snap[i].x
                         : kInf;
        if (snap[i].phase == Phase::zone) {
          const double v1 = std::min(v_zone, safe_speed(gap));
          double x1 = snap[i].x + v1 * cfg.dt;
          if (x1 >= kZoneOut && snap[i].x < kZoneOut) {
            const double frac = (kZoneOut - snap[i].x) / (x1 - snap[i].x);
            const double tc = t + frac * cfg.dt;
            c.x = kZoneOut;
            c.v = v1;
            const double vy_in = c.lane == 0 ? kRampSlope * v1 : 0.0;
            c.phase = Phase::downstream;
            push_knot(c, tc, v1, vy_in, v1, 0.0);
            if (c.lane == 0) {
              // Merged vehicles drift into the clearest through lane.  Under
              // saturation every lane offers the same headway and they stay
              // where they merged, which keeps the zipper service split.
              for (int cand = 2; cand <= 3; ++cand) {
                const double alt = chain_gap(cand, kZoneOut);
                if (alt > gap + kJamSpacing) {
                  c.tl = cand;
                  gap = alt;
                }
              }
            }
            const double dtr = cfg.dt - frac * cfg.dt;
            const double v_t =
                v_free_out * std::max(0.0, 1.0 - kJamSpacing / gap);
            double v2 = v1 + dtr * (v_t - v1) / kRelaxation;
            v2 = std::clamp(v2, 0.0, safe_speed(gap));
            c.v = v2;
            c.x = kZoneOut + v2 * dtr;
          } else {
            c.x = x1;
            c.v = v1;
          }
        } else {  // downstream
          // A closure episode either stops traffic at the stop line or, with
          // a nonzero ceiling, turns the stretch up to it into a slow convoy.
          const bool in_block = blocked && snap[i].x <= kBlockX;
          if (in_block && cfg.block_speed == 0.0)
            gap = std::min(gap, kBlockX + kJamSpacing - snap[i].x);
          const double v_t =
              v_free_out * std::max(0.0, 1.0 - kJamSpacing / gap);
          double v1 = snap[i].v + cfg.dt * (v_t - snap[i].v) / kRelaxation;
          v1 = std::clamp(v1, 0.0, safe_speed(gap));
          if (in_block && cfg.block_speed > 0.0)
            v1 = std::min(v1, cfg.block_speed);
          c.v = v1;
          c.x = snap[i].x + v1 * cfg.dt;
          if (c.x > kRemoveX) {
            push_knot(c, t + cfg.dt);
            c.phase = Phase::gone;
          }
        }
      }
    }

    if ((step + 1) % knot_every == 0) {
      const double tk = static_cast<double>(step + 1) * cfg.dt;
      for (Car& c : cars)
        if (c.phase != Phase::gone) push_knot(c, tk);
    }

    t_last = static_cast<double>(step + 1) * cfg.dt;
    bool anyone = false;
    for (std::size_t lane = 0; lane < 4 && !anyone; ++lane)
      anyone = next_pending[lane] < pending[lane].size();
    for (const Car& c : cars)
      if (c.phase != Phase::gone) {
        anyone = true;
        break;
      }
    if (!anyone) break;
  }

  // Close the tracks of vehicles still on the road at the drain cap.
  for (Car& c : cars)
    if (c.phase != Phase::gone && !c.knots.empty() &&
        c.knots.back().t < t_last - 1e-9)
      push_knot(c, t_last);

  std::vector<VehicleTrack> tracks;
  tracks.reserve(cars.size());
  int id = 0;
  for (const Car& c : cars) {
    if (c.knots.size() < 2) continue;
    VehicleTrack track;
    track.id = ++id;
    for (std::size_t k = 0; k + 1 < c.knots.size(); ++k) {
      const Knot& a = c.knots[k];
      const Knot& b = c.knots[k + 1];
      track.segments.push_back(hermite_segment(
          a.t, b.t, {a.x, a.y}, {a.vx_out, a.vy_out}, {b.x, b.y},
          {b.vx_in, b.vy_in}));
    }
    track.validate();
    tracks.push_back(std::move(track));
  }
  return tracks;
}

}  // namespace onramp

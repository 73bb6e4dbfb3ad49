#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "onramp/trajectory.hpp"

namespace onramp {

/**
 * Configuration of the synthetic trajectory generator.
 *
 * Vehicles arrive on the ramp (road 1, one lane) and the main carriageway
 * (road 2, three lanes) as Poisson streams, optionally modulated by a slow
 * sinusoid.  Each vehicle follows its lane leader with a speed relaxing
 * toward v_free*(1 - 7.5 m / gap), the linear speed-density law of the
 * measured volumes, plus a hard no-collision cap.  The merge zone
 * [-10 m, 10 m] is crossed at the constant speed 20 m / merge_delay, so the
 * junction transit time equals merge_delay exactly; ramp vehicles slide into
 * the innermost main lane across the zone.
 *
 * Two optional throttles create congestion: junction_capacity > 0 admits at
 * most that many vehicles per second into the merge zone (contested slots go
 * to the ramp with probability ramp_priority), and a block episode halts
 * traffic downstream of the measured region for a while, spilling a queue
 * back across road 3.
 */
struct SynthConfig {
  double duration = 300.0;  // arrival window [0, duration), seconds

  double ramp_rate = 0.08;      // veh/s, road 1
  double main_rate = 0.5;       // veh/s, road 2 over all lanes
  double rate_amplitude = 0.0;  // relative sinusoidal rate modulation, [0, 1]
  double rate_period = 120.0;   // s

  std::array<double, 3> v_free = {61.2, 75.6, 75.6};  // km/h per road

  double merge_delay = 1.0;  // s to cross the 20 m merge zone

  double junction_capacity = 0.0;  // veh/s into the merge zone; 0 = unthrottled
  double ramp_priority = 0.5;      // ramp share of contested merge slots

  double block_start = 0.0;     // downstream closure episode; duration 0 = off
  double block_duration = 0.0;  // s
  double block_speed = 0.0;     // m/s ceiling inside the episode; 0 = full stop

  std::uint64_t seed = 0;

  double dt = 0.05;      // integration step, s
  double knot_dt = 0.5;  // trajectory knot spacing, s

  void validate() const;  // throws std::invalid_argument
};

/// Simulates the merge and returns one fitted piecewise-cubic track per
/// vehicle, ids in spawn order.  Deterministic per config.  Zero rates give
/// an empty dataset.
std::vector<VehicleTrack> synth_generate(const SynthConfig& cfg);

}  // namespace onramp

#pragma once

// Unit conventions across the library:
//   densities  veh/km   velocities  km/h   fluxes  veh/h   time  s
// The network solver converts to meters/seconds internally (see solver.hpp);
// everything it accepts or returns uses the data units above.

namespace onramp::units {

inline constexpr double ms_to_kmh(double v) { return v * 3.6; }
inline constexpr double kmh_to_ms(double v) { return v / 3.6; }

inline constexpr double veh_per_m_to_per_km(double rho) { return rho * 1000.0; }
inline constexpr double veh_per_km_to_per_m(double rho) { return rho / 1000.0; }

inline constexpr double veh_per_s_to_per_h(double f) { return f * 3600.0; }
inline constexpr double veh_per_h_to_per_s(double f) { return f / 3600.0; }

inline constexpr double s_to_h(double t) { return t / 3600.0; }

}  // namespace onramp::units

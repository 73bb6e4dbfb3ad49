#pragma once

#include <cmath>
#include <stdexcept>

namespace onramp {

/**
 * Concave flux law of a single road,
 *
 *   f(rho, w) = w * rho * (1 - rho / rho_max),   w in [0, v_max],
 *
 * where w is an optional speed marker carried by the traffic stream; the
 * plain flux uses w = v_max.  The critical density sits at sigma =
 * rho_max / 2 and the capacity (largest flux) is w * rho_max / 4.
 *
 * demand() and supply() are the increasing/decreasing envelopes used by the
 * junction couplings: demand follows the flux up to sigma and stays at
 * capacity beyond; supply mirrors it.
 *
 * Any consistent unit system works.  The calibration layer uses veh/km and
 * km/h; the network solver feeds veh/m and m/s.
 */
struct FundamentalDiagram {
  double v_max = 1.0;    // free-flow speed
  double rho_max = 1.0;  // jam density

  void validate() const {
    if (!(v_max > 0.0) || !std::isfinite(v_max) || !(rho_max > 0.0) ||
        !std::isfinite(rho_max))
      throw std::invalid_argument("fundamental diagram needs v_max > 0, rho_max > 0");
  }

  double sigma() const { return 0.5 * rho_max; }

  double capacity(double w) const { return 0.25 * (w * rho_max); }
  double capacity() const { return capacity(v_max); }

  double flux(double rho, double w) const {
    check_rho(rho);
    check_w(w);
    return w * rho * (1.0 - rho / rho_max);
  }
  double flux(double rho) const { return flux(rho, v_max); }

  // f'(rho) of the plain flux; used by the solver's relaxation speed.
  double flux_slope(double rho) const { return v_max * (1.0 - 2.0 * rho / rho_max); }

  double demand(double rho, double w) const {
    check_rho(rho);
    return rho <= sigma() ? flux(rho, w) : capacity(check_w(w));
  }
  double demand(double rho) const { return demand(rho, v_max); }

  double supply(double rho, double w) const {
    check_rho(rho);
    return rho <= sigma() ? capacity(check_w(w)) : flux(rho, w);
  }
  double supply(double rho) const { return supply(rho, v_max); }

  // Inverse of the plain flux on the congested branch [sigma, rho_max].
  double inverse_congested(double f) const { return invert(f, +1.0); }
  // Inverse of the plain flux on the free branch [0, sigma].
  double inverse_free(double f) const { return invert(f, -1.0); }

 private:
  static constexpr double kRelTol = 1e-9;  // slack for capacity/range overshoot

  double check_rho(double rho) const {
    if (!(rho >= -kRelTol * rho_max) || !(rho <= rho_max * (1.0 + kRelTol)))
      throw std::domain_error("density outside [0, rho_max]");
    return rho;
  }
  double check_w(double w) const {
    if (!(w >= 0.0) || !(w <= v_max * (1.0 + kRelTol)))
      throw std::domain_error("speed marker outside [0, v_max]");
    return w;
  }

  // rho_max/2 * (1 +/- sqrt(1 - f/capacity)).  An f at capacity maps to
  // sigma exactly: 1 - f/capacity evaluates to zero bitwise because
  // capacity() always computes through the same expression.
  double invert(double f, double sign) const {
    const double cap = capacity();
    if (!(f >= 0.0)) throw std::domain_error("flux must be nonnegative");
    double arg = 1.0 - f / cap;
    if (arg < 0.0) {
      if (f > cap * (1.0 + kRelTol))
        throw std::domain_error("flux exceeds road capacity");
      arg = 0.0;
    }
    return (0.5 * rho_max) * (1.0 + sign * std::sqrt(arg));
  }
};

}  // namespace onramp

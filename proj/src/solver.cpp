#include "onramp/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "onramp/units.hpp"

namespace onramp {

namespace {

// Excess beyond [0, rho_max] that still counts as roundoff [veh/m].  The
// monotone interior update cannot leave the range under the CFL condition;
// only the junction interface can, and then only at rounding scale.
constexpr double kClipTol = 1e-12;
// Excess as a fraction of rho_max past which the scheme has demonstrably
// lost monotonicity and the run aborts instead of clipping.
constexpr double kAbortFrac = 1e-3;

double left_boundary_flux(LeftBoundary mode, const FundamentalDiagram& fd,
                          double rho_edge, double inflow) {
  switch (mode) {
    case LeftBoundary::inflow:
      // Half the prescribed rate plus half the emitted flux; the ghost cell
      // is chosen so the dissipation term drops out.
      return 0.5 * (fd.flux(rho_edge) + inflow);
    case LeftBoundary::neumann:
      return fd.flux(rho_edge);
    case LeftBoundary::wall:
      return 0.0;
  }
  return 0.0;
}

// Adjacent cell average for the coupling, in veh/km.  The unit conversion
// can overshoot rho_max by an ulp; the couplings expect exact range.
double to_trace(double rho_si, const FundamentalDiagram& fd_data) {
  return std::min(units::veh_per_m_to_per_km(rho_si), fd_data.rho_max);
}

}  // namespace

void SolverConfig::validate() const {
  if (m < 2) throw std::invalid_argument("solver needs at least two cells per road");
  if (!(cfl > 0.0) || !(cfl < 1.0))
    throw std::invalid_argument("CFL number must lie in (0, 1)");
  if (!(lambda_min > 0.0) || !std::isfinite(lambda_min))
    throw std::invalid_argument("relaxation speed floor must be positive");
  if (!(s > 0.0) || !std::isfinite(s))
    throw std::invalid_argument("road length must be positive");
}

RoadDiagrams to_solver_units(const RoadDiagrams& fds) {
  RoadDiagrams out;
  for (std::size_t k = 0; k < 3; ++k) {
    fds[k].validate();
    out[k] = FundamentalDiagram{units::kmh_to_ms(fds[k].v_max),
                                units::veh_per_km_to_per_m(fds[k].rho_max)};
  }
  return out;
}

double interior_flux(const FundamentalDiagram& fd, double rho_left,
                     double rho_right, double lambda) {
  return 0.5 * (fd.flux(rho_left) + fd.flux(rho_right)) -
         0.5 * lambda * (rho_right - rho_left);
}

CouplingFluxes junction_flux(const CouplingSolver& coupling,
                             const JunctionTraces& adjacent) {
  if (!coupling) throw std::invalid_argument("junction flux needs a coupling solver");
  return coupling(adjacent);
}

double adaptive_lambda(const NetworkState& state, const CouplingFluxes& junction,
                       const RoadDiagrams& fds, const SolverConfig& config) {
  if (state.rho1.empty() || state.rho2.empty() || state.rho3.empty())
    throw std::invalid_argument("relaxation speed needs a populated state");
  double lambda = config.lambda_min;
  const std::vector<double>* roads[3] = {&state.rho1, &state.rho2, &state.rho3};
  for (std::size_t k = 0; k < 3; ++k)
    for (double rho : *roads[k])
      lambda = std::max(lambda, std::abs(fds[k].flux_slope(rho)));
  // Junction stiffness: the coupling flux can sit far from the emitted flux
  // of the adjacent cell, which steepens the local relaxation.
  const double d1 = std::abs(junction.f1 - fds[0].flux(state.rho1.back()));
  const double d2 = std::abs(junction.f2 - fds[1].flux(state.rho2.back()));
  const double d3 = std::abs(junction.f3 - fds[2].flux(state.rho3.front()));
  const double d = config.aggregation == LambdaAggregation::max
                       ? std::max({d1, d2, d3})
                       : std::min({d1, d2, d3});
  lambda = std::max(lambda, (2.0 / config.dx()) * d);
  return lambda;
}

NetworkSimulator::NetworkSimulator(const RoadDiagrams& fds, CouplingSolver coupling,
                                   BoundarySpec boundary, SolverConfig config)
    : fds_data_(fds),
      fds_(to_solver_units(fds)),
      coupling_(std::move(coupling)),
      boundary_(std::move(boundary)),
      config_(config) {
  config_.validate();
  if (!coupling_)
    throw std::invalid_argument("network simulator needs a coupling solver");
  if (boundary_.left == LeftBoundary::inflow &&
      (!boundary_.inflow1 || !boundary_.inflow2))
    throw std::invalid_argument("inflow boundary needs both inflow callables");
  const auto m = static_cast<std::size_t>(config_.m);
  state_.rho1.assign(m, 0.0);
  state_.rho2.assign(m, 0.0);
  state_.rho3.assign(m + 1, 0.0);
  flux1_.resize(m + 1);
  flux2_.resize(m + 1);
  flux3_.resize(m + 2);
}

void NetworkSimulator::set_state(NetworkState s) {
  const auto m = static_cast<std::size_t>(config_.m);
  if (s.rho1.size() != m || s.rho2.size() != m || s.rho3.size() != m + 1)
    throw std::invalid_argument("state size does not match the grid");
  if (!std::isfinite(s.t)) throw std::invalid_argument("state time not finite");
  state_ = std::move(s);
  apply_clip(state_.rho1, fds_[0].rho_max, 1);
  apply_clip(state_.rho2, fds_[1].rho_max, 2);
  apply_clip(state_.rho3, fds_[2].rho_max, 3);
}

void NetworkSimulator::set_constant_state(double rho1, double rho2, double rho3) {
  const double values[3] = {rho1, rho2, rho3};
  double si[3];
  for (std::size_t k = 0; k < 3; ++k) {
    const double cap = fds_data_[k].rho_max;
    if (!(values[k] >= 0.0) || !(values[k] <= cap * (1.0 + 1e-12)))
      throw std::invalid_argument("constant state outside [0, rho_max]");
    si[k] = std::min(units::veh_per_km_to_per_m(values[k]), fds_[k].rho_max);
  }
  std::fill(state_.rho1.begin(), state_.rho1.end(), si[0]);
  std::fill(state_.rho2.begin(), state_.rho2.end(), si[1]);
  std::fill(state_.rho3.begin(), state_.rho3.end(), si[2]);
}

void NetworkSimulator::step_once(double t_stop) {
  const int m = config_.m;
  const double dx = config_.dx();
  const double t = state_.t;
  if (t_stop >= 0.0 && t >= t_stop) return;

  // Coupling on the junction-adjacent averages, evaluated in data units.
  const JunctionTraces traces = junction_traces();
  const CouplingFluxes data = junction_flux(coupling_, traces);
  if (!std::isfinite(data.f1) || !std::isfinite(data.f2) || !std::isfinite(data.f3)) {
    std::ostringstream msg;
    msg << "coupling returned non-finite fluxes at t=" << t << " for traces ("
        << traces.rho1 << ", " << traces.rho2 << ", " << traces.rho3 << ")";
    throw std::runtime_error(msg.str());
  }
#ifndef NDEBUG
  {
    const AdmissibleSet set = demand_supply(fds_data_, traces);
    const double slack = 1e-9 * std::max(1.0, set.s3);
    assert(set.contains(data.f1, data.f2, slack));
    assert(std::abs(data.f3 - data.f1 - data.f2) <= slack);
  }
#endif
  last_junction_data_ = data;
  const CouplingFluxes jf{units::veh_per_h_to_per_s(data.f1), units::veh_per_h_to_per_s(data.f2),
                          units::veh_per_h_to_per_s(data.f3)};

  lambda_ = adaptive_lambda(state_, jf, fds_, config_);
  double dt = config_.cfl * dx / lambda_;
  if (t_stop >= 0.0 && t + dt > t_stop) dt = t_stop - t;
  dt_ = dt;
  if (!(dt > 0.0)) return;

  double in1 = 0.0, in2 = 0.0;
  if (boundary_.left == LeftBoundary::inflow) {
    const double v1 = boundary_.inflow1(t);
    const double v2 = boundary_.inflow2(t);
    if (!(v1 >= 0.0) || !std::isfinite(v1) || !(v2 >= 0.0) || !std::isfinite(v2)) {
      std::ostringstream msg;
      msg << "prescribed inflow invalid at t=" << t << ": (" << v1 << ", " << v2
          << ") veh/h";
      throw std::invalid_argument(msg.str());
    }
    in1 = units::veh_per_h_to_per_s(v1);
    in2 = units::veh_per_h_to_per_s(v2);
  }

  const std::vector<double>& r1 = state_.rho1;
  const std::vector<double>& r2 = state_.rho2;
  const std::vector<double>& r3 = state_.rho3;
  flux1_[0] = left_boundary_flux(boundary_.left, fds_[0], r1.front(), in1);
  flux2_[0] = left_boundary_flux(boundary_.left, fds_[1], r2.front(), in2);
  const double lambda = lambda_;
  parallel_for(config_.exec, m - 1, [&](std::ptrdiff_t i) {
    const auto u = static_cast<std::size_t>(i);
    flux1_[u + 1] = interior_flux(fds_[0], r1[u], r1[u + 1], lambda);
    flux2_[u + 1] = interior_flux(fds_[1], r2[u], r2[u + 1], lambda);
  });
  const auto um = static_cast<std::size_t>(m);
  flux1_[um] = jf.f1;
  flux2_[um] = jf.f2;
  flux3_[0] = jf.f3;
  parallel_for(config_.exec, m, [&](std::ptrdiff_t i) {
    const auto u = static_cast<std::size_t>(i);
    flux3_[u + 1] = interior_flux(fds_[2], r3[u], r3[u + 1], lambda);
  });
  flux3_[um + 1] = boundary_.right == RightBoundary::wall ? 0.0 : fds_[2].flux(r3[um]);

  const double c = dt / dx;
  parallel_for(config_.exec, m, [&](std::ptrdiff_t i) {
    const auto u = static_cast<std::size_t>(i);
    state_.rho1[u] -= c * (flux1_[u + 1] - flux1_[u]);
    state_.rho2[u] -= c * (flux2_[u + 1] - flux2_[u]);
  });
  parallel_for(config_.exec, m + 1, [&](std::ptrdiff_t i) {
    const auto u = static_cast<std::size_t>(i);
    state_.rho3[u] -= c * (flux3_[u + 1] - flux3_[u]);
  });

  inflow_int_ += dt * (flux1_[0] + flux2_[0]);
  outflow_int_ += dt * flux3_[um + 1];
  state_.t = t + dt;
  if (stats_.steps == 0) {
    stats_.lambda_lo = stats_.lambda_hi = lambda_;
    stats_.dt_lo = stats_.dt_hi = dt;
  } else {
    stats_.lambda_lo = std::min(stats_.lambda_lo, lambda_);
    stats_.lambda_hi = std::max(stats_.lambda_hi, lambda_);
    stats_.dt_lo = std::min(stats_.dt_lo, dt);
    stats_.dt_hi = std::max(stats_.dt_hi, dt);
  }
  ++stats_.steps;
  apply_clip(state_.rho1, fds_[0].rho_max, 1);
  apply_clip(state_.rho2, fds_[1].rho_max, 2);
  apply_clip(state_.rho3, fds_[2].rho_max, 3);
}

void NetworkSimulator::advance_to(double t_end) {
  if (!std::isfinite(t_end) || t_end < state_.t)
    throw std::invalid_argument("advance_to needs a finite time at or after now");
  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
  while (state_.t < t_end - eps) step_once(t_end);
  state_.t = t_end;
}

double NetworkSimulator::mass() const {
  const double sum = std::accumulate(state_.rho1.begin(), state_.rho1.end(), 0.0) +
                     std::accumulate(state_.rho2.begin(), state_.rho2.end(), 0.0) +
                     std::accumulate(state_.rho3.begin(), state_.rho3.end(), 0.0);
  return sum * config_.dx();
}

double NetworkSimulator::inflow_integral() const { return inflow_int_; }
double NetworkSimulator::outflow_integral() const { return outflow_int_; }

JunctionTraces NetworkSimulator::junction_traces() const {
  return JunctionTraces{to_trace(state_.rho1.back(), fds_data_[0]),
                        to_trace(state_.rho2.back(), fds_data_[1]),
                        to_trace(state_.rho3.front(), fds_data_[2])};
}

CouplingFluxes NetworkSimulator::junction_fluxes() const { return last_junction_data_; }

double NetworkSimulator::outflow() const {
  return fds_data_[2].flux(to_trace(state_.rho3.back(), fds_data_[2]));
}

std::vector<double> NetworkSimulator::profile(int road) const {
  const std::vector<double>* rho = road == 1   ? &state_.rho1
                                   : road == 2 ? &state_.rho2
                                   : road == 3 ? &state_.rho3
                                               : nullptr;
  if (rho == nullptr) throw std::out_of_range("road index must be 1, 2, or 3");
  std::vector<double> out(rho->size());
  std::transform(rho->begin(), rho->end(), out.begin(), units::veh_per_m_to_per_km);
  return out;
}

std::vector<double> NetworkSimulator::centers(int road) const {
  if (road < 1 || road > 3) throw std::out_of_range("road index must be 1, 2, or 3");
  const int m = config_.m;
  const double dx = config_.dx();
  std::vector<double> out;
  if (road == 3) {
    out.resize(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) out[static_cast<std::size_t>(j)] = j * dx;
  } else {
    out.resize(static_cast<std::size_t>(m));
    for (int j = -m; j <= -1; ++j) out[static_cast<std::size_t>(j + m)] = j * dx;
  }
  return out;
}

void NetworkSimulator::apply_clip(std::vector<double>& rho, double rho_max, int road) {
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double v = rho[i];
    if (!std::isfinite(v)) dump_and_throw(road, static_cast<int>(i), "not finite");
    const double excess = v < 0.0 ? -v : v > rho_max ? v - rho_max : 0.0;
    if (excess > 0.0) {
      if (excess > kAbortFrac * rho_max)
        dump_and_throw(road, static_cast<int>(i), "left [0, rho_max]");
      if (excess > kClipTol) {
        ++clip_count_;
        max_clip_ = std::max(max_clip_, excess);
      }
      rho[i] = std::clamp(v, 0.0, rho_max);
    }
  }
}

void NetworkSimulator::dump_and_throw(int road, int cell, const char* reason) const {
  const std::vector<double>* rho = road == 1 ? &state_.rho1
                                 : road == 2 ? &state_.rho2
                                             : &state_.rho3;
  const int j = road == 3 ? cell : cell - config_.m;
  std::ostringstream msg;
  msg << "network state " << reason << ": road " << road << ", cell j=" << j
      << ", t=" << state_.t << ", step " << stats_.steps << ", lambda=" << lambda_
      << ", dt=" << dt_ << ", neighborhood [veh/m]:";
  const int n = static_cast<int>(rho->size());
  for (int i = std::max(0, cell - 2); i <= std::min(n - 1, cell + 2); ++i)
    msg << ' ' << (*rho)[static_cast<std::size_t>(i)];
  throw std::runtime_error(msg.str());
}

BoundaryExperiment run_boundary_experiment(const BoundaryFluxData& data,
                                           const RoadDiagrams& fds,
                                           const CouplingSolver& coupling,
                                           const SolverConfig& config) {
  if (!data.inflow1 || !data.inflow2 || !data.reference3)
    throw std::invalid_argument(
        "boundary experiment needs inflow1, inflow2, and reference3");
  if (!(data.t1 > data.t0) || !std::isfinite(data.t0) || !std::isfinite(data.t1))
    throw std::invalid_argument("boundary experiment needs a horizon t1 > t0");

  BoundarySpec spec;
  spec.left = LeftBoundary::inflow;
  spec.right = RightBoundary::neumann;
  spec.inflow1 = data.inflow1;
  spec.inflow2 = data.inflow2;
  NetworkSimulator sim(fds, coupling, spec, config);
  NetworkState start = sim.state();
  start.t = data.t0;
  sim.set_state(std::move(start));

  BoundaryExperiment out;
  double num = 0.0, den = 0.0, base = 0.0;
  const double eps = 1e-12 * std::max(1.0, std::abs(data.t1));
  while (sim.time() < data.t1 - eps) {
    const double t = sim.time();
    const double predicted = sim.outflow();
    out.t.push_back(t);
    out.outflow.push_back(predicted);
    sim.step_once(data.t1);
    const double dt = sim.time() - t;
    const double ref = data.reference3(t);
    num += dt * (predicted - ref) * (predicted - ref);
    den += dt * ref * ref;
    base += dt * ref * ref;
  }
  out.t.push_back(sim.time());
  out.outflow.push_back(sim.outflow());
  if (den > 0.0) {
    out.rel_error = std::sqrt(num / den);
    out.baseline_error = std::sqrt(base / den);
  } else {
    out.rel_error = std::numeric_limits<double>::quiet_NaN();
    out.baseline_error = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

RiemannPrediction run_riemann_prediction(const RoadDiagrams& fds,
                                         const CouplingSolver& coupling,
                                         const SolverConfig& config, double horizon) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("prediction horizon must be nonnegative");
  BoundarySpec spec;
  spec.left = LeftBoundary::neumann;
  spec.right = RightBoundary::neumann;
  NetworkSimulator sim(fds, coupling, spec, config);
  sim.set_constant_state(0.7 * fds[0].rho_max, 0.5 * fds[1].rho_max,
                         0.8 * fds[2].rho_max);

  RiemannPrediction out;
  out.mass_initial = sim.mass();
  sim.advance_to(horizon);
  out.mass_final = sim.mass();
  out.inflow_integral = sim.inflow_integral();
  out.outflow_integral = sim.outflow_integral();
  out.x_in = sim.centers(1);
  out.rho1 = sim.profile(1);
  out.rho2 = sim.profile(2);
  out.x_out = sim.centers(3);
  out.rho3 = sim.profile(3);
  return out;
}

std::vector<double> run_single_road(const FundamentalDiagram& fd,
                                    const std::function<double(double)>& initial,
                                    double t_end, const SingleRoadConfig& config) {
  fd.validate();
  if (!initial) throw std::invalid_argument("single road needs an initial profile");
  if (config.m < 2) throw std::invalid_argument("single road needs at least two cells");
  if (!(config.cfl > 0.0) || !(config.cfl < 1.0))
    throw std::invalid_argument("CFL number must lie in (0, 1)");
  if (!(config.lambda_min > 0.0) || !(config.length > 0.0))
    throw std::invalid_argument("relaxation floor and length must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("end time must be nonnegative");

  const auto m = static_cast<std::size_t>(config.m);
  const double dx = config.length / static_cast<double>(config.m);
  std::vector<double> rho(m), flux(m + 1);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = initial((static_cast<double>(i) + 0.5) * dx);
    if (!(v >= 0.0) || !(v <= fd.rho_max))
      throw std::invalid_argument("initial density outside [0, rho_max]");
    rho[i] = v;
  }

  double t = 0.0;
  const double eps = 1e-12 * std::max(1.0, t_end);
  while (t < t_end - eps) {
    double lambda = config.lambda_min;
    for (double r : rho) lambda = std::max(lambda, std::abs(fd.flux_slope(r)));
    const double dt = std::min(config.cfl * dx / lambda, t_end - t);

    if (config.periodic) {
      flux[0] = interior_flux(fd, rho[m - 1], rho[0], lambda);
      flux[m] = flux[0];
    } else {
      flux[0] = fd.flux(rho.front());
      flux[m] = fd.flux(rho.back());
    }
    parallel_for(config.exec, config.m - 1, [&](std::ptrdiff_t i) {
      const auto u = static_cast<std::size_t>(i);
      flux[u + 1] = interior_flux(fd, rho[u], rho[u + 1], lambda);
    });
    const double c = dt / dx;
    parallel_for(config.exec, config.m, [&](std::ptrdiff_t i) {
      const auto u = static_cast<std::size_t>(i);
      rho[u] -= c * (flux[u + 1] - flux[u]);
    });
    for (double& r : rho) {
      if (!std::isfinite(r)) throw std::runtime_error("single road state not finite");
      r = std::clamp(r, 0.0, fd.rho_max);
    }
    t += dt;
  }
  return rho;
}

}  // namespace onramp

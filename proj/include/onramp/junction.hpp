#pragma once

#include <array>
#include <functional>

#include "onramp/fundamental_diagram.hpp"

namespace onramp {

// 2-to-1 node: roads 1 and 2 run into the junction, road 3 leaves it.
// Index 0..2 <-> road 1..3 throughout.

struct JunctionTraces {
  double rho1 = 0.0, rho2 = 0.0, rho3 = 0.0;
};

struct CouplingFluxes {
  double f1 = 0.0, f2 = 0.0, f3 = 0.0;
};

// Speed markers carried by the incoming streams / accepted downstream.
struct MarkerParams {
  double w1 = 0.0, w2 = 0.0, w3 = 0.0;
};

using RoadDiagrams = std::array<FundamentalDiagram, 3>;

MarkerParams plain_markers(const RoadDiagrams& fds);

/// Feasible flux rectangle at the node for upstream demands d1, d2 and
/// downstream supply s3:
///   0 <= f1 <= min(d1, s3 - f2),  0 <= f2 <= min(d2, s3 - f1),  f3 = f1 + f2.
struct AdmissibleSet {
  double d1 = 0.0, d2 = 0.0, s3 = 0.0;

  // Membership test, verbatim inequalities.  slack > 0 admits points within
  // that absolute distance of the boundary (clamped solver outputs can sit
  // one ulp outside the exact set).
  bool contains(double f1, double f2, double slack = 0.0) const;

  // Bijective chart of the set: theta in [0,1]^2 ->
  //   f1 = theta1 * min(d1, s3),  f2 = theta2 * min(d2, s3 - f1).
  // The result satisfies contains() with zero slack and f3 = f1 + f2 exactly.
  // A degenerate set (some bound zero) collapses the matching flux to zero.
  CouplingFluxes param_to_fluxes(double theta1, double theta2) const;
};

// Demand/supply data of the node for given boundary traces, either with the
// plain flux (w = v_max) or at the given speed markers.
AdmissibleSet demand_supply(const RoadDiagrams& fds, const JunctionTraces& traces);
AdmissibleSet demand_supply(const RoadDiagrams& fds, const JunctionTraces& traces,
                            const MarkerParams& w);

// Boundary states realizing prescribed junction fluxes as Riemann data.
struct CouplingData {
  double rho_r1 = 0.0, rho_r2 = 0.0, rho_l3 = 0.0;
};

/**
 * Maps junction fluxes back to the road densities whose Riemann problems
 * emit exactly those fluxes: on an incoming road the trace itself if it
 * already produces f, otherwise the congested-branch inverse (shock or
 * contact moving upstream); on the outgoing road the trace or the
 * free-branch inverse (wave moving downstream).
 *
 * Requires the fluxes to satisfy the demand/supply conditions of the traces
 * (checked to 1e-9 relative; violation throws std::invalid_argument).
 * Guarantees flux(rho) == f to 1e-10 relative on every road.
 */
CouplingData fluxes_to_coupling_data(const RoadDiagrams& fds,
                                     const JunctionTraces& traces,
                                     const CouplingFluxes& fluxes);

using CouplingSolver = std::function<CouplingFluxes(const JunctionTraces&)>;

/// Max-norm flux residual of re-solving the coupling on its own boundary
/// states; zero (to rounding) for a consistent solver.
double consistency_residual(const CouplingSolver& solver, const RoadDiagrams& fds,
                            const JunctionTraces& traces);

// (traces, target fluxes) pair used by calibration and training.
struct TrainingSample {
  JunctionTraces traces;
  CouplingFluxes target;
  double t = 0.0;  // [s] position in the source series, 0 for synthetic grids
};

// Relative closeness with a unit floor: |a - b| <= tol * max(1, |a|, |b|).
bool rel_close(double a, double b, double tol);

}  // namespace onramp

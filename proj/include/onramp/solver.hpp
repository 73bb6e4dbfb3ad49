#pragma once

#include <functional>
#include <vector>

#include "onramp/junction.hpp"
#include "onramp/parallel.hpp"

namespace onramp {

/**
 * Finite-volume relaxation scheme on the 2-to-1 network.
 *
 * Roads 1 and 2 live on [-s, 0], road 3 on [0, s].  Road k is split into
 * equidistant cells I_j = [(j-1/2)dx, (j+1/2)dx] with dx = s/m; the index
 * runs j = -m..-1 for the incoming roads and j = 0..m for the outgoing one,
 * so road 3 carries one extra cell and the junction sits at the interface
 * between I_-1 and I_0.  Interior interfaces use the central relaxation flux
 *
 *   F_{j-1/2} = (f(rho_j) + f(rho_{j-1}))/2 - (lambda/2)(rho_j - rho_{j-1}),
 *
 * while the junction interface takes all three fluxes from the configured
 * coupling applied to the junction-adjacent cell averages.
 *
 * The simulator computes in meters/seconds/vehicles; construction and all
 * results use the data units of the rest of the library (veh/km, km/h,
 * veh/h).  NetworkState is the one solver-unit type (veh/m), since it is the
 * object the scheme iterates on.
 */
// How the three junction flux discrepancies enter the relaxation speed.
// max resolves all three coupling fluxes; min keeps only the smallest
// discrepancy, under-resolving the other two, and exists for comparison
// runs only.
enum class LambdaAggregation { max, min };

struct SolverConfig {
  int m = 200;               // cells per incoming road (>= 2); road 3 holds m+1
  double cfl = 0.24;         // Courant number in (0, 1)
  double lambda_min = 10.0;  // [m/s] floor of the relaxation speed
  double s = 135.14;         // [m] road length (half the junction extent)
  LambdaAggregation aggregation = LambdaAggregation::max;
  Exec exec = Exec::parallel;

  void validate() const;
  double dx() const { return s / static_cast<double>(m); }
};

// Per-run summary of the adaptive quantities, for output metadata.
struct StepStats {
  long steps = 0;
  double lambda_lo = 0.0, lambda_hi = 0.0;  // [m/s]
  double dt_lo = 0.0, dt_hi = 0.0;          // [s]
};

/// km/h and veh/km to m/s and veh/m, the solver's internal system.
RoadDiagrams to_solver_units(const RoadDiagrams& fds);

enum class LeftBoundary {
  inflow,   // F = (f(rho_edge) + V(t))/2 with prescribed inflow V
  neumann,  // mirror the edge cell: F = f(rho_edge)
  wall,     // closed end: F = 0
};
enum class RightBoundary { neumann, wall };

struct BoundarySpec {
  LeftBoundary left = LeftBoundary::inflow;
  RightBoundary right = RightBoundary::neumann;
  // Prescribed left inflows [veh/h] as functions of time [s]; required (and
  // must be nonnegative wherever evaluated) when left == inflow.
  std::function<double(double)> inflow1, inflow2;
};

struct NetworkState {
  // Cell averages [veh/m]; rho1/rho2 index j = -m+i for i = 0..m-1, rho3
  // indexes j = i for i = 0..m.
  std::vector<double> rho1, rho2, rho3;
  double t = 0.0;  // [s]
};

/// Interior relaxation flux; any consistent unit system.
double interior_flux(const FundamentalDiagram& fd, double rho_left,
                     double rho_right, double lambda);

/// The j = 0 branch: evaluates the coupling on the junction-adjacent cell
/// averages.  Degenerate (empty) traces yield zero fluxes for every model.
CouplingFluxes junction_flux(const CouplingSolver& coupling,
                             const JunctionTraces& adjacent);

/**
 * Relaxation speed for the next step: the subcharacteristic bound
 * max |f'(rho)| over every cell of every road, the junction stiffness term
 * (2/dx) * max_k |F_junction^k - f^k(rho_adjacent)|, and the configured
 * floor, whichever is largest.  The time increment follows as CFL*dx/lambda.
 * All quantities in solver units.
 */
double adaptive_lambda(const NetworkState& state, const CouplingFluxes& junction,
                       const RoadDiagrams& fds, const SolverConfig& config);

class NetworkSimulator {
 public:
  // fds and the coupling speak data units; boundary inflows are veh/h.
  NetworkSimulator(const RoadDiagrams& fds, CouplingSolver coupling,
                   BoundarySpec boundary, SolverConfig config = {});

  const NetworkState& state() const { return state_; }
  double time() const { return state_.t; }

  /// Replaces the state (sizes must match the grid); densities are clipped
  /// into [0, rho_max] like any update.
  void set_state(NetworkState s);
  /// Road-wise constant initial data [veh/km].
  void set_constant_state(double rho1, double rho2, double rho3);

  /// One adaptive CFL step (optionally capped so t never passes t_stop).
  void step_once(double t_stop = -1.0);
  /// Steps until the clock lands exactly on t_end (final step clipped).
  void advance_to(double t_end);

  double mass() const;              // [veh] sum of rho*dx over all cells
  double inflow_integral() const;   // [veh] time-integrated left boundary fluxes
  double outflow_integral() const;  // [veh] time-integrated right boundary flux

  JunctionTraces junction_traces() const;  // adjacent cells [veh/km]
  CouplingFluxes junction_fluxes() const;  // last step's coupling fluxes [veh/h]
  double outflow() const;                  // current f3(rho_m) [veh/h]
  double lambda() const { return lambda_; }
  double dt() const { return dt_; }
  long steps() const { return stats_.steps; }
  StepStats stats() const { return stats_; }

  // Range-clip accounting: clips happen silently up to 1e-12 (roundoff) and
  // are counted here beyond that, with max_clip recording the worst excess.
  // A cell leaving [0, rho_max] by more than 1e-3*rho_max means the scheme
  // lost monotonicity and aborts with a state dump, as does any non-finite
  // value.
  long clip_count() const { return clip_count_; }
  double max_clip() const { return max_clip_; }

  std::vector<double> profile(int road) const;  // cell averages [veh/km]
  std::vector<double> centers(int road) const;  // cell centers [m]

 private:
  void apply_clip(std::vector<double>& rho, double rho_max, int road);
  [[noreturn]] void dump_and_throw(int road, int cell, const char* reason) const;

  RoadDiagrams fds_data_;  // as constructed
  RoadDiagrams fds_;       // solver units
  CouplingSolver coupling_;
  BoundarySpec boundary_;
  SolverConfig config_;
  NetworkState state_;
  CouplingFluxes last_junction_data_;  // veh/h
  double lambda_ = 0.0, dt_ = 0.0;
  double inflow_int_ = 0.0, outflow_int_ = 0.0;
  StepStats stats_;
  long clip_count_ = 0;
  double max_clip_ = 0.0;
  std::vector<double> flux1_, flux2_, flux3_;  // interface work arrays
};

// ---------------------------------------------------------------------------
// Validation experiments

/// Boundary inflow/reference fluxes of one dataset, all [veh/h] over [t0, t1].
struct BoundaryFluxData {
  std::function<double(double)> inflow1, inflow2;
  std::function<double(double)> reference3;  // measured outflow, for the error
  double t0 = 0.0, t1 = 0.0;
};

struct BoundaryExperiment {
  std::vector<double> t;        // step times [s]
  std::vector<double> outflow;  // predicted right boundary flux [veh/h]
  // Relative L2 errors over [t0, t1] (step-weighted quadrature): the model
  // prediction and the all-zero baseline.  NaN when the reference vanishes.
  double rel_error = 0.0;
  double baseline_error = 0.0;
};

/// Simulates the dataset horizon from zero initial data with the measured
/// left inflows and reports the predicted outflow against the reference.
BoundaryExperiment run_boundary_experiment(const BoundaryFluxData& data,
                                           const RoadDiagrams& fds,
                                           const CouplingSolver& coupling,
                                           const SolverConfig& config = {});

/// Density profiles after evolving road-wise constant Riemann data
/// (0.7, 0.5, 0.8) * rho_max under homogeneous Neumann conditions at every
/// network boundary.
struct RiemannPrediction {
  std::vector<double> x_in;         // [m] cell centers of roads 1 and 2
  std::vector<double> rho1, rho2;   // [veh/km] profiles at the horizon
  std::vector<double> x_out;        // [m] cell centers of road 3
  std::vector<double> rho3;         // [veh/km]
  double mass_initial = 0.0, mass_final = 0.0;       // [veh]
  double inflow_integral = 0.0, outflow_integral = 0.0;  // [veh]
};

RiemannPrediction run_riemann_prediction(const RoadDiagrams& fds,
                                         const CouplingSolver& coupling,
                                         const SolverConfig& config = {},
                                         double horizon = 10.0);

// ---------------------------------------------------------------------------
// Single-road scheme driver (convergence and consistency studies)

struct SingleRoadConfig {
  int m = 200;
  double cfl = 0.24;
  double lambda_min = 1.0;
  double length = 1000.0;  // [m]
  bool periodic = true;    // otherwise mirrored (Neumann) ends
  Exec exec = Exec::serial;
};

/// Evolves one road with the same relaxation scheme; fd and the initial
/// profile use one consistent unit system of the caller's choice.  Returns
/// the cell averages at t_end.
std::vector<double> run_single_road(const FundamentalDiagram& fd,
                                    const std::function<double(double)>& initial,
                                    double t_end,
                                    const SingleRoadConfig& config = {});

}  // namespace onramp

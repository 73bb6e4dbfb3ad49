#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "onramp/classical.hpp"
#include "onramp/junction.hpp"
#include "onramp/model_id.hpp"
#include "onramp/parallel.hpp"

namespace onramp {

/// Root mean square, sqrt(sum v_i^2 / n).  Throws std::domain_error on an
/// empty span.
double rms_norm(std::span<const double> v);

/// Squared RMS flux error of the coupling on one road (1, 2 or 3).
double model_error(const CouplingSolver& solver,
                   std::span<const TrainingSample> samples, int road,
                   Exec exec = Exec::parallel);

/// Total score every parameter fit minimizes: the average of the three
/// per-road squared RMS flux errors.
double model_error(const CouplingSolver& solver,
                   std::span<const TrainingSample> samples,
                   Exec exec = Exec::parallel);

/// Measured densities may exceed a fitted jam density (vehicles can pack
/// tighter than the stagnation estimate behind the rho_max bound), but the
/// couplings are only defined on [0, rho_max].  Clamps every trace into the
/// valid box of its road.
std::vector<TrainingSample> clamp_to_diagrams(std::vector<TrainingSample> samples,
                                              const RoadDiagrams& fds);

// ---------------------------------------------------------------------------
// Differential evolution

struct DeConfig {
  int population = 40;
  int generations = 300;
  std::uint64_t seed = 1;
  Exec exec = Exec::parallel;
};

struct DeResult {
  std::vector<double> best;
  double best_value = 0.0;
  std::size_t evaluations = 0;
};

/**
 * Global minimizer on a box, self-adaptive rand/1/bin scheme.  Every member
 * carries its own (F, CR); before producing its trial each is redrawn with
 * probability 0.1 (F uniform in [0.1, 1], CR uniform in [0, 1]) and the new
 * pair survives when the trial replaces the parent.  Trials are clipped to
 * the box, so a bound is reachable exactly.
 *
 * Deterministic for a fixed seed and independent of the thread count: all
 * random draws happen sequentially, only objective evaluations fan out.  The
 * objective must therefore be safe to call concurrently.
 */
DeResult differential_evolution(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> lower, std::span<const double> upper,
    const DeConfig& cfg);

// ---------------------------------------------------------------------------
// Measurement-delay estimation

struct DelayEstimate {
  double tau2 = 0.0;       // [s] shift applied to the second inflow series
  double tau3 = 0.0;       // [s] shift applied to the outflow series
  double objective = 0.0;  // rms conservation residual at the optimum
};

/**
 * Grid search for the time offsets between three flux series on a common
 * dt grid: minimizes rms(f1[i] + f2[i + tau2/dt] - f3[i + tau3/dt]) over the
 * index range where all three shifted series exist, tau2 in [-5, 5] s and
 * tau3 in [-25, 25] s in steps of one grid cell.  Ties prefer small |tau3|,
 * then small |tau2|, then the negative shift.  The series must have equal
 * length; offsets leaving no overlap are skipped.
 */
DelayEstimate estimate_delays(std::span<const double> f1,
                              std::span<const double> f2,
                              std::span<const double> f3, double dt = 0.25);

// ---------------------------------------------------------------------------
// Fundamental-diagram fit

struct FdFit {
  FundamentalDiagram fd;    // veh/km, km/h
  double objective = 0.0;   // sum of squared speed residuals
  bool degenerate = false;  // single density level in the data
};

/**
 * Least-squares fit of v(rho) = v_max (1 - rho / rho_max) to density/speed
 * samples in veh/km and km/h.  rho_max is searched by differential evolution
 * on [max rho, lanes * 1000 / 7.5] (7.5 m of road per stored vehicle and
 * lane); for fixed rho_max the optimal v_max has a closed form.
 *
 * Zero-density samples carry no speed information and are skipped.  Fewer
 * than two usable samples throw std::domain_error.  A single distinct
 * density cannot pin both parameters; the fit then fixes rho_max at the
 * upper bound, solves v_max in closed form and reports degenerate = true.
 */
FdFit fit_fundamental_diagram(std::span<const double> rho,
                              std::span<const double> speed, double lanes,
                              const DeConfig& cfg = {});

// ---------------------------------------------------------------------------
// Classical coupling fit

struct ClassicalFit {
  ClassicalParams params;
  double objective = 0.0;  // model_error at the optimum
};

/// Fits the free parameters of a classical coupling to (traces, fluxes)
/// samples by differential evolution on model_error:
///   c1:     beta in [0, 1]
///   c2:     beta in [0, 1] plus one marker per road in [0.1 v_max_k, v_max_k]
///   c3, c4: beta in [1e-3, 1 - 1e-3] (the flux split needs 0 < beta < 1)
///           plus the same three marker boxes as c2
ClassicalFit fit_classical(ModelId id, const RoadDiagrams& fds,
                           std::span<const TrainingSample> samples,
                           const DeConfig& cfg = {});

/// Inclusive n^3 grid of boundary traces over [0, rho_max_k] per road,
/// labeled by the given coupling; road 3 varies fastest.  The dataset behind
/// the train/generalize benchmark.  Requires n >= 2.
std::vector<TrainingSample> coupling_grid_dataset(const CouplingSolver& solver,
                                                  const RoadDiagrams& fds,
                                                  int points_per_axis);

}  // namespace onramp

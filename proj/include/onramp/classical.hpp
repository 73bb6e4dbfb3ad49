#pragma once

#include <iosfwd>
#include <utility>

#include "onramp/junction.hpp"
#include "onramp/model_id.hpp"

namespace onramp {

// Four closed-form junction couplings.  All return fluxes inside the
// admissible set of the traces and are consistent: re-solving on their own
// boundary states reproduces the fluxes to rounding.

/// Flow maximization with right-of-way beta: serve both demands if the
/// downstream supply allows, otherwise split the supply beta/(1-beta); a
/// split exceeding one demand is clamped to it and the remainder goes to the
/// other road.  beta in [0,1].
CouplingFluxes solve_c1(const RoadDiagrams& fds, const JunctionTraces& traces,
                        double beta);

/// C1 evaluated on the marker-parameterized demands/supply; markers at v_max
/// reduce it to C1 bitwise.
CouplingFluxes solve_c2(const RoadDiagrams& fds, const JunctionTraces& traces,
                        double beta, const MarkerParams& w);

/// Strict distribution split: f3 = min(d1/beta, d2/(1-beta), s3) and
/// f1 = beta*f3, f2 = (1-beta)*f3.  beta in (0,1) enforced.
CouplingFluxes solve_c3(const RoadDiagrams& fds, const JunctionTraces& traces,
                        double beta, const MarkerParams& w);

/// Flux-level variant of C3: identical map, separate model identity (its
/// parameters are fitted independently).
CouplingFluxes solve_c4(const RoadDiagrams& fds, const JunctionTraces& traces,
                        double beta, const MarkerParams& w);

struct ClassicalParams {
  double beta = 0.5;
  MarkerParams markers;  // ignored by c1
};

CouplingSolver make_classical_solver(ModelId id, const RoadDiagrams& fds,
                                     const ClassicalParams& p);

// Fitted-parameter file: model id, beta, markers (km/h).
void write_classical_params(std::ostream& os, ModelId id, const ClassicalParams& p);
std::pair<ModelId, ClassicalParams> read_classical_params(std::istream& is);

}  // namespace onramp

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "onramp/junction.hpp"
#include "onramp/model_id.hpp"
#include "onramp/parallel.hpp"

namespace onramp {

using Vector6 = Eigen::Matrix<double, 6, 1>;
// Weights are stored row-major so the flat parameter vector and the model
// file share one layout: per layer, W row by row, then b.
using WeightMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Feature map (rho1, rho2, rho3) -> (rho1, rho2, rho3, f1(rho1), f2(rho2),
// f3(rho3)) with the plain road fluxes.
Vector6 flux_extension(const RoadDiagrams& fds, const JunctionTraces& traces);

// Frozen z-score of the six features; scale floored at 1e-8.
struct NormalizationParams {
  Vector6 shift = Vector6::Zero();
  Vector6 scale = Vector6::Ones();

  Vector6 apply(const Vector6& x) const {
    return (x - shift).cwiseQuotient(scale);
  }
  static NormalizationParams fit(const RoadDiagrams& fds,
                                 std::span<const TrainingSample> samples);
};

struct DenseLayer {
  WeightMatrix w;     // out x in
  Eigen::VectorXd b;  // out
};

/**
 * Junction coupling driven by a sigmoid network.  The network maps the
 * normalized flux extension of the traces to chart coordinates theta in
 * (0,1)^2; the admissible-set chart turns them into fluxes, so any weight
 * setting yields an admissible, conservative coupling.
 *
 * Variants: ml1 = single layer 6->2 (14 parameters); ml2 and ml3 =
 * 6->12->75->75->2 (6911 parameters).  ml3 additionally trains against the
 * consistency penalty (see training.hpp); the architecture is ml2's.
 */
struct MlCouplingModel {
  ModelId variant = ModelId::ml1;
  RoadDiagrams fds;
  NormalizationParams norm;
  std::vector<DenseLayer> layers;

  // Glorot-uniform weights (range sqrt(6/(fan_in+fan_out))), zero biases,
  // identity normalization.
  static MlCouplingModel create(ModelId variant, const RoadDiagrams& fds,
                                std::uint64_t seed);

  static std::vector<int> layer_sizes(ModelId variant);

  Eigen::Vector2d ann_forward(const Vector6& x_normalized) const;
  Eigen::Vector2d theta(const JunctionTraces& traces) const;
  CouplingFluxes forward(const JunctionTraces& traces) const;
  CouplingSolver as_solver() const;

  std::size_t parameter_count() const;
  Eigen::VectorXd parameter_vector() const;
  void set_parameter_vector(const Eigen::VectorXd& x);

  void save(std::ostream& os) const;
  static MlCouplingModel load(std::istream& is);
};

// Mean over the batch of the per-sample flux error (1/3) sum_k (f_k - t_k)^2.
double ml_batch_loss(const MlCouplingModel& model,
                     std::span<const TrainingSample> samples,
                     Exec exec = Exec::parallel);

// Same value, plus d(loss)/d(parameters) in the flat layout.  Min-clamps in
// the chart use the first argument's subgradient at ties.
double ml_loss_and_gradient(const MlCouplingModel& model,
                            std::span<const TrainingSample> samples,
                            Eigen::VectorXd& grad, Exec exec = Exec::parallel);

// Squared self-consistency gap: mean over the batch of the squared flux
// distance between the model and its re-evaluation on the boundary states of
// its own fluxes.  Unlike the data loss this carries no 1/3 road average.
double ml_penalty(const MlCouplingModel& model,
                  std::span<const TrainingSample> samples,
                  Exec exec = Exec::parallel);

// Penalty plus gradient; grad_accum += weight * d(penalty)/d(parameters).
// The boundary states are treated as constants (no gradient through the
// flux inversion).
double ml_penalty_and_gradient(const MlCouplingModel& model,
                               std::span<const TrainingSample> samples,
                               double weight, Eigen::VectorXd& grad_accum,
                               Exec exec = Exec::parallel);

}  // namespace onramp

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "onramp/ml_model.hpp"

namespace onramp {

struct TrainConfig {
  int epochs = 500;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;   // first-moment decay
  double beta2 = 0.999;  // second-moment decay
  double eps = 1e-8;
  double penalty_weight = 0.5;  // consistency-penalty factor, ml3 only
  std::uint64_t seed = 0;       // shuffling only; init has its own seed
  // Epochs at which the test loss is evaluated; nullopt = every epoch.
  std::optional<std::vector<int>> test_eval_epochs;
  Exec exec = Exec::parallel;
};

struct TrainRecord {
  int epoch = 0;            // 0 = before the first update
  double train_loss = 0.0;  // data term over the full training set
  double train_penalty = 0.0;  // consistency penalty (ml3), else NaN
  double test_loss = 0.0;      // NaN when not evaluated this epoch
};

struct TrainResult {
  MlCouplingModel model;
  std::vector<TrainRecord> history;  // epochs + 1 rows
};

/**
 * Fits the network by stochastic gradient descent with per-coordinate step
 * sizes (Adam-style moments with a running maximum of the second moment, no
 * bias correction).  Batches are drawn by reshuffling the training set every
 * epoch; the last short batch is kept.  For the ml3 variant the minimized
 * cost is data loss + penalty_weight * consistency penalty.
 *
 * Input normalization is fitted to the training set up front and frozen into
 * the model.  Every epoch appends a history row holding the full training
 * loss; a non-finite loss aborts with std::runtime_error.  Deterministic for
 * fixed seeds and independent of the thread count.
 */
TrainResult train_model(MlCouplingModel model,
                        std::span<const TrainingSample> train,
                        std::span<const TrainingSample> test,
                        const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Train/generalize benchmark: networks learn a classical coupling on a
// coarse boundary-trace grid and are scored on a much finer one.

struct BenchmarkConfig {
  int train_points = 20;  // 20^3 training grid
  int test_points = 80;   // 80^3 evaluation grid
  double beta = 0.5;      // priority share of the reference coupling
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<ModelId> variants = {ModelId::ml1, ModelId::ml2, ModelId::ml3};
  TrainConfig train;  // empty test schedule is replaced by {0,1,10,100,last}
};

struct BenchmarkRun {
  ModelId variant = ModelId::ml1;
  std::uint64_t seed = 0;
  double final_train_loss = 0.0;
  double final_test_loss = 0.0;
  std::vector<TrainRecord> history;
};

// Loss statistics across seeds at one evaluation epoch.
struct BenchmarkSummary {
  ModelId variant = ModelId::ml1;
  int epoch = 0;
  double train_mean = 0.0;
  double train_std = 0.0;
  double test_mean = 0.0;  // NaN at epochs without a test evaluation
  double test_std = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRun> runs;         // variants x seeds, in order
  std::vector<BenchmarkSummary> summary;  // variants x evaluation epochs
  double wall_seconds = 0.0;
};

/// Trains every configured variant once per seed on the priority-merge grid
/// dataset (unit diagrams) and reports per-run final losses plus mean and
/// standard deviation across seeds at each test-evaluation epoch.
BenchmarkReport run_training_benchmark(const BenchmarkConfig& cfg);

/// Mean and sample standard deviation (zero for a single value).
std::pair<double, double> mean_std(std::span<const double> values);

}  // namespace onramp

#include <cmath>
#include <vector>

#include "doctest.h"
#include "onramp/calibration.hpp"
#include "onramp/classical.hpp"
#include "onramp/training.hpp"

using namespace onramp;

namespace {

const RoadDiagrams kUnit = {{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}};

std::vector<TrainingSample> c1_grid(int n, double beta = 0.5) {
  const auto c1 = make_classical_solver(ModelId::c1, kUnit, {beta, {}});
  return coupling_grid_dataset(c1, kUnit, n);
}

}  // namespace

TEST_CASE("history starts untrained and the loss decreases") {
  const auto train = c1_grid(6);
  TrainConfig cfg;
  cfg.epochs = 40;
  const auto res = train_model(MlCouplingModel::create(ModelId::ml1, kUnit, 1),
                               train, train, cfg);
  REQUIRE(res.history.size() == 41);
  CHECK(res.history.front().epoch == 0);
  // epoch-0 row equals the loss of the freshly initialized network
  auto fresh = MlCouplingModel::create(ModelId::ml1, kUnit, 1);
  fresh.norm = res.model.norm;
  CHECK(res.history.front().train_loss ==
        doctest::Approx(ml_batch_loss(fresh, train)).epsilon(1e-12));
  CHECK(res.history.back().train_loss < 0.25 * res.history.front().train_loss);
  // the returned model realizes the last row
  CHECK(ml_batch_loss(res.model, train) ==
        doctest::Approx(res.history.back().train_loss).epsilon(1e-12));
}

TEST_CASE("training is deterministic and thread-count independent") {
  const auto train = c1_grid(5);
  TrainConfig cfg;
  cfg.epochs = 8;
  cfg.seed = 3;
  const auto a = train_model(MlCouplingModel::create(ModelId::ml1, kUnit, 2),
                             train, train, cfg);
  const auto b = train_model(MlCouplingModel::create(ModelId::ml1, kUnit, 2),
                             train, train, cfg);
  TrainConfig serial = cfg;
  serial.exec = Exec::serial;
  const auto c = train_model(MlCouplingModel::create(ModelId::ml1, kUnit, 2),
                             train, train, serial);
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    CHECK(a.history[e].train_loss == b.history[e].train_loss);
    CHECK(a.history[e].train_loss == c.history[e].train_loss);
  }
  CHECK((a.model.parameter_vector() - c.model.parameter_vector())
            .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("test schedule controls where test loss appears") {
  const auto train = c1_grid(4);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.test_eval_epochs = std::vector<int>{0, 3, 10};
  const auto res = train_model(MlCouplingModel::create(ModelId::ml1, kUnit, 4),
                               train, train, cfg);
  for (const auto& rec : res.history) {
    const bool scheduled = rec.epoch == 0 || rec.epoch == 3 || rec.epoch == 10;
    CHECK(std::isfinite(rec.test_loss) == scheduled);
  }
}

TEST_CASE("penalty column is live only for the consistency variant") {
  const auto train = c1_grid(4);
  TrainConfig cfg;
  cfg.epochs = 2;
  const auto plain = train_model(
      MlCouplingModel::create(ModelId::ml2, kUnit, 5), train, train, cfg);
  CHECK(std::isnan(plain.history.back().train_penalty));
  const auto penalized = train_model(
      MlCouplingModel::create(ModelId::ml3, kUnit, 5), train, train, cfg);
  CHECK(std::isfinite(penalized.history.back().train_penalty));
  CHECK(penalized.history.back().train_penalty >= 0.0);
}

TEST_CASE("a deep network overfits a tiny grid") {
  const auto train = c1_grid(4);
  TrainConfig cfg;
  cfg.epochs = 500;
  const auto res = train_model(MlCouplingModel::create(ModelId::ml2, kUnit, 1),
                               train, train, cfg);
  CHECK(res.history.back().train_loss < 1e-8);
}

TEST_CASE("benchmark collapses its schedule to the epoch budget") {
  BenchmarkConfig bc;
  bc.train_points = 5;
  bc.test_points = 7;
  bc.seeds = {1, 2};
  bc.variants = {ModelId::ml1};
  bc.train.epochs = 1;
  const auto rep = run_training_benchmark(bc);
  REQUIRE(rep.runs.size() == 2);
  // evaluation epochs {0, 1, 10, 100, last} clipped to the budget
  REQUIRE(rep.summary.size() == 2);
  CHECK(rep.summary[0].epoch == 0);
  CHECK(rep.summary[1].epoch == 1);
  for (const auto& row : rep.summary) {
    CHECK(std::isfinite(row.train_mean));
    CHECK(std::isfinite(row.test_mean));
    CHECK(row.train_std >= 0.0);
  }
  for (const auto& run : rep.runs) {
    CHECK(run.final_train_loss > 0.0);
    CHECK(run.final_test_loss > 0.0);
    CHECK(run.history.front().epoch == 0);
    CHECK(run.history.back().epoch == 1);
  }
  CHECK(rep.wall_seconds > 0.0);
}

TEST_CASE("benchmark grids are train-coarse, test-fine") {
  BenchmarkConfig bc;
  bc.train_points = 4;
  bc.test_points = 6;
  bc.seeds = {1};
  bc.variants = {ModelId::ml1};
  bc.train.epochs = 30;
  const auto rep = run_training_benchmark(bc);
  const auto& run = rep.runs.front();
  // learning the reference coupling on 64 rows must transfer to the 216-row
  // grid within an order of magnitude
  CHECK(run.final_test_loss < 10.0 * std::max(run.final_train_loss, 1e-6));
}

TEST_CASE("mean_std") {
  const std::vector<double> v{1.0, 3.0};
  const auto [m, s] = mean_std(v);
  CHECK(m == 2.0);
  CHECK(s == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const std::vector<double> single{5.0};
  CHECK(mean_std(single).second == 0.0);
}

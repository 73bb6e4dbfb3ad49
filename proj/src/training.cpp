#include "onramp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "onramp/calibration.hpp"
#include "onramp/classical.hpp"

namespace onramp {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct Amsgrad {
  Eigen::VectorXd m, v, vhat;

  explicit Amsgrad(Eigen::Index n)
      : m(Eigen::VectorXd::Zero(n)),
        v(Eigen::VectorXd::Zero(n)),
        vhat(Eigen::VectorXd::Zero(n)) {}

  void step(Eigen::VectorXd& x, const Eigen::VectorXd& g, const TrainConfig& c) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    vhat = vhat.cwiseMax(v);
    x -= c.learning_rate *
         (m.array() / (vhat.array().sqrt() + c.eps)).matrix();
  }
};

bool eval_test_this_epoch(const TrainConfig& cfg, int epoch) {
  if (!cfg.test_eval_epochs) return true;
  const auto& e = *cfg.test_eval_epochs;
  return std::find(e.begin(), e.end(), epoch) != e.end();
}

}  // namespace

TrainResult train_model(MlCouplingModel model,
                        std::span<const TrainingSample> train,
                        std::span<const TrainingSample> test,
                        const TrainConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("empty training set");
  if (cfg.epochs < 0) throw std::invalid_argument("negative epoch count");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch size must be positive");
  const bool penalized = model.variant == ModelId::ml3;

  model.norm = NormalizationParams::fit(model.fds, train);

  TrainResult out;
  out.history.reserve(static_cast<std::size_t>(cfg.epochs) + 1);

  const auto record = [&](int epoch) {
    TrainRecord row;
    row.epoch = epoch;
    row.train_loss = ml_batch_loss(model, train, cfg.exec);
    row.train_penalty = penalized ? ml_penalty(model, train, cfg.exec) : kNan;
    row.test_loss = !test.empty() && eval_test_this_epoch(cfg, epoch)
                        ? ml_batch_loss(model, test, cfg.exec)
                        : kNan;
    if (!std::isfinite(row.train_loss) ||
        (penalized && !std::isfinite(row.train_penalty)))
      throw std::runtime_error("training diverged to a non-finite loss");
    out.history.push_back(row);
  };

  record(0);

  Eigen::VectorXd x = model.parameter_vector();
  Amsgrad opt(x.size());
  Eigen::VectorXd grad(x.size());
  std::mt19937_64 shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingSample> scratch(train.size());

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t i = 0; i < order.size(); ++i) scratch[i] = train[order[i]];
    for (std::size_t lo = 0; lo < scratch.size(); lo += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t hi =
          std::min(scratch.size(), lo + static_cast<std::size_t>(cfg.batch_size));
      const std::span<const TrainingSample> batch(scratch.data() + lo, hi - lo);
      ml_loss_and_gradient(model, batch, grad, cfg.exec);
      if (penalized)
        ml_penalty_and_gradient(model, batch, cfg.penalty_weight, grad, cfg.exec);
      opt.step(x, grad, cfg);
      model.set_parameter_vector(x);
    }
    record(epoch);
  }

  out.model = std::move(model);
  return out;
}

std::pair<double, double> mean_std(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("statistics of nothing");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

BenchmarkReport run_training_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.seeds.empty() || cfg.variants.empty())
    throw std::invalid_argument("benchmark needs at least one seed and variant");

  const auto t0 = std::chrono::steady_clock::now();
  const RoadDiagrams fds{};  // unit diagrams
  ClassicalParams ref;
  ref.beta = cfg.beta;
  const CouplingSolver reference = make_classical_solver(ModelId::c1, fds, ref);
  const auto train_set = coupling_grid_dataset(reference, fds, cfg.train_points);
  const auto test_set = coupling_grid_dataset(reference, fds, cfg.test_points);

  TrainConfig tc = cfg.train;
  if (!tc.test_eval_epochs) {
    std::vector<int> sched{0, 1, 10, 100, tc.epochs};
    std::erase_if(sched, [&](int e) { return e > tc.epochs; });
    std::sort(sched.begin(), sched.end());
    sched.erase(std::unique(sched.begin(), sched.end()), sched.end());
    tc.test_eval_epochs = std::move(sched);
  }

  BenchmarkReport report;
  for (ModelId variant : cfg.variants) {
    std::vector<const std::vector<TrainRecord>*> histories;
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig run_tc = tc;
      run_tc.seed = seed;
      auto res = train_model(MlCouplingModel::create(variant, fds, seed),
                             train_set, test_set, run_tc);
      BenchmarkRun run;
      run.variant = variant;
      run.seed = seed;
      run.final_train_loss = res.history.back().train_loss;
      run.final_test_loss = res.history.back().test_loss;
      run.history = std::move(res.history);
      report.runs.push_back(std::move(run));
    }
    for (const auto& r : report.runs)
      if (r.variant == variant) histories.push_back(&r.history);
    for (int epoch : *tc.test_eval_epochs) {
      if (epoch < 0 || epoch > tc.epochs) continue;  // user-supplied schedule
      std::vector<double> trains, tests;
      for (const auto* h : histories) {
        const auto& row = (*h)[static_cast<std::size_t>(epoch)];
        trains.push_back(row.train_loss);
        tests.push_back(row.test_loss);
      }
      const auto [tm, ts] = mean_std(trains);
      const auto [em, es] = mean_std(tests);
      report.summary.push_back({variant, epoch, tm, ts, em, es});
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace onramp

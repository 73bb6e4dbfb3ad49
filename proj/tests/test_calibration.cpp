#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "onramp/calibration.hpp"
#include "onramp/classical.hpp"

using namespace onramp;

namespace {
const RoadDiagrams kUnit = {{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}};
}

TEST_CASE("rms_norm") {
  const std::vector<double> v{3.0, 4.0};
  CHECK(rms_norm(v) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-15));
  CHECK_THROWS_AS(rms_norm({}), std::domain_error);
}

TEST_CASE("model_error vanishes on the labeling coupling") {
  const auto c1 = make_classical_solver(ModelId::c1, kUnit, {});
  const auto grid = coupling_grid_dataset(c1, kUnit, 7);
  CHECK(grid.size() == 343);
  CHECK(model_error(c1, grid) == 0.0);
  for (int road = 1; road <= 3; ++road) CHECK(model_error(c1, grid, road) == 0.0);
  // and is positive for a different parameter
  const auto other = make_classical_solver(ModelId::c1, kUnit, {0.31, {}});
  CHECK(model_error(other, grid) > 1e-6);
  CHECK(model_error(other, grid, Exec::serial) ==
        model_error(other, grid, Exec::parallel));
}

TEST_CASE("clamp_to_diagrams boxes the traces") {
  std::vector<TrainingSample> samples(2);
  samples[0].traces = {1.2, 0.5, -0.1};
  samples[1].traces = {0.3, 0.4, 0.5};
  const auto clamped = clamp_to_diagrams(samples, kUnit);
  CHECK(clamped[0].traces.rho1 == 1.0);
  CHECK(clamped[0].traces.rho2 == 0.5);
  CHECK(clamped[0].traces.rho3 == 0.0);
  CHECK(clamped[1].traces.rho1 == 0.3);  // untouched
}

TEST_CASE("differential evolution minimizes a shifted bowl") {
  const std::vector<double> lower{-4.0, -4.0, -4.0};
  const std::vector<double> upper{4.0, 4.0, 4.0};
  const auto objective = [](std::span<const double> x) {
    double s = 0.0;
    const double c[3] = {1.3, -0.7, 2.1};
    for (int i = 0; i < 3; ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
    return s;
  };
  DeConfig cfg;
  cfg.seed = 4;
  const auto res = differential_evolution(objective, lower, upper, cfg);
  CHECK(res.best_value <= 1e-10);
  CHECK(res.best[0] == doctest::Approx(1.3).epsilon(1e-4));
  CHECK(res.best[2] == doctest::Approx(2.1).epsilon(1e-4));
  CHECK(res.evaluations > 0);
}

TEST_CASE("differential evolution is deterministic and honors bounds") {
  const std::vector<double> lower{0.0};
  const std::vector<double> upper{1.0};
  // minimum outside the box: the solution must sit on the bound
  const auto objective = [](std::span<const double> x) {
    return (x[0] - 2.0) * (x[0] - 2.0);
  };
  DeConfig cfg;
  cfg.generations = 120;
  const auto a = differential_evolution(objective, lower, upper, cfg);
  const auto b = differential_evolution(objective, lower, upper, cfg);
  CHECK(a.best[0] == b.best[0]);
  CHECK(a.best_value == b.best_value);
  CHECK(a.best[0] == 1.0);
  // thread count must not change the result
  DeConfig serial = cfg;
  serial.exec = Exec::serial;
  const auto c = differential_evolution(objective, lower, upper, serial);
  CHECK(c.best[0] == a.best[0]);
}

TEST_CASE("delay search recovers a pulse offset") {
  // road 3 sees the road-1 pulse 9 s later; tau2 has nothing to explain
  const int n = 400;
  const double dt = 0.25;
  std::vector<double> f1(n, 0.0), f2(n, 0.0), f3(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double t = dt * static_cast<double>(i);
    f1[i] = 100.0 * std::exp(-0.5 * std::pow((t - 30.0) / 3.0, 2.0));
    f3[i] = 100.0 * std::exp(-0.5 * std::pow((t - 39.0) / 3.0, 2.0));
  }
  const auto est = estimate_delays(f1, f2, f3, dt);
  CHECK(est.tau3 == 9.0);
  CHECK(est.tau2 == 0.0);
  CHECK(est.objective <= 1e-9);
}

TEST_CASE("delay search resolves both offsets on the grid") {
  const int n = 600;
  const double dt = 0.25;
  std::vector<double> f1(n), f2(n), f3(n);
  const auto bump = [](double t, double t0, double w) {
    return std::exp(-0.5 * std::pow((t - t0) / w, 2.0));
  };
  // built so that f3(t + 7.25) = f1(t) + f2(t + 2.5) exactly
  for (int i = 0; i < n; ++i) {
    const double t = dt * static_cast<double>(i);
    f1[i] = 80.0 * bump(t, 40.0, 4.0) + 30.0 * bump(t, 90.0, 5.0);
    f2[i] = 50.0 * bump(t, 62.5, 4.0);
    f3[i] = 80.0 * bump(t, 47.25, 4.0) + 30.0 * bump(t, 97.25, 5.0) +
            50.0 * bump(t, 67.25, 4.0);
  }
  const auto est = estimate_delays(f1, f2, f3, dt);
  CHECK(est.tau2 == 2.5);
  CHECK(est.tau3 == 7.25);
  CHECK(est.objective <= 1e-9);
}

TEST_CASE("fundamental diagram fit recovers exact synthetic data") {
  const FundamentalDiagram truth{80.0, 100.0};
  std::vector<double> rho, speed;
  for (int i = 1; i <= 40; ++i) {
    const double r = 2.4 * static_cast<double>(i);  // 2.4 .. 96
    rho.push_back(r);
    speed.push_back(truth.v_max * (1.0 - r / truth.rho_max));
  }
  const auto fit = fit_fundamental_diagram(rho, speed, 1.0);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.fd.v_max == doctest::Approx(80.0).epsilon(1e-6));
  CHECK(fit.fd.rho_max == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(fit.objective <= 1e-9);
}

TEST_CASE("jam density saturates at the packing bound") {
  // nearly density-independent speeds force rho_max to the box edge,
  // 1000 / 7.5 vehicles per km and lane
  std::vector<double> rho, speed;
  for (int i = 1; i <= 30; ++i) {
    rho.push_back(0.2 * static_cast<double>(i));
    speed.push_back(60.0 - 0.001 * rho.back());
  }
  const auto fit = fit_fundamental_diagram(rho, speed, 3.0);
  CHECK(fit.fd.rho_max == 3.0 * 1000.0 / 7.5);
}

TEST_CASE("degenerate single-density data is flagged") {
  const std::vector<double> rho(10, 25.0);
  const std::vector<double> speed(10, 47.0);
  const auto fit = fit_fundamental_diagram(rho, speed, 2.0);
  CHECK(fit.degenerate);
  CHECK(fit.fd.rho_max == 2.0 * 1000.0 / 7.5);
  CHECK(fit.fd.v_max > 47.0);  // must exceed the observed speed at rho > 0
}

TEST_CASE("too little usable data throws") {
  CHECK_THROWS_AS(fit_fundamental_diagram({{0.0}}, {{50.0}}, 1.0),
                  std::domain_error);
}

TEST_CASE("classical fit recovers the generating beta") {
  const auto truth = make_classical_solver(ModelId::c1, kUnit, {0.35, {}});
  const auto grid = coupling_grid_dataset(truth, kUnit, 8);
  DeConfig cfg;
  cfg.generations = 150;
  const auto fit = fit_classical(ModelId::c1, kUnit, grid, cfg);
  CHECK(fit.params.beta == doctest::Approx(0.35).epsilon(1e-4));
  CHECK(fit.objective <= 1e-10);
}

TEST_CASE("grid dataset covers the box, road 3 fastest") {
  const auto c1 = make_classical_solver(ModelId::c1, kUnit, {});
  const auto grid = coupling_grid_dataset(c1, kUnit, 3);
  REQUIRE(grid.size() == 27);
  CHECK(grid[0].traces.rho1 == 0.0);
  CHECK(grid[1].traces.rho3 == 0.5);   // fastest axis
  CHECK(grid[3].traces.rho2 == 0.5);   // middle axis
  CHECK(grid[26].traces.rho1 == 1.0);
  CHECK(grid[26].traces.rho2 == 1.0);
  CHECK(grid[26].traces.rho3 == 1.0);
  CHECK_THROWS_AS(coupling_grid_dataset(c1, kUnit, 1), std::invalid_argument);
}

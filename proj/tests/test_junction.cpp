#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "onramp/classical.hpp"
#include "onramp/junction.hpp"

using namespace onramp;

namespace {
const RoadDiagrams kUnit = {{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}};
}

TEST_CASE("demand_supply of symmetric congested traces") {
  const auto set = demand_supply(kUnit, {0.7, 0.7, 0.7});
  CHECK(set.d1 == 0.25);
  CHECK(set.d2 == 0.25);
  CHECK(set.s3 == doctest::Approx(0.21).epsilon(1e-15));
}

TEST_CASE("admissible-set membership is the verbatim rectangle") {
  const AdmissibleSet set{0.2, 0.3, 0.4};
  CHECK(set.contains(0.2, 0.2));
  CHECK(set.contains(0.0, 0.0));
  CHECK(set.contains(0.1, 0.3));
  CHECK_FALSE(set.contains(0.21, 0.0));   // above d1
  CHECK_FALSE(set.contains(0.0, 0.31));   // above d2
  CHECK_FALSE(set.contains(0.2, 0.25));   // sum above s3
  CHECK_FALSE(set.contains(-0.01, 0.1));  // negative
  // slack admits near-miss points but not clear violations
  CHECK(set.contains(0.2005, 0.0, 1e-3));
  CHECK_FALSE(set.contains(0.25, 0.0, 1e-3));
}

TEST_CASE("chart stays inside the set and balances exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const JunctionTraces traces{u(rng), u(rng), u(rng)};
    const auto set = demand_supply(kUnit, traces);
    const auto f = set.param_to_fluxes(u(rng), u(rng));
    CHECK(set.contains(f.f1, f.f2));
    CHECK(f.f3 == f.f1 + f.f2);  // bitwise
  }
}

TEST_CASE("chart corners") {
  const AdmissibleSet set{0.2, 0.3, 0.4};
  const auto zero = set.param_to_fluxes(0.0, 0.0);
  CHECK(zero.f1 == 0.0);
  CHECK(zero.f2 == 0.0);
  const auto full = set.param_to_fluxes(1.0, 1.0);
  CHECK(full.f1 == 0.2);           // min(d1, s3)
  CHECK(full.f2 == doctest::Approx(0.2).epsilon(1e-15));  // s3 - f1 < d2
  CHECK(full.f3 == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("degenerate set collapses to zero flux") {
  // jammed outgoing road: s3 = 0
  const auto set = demand_supply(kUnit, {0.5, 0.5, 1.0});
  CHECK(set.s3 == 0.0);
  const auto f = set.param_to_fluxes(0.8, 0.7);
  CHECK(f.f1 == 0.0);
  CHECK(f.f2 == 0.0);
  CHECK(f.f3 == 0.0);
}

TEST_CASE("fluxes_to_coupling_data inverts the junction fluxes") {
  const RoadDiagrams fds = {{{61.2, 120.0}, {75.6, 400.0}, {75.6, 400.0}}};
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const JunctionTraces traces{u(rng) * 120.0, u(rng) * 400.0,
                                u(rng) * 400.0};
    const auto set = demand_supply(fds, traces);
    const auto f = set.param_to_fluxes(u(rng), u(rng));
    const auto data = fluxes_to_coupling_data(fds, traces, f);
    CHECK(rel_close(fds[0].flux(data.rho_r1), f.f1, 1e-10));
    CHECK(rel_close(fds[1].flux(data.rho_r2), f.f2, 1e-10));
    CHECK(rel_close(fds[2].flux(data.rho_l3), f.f3, 1e-10));
  }
}

TEST_CASE("boundary states keep the trace when it already emits the flux") {
  // free upstream traces whose demands are served fully
  const JunctionTraces traces{0.1, 0.1, 0.3};
  const auto set = demand_supply(kUnit, traces);
  const CouplingFluxes f{set.d1, set.d2, set.d1 + set.d2};
  REQUIRE(set.contains(f.f1, f.f2, 1e-12));
  const auto data = fluxes_to_coupling_data(kUnit, traces, f);
  CHECK(data.rho_r1 == 0.1);
  CHECK(data.rho_r2 == 0.1);
}

TEST_CASE("infeasible fluxes are rejected") {
  const JunctionTraces traces{0.7, 0.7, 0.7};
  // d1 = d2 = 0.25, s3 = 0.21: asking for both demands violates the supply
  CHECK_THROWS_AS(
      fluxes_to_coupling_data(kUnit, traces, {0.25, 0.25, 0.5}),
      std::invalid_argument);
}

TEST_CASE("consistency residual vanishes for a closed-form coupling") {
  const auto c1 = make_classical_solver(ModelId::c1, kUnit, {});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const JunctionTraces traces{u(rng), u(rng), u(rng)};
    CHECK(consistency_residual(c1, kUnit, traces) <= 1e-9);
  }
}

TEST_CASE("consistency residual detects a trace-sensitive solver") {
  // admissible by construction, but the chart coordinate depends on the raw
  // trace, so re-solving on the boundary states moves the fluxes
  const CouplingSolver wobble = [](const JunctionTraces& traces) {
    const auto set = demand_supply(kUnit, traces);
    const double theta = 0.25 + 0.5 * std::abs(std::sin(40.0 * traces.rho1));
    return set.param_to_fluxes(theta, 0.5);
  };
  double worst = 0.0;
  for (double rho1 : {0.11, 0.23, 0.37, 0.52, 0.71})
    worst = std::max(worst,
                     consistency_residual(wobble, kUnit, {rho1, 0.5, 0.4}));
  CHECK(worst > 1e-3);
}

TEST_CASE("rel_close uses a unit floor") {
  CHECK(rel_close(1e-13, 0.0, 1e-12));        // absolute near zero
  CHECK_FALSE(rel_close(1e-3, 0.0, 1e-12));
  CHECK(rel_close(1000.0, 1000.0 * (1.0 + 1e-13), 1e-12));
  CHECK_FALSE(rel_close(1000.0, 1001.0, 1e-12));
}

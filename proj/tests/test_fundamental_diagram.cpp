#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "onramp/fundamental_diagram.hpp"

using namespace onramp;

TEST_CASE("flux law closed forms") {
  const FundamentalDiagram fd{20.0, 0.4};
  CHECK(fd.sigma() == 0.2);
  CHECK(fd.capacity() == 2.0);
  CHECK(fd.flux(0.0) == 0.0);
  CHECK(fd.flux(0.4) == 0.0);
  CHECK(fd.flux(0.1) == doctest::Approx(1.5).epsilon(1e-15));
  // symmetric around sigma
  CHECK(fd.flux(0.15) == doctest::Approx(fd.flux(0.25)).epsilon(1e-15));
}

TEST_CASE("flux slope is the derivative") {
  const FundamentalDiagram fd{1.0, 1.0};
  CHECK(fd.flux_slope(0.0) == 1.0);
  CHECK(fd.flux_slope(0.5) == 0.0);
  CHECK(fd.flux_slope(1.0) == -1.0);
  const double h = 1e-7;
  for (double rho : {0.1, 0.37, 0.83}) {
    const double num = (fd.flux(rho + h) - fd.flux(rho - h)) / (2.0 * h);
    CHECK(fd.flux_slope(rho) == doctest::Approx(num).epsilon(1e-6));
  }
}

TEST_CASE("demand and supply envelopes") {
  const FundamentalDiagram fd{1.0, 1.0};
  // free side: demand follows the flux, supply sits at capacity
  CHECK(fd.demand(0.3) == doctest::Approx(fd.flux(0.3)).epsilon(1e-15));
  CHECK(fd.supply(0.3) == 0.25);
  // congested side: roles swap
  CHECK(fd.demand(0.7) == 0.25);
  CHECK(fd.supply(0.7) == doctest::Approx(0.21).epsilon(1e-15));
  // monotone: demand nondecreasing, supply nonincreasing
  double prev_d = -1.0, prev_s = 2.0;
  for (int i = 0; i <= 100; ++i) {
    const double rho = i / 100.0;
    CHECK(fd.demand(rho) >= prev_d);
    CHECK(fd.supply(rho) <= prev_s);
    prev_d = fd.demand(rho);
    prev_s = fd.supply(rho);
  }
}

TEST_CASE("speed markers scale the envelopes") {
  const FundamentalDiagram fd{2.0, 1.0};
  CHECK(fd.capacity(1.0) == 0.25);
  CHECK(fd.flux(0.25, 1.0) == doctest::Approx(0.1875).epsilon(1e-15));
  CHECK(fd.flux(0.25, 0.0) == 0.0);
  CHECK_THROWS_AS(fd.flux(0.25, 2.1), std::domain_error);
  CHECK_THROWS_AS(fd.flux(0.25, -0.1), std::domain_error);
}

TEST_CASE("branch inverses round-trip") {
  const FundamentalDiagram fd{30.0, 0.2};
  for (double rho : {0.002, 0.05, 0.09}) {
    CHECK(fd.inverse_free(fd.flux(rho)) == doctest::Approx(rho).epsilon(1e-12));
  }
  for (double rho : {0.11, 0.15, 0.198}) {
    CHECK(fd.inverse_congested(fd.flux(rho)) ==
          doctest::Approx(rho).epsilon(1e-12));
  }
  // capacity maps to sigma exactly, not near it
  CHECK(fd.inverse_free(fd.capacity()) == fd.sigma());
  CHECK(fd.inverse_congested(fd.capacity()) == fd.sigma());
  CHECK_THROWS_AS(fd.inverse_free(fd.capacity() * 1.001), std::domain_error);
  CHECK_THROWS_AS(fd.inverse_free(-1e-9), std::domain_error);
}

TEST_CASE("density range check carries relative slack") {
  const FundamentalDiagram fd{1.0, 300.0};
  // one-ulp overshoot from unit conversion must pass
  CHECK_NOTHROW(fd.flux(300.0 * (1.0 + 1e-10)));
  CHECK_NOTHROW(fd.flux(-300.0 * 1e-10));
  CHECK_THROWS_AS(fd.flux(300.0 * (1.0 + 1e-8)), std::domain_error);
  CHECK_THROWS_AS(fd.flux(-1.0), std::domain_error);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(FundamentalDiagram{75.6, 400.0}.validate());
  CHECK_THROWS_AS((FundamentalDiagram{0.0, 1.0}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((FundamentalDiagram{1.0, -2.0}.validate()),
                  std::invalid_argument);
  CHECK_THROWS_AS((FundamentalDiagram{std::nan(""), 1.0}.validate()),
                  std::invalid_argument);
}

#include "onramp/junction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace onramp {

bool rel_close(double a, double b, double tol) {
  if (a == b) return true;
  const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= tol * scale;
}

MarkerParams plain_markers(const RoadDiagrams& fds) {
  return {fds[0].v_max, fds[1].v_max, fds[2].v_max};
}

bool AdmissibleSet::contains(double f1, double f2, double slack) const {
  return f1 >= -slack && f2 >= -slack &&
         f1 <= std::min(d1, s3 - f2) + slack &&
         f2 <= std::min(d2, s3 - f1) + slack;
}

CouplingFluxes AdmissibleSet::param_to_fluxes(double theta1, double theta2) const {
  if (!(theta1 >= 0.0 && theta1 <= 1.0 && theta2 >= 0.0 && theta2 <= 1.0))
    throw std::domain_error("coupling parameters must lie in [0,1]^2");
  if (!(d1 >= 0.0 && d2 >= 0.0 && s3 >= 0.0))
    throw std::domain_error("demands and supply must be nonnegative");
  const double f1 = theta1 * std::min(d1, s3);
  const double f2 = theta2 * std::min(d2, s3 - f1);
  return {f1, f2, f1 + f2};
}

AdmissibleSet demand_supply(const RoadDiagrams& fds, const JunctionTraces& traces,
                            const MarkerParams& w) {
  return {fds[0].demand(traces.rho1, w.w1), fds[1].demand(traces.rho2, w.w2),
          fds[2].supply(traces.rho3, w.w3)};
}

AdmissibleSet demand_supply(const RoadDiagrams& fds, const JunctionTraces& traces) {
  return demand_supply(fds, traces, plain_markers(fds));
}

namespace {

constexpr double kBranchTol = 1e-9;  // trace branch acceptance
constexpr double kPostTol = 1e-10;   // round-trip guarantee

// Shared by both road directions: keep the trace when it already reproduces
// the flux to the post tolerance; otherwise take the closed-form root on the
// prescribed branch, which is exact to rounding.  A trace inside the branch
// window but outside the post tolerance falls through to the root as well.
double boundary_density(const FundamentalDiagram& fd, double trace, double f,
                        bool incoming, const char* road) {
  const double ft = fd.flux(trace);
  if (rel_close(f, ft, kBranchTol) && rel_close(f, ft, kPostTol)) return trace;
  const double fc = std::max(f, 0.0);  // condition check already bounded |f|
  const double rho = incoming ? fd.inverse_congested(fc) : fd.inverse_free(fc);
  if (!rel_close(fd.flux(rho), fc, kPostTol))
    throw std::logic_error(std::string("flux inversion failed on road ") + road);
  return rho;
}

}  // namespace

CouplingData fluxes_to_coupling_data(const RoadDiagrams& fds,
                                     const JunctionTraces& traces,
                                     const CouplingFluxes& fluxes) {
  const AdmissibleSet g = demand_supply(fds, traces);
  const auto within = [](double f, double bound) {
    return f >= -kBranchTol * std::max(1.0, bound) &&
           (f <= bound || rel_close(f, bound, kBranchTol));
  };
  if (!within(fluxes.f1, g.d1) || !within(fluxes.f2, g.d2) ||
      !within(fluxes.f1 + fluxes.f2, g.s3) || !within(fluxes.f3, g.s3))
    throw std::invalid_argument(
        "junction fluxes violate the demand/supply conditions of the traces");

  return {boundary_density(fds[0], traces.rho1, fluxes.f1, true, "1"),
          boundary_density(fds[1], traces.rho2, fluxes.f2, true, "2"),
          boundary_density(fds[2], traces.rho3, fluxes.f3, false, "3")};
}

double consistency_residual(const CouplingSolver& solver, const RoadDiagrams& fds,
                            const JunctionTraces& traces) {
  const CouplingFluxes first = solver(traces);
  const CouplingData data = fluxes_to_coupling_data(fds, traces, first);
  const CouplingFluxes second = solver({data.rho_r1, data.rho_r2, data.rho_l3});
  return std::max({std::fabs(first.f1 - second.f1), std::fabs(first.f2 - second.f2),
                   std::fabs(first.f3 - second.f3)});
}

}  // namespace onramp

#include "onramp/classical.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace onramp {

namespace {

void check_beta_closed(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::domain_error("right-of-way parameter must lie in [0,1]");
}

CouplingFluxes priority_merge(const AdmissibleSet& g, double beta) {
  if (g.d1 + g.d2 <= g.s3) return {g.d1, g.d2, g.d1 + g.d2};
  const double t1 = beta * g.s3;
  const double t2 = (1.0 - beta) * g.s3;
  const bool over1 = t1 > g.d1;
  const bool over2 = t2 > g.d2;
  if (over1 && over2)
    throw std::logic_error("both split fluxes exceed their demands; "
                           "impossible when d1 + d2 > s3");
  if (over1) return {g.d1, g.s3 - g.d1, g.s3};
  if (over2) return {g.s3 - g.d2, g.d2, g.s3};
  return {t1, t2, g.s3};
}

}  // namespace

CouplingFluxes solve_c1(const RoadDiagrams& fds, const JunctionTraces& traces,
                        double beta) {
  check_beta_closed(beta);
  return priority_merge(demand_supply(fds, traces), beta);
}

CouplingFluxes solve_c2(const RoadDiagrams& fds, const JunctionTraces& traces,
                        double beta, const MarkerParams& w) {
  check_beta_closed(beta);
  return priority_merge(demand_supply(fds, traces, w), beta);
}

CouplingFluxes solve_c3(const RoadDiagrams& fds, const JunctionTraces& traces,
                        double beta, const MarkerParams& w) {
  if (!(beta > 0.0 && beta < 1.0))
    throw std::domain_error("distribution parameter must lie strictly in (0,1)");
  const AdmissibleSet g = demand_supply(fds, traces, w);
  const double f3 = std::min({g.d1 / beta, g.d2 / (1.0 - beta), g.s3});
  return {beta * f3, (1.0 - beta) * f3, f3};
}

CouplingFluxes solve_c4(const RoadDiagrams& fds, const JunctionTraces& traces,
                        double beta, const MarkerParams& w) {
  return solve_c3(fds, traces, beta, w);
}

CouplingSolver make_classical_solver(ModelId id, const RoadDiagrams& fds,
                                     const ClassicalParams& p) {
  switch (id) {
    case ModelId::c1:
      return [fds, p](const JunctionTraces& t) { return solve_c1(fds, t, p.beta); };
    case ModelId::c2:
      return [fds, p](const JunctionTraces& t) {
        return solve_c2(fds, t, p.beta, p.markers);
      };
    case ModelId::c3:
      return [fds, p](const JunctionTraces& t) {
        return solve_c3(fds, t, p.beta, p.markers);
      };
    case ModelId::c4:
      return [fds, p](const JunctionTraces& t) {
        return solve_c4(fds, t, p.beta, p.markers);
      };
    default:
      throw std::invalid_argument("not a classical model id");
  }
}

void write_classical_params(std::ostream& os, ModelId id, const ClassicalParams& p) {
  os.precision(17);
  os << "model = " << to_string(id) << "\n"
     << "beta = " << p.beta << "\n"
     << "w1 = " << p.markers.w1 << "\n"
     << "w2 = " << p.markers.w2 << "\n"
     << "w3 = " << p.markers.w3 << "\n";
}

std::pair<ModelId, ClassicalParams> read_classical_params(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  const auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw std::runtime_error(std::string("parameter file misses key: ") + key);
    return it->second;
  };
  ClassicalParams p;
  p.beta = std::stod(need("beta"));
  p.markers = {std::stod(need("w1")), std::stod(need("w2")), std::stod(need("w3"))};
  return {parse_model_id(need("model")), p};
}

}  // namespace onramp

#include "onramp/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace onramp {

double rms_norm(std::span<const double> v) {
  if (v.empty()) throw std::domain_error("rms of an empty sequence");
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

double model_error(const CouplingSolver& solver,
                   std::span<const TrainingSample> samples, int road, Exec exec) {
  if (samples.empty()) throw std::domain_error("model error of an empty sample set");
  if (road < 1 || road > 3) throw std::invalid_argument("road must be 1, 2 or 3");
  const std::size_t n = samples.size();
  const double s = parallel_sum(exec, n, [&](std::size_t i) {
    const auto& smp = samples[i];
    const CouplingFluxes f = solver(smp.traces);
    const double e = road == 1   ? f.f1 - smp.target.f1
                     : road == 2 ? f.f2 - smp.target.f2
                                 : f.f3 - smp.target.f3;
    return e * e;
  });
  return s / static_cast<double>(n);
}

double model_error(const CouplingSolver& solver,
                   std::span<const TrainingSample> samples, Exec exec) {
  if (samples.empty()) throw std::domain_error("model error of an empty sample set");
  const std::size_t n = samples.size();
  const double s = parallel_sum(exec, n, [&](std::size_t i) {
    const auto& smp = samples[i];
    const CouplingFluxes f = solver(smp.traces);
    const double e1 = f.f1 - smp.target.f1;
    const double e2 = f.f2 - smp.target.f2;
    const double e3 = f.f3 - smp.target.f3;
    return (e1 * e1 + e2 * e2 + e3 * e3) / 3.0;
  });
  return s / static_cast<double>(n);
}

std::vector<TrainingSample> clamp_to_diagrams(std::vector<TrainingSample> samples,
                                              const RoadDiagrams& fds) {
  for (TrainingSample& s : samples) {
    s.traces.rho1 = std::clamp(s.traces.rho1, 0.0, fds[0].rho_max);
    s.traces.rho2 = std::clamp(s.traces.rho2, 0.0, fds[1].rho_max);
    s.traces.rho3 = std::clamp(s.traces.rho3, 0.0, fds[2].rho_max);
  }
  return samples;
}

DeResult differential_evolution(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> lower, std::span<const double> upper,
    const DeConfig& cfg) {
  const std::size_t dim = lower.size();
  if (dim == 0 || upper.size() != dim)
    throw std::invalid_argument("bound vectors must be nonempty and equally long");
  for (std::size_t j = 0; j < dim; ++j)
    if (!(lower[j] <= upper[j]))
      throw std::invalid_argument("lower bound exceeds upper bound");
  if (cfg.population < 4)
    throw std::invalid_argument("population must hold at least 4 members");
  if (cfg.generations < 0) throw std::invalid_argument("negative generation count");

  const int np = cfg.population;
  std::mt19937_64 gen(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> umember(0, np - 1);
  std::uniform_int_distribution<int> ucoord(0, static_cast<int>(dim) - 1);

  std::vector<std::vector<double>> pop(static_cast<std::size_t>(np),
                                       std::vector<double>(dim));
  std::vector<double> val(static_cast<std::size_t>(np));
  std::vector<double> f_mem(static_cast<std::size_t>(np), 0.5);
  std::vector<double> cr_mem(static_cast<std::size_t>(np), 0.9);

  for (auto& x : pop)
    for (std::size_t j = 0; j < dim; ++j)
      x[j] = lower[j] + u01(gen) * (upper[j] - lower[j]);

  std::size_t evals = 0;
  parallel_for(cfg.exec, static_cast<std::size_t>(np),
               [&](std::size_t i) { val[i] = objective(pop[i]); });
  evals += static_cast<std::size_t>(np);

  std::vector<std::vector<double>> trial(static_cast<std::size_t>(np),
                                         std::vector<double>(dim));
  std::vector<double> trial_val(static_cast<std::size_t>(np));
  std::vector<double> f_new(static_cast<std::size_t>(np)), cr_new(static_cast<std::size_t>(np));

  for (int g = 0; g < cfg.generations; ++g) {
    for (int i = 0; i < np; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      f_new[ui] = u01(gen) < 0.1 ? 0.1 + 0.9 * u01(gen) : f_mem[ui];
      cr_new[ui] = u01(gen) < 0.1 ? u01(gen) : cr_mem[ui];
      int r1, r2, r3;
      do r1 = umember(gen); while (r1 == i);
      do r2 = umember(gen); while (r2 == i || r2 == r1);
      do r3 = umember(gen); while (r3 == i || r3 == r1 || r3 == r2);
      const int jrand = ucoord(gen);
      const auto& a = pop[static_cast<std::size_t>(r1)];
      const auto& b = pop[static_cast<std::size_t>(r2)];
      const auto& c = pop[static_cast<std::size_t>(r3)];
      for (std::size_t j = 0; j < dim; ++j) {
        const bool cross = u01(gen) < cr_new[ui] || static_cast<int>(j) == jrand;
        trial[ui][j] =
            cross ? std::clamp(a[j] + f_new[ui] * (b[j] - c[j]), lower[j], upper[j])
                  : pop[ui][j];
      }
    }
    parallel_for(cfg.exec, static_cast<std::size_t>(np),
                 [&](std::size_t i) { trial_val[i] = objective(trial[i]); });
    evals += static_cast<std::size_t>(np);
    for (int i = 0; i < np; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (trial_val[ui] <= val[ui]) {
        pop[ui].swap(trial[ui]);
        val[ui] = trial_val[ui];
        f_mem[ui] = f_new[ui];
        cr_mem[ui] = cr_new[ui];
      }
    }
  }

  std::size_t ibest = 0;
  for (std::size_t i = 1; i < static_cast<std::size_t>(np); ++i)
    if (val[i] < val[ibest]) ibest = i;
  return {pop[ibest], val[ibest], evals};
}

DelayEstimate estimate_delays(std::span<const double> f1,
                              std::span<const double> f2,
                              std::span<const double> f3, double dt) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(f1.size());
  if (f2.size() != f1.size() || f3.size() != f1.size())
    throw std::invalid_argument("series must have equal length");
  if (n == 0) throw std::domain_error("cannot estimate delays from empty series");
  if (!(dt > 0.0)) throw std::domain_error("dt must be positive");

  const std::ptrdiff_t k2max = std::lround(5.0 / dt);
  const std::ptrdiff_t k3max = std::lround(25.0 / dt);

  bool found = false;
  DelayEstimate best;
  auto better = [](double obj, double t2, double t3, const DelayEstimate& cur) {
    if (obj != cur.objective) return obj < cur.objective;
    if (std::abs(t3) != std::abs(cur.tau3)) return std::abs(t3) < std::abs(cur.tau3);
    if (std::abs(t2) != std::abs(cur.tau2)) return std::abs(t2) < std::abs(cur.tau2);
    if (t3 != cur.tau3) return t3 < cur.tau3;
    return t2 < cur.tau2;
  };

  for (std::ptrdiff_t k3 = -k3max; k3 <= k3max; ++k3) {
    for (std::ptrdiff_t k2 = -k2max; k2 <= k2max; ++k2) {
      const std::ptrdiff_t lo = std::max({std::ptrdiff_t{0}, -k2, -k3});
      const std::ptrdiff_t hi = n - std::max({std::ptrdiff_t{0}, k2, k3});
      if (hi <= lo) continue;
      double s = 0.0;
      for (std::ptrdiff_t i = lo; i < hi; ++i) {
        const double r = f1[static_cast<std::size_t>(i)] +
                         f2[static_cast<std::size_t>(i + k2)] -
                         f3[static_cast<std::size_t>(i + k3)];
        s += r * r;
      }
      const double obj = std::sqrt(s / static_cast<double>(hi - lo));
      const double t2 = static_cast<double>(k2) * dt;
      const double t3 = static_cast<double>(k3) * dt;
      if (!found || better(obj, t2, t3, best)) {
        best = {t2, t3, obj};
        found = true;
      }
    }
  }
  if (!found) throw std::domain_error("no offset leaves the series overlapping");
  return best;
}

namespace {

// Optimal v_max for fixed rho_max: minimize sum (v_i - v_max a_i)^2 with
// a_i = 1 - rho_i / rho_max.
double closed_form_vmax(std::span<const double> rho, std::span<const double> v,
                        double rho_max) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double a = 1.0 - rho[i] / rho_max;
    num += a * v[i];
    den += a * a;
  }
  if (!(den > 0.0)) return 0.0;
  return num / den;
}

double speed_sse(std::span<const double> rho, std::span<const double> v,
                 double rho_max, double v_max) {
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double r = v[i] - v_max * (1.0 - rho[i] / rho_max);
    s += r * r;
  }
  return s;
}

}  // namespace

FdFit fit_fundamental_diagram(std::span<const double> rho,
                              std::span<const double> speed, double lanes,
                              const DeConfig& cfg) {
  if (rho.size() != speed.size())
    throw std::invalid_argument("density and speed spans must have equal length");
  if (!(lanes > 0.0)) throw std::domain_error("lane count must be positive");

  std::vector<double> r, v;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!std::isfinite(rho[i]) || !std::isfinite(speed[i])) continue;
    if (rho[i] <= 0.0) continue;  // an empty road tells nothing about speed
    r.push_back(rho[i]);
    v.push_back(speed[i]);
  }
  if (r.size() < 2)
    throw std::domain_error("need at least two samples with positive density");

  const double cap_density = lanes * 1000.0 / 7.5;  // 7.5 m per stored vehicle
  const double rho_obs = *std::max_element(r.begin(), r.end());

  FdFit fit;
  const std::set<double> distinct(r.begin(), r.end());
  if (distinct.size() == 1) {
    fit.degenerate = true;
    fit.fd.rho_max = cap_density;
    fit.fd.v_max = std::max(closed_form_vmax(r, v, cap_density), 1e-9);
    fit.objective = speed_sse(r, v, fit.fd.rho_max, fit.fd.v_max);
    fit.fd.validate();
    return fit;
  }

  // Observed densities above the storage cap would invert the bounds; the
  // search then collapses onto the cap.
  const double lo = std::min(rho_obs, cap_density);
  const double hi = cap_density;
  const auto objective = [&](std::span<const double> x) {
    return speed_sse(r, v, x[0], closed_form_vmax(r, v, x[0]));
  };
  const DeResult de = differential_evolution(objective, std::span(&lo, 1),
                                             std::span(&hi, 1), cfg);
  fit.fd.rho_max = de.best[0];
  fit.fd.v_max = std::max(closed_form_vmax(r, v, fit.fd.rho_max), 1e-9);
  fit.objective = speed_sse(r, v, fit.fd.rho_max, fit.fd.v_max);
  fit.fd.validate();
  return fit;
}

ClassicalFit fit_classical(ModelId id, const RoadDiagrams& fds,
                           std::span<const TrainingSample> samples,
                           const DeConfig& cfg) {
  if (!is_classical(id)) throw std::invalid_argument("not a classical coupling id");
  for (const auto& fd : fds) fd.validate();

  // c3 and c4 divide by beta and 1 - beta, so their box stays off {0,1}.
  const double beta_lo = id == ModelId::c3 || id == ModelId::c4 ? 1e-3 : 0.0;
  std::vector<double> lower = {beta_lo};
  std::vector<double> upper = {1.0 - beta_lo};
  if (id != ModelId::c1) {  // marker per road for the second-order rules
    for (const auto& fd : fds) {
      lower.push_back(0.1 * fd.v_max);
      upper.push_back(fd.v_max);
    }
  }

  const auto to_params = [&](std::span<const double> x) {
    ClassicalParams p;
    p.beta = x[0];
    p.markers = id == ModelId::c1 ? plain_markers(fds)
                                  : MarkerParams{x[1], x[2], x[3]};
    return p;
  };
  const auto objective = [&](std::span<const double> x) {
    return model_error(make_classical_solver(id, fds, to_params(x)), samples,
                       Exec::serial);
  };
  const DeResult de = differential_evolution(objective, lower, upper, cfg);

  ClassicalFit fit;
  fit.params = to_params(de.best);
  fit.objective = de.best_value;
  return fit;
}

std::vector<TrainingSample> coupling_grid_dataset(const CouplingSolver& solver,
                                                  const RoadDiagrams& fds,
                                                  int points_per_axis) {
  if (points_per_axis < 2)
    throw std::invalid_argument("grid needs at least two points per axis");
  const int n = points_per_axis;
  // i / (n - 1) hits 0 and 1 exactly, so the grid never leaves [0, rho_max].
  const auto frac = [n](int i) {
    return static_cast<double>(i) / static_cast<double>(n - 1);
  };
  std::vector<TrainingSample> out;
  out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) *
              static_cast<std::size_t>(n));
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int i3 = 0; i3 < n; ++i3) {
        TrainingSample s;
        s.traces = {fds[0].rho_max * frac(i1), fds[1].rho_max * frac(i2),
                    fds[2].rho_max * frac(i3)};
        s.target = solver(s.traces);
        out.push_back(s);
      }
  return out;
}

}  // namespace onramp

// Serial vs OpenMP timings of the hot kernels: batch coupling evaluation,
// network loss/gradient, trajectory measurement and the network solver.
// Each row reports the best of a few repetitions per execution mode.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>
#include <vector>

#include "onramp/calibration.hpp"
#include "onramp/classical.hpp"
#include "onramp/control_volume.hpp"
#include "onramp/empirical.hpp"
#include "onramp/ml_model.hpp"
#include "onramp/solver.hpp"
#include "onramp/synth.hpp"
#include "onramp/training.hpp"

namespace {

volatile double g_sink = 0.0;  // keeps results observable

template <class F>
double best_seconds(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    g_sink = f();
    const std::chrono::duration<double> dt =
        std::chrono::steady_clock::now() - t0;
    best = std::min(best, dt.count());
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s) {
  std::printf("%-28s %10.2f ms %10.2f ms %8.2fx\n", name, serial_s * 1e3,
              parallel_s * 1e3, serial_s / parallel_s);
}

}  // namespace

int main() {
  using namespace onramp;

  std::printf("threads available: %u\n\n",
              std::thread::hardware_concurrency());
  std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  const RoadDiagrams unit = {{{1.0, 1.0}, {1.0, 1.0}, {1.0, 1.0}}};

  // Batch coupling evaluation on a dense boundary-trace grid.
  {
    const auto c1 = make_classical_solver(ModelId::c1, unit, {});
    const auto grid = coupling_grid_dataset(c1, unit, 100);  // 1e6 rows
    const double s =
        best_seconds(3, [&] { return model_error(c1, grid, Exec::serial); });
    const double p =
        best_seconds(3, [&] { return model_error(c1, grid, Exec::parallel); });
    report("coupling batch 1e6", s, p);
  }

  // Full-batch loss + gradient of the deep variant.
  {
    const auto c1 = make_classical_solver(ModelId::c1, unit, {});
    const auto grid = coupling_grid_dataset(c1, unit, 20);  // 8e3 rows
    const auto model = MlCouplingModel::create(ModelId::ml2, unit, 1);
    Eigen::VectorXd grad(model.parameter_count());
    const double s = best_seconds(3, [&] {
      return ml_loss_and_gradient(model, grid, grad, Exec::serial);
    });
    const double p = best_seconds(3, [&] {
      return ml_loss_and_gradient(model, grid, grad, Exec::parallel);
    });
    report("ml2 loss+gradient 8e3", s, p);
  }

  // Control-volume measurement of one synthetic recording.
  {
    SynthConfig cfg;
    cfg.duration = 300.0;
    cfg.seed = 7;
    const auto tracks = synth_generate(cfg);
    const auto volume = default_control_volumes()[1];
    const SeriesGrid grid{0.0, 0.25, 1200};
    const double s = best_seconds(3, [&] {
      return measure_volume(tracks, volume, grid, Exec::serial).density[600];
    });
    const double p = best_seconds(3, [&] {
      return measure_volume(tracks, volume, grid, Exec::parallel).density[600];
    });
    report("measure 300 s recording", s, p);
  }

  // Finite-volume network at a fine resolution.
  {
    const RoadDiagrams fds = {{{61.2, 120.0}, {75.6, 400.0}, {75.6, 400.0}}};
    const auto c1 = make_classical_solver(ModelId::c1, fds, {});
    const auto run = [&](Exec exec) {
      SolverConfig sc;
      sc.m = 2000;
      sc.exec = exec;
      BoundarySpec bc;
      bc.left = LeftBoundary::neumann;
      NetworkSimulator sim(fds, c1, bc, sc);
      sim.set_constant_state(40.0, 200.0, 100.0);
      sim.advance_to(5.0);
      return sim.mass();
    };
    const double s = best_seconds(2, [&] { return run(Exec::serial); });
    const double p = best_seconds(2, [&] { return run(Exec::parallel); });
    report("solver m=2000, 5 s", s, p);
  }

  (void)g_sink;
  return 0;
}

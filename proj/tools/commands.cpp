#include "commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "onramp/calibration.hpp"
#include "onramp/classical.hpp"
#include "onramp/control_volume.hpp"
#include "onramp/empirical.hpp"
#include "onramp/manifest.hpp"
#include "onramp/ml_model.hpp"
#include "onramp/model_id.hpp"
#include "onramp/solver.hpp"
#include "onramp/synth.hpp"
#include "onramp/training.hpp"
#include "onramp/trajectory.hpp"
#include "onramp/units.hpp"

namespace onramp::tools {
namespace {

constexpr double kMeasureDt = 0.25;  // [s] measurement grid of every dataset
constexpr double kKdeGridDt = 0.05;  // [s] precomputed boundary-rate grid

std::string two_digits(int id) {
  std::ostringstream os;
  os << std::setw(2) << std::setfill('0') << id;
  return os.str();
}

std::filesystem::path data_dir(const RunOptions& o) { return o.out / "data"; }
std::filesystem::path fits_dir(const RunOptions& o) { return o.out / "fits"; }
std::filesystem::path reports_dir(const RunOptions& o) { return o.out / "reports"; }

std::filesystem::path tracks_path(const RunOptions& o, int id) {
  return data_dir(o) / ("tracks_" + two_digits(id) + ".csv");
}

std::filesystem::path manifest_path(const RunOptions& o) {
  return data_dir(o) / "manifest.csv";
}

std::string stamp(const RunOptions& o) {
  return artifact_header(o.config, o.seed);
}

std::vector<DatasetInfo> load_manifest(const RunOptions& o) {
  auto is = open_input(manifest_path(o));
  return read_manifest(is);
}

void store_manifest(const RunOptions& o, std::span<const DatasetInfo> rows) {
  auto os = open_output(manifest_path(o));
  os << stamp(o) << '\n';
  write_manifest(os, rows);
}

std::vector<VehicleTrack> load_tracks(const RunOptions& o, int id) {
  auto is = open_input(tracks_path(o, id));
  return read_tracks(is);
}

/// Density/speed/flux series of the three measurement volumes on the shared
/// quarter-second grid covering [0, duration).
std::array<EmpiricalSeries, 3> measure_dataset(
    std::span<const VehicleTrack> tracks, double duration) {
  const auto volumes = default_control_volumes();
  const SeriesGrid grid{0.0, kMeasureDt,
                        static_cast<int>(duration / kMeasureDt)};
  if (grid.n < 1) throw std::invalid_argument("dataset duration too short");
  std::array<EmpiricalSeries, 3> series;
  for (int r = 0; r < 3; ++r)
    series[r] = measure_volume(tracks, volumes[r], grid);
  return series;
}

std::array<EmpiricalSeries, 3> aligned_series(const RunOptions& o,
                                              const DatasetInfo& info) {
  const auto tracks = load_tracks(o, info.id);
  return apply_delays(measure_dataset(tracks, info.duration_s), info.tau2,
                      info.tau3);
}

/// Pooled (traces, fluxes) rows of every dataset in one split.
std::vector<TrainingSample> split_samples(const RunOptions& o,
                                          std::span<const DatasetInfo> manifest,
                                          Split split) {
  std::vector<TrainingSample> pool;
  for (const auto& info : manifest) {
    if (info.split != split) continue;
    auto rows = to_training_samples(aligned_series(o, info));
    pool.insert(pool.end(), rows.begin(), rows.end());
  }
  if (pool.empty())
    throw std::runtime_error("no datasets tagged '" + to_string(split) +
                             "' in the manifest");
  return pool;
}

DeConfig de_config(const RunOptions& o) {
  DeConfig de;
  de.population = o.config.get_int("de_population", de.population);
  de.generations = o.config.get_int("de_generations", de.generations);
  de.seed = o.seed == 0 ? 1 : o.seed;
  return de;
}

TrainConfig train_config(const RunOptions& o) {
  TrainConfig tc;
  tc.epochs = o.epochs;
  tc.batch_size = o.config.get_int("batch_size", tc.batch_size);
  tc.learning_rate = o.config.get_double("learning_rate", tc.learning_rate);
  tc.penalty_weight = o.config.get_double("penalty_weight", tc.penalty_weight);
  tc.seed = o.seed;
  return tc;
}

SolverConfig solver_config(const RunOptions& o) {
  SolverConfig sc;
  sc.m = o.config.get_int("cells", sc.m);
  sc.cfl = o.config.get_double("cfl", sc.cfl);
  sc.lambda_min = o.config.get_double("lambda_min", sc.lambda_min);
  sc.s = o.config.get_double("road_length", sc.s);
  const auto agg = o.config.get_string("lambda_aggregation", "max");
  if (agg == "min")
    sc.aggregation = LambdaAggregation::min;
  else if (agg != "max")
    throw std::invalid_argument("lambda_aggregation must be max or min, got '" +
                                agg + "'");
  sc.validate();
  return sc;
}

std::vector<ModelId> parse_filter(const std::string& filter,
                                  std::span<const ModelId> all,
                                  const std::string& kind) {
  if (filter.empty()) return {all.begin(), all.end()};
  const ModelId id = parse_model_id(filter);
  if (std::find(all.begin(), all.end(), id) == all.end())
    throw std::invalid_argument("'" + filter + "' is not " + kind);
  return {id};
}

std::vector<ModelId> classical_selection(const std::string& filter) {
  static const std::array all = {ModelId::c1, ModelId::c2, ModelId::c3,
                                 ModelId::c4};
  return parse_filter(filter, all, "a classical coupling");
}

std::vector<ModelId> ml_selection(const std::string& filter) {
  static const std::array all = {ModelId::ml1, ModelId::ml2, ModelId::ml3};
  return parse_filter(filter, all, "an ml variant");
}

std::vector<ModelId> full_selection(const std::string& filter) {
  static const std::array all = {ModelId::c1,  ModelId::c2,  ModelId::c3,
                                 ModelId::c4,  ModelId::ml1, ModelId::ml2,
                                 ModelId::ml3};
  return parse_filter(filter, all, "a coupling model");
}

// ---------------------------------------------------------------------------
// Fundamental-diagram table (fits/fd.csv)

void write_fd_table(const RunOptions& o, const std::array<FdFit, 3>& fits) {
  auto os = open_output(fits_dir(o) / "fd.csv");
  os << stamp(o) << '\n'
     << "road,v_max_kmh,rho_max_veh_km,objective,degenerate\n";
  os << std::setprecision(17);
  for (int r = 0; r < 3; ++r)
    os << r + 1 << ',' << fits[r].fd.v_max << ',' << fits[r].fd.rho_max << ','
       << fits[r].objective << ',' << (fits[r].degenerate ? 1 : 0) << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  return fields;
}

RoadDiagrams load_diagrams(const RunOptions& o) {
  auto is = open_input(fits_dir(o) / "fd.csv");
  RoadDiagrams fds;
  std::array<bool, 3> seen{};
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("road,", 0) == 0) continue;
    const auto f = split_csv(line);
    if (f.size() < 3) throw std::runtime_error("malformed row in fd.csv");
    const int road = std::stoi(f[0]);
    if (road < 1 || road > 3) throw std::runtime_error("bad road id in fd.csv");
    fds[road - 1] = {std::stod(f[1]), std::stod(f[2])};
    fds[road - 1].validate();
    seen[road - 1] = true;
  }
  if (!(seen[0] && seen[1] && seen[2]))
    throw std::runtime_error("fd.csv does not cover all three roads");
  return fds;
}

// ---------------------------------------------------------------------------
// Fitted couplings

std::filesystem::path coupling_path(const RunOptions& o, ModelId id) {
  if (is_classical(id))
    return fits_dir(o) / ("classical_" + std::string(to_string(id)) + ".txt");
  return fits_dir(o) / (std::string(to_string(id)) + ".model");
}

CouplingSolver load_coupling(const RunOptions& o, ModelId id,
                             const RoadDiagrams& fds) {
  auto is = open_input(coupling_path(o, id));
  if (is_classical(id)) {
    const auto [stored, params] = read_classical_params(is);
    if (stored != id)
      throw std::runtime_error(coupling_path(o, id).string() + " holds " +
                               to_string(stored) + ", expected " +
                               to_string(id));
    return make_classical_solver(id, fds, params);
  }
  auto model = MlCouplingModel::load(is);
  if (model.variant != id)
    throw std::runtime_error(coupling_path(o, id).string() + " holds " +
                             to_string(model.variant) + ", expected " +
                             to_string(id));
  return model.as_solver();
}

// ---------------------------------------------------------------------------
// Boundary-rate interpolation

/// Linear interpolation on a uniform grid, constant beyond the ends.
struct GridInterp {
  SeriesGrid grid;
  std::vector<double> values;

  double operator()(double t) const {
    if (values.empty()) return 0.0;
    const double u = (t - grid.t0) / grid.dt;
    if (u <= 0.0) return values.front();
    if (u >= static_cast<double>(values.size() - 1)) return values.back();
    const auto i = static_cast<std::size_t>(u);
    const double w = u - static_cast<double>(i);
    return values[i] * (1.0 - w) + values[i + 1] * w;
  }
};

/// Kernel-smoothed crossing rate in veh/h on a fine grid over [0, duration].
GridInterp boundary_rate(std::span<const double> times, double duration,
                         double bandwidth) {
  const SeriesGrid grid{0.0, kKdeGridDt,
                        static_cast<int>(duration / kKdeGridDt) + 1};
  auto rate = kde_series(times, grid, bandwidth);
  for (auto& v : rate) v *= 3600.0;
  return {grid, std::move(rate)};
}

}  // namespace

RunOptions RunOptions::from_config(KeyValueConfig config) {
  RunOptions o;
  o.out = config.get_string("out", "out");
  const long long seed = config.get_int("seed", 0);
  if (seed < 0) throw std::invalid_argument("seed must be nonnegative");
  o.seed = static_cast<std::uint64_t>(seed);
  o.model = config.get_string("model", "");
  o.variant = config.get_string("variant", "");
  o.epochs = config.get_int("epochs", 500);
  if (o.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  o.duration = config.get_double("duration", -1.0);
  o.benchmark = config.get_string("benchmark", "");
  o.config = std::move(config);
  return o;
}

// ---------------------------------------------------------------------------
// gen-synth

int cmd_gen_synth(const RunOptions& o) {
  ensure_directory(data_dir(o));
  std::vector<DatasetInfo> rows;
  for (const int id : corpus_ids()) {
    SynthConfig cfg = corpus_config(id);
    if (o.duration >= 0.0) cfg.duration = o.duration;
    cfg.seed += o.seed;  // seed 0 keeps the canonical corpus
    const auto tracks = synth_generate(cfg);
    {
      auto os = open_output(tracks_path(o, id));
      os << stamp(o) << '\n';
      write_tracks(os, tracks);
    }

    DatasetInfo info;
    info.id = id;
    info.day = "day" + two_digits((id - 1) / 4 + 1);
    info.start_time = two_digits(6 + 3 * ((id - 1) % 4)) + ":00";
    info.duration_s = cfg.duration;
    info.split = split_of(id);

    // Carriageway/ramp statistics straight from the tracks: origin by the
    // lateral position at first record, speed as the planar time average.
    double main_speed = 0.0, ramp_speed = 0.0;
    for (const auto& tr : tracks) {
      if (tr.segments.empty()) continue;
      const bool ramp = tr.position(tr.start_time()).y < 0.0;
      double sum = 0.0;
      int n = 0;
      for (double t = tr.start_time(); t <= tr.end_time() + 1e-9; t += 1.0) {
        const auto v = tr.velocity(std::min(t, tr.end_time()));
        sum += std::hypot(v.x, v.y);
        ++n;
      }
      const double mean = n > 0 ? sum / n : 0.0;
      if (ramp) {
        ++info.entering_count;
        ramp_speed += mean;
      } else {
        ++info.passing_count;
        main_speed += mean;
      }
    }
    if (info.passing_count > 0)
      info.passing_speed_kmh = units::ms_to_kmh(main_speed / info.passing_count);
    if (info.entering_count > 0)
      info.entering_speed_kmh =
          units::ms_to_kmh(ramp_speed / info.entering_count);

    std::cout << "dataset " << two_digits(id) << ": " << tracks.size()
              << " vehicles, " << cfg.duration << " s, "
              << to_string(info.split) << '\n';
    rows.push_back(info);
  }
  store_manifest(o, rows);
  std::cout << "wrote " << rows.size() << " datasets under "
            << data_dir(o).string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// fit-delays

int cmd_fit_delays(const RunOptions& o) {
  auto rows = load_manifest(o);
  std::cout << "dataset  tau2_s  tau3_s  residual_veh_h\n";
  for (auto& info : rows) {
    const auto tracks = load_tracks(o, info.id);
    const auto series = measure_dataset(tracks, info.duration_s);
    const auto est = estimate_delays(series[0].flux, series[1].flux,
                                     series[2].flux, kMeasureDt);
    info.tau2 = est.tau2;
    info.tau3 = est.tau3;
    std::cout << two_digits(info.id) << "       " << std::setw(6) << est.tau2
              << "  " << std::setw(6) << est.tau3 << "  " << est.objective
              << '\n';
  }
  store_manifest(o, rows);
  std::cout << "updated " << manifest_path(o).string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// fit-fd

int cmd_fit_fd(const RunOptions& o) {
  ensure_directory(fits_dir(o));
  const auto manifest = load_manifest(o);

  std::array<std::vector<double>, 3> rho, speed;
  for (const auto& info : manifest) {
    if (info.split != Split::train) continue;
    const auto series = aligned_series(o, info);
    for (int r = 0; r < 3; ++r) {
      rho[r].insert(rho[r].end(), series[r].density.begin(),
                    series[r].density.end());
      speed[r].insert(speed[r].end(), series[r].speed.begin(),
                      series[r].speed.end());
    }
  }
  if (rho[0].empty())
    throw std::runtime_error("no datasets tagged 'train' in the manifest");

  const auto de = de_config(o);
  std::array<FdFit, 3> fits;
  std::cout << "road  v_max_kmh  rho_max_veh_km  bound_active\n";
  for (int r = 0; r < 3; ++r) {
    fits[r] = fit_fundamental_diagram(rho[r], speed[r], kLaneCounts[r], de);
    const double bound = kLaneCounts[r] * 1000.0 / 7.5;
    std::cout << r + 1 << "     " << std::setw(9) << fits[r].fd.v_max << "  "
              << std::setw(14) << fits[r].fd.rho_max << "  "
              << (fits[r].fd.rho_max >= bound * (1.0 - 1e-12) ? "yes" : "no")
              << '\n';
  }
  write_fd_table(o, fits);
  std::cout << "wrote " << (fits_dir(o) / "fd.csv").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// fit-classical

int cmd_fit_classical(const RunOptions& o) {
  ensure_directory(fits_dir(o));
  ensure_directory(reports_dir(o));
  const auto fds = load_diagrams(o);
  const auto manifest = load_manifest(o);
  const auto train =
      clamp_to_diagrams(split_samples(o, manifest, Split::train), fds);
  const auto test =
      clamp_to_diagrams(split_samples(o, manifest, Split::test), fds);
  const auto de = de_config(o);

  auto report = open_output(reports_dir(o) / "classical_fit.csv");
  report << stamp(o) << '\n'
         << "model,split,road1_veh_h,road2_veh_h,road3_veh_h,mean_veh_h\n"
         << std::setprecision(10);

  for (const ModelId id : classical_selection(o.model)) {
    const auto fit = fit_classical(id, fds, train, de);
    {
      auto os = open_output(coupling_path(o, id));
      os << stamp(o) << '\n';
      write_classical_params(os, id, fit.params);
    }
    const auto solver = make_classical_solver(id, fds, fit.params);
    std::cout << to_string(id) << ": beta " << fit.params.beta;
    if (id != ModelId::c1)
      std::cout << ", markers " << fit.params.markers.w1 << '/'
                << fit.params.markers.w2 << '/' << fit.params.markers.w3;
    std::cout << '\n';
    for (const auto& [name, samples] :
         {std::pair{"train", &train}, std::pair{"test", &test}}) {
      report << to_string(id) << ',' << name;
      for (int r = 1; r <= 3; ++r)
        report << ',' << std::sqrt(model_error(solver, *samples, r));
      report << ',' << std::sqrt(model_error(solver, *samples)) << '\n';
      std::cout << "  " << name << " rms flux error "
                << std::sqrt(model_error(solver, *samples)) << " veh/h\n";
    }
  }
  std::cout << "wrote " << (reports_dir(o) / "classical_fit.csv").string()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// train-ml

namespace {

void write_history(const RunOptions& o, const std::filesystem::path& path,
                   std::span<const TrainRecord> history) {
  auto os = open_output(path);
  os << stamp(o) << '\n'
     << "epoch,train_loss,train_penalty,test_loss\n"
     << std::setprecision(17);
  for (const auto& rec : history)
    os << rec.epoch << ',' << rec.train_loss << ',' << rec.train_penalty << ','
       << rec.test_loss << '\n';
}

void write_benchmark_report(const RunOptions& o,
                            const std::filesystem::path& path,
                            const BenchmarkReport& rep) {
  auto os = open_output(path);
  os << stamp(o) << '\n'
     << "variant,seed,epoch,train_mean,train_std,test_mean,test_std\n"
     << std::setprecision(17);
  // Per-run rows carry the seed and the final losses; aggregate rows carry
  // the across-seed statistics with seed left blank.
  for (const auto& run : rep.runs)
    os << to_string(run.variant) << ',' << run.seed << ','
       << run.history.back().epoch << ',' << run.final_train_loss << ",,"
       << run.final_test_loss << ",\n";
  for (const auto& row : rep.summary)
    os << to_string(row.variant) << ",," << row.epoch << ',' << row.train_mean
       << ',' << row.train_std << ',' << row.test_mean << ',' << row.test_std
       << '\n';
}

void print_benchmark(const BenchmarkReport& rep) {
  for (const auto& row : rep.summary) {
    std::cout << to_string(row.variant) << " epoch " << std::setw(4)
              << row.epoch << ": train " << std::scientific
              << std::setprecision(3) << row.train_mean << " +- "
              << row.train_std;
    if (std::isfinite(row.test_mean))
      std::cout << ", test " << row.test_mean << " +- " << row.test_std;
    std::cout << std::defaultfloat << '\n';
  }
  std::cout << "wall time " << std::setprecision(4) << rep.wall_seconds
            << " s\n";
}

}  // namespace

int cmd_train_ml(const RunOptions& o) {
  ensure_directory(fits_dir(o));
  ensure_directory(reports_dir(o));

  if (!o.benchmark.empty()) {
    if (o.benchmark != "c1prime")
      throw std::invalid_argument("unknown benchmark '" + o.benchmark +
                                  "' (supported: c1prime)");
    BenchmarkConfig bc;
    bc.variants = ml_selection(o.variant);
    bc.train = train_config(o);
    bc.train.epochs = o.epochs;
    bc.seeds = {o.seed == 0 ? 1 : o.seed};
    const auto rep = run_training_benchmark(bc);
    write_benchmark_report(o, reports_dir(o) / "train_benchmark.csv", rep);
    print_benchmark(rep);
    return 0;
  }

  const auto fds = load_diagrams(o);
  const auto manifest = load_manifest(o);
  const auto train =
      clamp_to_diagrams(split_samples(o, manifest, Split::train), fds);
  const auto test =
      clamp_to_diagrams(split_samples(o, manifest, Split::test), fds);

  for (const ModelId variant : ml_selection(o.variant)) {
    auto tc = train_config(o);
    auto model =
        MlCouplingModel::create(variant, fds, o.seed == 0 ? 1 : o.seed);
    const auto res = train_model(std::move(model), train, test, tc);
    {
      auto os = open_output(coupling_path(o, variant));
      os << stamp(o) << '\n';
      res.model.save(os);
    }
    write_history(o, reports_dir(o) / ("train_" + std::string(to_string(variant)) + ".csv"),
                  res.history);
    const auto& last = res.history.back();
    std::cout << to_string(variant) << ": epoch " << last.epoch << " train "
              << last.train_loss << " test " << last.test_loss << " (veh/h)^2\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// capability-test

int cmd_capability_test(const RunOptions& o) {
  ensure_directory(reports_dir(o));
  BenchmarkConfig bc;
  bc.variants = ml_selection(o.variant);
  bc.train = train_config(o);
  bc.train.epochs = o.epochs;
  for (auto& s : bc.seeds) s += o.seed;  // seed 0 keeps the reference seeds
  const auto rep = run_training_benchmark(bc);
  write_benchmark_report(o, reports_dir(o) / "capability.csv", rep);
  print_benchmark(rep);
  std::cout << "wrote " << (reports_dir(o) / "capability.csv").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const RunOptions& o) {
  ensure_directory(reports_dir(o));
  const auto fds = load_diagrams(o);
  const auto manifest = load_manifest(o);
  const auto models = full_selection(o.model);
  const auto sc = solver_config(o);
  const Split split = parse_split(o.config.get_string("split", "application"));
  const double bandwidth = o.config.get_double("kde_bandwidth", 0.75);
  const auto volumes = default_control_volumes();

  std::vector<CouplingSolver> couplings;
  couplings.reserve(models.size());
  for (const ModelId id : models) couplings.push_back(load_coupling(o, id, fds));

  std::vector<int> ids;
  std::map<int, std::vector<double>> errors;  // dataset -> per-model rel error
  std::map<int, double> baselines;

  for (const auto& info : manifest) {
    if (info.split != split) continue;
    ids.push_back(info.id);
    const auto tracks = load_tracks(o, info.id);

    // Arrival/departure events on the model boundaries; the smoothed rates
    // drive the inflows, the downstream rate is the prediction target.
    const auto in1 = crossing_times(tracks, -kRoadHalfLength,
                                    volumes[0].y_min, volumes[0].y_max);
    const auto in2 = crossing_times(tracks, -kRoadHalfLength,
                                    volumes[1].y_min, volumes[1].y_max);
    const auto out3 = crossing_times(tracks, kRoadHalfLength,
                                     volumes[2].y_min, volumes[2].y_max);
    BoundaryFluxData data;
    data.inflow1 = boundary_rate(in1.times, info.duration_s, bandwidth);
    data.inflow2 = boundary_rate(in2.times, info.duration_s, bandwidth);
    data.reference3 = boundary_rate(out3.times, info.duration_s, bandwidth);
    data.t0 = 0.0;
    data.t1 = info.duration_s;

    auto& row = errors[info.id];
    for (std::size_t k = 0; k < models.size(); ++k) {
      const auto ex = run_boundary_experiment(data, fds, couplings[k], sc);
      row.push_back(ex.rel_error);
      baselines[info.id] = ex.baseline_error;

      // Thinned outflow series, one row per measurement step.
      auto os = open_output(reports_dir(o) /
                            ("boundary_" + std::string(to_string(models[k])) + "_" +
                             two_digits(info.id) + ".csv"));
      os << stamp(o) << '\n'
         << "t_s,inflow1_veh_h,inflow2_veh_h,outflow_veh_h,reference_veh_h\n"
         << std::setprecision(10);
      double next_tick = 0.0;
      for (std::size_t i = 0; i < ex.t.size(); ++i) {
        if (ex.t[i] + 1e-12 < next_tick && i + 1 < ex.t.size()) continue;
        os << ex.t[i] << ',' << data.inflow1(ex.t[i]) << ','
           << data.inflow2(ex.t[i]) << ',' << ex.outflow[i] << ','
           << data.reference3(ex.t[i]) << '\n';
        next_tick += kMeasureDt;
      }
    }
    std::cout << "dataset " << two_digits(info.id) << " done ("
              << to_string(split) << ", " << info.duration_s << " s)\n";
  }
  if (ids.empty())
    throw std::runtime_error("no datasets tagged '" + to_string(split) +
                             "' in the manifest");

  // Summary table: one row per dataset, one error column per model, plus the
  // across-dataset average.
  auto os = open_output(reports_dir(o) / "boundary_summary.csv");
  os << stamp(o) << '\n' << "dataset,baseline";
  for (const ModelId id : models) os << ',' << to_string(id);
  os << '\n' << std::setprecision(10);
  std::vector<double> avg(models.size() + 1, 0.0);
  for (const int id : ids) {
    os << two_digits(id) << ',' << baselines[id];
    avg[0] += baselines[id];
    const auto& row = errors[id];
    for (std::size_t k = 0; k < row.size(); ++k) {
      os << ',' << row[k];
      avg[k + 1] += row[k];
    }
    os << '\n';
  }
  os << "average";
  std::cout << "relative outflow error, " << to_string(split) << " average:\n";
  for (std::size_t k = 0; k < avg.size(); ++k) {
    avg[k] /= static_cast<double>(ids.size());
    os << ',' << avg[k];
    std::cout << "  " << (k == 0 ? "baseline" : to_string(models[k - 1]))
              << ": " << std::setprecision(4) << avg[k] << '\n';
  }
  os << '\n';
  std::cout << "wrote " << (reports_dir(o) / "boundary_summary.csv").string()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// predict

int cmd_predict(const RunOptions& o) {
  ensure_directory(reports_dir(o));
  const auto fds = load_diagrams(o);
  const auto sc = solver_config(o);
  const double horizon = o.config.get_double("horizon", 10.0);

  for (const ModelId id : full_selection(o.model)) {
    const auto coupling = load_coupling(o, id, fds);
    const auto rp = run_riemann_prediction(fds, coupling, sc, horizon);

    auto os = open_output(reports_dir(o) /
                          ("riemann_" + std::string(to_string(id)) + ".csv"));
    os << stamp(o) << '\n' << std::setprecision(17);
    os << "# horizon_s=" << horizon << " mass_initial_veh=" << rp.mass_initial
       << " mass_final_veh=" << rp.mass_final
       << " inflow_veh=" << rp.inflow_integral
       << " outflow_veh=" << rp.outflow_integral << '\n';
    os << "road,x_m,rho_veh_km\n";
    for (std::size_t i = 0; i < rp.x_in.size(); ++i)
      os << 1 << ',' << rp.x_in[i] << ',' << rp.rho1[i] << '\n';
    for (std::size_t i = 0; i < rp.x_in.size(); ++i)
      os << 2 << ',' << rp.x_in[i] << ',' << rp.rho2[i] << '\n';
    for (std::size_t i = 0; i < rp.x_out.size(); ++i)
      os << 3 << ',' << rp.x_out[i] << ',' << rp.rho3[i] << '\n';

    const double gain = rp.inflow_integral - rp.outflow_integral;
    std::cout << to_string(id) << ": mass " << std::setprecision(10)
              << rp.mass_initial << " -> " << rp.mass_final
              << " veh, boundary balance residual "
              << rp.mass_final - rp.mass_initial - gain << " veh\n";
  }
  return 0;
}

}  // namespace onramp::tools

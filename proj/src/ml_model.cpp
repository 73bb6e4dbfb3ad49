#include "onramp/ml_model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace onramp {

Vector6 flux_extension(const RoadDiagrams& fds, const JunctionTraces& t) {
  Vector6 v;
  v << t.rho1, t.rho2, t.rho3, fds[0].flux(t.rho1), fds[1].flux(t.rho2),
      fds[2].flux(t.rho3);
  return v;
}

NormalizationParams NormalizationParams::fit(const RoadDiagrams& fds,
                                             std::span<const TrainingSample> samples) {
  if (samples.empty()) throw std::domain_error("cannot fit normalization to nothing");
  Vector6 mean = Vector6::Zero();
  for (const auto& s : samples) mean += flux_extension(fds, s.traces);
  mean /= static_cast<double>(samples.size());
  Vector6 var = Vector6::Zero();
  for (const auto& s : samples) {
    const Vector6 d = flux_extension(fds, s.traces) - mean;
    var += d.cwiseProduct(d);
  }
  var /= static_cast<double>(samples.size());
  NormalizationParams p;
  p.shift = mean;
  p.scale = var.cwiseSqrt().cwiseMax(1e-8);
  return p;
}

std::vector<int> MlCouplingModel::layer_sizes(ModelId variant) {
  switch (variant) {
    case ModelId::ml1: return {6, 2};
    case ModelId::ml2:
    case ModelId::ml3: return {6, 12, 75, 75, 2};
    default: throw std::invalid_argument("not a network model id");
  }
}

MlCouplingModel MlCouplingModel::create(ModelId variant, const RoadDiagrams& fds,
                                        std::uint64_t seed) {
  for (const auto& fd : fds) fd.validate();
  MlCouplingModel m;
  m.variant = variant;
  m.fds = fds;
  const auto sizes = layer_sizes(variant);
  std::mt19937_64 gen(seed);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l], out = sizes[l + 1];
    const double r = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-r, r);
    DenseLayer layer;
    layer.w.resize(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) layer.w(i, j) = u(gen);
    layer.b = Eigen::VectorXd::Zero(out);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

Eigen::Vector2d MlCouplingModel::ann_forward(const Vector6& x) const {
  Eigen::VectorXd a = x;
  for (const auto& layer : layers) {
    Eigen::VectorXd z = layer.w * a + layer.b;
    a = (1.0 / (1.0 + (-z.array()).exp())).matrix();
  }
  if (a.size() != 2) throw std::logic_error("network head must have two outputs");
  return a;
}

Eigen::Vector2d MlCouplingModel::theta(const JunctionTraces& traces) const {
  return ann_forward(norm.apply(flux_extension(fds, traces)));
}

CouplingFluxes MlCouplingModel::forward(const JunctionTraces& traces) const {
  const Eigen::Vector2d th = theta(traces);
  return demand_supply(fds, traces).param_to_fluxes(th[0], th[1]);
}

CouplingSolver MlCouplingModel::as_solver() const {
  return [m = *this](const JunctionTraces& t) { return m.forward(t); };
}

std::size_t MlCouplingModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers)
    n += static_cast<std::size_t>(l.w.size()) + static_cast<std::size_t>(l.b.size());
  return n;
}

Eigen::VectorXd MlCouplingModel::parameter_vector() const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index off = 0;
  for (const auto& l : layers) {
    std::copy_n(l.w.data(), l.w.size(), x.data() + off);
    off += l.w.size();
    std::copy_n(l.b.data(), l.b.size(), x.data() + off);
    off += l.b.size();
  }
  return x;
}

void MlCouplingModel::set_parameter_vector(const Eigen::VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(parameter_count()))
    throw std::invalid_argument("parameter vector has the wrong length");
  Eigen::Index off = 0;
  for (auto& l : layers) {
    std::copy_n(x.data() + off, l.w.size(), l.w.data());
    off += l.w.size();
    std::copy_n(x.data() + off, l.b.size(), l.b.data());
    off += l.b.size();
  }
}

// ---------------------------------------------------------------------------
// Batched evaluation.  Samples are processed in fixed-size chunks; partial
// sums are combined in chunk order so results do not depend on the thread
// count.  Within a chunk the network runs as matrix-matrix products.

namespace {

constexpr int kEvalChunk = 256;

int chunk_size_for(std::ptrdiff_t n) { return n <= 512 ? 8 : kEvalChunk; }

struct ParamLayout {
  std::vector<Eigen::Index> w_off, b_off;
  Eigen::Index total = 0;
};

ParamLayout param_layout(const MlCouplingModel& m) {
  ParamLayout lt;
  for (const auto& l : m.layers) {
    lt.w_off.push_back(lt.total);
    lt.total += l.w.size();
    lt.b_off.push_back(lt.total);
    lt.total += l.b.size();
  }
  return lt;
}

struct Workspace {
  Eigen::MatrixXd x;  // 6 x cap normalized inputs
  std::vector<Eigen::MatrixXd> a;      // activations per layer
  std::vector<Eigen::MatrixXd> delta;  // backprop buffers
  // chart state per column
  std::vector<double> m1, m2, th1, th2, f1, f2, f3;
  std::vector<char> m2_from_supply;

  Workspace(const MlCouplingModel& m, int cap) : x(6, cap) {
    for (const auto& l : m.layers) {
      a.emplace_back(l.w.rows(), cap);
      delta.emplace_back(l.w.rows(), cap);
    }
    for (auto* v : {&m1, &m2, &th1, &th2, &f1, &f2, &f3})
      v->resize(static_cast<std::size_t>(cap));
    m2_from_supply.resize(static_cast<std::size_t>(cap));
  }
};

// Forward through the network and the chart for samples[lo, hi).
// Head state mirrors AdmissibleSet::param_to_fluxes bitwise.
void forward_chunk(const MlCouplingModel& model, const TrainingSample* samples,
                   std::ptrdiff_t lo, std::ptrdiff_t hi, Workspace& ws) {
  const int n = static_cast<int>(hi - lo);
  for (int i = 0; i < n; ++i)
    ws.x.col(i) = model.norm.apply(flux_extension(model.fds, samples[lo + i].traces));
  const Eigen::MatrixXd* prev = &ws.x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    auto out = ws.a[l].leftCols(n);
    out.noalias() = model.layers[l].w * prev->leftCols(n);
    out.colwise() += model.layers[l].b;
    out.array() = 1.0 / (1.0 + (-out.array()).exp());
    prev = &ws.a[l];
  }
  const auto& th = ws.a.back();
  for (int i = 0; i < n; ++i) {
    const AdmissibleSet g = demand_supply(model.fds, samples[lo + i].traces);
    const double t1 = th(0, i), t2 = th(1, i);
    const double m1 = std::min(g.d1, g.s3);
    const double f1 = t1 * m1;
    const double r = g.s3 - f1;
    const bool from_supply = !(g.d2 <= r);  // ties keep the demand argument
    const double m2 = from_supply ? r : g.d2;
    const double f2 = t2 * m2;
    ws.m1[i] = m1;
    ws.m2[i] = m2;
    ws.th1[i] = t1;
    ws.th2[i] = t2;
    ws.f1[i] = f1;
    ws.f2[i] = f2;
    ws.f3[i] = f1 + f2;
    ws.m2_from_supply[i] = from_supply;
  }
}

double chunk_data_loss(const TrainingSample* samples, std::ptrdiff_t lo,
                       std::ptrdiff_t hi, const Workspace& ws) {
  double s = 0.0;
  for (std::ptrdiff_t i = lo; i < hi; ++i) {
    const auto& t = samples[i].target;
    const int c = static_cast<int>(i - lo);
    const double e1 = ws.f1[c] - t.f1, e2 = ws.f2[c] - t.f2, e3 = ws.f3[c] - t.f3;
    s += (e1 * e1 + e2 * e2 + e3 * e3) / 3.0;
  }
  return s;
}

// Backprop through chart and network for coefficients dL/d(f1,f2,f3) stored
// per column in dl1/dl2/dl3; accumulates the flat gradient.
void backward_chunk(const MlCouplingModel& model, int n, Workspace& ws,
                    const double* dl1, const double* dl2, const double* dl3,
                    const ParamLayout& lt, Eigen::VectorXd& g) {
  auto dth = ws.delta.back().leftCols(n);
  for (int i = 0; i < n; ++i) {
    const double e1 = dl1[i] + dl3[i];
    const double e2 = dl2[i] + dl3[i];
    double d1 = e1 * ws.m1[i];
    if (ws.m2_from_supply[i]) d1 -= e2 * ws.th2[i] * ws.m1[i];
    dth(0, i) = d1;
    dth(1, i) = e2 * ws.m2[i];
  }
  const int nl = static_cast<int>(model.layers.size());
  for (int l = nl - 1; l >= 0; --l) {
    auto al = ws.a[l].leftCols(n);
    auto dl = ws.delta[l].leftCols(n);
    dl.array() *= al.array() * (1.0 - al.array());
    const auto& layer = model.layers[l];
    Eigen::Map<WeightMatrix> gw(g.data() + lt.w_off[l], layer.w.rows(), layer.w.cols());
    Eigen::Map<Eigen::VectorXd> gb(g.data() + lt.b_off[l], layer.b.size());
    if (l > 0) {
      gw.noalias() += dl * ws.a[l - 1].leftCols(n).transpose();
      ws.delta[l - 1].leftCols(n).noalias() = layer.w.transpose() * dl;
    } else {
      gw.noalias() += dl * ws.x.leftCols(n).transpose();
    }
    gb.noalias() += dl.rowwise().sum();
  }
}

template <class PerChunk>
void run_chunks(Exec exec, const MlCouplingModel& model, std::ptrdiff_t n, int chunk,
                const PerChunk& body) {
  const std::ptrdiff_t nchunks = (n + chunk - 1) / chunk;
  const bool par = exec == Exec::parallel;
  (void)par;
#pragma omp parallel if (par)
  {
    Workspace ws(model, chunk);
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
      const std::ptrdiff_t lo = c * chunk;
      const std::ptrdiff_t hi = std::min(n, lo + chunk);
      body(c, lo, hi, ws);
    }
  }
}

}  // namespace

double ml_batch_loss(const MlCouplingModel& model,
                     std::span<const TrainingSample> samples, Exec exec) {
  if (samples.empty()) throw std::domain_error("empty sample batch");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(samples.size());
  const int chunk = chunk_size_for(n);
  std::vector<double> partial(static_cast<std::size_t>((n + chunk - 1) / chunk));
  run_chunks(exec, model, n, chunk,
             [&](std::ptrdiff_t c, std::ptrdiff_t lo, std::ptrdiff_t hi, Workspace& ws) {
               forward_chunk(model, samples.data(), lo, hi, ws);
               partial[static_cast<std::size_t>(c)] =
                   chunk_data_loss(samples.data(), lo, hi, ws);
             });
  double s = 0.0;
  for (double p : partial) s += p;
  return s / static_cast<double>(n);
}

double ml_loss_and_gradient(const MlCouplingModel& model,
                            std::span<const TrainingSample> samples,
                            Eigen::VectorXd& grad, Exec exec) {
  if (samples.empty()) throw std::domain_error("empty sample batch");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(samples.size());
  const int chunk = chunk_size_for(n);
  const std::ptrdiff_t nchunks = (n + chunk - 1) / chunk;
  const ParamLayout lt = param_layout(model);
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
  std::vector<Eigen::VectorXd> gpart(static_cast<std::size_t>(nchunks));
  const double wsample = 1.0 / static_cast<double>(n);
  run_chunks(exec, model, n, chunk,
             [&](std::ptrdiff_t c, std::ptrdiff_t lo, std::ptrdiff_t hi, Workspace& ws) {
               forward_chunk(model, samples.data(), lo, hi, ws);
               partial[static_cast<std::size_t>(c)] =
                   chunk_data_loss(samples.data(), lo, hi, ws);
               const int m = static_cast<int>(hi - lo);
               std::vector<double> dl1(m), dl2(m), dl3(m);
               for (int i = 0; i < m; ++i) {
                 const auto& t = samples[lo + i].target;
                 const double w = 2.0 / 3.0 * wsample;
                 dl1[i] = w * (ws.f1[i] - t.f1);
                 dl2[i] = w * (ws.f2[i] - t.f2);
                 dl3[i] = w * (ws.f3[i] - t.f3);
               }
               auto& g = gpart[static_cast<std::size_t>(c)];
               g = Eigen::VectorXd::Zero(lt.total);
               backward_chunk(model, m, ws, dl1.data(), dl2.data(), dl3.data(), lt, g);
             });
  grad = Eigen::VectorXd::Zero(lt.total);
  double s = 0.0;
  for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
    s += partial[static_cast<std::size_t>(c)];
    grad += gpart[static_cast<std::size_t>(c)];
  }
  return s * wsample;
}

namespace {

// Shared by value-only and gradient penalty paths.  ws_b sees the boundary
// states of the fluxes ws_a produced.
void penalty_forward(const MlCouplingModel& model, const TrainingSample* samples,
                     std::ptrdiff_t lo, std::ptrdiff_t hi, Workspace& ws_a,
                     Workspace& ws_b, std::vector<TrainingSample>& boundary) {
  forward_chunk(model, samples, lo, hi, ws_a);
  const int n = static_cast<int>(hi - lo);
  boundary.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const CouplingData d = fluxes_to_coupling_data(
        model.fds, samples[lo + i].traces, {ws_a.f1[i], ws_a.f2[i], ws_a.f3[i]});
    boundary[static_cast<std::size_t>(i)].traces = {d.rho_r1, d.rho_r2, d.rho_l3};
  }
  forward_chunk(model, boundary.data(), 0, n, ws_b);
}

double chunk_penalty(int n, const Workspace& ws_a, const Workspace& ws_b) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e1 = ws_a.f1[i] - ws_b.f1[i];
    const double e2 = ws_a.f2[i] - ws_b.f2[i];
    const double e3 = ws_a.f3[i] - ws_b.f3[i];
    s += e1 * e1 + e2 * e2 + e3 * e3;
  }
  return s;
}

}  // namespace

double ml_penalty(const MlCouplingModel& model,
                  std::span<const TrainingSample> samples, Exec exec) {
  if (samples.empty()) throw std::domain_error("empty sample batch");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(samples.size());
  const int chunk = chunk_size_for(n);
  const std::ptrdiff_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
  const bool par = exec == Exec::parallel;
  (void)par;
#pragma omp parallel if (par)
  {
    Workspace ws_a(model, chunk), ws_b(model, chunk);
    std::vector<TrainingSample> boundary;
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
      const std::ptrdiff_t lo = c * chunk;
      const std::ptrdiff_t hi = std::min(n, lo + chunk);
      penalty_forward(model, samples.data(), lo, hi, ws_a, ws_b, boundary);
      partial[static_cast<std::size_t>(c)] =
          chunk_penalty(static_cast<int>(hi - lo), ws_a, ws_b);
    }
  }
  double s = 0.0;
  for (double p : partial) s += p;
  return s / static_cast<double>(n);
}

double ml_penalty_and_gradient(const MlCouplingModel& model,
                               std::span<const TrainingSample> samples,
                               double weight, Eigen::VectorXd& grad_accum,
                               Exec exec) {
  if (samples.empty()) throw std::domain_error("empty sample batch");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(samples.size());
  const int chunk = chunk_size_for(n);
  const std::ptrdiff_t nchunks = (n + chunk - 1) / chunk;
  const ParamLayout lt = param_layout(model);
  if (grad_accum.size() != lt.total)
    throw std::invalid_argument("gradient accumulator has the wrong length");
  std::vector<double> partial(static_cast<std::size_t>(nchunks));
  std::vector<Eigen::VectorXd> gpart(static_cast<std::size_t>(nchunks));
  const double wsample = 1.0 / static_cast<double>(n);
  const bool par = exec == Exec::parallel;
  (void)par;
#pragma omp parallel if (par)
  {
    Workspace ws_a(model, chunk), ws_b(model, chunk);
    std::vector<TrainingSample> boundary;
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
      const std::ptrdiff_t lo = c * chunk;
      const std::ptrdiff_t hi = std::min(n, lo + chunk);
      penalty_forward(model, samples.data(), lo, hi, ws_a, ws_b, boundary);
      const int m = static_cast<int>(hi - lo);
      partial[static_cast<std::size_t>(c)] = chunk_penalty(m, ws_a, ws_b);
      std::vector<double> dl1(m), dl2(m), dl3(m);
      auto& g = gpart[static_cast<std::size_t>(c)];
      g = Eigen::VectorXd::Zero(lt.total);
      const double w = 2.0 * wsample * weight;
      for (int i = 0; i < m; ++i) {
        dl1[i] = w * (ws_a.f1[i] - ws_b.f1[i]);
        dl2[i] = w * (ws_a.f2[i] - ws_b.f2[i]);
        dl3[i] = w * (ws_a.f3[i] - ws_b.f3[i]);
      }
      backward_chunk(model, m, ws_a, dl1.data(), dl2.data(), dl3.data(), lt, g);
      for (int i = 0; i < m; ++i) {
        dl1[i] = -dl1[i];
        dl2[i] = -dl2[i];
        dl3[i] = -dl3[i];
      }
      backward_chunk(model, m, ws_b, dl1.data(), dl2.data(), dl3.data(), lt, g);
    }
  }
  double s = 0.0;
  for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
    s += partial[static_cast<std::size_t>(c)];
    grad_accum += gpart[static_cast<std::size_t>(c)];
  }
  return s * wsample;
}

// ---------------------------------------------------------------------------
// Model file, plain text.  Field order is fixed: variant, per-road diagram,
// normalization, layer count, then per layer out/in/w/b with w row-major.

void MlCouplingModel::save(std::ostream& os) const {
  os.precision(17);
  os << "variant = " << to_string(variant) << "\n";
  for (int k = 0; k < 3; ++k) {
    os << "road" << k + 1 << ".v_max = " << fds[k].v_max << "\n";
    os << "road" << k + 1 << ".rho_max = " << fds[k].rho_max << "\n";
  }
  os << "norm.shift =";
  for (int i = 0; i < 6; ++i) os << " " << norm.shift[i];
  os << "\nnorm.scale =";
  for (int i = 0; i < 6; ++i) os << " " << norm.scale[i];
  os << "\nlayers = " << layers.size() << "\n";
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    os << "layer" << l << ".out = " << layer.w.rows() << "\n";
    os << "layer" << l << ".in = " << layer.w.cols() << "\n";
    os << "layer" << l << ".w =";
    for (Eigen::Index i = 0; i < layer.w.size(); ++i) os << " " << layer.w.data()[i];
    os << "\nlayer" << l << ".b =";
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) os << " " << layer.b[i];
    os << "\n";
  }
}

MlCouplingModel MlCouplingModel::load(std::istream& is) {
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
  const auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("model file misses key: " + key);
    return it->second;
  };
  const auto numbers = [&](const std::string& key, Eigen::Index count) {
    std::istringstream ss(need(key));
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (static_cast<Eigen::Index>(v.size()) != count)
      throw std::runtime_error("model file field " + key + " has the wrong length");
    return v;
  };

  MlCouplingModel m;
  m.variant = parse_model_id(need("variant"));
  for (int k = 0; k < 3; ++k) {
    const std::string p = "road" + std::to_string(k + 1);
    m.fds[k].v_max = std::stod(need(p + ".v_max"));
    m.fds[k].rho_max = std::stod(need(p + ".rho_max"));
    m.fds[k].validate();
  }
  auto sh = numbers("norm.shift", 6), sc = numbers("norm.scale", 6);
  for (int i = 0; i < 6; ++i) {
    m.norm.shift[i] = sh[static_cast<std::size_t>(i)];
    m.norm.scale[i] = sc[static_cast<std::size_t>(i)];
  }
  const int nl = std::stoi(need("layers"));
  const auto sizes = layer_sizes(m.variant);
  if (nl != static_cast<int>(sizes.size()) - 1)
    throw std::runtime_error("model file layer count does not match the variant");
  for (int l = 0; l < nl; ++l) {
    const std::string p = "layer" + std::to_string(l);
    const int out = std::stoi(need(p + ".out"));
    const int in = std::stoi(need(p + ".in"));
    if (out != sizes[static_cast<std::size_t>(l) + 1] ||
        in != sizes[static_cast<std::size_t>(l)])
      throw std::runtime_error("model file layer shape does not match the variant");
    DenseLayer layer;
    layer.w.resize(out, in);
    const auto wv = numbers(p + ".w", layer.w.size());
    std::copy(wv.begin(), wv.end(), layer.w.data());
    layer.b.resize(out);
    const auto bv = numbers(p + ".b", out);
    std::copy(bv.begin(), bv.end(), layer.b.data());
    m.layers.push_back(std::move(layer));
  }
  return m;
}

}  // namespace onramp

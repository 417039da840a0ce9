#include "wavecpd/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wavecpd/error.hpp"
#include "wavecpd/io.hpp"

namespace wavecpd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string node_str(std::size_t k, int d) {
  return "(" + std::to_string(k / d) + "," + std::to_string(k % d) + ")";
}

MtlNet init_mtl_net(int inputs, int width, int nodes, double head_bias, std::mt19937_64& rng) {
  MtlNet net;
  net.inputs = inputs;
  net.width = width;
  const auto glorot = [&](std::vector<double>& w, std::size_t count, int fan_in, int fan_out) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-a, a);
    w.resize(count);
    for (double& x : w) x = u(rng);
  };
  glorot(net.trunk_w, static_cast<std::size_t>(inputs) * width, inputs, width);
  net.trunk_b.assign(static_cast<std::size_t>(width), 0.0);
  glorot(net.head_w, static_cast<std::size_t>(nodes) * width, width, 1);
  net.head_b.assign(static_cast<std::size_t>(nodes), head_bias);
  return net;
}

MtlNet zeros_like(const MtlNet& n) {
  MtlNet z;
  z.inputs = n.inputs;
  z.width = n.width;
  z.trunk_w.assign(n.trunk_w.size(), 0.0);
  z.trunk_b.assign(n.trunk_b.size(), 0.0);
  z.head_w.assign(n.head_w.size(), 0.0);
  z.head_b.assign(n.head_b.size(), 0.0);
  return z;
}

// tanh(trunk_b + x^T trunk_w)
void mtl_trunk(const MtlNet& net, std::span<const double> x, std::vector<double>& act) {
  const int h = net.width;
  act.assign(net.trunk_b.begin(), net.trunk_b.end());
  for (int p = 0; p < net.inputs; ++p) {
    const double xp = x[p];
    if (xp == 0.0) continue;
    const double* row = net.trunk_w.data() + static_cast<std::size_t>(p) * h;
    for (int k = 0; k < h; ++k) act[k] += xp * row[k];
  }
  for (double& a : act) a = std::tanh(a);
}

double mtl_head(const MtlNet& net, const std::vector<double>& act, std::size_t node) {
  const int h = net.width;
  const double* w = net.head_w.data() + node * h;
  double out = net.head_b[node];
  for (int k = 0; k < h; ++k) out += w[k] * act[k];
  return out;
}

void mtl_backward(const MtlNet& net, std::span<const double> x, const std::vector<double>& act,
                  const std::vector<double>& dout, MtlNet& grad) {
  const int h = net.width;
  const auto nodes = static_cast<std::ptrdiff_t>(net.head_b.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < nodes; ++i) {
    double* gw = grad.head_w.data() + i * h;
    grad.head_b[i] += dout[i];
    for (int k = 0; k < h; ++k) gw[k] += dout[i] * act[k];
  }
  std::vector<double> dz(static_cast<std::size_t>(h));
#pragma omp parallel for schedule(static)
  for (int k = 0; k < h; ++k) {
    double s = 0.0;
    for (std::ptrdiff_t i = 0; i < nodes; ++i) s += dout[i] * net.head_w[i * h + k];
    dz[k] = s * (1.0 - act[k] * act[k]);
    grad.trunk_b[k] += dz[k];
  }
#pragma omp parallel for schedule(static)
  for (int p = 0; p < net.inputs; ++p) {
    const double xp = x[p];
    if (xp == 0.0) continue;
    double* row = grad.trunk_w.data() + static_cast<std::size_t>(p) * h;
    for (int k = 0; k < h; ++k) row[k] += xp * dz[k];
  }
}

double nll_term(double mu, double sigma, double y) { return nll({mu, sigma}, y); }

StepGradients mtl_step_gradients(const ModelParams& model, const StepBatch& batch) {
  const auto n = static_cast<std::ptrdiff_t>(model.node_count());
  StepGradients out;
  out.grad = model.zeros_like();
  out.node_nll.assign(n, 0.0);
  out.node_penalty.assign(n, 0.0);
  std::vector<double> am, as;
  mtl_trunk(model.mtl.mean, batch.prev, am);
  mtl_trunk(model.mtl.sigma, batch.prev, as);
  std::vector<double> dmu(n), draw(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double mu = mtl_head(model.mtl.mean, am, i);
    const double raw = mtl_head(model.mtl.sigma, as, i);
    const double sigma = sigma_link(raw);
    const double y = batch.next[i];
    const double r = (y - mu) / sigma;
    dmu[i] = -r / sigma;
    draw[i] = (1.0 - r * r) / sigma * sigmoid(raw);
    out.node_nll[i] = nll_term(mu, sigma, y);
  }
  mtl_backward(model.mtl.mean, batch.prev, am, dmu, out.grad.mtl.mean);
  mtl_backward(model.mtl.sigma, batch.prev, as, draw, out.grad.mtl.sigma);
  for (double v : out.node_nll) out.nll_sum += v;
  return out;
}

bool uses_penalty(const ModelParams& model, const TrainConfig& cfg) {
  return model.kind.tag == ModelTag::regularized && cfg.lambda != 0.0;
}

// Parent patch for the directed pair (i -> direction q), draw r.
PatchView parent_for(const StepBatch& batch, const ModelParams& model, std::size_t i, int q, int r,
                     const NeighborhoodPatch& local_i) {
  if (model.kind.parent.tag == ParentStrategy::Tag::local) return local_i.values;
  const auto m = static_cast<std::size_t>(model.kind.parent.patches_per_term);
  return batch.parents[pair_slot(i, q) * m + r].values;
}

void check_batch(const ModelParams& model, const StepBatch& batch) {
  const std::size_t n = model.node_count();
  require(batch.d == model.d && batch.prev.size() == n && batch.next.size() == n,
          "step: batch size does not match model");
  if (model.kind.tag == ModelTag::regularized && model.kind.parent.tag == ParentStrategy::Tag::random)
    require(batch.parents.size() == n * kNeighbours * model.kind.parent.patches_per_term,
            "step: random strategy needs parents for every pair slot");
}

}  // namespace

std::string ModelKind::name() const {
  switch (tag) {
    case ModelTag::free:
      return "free";
    case ModelTag::shared:
      return "shared";
    case ModelTag::mtl:
      return "mtl";
    case ModelTag::regularized:
      return distance == DistanceKind::kl ? "reg-kl" : "reg-bh";
  }
  return "?";
}

ModelKind ModelKind::parse(const std::string& name, ParentStrategy parent) {
  if (name == "free") return free();
  if (name == "shared") return shared();
  if (name == "mtl") return mtl();
  if (name == "reg-kl") return regularized(DistanceKind::kl, parent);
  if (name == "reg-bh") return regularized(DistanceKind::bh, parent);
  fail(ErrorKind::invalid_argument, "unknown model kind '" + name + "'");
}

void TrainConfig::validate() const {
  require(epochs >= 1, "epochs must be >= 1");
  require(lr > 0.0 && std::isfinite(lr), "lr must be positive");
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be >= 0");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0, "adam_beta1 must be in [0, 1)");
  require(adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam_beta2 must be in [0, 1)");
  require(adam_eps > 0.0, "adam_eps must be positive");
  require(test_eval_stride >= 1, "test_eval_stride must be >= 1");
  require(hidden >= 1 && hidden <= kMaxHidden, "hidden must be in [1, 256]");
  require(trunk_width >= 1, "trunk_width must be >= 1");
}

void canonicalize(ModelKind& kind, TrainConfig& cfg) {
  if (kind.tag == ModelTag::regularized && cfg.lambda == 0.0) kind.tag = ModelTag::free;
  if (kind.tag != ModelTag::regularized) {
    kind.distance = DistanceKind::kl;
    kind.parent = {};
    cfg.lambda = 0.0;
  } else if (kind.parent.tag == ParentStrategy::Tag::local) {
    kind.parent.patches_per_term = 1;
  }
  // widths the architecture does not use
  if (kind.tag == ModelTag::mtl)
    cfg.hidden = TrainConfig{}.hidden;
  else
    cfg.trunk_width = TrainConfig{}.trunk_width;
}

std::vector<std::span<double>> ModelParams::blocks() {
  std::vector<std::span<double>> out;
  if (kind.tag == ModelTag::mtl) {
    for (MtlNet* net : {&mtl.mean, &mtl.sigma}) {
      out.emplace_back(net->trunk_w);
      out.emplace_back(net->trunk_b);
      out.emplace_back(net->head_w);
      out.emplace_back(net->head_b);
    }
    return out;
  }
  for (auto& cpd : nodes) {
    out.push_back(cpd.mean_net.data());
    out.push_back(cpd.sigma_net.data());
  }
  return out;
}

std::vector<std::span<const double>> ModelParams::blocks() const {
  auto mut = const_cast<ModelParams*>(this)->blocks();
  return {mut.begin(), mut.end()};
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (auto b : blocks()) n += b.size();
  return n;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.kind = kind;
  z.d = d;
  z.hidden = hidden;
  z.nodes.assign(nodes.size(), NodeCpd(hidden));
  if (kind.tag == ModelTag::mtl) z.mtl = {wavecpd::zeros_like(mtl.mean), wavecpd::zeros_like(mtl.sigma)};
  return z;
}

ModelParams init_model(const ModelKind& kind, int d, const TrainConfig& cfg) {
  cfg.validate();
  require(d >= 1, "init_model: d must be positive");
  ModelParams m;
  m.kind = kind;
  m.d = d;
  m.hidden = cfg.hidden;
  const std::size_t n = m.node_count();
  switch (kind.tag) {
    case ModelTag::free:
    case ModelTag::regularized:
      m.nodes.reserve(n);
      for (std::size_t k = 0; k < n; ++k) m.nodes.push_back(init_cpd(splitmix64(cfg.seed + k), cfg.hidden));
      break;
    case ModelTag::shared:
      m.nodes.push_back(init_cpd(splitmix64(cfg.seed), cfg.hidden));
      break;
    case ModelTag::mtl: {
      std::mt19937_64 rng(splitmix64(cfg.seed));
      const int inputs = static_cast<int>(n);
      m.mtl.mean = init_mtl_net(inputs, cfg.trunk_width, inputs, 0.0, rng);
      m.mtl.sigma = init_mtl_net(inputs, cfg.trunk_width, inputs, std::log(std::numbers::e - 1.0), rng);
      break;
    }
  }
  return m;
}

double penalty_term(const NodeCpd& cpd_i, const NodeCpd& cpd_j, PatchView parent, DistanceKind kind,
                    NodeCpd* grad_i, NodeCpd* grad_j, double scale) {
  const GaussianParams gi = forward(cpd_i, parent);
  const GaussianParams gj = forward(cpd_j, parent);
  const double value = distance(kind, gi.mu, gi.sigma, gj.mu, gj.sigma);
  if (grad_i || grad_j) {
    const DistanceGrad g = grad_distance(kind, gi.mu, gi.sigma, gj.mu, gj.sigma);
    if (grad_i) backprop(cpd_i, parent, g[0], g[1], *grad_i, scale);
    if (grad_j) backprop(cpd_j, parent, g[2], g[3], *grad_j, scale);
  }
  return value;
}

std::vector<NeighborhoodPatch> draw_parents(const WaveDataset& pool, int d, int patches_per_term,
                                            std::mt19937_64& rng) {
  const std::size_t n = static_cast<std::size_t>(d) * d;
  const auto m = static_cast<std::size_t>(patches_per_term);
  std::vector<NeighborhoodPatch> out(n * kNeighbours * m);
  for (std::size_t i = 0; i < n; ++i) {
    const int r = static_cast<int>(i) / d, c = static_cast<int>(i) % d;
    for (int q = 0; q < kNeighbours; ++q) {
      const int rj = r + kNeighbourOffsets[q][0], cj = c + kNeighbourOffsets[q][1];
      if (rj < 0 || rj >= d || cj < 0 || cj >= d) continue;
      for (std::size_t s = 0; s < m; ++s) out[pair_slot(i, q) * m + s] = sample_random_patch(pool, rng);
    }
  }
  return out;
}

StepGradients step_gradients(const ModelParams& model, const StepBatch& batch, const TrainConfig& cfg) {
  check_batch(model, batch);
  if (model.kind.tag == ModelTag::mtl) return mtl_step_gradients(model, batch);

  const int d = model.d;
  const auto n = static_cast<std::ptrdiff_t>(model.node_count());
  const bool penalized = uses_penalty(model, cfg);
  const bool shared = model.kind.tag == ModelTag::shared;
  const int m = model.kind.parent.tag == ParentStrategy::Tag::random ? model.kind.parent.patches_per_term : 1;
  const double scale = cfg.lambda / m;

  StepGradients out;
  out.grad = model.zeros_like();
  out.node_nll.assign(n, 0.0);
  out.node_penalty.assign(n, 0.0);
  std::vector<NodeCpd> per_node;
  if (shared) per_node.assign(n, NodeCpd(model.hidden));

#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const int r = static_cast<int>(k) / d, c = static_cast<int>(k) % d;
    NodeCpd& g = shared ? per_node[k] : out.grad.nodes[k];
    const NodeCpd& cpd = model.cpd_for(k);
    const NeighborhoodPatch own = extract_patch(batch.prev, d, {r, c});
    out.node_nll[k] = accumulate_grad_nll(cpd, own.values, batch.next[k], g);
    if (!penalized) continue;

    double pen = 0.0;
    for (int q = 0; q < kNeighbours; ++q) {
      const int rj = r + kNeighbourOffsets[q][0], cj = c + kNeighbourOffsets[q][1];
      if (rj < 0 || rj >= d || cj < 0 || cj >= d) continue;
      const std::size_t j = static_cast<std::size_t>(rj) * d + cj;
      const NodeCpd& other = model.cpd_for(j);
      const NeighborhoodPatch theirs = extract_patch(batch.prev, d, {rj, cj});
      for (int s = 0; s < m; ++s) {
        // (k, j): k in the first slot, parent chosen for k.
        pen += penalty_term(cpd, other, parent_for(batch, model, k, q, s, own), model.kind.distance, &g, nullptr,
                            scale) /
               m;
        // (j, k): k in the second slot, parent chosen for j.
        penalty_term(other, cpd, parent_for(batch, model, j, q ^ 1, s, theirs), model.kind.distance, nullptr, &g,
                     scale);
      }
    }
    out.node_penalty[k] = pen;
  }

  if (shared) {
    auto dst = out.grad.nodes[0].mean_net.data();
    auto dst_s = out.grad.nodes[0].sigma_net.data();
    for (const auto& g : per_node) {
      const auto a = g.mean_net.data();
      const auto b = g.sigma_net.data();
      for (std::size_t i = 0; i < a.size(); ++i) dst[i] += a[i];
      for (std::size_t i = 0; i < b.size(); ++i) dst_s[i] += b[i];
    }
  }
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    out.nll_sum += out.node_nll[k];
    out.penalty_sum += out.node_penalty[k];
  }
  return out;
}

double step_objective(const ModelParams& model, const StepBatch& batch, const TrainConfig& cfg) {
  check_batch(model, batch);
  const int d = model.d;
  const std::size_t n = model.node_count();
  double total = 0.0;
  if (model.kind.tag == ModelTag::mtl) {
    std::vector<double> am, as;
    mtl_trunk(model.mtl.mean, batch.prev, am);
    mtl_trunk(model.mtl.sigma, batch.prev, as);
    for (std::size_t i = 0; i < n; ++i)
      total += nll_term(mtl_head(model.mtl.mean, am, i), sigma_link(mtl_head(model.mtl.sigma, as, i)), batch.next[i]);
    return total;
  }
  const int m = model.kind.parent.tag == ParentStrategy::Tag::random ? model.kind.parent.patches_per_term : 1;
  for (std::size_t k = 0; k < n; ++k) {
    const int r = static_cast<int>(k) / d, c = static_cast<int>(k) % d;
    const NeighborhoodPatch own = extract_patch(batch.prev, d, {r, c});
    total += nll(forward(model.cpd_for(k), own), batch.next[k]);
    if (!uses_penalty(model, cfg)) continue;
    for (int q = 0; q < kNeighbours; ++q) {
      const int rj = r + kNeighbourOffsets[q][0], cj = c + kNeighbourOffsets[q][1];
      if (rj < 0 || rj >= d || cj < 0 || cj >= d) continue;
      const std::size_t j = static_cast<std::size_t>(rj) * d + cj;
      for (int s = 0; s < m; ++s)
        total += cfg.lambda / m *
                 penalty_term(model.cpd_for(k), model.cpd_for(j), parent_for(batch, model, k, q, s, own),
                              model.kind.distance);
    }
  }
  return total;
}

AdamState make_adam(const ModelParams& model) {
  AdamState s;
  for (auto b : model.blocks()) {
    s.m.emplace_back(b.size(), 0.0);
    s.v.emplace_back(b.size(), 0.0);
  }
  return s;
}

void adam_update(ModelParams& model, const ModelParams& grad, AdamState& state, const TrainConfig& cfg) {
  auto params = model.blocks();
  const auto grads = grad.blocks();
  require(params.size() == grads.size() && params.size() == state.m.size(), "adam: block layout mismatch");
  ++state.t;
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  const auto nb = static_cast<std::ptrdiff_t>(params.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    auto p = params[b];
    const auto g = grads[b];
    auto& m = state.m[b];
    auto& v = state.v[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
      v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
      p[i] -= cfg.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.adam_eps);
    }
  }
}

std::string TrainingLog::to_csv() const {
  std::string out = "global_step,epoch,time_index,train_nll,test_nll,penalty,log_train,log_test\n";
  for (const auto& r : rows) {
    out += std::to_string(r.global_step) + ',' + std::to_string(r.epoch) + ',' + std::to_string(r.time_index) + ',';
    out += io::format_double(r.train_nll) + ',';
    if (r.test_nll) out += io::format_double(*r.test_nll);
    out += ',' + io::format_double(r.penalty) + ',' + io::format_double(r.log_train) + ',';
    if (r.log_test) out += io::format_double(*r.log_test);
    out += '\n';
  }
  return out;
}

EvalResult evaluate(const ModelParams& model, const WaveDataset& ds) {
  require(ds.d == model.d, "evaluate: dataset d=" + std::to_string(ds.d) + " does not match model d=" +
                               std::to_string(model.d));
  require(ds.frames.size() >= 2, "evaluate: need at least 2 frames");
  const int d = model.d;
  const std::size_t n = model.node_count();
  const auto steps = static_cast<std::ptrdiff_t>(ds.frames.size() - 1);
  EvalResult out;
  out.per_step.assign(steps, 0.0);
  out.time_index.resize(steps);
  const bool mtl = model.kind.tag == ModelTag::mtl;

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t t = 0; t < steps; ++t) {
    const auto& prev = ds.frames[t].values;
    const auto& next = ds.frames[t + 1].values;
    double s = 0.0;
    if (mtl) {
      std::vector<double> am, as;
      mtl_trunk(model.mtl.mean, prev, am);
      mtl_trunk(model.mtl.sigma, prev, as);
      for (std::size_t i = 0; i < n; ++i)
        s += nll_term(mtl_head(model.mtl.mean, am, i), sigma_link(mtl_head(model.mtl.sigma, as, i)), next[i]);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const auto patch = extract_patch(prev, d, {static_cast<int>(i) / d, static_cast<int>(i) % d});
        s += nll(forward(model.cpd_for(i), patch), next[i]);
      }
    }
    out.per_step[t] = s;
    out.time_index[t] = ds.frames[t + 1].time_index;
  }
  for (double v : out.per_step) out.total += v;
  return out;
}

void check_compatible(const WaveDataset& train_ds, const WaveDataset& test_ds) {
  if (train_ds.d != test_ds.d)
    fail(ErrorKind::mismatch, "dataset mismatch: train d=" + std::to_string(train_ds.d) +
                                  ", test d=" + std::to_string(test_ds.d));
  if (!(train_ds.standardization == test_ds.standardization))
    fail(ErrorKind::mismatch, "dataset mismatch: standardization constants differ");
  if (train_ds.frames.size() < 2 || test_ds.frames.size() < 2)
    fail(ErrorKind::mismatch, "dataset mismatch: need at least 2 frames in each dataset");
}

TrainResult train(const WaveDataset& train_ds, const WaveDataset& test_ds, ModelKind kind, TrainConfig cfg) {
  cfg.validate();
  canonicalize(kind, cfg);
  require(kind.parent.patches_per_term >= 1, "patches_per_term must be >= 1");
  return train_from(init_model(kind, train_ds.d, cfg), train_ds, test_ds, cfg);
}

TrainResult train_from(ModelParams initial, const WaveDataset& train_ds, const WaveDataset& test_ds,
                       const TrainConfig& cfg) {
  cfg.validate();
  train_ds.validate();
  test_ds.validate();
  check_compatible(train_ds, test_ds);
  if (initial.d != train_ds.d) fail(ErrorKind::mismatch, "model d does not match dataset d");

  TrainResult res;
  res.model = std::move(initial);
  res.config = cfg;
  ModelParams& model = res.model;
  AdamState adam = make_adam(model);
  std::mt19937_64 parent_rng(splitmix64(cfg.seed ^ 0x5eedfaceULL));
  const bool random_parents = uses_penalty(model, cfg) && model.kind.parent.tag == ParentStrategy::Tag::random;
  const std::size_t steps_per_epoch = train_ds.frames.size() - 1;
  const std::int64_t total_steps = static_cast<std::int64_t>(steps_per_epoch) * cfg.epochs;

  std::int64_t global = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t t = 0; t < steps_per_epoch; ++t) {
      StepBatch batch{model.d, train_ds.frames[t].values, train_ds.frames[t + 1].values, {}};
      if (random_parents)
        batch.parents = draw_parents(train_ds, model.d, model.kind.parent.patches_per_term, parent_rng);
      StepGradients sg = step_gradients(model, batch, cfg);
      ++global;

      for (std::size_t k = 0; k < sg.node_nll.size(); ++k)
        if (!std::isfinite(sg.node_nll[k]) || !std::isfinite(sg.node_penalty[k]))
          fail(ErrorKind::numeric, "numeric instability at step " + std::to_string(global) + ", node " +
                                       node_str(k, model.d));
      const auto gblocks = sg.grad.blocks();
      for (std::size_t b = 0; b < gblocks.size(); ++b)
        for (double v : gblocks[b])
          if (!std::isfinite(v)) {
            const std::string where = model.kind.tag == ModelTag::mtl ? "block " + std::to_string(b)
                                      : model.nodes.size() == 1   ? "shared node"
                                                                  : "node " + node_str(b / 2, model.d);
            fail(ErrorKind::numeric,
                 "numeric instability at step " + std::to_string(global) + ": non-finite gradient in " + where);
          }

      adam_update(model, sg.grad, adam, cfg);

      LogRow row;
      row.global_step = global;
      row.epoch = epoch;
      row.time_index = train_ds.frames[t + 1].time_index;
      row.train_nll = sg.nll_sum;
      row.penalty = uses_penalty(model, cfg) ? cfg.lambda * sg.penalty_sum : 0.0;
      row.log_train = log_transform(row.train_nll);
      if (global % cfg.test_eval_stride == 0 || global == total_steps) {
        row.test_nll = evaluate(model, test_ds).total;
        row.log_test = log_transform(*row.test_nll);
      }
      res.log.rows.push_back(row);
    }
  }
  res.final_train_nll = evaluate(model, train_ds).total;
  res.final_test_nll = res.log.rows.back().test_nll.value();
  return res;
}

double log_transform(double x) {
  if (x > 1.0) return std::log(x);
  if (x < -1.0) return -std::log(-x);
  return 0.0;
}

}  // namespace wavecpd

#include <cmath>

#include "wavecpd/error.hpp"
#include "wavecpd/training.hpp"

namespace wavecpd::reference {

namespace {

// Full multi-task forward for a single node, recomputing the shared layer.
GaussianParams mtl_predict(const MtlModel& m, std::span<const double> frame, std::size_t node) {
  const auto head = [&](const MtlNet& net) {
    double out = net.head_b[node];
    for (int k = 0; k < net.width; ++k) {
      double z = net.trunk_b[k];
      for (int p = 0; p < net.inputs; ++p) z += frame[p] * net.trunk_w[static_cast<std::size_t>(p) * net.width + k];
      out += net.head_w[node * net.width + k] * std::tanh(z);
    }
    return out;
  };
  return {head(m.mean), sigma_link(head(m.sigma))};
}

}  // namespace

StepGradients step_gradients(const ModelParams& model, const StepBatch& batch, const TrainConfig& cfg) {
  require(model.kind.tag != ModelTag::mtl, "reference::step_gradients covers per-node models only");
  const int d = model.d;
  const std::size_t n = model.node_count();
  StepGradients out;
  out.grad = model.zeros_like();
  out.node_nll.assign(n, 0.0);
  out.node_penalty.assign(n, 0.0);
  const auto grad_of = [&](std::size_t k) -> NodeCpd& {
    return out.grad.nodes.size() == 1 ? out.grad.nodes[0] : out.grad.nodes[k];
  };

  for (std::size_t k = 0; k < n; ++k) {
    const NodeIndex node{static_cast<int>(k) / d, static_cast<int>(k) % d};
    const auto patch = extract_patch(batch.prev, d, node);
    out.node_nll[k] = accumulate_grad_nll(model.cpd_for(k), patch.values, batch.next[k], grad_of(k));
  }

  if (model.kind.tag == ModelTag::regularized && cfg.lambda != 0.0) {
    const bool random = model.kind.parent.tag == ParentStrategy::Tag::random;
    const int m = random ? model.kind.parent.patches_per_term : 1;
    for (std::size_t i = 0; i < n; ++i) {
      const int r = static_cast<int>(i) / d, c = static_cast<int>(i) % d;
      const auto local = extract_patch(batch.prev, d, {r, c});
      for (int q = 0; q < kNeighbours; ++q) {
        const int rj = r + kNeighbourOffsets[q][0], cj = c + kNeighbourOffsets[q][1];
        if (rj < 0 || rj >= d || cj < 0 || cj >= d) continue;
        const std::size_t j = static_cast<std::size_t>(rj) * d + cj;
        for (int s = 0; s < m; ++s) {
          const PatchView parent =
              random ? PatchView(batch.parents[pair_slot(i, q) * m + s].values) : PatchView(local.values);
          out.node_penalty[i] += penalty_term(model.cpd_for(i), model.cpd_for(j), parent, model.kind.distance,
                                              &grad_of(i), &grad_of(j), cfg.lambda / m) /
                                 m;
        }
      }
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    out.nll_sum += out.node_nll[k];
    out.penalty_sum += out.node_penalty[k];
  }
  return out;
}

EvalResult evaluate(const ModelParams& model, const WaveDataset& ds) {
  require(ds.d == model.d, "reference::evaluate: d mismatch");
  const int d = model.d;
  const std::size_t steps = ds.frames.size() - 1;
  EvalResult out;
  out.per_step.assign(steps, 0.0);
  for (std::size_t t = 0; t < steps; ++t) out.time_index.push_back(ds.frames[t + 1].time_index);
  for (std::size_t k = 0; k < model.node_count(); ++k) {
    const NodeIndex node{static_cast<int>(k) / d, static_cast<int>(k) % d};
    const auto samples = transitions(ds, node);
    for (std::size_t t = 0; t < samples.size(); ++t) {
      const GaussianParams g = model.kind.tag == ModelTag::mtl ? mtl_predict(model.mtl, ds.frames[t].values, k)
                                                               : forward(model.cpd_for(k), samples[t].patch);
      out.per_step[t] += nll(g, samples[t].target);
    }
  }
  for (double v : out.per_step) out.total += v;
  return out;
}

}  // namespace wavecpd::reference

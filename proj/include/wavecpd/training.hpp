#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavecpd/dataset.hpp"
#include "wavecpd/distances.hpp"
#include "wavecpd/gaussian_cpd.hpp"

namespace wavecpd {

enum class ModelTag { free, shared, mtl, regularized };

struct ParentStrategy {
  enum class Tag { local, random };
  Tag tag = Tag::local;
  int patches_per_term = 1;

  friend bool operator==(const ParentStrategy&, const ParentStrategy&) = default;
};

struct ModelKind {
  ModelTag tag = ModelTag::free;
  DistanceKind distance = DistanceKind::kl;
  ParentStrategy parent;

  static ModelKind free() { return {}; }
  static ModelKind shared() { return {ModelTag::shared, DistanceKind::kl, {}}; }
  static ModelKind mtl() { return {ModelTag::mtl, DistanceKind::kl, {}}; }
  static ModelKind regularized(DistanceKind d, ParentStrategy p = {}) { return {ModelTag::regularized, d, p}; }

  /// "free", "shared", "mtl", "reg-kl" or "reg-bh".
  std::string name() const;
  static ModelKind parse(const std::string& name, ParentStrategy parent = {});

  friend bool operator==(const ModelKind&, const ModelKind&) = default;
};

struct TrainConfig {
  int epochs = 3;
  double lr = 0.01;
  double lambda = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 42;
  int test_eval_stride = 1;
  int hidden = kDefaultHidden;
  int trunk_width = 64;  // multi-task shared layer

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Multi-task head for one output kind: a shared tanh layer over the whole
/// previous frame and one linear readout per node.
struct MtlNet {
  int inputs = 0;
  int width = 0;
  std::vector<double> trunk_w;  // inputs x width, input-major
  std::vector<double> trunk_b;  // width
  std::vector<double> head_w;   // nodes x width
  std::vector<double> head_b;   // nodes

  friend bool operator==(const MtlNet&, const MtlNet&) = default;
};

struct MtlModel {
  MtlNet mean;
  MtlNet sigma;

  friend bool operator==(const MtlModel&, const MtlModel&) = default;
};

struct ModelParams {
  ModelKind kind;
  int d = 0;
  int hidden = kDefaultHidden;
  std::vector<NodeCpd> nodes;  // d*d for free/regularized, 1 for shared, empty for mtl
  MtlModel mtl;

  std::size_t node_count() const { return static_cast<std::size_t>(d) * d; }
  const NodeCpd& cpd_for(std::size_t node) const { return nodes.size() == 1 ? nodes[0] : nodes[node]; }

  /// Every parameter block in canonical checkpoint order.
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  std::size_t parameter_count() const;
  /// Same shape, all zeros.
  ModelParams zeros_like() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

ModelParams init_model(const ModelKind& kind, int d, const TrainConfig& cfg);

/// Regularized with lambda = 0 trains exactly like free; non-regularized kinds
/// carry no penalty settings, and widths an architecture does not use are reset.
/// Equivalent runs then produce identical artifacts.
void canonicalize(ModelKind& kind, TrainConfig& cfg);

/// Eq.-style penalty between two nodes' conditionals at a shared parent patch.
/// Gradients (scaled by `scale`) are accumulated into whichever outputs are non-null.
double penalty_term(const NodeCpd& cpd_i, const NodeCpd& cpd_j, PatchView parent, DistanceKind kind,
                    NodeCpd* grad_i = nullptr, NodeCpd* grad_j = nullptr, double scale = 1.0);

/// One Markov transition over the whole grid.
struct StepBatch {
  int d = 0;
  std::span<const double> prev;
  std::span<const double> next;
  /// Random strategy only: patches_per_term draws per directed neighbour pair,
  /// indexed by pair_slot().
  std::vector<NeighborhoodPatch> parents;
};

/// Directed neighbour pairs (i, j): j is up, down, left or right of i.
inline constexpr int kNeighbours = 4;
inline constexpr int kNeighbourOffsets[kNeighbours][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
inline std::size_t pair_slot(std::size_t node, int direction) { return node * kNeighbours + direction; }

struct StepGradients {
  ModelParams grad;
  std::vector<double> node_nll;      // pre-update NLL per node
  std::vector<double> node_penalty;  // unweighted sum over pairs (i, j) owned by node i
  double nll_sum = 0.0;
  double penalty_sum = 0.0;  // unweighted
};

/// Draws the random-strategy parent patches for one step, in pair-slot order.
std::vector<NeighborhoodPatch> draw_parents(const WaveDataset& pool, int d, int patches_per_term,
                                            std::mt19937_64& rng);

/// Gradient of the step objective sum_i nll_i + lambda * sum_(i,j) P(i, j) with
/// respect to every block, all read from the same (frozen) parameters. OpenMP
/// over nodes; each node gathers the penalty terms it appears in.
StepGradients step_gradients(const ModelParams& model, const StepBatch& batch, const TrainConfig& cfg);

/// Value of the step objective.
double step_objective(const ModelParams& model, const StepBatch& batch, const TrainConfig& cfg);

struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::int64_t t = 0;
};

AdamState make_adam(const ModelParams& model);
void adam_update(ModelParams& model, const ModelParams& grad, AdamState& state, const TrainConfig& cfg);

struct LogRow {
  std::int64_t global_step = 0;
  int epoch = 0;
  std::int64_t time_index = 0;
  double train_nll = 0.0;
  std::optional<double> test_nll;
  double penalty = 0.0;  // lambda-weighted
  double log_train = 0.0;
  std::optional<double> log_test;

  friend bool operator==(const LogRow&, const LogRow&) = default;
};

struct TrainingLog {
  std::vector<LogRow> rows;

  std::string to_csv() const;
  friend bool operator==(const TrainingLog&, const TrainingLog&) = default;
};

struct EvalResult {
  double total = 0.0;
  std::vector<std::int64_t> time_index;  // target frame of each transition
  std::vector<double> per_step;          // summed over nodes
};

EvalResult evaluate(const ModelParams& model, const WaveDataset& ds);

struct TrainResult {
  ModelParams model;
  TrainConfig config;  // after canonicalize()
  TrainingLog log;
  double final_train_nll = 0.0;
  double final_test_nll = 0.0;
};

/// Checks d and standardization agree and both have at least two frames.
void check_compatible(const WaveDataset& train_ds, const WaveDataset& test_ds);

TrainResult train(const WaveDataset& train_ds, const WaveDataset& test_ds, ModelKind kind, TrainConfig cfg);
/// Trains from the given initial parameters.
TrainResult train_from(ModelParams initial, const WaveDataset& train_ds, const WaveDataset& test_ds,
                       const TrainConfig& cfg);

/// ln x for x > 1, -ln(-x) for x < -1, 0 otherwise.
double log_transform(double x);

namespace reference {

/// Serial version of step_gradients: NLL per node, then each directed pair
/// once with its gradient scattered to both endpoints.
StepGradients step_gradients(const ModelParams& model, const StepBatch& batch, const TrainConfig& cfg);

/// Serial per-sample evaluation: every (node, transition) pair through transitions().
EvalResult evaluate(const ModelParams& model, const WaveDataset& ds);

}  // namespace reference

}  // namespace wavecpd

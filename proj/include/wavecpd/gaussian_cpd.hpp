#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wavecpd/dataset.hpp"

namespace wavecpd {

inline constexpr double kSigmaMin = 1e-6;
inline constexpr int kDefaultHidden = 16;
inline constexpr int kMaxHidden = 256;

/// One-hidden-layer tanh network, 25 inputs to one output. Parameters live in
/// one contiguous block in canonical order: W1 (25 x h, input-major), b1 (h),
/// W2 (h), b2.
class MlpParams {
 public:
  explicit MlpParams(int hidden = kDefaultHidden);

  int hidden() const { return hidden_; }
  std::size_t size() const { return data_.size(); }
  static std::size_t size_for(int hidden) { return static_cast<std::size_t>(kPatchSize + 2) * hidden + 1; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> w1() { return {data_.data(), static_cast<std::size_t>(kPatchSize) * hidden_}; }
  std::span<const double> w1() const { return {data_.data(), static_cast<std::size_t>(kPatchSize) * hidden_}; }
  std::span<double> b1() { return {data_.data() + kPatchSize * hidden_, static_cast<std::size_t>(hidden_)}; }
  std::span<const double> b1() const {
    return {data_.data() + kPatchSize * hidden_, static_cast<std::size_t>(hidden_)};
  }
  std::span<double> w2() { return {data_.data() + (kPatchSize + 1) * hidden_, static_cast<std::size_t>(hidden_)}; }
  std::span<const double> w2() const {
    return {data_.data() + (kPatchSize + 1) * hidden_, static_cast<std::size_t>(hidden_)};
  }
  double& b2() { return data_.back(); }
  double b2() const { return data_.back(); }

  friend bool operator==(const MlpParams&, const MlpParams&) = default;

 private:
  int hidden_;
  std::vector<double> data_;
};

/// Conditional Gaussian for one node: a mean head and a standard-deviation head.
/// Also used as the gradient accumulator of the same shape.
struct NodeCpd {
  MlpParams mean_net;
  MlpParams sigma_net;

  explicit NodeCpd(int hidden = kDefaultHidden) : mean_net(hidden), sigma_net(hidden) {}
  int hidden() const { return mean_net.hidden(); }
  std::size_t size() const { return mean_net.size() + sigma_net.size(); }
  void fill(double v);

  friend bool operator==(const NodeCpd&, const NodeCpd&) = default;
};

struct GaussianParams {
  double mu = 0.0;
  double sigma = 1.0;
};

using PatchView = std::span<const double, kPatchSize>;

double softplus(double z);
double sigmoid(double z);
/// softplus(z) + kSigmaMin.
double sigma_link(double raw);

/// Raw scalar output of one network.
double mlp_output(const MlpParams& net, PatchView x);

GaussianParams forward(const NodeCpd& cpd, PatchView x);
inline GaussianParams forward(const NodeCpd& cpd, const NeighborhoodPatch& p) { return forward(cpd, p.values); }

/// Per-sample Gaussian negative log-likelihood of `x`.
double nll(GaussianParams g, double x);

/// Accumulates scale * d(loss)/d(params) into `grad`, given d(loss)/d(mu) and
/// d(loss)/d(sigma) at this input.
void backprop(const NodeCpd& cpd, PatchView x, double dmu, double dsigma, NodeCpd& grad, double scale = 1.0);

/// Adds the gradient of nll(forward(cpd, x), target) into `grad`; returns the nll.
double accumulate_grad_nll(const NodeCpd& cpd, PatchView x, double target, NodeCpd& grad);

NodeCpd grad_nll(const NodeCpd& cpd, const NeighborhoodPatch& patch, double target);

/// Glorot-uniform weights, zero biases, sigma head bias at softplus^-1(1).
NodeCpd init_cpd(std::uint64_t seed, int hidden = kDefaultHidden);

/// Throws ErrorKind::numeric naming the first block holding a non-finite entry.
void check_finite(const NodeCpd& cpd, const char* what);

}  // namespace wavecpd

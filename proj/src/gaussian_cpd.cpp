#include "wavecpd/gaussian_cpd.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "wavecpd/error.hpp"

namespace wavecpd {

namespace {

struct Activations {
  std::array<double, kMaxHidden> hidden;
  double out;
};

void run(const MlpParams& net, PatchView x, Activations& act) {
  const int h = net.hidden();
  const auto w1 = net.w1();
  const auto b1 = net.b1();
  const auto w2 = net.w2();
  std::array<double, kMaxHidden> z;
  for (int k = 0; k < h; ++k) z[k] = b1[k];
  for (int i = 0; i < kPatchSize; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = w1.data() + static_cast<std::size_t>(i) * h;
    for (int k = 0; k < h; ++k) z[k] += xi * row[k];
  }
  double out = net.b2();
  for (int k = 0; k < h; ++k) {
    act.hidden[k] = std::tanh(z[k]);
    out += w2[k] * act.hidden[k];
  }
  act.out = out;
}

void run_backward(const MlpParams& net, PatchView x, const Activations& act, double dout, MlpParams& grad) {
  const int h = net.hidden();
  const auto w2 = net.w2();
  auto gw1 = grad.w1();
  auto gb1 = grad.b1();
  auto gw2 = grad.w2();
  grad.b2() += dout;
  std::array<double, kMaxHidden> dz;
  for (int k = 0; k < h; ++k) {
    const double a = act.hidden[k];
    gw2[k] += dout * a;
    dz[k] = dout * w2[k] * (1.0 - a * a);
    gb1[k] += dz[k];
  }
  for (int i = 0; i < kPatchSize; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    double* row = gw1.data() + static_cast<std::size_t>(i) * h;
    for (int k = 0; k < h; ++k) row[k] += dz[k] * xi;
  }
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

MlpParams::MlpParams(int hidden) : hidden_(hidden) {
  require(hidden >= 1 && hidden <= kMaxHidden,
          "hidden width must be in [1, " + std::to_string(kMaxHidden) + "], got " + std::to_string(hidden));
  data_.assign(size_for(hidden), 0.0);
}

void NodeCpd::fill(double v) {
  for (double& x : mean_net.data()) x = v;
  for (double& x : sigma_net.data()) x = v;
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sigma_link(double raw) { return softplus(raw) + kSigmaMin; }

double mlp_output(const MlpParams& net, PatchView x) {
  Activations act;
  run(net, x, act);
  return act.out;
}

GaussianParams forward(const NodeCpd& cpd, PatchView x) {
  Activations am, as;
  run(cpd.mean_net, x, am);
  run(cpd.sigma_net, x, as);
  const GaussianParams g{am.out, sigma_link(as.out)};
  if (!std::isfinite(g.mu) || !std::isfinite(g.sigma))
    fail(ErrorKind::numeric, "forward: non-finite output (corrupted parameters)");
  return g;
}

double nll(GaussianParams g, double x) {
  const double r = (x - g.mu) / g.sigma;
  return 0.5 * std::log(2.0 * std::numbers::pi) + std::log(g.sigma) + 0.5 * r * r;
}

void backprop(const NodeCpd& cpd, PatchView x, double dmu, double dsigma, NodeCpd& grad, double scale) {
  Activations am, as;
  run(cpd.mean_net, x, am);
  run(cpd.sigma_net, x, as);
  run_backward(cpd.mean_net, x, am, scale * dmu, grad.mean_net);
  run_backward(cpd.sigma_net, x, as, scale * dsigma * sigmoid(as.out), grad.sigma_net);
}

double accumulate_grad_nll(const NodeCpd& cpd, PatchView x, double target, NodeCpd& grad) {
  Activations am, as;
  run(cpd.mean_net, x, am);
  run(cpd.sigma_net, x, as);
  const double mu = am.out;
  const double sigma = sigma_link(as.out);
  if (!std::isfinite(mu) || !std::isfinite(sigma))
    fail(ErrorKind::numeric, "forward: non-finite output (corrupted parameters)");
  const double r = (target - mu) / sigma;
  const double dmu = -r / sigma;
  const double dsigma = (1.0 - r * r) / sigma;
  run_backward(cpd.mean_net, x, am, dmu, grad.mean_net);
  run_backward(cpd.sigma_net, x, as, dsigma * sigmoid(as.out), grad.sigma_net);
  return nll({mu, sigma}, target);
}

NodeCpd grad_nll(const NodeCpd& cpd, const NeighborhoodPatch& patch, double target) {
  NodeCpd grad(cpd.hidden());
  accumulate_grad_nll(cpd, patch.values, target, grad);
  check_finite(grad, "grad_nll");
  return grad;
}

NodeCpd init_cpd(std::uint64_t seed, int hidden) {
  NodeCpd cpd(hidden);
  std::mt19937_64 rng(seed);
  const auto glorot = [&](std::span<double> w, int fan_in, int fan_out) {
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-a, a);
    for (double& x : w) x = u(rng);
  };
  for (MlpParams* net : {&cpd.mean_net, &cpd.sigma_net}) {
    glorot(net->w1(), kPatchSize, hidden);
    glorot(net->w2(), hidden, 1);
  }
  // softplus^-1(1) = ln(e - 1), so the initial sigma is 1.
  cpd.sigma_net.b2() = std::log(std::numbers::e - 1.0);
  return cpd;
}

void check_finite(const NodeCpd& cpd, const char* what) {
  if (!all_finite(cpd.mean_net.data())) fail(ErrorKind::numeric, std::string(what) + ": non-finite entry in mean_net");
  if (!all_finite(cpd.sigma_net.data()))
    fail(ErrorKind::numeric, std::string(what) + ": non-finite entry in sigma_net");
}

}  // namespace wavecpd

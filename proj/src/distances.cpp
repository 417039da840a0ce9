#include "wavecpd/distances.hpp"

#include <cmath>
#include <string>

#include "wavecpd/error.hpp"

namespace wavecpd {

namespace {

void check_sigmas(double sigma1, double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0))
    fail(ErrorKind::invalid_argument, "distance: standard deviations must be positive (got " +
                                          std::to_string(sigma1) + ", " + std::to_string(sigma2) + ")");
}

}  // namespace

std::string_view to_string(DistanceKind k) { return k == DistanceKind::kl ? "kl" : "bh"; }

double kl(double mu1, double sigma1, double mu2, double sigma2) {
  check_sigmas(sigma1, sigma2);
  const double dm = mu1 - mu2;
  return std::log(sigma2) - std::log(sigma1) + (sigma1 * sigma1 + dm * dm) / (2.0 * sigma2 * sigma2) - 0.5;
}

double bh(double mu1, double sigma1, double mu2, double sigma2) {
  check_sigmas(sigma1, sigma2);
  const double v1 = sigma1 * sigma1;
  const double v2 = sigma2 * sigma2;
  const double dm = mu1 - mu2;
  return 0.25 * std::log(0.25 * (v1 / v2 + v2 / v1 + 2.0)) + dm * dm / (v1 + v2);
}

double bh_textbook(double mu1, double sigma1, double mu2, double sigma2) {
  check_sigmas(sigma1, sigma2);
  const double v1 = sigma1 * sigma1;
  const double v2 = sigma2 * sigma2;
  const double dm = mu1 - mu2;
  return 0.25 * std::log(0.25 * (v1 / v2 + v2 / v1 + 2.0)) + 0.25 * dm * dm / (v1 + v2);
}

DistanceGrad grad_kl(double mu1, double sigma1, double mu2, double sigma2) {
  check_sigmas(sigma1, sigma2);
  const double dm = mu1 - mu2;
  const double v2 = sigma2 * sigma2;
  return {
      dm / v2,
      sigma1 / v2 - 1.0 / sigma1,
      -dm / v2,
      1.0 / sigma2 - (sigma1 * sigma1 + dm * dm) / (v2 * sigma2),
  };
}

DistanceGrad grad_bh(double mu1, double sigma1, double mu2, double sigma2) {
  check_sigmas(sigma1, sigma2);
  const double dm = mu1 - mu2;
  const double sum = sigma1 * sigma1 + sigma2 * sigma2;
  const double mean_scale = dm * dm / (sum * sum);
  return {
      2.0 * dm / sum,
      sigma1 / sum - 0.5 / sigma1 - 2.0 * sigma1 * mean_scale,
      -2.0 * dm / sum,
      sigma2 / sum - 0.5 / sigma2 - 2.0 * sigma2 * mean_scale,
  };
}

double distance(DistanceKind kind, double mu1, double sigma1, double mu2, double sigma2) {
  return kind == DistanceKind::kl ? kl(mu1, sigma1, mu2, sigma2) : bh(mu1, sigma1, mu2, sigma2);
}

DistanceGrad grad_distance(DistanceKind kind, double mu1, double sigma1, double mu2, double sigma2) {
  return kind == DistanceKind::kl ? grad_kl(mu1, sigma1, mu2, sigma2) : grad_bh(mu1, sigma1, mu2, sigma2);
}

}  // namespace wavecpd

#pragma once

#include <array>
#include <string_view>

namespace wavecpd {

enum class DistanceKind { kl, bh };

std::string_view to_string(DistanceKind k);

/// Partials with respect to (mu1, sigma1, mu2, sigma2).
using DistanceGrad = std::array<double, 4>;

/// KL(N(mu1, sigma1^2) || N(mu2, sigma2^2)).
double kl(double mu1, double sigma1, double mu2, double sigma2);

/// Bhattacharyya-style distance used as the similarity penalty:
///   1/4 ln(1/4 (s1^2/s2^2 + s2^2/s1^2 + 2)) + (mu1 - mu2)^2 / (s1^2 + s2^2)
/// The mean term carries weight 1, not the textbook 1/4 (see bh_textbook).
double bh(double mu1, double sigma1, double mu2, double sigma2);

/// Standard Bhattacharyya distance, -ln of the Bhattacharyya coefficient.
/// Reference only; never used as a training penalty.
double bh_textbook(double mu1, double sigma1, double mu2, double sigma2);

DistanceGrad grad_kl(double mu1, double sigma1, double mu2, double sigma2);
DistanceGrad grad_bh(double mu1, double sigma1, double mu2, double sigma2);

double distance(DistanceKind kind, double mu1, double sigma1, double mu2, double sigma2);
DistanceGrad grad_distance(DistanceKind kind, double mu1, double sigma1, double mu2, double sigma2);

}  // namespace wavecpd

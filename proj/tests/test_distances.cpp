#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "wavecpd/distances.hpp"
#include "wavecpd/error.hpp"

using namespace wavecpd;

TEST_CASE("kl closed form on reference points") {
  CHECK(kl(0, 1, 0, 1) == 0.0);
  CHECK(kl(0, 1, 1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kl(0, 1, 0, 2) == doctest::Approx(std::log(2.0) + 0.125 - 0.5).epsilon(1e-15));
  CHECK(kl(0, 1, 0, 2) == doctest::Approx(0.318147).epsilon(1e-6));
  // Independent check by quadrature.
  CHECK(std::abs(kl(0, 1, 1, 1) - oracle::kl_quadrature(0, 1, 1, 1)) < 1e-10);
  CHECK(std::abs(kl(0, 1, 0, 2) - oracle::kl_quadrature(0, 1, 0, 2)) < 1e-10);
}

TEST_CASE("bh closed form on reference points") {
  CHECK(bh(0, 1, 0, 1) == 0.0);
  CHECK(bh(0, 1, 1, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(bh(0, 1, 0, 2) == doctest::Approx(0.25 * std::log(25.0 / 16.0)).epsilon(1e-15));
  CHECK(bh(0, 1, 0, 2) == doctest::Approx(0.111572).epsilon(1e-5));
}

TEST_CASE("textbook Bhattacharyya matches -ln of the overlap integral") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> mu(-5, 5), sig(0.3, 3);
  for (int i = 0; i < 50; ++i) {
    const double a = mu(rng), s = sig(rng), b = mu(rng), t = sig(rng);
    CHECK(std::abs(bh_textbook(a, s, b, t) - oracle::bhattacharyya_quadrature(a, s, b, t)) < 1e-9);
  }
  // The penalty variant weights the mean term by 1 instead of 1/4.
  CHECK(bh(0, 1, 1, 1) == doctest::Approx(4 * bh_textbook(0, 1, 1, 1)).epsilon(1e-14));
}

TEST_CASE("non-positive sigma is rejected") {
  CHECK_THROWS_AS(kl(0, 0, 0, 1), Error);
  CHECK_THROWS_AS(kl(0, 1, 0, -1), Error);
  CHECK_THROWS_AS(bh(0, -1, 0, 1), Error);
  CHECK_THROWS_AS(grad_bh(0, 1, 0, 0), Error);
  CHECK_THROWS_AS(grad_kl(0, 0, 0, 1), Error);
}

TEST_CASE("gradients at identical distributions vanish") {
  for (double g : grad_kl(0, 1, 0, 1)) CHECK(g == 0.0);
  for (double g : grad_bh(0, 1, 0, 1)) CHECK(g == 0.0);
  const auto g = grad_bh(0.7, 0.5, 0.7, 2.5);
  CHECK(g[0] == 0.0);
  CHECK(g[2] == 0.0);
}

TEST_CASE("distance gradients match central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mu(-3, 3), sig(0.2, 4);
  for (DistanceKind kind : {DistanceKind::kl, DistanceKind::bh}) {
    for (int trial = 0; trial < 200; ++trial) {
      double p[4] = {mu(rng), sig(rng), mu(rng), sig(rng)};
      const auto analytic = grad_distance(kind, p[0], p[1], p[2], p[3]);
      const auto numeric =
          oracle::central_differences([&] { return distance(kind, p[0], p[1], p[2], p[3]); }, p, 1e-6);
      const auto m = oracle::compare(analytic, numeric, 1e-5, 1e-8);
      INFO("kind=" << to_string(kind) << " trial=" << trial << " index=" << m.index);
      CHECK(m.failures == 0);
    }
  }
}

TEST_CASE("distance properties on random pairs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mu(-10, 10), sig(0.1, 10), c(0.01, 100);
  for (int i = 0; i < 500; ++i) {
    const double a = mu(rng), s = sig(rng), b = mu(rng), t = sig(rng);
    CHECK(kl(a, s, b, t) >= 0.0);
    CHECK(bh(a, s, b, t) >= 0.0);
    CHECK(bh(a, s, b, t) == bh(b, t, a, s));
    CHECK(std::abs(kl(a, s, a, s)) < 1e-12);
    const double k = c(rng);
    CHECK(kl(k * a, k * s, k * b, k * t) == doctest::Approx(kl(a, s, b, t)).epsilon(1e-10));
    CHECK(bh(k * a, k * s, k * b, k * t) == doctest::Approx(bh(a, s, b, t)).epsilon(1e-10));
  }
  // Asymmetry witness.
  CHECK(kl(0, 1, 0, 2) != doctest::Approx(kl(0, 2, 0, 1)));
}

TEST_CASE("kl agrees with quadrature on random pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mu(-10, 10), sig(0.1, 10);
  for (int i = 0; i < 100; ++i) {
    const double a = mu(rng), s = sig(rng), b = mu(rng), t = sig(rng);
    const double q = oracle::kl_quadrature(a, s, b, t);
    INFO(a << " " << s << " " << b << " " << t);
    CHECK(std::abs(kl(a, s, b, t) - q) <= 1e-8);
  }
}

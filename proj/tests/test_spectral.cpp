#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "spiked/errors.hpp"
#include "spiked/spectral.hpp"

using namespace spiked;

TEST_CASE("gauss-chebyshev rule: normalization, symmetry, second moment") {
  const auto rule = semicircle_quadrature(1.0, 64);
  double w = 0.0, wx = 0.0, wx2 = 0.0;
  for (int j = 0; j < rule.size(); ++j) {
    w += rule.weights[j];
    wx += rule.weights[j] * rule.nodes[j];
    wx2 += rule.weights[j] * rule.nodes[j] * rule.nodes[j];
  }
  CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(wx) < 1e-12);
  // Oracle: adaptive integration of x^2 (2/pi) sqrt(1-x^2) gives 0.25.
  CHECK(wx2 == doctest::Approx(oracles::semicircle_moment(1.0, 2)).epsilon(1e-12));
  CHECK(wx2 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("gauss-chebyshev rule: nodes strictly inside, invalid inputs") {
  const auto rule = semicircle_quadrature(2.0, 33);
  CHECK(rule.max_node() < 2.0);
  CHECK(rule.min_node() > -2.0);
  CHECK_THROWS_AS(semicircle_quadrature(0.0, 8), InvalidParameterError);
  CHECK_THROWS_AS(semicircle_quadrature(1.0, 0), InvalidParameterError);
}

TEST_CASE("quadrature moments match brute-force integration, k = 0..8") {
  for (int m : {32, 64, 200}) {
    const auto rule = semicircle_quadrature(1.0, m);
    for (int k = 0; k <= 8; ++k) {
      double sum = 0.0;
      for (int j = 0; j < rule.size(); ++j) {
        sum += rule.weights[j] * std::pow(rule.nodes[j], k);
      }
      CHECK(std::abs(sum - oracles::semicircle_moment(1.0, k)) < 1e-10);
    }
  }
}

TEST_CASE("mgf: values against the Bessel-series oracle") {
  const auto mu = SpectralMeasure::semicircle(1.0);
  CHECK(mgf(mu, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  // Frozen from 2 I1(s w)/(s w) evaluated in extended precision.
  CHECK(mgf(mu, 1.0) == doctest::Approx(1.1303182079849701).epsilon(1e-6));
  CHECK(mgf(mu, 2.0) == doctest::Approx(1.5906368546373291).epsilon(1e-6));
  // Quadrature route agrees with the series route and the integral oracle.
  const auto rule = semicircle_quadrature(1.0, 200);
  for (double w : {-3.0, -1.0, 0.5, 2.0, 10.0}) {
    CHECK(mgf(rule, w) == doctest::Approx(mgf(mu, w)).epsilon(1e-13));
    CHECK(mgf(mu, w) == doctest::Approx(oracles::semicircle_mgf(1.0, w)).epsilon(1e-11));
  }
}

TEST_CASE("mgf bounds and overflow guard") {
  const auto mu = SpectralMeasure::semicircle(1.5);
  for (double w = -20.0; w <= 20.0; w += 0.7) {
    const double value = mgf(mu, w);
    CHECK(value <= std::exp(1.5 * std::abs(w)) * (1.0 + 1e-12));
    CHECK(value >= std::exp(-1.5 * std::abs(w)) * (1.0 - 1e-12));
  }
  CHECK_THROWS_AS(mgf(mu, 500.0), OverflowGuardError);
  const auto rule = semicircle_quadrature(1.5, 16);
  CHECK_THROWS_AS(mgf(rule, 500.0), OverflowGuardError);
}

TEST_CASE("stieltjes: closed form, reflection, domain error") {
  const auto mu = SpectralMeasure::semicircle(1.0);
  CHECK(stieltjes(mu, 1.25) == doctest::Approx(1.0).epsilon(1e-14));
  // S(lambda_tilde) = 1/lambda at lambda = 1.
  CHECK(stieltjes(mu, 1.0 + 0.25) == doctest::Approx(1.0).epsilon(1e-14));
  // Edge limit 2/sigma_star.
  CHECK(stieltjes(mu, 1.0 + 1e-12) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(stieltjes(mu, -2.0) == doctest::Approx(-stieltjes(mu, 2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(stieltjes(mu, 0.5), DomainError);
  CHECK_THROWS_AS(stieltjes(mu, -1.0), DomainError);
}

TEST_CASE("stieltjes: strictly decreasing, z S(z) -> 1") {
  const auto mu = SpectralMeasure::semicircle(1.0);
  double prev = stieltjes(mu, 1.0 + 1e-6);
  for (double z = 1.1; z < 50.0; z *= 1.3) {
    const double cur = stieltjes(mu, z);
    CHECK(cur < prev);
    prev = cur;
  }
  const double z = 1e6;
  CHECK(z * stieltjes(mu, z) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("inverse square moment: paper value, finite differences, atom") {
  const auto mu = SpectralMeasure::semicircle(1.0);
  CHECK(inverse_square_moment(mu, 1.25) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  // [E(1/(lt - sigma))^2]^{-1} = lambda^2 (1 - s^2/4 lambda^2) at lt = 1.25.
  CHECK(1.0 / inverse_square_moment(mu, 1.25) == doctest::Approx(0.75).epsilon(1e-14));
  const double fd = -oracles::central_difference(
      [&](double z) { return stieltjes(mu, z); }, 10.0, 1e-5);
  CHECK(inverse_square_moment(mu, 10.0) == doctest::Approx(fd).epsilon(1e-8));
  for (double z : {1.3, 2.0, 5.0}) {
    const double fd2 = -oracles::central_difference(
        [&](double x) { return stieltjes(mu, x); }, z, 1e-6);
    CHECK(std::abs(inverse_square_moment(mu, z) - fd2) < 1e-7);
  }
  const auto atom = SpectralMeasure::discrete({0.0}, {1.0});
  CHECK(inverse_square_moment(atom, 2.0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("semicircle quantiles: median, quartile, edges, empirical CDF") {
  CHECK(semicircle_quantiles(1.0, 1)[0] == doctest::Approx(0.0).epsilon(1e-12));

  // Oracle: bisection on the brute-force CDF for F^{-1}(0.75).
  double lo = 0.0, hi = 1.0;
  auto dens = oracles::semicircle_density(1.0);
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 + oracles::adaptive_simpson(dens, 0.0, mid);
    (cdf < 0.75 ? lo : hi) = mid;
  }
  const double q = 0.5 * (lo + hi);
  CHECK(q == doctest::Approx(0.40397275329951721).epsilon(1e-9));
  const auto two = semicircle_quantiles(1.0, 2);
  CHECK(two[0] == doctest::Approx(-q).epsilon(1e-3));
  CHECK(two[1] == doctest::Approx(q).epsilon(1e-3));

  const auto big = semicircle_quantiles(1.0, 1000);
  CHECK(big.back() > 0.99);
  CHECK(big.back() < 1.0);
  CHECK(big.front() < -0.99);
  CHECK(big.front() > -1.0);

  // sup |F_N - F| = 1/(2N) for midpoint quantiles.
  double sup = 0.0;
  for (std::size_t i = 0; i < big.size(); ++i) {
    const double f = semicircle_cdf(1.0, big[i]);
    sup = std::max(sup, std::abs(f - (i + 0.5) / big.size()));
  }
  CHECK(sup < 1.0 / big.size() + 1e-9);

  CHECK_THROWS_AS(semicircle_quantiles(1.0, 0), InvalidParameterError);
}

TEST_CASE("discrete measure: validation and CSV loading") {
  CHECK_THROWS_AS(SpectralMeasure::discrete({0.0, 1.0}, {0.5, 0.4}), InvalidParameterError);
  CHECK_THROWS_AS(SpectralMeasure::discrete({0.0}, {-1.0}), InvalidParameterError);

  const auto dir = std::filesystem::temp_directory_path() / "spiked_measure_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "measure.csv").string();
  {
    std::ofstream out(path);
    out << "sigma,weight\n-0.5,0.25\n0.5,0.75\n";
  }
  const auto mu = SpectralMeasure::discrete_from_csv(path);
  CHECK(mu.atoms().size() == 2);
  CHECK(mu.min_support() == -0.5);
  CHECK(mu.max_support() == 0.5);
  CHECK(mgf(mu, 1.0) ==
        doctest::Approx(0.25 * std::exp(-0.5) + 0.75 * std::exp(0.5)).epsilon(1e-15));

  {
    std::ofstream out(path);
    out << "a,b\n0,1\n";
  }
  CHECK_THROWS_AS(SpectralMeasure::discrete_from_csv(path), InvalidParameterError);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "sobolev/error.hpp"
#include "sobolev/manifolds.hpp"
#include "sobolev/potentials.hpp"

using namespace sobolev;

namespace {

// Brute-force maximum of the direction restriction over random unit vectors.
double brute_max(const HomogeneousPotential& f, int samples, std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const int k = f.k();
  double best = 0.0;
  Vec t(k);
  for (int s = 0; s < samples; ++s) {
    double r = 0.0;
    for (double& x : t) {
      x = nd(rng);
      r += x * x;
    }
    r = std::sqrt(r);
    for (double& x : t) x /= r;
    best = std::max(best, f.evaluate(t));
  }
  return best;
}

}  // namespace

TEST_CASE("lq power values and homogeneity") {
  const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  CHECK(f.evaluate({1.0, 1.0}) == doctest::Approx(16.0));
  CHECK(f.evaluate({0.0, 0.0}) == 0.0);
  CHECK(f.evaluate({-2.0, 0.5}) == doctest::Approx(std::pow(2.5, 4)));
  const double lambda = 1.7;
  CHECK(f.evaluate({lambda * 0.3, lambda * -0.8}) ==
        doctest::Approx(std::pow(lambda, 4) * f.evaluate({0.3, -0.8})));
}

TEST_CASE("maximizer search matches brute force") {
  SUBCASE("l1 norm to the fourth, k = 2") {
    const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
    const auto xf = max_on_direction_sphere(f);
    CHECK(xf.M_F == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(xf.points.size() == 4);
    CHECK(brute_max(f, 1000000) <= xf.M_F * (1.0 + 1e-12));
    CHECK(brute_max(f, 1000000) == doctest::Approx(xf.M_F).epsilon(1e-4));
  }
  SUBCASE("weighted power sum, k = 3") {
    const auto f = HomogeneousPotential::power_sum({1.0, 2.0, 0.5}, 3.0);
    const auto xf = max_on_direction_sphere(f);
    CHECK(xf.M_F == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(brute_max(f, 1000000) <= xf.M_F * (1.0 + 1e-12));
  }
  SUBCASE("euclidean norm is degenerate") {
    const auto xf = max_on_direction_sphere(HomogeneousPotential::lq_power(3, 2.0, 6.0));
    CHECK(xf.degenerate);
    CHECK(xf.M_F == doctest::Approx(1.0));
  }
}

TEST_CASE("maximizer search rejects non-positive potentials") {
  const auto f = HomogeneousPotential::custom(2, 4.0, [](std::span<const double> th) { return th[0]; });
  CHECK_THROWS_AS(max_on_direction_sphere(f), Error);
}

TEST_CASE("gradients agree with central differences") {
  const auto f = HomogeneousPotential::lq_power(3, 3.0, 5.0, 0.7);
  REQUIRE(f.has_gradient());
  const Vec t = {0.4, -1.1, 0.3};
  const Vec g = f.gradient(t);
  for (int i = 0; i < 3; ++i) {
    Vec a = t, b = t;
    const double h = 1e-6;
    a[i] += h;
    b[i] -= h;
    CHECK(g[i] == doctest::Approx((f.evaluate(a) - f.evaluate(b)) / (2 * h)).epsilon(1e-7));
  }
  const auto l1 = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  CHECK_FALSE(l1.has_gradient());
  CHECK_THROWS_AS(l1.gradient(Vec{1.0, 2.0}), Error);
}

TEST_CASE("composition with a linear map") {
  const double c = std::sqrt(0.5);
  const auto base = HomogeneousPotential::power_sum({1.0, 0.5}, 4.0);
  const auto fa = HomogeneousPotential::compose_linear(base, {c, c, -c, c});
  CHECK(fa.evaluate({c, c}) == doctest::Approx(1.0));
  CHECK(max_on_direction_sphere(fa).M_F == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("json round trip") {
  const auto f = HomogeneousPotential::power_sum({1.0, 0.25}, 4.0).scaled(3.0);
  const auto g = HomogeneousPotential::from_json(f.to_json());
  CHECK(g.evaluate({0.3, 0.9}) == doctest::Approx(f.evaluate({0.3, 0.9})));
  const auto G = SpatialPotential::abs_bilinear(
      2, {RadialCoefficient::constant(1.0), RadialCoefficient::cosine(0.2, 0.1), RadialCoefficient::cosine(0.2, 0.1),
          RadialCoefficient::constant(2.0)});
  const auto H = SpatialPotential::from_json(G.to_json());
  CHECK(H.evaluate(0.7, {0.5, -0.4}) == doctest::Approx(G.evaluate(0.7, {0.5, -0.4})));
}

TEST_CASE("spatial potentials") {
  const auto G = SpatialPotential::quadratic_form(
      2, {RadialCoefficient::constant(1.5), RadialCoefficient::constant(-0.5), RadialCoefficient::constant(-0.5),
          RadialCoefficient::constant(1.5)});
  CHECK(G.x_independent());
  CHECK(G.evaluate(0.0, {1.0, 1.0}) == doctest::Approx(2.0));
  CHECK(global_min_on_sphere(G, Vec{0.0}) == doctest::Approx(1.0).epsilon(1e-10));

  const auto B = SpatialPotential::beta_times(RadialCoefficient::cosine(2.0, 1.0),
                                              HomogeneousPotential::lq_power(1, 2.0, 2.0));
  CHECK_FALSE(B.x_independent());
  CHECK(B.evaluate(0.0, {2.0}) == doctest::Approx(12.0));
  CHECK(B.scaled(0.5).evaluate(0.0, {2.0}) == doctest::Approx(6.0));
}

TEST_CASE("m_FG along the maximizers") {
  const auto F = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  const auto G = SpatialPotential::abs_bilinear(
      2, {RadialCoefficient::constant(1.0), RadialCoefficient::constant(0.5), RadialCoefficient::constant(0.5),
          RadialCoefficient::constant(1.0)});
  const auto xf = max_on_direction_sphere(F);
  // On the diagonals |t1||t2| = 1/2, so G = 1 + 2 * 0.5 * 0.5.
  CHECK(m_FG(G, 0.0, xf) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK_THROWS_AS(m_FG(G, 0.0, MaximizerSet{}), Error);
}

TEST_CASE("smoothing keeps the certificate") {
  const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  const auto s = smooth(f, 0.05);
  CHECK(s.potential.has_gradient());
  CHECK(s.certificate <= 0.05);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  for (int i = 0; i < 2000; ++i) {
    const double a = ang(rng);
    const Vec t = {std::cos(a), std::sin(a)};
    CHECK(std::abs(s.potential.evaluate(t) - f.evaluate(t)) <= 0.05 * 1.1);
  }
  CHECK_THROWS_AS(smooth(f, 1e-9), Error);
  const auto same = smooth(HomogeneousPotential::lq_power(2, 2.0, 4.0), 0.1);
  CHECK(same.width == 0.0);
}

TEST_CASE("smoothed gradient is the derivative of the smoothed value") {
  const auto s = smooth(HomogeneousPotential::lq_power(2, 1.0, 4.0), 0.05).potential;
  const Vec t = {0.8, -0.35};
  const Vec g = s.gradient(t);
  for (int i = 0; i < 2; ++i) {
    Vec a = t, b = t;
    const double h = 1e-6;
    a[i] += h;
    b[i] -= h;
    CHECK(g[i] == doctest::Approx((s.evaluate(a) - s.evaluate(b)) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("Brezis-Lieb constant satisfies the two-point inequality") {
  const auto f = HomogeneousPotential::lq_power(2, 2.0, 2.0);
  const double eps = 1.0;
  const auto c = brezis_lieb_constant(f, eps);
  CHECK(c.verified == 100000);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 20000; ++i) {
    const Vec s = {nd(rng), nd(rng)}, t = {nd(rng) * 0.1, nd(rng) * 10.0};
    const Vec st = {s[0] + t[0], s[1] + t[1]};
    const double lhs = std::abs(f.evaluate(st) - f.evaluate(s));
    const double rhs = eps * (s[0] * s[0] + s[1] * s[1]) + c.C * (t[0] * t[0] + t[1] * t[1]);
    CHECK(lhs <= rhs * (1 + 1e-12));
  }
  CHECK_THROWS_AS(brezis_lieb_constant(f, 0.0), Error);
}

TEST_CASE("direct evaluations") {
  const auto e = HomogeneousPotential::lq_power(2, 2.0, 4.0);
  CHECK(e.evaluate({0.0, 0.0}) == 0.0);
  CHECK(e.evaluate({1.0, 1.0}) == doctest::Approx(4.0));
  const auto l1 = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  CHECK(l1.evaluate({0.6, 0.8}) == doctest::Approx(3.8416));
  const auto ps = HomogeneousPotential::power_sum({1.0, 0.5}, 4.0);
  const auto xf = max_on_direction_sphere(ps);
  CHECK(xf.M_F == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& p : xf.points) {
    CHECK(std::abs(p[0]) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(p[1]) < 1e-3);
  }
  CHECK(brute_max(ps, 1000000) <= 1.0 + 1e-12);
}

TEST_CASE("m_FG and global minima") {
  const auto unit = SpatialPotential::uniform(HomogeneousPotential::lq_power(2, 2.0, 2.0));
  const auto xf = max_on_direction_sphere(HomogeneousPotential::lq_power(2, 1.0, 4.0));
  CHECK(m_FG(unit, 0.4, xf) == doctest::Approx(1.0));
  CHECK(global_min_on_sphere(unit, Vec{0.0, 1.0}) == doctest::Approx(1.0));

  // Example-1 form with A_00 the smallest diagonal entry and X_F = {+-e1}.
  const auto G = SpatialPotential::abs_bilinear(
      2, {RadialCoefficient::constant(0.7), RadialCoefficient::constant(0.4), RadialCoefficient::constant(0.4),
          RadialCoefficient::constant(2.0)});
  const auto xe = max_on_direction_sphere(HomogeneousPotential::power_sum({1.0, 0.5}, 4.0));
  CHECK(m_FG(G, 0.0, xe) == doctest::Approx(0.7).epsilon(1e-6));

  const auto beta = SpatialPotential::beta_times(RadialCoefficient::cosine(2.0, 1.0),
                                                 HomogeneousPotential::lq_power(2, 2.0, 2.0));
  CHECK(m_FG(beta, 0.0, xf) == doctest::Approx(3.0));
  Vec xs;
  for (int i = 0; i <= 64; ++i) xs.push_back(M_PI * i / 64);
  CHECK(global_min_on_sphere(beta, xs) == doctest::Approx(1.0));
}

TEST_CASE("smoothing tolerance relative to the maximum") {
  const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  const auto s = smooth(f, 0.01);
  CHECK(s.certificate <= 0.01 * 4.0);
  const auto id = smooth(HomogeneousPotential::lq_power(2, 2.0, 4.0), 0.01);
  CHECK(id.certificate == 0.0);
}

TEST_CASE("Brezis-Lieb edge cases") {
  const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  const auto c = brezis_lieb_constant(f, 0.1);
  CHECK(std::isfinite(c.C));
  CHECK(c.M == doctest::Approx(16.0 * 4.0).epsilon(1e-9));
  CHECK(std::abs(f.evaluate({0.0, 0.0}) - f.evaluate({0.0, 0.0})) <= 0.0);

  const auto grid = make_grid(ModelManifold::round_sphere(4), {256});
  const auto U = VectorRadialField::from_function(grid, Vec{0.6, 0.8}, [](double r) { return 1.0 + std::cos(r); });
  const std::vector<VectorRadialField> same = {U, U, U};
  for (double d : brezis_lieb_defect(f, same, U)) CHECK(d == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<VectorRadialField> fam = {U, 2.0 * U};
  for (double d : brezis_lieb_defect(f, fam, 0.0 * U)) CHECK(d == 0.0);
}

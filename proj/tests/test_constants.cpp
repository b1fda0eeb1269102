#include <doctest.h>

#include <cmath>

#include "sobolev/constants.hpp"
#include "sobolev/error.hpp"

using namespace sobolev;

namespace {

double omega_recursive(int n) {
  double w = n % 2 == 0 ? 2.0 : 2.0 * M_PI;
  for (int m = n % 2 == 0 ? 2 : 3; m <= n; m += 2) w *= 2.0 * M_PI / (m - 1);
  return w;
}

// Closed form of the sharp Euclidean constant.
double a0_closed(int n) { return 4.0 / (n * (n - 2.0)) * std::pow(omega_recursive(n), -2.0 / n); }

const Bound* find(const BestConstantReport& r, const std::string& prov) {
  for (const auto& b : r.bounds)
    if (b.provenance == prov) return &b;
  return nullptr;
}

}  // namespace

TEST_CASE("Euclidean constant from the bubble") {
  for (int n = 3; n <= 8; ++n) CHECK(a0_euclidean(n) == doctest::Approx(a0_closed(n)).epsilon(1e-8));
  // The quotient is invariant under a w(b x).
  CHECK(bubble_rayleigh_quotient(5, 3.0, 0.4) == doctest::Approx(a0_closed(5)).epsilon(1e-7));
}

TEST_CASE("vector constant scales with M_F") {
  const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  CHECK(a0_vector(4, f) == doctest::Approx(2.0 * a0_closed(4)).epsilon(1e-8));
  const auto g = HomogeneousPotential::lq_power(3, 2.0, 6.0, 8.0);
  CHECK(a0_vector(3, g) == doctest::Approx(std::pow(8.0, 1.0 / 3.0) * a0_closed(3)).epsilon(1e-8));
}

TEST_CASE("scalar sphere constant") {
  for (int n = 3; n <= 7; ++n) {
    CHECK(b0_scalar_sphere(n) == doctest::Approx(std::pow(omega_recursive(n), -2.0 / n)).epsilon(1e-6));
    // Sphere identity n(n-2)/4 A0 = omega^{-2/n}.
    CHECK(n * (n - 2.0) / 4.0 * a0_euclidean(n) == doctest::Approx(b0_scalar_sphere(n)).epsilon(1e-6));
  }
}

TEST_CASE("pinch on the round sphere") {
  const int n = 4;
  const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  const auto g = SpatialPotential::uniform(HomogeneousPotential::lq_power(2, 2.0, 2.0));
  const auto rep = b0_bounds(f, g, ModelManifold::round_sphere(n));
  REQUIRE(rep.exact.has_value());
  // M_F = 4 so M_F^{2/2*} = 2, and m_G = 1.
  const double expect = 2.0 * std::pow(omega_recursive(n), -0.5);
  CHECK(*rep.exact == doctest::Approx(expect).epsilon(1e-6));
  CHECK_FALSE(rep.inconsistent);
  CHECK(rep.max_lower() <= rep.min_upper() * (1 + 1e-9));
  // Constants along t0 give the same value on the sphere.
  CHECK(find(rep, "trivial-test-function")->value == doctest::Approx(expect).epsilon(1e-6));
  // Geometric bound: c A0(n,F) n(n-1) / m_FG with m_FG = 1.
  CHECK(find(rep, "geometric")->value == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("torus has no scalar constant") {
  const auto f = HomogeneousPotential::lq_power(2, 2.0, 4.0);
  const auto g = SpatialPotential::uniform(HomogeneousPotential::lq_power(2, 2.0, 2.0));
  const auto m = ModelManifold::flat_torus(4, 2.0);
  const auto rep = b0_bounds(f, g, m);
  CHECK_FALSE(rep.b0_scalar.has_value());
  CHECK(find(rep, "des1-lower") == nullptr);
  // Constants: (V)^{2/n} / V on a torus of volume 16.
  CHECK(find(rep, "trivial-test-function")->value == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(find(rep, "geometric")->value == doctest::Approx(0.0));
  BoundsOptions opt;
  opt.require_scalar_b0 = true;
  CHECK_THROWS_AS(b0_bounds(f, g, m, opt), Error);
}

TEST_CASE("dimension mismatch is rejected") {
  const auto f = HomogeneousPotential::lq_power(2, 2.0, 4.0);
  const auto g = SpatialPotential::uniform(HomogeneousPotential::lq_power(3, 2.0, 2.0));
  CHECK_THROWS_AS(b0_bounds(f, g, ModelManifold::round_sphere(4)), Error);
}

TEST_CASE("geometric threshold and B_eps") {
  const auto f = HomogeneousPotential::lq_power(1, 2.0, 10.0 / 3.0);
  const auto g = SpatialPotential::uniform(HomogeneousPotential::lq_power(1, 2.0, 2.0));
  const auto m = ModelManifold::round_sphere(5);
  const double th = geometric_threshold(f, g, m, 0.0);
  CHECK(th == doctest::Approx(3.0 / 16.0 * a0_closed(5) * 20.0).epsilon(1e-8));
  CHECK(b_epsilon(f, g, m, 0.0, 0.1) == doctest::Approx(th + 0.1));
}

TEST_CASE("reference upper bounds") {
  const double w = std::pow(omega_recursive(4), 0.5);
  CHECK(reference_upper_bounds(4, ReferenceModel::S1xSn1) == doctest::Approx(5.0 / (8.0 * w)));
  CHECK(reference_upper_bounds(4, ReferenceModel::ProjectiveSpace) == doctest::Approx(3.0 / w));
  CHECK_THROWS_AS(reference_upper_bounds(2, ReferenceModel::S1xSn1), Error);
}

TEST_CASE("dichotomy on the Hebey conformal sphere") {
  const int n = 4;
  const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  const auto g = SpatialPotential::uniform(HomogeneousPotential::lq_power(2, 2.0, 2.0));
  const auto m = ModelManifold::conformal_sphere(n, ConformalFactor::gaussian_spike(1.0, 0.5));
  BoundsOptions opt;
  opt.hebey_conformal = true;
  auto rep = b0_bounds(f, g, m, opt);
  REQUIRE(rep.b0_scalar.has_value());
  const auto v = classify_dichotomy(rep, f, g, m);
  CHECK(v.verdict != DichotomyVerdict::Kind::Undetermined);
  CHECK(v.threshold_sup > 0.0);
}

TEST_CASE("scalar constant vectors") {
  CHECK(b0_scalar_sphere(3) == doctest::Approx(std::pow(2.0 * M_PI * M_PI, -2.0 / 3.0)).epsilon(1e-8));
  CHECK(b0_scalar_sphere(4) == doctest::Approx(std::pow(8.0 * M_PI * M_PI / 3.0, -0.5)).epsilon(1e-8));
  const auto e = HomogeneousPotential::lq_power(3, 2.0, 4.0);
  CHECK(a0_vector(4, e) == doctest::Approx(a0_euclidean(4)).epsilon(1e-12));
  for (int n : {4, 5}) {
    const double w = std::pow(omega_recursive(n), -2.0 / n);
    // The product bound sits below the sphere value: (1 + (n-2)^2) < n(n-2).
    CHECK(reference_upper_bounds(n, ReferenceModel::S1xSn1) / w ==
          doctest::Approx((1.0 + (n - 2.0) * (n - 2.0)) / (n * (n - 2.0))).epsilon(1e-6));
    CHECK(reference_upper_bounds(n, ReferenceModel::ProjectiveSpace) > w);
  }
}

TEST_CASE("scalar case collapses the interval") {
  for (int n : {4, 5}) {
    const auto f = HomogeneousPotential::lq_power(1, 2.0, two_star(n));
    const auto g = SpatialPotential::uniform(HomogeneousPotential::lq_power(1, 2.0, 2.0));
    const auto S = ModelManifold::round_sphere(n);
    const auto rep = b0_bounds(f, g, S);
    const double w = std::pow(omega_recursive(n), -2.0 / n);
    CHECK(find(rep, "des1-lower")->value == doctest::Approx(w).epsilon(1e-8));
    CHECK(find(rep, "des1-upper")->value == doctest::Approx(w).epsilon(1e-8));
    CHECK(geometric_threshold(f, g, S, 0.3) == doctest::Approx(w).epsilon(1e-6));
    CHECK(geometric_threshold(f, g.scaled(4.0), S, 0.3) == doctest::Approx(w / 4.0).epsilon(1e-6));
    CHECK(b_epsilon(f, g, S, 0.0, 0.1) == doctest::Approx(w + 0.1).epsilon(1e-6));
    CHECK(geometric_threshold(f, g, ModelManifold::flat_torus(n, 2.0), 0.1) == 0.0);
    CHECK(b_epsilon(f, g, ModelManifold::flat_torus(n, 2.0), 0.0, 0.3) == doctest::Approx(0.3));
  }
}

TEST_CASE("classifier interval logic") {
  const int n = 4;
  const auto f = HomogeneousPotential::lq_power(1, 2.0, 4.0);
  const auto g = SpatialPotential::uniform(HomogeneousPotential::lq_power(1, 2.0, 2.0));
  const auto S = ModelManifold::round_sphere(n);
  const double w = std::pow(omega_recursive(n), -0.5);
  BestConstantReport rep;
  rep.bounds = {{BoundSide::Lower, 0.5 * w, "trivial-test-function", true, {}},
                {BoundSide::Upper, 2.0 * w, "des1-upper", true, {}}};
  CHECK(classify_dichotomy(rep, f, g, S).verdict == DichotomyVerdict::Kind::Undetermined);
  rep.bounds[0].value = 1.5 * w;
  CHECK(classify_dichotomy(rep, f, g, S).verdict == DichotomyVerdict::Kind::StrictlyAbove);
  rep.exact = w;
  CHECK(classify_dichotomy(rep, f, g, S).verdict == DichotomyVerdict::Kind::TouchesWithin);
  // Torus: the threshold vanishes and the trivial bound is positive.
  const auto T = ModelManifold::flat_torus(n, 2.0);
  CHECK(classify_dichotomy(b0_bounds(f, g, T), f, g, T).verdict == DichotomyVerdict::Kind::StrictlyAbove);
}

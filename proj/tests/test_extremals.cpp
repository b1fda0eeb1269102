#include <doctest.h>

#include <cmath>

#include "sobolev/constants.hpp"
#include "sobolev/error.hpp"
#include "sobolev/extremals.hpp"

using namespace sobolev;

namespace {

double omega_recursive(int n) {
  double w = n % 2 == 0 ? 2.0 : 2.0 * M_PI;
  for (int m = n % 2 == 0 ? 2 : 3; m <= n; m += 2) w *= 2.0 * M_PI / (m - 1);
  return w;
}

// Composite Simpson rule for omega_{n-1} int_0^pi u^{2*} sin^{n-1} r dr.
double sphere_norm_simpson(int n, double beta, int panels = 20000) {
  const double p = 2.0 * n / (n - 2.0);
  const double c = std::pow(beta * beta - 1.0, (n - 2) / 4.0) * std::pow(omega_recursive(n), -1.0 / p);
  auto g = [&](double r) { return std::pow(c * std::pow(beta - std::cos(r), 1.0 - n / 2.0), p) * std::pow(std::sin(r), n - 1); };
  const double h = M_PI / panels;
  double s = g(0.0) + g(M_PI);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * g(i * h);
  return omega_recursive(n - 1) * s * h / 3.0;
}

}  // namespace

TEST_CASE("bubble values") {
  CHECK(bubble_value(4, 1.0, 1.0, 0.0) == 1.0);
  CHECK(bubble_value(4, 2.0, 3.0, 1.0) == doctest::Approx(2.0 / 10.0));
  CHECK(bubble_value(5, 1.0, 1.0, 1.0) == doctest::Approx(std::pow(2.0, -1.5)));
  CHECK(bubble_value(4, 1.0, 1.0, INFINITY) == 0.0);
}

TEST_CASE("sphere extremal has unit norm") {
  for (int n : {3, 4, 5, 6})
    for (double beta : {1.05, 1.5, 3.0}) CHECK(sphere_norm_simpson(n, beta) == doctest::Approx(1.0).epsilon(1e-9));
  const auto grid = make_grid(ModelManifold::round_sphere(4), {4096});
  const auto U = sphere_extremal_profile({4, 1.5, {1.0}}, grid);
  CHECK(lp_integral(U, 4.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(U.at(0, 0) == doctest::Approx(sphere_extremal_value(4, 1.5, 0.0)));
}

TEST_CASE("sphere extremal equality residual") {
  for (int n : {3, 4, 5}) {
    const auto grid = make_grid(ModelManifold::round_sphere(n), {2048});
    const InequalityConstants c{a0_euclidean(n), b0_scalar_sphere(n)};
    for (double beta : {1.1, 1.5, 2.0}) {
      const auto U = sphere_extremal_profile({n, beta, {1.0}}, grid);
      const auto rep = equality_residual(U, Inequality::BOpt, c);
      CHECK(std::abs(rep.relative) < 1e-5);
      CHECK(rep.lhs == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
}

TEST_CASE("bubble equality residual") {
  for (int n : {3, 4, 5}) {
    const double b = 2.0;
    GridOptions opt;
    opt.N = 4096;
    opt.scale = 1.0 / b;
    const auto grid = make_grid(ModelManifold::euclidean(n), opt);
    const auto U = bubble_profile({n, 3.0, b, {1.0}}, grid);
    const auto rep = equality_residual(U, Inequality::E1, {a0_euclidean(n), std::nullopt});
    CHECK(std::abs(rep.relative) < 1e-5);
  }
}

TEST_CASE("errors") {
  const auto sphere = make_grid(ModelManifold::round_sphere(4), {256});
  CHECK_THROWS_AS(sphere_extremal_profile({4, 1.0, {1.0}}, sphere), Error);
  CHECK_THROWS_AS(bubble_profile({4, 1.0, 1.0, {1.0}}, sphere), Error);
  const auto U = sphere_extremal_profile({4, 2.0, {1.0}}, sphere);
  CHECK_THROWS_AS(equality_residual(U, Inequality::BOpt, {a0_euclidean(4), std::nullopt}), Error);
  CHECK_THROWS_AS(equality_residual(U, Inequality::BOptV, {1.0, 1.0}), Error);
  ErrorCode code = ErrorCode::IoError;
  try {
    sphere_extremal_profile({4, 0.5, {1.0}}, sphere);
  } catch (const Error& e) {
    code = e.code();
  }
  CHECK(code == ErrorCode::BetaOutOfRange);
}

TEST_CASE("factorization recovers the direction") {
  const auto grid = make_grid(ModelManifold::round_sphere(4), {512});
  const double c = std::sqrt(0.5);
  const Vec t0 = {c, c};
  const auto U = sphere_extremal_profile({4, 1.3, t0}, grid);
  const auto f = HomogeneousPotential::lq_power(2, 1.0, 4.0);
  const auto fac = extremal_factorization(U, f);
  CHECK(fac.t0[0] == doctest::Approx(c));
  CHECK(fac.t0[1] == doctest::Approx(c));
  CHECK(fac.deviation < 1e-12);
  CHECK(fac.t0_maximizes_F);
  CHECK(fac.M_F == doctest::Approx(4.0));

  const auto V = sphere_extremal_profile({4, 1.3, {1.0, 0.0}}, grid);
  CHECK_FALSE(extremal_factorization(V, f).t0_maximizes_F);
  // Mixing two profiles along different directions is not a product.
  auto W = V;
  for (std::size_t i = 0; i < W.size(); ++i) W.at(i, 1) = std::cos(grid->r()[i]);
  CHECK(extremal_factorization(W, f).deviation > 1e-2);
  CHECK_THROWS_AS(extremal_factorization(0.0 * V, f), Error);
}

TEST_CASE("beta ladder and family") {
  const Vec betas = default_beta_ladder();
  REQUIRE(betas.size() == 40);
  CHECK(betas.front() - 1.0 == doctest::Approx(1e-3));
  CHECK(betas.back() - 1.0 == doctest::Approx(10.0));
  const auto rows = sphere_extremal_family(4, {3.0, 1.5, 1.1}, 2048);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].norm == doctest::Approx(1.0).epsilon(1e-5));
    if (i > 0) CHECK(rows[i].pole_amplitude > rows[i - 1].pole_amplitude);
  }
}

TEST_CASE("bubble value at r = 1") {
  // Exponent n/2* = (n-2)/2, which is 1 in dimension four.
  CHECK(bubble_value(4, 1.0, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(bubble_value(6, 1.0, 1.0, 1.0) == doctest::Approx(0.25));
}

TEST_CASE("flat limit of the sphere extremal") {
  const int n = 4;
  const double c = std::pow(omega_recursive(n), -1.0 / two_star(n));
  for (double r : {0.0, 1.0, 2.0, M_PI}) CHECK(sphere_extremal_value(n, 1e3, r) == doctest::Approx(c).epsilon(1e-3));
}

TEST_CASE("constants saturate the trivial bound on the torus") {
  const int n = 4;
  const auto grid = make_grid(ModelManifold::flat_torus(n, 2.0), {512});
  const auto U = VectorRadialField::from_function(grid, Vec{1.0}, [](double) { return 1.0; });
  const double V = 16.0;
  const auto rep = equality_residual(U, Inequality::BOpt, {a0_euclidean(n), std::pow(V, -2.0 / n)});
  CHECK(std::abs(rep.residual) <= 1e-12 * rep.rhs);
}

TEST_CASE("rank-one fields factorize") {
  const int n = 4;
  GridOptions opt;
  opt.N = 2048;
  const auto grid = make_grid(ModelManifold::euclidean(n), opt);
  const auto f = HomogeneousPotential::lq_power(2, 2.0, 4.0);
  VectorRadialField U(grid, 2), W(grid, 2);
  for (std::size_t i = 0; i < U.size(); ++i) {
    const double r = grid->r()[i];
    U.at(i, 0) = U.at(i, 1) = bubble_value(n, 1.0, 1.0, r);
    W.at(i, 0) = bubble_value(n, 1.0, 1.0, r);
    W.at(i, 1) = bubble_value(n, 1.0, 2.0, r);
  }
  const auto a = extremal_factorization(U, f);
  CHECK(a.deviation < 1e-12);
  CHECK(std::abs(a.t0[0]) == doctest::Approx(std::sqrt(0.5)));
  CHECK(std::abs(a.t0[1]) == doctest::Approx(std::sqrt(0.5)));
  CHECK(extremal_factorization(W, f).deviation > 0.05);
}

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sobolev/error.hpp"
#include "sobolev/manifolds.hpp"

using namespace sobolev;

namespace {

// omega_0 = 2, omega_1 = 2 pi, omega_n = 2 pi / (n - 1) omega_{n-2}.
double omega_recursive(int n) {
  double w = n % 2 == 0 ? 2.0 : 2.0 * M_PI;
  for (int m = n % 2 == 0 ? 2 : 3; m <= n; m += 2) w *= 2.0 * M_PI / (m - 1);
  return w;
}

}  // namespace

TEST_CASE("sphere areas") {
  for (int n = 1; n <= 9; ++n) CHECK(omega(n) == doctest::Approx(omega_recursive(n)).epsilon(1e-13));
  CHECK(omega(2) == doctest::Approx(4.0 * M_PI));
  CHECK(two_star(4) == 4.0);
  CHECK(two_star(3) == 6.0);
}

TEST_CASE("volumes by quadrature") {
  for (int n = 3; n <= 6; ++n) {
    CHECK(volume(ModelManifold::round_sphere(n)) == doctest::Approx(omega_recursive(n)).epsilon(1e-6));
    CHECK(volume(ModelManifold::flat_torus(n, 2.0)) == doctest::Approx(std::pow(2.0, n)).epsilon(1e-9));
  }
  const auto conf = ModelManifold::conformal_sphere(4, ConformalFactor::identity());
  CHECK(volume(conf) == doctest::Approx(omega_recursive(4)).epsilon(1e-6));
}

TEST_CASE("scalar curvature") {
  for (int n = 3; n <= 6; ++n) {
    CHECK(scalar_curvature(ModelManifold::round_sphere(n), 0.7) == doctest::Approx(n * (n - 1.0)));
    CHECK(scalar_curvature(ModelManifold::flat_torus(n, 1.0), 0.3) == doctest::Approx(0.0));
    const auto conf = ModelManifold::conformal_sphere(n, ConformalFactor::identity());
    CHECK(scalar_curvature(conf, 1.3) == doctest::Approx(n * (n - 1.0)).epsilon(1e-6));
  }
  // Pulling back by a constant factor c rescales curvature by c^{-4/(n-2)}.
  const int n = 4;
  const auto scaled = ModelManifold::conformal_sphere(n, ConformalFactor::table({0.0, 1.0, 2.0, M_PI}, {2.0, 2.0, 2.0, 2.0}));
  CHECK(scalar_curvature(scaled, 1.0) == doctest::Approx(n * (n - 1.0) / 4.0).epsilon(1e-6));
}

TEST_CASE("Laplacian of the first eigenfunction") {
  for (int n : {3, 4, 5}) {
    const RadialGrid grid(ModelManifold::round_sphere(n), {1024});
    Vec u(grid.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::cos(grid.r()[i]);
    const Vec lap = radial_laplacian(u, grid);
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < u.size(); ++i) err = std::max(err, std::abs(lap[i] + n * u[i]));
    CHECK(err < 1e-3);
    // Green's identity: int |grad u|^2 = n int u^2.
    double l2 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) l2 += grid.mass()[i] * u[i] * u[i];
    CHECK(dirichlet(u, grid) == doctest::Approx(n * l2).epsilon(1e-4));
  }
}

TEST_CASE("constants have no energy") {
  const auto grid = make_grid(ModelManifold::flat_torus(4, 2.0));
  const Vec t0 = {0.6, 0.8};
  const auto U = VectorRadialField::from_function(grid, t0, [](double) { return 1.0; });
  CHECK(gradient_dirichlet(U) == doctest::Approx(0.0));
  CHECK(l2_squared(U) == doctest::Approx(16.0).epsilon(1e-9));
  CHECK(lp_integral(U, 4.0) == doctest::Approx(16.0).epsilon(1e-9));
}

TEST_CASE("ball masses") {
  const auto grid = make_grid(ModelManifold::flat_torus(3, 2.0));
  const Vec t0 = {1.0};
  const auto U = VectorRadialField::from_function(grid, t0, [](double) { return 1.0; });
  // The torus ball about the pole hyperplane is a slab of width 2 delta.
  CHECK(ball_mass(U, 0.3, Integrand::L2) == doctest::Approx(2 * 0.3 * 4.0).epsilon(1e-6));
  CHECK(ball_mass(U, 5.0, Integrand::L2) == doctest::Approx(8.0).epsilon(1e-9));

  const auto sg = make_grid(ModelManifold::round_sphere(4));
  const auto V = VectorRadialField::from_function(sg, t0, [](double) { return 1.0; });
  const double delta = 0.8;
  // Cap area: omega_{n-1} int_0^delta sin^{n-1}.
  const double cap = omega_recursive(3) * (2.0 / 3.0 - std::cos(delta) + std::pow(std::cos(delta), 3) / 3.0);
  CHECK(ball_mass(V, delta, Integrand::L2) == doctest::Approx(cap).epsilon(1e-4));
}

TEST_CASE("field arithmetic and grid checks") {
  const auto g1 = make_grid(ModelManifold::round_sphere(4), {256});
  const auto g2 = make_grid(ModelManifold::round_sphere(4), {512});
  const Vec t0 = {1.0, 0.0};
  auto a = VectorRadialField::from_function(g1, t0, [](double r) { return std::cos(r); });
  auto b = 2.0 * a;
  CHECK((b - a).at(3, 0) == doctest::Approx(a.at(3, 0)));
  const auto c = VectorRadialField::from_function(g2, t0, [](double) { return 1.0; });
  CHECK_THROWS_AS(a += c, Error);
  CHECK_THROWS_AS(quadrature(Vec(3, 1.0), *g1), Error);
}

TEST_CASE("field csv round trip") {
  const auto grid = make_grid(ModelManifold::round_sphere(3), {128});
  const Vec t0 = {0.6, -0.8};
  const auto U = VectorRadialField::from_function(grid, t0, [](double r) { return 1.0 + std::cos(r); });
  const auto path = (std::filesystem::temp_directory_path() / "sobolev_field_test.csv").string();
  write_field_csv(U, path);
  const auto V = read_field_csv(grid, path);
  std::remove(path.c_str());
  for (std::size_t i = 0; i < U.data().size(); ++i) CHECK(V.data()[i] == doctest::Approx(U.data()[i]).epsilon(1e-12));
}

TEST_CASE("manifold json round trip") {
  const auto m = ModelManifold::flat_torus(5, 1.5);
  const auto back = ModelManifold::from_json(m.to_json());
  CHECK(back.kind() == ManifoldKind::FlatTorus);
  CHECK(back.n() == 5);
  CHECK(back.side() == 1.5);
  CHECK_FALSE(ModelManifold::euclidean(4).compact());
}

TEST_CASE("volume vectors") {
  CHECK(volume(ModelManifold::flat_torus(4, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(volume(ModelManifold::round_sphere(3)) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-8));
  CHECK(volume(ModelManifold::round_sphere(4)) == doctest::Approx(8.0 * M_PI * M_PI / 3.0).epsilon(1e-8));
}

TEST_CASE("quadrature vectors") {
  const int n = 3;
  const RadialGrid grid(ModelManifold::round_sphere(n), {2048});
  Vec c(grid.size()), h(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    c[i] = std::cos(grid.r()[i]);
    h[i] = grid.r()[i] <= M_PI / 2 ? 1.0 : 0.0;
  }
  CHECK(std::abs(quadrature(c, grid)) < 1e-8);
  // The half-sphere indicator jumps at a node, so lumped masses give half the node there.
  CHECK(quadrature(h, grid) == doctest::Approx(omega_recursive(n) / 2.0).epsilon(1e-3));
  // int |d cos r|^2 = omega_2 int sin^2 r sin^2 r dr = 4 pi 3 pi / 8.
  CHECK(dirichlet(c, grid) == doctest::Approx(1.5 * M_PI * M_PI).epsilon(1e-6));
}

TEST_CASE("Laplacian vectors") {
  const RadialGrid sphere(ModelManifold::round_sphere(4), {512});
  for (double v : radial_laplacian(Vec(sphere.size(), 1.0), sphere)) CHECK(v == doctest::Approx(0.0).scale(1.0));
  for (int n : {3, 4, 5}) {
    GridOptions opt;
    opt.N = 513;
    opt.r_max = 2.0;
    const RadialGrid g(ModelManifold::euclidean(n), opt);
    Vec u(g.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = g.r()[i] * g.r()[i];
    const Vec lap = radial_laplacian(u, g);
    double err = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) err = std::max(err, std::abs(lap[i] - 2.0 * n));
    CHECK(err < 1e-6);
  }
}

TEST_CASE("ball mass limits") {
  const auto grid = make_grid(ModelManifold::round_sphere(4), {1024});
  const auto U = VectorRadialField::from_function(grid, Vec{1.0}, [](double r) { return 2.0 + std::cos(r); });
  CHECK(ball_mass(U, 0.0, Integrand::L2) == 0.0);
  CHECK(ball_mass(U, grid->rho_max(), Integrand::L2) == doctest::Approx(l2_squared(U)).epsilon(1e-12));
  CHECK(ball_mass(U, grid->rho_max(), Integrand::Dirichlet) == doctest::Approx(gradient_dirichlet(U)).epsilon(1e-12));
}

#include "sobolev/extremals.hpp"

#include <algorithm>
#include <cmath>

#include "sobolev/constants.hpp"
#include "sobolev/error.hpp"
#include "vector_ops.hpp"

namespace sobolev {

namespace {

Vec unit_direction(const Vec& t0) {
  Vec t = t0;
  if (detail::norm(t) == 0.0) throw Error(ErrorCode::InvalidArgument, "t0 must be nonzero");
  detail::normalize(t);
  return t;
}

}  // namespace

double bubble_value(int n, double a, double b, double r) {
  if (std::isinf(r)) return 0.0;
  const double br = b * r;
  return a * std::pow(1.0 + br * br, -(n - 2) / 2.0);
}

VectorRadialField bubble_profile(const BubbleParams& p, GridPtr grid) {
  if (grid->manifold().kind() != ManifoldKind::Euclidean) {
    throw Error(ErrorCode::InvalidArgument, "bubble profiles live on the Euclidean chart");
  }
  if (p.b == 0.0) throw Error(ErrorCode::InvalidArgument, "bubble scale b must be nonzero");
  const Vec t0 = unit_direction(p.t0);
  const int n = grid->n();
  return VectorRadialField::from_function(grid, t0,
                                          [&](double r) { return bubble_value(n, p.a, p.b, r); });
}

double sphere_extremal_value(int n, double beta, double r) {
  if (!(beta > 1.0)) throw Error(ErrorCode::BetaOutOfRange, "beta must exceed 1, got " + detail::fmt(beta));
  return std::pow(beta * beta - 1.0, (n - 2) / 4.0) * std::pow(omega(n), -1.0 / two_star(n)) *
         std::pow(beta - std::cos(r), 1.0 - n / 2.0);
}

VectorRadialField sphere_extremal_profile(const SphereExtremalParams& p, GridPtr grid) {
  if (!(p.beta > 1.0)) {
    throw Error(ErrorCode::BetaOutOfRange, "beta must exceed 1, got " + detail::fmt(p.beta));
  }
  if (grid->manifold().kind() != ManifoldKind::RoundSphere) {
    throw Error(ErrorCode::InvalidArgument, "sphere extremals need a round sphere grid");
  }
  const Vec t0 = unit_direction(p.t0);
  const int n = grid->n();
  return VectorRadialField::from_function(grid, t0,
                                          [&](double r) { return sphere_extremal_value(n, p.beta, r); });
}

ResidualReport equality_residual(const VectorRadialField& U, Inequality which,
                                 const InequalityConstants& c, const HomogeneousPotential* f,
                                 const SpatialPotential* g) {
  if (!c.A) throw Error(ErrorCode::MissingConstant, "the A constant is required");
  if (which != Inequality::E1 && !c.B) throw Error(ErrorCode::MissingConstant, "the B constant is required");
  if (which == Inequality::BOptV && g == nullptr) {
    throw Error(ErrorCode::MissingConstant, "B-opt-v needs the spatial potential G");
  }
  const int n = U.grid()->n();
  const double ts = two_star(n);

  double mass;
  if (which == Inequality::BOpt || f == nullptr) {
    mass = lp_integral(U, ts);
  } else {
    mass = integrate_F(*f, U);
  }
  ResidualReport rep;
  rep.lhs = std::pow(mass, 2.0 / ts);
  rep.rhs = *c.A * gradient_dirichlet(U);
  if (which == Inequality::BOpt) rep.rhs += *c.B * l2_squared(U);
  if (which == Inequality::BOptV) rep.rhs += *c.B * integrate_G(*g, U);
  rep.residual = rep.rhs - rep.lhs;
  rep.relative = rep.rhs != 0.0 ? rep.residual / std::abs(rep.rhs) : rep.residual;
  return rep;
}

Factorization extremal_factorization(const VectorRadialField& U, const HomogeneousPotential& f,
                                     double tol) {
  const auto& grid = *U.grid();
  const int k = U.k();
  const double ts = two_star(grid.n());
  const Vec a = U.norm_profile();
  const Vec& m = grid.mass();

  Vec t0(k, 0.0);
  for (std::size_t i = 0; i < U.size(); ++i) {
    if (a[i] == 0.0 || m[i] == 0.0) continue;
    const double w = m[i] * std::pow(a[i], ts - 2.0);
    for (int c = 0; c < k; ++c) t0[c] += w * U.at(i, c);
  }
  if (detail::norm(t0) == 0.0) {
    // A field like (w, -w) can cancel in the weighted mean; fall back to the
    // direction at the largest node.
    const auto imax = std::size_t(std::max_element(a.begin(), a.end()) - a.begin());
    if (a[imax] == 0.0) throw Error(ErrorCode::ZeroField, "cannot factorize a zero field");
    for (int c = 0; c < k; ++c) t0[c] = U.at(imax, c);
  }
  detail::normalize(t0);

  Factorization out;
  out.profile.resize(U.size());
  Vec rest(U.size());
  for (std::size_t i = 0; i < U.size(); ++i) {
    const auto u = U.node(i);
    const double p = detail::dot(u, t0);
    out.profile[i] = p;
    double d2 = 0.0;
    for (int c = 0; c < k; ++c) d2 += (u[c] - p * t0[c]) * (u[c] - p * t0[c]);
    rest[i] = d2;
  }
  Vec sq(U.size());
  for (std::size_t i = 0; i < U.size(); ++i) sq[i] = a[i] * a[i];
  const double total = quadrature(sq, grid);
  out.deviation = total > 0.0 ? std::sqrt(std::max(0.0, quadrature(rest, grid)) / total) : 0.0;
  out.t0 = t0;
  out.M_F = max_on_direction_sphere(f).M_F;
  out.F_t0 = f.evaluate(t0);
  out.t0_maximizes_F = out.F_t0 >= out.M_F * (1.0 - tol);
  return out;
}

Vec default_beta_ladder(int count) {
  Vec b(count);
  for (int i = 0; i < count; ++i) {
    const double s = count > 1 ? double(i) / (count - 1) : 0.0;
    b[i] = 1.0 + std::pow(10.0, -3.0 + 4.0 * s);
  }
  return b;
}

std::vector<SphereFamilyRow> sphere_extremal_family(int n, const Vec& betas, int grid_N) {
  const auto grid = make_grid(ModelManifold::round_sphere(n), {.N = grid_N});
  const InequalityConstants c{a0_euclidean(n), b0_scalar_sphere(n)};
  const double ts = two_star(n);
  std::vector<SphereFamilyRow> rows;
  for (double beta : betas) {
    const auto U = sphere_extremal_profile({n, beta, {1.0}}, grid);
    SphereFamilyRow row;
    row.beta = beta;
    row.pole_amplitude = sphere_extremal_value(n, beta, 0.0);
    row.norm = lp_integral(U, ts);
    row.residual = equality_residual(U, Inequality::BOpt, c).relative;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sobolev

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sobolev/potentials.hpp"

namespace sobolev {

/// Critical exponent 2n/(n-2).
inline double two_star(int n) { return 2.0 * n / (n - 2.0); }

/// Surface area of the unit sphere S^n in R^{n+1}.
double omega(int n);

/// Radial conformal factor u(r) > 0 on the sphere, with first and second
/// derivatives in r. Missing derivatives are taken by finite differences.
struct ConformalFactor {
  std::function<double(double)> u, du, d2u;
  Json source;  // description for reports

  static ConformalFactor identity();
  /// Natural spline through (r_j, u_j) on [0, pi].
  static ConformalFactor table(Vec r, Vec u);
  /// 1 + amp * exp(-(r/width)^2).
  static ConformalFactor gaussian_spike(double amp, double width);
  static ConformalFactor from_json(const Json& j);

  double derivative(double r) const;
  double second_derivative(double r) const;
};

enum class ManifoldKind { RoundSphere, FlatTorus, ConformalSphere, Euclidean };

/// One of the model manifolds, described through a radial coordinate r about a
/// pole: r in [0, pi] on spheres, the distance |x_1| to a coordinate
/// hyperplane on the torus, and |x| on the Euclidean chart used for bubbles.
class ModelManifold {
 public:
  static ModelManifold round_sphere(int n);
  static ModelManifold flat_torus(int n, double side);
  /// g = u^{4/(n-2)} h with h the round metric.
  static ModelManifold conformal_sphere(int n, ConformalFactor u);
  static ModelManifold euclidean(int n);

  ManifoldKind kind() const { return kind_; }
  int n() const { return n_; }
  double side() const { return side_; }
  const ConformalFactor& conformal_factor() const { return u_; }
  bool compact() const { return kind_ != ManifoldKind::Euclidean; }
  /// Upper end of the radial coordinate (infinity on the Euclidean chart).
  double r_end() const;
  /// Area density of the level set {r = const} in the background metric.
  double sigma(double r) const;

  std::string name() const;
  Json to_json() const;
  static ModelManifold from_json(const Json& j);

 private:
  ModelManifold(ManifoldKind kind, int n) : kind_(kind), n_(n) {}

  ManifoldKind kind_;
  int n_;
  double side_ = 1.0;
  ConformalFactor u_ = ConformalFactor::identity();
};

struct GridOptions {
  int N = 2048;
  /// Truncation radius; 0 keeps the full range. On the Euclidean chart a
  /// positive value gives a uniform grid on [0, r_max], and 0 selects the
  /// compactified map r = scale * tan(s).
  double r_max = 0.0;
  double scale = 1.0;
};

/// Radial discretization: nodes r_i = r(s_i) on a uniform computational grid
/// s_i, lumped quadrature masses (trapezoid in s, density included), and
/// flux-form stiffness on the N-1 intervals.
class RadialGrid {
 public:
  RadialGrid(ModelManifold m, GridOptions opt = {});

  const ModelManifold& manifold() const { return m_; }
  int n() const { return m_.n(); }
  std::size_t size() const { return r_.size(); }
  const Vec& r() const { return r_; }
  /// Geodesic distance to the pole in the (possibly conformal) metric.
  const Vec& rho() const { return rho_; }
  const Vec& mass() const { return mass_; }
  const Vec& stiffness() const { return kappa_; }
  /// Conformal factor at the nodes (1 unless ConformalSphere).
  const Vec& conformal() const { return conf_; }
  double r_max() const { return r_.back(); }
  double rho_max() const { return rho_.back(); }
  const GridOptions& options() const { return opt_; }

 private:
  ModelManifold m_;
  GridOptions opt_;
  Vec r_, rho_, mass_, kappa_, conf_;
  Vec cell_mass_;   // exact control-volume masses used by the Laplacian
  Vec pole_scale_;  // Laplacian regularization factor at zero-mass nodes
  friend Vec radial_laplacian(std::span<const double>, const RadialGrid&);
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(const ModelManifold& m, GridOptions opt = {});

/// A k-map U = (u_1, ..., u_k) of radial profiles about the pole.
class VectorRadialField {
 public:
  VectorRadialField(GridPtr grid, int k);
  VectorRadialField(GridPtr grid, int k, Vec data);
  /// t0 * u for a scalar profile u.
  static VectorRadialField from_profile(GridPtr grid, std::span<const double> t0,
                                        std::span<const double> u);
  static VectorRadialField from_function(GridPtr grid, std::span<const double> t0,
                                         const std::function<double(double)>& u);

  const GridPtr& grid() const { return grid_; }
  int k() const { return k_; }
  std::size_t size() const { return grid_->size(); }

  double& at(std::size_t i, int c) { return data_[i * k_ + c]; }
  double at(std::size_t i, int c) const { return data_[i * k_ + c]; }
  std::span<const double> node(std::size_t i) const { return {data_.data() + i * k_, std::size_t(k_)}; }
  std::span<double> node(std::size_t i) { return {data_.data() + i * k_, std::size_t(k_)}; }
  Vec component(int c) const;
  /// |U| at each node.
  Vec norm_profile() const;
  const Vec& data() const { return data_; }
  Vec& data() { return data_; }

  VectorRadialField& operator*=(double a);
  VectorRadialField& operator+=(const VectorRadialField& o);
  VectorRadialField& operator-=(const VectorRadialField& o);
  friend VectorRadialField operator*(double a, VectorRadialField u) { return u *= a; }
  friend VectorRadialField operator+(VectorRadialField a, const VectorRadialField& b) { return a += b; }
  friend VectorRadialField operator-(VectorRadialField a, const VectorRadialField& b) { return a -= b; }

 private:
  GridPtr grid_;
  int k_;
  Vec data_;
};

void require_same_grid(const VectorRadialField& a, const VectorRadialField& b);

double volume(const ModelManifold& m, int N = 2048);
double scalar_curvature(const ModelManifold& m, double r);
Vec scalar_curvature_profile(const RadialGrid& grid);
/// Laplacian of the conformal factor in the round metric.
double background_laplacian(const ConformalFactor& u, int n, double r);

/// sum_i m_i f_i; throws GridMismatch when sizes differ.
double quadrature(std::span<const double> f, const RadialGrid& grid);
/// Discrete Laplace-Beltrami operator (negative semidefinite).
Vec radial_laplacian(std::span<const double> u, const RadialGrid& grid);
/// sum_intervals kappa |u_{i+1} - u_i|^2 for a scalar profile.
double dirichlet(std::span<const double> u, const RadialGrid& grid);
double gradient_dirichlet(const VectorRadialField& U);
double integrate_F(const HomogeneousPotential& f, const VectorRadialField& U);
double integrate_G(const SpatialPotential& g, const VectorRadialField& U);
double l2_squared(const VectorRadialField& U);
double lp_integral(const VectorRadialField& U, double p);

enum class Integrand { FMass, Dirichlet, L2 };

/// Mass of the geodesic ball of radius delta about the pole. Partial intervals
/// are counted by linear fraction in the geodesic radius.
double ball_mass(const VectorRadialField& U, double delta, Integrand what,
                 const HomogeneousPotential* f = nullptr, double center = 0.0);

void write_field_csv(const VectorRadialField& U, const std::string& path);
VectorRadialField read_field_csv(GridPtr grid, const std::string& path);

}  // namespace sobolev

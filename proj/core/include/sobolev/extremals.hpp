#pragma once

#include <optional>
#include <vector>

#include "sobolev/manifolds.hpp"
#include "sobolev/potentials.hpp"

namespace sobolev {

/// U0(x) = a t0 w(b x), w(x) = (1 + |x|^2)^{-(n-2)/2}, centered at the pole.
struct BubbleParams {
  int n = 0;
  double a = 1.0;
  double b = 1.0;
  Vec t0{1.0};
};

double bubble_value(int n, double a, double b, double r);
/// Requires a Euclidean grid.
VectorRadialField bubble_profile(const BubbleParams& p, GridPtr grid);

/// The sphere extremal (beta^2-1)^{(n-2)/4} omega_n^{-1/2*} (beta - cos r)^{1-n/2}.
struct SphereExtremalParams {
  int n = 0;
  double beta = 2.0;
  Vec t0{1.0};
};

double sphere_extremal_value(int n, double beta, double r);
/// Requires a round sphere grid. Throws BetaOutOfRange for beta <= 1.
VectorRadialField sphere_extremal_profile(const SphereExtremalParams& p, GridPtr grid);

enum class Inequality {
  E1,    // (int F(U))^{2/2*} <= A int |grad U|^2 on R^n
  BOpt,  // scalar: (int |u|^{2*})^{2/2*} <= A int |grad u|^2 + B int u^2
  BOptV  // (int F(U))^{2/2*} <= A int |grad U|^2 + B int G(x, U)
};

struct InequalityConstants {
  std::optional<double> A;
  std::optional<double> B;
};

struct ResidualReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  // rhs - lhs
  double relative = 0.0;  // residual / |rhs|
};

/// F defaults to |t|^{2*} (Euclidean norm) when omitted; G is required for BOptV.
ResidualReport equality_residual(const VectorRadialField& U, Inequality which,
                                 const InequalityConstants& c,
                                 const HomogeneousPotential* f = nullptr,
                                 const SpatialPotential* g = nullptr);

struct Factorization {
  Vec t0;
  Vec profile;
  double deviation = 0.0;
  /// F(t0) >= M_F (1 - tol).
  bool t0_maximizes_F = false;
  double F_t0 = 0.0;
  double M_F = 0.0;
};

Factorization extremal_factorization(const VectorRadialField& U, const HomogeneousPotential& f,
                                     double tol = 1e-6);

struct SphereFamilyRow {
  double beta = 0.0;
  double pole_amplitude = 0.0;
  double norm = 0.0;  // int u^{2*}
  double residual = 0.0;
};

/// 40 values with beta - 1 log-spaced on [1e-3, 10].
Vec default_beta_ladder(int count = 40);
std::vector<SphereFamilyRow> sphere_extremal_family(int n, const Vec& betas, int grid_N = 4096);

}  // namespace sobolev

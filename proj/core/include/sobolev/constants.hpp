#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sobolev/manifolds.hpp"
#include "sobolev/potentials.hpp"

namespace sobolev {

/// Rayleigh quotient (int w^{2*})^{2/2*} / int |grad w|^2 of the scaled bubble
/// a w(b x) in R^n, by quadrature in r = tan(theta)/b on [0, R_cut] plus an
/// analytic tail series.
double bubble_rayleigh_quotient(int n, double a, double b, int grid_N = 4096,
                                double r_cut = 200.0);

/// Euclidean best constant A0(n), computed from the bubble. Cached per (n, N).
double a0_euclidean(int n, int grid_N = 4096);
double a0_vector(int n, const HomogeneousPotential& f);
/// B0(n, 1, round sphere) = omega_n^{-2/n}.
double b0_scalar_sphere(int n);

enum class BoundSide { Lower, Upper };

struct Bound {
  BoundSide side = BoundSide::Lower;
  double value = 0.0;
  std::string provenance;  // trivial-test-function | geometric | des1-lower | des1-upper
  bool applicable = true;
  Json detail;
};

struct DichotomyVerdict {
  enum class Kind { StrictlyAbove, TouchesWithin, Undetermined };
  double threshold_sup = 0.0;
  double b0_lo = 0.0;
  double b0_hi = INFINITY;
  Kind verdict = Kind::Undetermined;
  double tol = 1e-4;
  std::vector<std::string> warnings;

  Json to_json() const;
};

std::string to_string(DichotomyVerdict::Kind k);

struct BestConstantReport {
  int n = 0;
  int k = 0;
  double A0_n = 0.0;
  double M_F = 0.0;
  double A0_nF = 0.0;
  std::vector<Bound> bounds;
  std::optional<double> exact;
  std::string exact_reason;
  /// Scalar B0(n,1,g) used for the Des1 bounds, when known.
  std::optional<double> b0_scalar;
  std::string b0_source;
  bool inconsistent = false;
  std::optional<DichotomyVerdict> verdict;
  std::vector<std::string> warnings;

  double max_lower() const;
  double min_upper() const;
  Json to_json() const;
  std::string to_csv() const;
};

struct BoundsOptions {
  /// Treat B0(n,1,g) = (n-2)/(4(n-1)) A0(n) max S_g as exact on the conformal sphere.
  bool hebey_conformal = false;
  /// Throw UnknownScalarB0 instead of omitting the Des1 bounds.
  bool require_scalar_b0 = false;
  int grid_N = 2048;
  int x_samples = 257;
};

/// Radial sample points used for sup/inf over the manifold.
Vec manifold_samples(const ModelManifold& m, const SpatialPotential& g, int count = 257);

BestConstantReport b0_bounds(const HomogeneousPotential& f, const SpatialPotential& g,
                             const ModelManifold& m, const BoundsOptions& opt = {});

/// (n-2)/(4(n-1)) A0(n,F) S_g(x) / m_{F,G}(x).
double geometric_threshold(const HomogeneousPotential& f, const SpatialPotential& g,
                           const ModelManifold& m, double x);
double geometric_threshold(double a0nF, const MaximizerSet& xf, const SpatialPotential& g,
                           const ModelManifold& m, double x);
double b_epsilon(const HomogeneousPotential& f, const SpatialPotential& g, const ModelManifold& m,
                 double x0, double eps);

DichotomyVerdict classify_dichotomy(const BestConstantReport& report, const HomogeneousPotential& f,
                                    const SpatialPotential& g, const ModelManifold& m,
                                    double tol = 1e-4);

enum class ReferenceModel { S1xSn1, ProjectiveSpace };
/// Upper bounds for B0(n,1,g) on S^1 x S^{n-1} and real projective space.
double reference_upper_bounds(int n, ReferenceModel model);

}  // namespace sobolev

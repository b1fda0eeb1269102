#pragma once

#include <string>
#include <vector>

#include "sobolev/manifolds.hpp"
#include "sobolev/potentials.hpp"

namespace sobolev {

/// A one-parameter family of fields on a shared grid, ordered by parameter so
/// that the list approaches the limit being probed.
struct FieldFamily {
  std::string parameter = "alpha";
  Vec values;
  std::vector<VectorRadialField> fields;

  /// Throws GridMismatch or InvalidArgument when the invariants fail.
  void validate() const;
};

/// {0.05, 0.1, 0.2, 0.4, 0.8}.
Vec default_delta_ladder();

struct MassRow {
  double delta = 0.0;
  double f_mass = 0.0;
  double dirichlet = 0.0;
  double l2 = 0.0;
};

std::vector<MassRow> mass_profile(const VectorRadialField& U, const Vec& deltas,
                                  const HomogeneousPotential& f);

struct MemberDiagnostics {
  double parameter = 0.0;
  double sup = 0.0;
  double mu = 0.0;  // sup^{-2/(n-2)}
  std::vector<MassRow> masses;
  double l2_tail = 0.0;
};

struct ConcentrationReport {
  int n = 0;
  std::string parameter;
  Vec deltas;
  double tail_delta = 0.5;
  std::vector<MemberDiagnostics> members;
  bool concentrating = false;
  /// Atom estimates after the family limit, per delta.
  Vec nu_delta, mu_delta;
  /// Index of the smallest radius used for the delta -> 0 step.
  std::size_t first_usable = 0;
  double nu1 = 0.0;
  double mu1 = 0.0;
  double a0nF = 0.0;
  /// A0(n,F) mu1 - nu1^{2/2*}.
  double reverse_holder_margin = 0.0;
  double tol = 0.02;
  bool margin_ok = true;
  std::vector<std::string> warnings;

  Json to_json() const;
  std::string to_csv() const;
};

/// The family concentrates when the sup of the last member exceeds that of the
/// one before it by more than 1%; otherwise all atoms are reported as zero.
/// Atoms are extrapolated first across the last two members
/// (F-mass outside the ball decays like mu^n, the Dirichlet ball mass has an
/// O(mu^min(2,n-2)) defect), then to delta -> 0 from the two smallest radii
/// exceeding four bubble widths of both members.
ConcentrationReport reverse_holder_check(const FieldFamily& family, const HomogeneousPotential& f,
                                         double a0nF, const Vec& deltas = default_delta_ladder(),
                                         double tail_delta = 0.5, double tol = 0.02);

struct DgnmRatio {
  double ratio = 0.0;
  double lq_norm = 0.0;  // L^q norm on B(2 delta)
};

DgnmRatio dgnm_ratio(const VectorRadialField& U, double delta, double p, double q);

/// L^2 mass outside B(delta) over the total. Throws ZeroField.
double l2_tail_ratio(const VectorRadialField& U, double delta);

struct RescaledField {
  double mu = 0.0;
  VectorRadialField V;
  /// rho_max / mu: V is set to zero beyond this radius.
  double valid_radius = 0.0;
};

/// V(rho) = mu^{(n-2)/2} U(exp(mu rho)) resampled on `target` (a Euclidean grid).
/// Throws SupNotAtPole when |U| peaks away from the pole.
RescaledField rescale_extract(const VectorRadialField& U, GridPtr target);

/// max of |V(rho)| rho^{n-2-s} over target nodes with rho in [lo, hi].
double decay_envelope(const VectorRadialField& V, double lo, double hi, double s);

}  // namespace sobolev

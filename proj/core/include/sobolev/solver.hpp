#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sobolev/manifolds.hpp"
#include "sobolev/potentials.hpp"

namespace sobolev {

/// Minimize J(U) = A int |grad U|^2 + B int G(x, U) over {int F(U) = 1}.
struct VariationalProblem {
  ModelManifold manifold;
  HomogeneousPotential F;
  SpatialPotential G;
  double coeff_A = 1.0;
  double coeff_B = 0.0;
};

struct SolverConfig {
  int grid_N = 2048;
  /// Initial step, used until two iterates are available for the BB estimate.
  double step = 1.0;
  int max_iters = 4000;
  double el_tol = 1e-8;
  /// Applied to potentials without a gradient; 0 makes those an error.
  double smoothing_eps = 0.0;
  std::uint64_t seed = 1;
  /// Relative amplitude of the random cosine perturbation of each start.
  double perturbation = 0.05;
  bool constant_start = true;
  bool bubble_start = true;
};

struct IterationRecord {
  double lambda = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct SolverResult {
  VectorRadialField U;
  double lambda = 0.0;
  double el_residual = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<IterationRecord> history;
  std::string start;  // "constant" or "bubble"
  double smoothing_eps = 0.0;
  /// Restarts that were run, with their final lambda.
  std::vector<std::pair<std::string, double>> restarts;

  Json to_json() const;
};

double energy_J(const VectorRadialField& U, const VariationalProblem& p);
/// Gradient of the discrete J with respect to the nodal values (node-major).
Vec energy_gradient(const VectorRadialField& U, const VariationalProblem& p);
Vec constraint_gradient(const VectorRadialField& U, const HomogeneousPotential& f);
/// U <- U / (int F(U))^{1/2*}. Throws NonPositiveDensity if int F(U) <= 0.
void normalize_to_constraint(VectorRadialField& U, const HomogeneousPotential& f);

/// L^2 norm of -A Lap u_i + (B/2) dG/dt_i - (lambda/2*) dF/dt_i over the
/// grid, divided by the H^1 norm of U.
double el_residual(const VectorRadialField& U, const VariationalProblem& p, double lambda);

/// Replaces non-C^1 potentials by smoothed ones. Throws MissingGradient when eps = 0.
VariationalProblem smoothed_problem(const VariationalProblem& p, double eps);

SolverResult minimize(const VariationalProblem& p, const SolverConfig& cfg = {});

struct Candidate {
  std::string name;
  VectorRadialField U;
};

/// Constants along the maximizers of F and truncated bubbles of several
/// scales grafted at the pole.
std::vector<Candidate> default_candidates(const VariationalProblem& p, GridPtr grid);

struct PrecheckResult {
  double best_lambda = 0.0;
  std::string best_candidate;
  bool below_one = false;
  /// |best_lambda - 1| <= 0.02.
  bool marginal = false;
  std::vector<std::pair<std::string, double>> values;
  /// Variant without the A coefficient: inf (int |grad U|^2 + B int G) < 1 / A0(n,F).
  double appendix_value = 0.0;
  bool appendix_below = false;

  Json to_json() const;
};

/// J is evaluated with A = A0(n,F) and the problem's B after normalization.
PrecheckResult existence_precheck(const VariationalProblem& p, const std::vector<Candidate>& candidates);

struct LocalCheckResult {
  int trials = 0;
  int violations = 0;
  double min_margin = 0.0;
  double B_eps = 0.0;
  double A = 0.0;
};

/// A0(n,F) int |grad U|^2 + B int G(x,U) - (int F(U))^{2/2*}.
double local_inequality_margin(const VectorRadialField& U, const HomogeneousPotential& f,
                               const SpatialPotential& g, double A, double B);

/// Random bump maps supported in the ball of radius r0 about the pole (a slab
/// |x_1| < r0 on the torus).
LocalCheckResult local_inequality_check(const HomogeneousPotential& f, const SpatialPotential& g,
                                        const ModelManifold& m, double x0, double eps, double r0,
                                        int trials = 100, std::uint64_t seed = 11, int grid_N = 2048);

}  // namespace sobolev

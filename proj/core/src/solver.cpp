#include "sobolev/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include "sobolev/constants.hpp"
#include "sobolev/error.hpp"
#include "sobolev/interp.hpp"
#include "vector_ops.hpp"

namespace sobolev {

namespace {

double dot_all(const Vec& a, const Vec& b) { return detail::dot(a, b); }

// Tridiagonal operator 2 (A K + s M), applied or inverted per component.
struct Preconditioner {
  Vec lower, diag, upper;
  int k = 1;

  Preconditioner(const RadialGrid& grid, int k_, double A, double s) : k(k_) {
    const std::size_t N = grid.size();
    const auto& kap = grid.stiffness();
    const auto& m = grid.mass();
    lower.assign(N, 0.0);
    upper.assign(N, 0.0);
    diag.assign(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      double d = 2.0 * s * m[i];
      if (i > 0) {
        d += 2.0 * A * kap[i - 1];
        lower[i] = -2.0 * A * kap[i - 1];
      }
      if (i + 1 < N) {
        d += 2.0 * A * kap[i];
        upper[i] = -2.0 * A * kap[i];
      }
      diag[i] = d;
    }
  }

  Vec solve(const Vec& g) const {
    const std::size_t N = diag.size();
    Vec out(g.size());
    Vec col(N);
    for (int c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < N; ++i) col[i] = g[i * k + c];
      solve_tridiagonal(lower, diag, upper, col);
      for (std::size_t i = 0; i < N; ++i) out[i * k + c] = col[i];
    }
    return out;
  }

  Vec apply(const Vec& u) const {
    const std::size_t N = diag.size();
    Vec out(u.size(), 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (int c = 0; c < k; ++c) {
        double v = diag[i] * u[i * k + c];
        if (i > 0) v += lower[i] * u[(i - 1) * k + c];
        if (i + 1 < N) v += upper[i] * u[(i + 1) * k + c];
        out[i * k + c] = v;
      }
    return out;
  }
};

// Gradient of the Lagrangian J - (2 lambda / 2*) Phi.
Vec lagrangian_gradient(const VectorRadialField& U, const VariationalProblem& p, double lambda) {
  Vec g = energy_gradient(U, p);
  const Vec gf = constraint_gradient(U, p.F);
  const double mu = 2.0 * lambda / two_star(p.manifold.n());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= mu * gf[i];
  return g;
}

double residual_from_gradient(const VectorRadialField& U, const Vec& g) {
  const auto& m = U.grid()->mass();
  const int k = U.k();
  double s = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i) {
    if (m[i] == 0.0) continue;
    double gi = 0.0;
    for (int c = 0; c < k; ++c) gi += g[i * k + c] * g[i * k + c];
    s += gi / (4.0 * m[i]);
  }
  const double h1 = gradient_dirichlet(U) + l2_squared(U);
  return h1 > 0.0 ? std::sqrt(s / h1) : std::sqrt(s);
}

Vec start_direction(const HomogeneousPotential& f) {
  const MaximizerSet xf = max_on_direction_sphere(f);
  if (xf.points.empty()) throw Error(ErrorCode::EmptyMaximizerSet, "F has no maximizers");
  Vec t0 = xf.degenerate ? Vec(f.k(), 0.0) : xf.points.front();
  if (xf.degenerate) t0[0] = 1.0;
  return t0;
}

// Truncated bubble w(b rho) - w(b R) on rho < R.
VectorRadialField grafted_bubble(GridPtr grid, std::span<const double> t0, double b, double R) {
  const int n = grid->n();
  const auto& rho = grid->rho();
  const double cut = std::pow(1.0 + b * b * R * R, -(n - 2) / 2.0);
  Vec u(grid->size(), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(rho[i] < R)) continue;
    u[i] = std::pow(1.0 + b * b * rho[i] * rho[i], -(n - 2) / 2.0) - cut;
  }
  return VectorRadialField::from_profile(grid, t0, u);
}

double radial_extent(const RadialGrid& grid) {
  const double e = grid.rho_max();
  return std::isfinite(e) ? e : 10.0;
}

void perturb(VectorRadialField& U, double amount, std::uint64_t seed) {
  if (amount == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const std::size_t N = U.size();
  const int k = U.k();
  double scale = 0.0;
  for (double v : U.data()) scale = std::max(scale, std::abs(v));
  for (int c = 0; c < k; ++c) {
    double coef[4];
    for (double& x : coef) x = nd(rng);
    for (std::size_t i = 0; i < N; ++i) {
      const double s = double(i) / double(N - 1);
      double v = 0.0;
      for (int j = 0; j < 4; ++j) v += coef[j] * std::cos((j + 1) * std::numbers::pi * s);
      U.at(i, c) += amount * scale * 0.25 * v;
    }
  }
}

SolverResult descend(VectorRadialField U, const VariationalProblem& p, const SolverConfig& cfg) {
  const auto& grid = *U.grid();
  const Preconditioner P(grid, U.k(), p.coeff_A, p.coeff_A + std::abs(p.coeff_B));
  const double lambda_scale_eps = 4.0 * std::numeric_limits<double>::epsilon();

  normalize_to_constraint(U, p.F);
  SolverResult res{U, energy_J(U, p), 0.0, false, 0, {}, {}, 0.0, {}};
  Vec g = lagrangian_gradient(U, p, res.lambda);
  res.el_residual = residual_from_gradient(U, g);
  res.history.push_back({res.lambda, res.el_residual, 0.0});

  double alpha_next = cfg.step;
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (res.el_residual <= cfg.el_tol) {
      res.converged = true;
      break;
    }
    const Vec d = P.solve(g);
    const double gd = dot_all(g, d);
    if (!(gd > 0.0)) break;

    double alpha = alpha_next;
    bool accepted = false;
    VectorRadialField trial = res.U;
    double J_trial = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      trial = res.U;
      for (std::size_t i = 0; i < d.size(); ++i) trial.data()[i] -= alpha * d[i];
      try {
        normalize_to_constraint(trial, p.F);
        J_trial = energy_J(trial, p);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NonPositiveDensity) throw;
        J_trial = INFINITY;
      }
      if (J_trial <= res.lambda - 1e-4 * alpha * gd + lambda_scale_eps * std::abs(res.lambda)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    Vec g_new = lagrangian_gradient(trial, p, J_trial);
    Vec s(d.size()), y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      s[i] = trial.data()[i] - res.U.data()[i];
      y[i] = g_new[i] - g[i];
    }
    const double sy = dot_all(s, y);
    const double sPs = dot_all(s, P.apply(s));
    alpha_next = sy > 0.0 ? std::clamp(sPs / sy, 1e-8, 1e8) : std::min(2.0 * alpha, 1e8);

    res.U = std::move(trial);
    res.lambda = J_trial;
    g = std::move(g_new);
    res.el_residual = residual_from_gradient(res.U, g);
    res.iterations = it + 1;
    res.history.push_back({res.lambda, res.el_residual, alpha});
  }
  if (res.el_residual <= cfg.el_tol) res.converged = true;
  return res;
}

}  // namespace

double energy_J(const VectorRadialField& U, const VariationalProblem& p) {
  double J = p.coeff_A * gradient_dirichlet(U);
  if (p.coeff_B != 0.0) J += p.coeff_B * integrate_G(p.G, U);
  return J;
}

Vec energy_gradient(const VectorRadialField& U, const VariationalProblem& p) {
  const auto& grid = *U.grid();
  const auto& kap = grid.stiffness();
  const auto& m = grid.mass();
  const auto& r = grid.r();
  const int k = U.k();
  Vec g(U.data().size(), 0.0);
  for (std::size_t i = 0; i + 1 < U.size(); ++i) {
    for (int c = 0; c < k; ++c) {
      const double d = 2.0 * p.coeff_A * kap[i] * (U.at(i + 1, c) - U.at(i, c));
      g[i * k + c] -= d;
      g[(i + 1) * k + c] += d;
    }
  }
  if (p.coeff_B != 0.0) {
    Vec gg(k);
    for (std::size_t i = 0; i < U.size(); ++i) {
      if (m[i] == 0.0) continue;
      p.G.gradient(r[i], U.node(i), gg);
      for (int c = 0; c < k; ++c) g[i * k + c] += p.coeff_B * m[i] * gg[c];
    }
  }
  return g;
}

Vec constraint_gradient(const VectorRadialField& U, const HomogeneousPotential& f) {
  const auto& m = U.grid()->mass();
  const int k = U.k();
  Vec g(U.data().size(), 0.0), gf(k);
  for (std::size_t i = 0; i < U.size(); ++i) {
    if (m[i] == 0.0) continue;
    f.gradient(U.node(i), gf);
    for (int c = 0; c < k; ++c) g[i * k + c] = m[i] * gf[c];
  }
  return g;
}

void normalize_to_constraint(VectorRadialField& U, const HomogeneousPotential& f) {
  const double phi = integrate_F(f, U);
  if (!(phi > 0.0) || !std::isfinite(phi)) {
    throw Error(ErrorCode::NonPositiveDensity, "int F(U) = " + detail::fmt(phi) + " cannot be normalized");
  }
  U *= std::pow(phi, -1.0 / two_star(U.grid()->n()));
}

double el_residual(const VectorRadialField& U, const VariationalProblem& p, double lambda) {
  if (!p.F.has_gradient()) throw Error(ErrorCode::MissingGradient, "F is not C^1; smooth it first");
  if (p.coeff_B != 0.0 && !p.G.has_gradient()) {
    throw Error(ErrorCode::MissingGradient, "G is not C^1; smooth it first");
  }
  return residual_from_gradient(U, lagrangian_gradient(U, p, lambda));
}

VariationalProblem smoothed_problem(const VariationalProblem& p, double eps) {
  VariationalProblem q = p;
  if (!p.F.has_gradient()) {
    if (!(eps > 0.0)) throw Error(ErrorCode::MissingGradient, "F is not C^1 and smoothing_eps = 0");
    q.F = smooth(p.F, eps).potential;
  }
  if (p.coeff_B != 0.0 && !p.G.has_gradient()) {
    if (!(eps > 0.0)) throw Error(ErrorCode::MissingGradient, "G is not C^1 and smoothing_eps = 0");
    q.G = smooth(p.G, eps);
  }
  return q;
}

SolverResult minimize(const VariationalProblem& p0, const SolverConfig& cfg) {
  if (!(p0.coeff_A > 0.0)) throw Error(ErrorCode::InvalidArgument, "coeff_A must be positive");
  if (!(cfg.el_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "el_tol must be positive");
  if (cfg.smoothing_eps < 0.0) throw Error(ErrorCode::InvalidArgument, "smoothing_eps must be >= 0");
  const bool needs_smoothing = !p0.F.has_gradient() || (p0.coeff_B != 0.0 && !p0.G.has_gradient());
  const VariationalProblem p = smoothed_problem(p0, cfg.smoothing_eps);

  const auto grid = make_grid(p.manifold, {.N = cfg.grid_N});
  const Vec t0 = start_direction(p.F);
  const double R = 0.5 * radial_extent(*grid);

  std::vector<std::pair<std::string, VectorRadialField>> starts;
  if (cfg.constant_start) {
    starts.emplace_back("constant", VectorRadialField::from_function(grid, t0, [](double r) {
                          return std::isfinite(r) ? 1.0 : 0.0;
                        }));
  }
  if (cfg.bubble_start) starts.emplace_back("bubble", grafted_bubble(grid, t0, 10.0 / R, R));
  if (starts.empty()) throw Error(ErrorCode::InvalidArgument, "no starting guess enabled");

  std::optional<SolverResult> best;
  std::vector<std::pair<std::string, double>> restarts;
  std::uint64_t salt = 0;
  for (auto& [name, U] : starts) {
    perturb(U, cfg.perturbation, cfg.seed * 1000003ULL + salt++);
    SolverResult r = descend(U, p, cfg);
    r.start = name;
    restarts.emplace_back(name, r.lambda);
    // Ties go to the constant start, which is tried first.
    if (!best || r.lambda < best->lambda - 1e-10 * std::abs(best->lambda)) best = std::move(r);
  }
  best->restarts = restarts;
  best->smoothing_eps = needs_smoothing ? cfg.smoothing_eps : 0.0;
  return std::move(*best);
}

Json SolverResult::to_json() const {
  Json j;
  j["lambda"] = lambda;
  j["el_residual"] = el_residual;
  j["converged"] = converged;
  j["iterations"] = iterations;
  j["start"] = start;
  j["smoothing_eps"] = smoothing_eps;
  Json rs = Json::array();
  for (const auto& [name, l] : restarts) rs.push_back({{"start", name}, {"lambda", l}});
  j["restarts"] = rs;
  Json h = Json::array();
  for (const auto& rec : history) h.push_back({rec.lambda, rec.residual});
  j["history"] = h;
  return j;
}

std::vector<Candidate> default_candidates(const VariationalProblem& p, GridPtr grid) {
  std::vector<Candidate> out;
  const MaximizerSet xf = max_on_direction_sphere(p.F);
  std::size_t count = 0;
  for (const Vec& t : xf.points) {
    if (!p.manifold.compact()) break;  // constants have infinite mass on R^n
    if (xf.degenerate && count >= 1) break;
    out.push_back({"constant-" + std::to_string(count++),
                   VectorRadialField::from_function(grid, t, [](double r) { return std::isfinite(r) ? 1.0 : 0.0; })});
    if (count >= 8) break;
  }
  const Vec t0 = start_direction(p.F);
  const double R = 0.5 * radial_extent(*grid);
  for (double scale : {10.0, 30.0, 100.0}) {
    out.push_back({"bubble-b" + detail::fmt(scale / R), grafted_bubble(grid, t0, scale / R, R)});
  }
  return out;
}

PrecheckResult existence_precheck(const VariationalProblem& p, const std::vector<Candidate>& candidates) {
  const int n = p.manifold.n();
  const double A = a0_vector(n, p.F);
  VariationalProblem q = p;
  q.coeff_A = A;
  PrecheckResult out;
  out.best_lambda = INFINITY;
  out.appendix_value = INFINITY;
  for (const auto& c : candidates) {
    VectorRadialField U = c.U;
    try {
      normalize_to_constraint(U, p.F);
    } catch (const Error&) {
      continue;
    }
    const double J = energy_J(U, q);
    out.values.emplace_back(c.name, J);
    if (J < out.best_lambda) {
      out.best_lambda = J;
      out.best_candidate = c.name;
    }
    double I = gradient_dirichlet(U);
    if (p.coeff_B != 0.0) I += p.coeff_B * integrate_G(p.G, U);
    out.appendix_value = std::min(out.appendix_value, I);
  }
  out.below_one = out.best_lambda < 1.0;
  out.marginal = std::abs(out.best_lambda - 1.0) <= 0.02;
  out.appendix_below = out.appendix_value < 1.0 / A;
  return out;
}

Json PrecheckResult::to_json() const {
  Json j;
  j["best_lambda"] = best_lambda;
  j["best_candidate"] = best_candidate;
  j["below_one"] = below_one;
  j["marginal"] = marginal;
  j["appendix_value"] = appendix_value;
  j["appendix_below"] = appendix_below;
  Json v = Json::object();
  for (const auto& [name, J] : values) v[name] = J;
  j["candidates"] = v;
  return j;
}

double local_inequality_margin(const VectorRadialField& U, const HomogeneousPotential& f,
                               const SpatialPotential& g, double A, double B) {
  const double lhs = std::pow(integrate_F(f, U), 2.0 / two_star(U.grid()->n()));
  double rhs = A * gradient_dirichlet(U);
  if (B != 0.0) rhs += B * integrate_G(g, U);
  return rhs - lhs;
}

LocalCheckResult local_inequality_check(const HomogeneousPotential& f, const SpatialPotential& g,
                                        const ModelManifold& m, double x0, double eps, double r0,
                                        int trials, std::uint64_t seed, int grid_N) {
  if (x0 != 0.0) throw Error(ErrorCode::OffPoleCenter, "balls must be centered at the pole");
  if (!(r0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "r0 must be positive");
  const int n = m.n();
  LocalCheckResult out;
  out.trials = trials;
  out.A = a0_vector(n, f);
  out.B_eps = b_epsilon(f, g, m, x0, eps);

  // A grid restricted to the support keeps the bumps well resolved.
  const double r_stop = std::min(r0 * 1.05, m.r_end());
  const auto grid = make_grid(m, {.N = grid_N, .r_max = r_stop});
  const auto& rho = grid->rho();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::normal_distribution<double> nd;
  out.min_margin = INFINITY;
  for (int t = 0; t < trials; ++t) {
    VectorRadialField U(grid, f.k());
    const int bumps = 1 + t % 2;
    for (int b = 0; b < bumps; ++b) {
      const double radius = r0 * (0.2 + 0.8 * ud(rng));
      const double amp = std::pow(10.0, -2.0 + 4.0 * ud(rng));
      Vec dir(f.k());
      for (double& x : dir) x = nd(rng);
      detail::normalize(dir);
      for (std::size_t i = 0; i < U.size(); ++i) {
        if (!(rho[i] < radius)) continue;
        const double q = 1.0 - (rho[i] / radius) * (rho[i] / radius);
        for (int c = 0; c < f.k(); ++c) U.at(i, c) += amp * dir[c] * q * q;
      }
    }
    const double margin = local_inequality_margin(U, f, g, out.A, out.B_eps);
    out.min_margin = std::min(out.min_margin, margin);
    const double lhs = std::pow(integrate_F(f, U), 2.0 / two_star(n));
    if (margin < -1e-9 * lhs) ++out.violations;
  }
  if (trials == 0) out.min_margin = 0.0;
  return out;
}

}  // namespace sobolev

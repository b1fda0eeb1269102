#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "sobolev/error.hpp"
#include "sobolev/potentials.hpp"
#include "vector_ops.hpp"

namespace sobolev {

namespace {

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

std::vector<Vec> build_grid(int k) {
  std::vector<Vec> pts;
  if (k == 1) return {Vec{1.0}, Vec{-1.0}};
  if (k == 2) {
    const int n = 4096;  // multiple of 4, so +-e_i are on the grid
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      pts.push_back({std::cos(a), std::sin(a)});
    }
    return pts;
  }
  if (k == 3) {
    const int n = 20000;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / n;
      const double rho = std::sqrt(1.0 - z * z);
      pts.push_back({rho * std::cos(golden * i), rho * std::sin(golden * i), z});
    }
  } else {
    if (k > 16) throw Error(ErrorCode::InvalidArgument, "direction grid supports k <= 16");
    const std::size_t target = 100000;
    for (std::uint64_t i = 1; pts.size() < target; ++i) {
      Vec p(k);
      for (int c = 0; c < k; ++c) p[c] = 2.0 * radical_inverse(i, kPrimes[c]) - 1.0;
      const double r = detail::norm(p);
      if (r > 1.0 || r < 1e-3) continue;
      for (double& x : p) x /= r;
      pts.push_back(std::move(p));
    }
  }
  for (int i = 0; i < k; ++i) {
    for (double s : {1.0, -1.0}) {
      Vec e(k, 0.0);
      e[i] = s;
      pts.push_back(std::move(e));
    }
  }
  return pts;
}

const std::vector<Vec>& cached_grid(int k) {
  static std::mutex mu;
  static std::map<int, std::vector<Vec>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, build_grid(k)).first;
  return it->second;
}

// Orthonormal basis of the tangent space at the unit vector theta.
std::vector<Vec> tangent_basis(const Vec& theta) {
  const int k = static_cast<int>(theta.size());
  std::vector<Vec> basis;
  for (int i = 0; i < k && static_cast<int>(basis.size()) < k - 1; ++i) {
    Vec v(k, 0.0);
    v[i] = 1.0;
    auto project = [&v](const Vec& u) {
      const double d = detail::dot(v, u);
      for (std::size_t c = 0; c < v.size(); ++c) v[c] -= d * u[c];
    };
    project(theta);
    for (const auto& b : basis) project(b);
    if (detail::norm(v) < 1e-6) continue;
    detail::normalize(v);
    basis.push_back(std::move(v));
  }
  return basis;
}

// Coordinate pattern search on the sphere, maximizing sign * f.
Vec pattern_refine(const HomogeneousPotential& p, Vec theta, double sign, double step,
                   double min_step, double& best) {
  best = sign * p.direction_value(theta);
  std::vector<Vec> basis = tangent_basis(theta);
  Vec trial(theta.size());
  int stale = 0;
  while (step > min_step) {
    bool moved = false;
    for (const auto& e : basis) {
      for (double s : {step, -step}) {
        for (std::size_t c = 0; c < theta.size(); ++c) trial[c] = theta[c] + s * e[c];
        detail::normalize(trial);
        const double v = sign * p.direction_value(trial);
        if (v > best) {
          best = v;
          theta = trial;
          moved = true;
        }
      }
    }
    if (moved) {
      basis = tangent_basis(theta);
      if (++stale > 200) {  // long slide: widen again before halving
        stale = 0;
        step *= 2.0;
      }
    } else {
      step *= 0.5;
      stale = 0;
    }
  }
  best *= sign;
  return theta;
}

double grid_spacing(int k, std::size_t n) {
  if (k == 1) return 1.0;
  if (k == 2) return 2.0 * std::numbers::pi / static_cast<double>(n);
  return std::pow(4.0 * std::numbers::pi / static_cast<double>(n), 1.0 / (k - 1));
}

}  // namespace

std::vector<Vec> direction_grid(int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  return cached_grid(k);
}

MaximizerSet max_on_direction_sphere(const HomogeneousPotential& p, double refine_tol,
                                     double tolerance) {
  const int k = p.k();
  const auto& grid = cached_grid(k);
  Vec vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vals[i] = p.direction_value(grid[i]);
    if (!(vals[i] > 0.0)) {
      throw Error(ErrorCode::NonPositivePotential,
                  "'" + p.label() + "' is not positive on the direction sphere");
    }
  }
  const auto [lo_it, hi_it] = std::minmax_element(vals.begin(), vals.end());
  const double fmin = *lo_it, fmax = *hi_it;

  MaximizerSet out;
  out.tolerance = tolerance;
  if (fmax - fmin <= tolerance * fmax) {
    out.M_F = fmax;
    out.points = grid;
    out.degenerate = true;
    return out;
  }

  // Seeds: grid points in the top band, greedily clustered.
  std::vector<std::size_t> order;
  const double band = fmax - 0.05 * (fmax - fmin);
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (vals[i] >= band) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] > vals[b]; });
  std::vector<std::size_t> seeds;
  for (auto i : order) {
    bool near = false;
    for (auto s : seeds) near = near || detail::dist2(grid[i], grid[s]) < 0.01;
    if (!near) seeds.push_back(i);
    if (seeds.size() >= 64) break;
  }

  const double step0 = grid_spacing(k, grid.size());
  const double min_step = std::max(1e-14, 1e-3 * refine_tol);
  std::vector<std::pair<double, Vec>> found;
  for (auto s : seeds) {
    if (k == 1) {
      found.emplace_back(vals[s], grid[s]);
      continue;
    }
    double best = 0.0;
    Vec theta = pattern_refine(p, grid[s], 1.0, step0, min_step, best);
    found.emplace_back(best, std::move(theta));
  }
  double mf = 0.0;
  for (const auto& f : found) mf = std::max(mf, f.first);
  out.M_F = mf;
  for (auto& [v, theta] : found) {
    if (v < mf * (1.0 - tolerance)) continue;
    bool dup = false;
    for (const auto& q : out.points) dup = dup || detail::dist2(q, theta) < 1e-10;
    if (!dup) out.points.push_back(std::move(theta));
  }
  return out;
}

double min_on_direction_sphere(const HomogeneousPotential& p) {
  const int k = p.k();
  const auto& grid = cached_grid(k);
  std::size_t arg = 0;
  double lo = p.direction_value(grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = p.direction_value(grid[i]);
    if (v < lo) {
      lo = v;
      arg = i;
    }
  }
  if (k == 1) return lo;
  double best = 0.0;
  pattern_refine(p, grid[arg], -1.0, grid_spacing(k, grid.size()), 1e-12, best);
  return std::min(lo, best);
}

double m_FG(const SpatialPotential& g, double x, const MaximizerSet& xf) {
  if (xf.points.empty()) throw Error(ErrorCode::EmptyMaximizerSet, "X_F has no points");
  double m = g.evaluate(x, xf.points.front());
  for (const auto& t : xf.points) m = std::min(m, g.evaluate(x, t));
  return m;
}

double global_min_on_sphere(const SpatialPotential& g, std::span<const double> xs) {
  double m = INFINITY;
  for (double x : xs) m = std::min(m, min_on_direction_sphere(g.slice(x)));
  return m;
}

double max_over_points(const SpatialPotential& g, std::span<const double> xs,
                       std::span<const double> t) {
  double m = -INFINITY;
  for (double x : xs) m = std::max(m, g.evaluate(x, t));
  return m;
}

}  // namespace sobolev

#include <algorithm>
#include <cmath>
#include <random>

#include "sobolev/error.hpp"
#include "sobolev/manifolds.hpp"
#include "sobolev/potentials.hpp"
#include "vector_ops.hpp"

namespace sobolev {

namespace {

Vec random_unit(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec v(k);
  do {
    for (double& x : v) x = nd(rng);
  } while (detail::norm(v) < 1e-12);
  detail::normalize(v);
  return v;
}

// Sampled sup of |F(s+t) - F(s)| over |s| = 1, |t| <= delta.
double sampled_modulus(const HomogeneousPotential& f, double delta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const int k = f.k();
  double worst = 0.0;
  Vec st(k);
  for (int trial = 0; trial < 4000; ++trial) {
    const Vec s = random_unit(k, rng);
    const Vec t = random_unit(k, rng);
    const double len = trial % 2 == 0 ? delta : delta * ud(rng);
    for (int i = 0; i < k; ++i) st[i] = s[i] + len * t[i];
    worst = std::max(worst, std::abs(f.evaluate(st) - f.evaluate(s)));
  }
  return worst;
}

}  // namespace

BrezisLiebConstant brezis_lieb_constant(const HomogeneousPotential& f, double eps,
                                        std::size_t verify_pairs, std::uint64_t seed) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  const double p = f.degree();
  const double M = std::pow(2.0, p) * max_on_direction_sphere(f).M_F;

  // Largest dyadic delta < 1 whose sampled modulus is below eps/2, then bisect.
  double lo = 0.5;
  int halvings = 0;
  while (sampled_modulus(f, lo, seed) > 0.5 * eps) {
    lo *= 0.5;
    if (++halvings > 60) {
      throw Error(ErrorCode::ModulusNotFound, "no continuity modulus found for eps=" + detail::fmt(eps));
    }
  }
  double hi = std::min(2.0 * lo, 0.999);
  if (hi > lo) {
    for (int it = 0; it < 30; ++it) {
      const double mid = 0.5 * (lo + hi);
      (sampled_modulus(f, mid, seed) <= 0.5 * eps ? lo : hi) = mid;
    }
  }

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> logmag(-3.0, 3.0);
  const int k = f.k();
  Vec s(k), st(k);
  for (int attempt = 0; attempt < 12; ++attempt) {
    const double delta = lo;
    const double C = M / std::pow(delta, p);
    bool ok = true;
    for (std::size_t n = 0; n < verify_pairs && ok; ++n) {
      Vec a = random_unit(k, rng), b = random_unit(k, rng);
      const double ls = n % 10 == 0 ? 0.0 : std::pow(10.0, logmag(rng));
      const double lt = n % 10 == 5 ? 0.0 : std::pow(10.0, logmag(rng));
      for (int i = 0; i < k; ++i) {
        s[i] = ls * a[i];
        st[i] = s[i] + lt * b[i];
      }
      const double lhs = std::abs(f.evaluate(st) - f.evaluate(s));
      const double rhs = eps * std::pow(ls, p) + C * std::pow(lt, p);
      ok = lhs <= rhs * (1.0 + 1e-12) + 1e-300;
    }
    if (ok) return {C, delta, M, verify_pairs};
    lo *= 0.5;
  }
  throw Error(ErrorCode::ModulusNotFound, "random pairs violate the inequality for eps=" + detail::fmt(eps));
}

Vec brezis_lieb_defect(const HomogeneousPotential& f, std::span<const VectorRadialField> family,
                       const VectorRadialField& limit) {
  const double fu = integrate_F(f, limit);
  Vec d;
  d.reserve(family.size());
  for (const auto& ua : family) {
    require_same_grid(ua, limit);
    const double a = integrate_F(f, ua);
    const double b = integrate_F(f, ua - limit);
    d.push_back(std::abs(a - b - fu));
  }
  return d;
}

}  // namespace sobolev

#include "sobolev/constants.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "sobolev/error.hpp"
#include "vector_ops.hpp"

namespace sobolev {

namespace {

constexpr double kPi = std::numbers::pi;

double curvature_factor(int n) { return (n - 2.0) / (4.0 * (n - 1.0)); }

// sum_j binom(-n, j) Y^{-e-2j} / (e + 2j), with a remainder estimate.
std::pair<double, double> tail_series(int n, double e, double Y) {
  double coeff = 1.0, sum = 0.0, term = 0.0;
  for (int j = 0; j < 400; ++j) {
    if (j > 0) coeff *= -(n + j - 1.0) / j;
    term = coeff * std::pow(Y, -e - 2.0 * j) / (e + 2.0 * j);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) return {sum, std::abs(term)};
  }
  return {sum, std::abs(term)};
}

double simpson(int N, double a, double b, const std::function<double(double)>& f) {
  if (N % 2) ++N;
  const double h = (b - a) / N;
  double s = f(a) + f(b);
  for (int i = 1; i < N; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

Vec direction_points(const MaximizerSet& xf) {
  // Degenerate sets hold the whole direction grid; a thinned copy is enough
  // because every point of it is a maximizer.
  const std::size_t stride = xf.degenerate ? std::max<std::size_t>(1, xf.points.size() / 4096) : 1;
  Vec flat;
  for (std::size_t i = 0; i < xf.points.size(); i += stride)
    flat.insert(flat.end(), xf.points[i].begin(), xf.points[i].end());
  return flat;
}

}  // namespace

double bubble_rayleigh_quotient(int n, double a, double b, int grid_N, double r_cut) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "n must be >= 3");
  if (a == 0.0 || b == 0.0) throw Error(ErrorCode::InvalidArgument, "bubble needs a, b != 0");
  b = std::abs(b);
  const double ts = two_star(n);
  auto w = [&](double r) { return a * std::pow(1.0 + b * b * r * r, -(n - 2.0) / 2.0); };
  auto dw = [&](double r) {
    return -a * (n - 2.0) * b * b * r * std::pow(1.0 + b * b * r * r, -n / 2.0);
  };
  // r = tan(theta) / b
  const double Y = b * r_cut;
  const double tmax = std::atan(Y);
  auto f1 = [&](double t) {
    const double r = std::tan(t) / b, jac = 1.0 / (b * std::cos(t) * std::cos(t));
    return std::pow(std::abs(w(r)), ts) * std::pow(r, n - 1) * jac;
  };
  auto f2 = [&](double t) {
    const double r = std::tan(t) / b, jac = 1.0 / (b * std::cos(t) * std::cos(t));
    const double d = dw(r);
    return d * d * std::pow(r, n - 1) * jac;
  };
  double i1 = simpson(grid_N, 0.0, tmax, f1);
  double i2 = simpson(grid_N, 0.0, tmax, f2);

  if (Y <= 1.0) throw Error(ErrorCode::TailNotConverged, "tail series needs b * R_cut > 1");
  const auto [t1, e1] = tail_series(n, n, Y);
  const auto [t2, e2] = tail_series(n, n - 2.0, Y);
  const double tail1 = std::pow(std::abs(a), ts) * std::pow(b, -n) * t1;
  const double tail2 = a * a * (n - 2.0) * (n - 2.0) * std::pow(b, 2.0 - n) * t2;
  const double rem1 = std::pow(std::abs(a), ts) * std::pow(b, -n) * e1;
  const double rem2 = a * a * (n - 2.0) * (n - 2.0) * std::pow(b, 2.0 - n) * e2;
  i1 += tail1;
  i2 += tail2;
  if (rem1 > 1e-8 * i1 || rem2 > 1e-8 * i2) {
    throw Error(ErrorCode::TailNotConverged, "bubble tail series did not converge");
  }
  const double om = omega(n - 1);
  return std::pow(om * i1, 2.0 / ts) / (om * i2);
}

double a0_euclidean(int n, int grid_N) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({n, grid_N});
    if (it != cache.end()) return it->second;
  }
  const double v = bubble_rayleigh_quotient(n, 1.0, 1.0, grid_N);
  std::lock_guard<std::mutex> lock(mu);
  cache[{n, grid_N}] = v;
  return v;
}

double a0_vector(int n, const HomogeneousPotential& f) {
  const double mf = max_on_direction_sphere(f).M_F;
  return std::pow(mf, 2.0 / two_star(n)) * a0_euclidean(n);
}

double b0_scalar_sphere(int n) { return std::pow(volume(ModelManifold::round_sphere(n)), -2.0 / n); }

std::string to_string(DichotomyVerdict::Kind k) {
  switch (k) {
    case DichotomyVerdict::Kind::StrictlyAbove: return "StrictlyAbove";
    case DichotomyVerdict::Kind::TouchesWithin: return "TouchesWithin";
    case DichotomyVerdict::Kind::Undetermined: return "Undetermined";
  }
  return "?";
}

Json DichotomyVerdict::to_json() const {
  return {{"threshold_sup", threshold_sup},
          {"b0_estimate", {b0_lo, std::isfinite(b0_hi) ? Json(b0_hi) : Json(nullptr)}},
          {"verdict", to_string(verdict)},
          {"tol", tol},
          {"warnings", warnings}};
}

double BestConstantReport::max_lower() const {
  double v = 0.0;
  for (const auto& b : bounds)
    if (b.side == BoundSide::Lower && b.applicable) v = std::max(v, b.value);
  return v;
}

double BestConstantReport::min_upper() const {
  double v = INFINITY;
  for (const auto& b : bounds)
    if (b.side == BoundSide::Upper && b.applicable) v = std::min(v, b.value);
  return v;
}

Json BestConstantReport::to_json() const {
  Json bs = Json::array();
  for (const auto& b : bounds) {
    Json e = {{"side", b.side == BoundSide::Lower ? "lower" : "upper"},
              {"value", b.value},
              {"provenance", b.provenance},
              {"applicable", b.applicable}};
    if (!b.detail.is_null()) e["detail"] = b.detail;
    bs.push_back(std::move(e));
  }
  Json j = {{"n", n},         {"k", k},           {"A0_n", A0_n},
            {"M_F", M_F},     {"A0_nF", A0_nF},   {"bounds", bs},
            {"warnings", warnings}, {"inconsistent", inconsistent}};
  j["exact"] = exact ? Json(*exact) : Json(nullptr);
  if (exact) j["exact_reason"] = exact_reason;
  j["B0_scalar"] = b0_scalar ? Json(*b0_scalar) : Json(nullptr);
  if (b0_scalar) j["B0_scalar_source"] = b0_source;
  j["verdict"] = verdict ? verdict->to_json() : Json(nullptr);
  return j;
}

std::string BestConstantReport::to_csv() const {
  std::ostringstream out;
  out << "side,value,provenance,applicable\n";
  char buf[32];
  for (const auto& b : bounds) {
    std::snprintf(buf, sizeof buf, "%.12g", b.value);
    out << (b.side == BoundSide::Lower ? "lower" : "upper") << "," << buf << "," << b.provenance
        << "," << (b.applicable ? "true" : "false") << "\n";
  }
  if (exact) {
    std::snprintf(buf, sizeof buf, "%.12g", *exact);
    out << "exact," << buf << ",des1-pinch,true\n";
  }
  return out.str();
}

Vec manifold_samples(const ModelManifold& m, const SpatialPotential& g, int count) {
  if (!m.compact()) throw Error(ErrorCode::InvalidArgument, "bounds need a compact manifold");
  const double end = m.r_end();
  Vec xs;
  if (g.x_independent() && m.kind() != ManifoldKind::ConformalSphere) return {0.0};
  for (int i = 0; i < count; ++i) xs.push_back(end * i / (count - 1));
  for (const auto& t : g.terms()) {
    const Json j = t.coefficient.to_json();
    if (j.value("kind", "") == "table") {
      for (double r : j.at("r").get<Vec>())
        if (r >= 0.0 && r <= end) xs.push_back(r);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

BestConstantReport b0_bounds(const HomogeneousPotential& f, const SpatialPotential& g,
                             const ModelManifold& m, const BoundsOptions& opt) {
  if (f.k() != g.k()) throw Error(ErrorCode::InvalidArgument, "F and G dimensions differ");
  const int n = m.n();
  const double e = 2.0 / two_star(n);
  BestConstantReport rep;
  rep.n = n;
  rep.k = f.k();
  rep.A0_n = a0_euclidean(n);
  const MaximizerSet xf = max_on_direction_sphere(f);
  rep.M_F = xf.M_F;
  rep.A0_nF = std::pow(xf.M_F, e) * rep.A0_n;
  const double mfe = std::pow(xf.M_F, e);

  const Vec xs = manifold_samples(m, g, opt.x_samples);
  const RadialGrid grid(m, {opt.grid_N});
  const Vec curv = scalar_curvature_profile(grid);

  switch (m.kind()) {
    case ManifoldKind::RoundSphere:
      rep.b0_scalar = b0_scalar_sphere(n);
      rep.b0_source = "sphere: omega_n^{-2/n}";
      break;
    case ManifoldKind::ConformalSphere:
      if (opt.hebey_conformal) {
        rep.b0_scalar = curvature_factor(n) * rep.A0_n * *std::max_element(curv.begin(), curv.end());
        rep.b0_source = "conformal class of the round metric: (n-2)/(4(n-1)) A0(n) max S_g";
        if (n < 4) rep.warnings.push_back("Hebey's conformal value is stated for n >= 4");
      }
      break;
    default: break;
  }
  if (!rep.b0_scalar) {
    if (opt.require_scalar_b0) {
      throw Error(ErrorCode::UnknownScalarB0, "no usable B0(n,1,g) on " + m.name());
    }
    rep.warnings.push_back("B0(n,1,g) unknown on " + m.name() + ": Des1 bounds omitted");
  }

  const Vec pts = direction_points(xf);
  const int k = f.k();
  const std::size_t npts = pts.size() / k;
  auto point = [&](std::size_t i) { return std::span<const double>(pts.data() + i * k, k); };

  if (rep.b0_scalar) {
    const double b0 = *rep.b0_scalar;
    const double mg = global_min_on_sphere(g, xs);
    double best = 0.0, best_max = 0.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < npts; ++i) {
      const double mx = max_over_points(g, xs, point(i));
      const double v = mfe * b0 / mx;
      if (v > best) {
        best = v;
        best_max = mx;
        best_i = i;
      }
    }
    const Vec t0(point(best_i).begin(), point(best_i).end());
    rep.bounds.push_back({BoundSide::Lower, best, "des1-lower", true,
                          {{"t0", t0}, {"max_x_G", best_max}}});
    rep.bounds.push_back({BoundSide::Upper, mfe * b0 / mg, "des1-upper", true, {{"m_G", mg}}});
    if (best_max <= mg * (1.0 + 1e-10)) {
      rep.exact = mfe * b0 / mg;
      rep.exact_reason = "Des1 pinch: m_G attained along t0 at every x";
    }
  }

  // Geometric lower bound, sup over x of c A0(n,F) S(x) / m_{F,G}(x).
  {
    double best = 0.0;
    for (double x : xs) {
      const double s = scalar_curvature(m, x);
      double mfg = INFINITY;
      for (std::size_t i = 0; i < npts; ++i) mfg = std::min(mfg, g.evaluate(x, point(i)));
      best = std::max(best, curvature_factor(n) * rep.A0_nF * s / mfg);
    }
    Bound b{BoundSide::Lower, best, "geometric", n >= 4, {}};
    if (n < 4) rep.warnings.push_back("geometric lower bound needs n >= 4; reported as inapplicable");
    rep.bounds.push_back(b);
  }

  // Trivial bound from constant maps t0 along maximizing directions.
  {
    double v = 0.0;
    for (double w : grid.mass()) v += w;
    double best = 0.0;
    Vec best_t;
    for (std::size_t i = 0; i < npts; ++i) {
      double ig = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j)
        if (grid.mass()[j] != 0.0) ig += grid.mass()[j] * g.evaluate(grid.r()[j], point(i));
      const double val = std::pow(f.evaluate(point(i)) * v, e) / ig;
      if (val > best) {
        best = val;
        best_t.assign(point(i).begin(), point(i).end());
      }
    }
    rep.bounds.push_back({BoundSide::Lower, best, "trivial-test-function", true,
                          {{"t0", best_t}, {"volume", v}}});
  }

  if (rep.max_lower() > rep.min_upper() * (1.0 + 1e-9)) {
    rep.inconsistent = true;
    rep.warnings.push_back("Inconsistent: a lower bound exceeds an upper bound");
  }
  return rep;
}

double geometric_threshold(double a0nF, const MaximizerSet& xf, const SpatialPotential& g,
                           const ModelManifold& m, double x) {
  return curvature_factor(m.n()) * a0nF * scalar_curvature(m, x) / m_FG(g, x, xf);
}

double geometric_threshold(const HomogeneousPotential& f, const SpatialPotential& g,
                           const ModelManifold& m, double x) {
  const MaximizerSet xf = max_on_direction_sphere(f);
  const double a0nF = std::pow(xf.M_F, 2.0 / two_star(m.n())) * a0_euclidean(m.n());
  return geometric_threshold(a0nF, xf, g, m, x);
}

double b_epsilon(const HomogeneousPotential& f, const SpatialPotential& g, const ModelManifold& m,
                 double x0, double eps) {
  return geometric_threshold(f, g, m, x0) + eps;
}

DichotomyVerdict classify_dichotomy(const BestConstantReport& report, const HomogeneousPotential& f,
                                    const SpatialPotential& g, const ModelManifold& m, double tol) {
  DichotomyVerdict v;
  v.tol = tol;
  const int n = m.n();
  if (n < 5) v.warnings.push_back("the dichotomy is established for n >= 5 only");
  if (n == 3) v.warnings.push_back("geometric threshold inapplicable for n = 3");

  const MaximizerSet xf = max_on_direction_sphere(f);
  const double a0nF = std::pow(xf.M_F, 2.0 / two_star(n)) * a0_euclidean(n);
  MaximizerSet thin = xf;
  if (xf.degenerate) {
    thin.points.clear();
    const std::size_t stride = std::max<std::size_t>(1, xf.points.size() / 4096);
    for (std::size_t i = 0; i < xf.points.size(); i += stride) thin.points.push_back(xf.points[i]);
  }
  double thr = 0.0;
  for (double x : manifold_samples(m, g)) thr = std::max(thr, geometric_threshold(a0nF, thin, g, m, x));
  v.threshold_sup = thr;
  v.b0_lo = report.max_lower();
  v.b0_hi = report.min_upper();
  if (report.exact) v.b0_lo = v.b0_hi = *report.exact;

  const double scale = std::max(std::abs(thr), 1e-300);
  using K = DichotomyVerdict::Kind;
  if (std::abs(v.b0_lo - thr) <= tol * scale && std::abs(v.b0_hi - thr) <= tol * scale) {
    v.verdict = K::TouchesWithin;
  } else if (v.b0_lo > thr && v.b0_lo - thr >= tol * std::abs(thr)) {
    v.verdict = K::StrictlyAbove;
  } else {
    v.verdict = K::Undetermined;
    if (v.b0_hi < thr * (1.0 - tol)) v.warnings.push_back("upper bound below the threshold");
  }
  return v;
}

double reference_upper_bounds(int n, ReferenceModel model) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "n must be >= 3");
  const double w = std::pow(omega(n), 2.0 / n);
  switch (model) {
    case ReferenceModel::S1xSn1: return (1.0 + (n - 2.0) * (n - 2.0)) / (n * (n - 2.0) * w);
    case ReferenceModel::ProjectiveSpace: return (n + 2.0) / ((n - 2.0) * w);
  }
  return INFINITY;
}

}  // namespace sobolev

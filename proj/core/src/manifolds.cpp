#include "sobolev/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sobolev/error.hpp"
#include "sobolev/interp.hpp"

namespace sobolev {

namespace {

constexpr double kPi = std::numbers::pi;

void require_n(int n) {
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "dimension n must be >= 3");
}

}  // namespace

double omega(int n) {
  return 2.0 * std::pow(kPi, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
}

// ConformalFactor

ConformalFactor ConformalFactor::identity() {
  ConformalFactor c;
  c.u = [](double) { return 1.0; };
  c.du = [](double) { return 0.0; };
  c.d2u = [](double) { return 0.0; };
  c.source = {{"kind", "identity"}};
  return c;
}

ConformalFactor ConformalFactor::table(Vec r, Vec u) {
  for (double v : u) {
    if (!(v > 0.0)) throw Error(ErrorCode::NonPositiveDensity, "conformal factor must be positive");
  }
  ConformalFactor c;
  c.source = {{"kind", "table"}, {"r", r}, {"u", u}};
  auto s = std::make_shared<CubicSpline>(std::move(r), std::move(u));
  c.u = [s](double x) { return (*s)(x); };
  c.du = [s](double x) { return s->derivative(x); };
  return c;
}

ConformalFactor ConformalFactor::gaussian_spike(double amp, double width) {
  if (!(amp > -1.0) || !(width > 0.0)) {
    throw Error(ErrorCode::NonPositiveDensity, "spike must keep the factor positive");
  }
  ConformalFactor c;
  const double iw2 = 1.0 / (width * width);
  c.u = [=](double r) { return 1.0 + amp * std::exp(-r * r * iw2); };
  c.du = [=](double r) { return -2.0 * r * iw2 * amp * std::exp(-r * r * iw2); };
  c.d2u = [=](double r) {
    return amp * std::exp(-r * r * iw2) * (4.0 * r * r * iw2 * iw2 - 2.0 * iw2);
  };
  c.source = {{"kind", "gaussian"}, {"amp", amp}, {"width", width}};
  return c;
}

ConformalFactor ConformalFactor::from_json(const Json& j) {
  const std::string kind = j.value("kind", "identity");
  if (kind == "identity") return identity();
  if (kind == "gaussian") return gaussian_spike(j.at("amp"), j.at("width"));
  if (kind == "table") return table(j.at("r").get<Vec>(), j.at("u").get<Vec>());
  throw Error(ErrorCode::InvalidArgument, "unknown conformal factor kind '" + kind + "'");
}

double ConformalFactor::derivative(double r) const {
  if (du) return du(r);
  const double h = 1e-5;
  return (u(std::abs(r + h)) - u(std::abs(r - h))) / (2.0 * h);
}

double ConformalFactor::second_derivative(double r) const {
  if (d2u) return d2u(r);
  const double h = 1e-4;
  return (u(std::abs(r + h)) - 2.0 * u(r) + u(std::abs(r - h))) / (h * h);
}

// ModelManifold

ModelManifold ModelManifold::round_sphere(int n) {
  require_n(n);
  return ModelManifold(ManifoldKind::RoundSphere, n);
}

ModelManifold ModelManifold::flat_torus(int n, double side) {
  require_n(n);
  if (!(side > 0.0)) throw Error(ErrorCode::InvalidArgument, "torus side must be positive");
  ModelManifold m(ManifoldKind::FlatTorus, n);
  m.side_ = side;
  return m;
}

ModelManifold ModelManifold::conformal_sphere(int n, ConformalFactor u) {
  require_n(n);
  for (int i = 0; i <= 512; ++i) {
    if (!(u.u(kPi * i / 512) > 0.0)) {
      throw Error(ErrorCode::NonPositiveDensity, "conformal factor must be positive");
    }
  }
  ModelManifold m(ManifoldKind::ConformalSphere, n);
  m.u_ = std::move(u);
  return m;
}

ModelManifold ModelManifold::euclidean(int n) {
  require_n(n);
  return ModelManifold(ManifoldKind::Euclidean, n);
}

double ModelManifold::r_end() const {
  switch (kind_) {
    case ManifoldKind::FlatTorus: return 0.5 * side_;
    case ManifoldKind::Euclidean: return INFINITY;
    default: return kPi;
  }
}

double ModelManifold::sigma(double r) const {
  switch (kind_) {
    case ManifoldKind::FlatTorus: return 2.0 * std::pow(side_, n_ - 1);
    case ManifoldKind::Euclidean: return omega(n_ - 1) * std::pow(r, n_ - 1);
    default: return omega(n_ - 1) * std::pow(std::sin(r), n_ - 1);
  }
}

std::string ModelManifold::name() const {
  switch (kind_) {
    case ManifoldKind::RoundSphere: return "sphere";
    case ManifoldKind::FlatTorus: return "torus";
    case ManifoldKind::ConformalSphere: return "conformal";
    case ManifoldKind::Euclidean: return "euclidean";
  }
  return "?";
}

Json ModelManifold::to_json() const {
  Json j = {{"kind", name()}, {"n", n_}};
  if (kind_ == ManifoldKind::FlatTorus) j["side"] = side_;
  if (kind_ == ManifoldKind::ConformalSphere) j["conformal_factor"] = u_.source;
  return j;
}

ModelManifold ModelManifold::from_json(const Json& j) {
  const std::string kind = j.at("kind");
  const int n = j.at("n");
  if (kind == "sphere") return round_sphere(n);
  if (kind == "torus") return flat_torus(n, j.value("side", 1.0));
  if (kind == "conformal") {
    return conformal_sphere(n, ConformalFactor::from_json(j.value("conformal_factor", Json::object())));
  }
  if (kind == "euclidean") return euclidean(n);
  throw Error(ErrorCode::InvalidArgument, "unknown manifold kind '" + kind + "'");
}

// RadialGrid

RadialGrid::RadialGrid(ModelManifold m, GridOptions opt) : m_(std::move(m)), opt_(opt) {
  const int N = opt_.N;
  if (N < 16) throw Error(ErrorCode::GridTooCoarse, "need at least 16 nodes, got " + std::to_string(N));
  const int n = m_.n();
  const bool mapped = m_.kind() == ManifoldKind::Euclidean && opt_.r_max <= 0.0;
  const double c = opt_.scale;

  double s_end;
  if (mapped) {
    s_end = 0.5 * kPi;
  } else if (m_.kind() == ManifoldKind::Euclidean) {
    s_end = opt_.r_max;
  } else {
    s_end = opt_.r_max > 0.0 ? std::min(opt_.r_max, m_.r_end()) : m_.r_end();
  }
  const double h = s_end / (N - 1);
  auto r_of = [&](double s) { return mapped ? c * std::tan(s) : s; };
  auto dr_of = [&](double s) { return mapped ? c / (std::cos(s) * std::cos(s)) : 1.0; };
  const bool conformal = m_.kind() == ManifoldKind::ConformalSphere;
  const auto& u = m_.conformal_factor().u;
  const double ts = two_star(n);

  r_.resize(N);
  mass_.resize(N);
  conf_.assign(N, 1.0);
  for (int i = 0; i < N; ++i) {
    const double s = i * h;
    r_[i] = (mapped && i == N - 1) ? INFINITY : r_of(s);
    if (conformal) conf_[i] = u(r_[i]);
    if (mapped && i == N - 1) {
      mass_[i] = 0.0;
      continue;
    }
    double w = m_.sigma(r_[i]) * dr_of(s) * h;
    if (i == 0 || i == N - 1) w *= 0.5;
    if (conformal) w *= std::pow(conf_[i], ts);
    mass_[i] = std::max(w, 0.0);
  }
  // Exact zeros at the poles of the sphere.
  if (m_.kind() == ManifoldKind::RoundSphere || conformal || m_.kind() == ManifoldKind::Euclidean) {
    mass_[0] = 0.0;
    if (m_.kind() != ManifoldKind::Euclidean && s_end >= kPi) mass_[N - 1] = 0.0;
  }

  kappa_.resize(N - 1);
  for (int i = 0; i + 1 < N; ++i) {
    const double sm = (i + 0.5) * h;
    const double rm = r_of(sm);
    double k = m_.sigma(rm) / (dr_of(sm) * h);
    if (conformal) k *= std::pow(u(rm), 2.0);
    kappa_[i] = k;
  }

  // Control volumes [s_{i-1/2}, s_{i+1/2}] integrated by Gauss-Legendre.
  static const double gx[] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                              0.9061798459386640};
  static const double gw[] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                              0.4786286704993665, 0.2369268850561891};
  cell_mass_.assign(N, 0.0);
  for (int i = 0; i < N; ++i) {
    if (mass_[i] == 0.0 && !(i == 0 || i == N - 1)) continue;
    double acc = 0.0;
    for (int half : {-1, 1}) {
      const double a = i * h, b = std::clamp(i * h + 0.5 * half * h, 0.0, s_end);
      const double lo = std::min(a, b), hi = std::max(a, b);
      if (hi <= lo) continue;
      for (int q = 0; q < 5; ++q) {
        const double s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[q];
        acc += 0.5 * (hi - lo) * gw[q] * m_.sigma(r_of(s)) * dr_of(s);
      }
    }
    if (conformal) acc *= std::pow(conf_[i], ts);
    cell_mass_[i] = (mass_[i] == 0.0) ? 0.0 : acc;
  }

  rho_ = r_;
  if (conformal) {
    const double e = 2.0 / (n - 2.0);
    rho_[0] = 0.0;
    for (int i = 0; i + 1 < N; ++i) {
      const double a = std::pow(u(r_[i]), e), b = std::pow(u(r_[i] + 0.5 * h), e),
                   d = std::pow(u(r_[i + 1]), e);
      rho_[i + 1] = rho_[i] + h / 6.0 * (a + 4.0 * b + d);
    }
  }

  // Zero-mass nodes: Delta u = n u'' at a pole, u'' ~ 2 (u_1 - u_0) / r_1^2.
  pole_scale_.assign(N, 0.0);
  auto pole = [&](int i, double dr) {
    double s = 2.0 * n / (dr * dr);
    if (conformal) s *= std::pow(conf_[i], 2.0 - ts);
    pole_scale_[i] = s;
  };
  if (mass_[0] == 0.0) pole(0, r_[1] - r_[0]);
  if (mass_[N - 1] == 0.0 && std::isfinite(r_[N - 1])) pole(N - 1, r_[N - 1] - r_[N - 2]);
}

GridPtr make_grid(const ModelManifold& m, GridOptions opt) {
  return std::make_shared<const RadialGrid>(m, opt);
}

// VectorRadialField

VectorRadialField::VectorRadialField(GridPtr grid, int k)
    : grid_(std::move(grid)), k_(k), data_(grid_->size() * k, 0.0) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "field dimension k must be >= 1");
}

VectorRadialField::VectorRadialField(GridPtr grid, int k, Vec data)
    : grid_(std::move(grid)), k_(k), data_(std::move(data)) {
  if (data_.size() != grid_->size() * static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::GridMismatch, "field data size does not match grid");
  }
}

VectorRadialField VectorRadialField::from_profile(GridPtr grid, std::span<const double> t0,
                                                  std::span<const double> u) {
  if (u.size() != grid->size()) throw Error(ErrorCode::GridMismatch, "profile size mismatch");
  const int k = static_cast<int>(t0.size());
  VectorRadialField f(std::move(grid), k);
  for (std::size_t i = 0; i < u.size(); ++i)
    for (int c = 0; c < k; ++c) f.at(i, c) = t0[c] * u[i];
  return f;
}

VectorRadialField VectorRadialField::from_function(GridPtr grid, std::span<const double> t0,
                                                   const std::function<double(double)>& u) {
  Vec prof(grid->size());
  for (std::size_t i = 0; i < prof.size(); ++i) {
    const double r = grid->r()[i];
    prof[i] = std::isfinite(r) ? u(r) : 0.0;
  }
  return from_profile(std::move(grid), t0, prof);
}

Vec VectorRadialField::component(int c) const {
  Vec out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i, c);
  return out;
}

Vec VectorRadialField::norm_profile() const {
  Vec out(size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (int c = 0; c < k_; ++c) s += at(i, c) * at(i, c);
    out[i] = std::sqrt(s);
  }
  return out;
}

VectorRadialField& VectorRadialField::operator*=(double a) {
  for (double& x : data_) x *= a;
  return *this;
}

VectorRadialField& VectorRadialField::operator+=(const VectorRadialField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

VectorRadialField& VectorRadialField::operator-=(const VectorRadialField& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

void require_same_grid(const VectorRadialField& a, const VectorRadialField& b) {
  if (a.grid() != b.grid() || a.k() != b.k()) {
    throw Error(ErrorCode::GridMismatch, "fields live on different grids or dimensions");
  }
}

// Geometry

double volume(const ModelManifold& m, int N) {
  if (!m.compact()) return INFINITY;
  RadialGrid g(m, {N});
  double s = 0.0;
  for (double w : g.mass()) s += w;
  return s;
}

double background_laplacian(const ConformalFactor& u, int n, double r) {
  const double d2 = u.second_derivative(r);
  if (r < 1e-8 || kPi - r < 1e-8) return n * d2;
  return d2 + (n - 1) * std::cos(r) / std::sin(r) * u.derivative(r);
}

double scalar_curvature(const ModelManifold& m, double r) {
  const int n = m.n();
  switch (m.kind()) {
    case ManifoldKind::RoundSphere: return n * (n - 1.0);
    case ManifoldKind::FlatTorus:
    case ManifoldKind::Euclidean: return 0.0;
    case ManifoldKind::ConformalSphere: {
      const auto& cf = m.conformal_factor();
      const double u = cf.u(r);
      const double lap = background_laplacian(cf, n, r);
      return (-4.0 * (n - 1.0) / (n - 2.0) * lap + n * (n - 1.0) * u) *
             std::pow(u, 1.0 - two_star(n));
    }
  }
  return 0.0;
}

Vec scalar_curvature_profile(const RadialGrid& grid) {
  Vec s(grid.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = scalar_curvature(grid.manifold(), grid.r()[i]);
  return s;
}

double quadrature(std::span<const double> f, const RadialGrid& grid) {
  if (f.size() != grid.size()) throw Error(ErrorCode::GridMismatch, "profile size mismatch");
  double s = 0.0;
  const auto& m = grid.mass();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (m[i] != 0.0) s += m[i] * f[i];
  return s;
}

Vec radial_laplacian(std::span<const double> u, const RadialGrid& grid) {
  const std::size_t N = grid.size();
  if (u.size() != N) throw Error(ErrorCode::GridMismatch, "profile size mismatch");
  const auto& k = grid.kappa_;
  const auto& m = grid.cell_mass_;
  Vec out(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    if (m[i] == 0.0) {
      if (i == 0) out[i] = grid.pole_scale_[i] * (u[1] - u[0]);
      else if (i == N - 1) out[i] = grid.pole_scale_[i] * (u[N - 2] - u[N - 1]);
      continue;
    }
    double flux = 0.0;
    if (i + 1 < N) flux += k[i] * (u[i + 1] - u[i]);
    if (i > 0) flux -= k[i - 1] * (u[i] - u[i - 1]);
    out[i] = flux / m[i];
  }
  return out;
}

double dirichlet(std::span<const double> u, const RadialGrid& grid) {
  if (u.size() != grid.size()) throw Error(ErrorCode::GridMismatch, "profile size mismatch");
  const auto& k = grid.stiffness();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double d = u[i + 1] - u[i];
    s += k[i] * d * d;
  }
  return s;
}

double gradient_dirichlet(const VectorRadialField& U) {
  const auto& k = U.grid()->stiffness();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < U.size(); ++i) {
    double d2 = 0.0;
    for (int c = 0; c < U.k(); ++c) {
      const double d = U.at(i + 1, c) - U.at(i, c);
      d2 += d * d;
    }
    s += k[i] * d2;
  }
  return s;
}

double integrate_F(const HomogeneousPotential& f, const VectorRadialField& U) {
  if (f.k() != U.k()) throw Error(ErrorCode::GridMismatch, "potential and field dimensions differ");
  const auto& m = U.grid()->mass();
  double s = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i)
    if (m[i] != 0.0) s += m[i] * f.evaluate(U.node(i));
  return s;
}

double integrate_G(const SpatialPotential& g, const VectorRadialField& U) {
  if (g.k() != U.k()) throw Error(ErrorCode::GridMismatch, "potential and field dimensions differ");
  const auto& m = U.grid()->mass();
  const auto& r = U.grid()->r();
  double s = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i)
    if (m[i] != 0.0) s += m[i] * g.evaluate(r[i], U.node(i));
  return s;
}

double l2_squared(const VectorRadialField& U) { return lp_integral(U, 2.0); }

double lp_integral(const VectorRadialField& U, double p) {
  const Vec a = U.norm_profile();
  Vec q(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) q[i] = p == 2.0 ? a[i] * a[i] : std::pow(a[i], p);
  return quadrature(q, *U.grid());
}

double ball_mass(const VectorRadialField& U, double delta, Integrand what,
                 const HomogeneousPotential* f, double center) {
  if (center != 0.0) {
    throw Error(ErrorCode::OffPoleCenter, "balls must be centered at the pole of a radial field");
  }
  if (what == Integrand::FMass && f == nullptr) {
    throw Error(ErrorCode::InvalidArgument, "F-mass needs a potential");
  }
  const RadialGrid& g = *U.grid();
  const std::size_t N = g.size();
  const auto& rho = g.rho();
  const auto& m = g.mass();
  const auto& k = g.stiffness();

  Vec q(N, 0.0);
  if (what != Integrand::Dirichlet) {
    for (std::size_t i = 0; i < N; ++i) {
      if (m[i] == 0.0) continue;
      if (what == Integrand::FMass) {
        q[i] = f->evaluate(U.node(i));
      } else {
        for (int c = 0; c < U.k(); ++c) q[i] += U.at(i, c) * U.at(i, c);
      }
    }
  }
  auto raw = [&](std::size_t i) { return (i == 0 || i == N - 1) ? 2.0 * m[i] : m[i]; };

  double s = 0.0;
  for (std::size_t j = 0; j + 1 < N; ++j) {
    if (delta <= rho[j]) break;
    double frac = 1.0;
    if (delta < rho[j + 1]) frac = (delta - rho[j]) / (rho[j + 1] - rho[j]);
    double c;
    if (what == Integrand::Dirichlet) {
      double d2 = 0.0;
      for (int a = 0; a < U.k(); ++a) {
        const double d = U.at(j + 1, a) - U.at(j, a);
        d2 += d * d;
      }
      c = k[j] * d2;
    } else {
      c = 0.5 * (raw(j) * q[j] + raw(j + 1) * q[j + 1]);
    }
    s += frac * c;
  }
  return s;
}

// CSV

void write_field_csv(const VectorRadialField& U, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "r";
  for (int c = 0; c < U.k(); ++c) out << ",u_" << (c + 1);
  out << "\n";
  char buf[40];
  for (std::size_t i = 0; i < U.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", U.grid()->r()[i]);
    out << buf;
    for (int c = 0; c < U.k(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", U.at(i, c));
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

VectorRadialField read_field_csv(GridPtr grid, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::string line;
  std::getline(in, line);
  const int k = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (k < 1) throw Error(ErrorCode::IoError, "field CSV needs columns r,u_1,...");
  Vec data;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    const double r = std::stod(cell);
    if (row >= grid->size()) throw Error(ErrorCode::GridMismatch, "CSV has more rows than the grid");
    const double rg = grid->r()[row];
    if (!(std::isinf(r) && std::isinf(rg)) && std::abs(r - rg) > 1e-9 * std::max(1.0, std::abs(rg))) {
      throw Error(ErrorCode::GridMismatch, "CSV node " + std::to_string(row) + " does not match grid");
    }
    for (int c = 0; c < k; ++c) {
      if (!std::getline(ss, cell, ',')) throw Error(ErrorCode::IoError, "short CSV row");
      data.push_back(std::stod(cell));
    }
    ++row;
  }
  if (row != grid->size()) throw Error(ErrorCode::GridMismatch, "CSV row count does not match grid");
  return VectorRadialField(std::move(grid), k, std::move(data));
}

}  // namespace sobolev

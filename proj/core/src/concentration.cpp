#include "sobolev/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sobolev/error.hpp"
#include "sobolev/interp.hpp"
#include "vector_ops.hpp"

namespace sobolev {

namespace {

constexpr double kCoreRadii = 4.0;

double sup_norm(const VectorRadialField& U) {
  const Vec a = U.norm_profile();
  double s = 0.0;
  for (double v : a)
    if (std::isfinite(v)) s = std::max(s, v);
  return s;
}

// Two-point extrapolation of m(h) = m_inf + c h^e.
double richardson(double ha, double ma, double hb, double mb, double e) {
  const double pa = std::pow(ha, e), pb = std::pow(hb, e);
  if (!(std::abs(pa - pb) > 1e-14 * std::max(pa, pb))) {
    throw Error(ErrorCode::ExtrapolationUnstable, "coincident extrapolation nodes");
  }
  return (mb * pa - ma * pb) / (pa - pb);
}

}  // namespace

void FieldFamily::validate() const {
  if (values.size() != fields.size() || fields.empty()) {
    throw Error(ErrorCode::InvalidArgument, "family needs one field per parameter value");
  }
  for (std::size_t i = 1; i < fields.size(); ++i) {
    if (fields[i].grid() != fields[0].grid()) {
      throw Error(ErrorCode::GridMismatch, "family members must share one grid");
    }
  }
  const bool up = values.size() < 2 || values[1] > values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (up ? !(values[i] > values[i - 1]) : !(values[i] < values[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "family parameter must be strictly monotone");
    }
  }
}

Vec default_delta_ladder() { return {0.05, 0.1, 0.2, 0.4, 0.8}; }

std::vector<MassRow> mass_profile(const VectorRadialField& U, const Vec& deltas,
                                  const HomogeneousPotential& f) {
  std::vector<MassRow> rows;
  rows.reserve(deltas.size());
  for (double d : deltas) {
    rows.push_back({d, ball_mass(U, d, Integrand::FMass, &f), ball_mass(U, d, Integrand::Dirichlet),
                    ball_mass(U, d, Integrand::L2)});
  }
  return rows;
}

ConcentrationReport reverse_holder_check(const FieldFamily& family, const HomogeneousPotential& f,
                                         double a0nF, const Vec& deltas, double tail_delta,
                                         double tol) {
  family.validate();
  if (deltas.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two radii");
  const int n = family.fields.front().grid()->n();
  ConcentrationReport rep;
  rep.n = n;
  rep.parameter = family.parameter;
  rep.deltas = deltas;
  std::sort(rep.deltas.begin(), rep.deltas.end());
  rep.tail_delta = tail_delta;
  rep.a0nF = a0nF;
  rep.tol = tol;

  for (std::size_t i = 0; i < family.fields.size(); ++i) {
    const auto& U = family.fields[i];
    MemberDiagnostics d;
    d.parameter = family.values[i];
    d.sup = sup_norm(U);
    d.mu = d.sup > 0.0 ? std::pow(d.sup, -2.0 / (n - 2.0)) : INFINITY;
    d.masses = mass_profile(U, rep.deltas, f);
    d.l2_tail = l2_squared(U) > 0.0 ? l2_tail_ratio(U, tail_delta) : 0.0;
    rep.members.push_back(std::move(d));
  }

  // The family approaches its limit in list order; the last two members drive the extrapolation.
  if (rep.members.size() < 2) throw Error(ErrorCode::ExtrapolationUnstable, "need two family members");
  const MemberDiagnostics& A = rep.members[rep.members.size() - 2];
  const MemberDiagnostics& B = rep.members.back();
  rep.concentrating = B.sup > 1.01 * A.sup;
  if (!rep.concentrating) {
    rep.nu_delta.assign(rep.deltas.size(), 0.0);
    rep.mu_delta.assign(rep.deltas.size(), 0.0);
    return rep;
  }

  // Dirichlet ball masses also carry the O(mu^2) share of the lower-order
  // terms, which dominates the mu^{n-2} tail once n > 4.
  const double e_dir = std::min(2.0, n - 2.0);
  for (std::size_t j = 0; j < rep.deltas.size(); ++j) {
    rep.nu_delta.push_back(richardson(A.mu, A.masses[j].f_mass, B.mu, B.masses[j].f_mass, n));
    rep.mu_delta.push_back(richardson(A.mu, A.masses[j].dirichlet, B.mu, B.masses[j].dirichlet, e_dir));
  }
  // The tail laws only hold once the ball holds the core of both members.
  std::size_t j0 = 0;
  while (j0 < rep.deltas.size() && rep.deltas[j0] < kCoreRadii * A.mu) ++j0;
  if (j0 >= rep.deltas.size()) {
    throw Error(ErrorCode::ExtrapolationUnstable,
                "no radius exceeds " + detail::fmt(kCoreRadii) + " mu = " + detail::fmt(kCoreRadii * A.mu));
  }
  rep.first_usable = j0;
  if (j0 + 1 < rep.deltas.size()) {
    const double d0 = rep.deltas[j0], d1 = rep.deltas[j0 + 1];
    rep.nu1 = richardson(d0, rep.nu_delta[j0], d1, rep.nu_delta[j0 + 1], n);
    rep.mu1 = richardson(d0, rep.mu_delta[j0], d1, rep.mu_delta[j0 + 1], n);
  } else {
    rep.nu1 = rep.nu_delta[j0];
    rep.mu1 = rep.mu_delta[j0];
    rep.warnings.push_back("one usable radius: delta -> 0 step skipped, atoms may include diffuse mass");
  }

  const double total_f = B.masses.back().f_mass;
  if (rep.nu1 < -tol || rep.mu1 < -tol * std::max(1.0, B.masses.back().dirichlet) ||
      rep.nu1 > total_f * (1.0 + tol) + tol) {
    throw Error(ErrorCode::ExtrapolationUnstable,
                "atom estimates nu=" + detail::fmt(rep.nu1) + " mu=" + detail::fmt(rep.mu1) +
                    " fall outside the admissible range");
  }
  rep.nu1 = std::clamp(rep.nu1, 0.0, total_f);
  rep.mu1 = std::max(rep.mu1, 0.0);
  rep.reverse_holder_margin = a0nF * rep.mu1 - std::pow(rep.nu1, 2.0 / two_star(n));
  rep.margin_ok = rep.reverse_holder_margin >= -tol;
  return rep;
}

Json ConcentrationReport::to_json() const {
  Json j;
  j["n"] = n;
  j["parameter"] = parameter;
  j["deltas"] = deltas;
  j["tail_delta"] = tail_delta;
  j["concentrating"] = concentrating;
  j["nu_delta"] = nu_delta;
  j["first_usable_delta"] = first_usable < deltas.size() ? Json(deltas[first_usable]) : Json();
  j["mu_delta"] = mu_delta;
  j["nu1"] = nu1;
  j["mu1"] = mu1;
  j["A0_nF"] = a0nF;
  j["reverse_holder_margin"] = reverse_holder_margin;
  j["tol"] = tol;
  j["margin_ok"] = margin_ok;
  j["warnings"] = warnings;
  Json ms = Json::array();
  for (const auto& m : members) {
    Json r;
    r["parameter"] = m.parameter;
    r["sup"] = m.sup;
    r["mu"] = m.mu;
    r["l2_tail"] = m.l2_tail;
    Json rows = Json::array();
    for (const auto& row : m.masses) {
      rows.push_back({{"delta", row.delta}, {"f_mass", row.f_mass}, {"dirichlet", row.dirichlet}, {"l2", row.l2}});
    }
    r["masses"] = rows;
    ms.push_back(r);
  }
  j["members"] = ms;
  return j;
}

std::string ConcentrationReport::to_csv() const {
  std::ostringstream out;
  out << parameter << ",sup,mu,l2_tail,delta,f_mass,dirichlet,l2\n";
  char buf[256];
  for (const auto& m : members) {
    for (const auto& row : m.masses) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", m.parameter, m.sup,
                    m.mu, m.l2_tail, row.delta, row.f_mass, row.dirichlet, row.l2);
      out << buf;
    }
  }
  return out.str();
}

DgnmRatio dgnm_ratio(const VectorRadialField& U, double delta, double p, double q) {
  const auto& grid = *U.grid();
  const int n = grid.n();
  const auto& rho = grid.rho();
  const Vec a = U.norm_profile();
  double sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (rho[i] <= delta) sup = std::max(sup, a[i]);

  // |U|^{p/2} as a scalar field, so its ball L^2 mass is the L^p integral.
  auto ball_lp = [&](double e) {
    VectorRadialField w(U.grid(), 1);
    for (std::size_t i = 0; i < a.size(); ++i) w.at(i, 0) = std::pow(a[i], e / 2.0);
    return std::pow(ball_mass(w, 2.0 * delta, Integrand::L2), 1.0 / e);
  };
  DgnmRatio out;
  const double lp = ball_lp(p);
  out.ratio = lp > 0.0 ? sup / (std::pow(delta, -n / p) * lp) : 0.0;
  out.lq_norm = ball_lp(q);
  return out;
}

double l2_tail_ratio(const VectorRadialField& U, double delta) {
  const double total = l2_squared(U);
  if (!(total > 0.0)) throw Error(ErrorCode::ZeroField, "L^2 tail of a zero field");
  return std::max(0.0, 1.0 - ball_mass(U, delta, Integrand::L2) / total);
}

RescaledField rescale_extract(const VectorRadialField& U, GridPtr target) {
  const auto& grid = *U.grid();
  const int n = grid.n();
  const Vec a = U.norm_profile();
  const double sup = sup_norm(U);
  if (!(sup > 0.0)) throw Error(ErrorCode::ZeroField, "cannot rescale a zero field");
  if (a[0] < sup * (1.0 - 1e-12)) {
    throw Error(ErrorCode::SupNotAtPole, "|U| peaks at rho=" +
                                             detail::fmt(grid.rho()[std::max_element(a.begin(), a.end()) - a.begin()]));
  }
  RescaledField out{std::pow(sup, -2.0 / (n - 2.0)), VectorRadialField(target, U.k()), 0.0};
  out.valid_radius = grid.rho_max() / out.mu;
  const double amp = std::pow(out.mu, (n - 2.0) / 2.0);

  // Splines in the geodesic radius, one per component, over the finite nodes.
  Vec rho;
  std::vector<Vec> comp(U.k());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid.rho()[i])) continue;
    if (!rho.empty() && !(grid.rho()[i] > rho.back())) continue;
    rho.push_back(grid.rho()[i]);
    for (int c = 0; c < U.k(); ++c) comp[c].push_back(U.at(i, c));
  }
  std::vector<CubicSpline> splines;
  for (int c = 0; c < U.k(); ++c) splines.emplace_back(rho, comp[c]);

  const auto& tr = target->r();
  for (std::size_t i = 0; i < target->size(); ++i) {
    const double x = out.mu * tr[i];
    if (!(x <= rho.back())) continue;
    for (int c = 0; c < U.k(); ++c) out.V.at(i, c) = amp * splines[c](x);
  }
  return out;
}

double decay_envelope(const VectorRadialField& V, double lo, double hi, double s) {
  const int n = V.grid()->n();
  const auto& r = V.grid()->r();
  const Vec a = V.norm_profile();
  double C = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (r[i] >= lo && r[i] <= hi) C = std::max(C, a[i] * std::pow(r[i], n - 2.0 - s));
  return C;
}

}  // namespace sobolev

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "sobolev/error.hpp"
#include "sobolev/potentials.hpp"
#include "vector_ops.hpp"

namespace sobolev {

namespace {

// Fixed node sets for kernel regression on S^{k-1}.
struct NodeSet {
  int k = 0;
  std::vector<Vec> nodes;
  double spacing = 0.0;
};

NodeSet build_nodes(int k) {
  NodeSet s;
  s.k = k;
  if (k == 2) {
    const int n = 16384;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      s.nodes.push_back({std::cos(a), std::sin(a)});
    }
    s.spacing = 2.0 * std::numbers::pi / n;
  } else if (k == 3) {
    const int n = 200000;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / n;
      const double rho = std::sqrt(1.0 - z * z);
      s.nodes.push_back({rho * std::cos(golden * i), rho * std::sin(golden * i), z});
    }
    s.spacing = std::sqrt(4.0 * std::numbers::pi / n);
  } else {
    auto grid = direction_grid(k);
    const std::size_t stride = std::max<std::size_t>(1, grid.size() / 20000);
    for (std::size_t i = 0; i < grid.size(); i += stride) s.nodes.push_back(grid[i]);
    const double area = 2.0 * std::pow(std::numbers::pi, k / 2.0) / std::tgamma(k / 2.0);
    s.spacing = std::pow(area / static_cast<double>(s.nodes.size()), 1.0 / (k - 1));
  }
  return s;
}

std::shared_ptr<const NodeSet> nodes_for(int k) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const NodeSet>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[k];
  if (!slot) slot = std::make_shared<const NodeSet>(build_nodes(k));
  return slot;
}

// Gaussian kernel regression h(y) = sum K_j f_j / sum K_j with
// K_j = exp((y.theta_j - 1)/w^2), truncated at Euclidean distance 6w.
class SmoothedModel final : public HomogeneousPotential::Model {
 public:
  SmoothedModel(HomogeneousPotential base, double width)
      : Model(base.k(), base.degree(), "smooth(" + base.label() + ")"),
        base_(std::move(base)),
        w_(width),
        set_(nodes_for(base_.k())) {
    f_.reserve(set_->nodes.size());
    for (const auto& t : set_->nodes) f_.push_back(base_.direction_value(t));
    cut_ = 1.0 - 18.0 * w_ * w_;
    if (k() == 3) build_hash();
  }

  double value(std::span<const double> t) const override {
    const double r = detail::norm(t);
    Vec theta(t.begin(), t.end());
    for (double& x : theta) x /= r;
    double h;
    kernel(theta, h, nullptr);
    return std::pow(r, degree()) * h;
  }
  bool differentiable() const override { return true; }
  void gradient(std::span<const double> t, std::span<double> out) const override {
    const double r = detail::norm(t);
    if (r == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    Vec theta(t.begin(), t.end());
    for (double& x : theta) x /= r;
    Vec g(k(), 0.0);
    double h;
    kernel(theta, h, &g);
    const double gt = detail::dot(g, theta);
    const double rp1 = std::pow(r, degree() - 1.0);
    for (int i = 0; i < k(); ++i) {
      out[i] = rp1 * (degree() * h * theta[i] + (g[i] - gt * theta[i]));
    }
  }
  Json to_json() const override {
    return {{"kind", "smoothed"}, {"k", k()}, {"degree", degree()},
            {"params", {{"width", w_}, {"base", base_.to_json()}}}};
  }

 private:
  template <class Visit>
  void for_neighbors(const Vec& theta, Visit&& visit) const {
    const auto& nodes = set_->nodes;
    if (k() == 2) {
      const int n = static_cast<int>(nodes.size());
      const double a = std::atan2(theta[1], theta[0]);
      const int c = static_cast<int>(std::lround(a / set_->spacing));
      const int m = static_cast<int>(std::ceil(7.0 * w_ / set_->spacing)) + 1;
      for (int j = c - m; j <= c + m; ++j) visit(static_cast<std::size_t>(((j % n) + n) % n));
    } else if (k() == 3) {
      const int ci = cell(theta[0]), cj = cell(theta[1]), ck = cell(theta[2]);
      for (int a = ci - 1; a <= ci + 1; ++a)
        for (int b = cj - 1; b <= cj + 1; ++b)
          for (int c = ck - 1; c <= ck + 1; ++c) {
            auto it = hash_.find(key(a, b, c));
            if (it == hash_.end()) continue;
            for (auto j : it->second) visit(j);
          }
    } else {
      for (std::size_t j = 0; j < nodes.size(); ++j) visit(j);
    }
  }

  void kernel(const Vec& theta, double& h, Vec* grad) const {
    const auto& nodes = set_->nodes;
    const double inv = 1.0 / (w_ * w_);
    double s = 0.0, sf = 0.0;
    std::vector<std::pair<std::size_t, double>> used;
    for_neighbors(theta, [&](std::size_t j) {
      const double c = detail::dot(theta, nodes[j]);
      if (c < cut_) return;
      const double kj = std::exp((c - 1.0) * inv);
      s += kj;
      sf += kj * f_[j];
      if (grad) used.emplace_back(j, kj);
    });
    if (s == 0.0) {
      throw Error(ErrorCode::SmoothingFailed, "kernel support contains no nodes");
    }
    h = sf / s;
    if (grad) {
      for (auto [j, kj] : used) {
        const double wgt = kj * (f_[j] - h) * inv / s;
        for (int i = 0; i < k(); ++i) (*grad)[i] += wgt * nodes[j][i];
      }
    }
  }

  int cell(double x) const { return static_cast<int>(std::floor((x + 1.0) / cell_)); }
  static std::int64_t key(int a, int b, int c) {
    return (static_cast<std::int64_t>(a) * 4096 + b) * 4096 + c;
  }
  void build_hash() {
    cell_ = std::max(6.0 * w_, 1e-3);
    for (std::size_t j = 0; j < set_->nodes.size(); ++j) {
      const auto& p = set_->nodes[j];
      hash_[key(cell(p[0]), cell(p[1]), cell(p[2]))].push_back(j);
    }
  }

  HomogeneousPotential base_;
  double w_;
  std::shared_ptr<const NodeSet> set_;
  Vec f_;
  double cut_ = 0.0;
  double cell_ = 1.0;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> hash_;
};

// Dense check points, offset from the kernel nodes.
std::vector<Vec> check_points(int k) {
  std::vector<Vec> pts;
  if (k == 2) {
    const int n = 65536;
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * (i + 0.37) / n;
      pts.push_back({std::cos(a), std::sin(a)});
    }
    return pts;
  }
  auto grid = direction_grid(k);
  const std::size_t stride = k == 3 ? 1 : std::max<std::size_t>(1, grid.size() / 2000);
  for (std::size_t i = 0; i < grid.size(); i += stride) pts.push_back(grid[i]);
  return pts;
}

}  // namespace

HomogeneousPotential make_smoothed(const HomogeneousPotential& base, double width) {
  return HomogeneousPotential(std::make_shared<SmoothedModel>(base, width));
}

SmoothingResult smooth(const HomogeneousPotential& h0, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothing eps must be positive");
  if (h0.has_gradient()) return {h0, 0.0, 0.0};
  if (h0.k() == 1) {
    // Two directions only: F is already C^1 away from 0 once f(+-1) is fixed.
    const double fp = h0.direction_value(Vec{1.0}), fm = h0.direction_value(Vec{-1.0});
    const double p = h0.degree();
    auto f = [fp, fm](std::span<const double> t) { return t[0] >= 0.0 ? fp : fm; };
    auto g = [fp, fm, p](std::span<const double> t, std::span<double> out) {
      const double a = std::abs(t[0]);
      out[0] = a == 0.0 ? 0.0 : p * std::pow(a, p - 1.0) * (t[0] > 0.0 ? fp : -fm);
    };
    return {HomogeneousPotential::custom(1, p, f, g, h0.label()), 0.0, 0.0};
  }

  const auto set = nodes_for(h0.k());
  const auto pts = check_points(h0.k());
  Vec exact(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) exact[i] = h0.direction_value(pts[i]);

  double w = 0.05;
  while (w >= 2.0 * set->spacing) {
    HomogeneousPotential h = make_smoothed(h0, w);
    double dev = 0.0;
    for (std::size_t i = 0; i < pts.size() && dev <= eps; ++i) {
      dev = std::max(dev, std::abs(h.direction_value(pts[i]) - exact[i]));
    }
    if (dev <= eps) return {h, dev, w};
    w *= 0.5;
  }
  throw Error(ErrorCode::SmoothingFailed,
              "no kernel width down to " + detail::fmt(2.0 * set->spacing) + " meets eps=" +
                  detail::fmt(eps) + " for '" + h0.label() + "'");
}

SpatialPotential smooth(const SpatialPotential& g, double eps) {
  if (g.has_gradient()) return g;
  // Split eps across non-smooth terms by coefficient magnitude.
  double total = 0.0;
  std::vector<double> amp;
  for (const auto& t : g.terms()) {
    double a = 0.0;
    if (!t.potential.has_gradient()) {
      for (int i = 0; i <= 256; ++i) a = std::max(a, std::abs(t.coefficient(std::numbers::pi * i / 256)));
    }
    amp.push_back(a);
    total += a;
  }
  std::vector<SpatialPotential::Term> terms;
  for (std::size_t m = 0; m < g.terms().size(); ++m) {
    const auto& t = g.terms()[m];
    if (t.potential.has_gradient() || amp[m] == 0.0) {
      terms.push_back(t);
    } else {
      terms.push_back({t.coefficient, smooth(t.potential, eps / total).potential});
    }
  }
  return SpatialPotential(g.k(), std::move(terms), "smooth(" + g.label() + ")");
}

}  // namespace sobolev

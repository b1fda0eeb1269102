#include "sobolev/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sobolev/error.hpp"
#include "sobolev/interp.hpp"
#include "vector_ops.hpp"

namespace sobolev {

void HomogeneousPotential::Model::gradient(std::span<const double>, std::span<double>) const {
  throw Error(ErrorCode::MissingGradient, "potential '" + label() + "' is not C^1");
}

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

class LqPowerModel final : public HomogeneousPotential::Model {
 public:
  LqPowerModel(int k, double q, double degree, double coeff)
      : Model(k, degree, "lq(q=" + detail::fmt(q) + ")"), q_(q), coeff_(coeff) {}

  double value(std::span<const double> t) const override {
    return coeff_ * std::pow(power_sum(t), degree() / q_);
  }
  bool differentiable() const override { return q_ > 1.0 || k() == 1; }
  void gradient(std::span<const double> t, std::span<double> out) const override {
    const double s = power_sum(t);
    if (s == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double outer = coeff_ * degree() * std::pow(s, degree() / q_ - 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      out[i] = outer * std::pow(std::abs(t[i]), q_ - 1.0) * sign(t[i]);
    }
  }
  Json to_json() const override {
    return {{"kind", "lq"}, {"k", k()}, {"degree", degree()},
            {"params", {{"q", q_}, {"coeff", coeff_}}}};
  }

 private:
  double power_sum(std::span<const double> t) const {
    double s = 0.0;
    if (q_ == 2.0) {
      for (double x : t) s += x * x;
    } else {
      for (double x : t) s += std::pow(std::abs(x), q_);
    }
    return s;
  }

  double q_, coeff_;
};

class PowerSumModel final : public HomogeneousPotential::Model {
 public:
  PowerSumModel(Vec c, double degree)
      : Model(static_cast<int>(c.size()), degree, "power_sum"), c_(std::move(c)) {}

  double value(std::span<const double> t) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += c_[i] * std::pow(std::abs(t[i]), degree());
    return s;
  }
  bool differentiable() const override { return true; }
  void gradient(std::span<const double> t, std::span<double> out) const override {
    for (std::size_t i = 0; i < t.size(); ++i) {
      out[i] = c_[i] * degree() * std::pow(std::abs(t[i]), degree() - 1.0) * sign(t[i]);
    }
  }
  Json to_json() const override {
    return {{"kind", "power_sum"}, {"k", k()}, {"degree", degree()}, {"params", {{"coeffs", c_}}}};
  }

 private:
  Vec c_;
};

class QuadraticTermModel final : public HomogeneousPotential::Model {
 public:
  QuadraticTermModel(int k, int i, int j)
      : Model(k, 2.0, "t" + std::to_string(i) + "*t" + std::to_string(j)), i_(i), j_(j) {}

  double value(std::span<const double> t) const override { return t[i_] * t[j_]; }
  bool differentiable() const override { return true; }
  void gradient(std::span<const double> t, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    out[i_] += t[j_];
    out[j_] += t[i_];
  }
  Json to_json() const override {
    return {{"kind", "quadratic_term"}, {"k", k()}, {"degree", 2.0},
            {"params", {{"i", i_}, {"j", j_}}}};
  }

 private:
  int i_, j_;
};

class AbsProductModel final : public HomogeneousPotential::Model {
 public:
  AbsProductModel(int k, int i, int j)
      : Model(k, 2.0, "|t" + std::to_string(i) + "||t" + std::to_string(j) + "|"), i_(i), j_(j) {}

  double value(std::span<const double> t) const override {
    return std::abs(t[i_]) * std::abs(t[j_]);
  }
  bool differentiable() const override { return i_ == j_; }
  void gradient(std::span<const double> t, std::span<double> out) const override {
    if (i_ != j_) Model::gradient(t, out);
    std::fill(out.begin(), out.end(), 0.0);
    out[i_] = 2.0 * t[i_];
  }
  Json to_json() const override {
    return {{"kind", "abs_product"}, {"k", k()}, {"degree", 2.0},
            {"params", {{"i", i_}, {"j", j_}}}};
  }

 private:
  int i_, j_;
};

class TableModel final : public HomogeneousPotential::Model {
 public:
  TableModel(int k, double degree, std::vector<Vec> dirs, Vec values)
      : Model(k, degree, "table"), dirs_(std::move(dirs)), values_(std::move(values)) {
    for (auto& d : dirs_) detail::normalize(d);
    if (k == 2) {
      std::vector<std::pair<double, double>> av;
      for (std::size_t i = 0; i < dirs_.size(); ++i) {
        av.emplace_back(std::atan2(dirs_[i][1], dirs_[i][0]), values_[i]);
      }
      std::sort(av.begin(), av.end());
      for (auto& [a, v] : av) {
        angles_.push_back(a);
        sorted_.push_back(v);
      }
    }
  }

  double value(std::span<const double> t) const override {
    const double r = detail::norm(t);
    if (r == 0.0) return 0.0;
    Vec theta(t.begin(), t.end());
    for (double& x : theta) x /= r;
    return std::pow(r, degree()) * direction(theta);
  }
  bool differentiable() const override { return k() == 1; }
  void gradient(std::span<const double> t, std::span<double> out) const override {
    if (k() != 1) Model::gradient(t, out);
    const double f = direction(Vec{t[0] >= 0.0 ? 1.0 : -1.0});
    out[0] = degree() * std::pow(std::abs(t[0]), degree() - 1.0) * sign(t[0]) * f;
  }
  Json to_json() const override {
    return {{"kind", "table"}, {"k", k()}, {"degree", degree()},
            {"table", {{"directions", dirs_}, {"values", values_}}}};
  }

 private:
  double direction(std::span<const double> theta) const {
    if (k() == 1) {
      for (std::size_t i = 0; i < dirs_.size(); ++i) {
        if ((dirs_[i][0] > 0) == (theta[0] > 0)) return values_[i];
      }
      return values_.front();
    }
    if (k() == 2) {
      const double a = std::atan2(theta[1], theta[0]);
      const std::size_t n = angles_.size();
      auto it = std::upper_bound(angles_.begin(), angles_.end(), a);
      std::size_t hi = static_cast<std::size_t>(it - angles_.begin()) % n;
      std::size_t lo = (hi + n - 1) % n;
      double a0 = angles_[lo], a1 = angles_[hi];
      double x = a;
      const double two_pi = 2.0 * std::numbers::pi;
      if (a1 <= a0) a1 += two_pi;
      if (x < a0) x += two_pi;
      const double w = (a1 > a0) ? (x - a0) / (a1 - a0) : 0.0;
      return (1.0 - w) * sorted_[lo] + w * sorted_[hi];
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < dirs_.size(); ++i) {
      double d2 = 0.0;
      for (int c = 0; c < k(); ++c) {
        const double e = theta[c] - dirs_[i][c];
        d2 += e * e;
      }
      if (d2 < 1e-28) return values_[i];
      num += values_[i] / d2;
      den += 1.0 / d2;
    }
    return num / den;
  }

  std::vector<Vec> dirs_;
  Vec values_;
  Vec angles_, sorted_;
};

class LinearComposeModel final : public HomogeneousPotential::Model {
 public:
  LinearComposeModel(HomogeneousPotential base, Vec a)
      : Model(base.k(), base.degree(), base.label() + "∘A"), base_(std::move(base)), a_(std::move(a)) {}

  double value(std::span<const double> t) const override { return base_.evaluate(apply(t)); }
  bool differentiable() const override { return base_.has_gradient(); }
  void gradient(std::span<const double> t, std::span<double> out) const override {
    const Vec g = base_.gradient(apply(t));
    const int k = this->k();
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += a_[i * k + j] * g[i];
      out[j] = s;
    }
  }
  Json to_json() const override {
    return {{"kind", "linear"}, {"k", k()}, {"degree", degree()},
            {"params", {{"matrix", a_}, {"base", base_.to_json()}}}};
  }

 private:
  Vec apply(std::span<const double> t) const {
    const int k = this->k();
    Vec y(k, 0.0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) y[i] += a_[i * k + j] * t[j];
    return y;
  }

  HomogeneousPotential base_;
  Vec a_;
};

class ScaledModel final : public HomogeneousPotential::Model {
 public:
  ScaledModel(HomogeneousPotential base, double theta)
      : Model(base.k(), base.degree(), detail::fmt(theta) + "*" + base.label()),
        base_(std::move(base)),
        theta_(theta) {}

  double value(std::span<const double> t) const override { return theta_ * base_.evaluate(t); }
  bool differentiable() const override { return base_.has_gradient(); }
  void gradient(std::span<const double> t, std::span<double> out) const override {
    base_.gradient(t, out);
    for (double& g : out) g *= theta_;
  }
  Json to_json() const override {
    return {{"kind", "scaled"}, {"k", k()}, {"degree", degree()},
            {"params", {{"theta", theta_}, {"base", base_.to_json()}}}};
  }

 private:
  HomogeneousPotential base_;
  double theta_;
};

class CustomModel final : public HomogeneousPotential::Model {
 public:
  CustomModel(int k, double degree, DirectionFunction f, GradientFunction g, std::string label)
      : Model(k, degree, std::move(label)), f_(std::move(f)), g_(std::move(g)) {}

  double value(std::span<const double> t) const override {
    const double r = detail::norm(t);
    if (r == 0.0) return 0.0;
    Vec theta(t.begin(), t.end());
    for (double& x : theta) x /= r;
    return std::pow(r, degree()) * f_(theta);
  }
  bool differentiable() const override { return static_cast<bool>(g_); }
  void gradient(std::span<const double> t, std::span<double> out) const override {
    if (!g_) Model::gradient(t, out);
    g_(t, out);
  }
  Json to_json() const override {
    return {{"kind", "custom"}, {"k", k()}, {"degree", degree()}, {"label", label()}};
  }

 private:
  DirectionFunction f_;
  GradientFunction g_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidArgument, what);
}

}  // namespace

// Declared in smoothing.cpp.
HomogeneousPotential make_smoothed(const HomogeneousPotential& base, double width);

HomogeneousPotential::HomogeneousPotential(std::shared_ptr<const Model> model)
    : model_(std::move(model)) {
  require(model_ != nullptr, "null potential model");
  require(model_->k() >= 1, "potential dimension k must be >= 1");
}

double HomogeneousPotential::evaluate(std::span<const double> t) const {
  for (double x : t) {
    if (x != 0.0) return model_->value(t);
  }
  return 0.0;
}

double HomogeneousPotential::direction_value(std::span<const double> theta) const {
  return model_->value(theta);
}

void HomogeneousPotential::gradient(std::span<const double> t, std::span<double> out) const {
  if (!has_gradient()) throw Error(ErrorCode::MissingGradient, "potential '" + label() + "' is not C^1");
  model_->gradient(t, out);
}

Vec HomogeneousPotential::gradient(std::span<const double> t) const {
  Vec out(t.size(), 0.0);
  gradient(t, out);
  return out;
}

HomogeneousPotential HomogeneousPotential::scaled(double theta) const {
  require(theta > 0.0, "scale factor must be positive");
  return HomogeneousPotential(std::make_shared<ScaledModel>(*this, theta));
}

HomogeneousPotential HomogeneousPotential::lq_power(int k, double q, double degree, double coeff) {
  require(q > 0.0 && degree > 0.0 && coeff > 0.0, "lq potential needs q, degree, coeff > 0");
  return HomogeneousPotential(std::make_shared<LqPowerModel>(k, q, degree, coeff));
}

HomogeneousPotential HomogeneousPotential::power_sum(Vec coeffs, double degree) {
  require(!coeffs.empty() && degree > 1.0, "power_sum needs coefficients and degree > 1");
  return HomogeneousPotential(std::make_shared<PowerSumModel>(std::move(coeffs), degree));
}

HomogeneousPotential HomogeneousPotential::quadratic_term(int k, int i, int j) {
  require(i >= 0 && j >= 0 && i < k && j < k, "quadratic term index out of range");
  return HomogeneousPotential(std::make_shared<QuadraticTermModel>(k, i, j));
}

HomogeneousPotential HomogeneousPotential::abs_product(int k, int i, int j) {
  require(i >= 0 && j >= 0 && i < k && j < k, "abs product index out of range");
  return HomogeneousPotential(std::make_shared<AbsProductModel>(k, i, j));
}

HomogeneousPotential HomogeneousPotential::table(int k, double degree, std::vector<Vec> directions,
                                                 Vec values) {
  require(!directions.empty() && directions.size() == values.size(), "table size mismatch");
  for (const auto& d : directions) {
    require(static_cast<int>(d.size()) == k && detail::norm(d) > 0.0, "bad table direction");
  }
  return HomogeneousPotential(
      std::make_shared<TableModel>(k, degree, std::move(directions), std::move(values)));
}

HomogeneousPotential HomogeneousPotential::compose_linear(const HomogeneousPotential& base,
                                                          Vec matrix) {
  require(static_cast<int>(matrix.size()) == base.k() * base.k(), "matrix must be k x k");
  return HomogeneousPotential(std::make_shared<LinearComposeModel>(base, std::move(matrix)));
}

HomogeneousPotential HomogeneousPotential::custom(int k, double degree, DirectionFunction f,
                                                  GradientFunction grad, std::string label) {
  require(static_cast<bool>(f), "custom potential needs a direction function");
  return HomogeneousPotential(
      std::make_shared<CustomModel>(k, degree, std::move(f), std::move(grad), std::move(label)));
}

HomogeneousPotential HomogeneousPotential::from_json(const Json& j) {
  const std::string kind = j.at("kind");
  const int k = j.at("k");
  const double degree = j.at("degree");
  if (kind == "lq") {
    const auto& p = j.at("params");
    return lq_power(k, p.at("q"), degree, p.value("coeff", 1.0));
  }
  if (kind == "power_sum") return power_sum(j.at("params").at("coeffs").get<Vec>(), degree);
  if (kind == "quadratic_term") return quadratic_term(k, j["params"]["i"], j["params"]["j"]);
  if (kind == "abs_product") return abs_product(k, j["params"]["i"], j["params"]["j"]);
  if (kind == "table") {
    const auto& t = j.at("table");
    return table(k, degree, t.at("directions").get<std::vector<Vec>>(), t.at("values").get<Vec>());
  }
  if (kind == "linear") {
    return compose_linear(from_json(j["params"]["base"]), j["params"]["matrix"].get<Vec>());
  }
  if (kind == "scaled") return from_json(j["params"]["base"]).scaled(j["params"]["theta"]);
  if (kind == "smoothed") {
    return make_smoothed(from_json(j["params"]["base"]), j["params"]["width"].get<double>());
  }
  throw Error(ErrorCode::InvalidArgument, "cannot deserialize potential kind '" + kind + "'");
}

// RadialCoefficient

RadialCoefficient RadialCoefficient::constant(double c) {
  RadialCoefficient rc;
  rc.kind_ = Kind::Constant;
  rc.a_ = c;
  return rc;
}

RadialCoefficient RadialCoefficient::cosine(double a, double b) {
  RadialCoefficient rc;
  rc.kind_ = Kind::Cosine;
  rc.a_ = a;
  rc.b_ = b;
  return rc;
}

RadialCoefficient RadialCoefficient::table(Vec r, Vec values) {
  RadialCoefficient rc;
  rc.kind_ = Kind::Table;
  CubicSpline s(r, values);  // validates
  rc.r_ = std::move(r);
  rc.v_ = std::move(values);
  return rc;
}

double RadialCoefficient::operator()(double r) const {
  switch (kind_) {
    case Kind::Constant: return a_;
    case Kind::Cosine: return a_ + b_ * std::cos(r);
    case Kind::Table: {
      // Rebuilding per call is wasteful; tables are small and rarely on hot paths.
      static thread_local const RadialCoefficient* cached = nullptr;
      static thread_local CubicSpline spline;
      if (cached != this || spline.knots() != r_) {
        spline = CubicSpline(r_, v_);
        cached = this;
      }
      return spline(r);
    }
  }
  return a_;
}

RadialCoefficient RadialCoefficient::scaled(double lambda) const {
  RadialCoefficient rc = *this;
  rc.a_ *= lambda;
  rc.b_ *= lambda;
  for (double& v : rc.v_) v *= lambda;
  return rc;
}

Json RadialCoefficient::to_json() const {
  switch (kind_) {
    case Kind::Constant: return {{"kind", "constant"}, {"value", a_}};
    case Kind::Cosine: return {{"kind", "cosine"}, {"a", a_}, {"b", b_}};
    case Kind::Table: return {{"kind", "table"}, {"r", r_}, {"values", v_}};
  }
  return {};
}

RadialCoefficient RadialCoefficient::from_json(const Json& j) {
  if (j.is_number()) return constant(j.get<double>());
  const std::string kind = j.at("kind");
  if (kind == "constant") return constant(j.at("value"));
  if (kind == "cosine") return cosine(j.at("a"), j.at("b"));
  if (kind == "table") return table(j.at("r").get<Vec>(), j.at("values").get<Vec>());
  throw Error(ErrorCode::InvalidArgument, "unknown coefficient kind '" + kind + "'");
}

// SpatialPotential

SpatialPotential::SpatialPotential(int k, std::vector<Term> terms, std::string label)
    : k_(k), terms_(std::move(terms)), label_(std::move(label)) {
  require(!terms_.empty(), "spatial potential needs at least one term");
  for (const auto& t : terms_) {
    require(t.potential.k() == k_, "term dimension mismatch");
    require(std::abs(t.potential.degree() - 2.0) < 1e-14, "G terms must be 2-homogeneous");
  }
}

SpatialPotential SpatialPotential::uniform(const HomogeneousPotential& g) {
  return SpatialPotential(g.k(), {{RadialCoefficient::constant(1.0), g}}, g.label());
}

SpatialPotential SpatialPotential::beta_times(const RadialCoefficient& beta,
                                              const HomogeneousPotential& g) {
  return SpatialPotential(g.k(), {{beta, g}}, "beta*" + g.label());
}

SpatialPotential SpatialPotential::quadratic_form(int k, std::vector<RadialCoefficient> a) {
  require(static_cast<int>(a.size()) == k * k, "quadratic form needs k*k coefficients");
  std::vector<Term> terms;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      RadialCoefficient c = a[i * k + j];
      if (c.is_constant() && c(0.0) == 0.0) continue;
      if (i != j) c = c.scaled(2.0);
      terms.push_back({c, HomogeneousPotential::quadratic_term(k, i, j)});
    }
  }
  return SpatialPotential(k, std::move(terms), "quadratic_form");
}

SpatialPotential SpatialPotential::abs_bilinear(int k, std::vector<RadialCoefficient> a) {
  require(static_cast<int>(a.size()) == k * k, "abs bilinear form needs k*k coefficients");
  std::vector<Term> terms;
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      RadialCoefficient c = a[i * k + j];
      if (i != j) {
        const RadialCoefficient& d = a[j * k + i];
        if (c.is_constant() && d.is_constant()) {
          c = RadialCoefficient::constant(c(0.0) + d(0.0));
        } else {
          require(c.to_json() == d.to_json(), "non-constant A_ij must be symmetric");
          c = c.scaled(2.0);
        }
      }
      if (c.is_constant() && c(0.0) == 0.0) continue;
      terms.push_back({c, HomogeneousPotential::abs_product(k, i, j)});
    }
  }
  return SpatialPotential(k, std::move(terms), "abs_bilinear");
}

bool SpatialPotential::x_independent() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.coefficient.is_constant(); });
}

bool SpatialPotential::has_gradient() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const Term& t) { return t.potential.has_gradient(); });
}

double SpatialPotential::evaluate(double r, std::span<const double> t) const {
  double s = 0.0;
  for (const auto& term : terms_) s += term.coefficient(r) * term.potential.evaluate(t);
  return s;
}

void SpatialPotential::gradient(double r, std::span<const double> t, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  Vec g(t.size());
  for (const auto& term : terms_) {
    term.potential.gradient(t, g);
    const double c = term.coefficient(r);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] += c * g[i];
  }
}

HomogeneousPotential SpatialPotential::slice(double r) const {
  if (terms_.size() == 1 && terms_[0].coefficient.is_constant() &&
      terms_[0].coefficient(0.0) == 1.0) {
    return terms_[0].potential;
  }
  auto self = *this;
  DirectionFunction f = [self, r](std::span<const double> theta) { return self.evaluate(r, theta); };
  GradientFunction g;
  if (has_gradient()) {
    g = [self, r](std::span<const double> t, std::span<double> out) { self.gradient(r, t, out); };
  }
  return HomogeneousPotential::custom(k_, 2.0, std::move(f), std::move(g),
                                      label_ + "@r=" + detail::fmt(r));
}

SpatialPotential SpatialPotential::scaled(double lambda) const {
  require(lambda > 0.0, "scale factor must be positive");
  std::vector<Term> terms = terms_;
  for (auto& t : terms) t.coefficient = t.coefficient.scaled(lambda);
  return SpatialPotential(k_, std::move(terms), detail::fmt(lambda) + "*" + label_);
}

Json SpatialPotential::to_json() const {
  Json terms = Json::array();
  for (const auto& t : terms_) {
    terms.push_back({{"coefficient", t.coefficient.to_json()}, {"potential", t.potential.to_json()}});
  }
  return {{"kind", "spatial"}, {"k", k_}, {"degree", 2.0}, {"label", label_}, {"terms", terms}};
}

SpatialPotential SpatialPotential::from_json(const Json& j) {
  if (j.value("kind", "") != "spatial") {
    return uniform(HomogeneousPotential::from_json(j));
  }
  std::vector<Term> terms;
  for (const auto& t : j.at("terms")) {
    terms.push_back({RadialCoefficient::from_json(t.at("coefficient")),
                     HomogeneousPotential::from_json(t.at("potential"))});
  }
  return SpatialPotential(j.at("k"), std::move(terms), j.value("label", "spatial"));
}

}  // namespace sobolev

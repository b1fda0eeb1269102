#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sobolev {

using Vec = std::vector<double>;
using Json = nlohmann::json;

class VectorRadialField;

/// Restriction f of a potential to the unit direction sphere S^{k-1}.
using DirectionFunction = std::function<double(std::span<const double>)>;
/// Ambient gradient of the full potential at t (written into the output span).
using GradientFunction = std::function<void(std::span<const double>, std::span<double>)>;

/// Positively homogeneous function F(t) = |t|^p f(t/|t|) on R^k.
///
/// Instances are immutable and cheap to copy (shared implementation). A
/// gradient is available only for potentials that are C^1 away from the origin;
/// non-smooth potentials are made differentiable through smooth().
class HomogeneousPotential {
 public:
  class Model {
   public:
    Model(int k, double degree, std::string label)
        : k_(k), degree_(degree), label_(std::move(label)) {}
    virtual ~Model() = default;

    int k() const { return k_; }
    double degree() const { return degree_; }
    const std::string& label() const { return label_; }

    /// F(t) for t != 0.
    virtual double value(std::span<const double> t) const = 0;
    virtual bool differentiable() const { return false; }
    virtual void gradient(std::span<const double> t, std::span<double> out) const;
    virtual Json to_json() const = 0;

   private:
    int k_;
    double degree_;
    std::string label_;
  };

  explicit HomogeneousPotential(std::shared_ptr<const Model> model);

  int k() const { return model_->k(); }
  double degree() const { return model_->degree(); }
  const std::string& label() const { return model_->label(); }

  double evaluate(std::span<const double> t) const;
  double evaluate(std::initializer_list<double> t) const {
    return evaluate(std::span<const double>(t.begin(), t.size()));
  }
  /// f(theta) for a unit vector theta.
  double direction_value(std::span<const double> theta) const;

  bool has_gradient() const { return model_->differentiable(); }
  /// Throws MissingGradient when the potential is not C^1.
  void gradient(std::span<const double> t, std::span<double> out) const;
  Vec gradient(std::span<const double> t) const;

  HomogeneousPotential scaled(double theta) const;

  Json to_json() const { return model_->to_json(); }
  static HomogeneousPotential from_json(const Json& j);

  // Constructors.

  /// coeff * |t|_q^degree with |t|_q = (sum |t_i|^q)^{1/q}.
  static HomogeneousPotential lq_power(int k, double q, double degree, double coeff = 1.0);
  /// sum_i c_i |t_i|^degree.
  static HomogeneousPotential power_sum(Vec coeffs, double degree);
  /// t_i t_j (degree 2); used as a quadratic-form term.
  static HomogeneousPotential quadratic_term(int k, int i, int j);
  /// |t_i| |t_j| (degree 2); C^1 only when i == j.
  static HomogeneousPotential abs_product(int k, int i, int j);
  /// Direction table, interpolated on the sphere (piecewise linear for k = 2,
  /// inverse-distance weighting otherwise). Directions are normalized.
  static HomogeneousPotential table(int k, double degree, std::vector<Vec> directions, Vec values);
  /// F(A t) for an injective k x k matrix A (row-major).
  static HomogeneousPotential compose_linear(const HomogeneousPotential& base, Vec matrix);
  /// Generic potential from a direction restriction and an optional ambient gradient.
  static HomogeneousPotential custom(int k, double degree, DirectionFunction f,
                                     GradientFunction grad = {}, std::string label = "custom");

  const std::shared_ptr<const Model>& model() const { return model_; }

 private:
  std::shared_ptr<const Model> model_;
};

/// Scalar coefficient profile a(r) along the radial coordinate of a manifold.
class RadialCoefficient {
 public:
  enum class Kind { Constant, Cosine, Table };

  static RadialCoefficient constant(double c);
  /// a + b cos(r).
  static RadialCoefficient cosine(double a, double b);
  /// Natural cubic spline through (r_j, v_j); constant extrapolation.
  static RadialCoefficient table(Vec r, Vec values);

  double operator()(double r) const;
  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::Constant; }
  RadialCoefficient scaled(double lambda) const;

  Json to_json() const;
  static RadialCoefficient from_json(const Json& j);

 private:
  Kind kind_ = Kind::Constant;
  double a_ = 1.0;
  double b_ = 0.0;
  Vec r_, v_, m_;  // spline knots, values, second derivatives
};

/// G(x, t) = sum_m a_m(r(x)) H_m(t), each H_m homogeneous of degree 2.
class SpatialPotential {
 public:
  struct Term {
    RadialCoefficient coefficient;
    HomogeneousPotential potential;
  };

  SpatialPotential(int k, std::vector<Term> terms, std::string label);

  static SpatialPotential uniform(const HomogeneousPotential& g);
  static SpatialPotential beta_times(const RadialCoefficient& beta, const HomogeneousPotential& g);
  /// <A(x) t, t> with symmetric coefficient matrix (row-major, k*k entries).
  static SpatialPotential quadratic_form(int k, std::vector<RadialCoefficient> a);
  /// sum_ij A_ij(x) |t_i| |t_j| (row-major, k*k entries).
  static SpatialPotential abs_bilinear(int k, std::vector<RadialCoefficient> a);

  int k() const { return k_; }
  const std::string& label() const { return label_; }
  const std::vector<Term>& terms() const { return terms_; }
  bool x_independent() const;
  bool has_gradient() const;

  double evaluate(double r, std::span<const double> t) const;
  double evaluate(double r, std::initializer_list<double> t) const {
    return evaluate(r, std::span<const double>(t.begin(), t.size()));
  }
  void gradient(double r, std::span<const double> t, std::span<double> out) const;
  HomogeneousPotential slice(double r) const;
  SpatialPotential scaled(double lambda) const;

  Json to_json() const;
  static SpatialPotential from_json(const Json& j);

 private:
  int k_;
  std::vector<Term> terms_;
  std::string label_;
};

struct MaximizerSet {
  double M_F = 0.0;
  std::vector<Vec> points;
  double tolerance = 1e-6;
  /// f is constant to within tolerance: the maximizer set is the whole sphere
  /// and `points` holds the direction grid.
  bool degenerate = false;
};

/// Seeding grid on S^{k-1}: uniform angles (k = 2), Fibonacci lattice (k = 3),
/// Halton points projected to the sphere (k >= 4). Always contains +-e_i.
std::vector<Vec> direction_grid(int k);

MaximizerSet max_on_direction_sphere(const HomogeneousPotential& p, double refine_tol = 1e-12,
                                     double tolerance = 1e-6);
/// Minimum over a direction set, with local refinement.
double min_on_direction_sphere(const HomogeneousPotential& p);

double m_FG(const SpatialPotential& g, double x, const MaximizerSet& xf);
double global_min_on_sphere(const SpatialPotential& g, std::span<const double> xs);
/// max over the samples xs of G(x, t).
double max_over_points(const SpatialPotential& g, std::span<const double> xs,
                       std::span<const double> t);

struct SmoothingResult {
  HomogeneousPotential potential;
  double certificate = 0.0;  // sampled sup |h - h0| on the direction sphere
  double width = 0.0;        // kernel width used (0 when unchanged)
};

SmoothingResult smooth(const HomogeneousPotential& h0, double eps);
/// Smooths every non-C^1 term of G.
SpatialPotential smooth(const SpatialPotential& g, double eps);

struct BrezisLiebConstant {
  double C = 0.0;
  double delta = 0.0;
  double M = 0.0;          // max of F on the closed ball of radius 2
  std::size_t verified = 0;  // number of random pairs checked
};

BrezisLiebConstant brezis_lieb_constant(const HomogeneousPotential& f, double eps,
                                        std::size_t verify_pairs = 100000,
                                        std::uint64_t seed = 7);

/// d_a = | int (F(U_a) - F(U_a - U)) dv - int F(U) dv | for each member.
Vec brezis_lieb_defect(const HomogeneousPotential& f, std::span<const VectorRadialField> family,
                       const VectorRadialField& limit);

}  // namespace sobolev

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psiest/expr.hpp"
#include "psiest/interval.hpp"
#include "psiest/psi.hpp"
#include "psiest/solver.hpp"

namespace psiest {

enum class FamilyKind { NormalLocation, AlphaDensity, QuasiArithmetic, SignLocation, UserExpression };

std::string_view to_string(FamilyKind k) noexcept;

/// A concrete ψ family with its domains.
///
/// NormalLocation  ψ(x, m) = (x − m)/σ²           X = Θ = ℝ
/// AlphaDensity    ψ(x, α) = 1/α + ln(1 − x²)     X = (0,1), Θ = (0,∞)
/// QuasiArithmetic ψ(x, t) = ±(f(x) − f(t))       X = I, Θ = interior of I
///                 sign chosen so ψ decreases in t; f strictly monotone on I
/// SignLocation    ψ(x, t) = sign(x − t)          X = Θ = ℝ, sign(0) = 0
/// UserExpression  ψ(x, t) from a parsed expression over declared domains
struct FamilySpec {
  FamilyKind kind = FamilyKind::NormalLocation;
  double sigma = 1.0;
  /// Generator f(x) for QuasiArithmetic, ψ(x, t) for UserExpression.
  std::optional<Expression> expression;
  /// Text the expression was parsed from.
  std::string source;
  ParameterDomain theta = ParameterDomain::real_line();
  Interval observation_domain = Interval::real_line();
  bool continuous_in_t = true;
  /// +1 if the quasi-arithmetic generator increases, −1 if it decreases.
  int generator_direction = 1;

  /// Canonical descriptor text, e.g. "normal(sigma=2)".
  std::string descriptor() const;
};

FamilySpec normal_location(double sigma = 1.0);
FamilySpec alpha_density();
FamilySpec sign_location();

/// Throws DomainError if f is not strictly monotone on `domain` when probed,
/// or cannot be evaluated there.
FamilySpec quasi_arithmetic(std::string_view generator, Interval domain);

/// ψ(x, t) = √x − √t on X = Θ = (0, ∞).
FamilySpec sqrt_mean();

/// `continuous` defaults to "expression does not call sign".
FamilySpec user_expression(std::string_view psi, ParameterDomain theta, Interval x_domain,
                           std::optional<bool> continuous = std::nullopt);

PsiFunction make_psi(const FamilySpec& family);

/// Exact weighted estimator for the families that have one:
///   NormalLocation  Σλx / Σλ
///   AlphaDensity    −Σλ / Σλ ln(1 − x²)
///   QuasiArithmetic f⁻¹(Σλ f(x) / Σλ), f⁻¹ by bisection on [min x, max x]
/// Absent for SignLocation and UserExpression. Throws DomainError for an
/// observation outside X.
std::optional<double> closed_form_weighted(const FamilySpec& family, const WeightedSample& sample);

/// κ(x) = (Σx + n·geometric mean)/(2n), geometric mean via mean of logs.
/// Throws DomainError unless every x > 0.
double kappa(std::span<const double> xs);
double sample_max(std::span<const double> xs);
double mid_range(std::span<const double> xs);

enum class ReferenceKind { Kappa, Max, MidRange };

/// Estimators that are defined directly on tuples, not through ψ.
struct ReferenceEstimator {
  ReferenceKind kind;

  double operator()(std::span<const double> xs) const;
  std::string name() const;
  Interval observation_domain() const;
  ParameterDomain theta() const;
};

/// g(ϑ_{ψ₁}(x), …, ϑ_{ψ_N}(x)) for a continuous g: Θ₁×…×Θ_N → Θ₀.
class CompositeEstimator {
 public:
  /// g is an expression in t1..tN. Throws ArityError when components is
  /// empty, UnknownIdentifier for variables other than t1..tN.
  CompositeEstimator(std::vector<PsiFunction> components, std::string_view g,
                     ParameterDomain theta0);

  const std::vector<PsiFunction>& components() const noexcept { return components_; }
  const Expression& g() const noexcept { return g_; }
  const ParameterDomain& theta0() const noexcept { return theta0_; }
  /// Intersection of the component observation domains.
  Interval observation_domain() const;

  /// Applies g to component values; DomainError if the result leaves Θ₀.
  double combine(std::span<const double> component_values) const;

 private:
  std::vector<PsiFunction> components_;
  Expression g_;
  BoundExpression g_bound_;
  ParameterDomain theta0_;
};

double composite_estimate(const CompositeEstimator& c, std::span<const double> xs,
                          const SolverConfig& cfg = {});
double composite_estimate_weighted(const CompositeEstimator& c, const WeightedSample& sample,
                                   const SolverConfig& cfg = {});

}  // namespace psiest

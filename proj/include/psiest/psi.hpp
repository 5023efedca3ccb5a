#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "psiest/interval.hpp"

namespace psiest {

/// A function ψ: X × Θ → ℝ together with the sets it is declared on.
///
/// The wrapped callable must be pure and reentrant: the solver and the
/// property verifier call it from many places, possibly concurrently.
class PsiFunction {
 public:
  using Eval = std::function<double(double x, double t)>;

  PsiFunction(std::string name, Eval eval, Interval observation_domain, ParameterDomain theta,
              bool continuous_in_t);

  double operator()(double x, double t) const { return eval_(x, t); }

  const std::string& name() const noexcept { return name_; }
  const Interval& observation_domain() const noexcept { return observation_domain_; }
  const ParameterDomain& theta() const noexcept { return theta_; }
  bool continuous_in_t() const noexcept { return continuous_in_t_; }

 private:
  std::string name_;
  Eval eval_;
  Interval observation_domain_;
  ParameterDomain theta_;
  bool continuous_in_t_;
};

struct WeightedPoint {
  double x;
  double weight;
};

/// Observations paired with weights from Λ_n: nonnegative, not all zero.
class WeightedSample {
 public:
  /// Throws DomainError for an empty list, a negative or non-finite weight,
  /// or a non-finite observation; ZeroWeightVector if every weight is 0.
  explicit WeightedSample(std::vector<WeightedPoint> points);

  /// Pairs xs with weights; the spans must have equal length.
  WeightedSample(std::span<const double> xs, std::span<const double> weights);

  /// All weights equal to 1.
  static WeightedSample unit(std::span<const double> xs);

  std::size_t size() const noexcept { return points_.size(); }
  std::span<const WeightedPoint> points() const noexcept { return points_; }
  const WeightedPoint& operator[](std::size_t i) const { return points_[i]; }

  std::vector<double> xs() const;
  std::vector<double> weights() const;
  double total_weight() const;

  /// Same observations, every weight multiplied by s > 0.
  WeightedSample scaled(double s) const;

 private:
  std::vector<WeightedPoint> points_;
};

}  // namespace psiest

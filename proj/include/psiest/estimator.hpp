#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>

#include "psiest/catalog.hpp"
#include "psiest/psi.hpp"
#include "psiest/solver.hpp"

namespace psiest {

enum class EstimatorKind { Psi, Composite, Reference };

/// Uniform view of the three kinds of estimator the verifier can check:
/// a ψ-estimator, a composite g(ϑ_{ψ₁}, …, ϑ_{ψ_N}), or a reference
/// estimator defined directly on tuples (κ, max, mid-range).
///
/// ψ-based and composite estimators accept arbitrary weights from Λ_n.
/// Reference estimators only accept integer weights, which are expanded into
/// the replicated tuple.
class Estimator {
 public:
  static Estimator from_psi(PsiFunction psi, SolverConfig cfg = {});
  static Estimator from_composite(CompositeEstimator c, SolverConfig cfg = {});
  static Estimator from_reference(ReferenceEstimator r, SolverConfig cfg = {});

  EstimatorKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  const Interval& observation_domain() const noexcept { return observation_domain_; }
  const SolverConfig& config() const noexcept { return cfg_; }
  bool accepts_real_weights() const noexcept { return kind_ != EstimatorKind::Reference; }

  /// True for ψ-estimators with ψ continuous in t: they have the zero-point
  /// property, under which the mean-type inequalities are strict.
  bool strict_mean_type() const noexcept { return strict_; }

  /// M(x).
  double operator()(std::span<const double> xs) const;
  /// M with weights; for reference estimators the weights must be integers.
  double weighted(std::span<const double> xs, std::span<const double> weights) const;
  double weighted(const WeightedSample& sample) const;
  /// M₁(x).
  double single(double x) const;

  /// Only for EstimatorKind::Psi.
  const PsiFunction& psi() const;

 private:
  Estimator() = default;

  EstimatorKind kind_ = EstimatorKind::Psi;
  std::string name_;
  Interval observation_domain_ = Interval::real_line();
  SolverConfig cfg_;
  bool strict_ = false;
  std::function<double(const WeightedSample&)> weighted_;
  std::function<double(std::span<const double>)> plain_;
  std::shared_ptr<const PsiFunction> psi_;
};

}  // namespace psiest

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psiest/interval.hpp"
#include "psiest/psi.hpp"

namespace psiest {

struct SolverConfig {
  /// Bracket width target, relative to max(1, |bracket ends|).
  double bracket_tol = 1e-12;
  /// |f(θ̂)| at or below this marks a zero point.
  double zero_tol = 1e-9;
  int max_iterations = 200;
  int max_expansions = 128;
  std::optional<double> initial_guess;

  /// Throws DomainError on a nonpositive tolerance or iteration budget.
  void validate() const;
};

enum class SolveStatus { SignChange, ZeroPoint };

std::string_view to_string(SolveStatus s) noexcept;

/// A located point of sign change (of decreasing type) with diagnostics.
struct EstimateResult {
  double theta_hat = 0.0;
  /// f(theta_hat). Only diagnostic when f is not continuous.
  double residual = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int iterations = 0;
  bool is_zero_point = false;
  SolveStatus status = SolveStatus::SignChange;
};

/// max(1, |a|, |b|); the unit that relative tolerances are measured in.
double tolerance_scale(double a, double b) noexcept;

/// Σ λᵢ ψ(xᵢ, t) in index order with Neumaier compensation. Zero-weight
/// terms are skipped. Throws DomainError when t is not strictly inside Θ or
/// an observation lies outside X.
double weighted_sum(const PsiFunction& psi, const WeightedSample& sample, double t);

/// Locates the point of sign change of f on the open interval `domain`.
///
/// The bracket search starts at cfg.initial_guess (or the domain's reference
/// point) and walks outward: toward an infinite end the distance doubles each
/// step, toward a finite end the remaining gap halves. Once f > 0 and f < 0
/// are seen at a < b the bracket is bisected on sign alone. After the width
/// target is met, bisection continues (budget permitting) until |f| drops to
/// zero_tol or the bracket reaches one ulp, so continuous f end as zero
/// points.
///
/// A midpoint with f = 0 is accepted when f is positive just left and
/// negative just right of it. Zeros at two points farther apart than
/// 4·bracket_tol·scale mean f vanishes on more than one point, which no
/// sign-change function of decreasing type does: NonUniqueSignChange.
///
/// Throws NoSignChange when the expansion budget runs out, MaxIterations
/// when bisection does not reach the width target.
EstimateResult find_sign_change(const std::function<double(double)>& f,
                                const ParameterDomain& domain, const SolverConfig& cfg = {});

/// ϑ_{n,ψ}(x): the unit-weight estimator.
EstimateResult estimate(const PsiFunction& psi, std::span<const double> xs,
                        const SolverConfig& cfg = {});

/// ϑ^λ_{n,ψ}(x).
EstimateResult estimate_weighted(const PsiFunction& psi, const WeightedSample& sample,
                                 const SolverConfig& cfg = {});

/// Estimator of the replicated tuple k⊗x, computed with the counts as
/// weights (no materialization). Throws ZeroWeightVector if all counts are 0.
EstimateResult estimate_replicated(const PsiFunction& psi, std::span<const double> xs,
                                   std::span<const std::size_t> counts,
                                   const SolverConfig& cfg = {});

/// Same quantity as estimate_replicated, computed on the explicit tuple.
EstimateResult estimate_materialized(const PsiFunction& psi, std::span<const double> xs,
                                     std::span<const std::size_t> counts,
                                     const SolverConfig& cfg = {});

/// k⊗x = (k₁⊙x₁, …, k_n⊙x_n).
std::vector<double> replicate(std::span<const double> xs, std::span<const std::size_t> counts);

}  // namespace psiest

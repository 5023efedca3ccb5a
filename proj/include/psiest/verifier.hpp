#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psiest/estimator.hpp"
#include "psiest/interval.hpp"

namespace psiest {

enum class PropertyKind {
  MeanType,
  MeanTypeStrict,
  WeightLineMonotone,
  Bisymmetry,
  Bisymmetry2x2,
  ReplicationLimit,
  WeightContinuity,
  Sensitivity,
  NullHomogeneity,
  PermutationInvariance,
  QuasiAffineMonotone,
  ReplicationCollapse,
  SignChangeCertificate,
};

enum class PropertyStatus { Holds, Violated, Inconclusive };

std::string_view to_string(PropertyKind k) noexcept;
std::string_view to_string(PropertyStatus s) noexcept;
/// Accepts the names printed by to_string and their kebab-case CLI forms
/// ("mean-type", "bisymmetry-2x2", ...).
std::optional<PropertyKind> property_from_string(std::string_view name);

/// A named input of a witness. `shape` is {n} for vectors and {rows, cols}
/// for matrices (row-major in `values`); scalars have shape {}.
struct WitnessInput {
  std::string name;
  std::vector<double> values;
  std::vector<std::size_t> shape;
};

struct NamedValue {
  std::string name;
  double value;
};

/// Everything needed to re-run one violating instance, plus what it computed.
struct Witness {
  std::vector<WitnessInput> inputs;
  std::vector<NamedValue> values;
  /// By how much the checked inequality fails (positive on violation).
  double margin = 0.0;

  const WitnessInput* input(std::string_view name) const;
  double scalar(std::string_view name) const;
  std::vector<double> vector(std::string_view name) const;
  std::vector<std::vector<double>> matrix(std::string_view name) const;
  double value(std::string_view name) const;
};

/// "Holds" means no counterexample was found under the recorded seed and
/// tolerance.
struct PropertyReport {
  PropertyKind property = PropertyKind::MeanType;
  PropertyStatus status = PropertyStatus::Holds;
  int trials = 1;
  std::uint64_t seed = 42;
  double tolerance = 0.0;
  std::optional<Witness> witness;
  /// Why a report is Inconclusive.
  std::string cause;
};

using Matrix = std::vector<std::vector<double>>;

/// 10·bracket_tol·max(1, |values|...), the slack every inequality check allows.
double inequality_tolerance(const SolverConfig& cfg, std::span<const double> values);

// ---------------------------------------------------------------------------
// Mean-type property

/// min ϑ(block) ≤ ϑ(concatenation) ≤ max ϑ(block). For estimators with the
/// zero-point property and block values spread by more than tol, both sides
/// must hold strictly with margin tol (reported as MeanTypeStrict).
PropertyReport check_mean_type(const Estimator& est, const std::vector<std::vector<double>>& blocks);

// ---------------------------------------------------------------------------
// Monotonicity along weight lines

/// J_{a,b} = {s : s·a + b ∈ Λ_n}; empty when no such s exists. Throws
/// DomainError when a and b differ in length or are empty.
Interval weight_line_domain(std::span<const double> a, std::span<const double> b);

/// Finite grid range used for J_{a,b}: clipped to [−100, 100], open or
/// infinite ends pulled in by 1e−4.
Interval weight_line_sampling_range(const Interval& j);

/// Samples s ↦ ϑ^{s·a+b}(x) on a uniform grid over J_{a,b}. Throws
/// DomainError for an empty J_{a,b} or grid_size < 3.
PropertyReport check_weight_line_monotone(const Estimator& est, std::span<const double> xs,
                                          std::span<const double> a, std::span<const double> b,
                                          int grid_size = 33);

/// Indices (i, j, k), i < j < k, where values rise then fall (or fall then
/// rise) by more than tol on both sides; nullopt if none. O(n).
struct UpDownPattern {
  std::size_t i, j, k;
  double margin;
};
std::optional<UpDownPattern> find_up_down_pattern(std::span<const double> values, double tol);

/// Every sampled triple i < j < k satisfies
/// min(v_i, v_k) − tol ≤ v_j ≤ max(v_i, v_k) + tol. O(n³).
bool sampled_quasi_affine(std::span<const double> values, double tol);

/// Holds iff the up-down test and the quasi-affinity test agree on values.
PropertyReport check_quasi_affine_monotone(std::span<const double> values, double tol);

// ---------------------------------------------------------------------------
// Bisymmetry-type inequalities

/// min over rows of ϑ^{λ_{i,·}}(x_{i,·}) ≤ max over columns of
/// ϑ^{λ_{·,j}}(x_{·,j}). Throws PositivityViolation if a row or column of
/// weights sums to 0, DomainError for ragged or mismatched matrices.
PropertyReport check_bisymmetry(const Estimator& est, const Matrix& x, const Matrix& lambda);

/// min(ϑ^{(α,β)}(x,y), ϑ^{(γ,δ)}(u,v)) ≤ max(ϑ^{(α,γ)}(x,u), ϑ^{(β,δ)}(y,v)).
/// Throws PositivityViolation unless α+β, γ+δ, α+γ, β+δ are all positive.
PropertyReport check_bisymmetry_2x2(const Estimator& est, double x, double y, double u, double v,
                                    double alpha, double beta, double gamma, double delta);

// ---------------------------------------------------------------------------
// Asymptotic and regularity properties

struct ReplicationLimitResult {
  PropertyReport report;
  std::vector<std::uint64_t> schedule;
  /// e_ℓ = |ϑ(ℓ⊙y, z) − ϑ(y)| for each ℓ in the schedule.
  std::vector<double> errors;
  double limit = 0.0;
};

/// Doubling schedule 1, 2, 4, …, 2^max_exponent.
std::vector<std::uint64_t> doubling_schedule(int max_exponent);

/// Holds if e at the last schedule point is ≤ limit_tol·max(1, |ϑ(y)|) and
/// the largest of the last three errors does not exceed the largest of the
/// first three. Weighted evaluation, no materialization for ψ-estimators.
ReplicationLimitResult check_replication_limit(const Estimator& est, std::span<const double> y,
                                               std::span<const double> z,
                                               std::span<const std::uint64_t> schedule,
                                               double limit_tol = 1e-6);

struct ContinuityOptions {
  double radius = 0.1;
  int probes = 8;
  std::uint64_t seed = 42;
  /// Deviation target at the final radius, relative to max(1, |ϑ^{λ0}|).
  double eps_cont = 1e-4;
  /// Halvings of the radius after the first three radii r, r/2, r/4. Kept
  /// small enough that the last radius (about 2.4e-8 for r = 0.1) still moves
  /// the estimate by more than the solver resolves.
  int max_halvings = 20;
};

/// Perturbs λ0 along `probes` fixed random directions scaled to radii r,
/// r/2, r/4, … (coordinates clamped at 0). Holds when the maximal deviation
/// never grows by more than tol as the radius shrinks and drops below
/// eps_cont. Violated when it grows. Inconclusive when it shrinks without
/// reaching eps_cont, or when some probe has no estimate (a weight vector
/// at which ψ is not a T-function). Throws InvalidProbe if a clamped probe
/// is the zero vector.
PropertyReport check_weight_continuity(const Estimator& est, std::span<const double> xs,
                                       std::span<const double> lambda0,
                                       const ContinuityOptions& opts = {});

struct SensitivityQuery {
  double x;
  double y;
  double u;
  double v;
  std::size_t max_total = 512;
};

struct SensitivityResult {
  bool found = false;
  std::size_t k = 0;
  std::size_t m = 0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// First (k, m) in ascending k+m, then ascending m, with
/// u < M(k⊙x, m⊙y) < v. Throws DomainError unless M₁(x) < u < v < M₁(y).
/// found = false is the NotFoundUpToBound outcome.
SensitivityResult find_sensitivity_witness(const Estimator& est, const SensitivityQuery& q);

/// Wraps find_sensitivity_witness: Holds when a witness exists.
PropertyReport check_sensitivity(const Estimator& est, const SensitivityQuery& q);

// ---------------------------------------------------------------------------
// Structural invariants

/// ϑ^{s·λ}(x) = ϑ^{λ}(x) within 2·bracket_tol·scale.
PropertyReport check_null_homogeneity(const Estimator& est, const WeightedSample& sample,
                                      double s);

/// ϑ(x) = ϑ(πx) within 2·bracket_tol·scale; `perm` is a permutation of 0..n−1.
PropertyReport check_permutation_invariance(const Estimator& est, std::span<const double> xs,
                                            std::span<const std::size_t> perm);

/// Weighted integer-count estimate agrees with the estimate on the
/// materialized tuple within 2·bracket_tol·scale. ψ-estimators only.
PropertyReport check_replication_collapse(const Estimator& est, std::span<const double> xs,
                                          std::span<const std::size_t> counts);

/// ψ-sum ≥ −zero_tol at θ̂ − 10·bracket_tol·scale and ≤ zero_tol at
/// θ̂ + 10·bracket_tol·scale (probes outside Θ skipped). ψ-estimators only.
PropertyReport check_sign_change_certificate(const Estimator& est, const WeightedSample& sample);

// ---------------------------------------------------------------------------

/// Re-runs the single instance recorded in a report's witness.
/// Throws DomainError when the report has no witness or the property has no
/// single-instance form.
PropertyReport replay(const Estimator& est, const PropertyReport& report);

}  // namespace psiest

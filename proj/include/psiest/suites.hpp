#pragma once

#include <cstdint>
#include <optional>

#include "psiest/estimator.hpp"
#include "psiest/interval.hpp"
#include "psiest/verifier.hpp"

namespace psiest {

struct SuiteOptions {
  int trials = 1000;
  std::uint64_t seed = 42;
  /// Worker threads; 0 picks the hardware concurrency.
  unsigned threads = 0;
  /// Where observations are drawn; defaults to the estimator's
  /// observation_domain().sampling_box().
  std::optional<Interval> box;
  /// Bisymmetry with all weights 1 instead of random weights.
  bool unit_weights = false;
  /// Grid size for weight-line monotonicity.
  int grid = 33;
  /// Bound on k+m for sensitivity queries.
  std::size_t max_total = 512;
  /// Largest ℓ = 2^e in replication-limit schedules.
  int replication_exponent = 40;
};

struct SuiteResult {
  /// Violated carries the witness of the lowest-index violating trial, which
  /// replays on its own. tolerance is the largest one any trial used.
  PropertyReport report;
  int holds = 0;
  int violated = 0;
  int inconclusive = 0;
  /// Mean-type trials that were checked in the strict form.
  int strict = 0;
};

/// Runs `opts.trials` seeded random instances of one property. Trial i draws
/// from mix_seed(opts.seed, i), so the result does not depend on the thread
/// count.
SuiteResult run_suite(PropertyKind kind, const Estimator& est, const SuiteOptions& opts = {});

}  // namespace psiest

#include "psiest/suites.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "psiest/errors.hpp"
#include "psiest/random.hpp"

namespace psiest {

namespace {

PropertyReport skipped(PropertyKind kind, std::string cause) {
  PropertyReport r;
  r.property = kind;
  r.status = PropertyStatus::Inconclusive;
  r.cause = std::move(cause);
  return r;
}

class TrialGenerator {
 public:
  TrialGenerator(const Estimator& est, const SuiteOptions& opts, std::uint64_t seed)
      : est_(est),
        opts_(opts),
        rng_(seed),
        box_(opts.box ? *opts.box : est.observation_domain().sampling_box()) {}

  double x() { return rng_.uniform(box_.lo(), box_.hi()); }

  std::vector<double> xs(std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = x();
    return out;
  }

  std::size_t size(int lo, int hi) { return static_cast<std::size_t>(rng_.integer(lo, hi)); }

  // Weight in (0, hi]; whole numbers for estimators that only take integer weights.
  double weight(double hi) {
    if (!est_.accepts_real_weights()) return rng_.integer(1, static_cast<int>(hi));
    return rng_.uniform_open_left(0.0, hi);
  }

  std::vector<double> weights(std::size_t n, double hi) {
    std::vector<double> out(n);
    for (auto& v : out) v = weight(hi);
    return out;
  }

  Rng& rng() { return rng_; }

  PropertyReport run(PropertyKind kind);

 private:
  PropertyReport mean_type();
  PropertyReport weight_line();
  PropertyReport bisymmetry();
  PropertyReport bisymmetry_2x2();
  PropertyReport replication_limit();
  PropertyReport weight_continuity();
  PropertyReport sensitivity();
  PropertyReport null_homogeneity();
  PropertyReport permutation();
  PropertyReport quasi_affine();
  PropertyReport replication_collapse();
  PropertyReport certificate();

  const Estimator& est_;
  const SuiteOptions& opts_;
  Rng rng_;
  Interval box_;
};

PropertyReport TrialGenerator::run(PropertyKind kind) {
  switch (kind) {
    case PropertyKind::MeanType:
    case PropertyKind::MeanTypeStrict: return mean_type();
    case PropertyKind::WeightLineMonotone: return weight_line();
    case PropertyKind::Bisymmetry: return bisymmetry();
    case PropertyKind::Bisymmetry2x2: return bisymmetry_2x2();
    case PropertyKind::ReplicationLimit: return replication_limit();
    case PropertyKind::WeightContinuity: return weight_continuity();
    case PropertyKind::Sensitivity: return sensitivity();
    case PropertyKind::NullHomogeneity: return null_homogeneity();
    case PropertyKind::PermutationInvariance: return permutation();
    case PropertyKind::QuasiAffineMonotone: return quasi_affine();
    case PropertyKind::ReplicationCollapse: return replication_collapse();
    case PropertyKind::SignChangeCertificate: return certificate();
  }
  return skipped(kind, "unknown property");
}

PropertyReport TrialGenerator::mean_type() {
  std::vector<std::vector<double>> blocks(size(1, 4));
  for (auto& b : blocks) b = xs(size(1, 5));
  return check_mean_type(est_, blocks);
}

PropertyReport TrialGenerator::weight_line() {
  const std::size_t n = size(1, 5);
  const auto x = xs(n);
  std::vector<double> a(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng_.uniform(-1.0, 1.0);
    b[i] = rng_.uniform_open_left(0.0, 1.0);
  }
  return check_weight_line_monotone(est_, x, a, b, opts_.grid);
}

PropertyReport TrialGenerator::bisymmetry() {
  const std::size_t n = size(1, 4);
  const std::size_t m = size(1, 4);
  Matrix x(n);
  Matrix w(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = xs(m);
    w[i] = opts_.unit_weights ? std::vector<double>(m, 1.0) : weights(m, 5.0);
  }
  return check_bisymmetry(est_, x, w);
}

PropertyReport TrialGenerator::bisymmetry_2x2() {
  const auto v = xs(4);
  const auto w = weights(4, 5.0);
  return check_bisymmetry_2x2(est_, v[0], v[1], v[2], v[3], w[0], w[1], w[2], w[3]);
}

PropertyReport TrialGenerator::replication_limit() {
  const auto y = xs(size(1, 3));
  const auto z = xs(size(1, 3));
  const auto schedule = doubling_schedule(opts_.replication_exponent);
  return check_replication_limit(est_, y, z, schedule).report;
}

PropertyReport TrialGenerator::weight_continuity() {
  const std::size_t n = size(1, 5);
  const auto x = xs(n);
  std::vector<double> lambda0(n);
  for (auto& l : lambda0) l = rng_.uniform(0.5, 2.0);
  ContinuityOptions c;
  c.seed = opts_.seed;  // probe directions are shared by all trials so a witness replays from the report seed
  return check_weight_continuity(est_, x, lambda0, c);
}

PropertyReport TrialGenerator::sensitivity() {
  double x = this->x();
  double y = this->x();
  double mx = est_.single(x);
  double my = est_.single(y);
  if (mx > my) {
    std::swap(x, y);
    std::swap(mx, my);
  }
  if (!(mx < my)) return skipped(PropertyKind::Sensitivity, "drew x, y with M1(x) = M1(y)");
  double u = 0.0;
  double v = 0.0;
  if (est_.accepts_real_weights()) {
    // Prefer a window around a point of the weighted two-point curve, so the query is
    // answerable with small counts whenever that curve is continuous.
    const double p = rng_.uniform(0.1, 0.9);
    const std::array<double, 2> pts{x, y};
    const std::array<double, 2> lo_w{1.0 - (p - 0.05), p - 0.05};
    const std::array<double, 2> hi_w{1.0 - (p + 0.05), p + 0.05};
    u = est_.weighted(pts, lo_w);
    v = est_.weighted(pts, hi_w);
    if (u > v) std::swap(u, v);
  }
  if (!(mx < u && u < v && v < my)) {
    const double p = rng_.uniform(0.1, 0.8);
    u = mx + (my - mx) * p;
    v = mx + (my - mx) * (p + 0.1);
  }
  if (!(mx < u && u < v && v < my)) return skipped(PropertyKind::Sensitivity, "could not place u < v strictly inside (M1(x), M1(y))");
  return check_sensitivity(est_, {x, y, u, v, opts_.max_total});
}

PropertyReport TrialGenerator::null_homogeneity() {
  const std::size_t n = size(1, 6);
  const auto x = xs(n);
  const auto w = weights(n, 10.0);
  const double s = est_.accepts_real_weights() ? rng_.uniform_open_left(0.0, 10.0) : rng_.integer(1, 10);
  return check_null_homogeneity(est_, WeightedSample(x, w), s);
}

PropertyReport TrialGenerator::permutation() {
  const std::size_t n = size(1, 6);
  const auto x = xs(n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng_.integer(std::uint64_t{0}, std::uint64_t{i - 1})]);
  }
  return check_permutation_invariance(est_, x, perm);
}

PropertyReport TrialGenerator::quasi_affine() {
  constexpr std::size_t kGrid = 64;
  std::vector<double> v(kGrid);
  const int shape = rng_.integer(0, 3);
  const std::size_t peak = size(0, kGrid - 1);
  double level = rng_.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < kGrid; ++i) {
    // Flat steps now and then, so non-strict monotone shapes are covered too.
    const double step = rng_.unit() < 0.2 ? 0.0 : rng_.uniform(0.0, 1.0);
    switch (shape) {
      case 0: level += step; break;
      case 1: level -= step; break;
      case 2: level += i <= peak ? step : -step; break;
      default: level += rng_.uniform(-1.0, 1.0); break;
    }
    v[i] = level;
  }
  return check_quasi_affine_monotone(v, 10.0 * est_.config().bracket_tol);
}

PropertyReport TrialGenerator::replication_collapse() {
  const std::size_t n = size(1, 4);
  const auto x = xs(n);
  std::vector<std::size_t> counts(n);
  for (auto& c : counts) c = size(0, 16);
  if (std::accumulate(counts.begin(), counts.end(), std::size_t{0}) == 0) counts[0] = 1;
  return check_replication_collapse(est_, x, counts);
}

PropertyReport TrialGenerator::certificate() {
  const std::size_t n = size(1, 6);
  const auto x = xs(n);
  const auto w = weights(n, 10.0);
  return check_sign_change_certificate(est_, WeightedSample(x, w));
}

// Reason a property cannot be checked for this estimator at all, if any.
std::optional<std::string> unsupported(PropertyKind kind, const Estimator& est) {
  const bool psi = est.kind() == EstimatorKind::Psi;
  switch (kind) {
    case PropertyKind::ReplicationCollapse:
    case PropertyKind::SignChangeCertificate:
      if (!psi) return "defined for ψ-estimators only";
      break;
    case PropertyKind::WeightLineMonotone:
    case PropertyKind::WeightContinuity:
      if (!est.accepts_real_weights()) return "needs real weights; reference estimators take integer weights only";
      if (kind == PropertyKind::WeightContinuity && psi && !est.psi().continuous_in_t()) {
        return "ψ is not continuous in t, so the weighted estimator need not exist near every weight";
      }
      break;
    case PropertyKind::ReplicationLimit:
      if (!est.accepts_real_weights()) return "replication limit needs counts far beyond what materialized tuples allow";
      break;
    default:
      break;
  }
  return std::nullopt;
}

}  // namespace

SuiteResult run_suite(PropertyKind kind, const Estimator& est, const SuiteOptions& opts) {
  if (opts.trials < 1) throw DomainError("suite needs at least one trial");
  SuiteResult out;
  out.report.property = kind;
  out.report.seed = opts.seed;
  out.report.trials = opts.trials;
  if (auto why = unsupported(kind, est)) {
    out.report.status = PropertyStatus::Inconclusive;
    out.report.cause = *why;
    out.inconclusive = opts.trials;
    return out;
  }

  const auto n = static_cast<std::size_t>(opts.trials);
  std::vector<PropertyReport> reports(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      TrialGenerator gen(est, opts, mix_seed(opts.seed, i));
      try {
        reports[i] = gen.run(kind);
      } catch (const Error& e) {
        reports[i] = skipped(kind, e.what());
      }
    }
  };
  unsigned threads = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = reports[i];
    out.report.tolerance = std::max(out.report.tolerance, r.tolerance);
    if (r.property == PropertyKind::MeanTypeStrict) ++out.strict;
    switch (r.status) {
      case PropertyStatus::Holds: ++out.holds; break;
      case PropertyStatus::Violated:
        if (out.violated++ == 0) {
          out.report.property = r.property;
          out.report.witness = r.witness;
          out.report.cause = "trial " + std::to_string(i);
        }
        break;
      case PropertyStatus::Inconclusive:
        if (out.inconclusive++ == 0 && out.violated == 0) {
          out.report.cause = "trial " + std::to_string(i) + ": " + r.cause;
        }
        break;
    }
  }
  if (out.violated > 0) {
    out.report.status = PropertyStatus::Violated;
  } else if (out.inconclusive > 0) {
    out.report.status = PropertyStatus::Inconclusive;
  }
  return out;
}

}  // namespace psiest

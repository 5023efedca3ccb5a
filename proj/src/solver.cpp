#include "psiest/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "psiest/errors.hpp"

namespace psiest {

void SolverConfig::validate() const {
  if (!(bracket_tol > 0) || !std::isfinite(bracket_tol)) {
    throw DomainError("bracket_tol must be positive");
  }
  if (!(zero_tol > 0) || !std::isfinite(zero_tol)) throw DomainError("zero_tol must be positive");
  if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
  if (max_expansions < 1) throw DomainError("max_expansions must be at least 1");
}

std::string_view to_string(SolveStatus s) noexcept {
  return s == SolveStatus::ZeroPoint ? "ZeroPoint" : "SignChange";
}

double tolerance_scale(double a, double b) noexcept {
  return std::max({1.0, std::fabs(a), std::fabs(b)});
}

namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double unchecked_sum(const PsiFunction& psi, const WeightedSample& sample, double t) {
  CompensatedSum acc;
  for (const auto& p : sample.points()) {
    if (p.weight == 0.0) continue;
    acc.add(p.weight * psi(p.x, t));
  }
  return acc.value();
}

void check_observations(const PsiFunction& psi, const WeightedSample& sample) {
  std::string bad;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!psi.observation_domain().contains(sample[i].x)) {
      if (!bad.empty()) bad += ", ";
      bad += std::to_string(i) + " (x=" + format_real(sample[i].x) + ")";
    }
  }
  if (!bad.empty()) {
    throw DomainError("observations outside " + psi.observation_domain().to_string() + " for " +
                      psi.name() + ": " + bad);
  }
}

// Outcome of inspecting a point where f evaluated to exactly zero.
enum class ZeroVerdict { Accept, Continue };

class SignChangeSearch {
 public:
  SignChangeSearch(const std::function<double(double)>& f, const ParameterDomain& domain,
                   const SolverConfig& cfg)
      : f_(f), domain_(domain), cfg_(cfg) {}

  EstimateResult run() {
    const double r = cfg_.initial_guess.value_or(domain_.reference_point());
    if (!domain_.contains(r)) {
      throw DomainError("initial guess " + format_real(r) + " is not inside " +
                        domain_.to_string());
    }
    if (classify(r) == ZeroVerdict::Accept) return accepted_;
    if (expand(r)) return accepted_;
    if (!(lo_ < hi_)) {
      throw NoSignChange("f is negative at " + format_real(hi_) + " but positive at " +
                         format_real(lo_) + "; no sign change of decreasing type");
    }
    return bisect();
  }

 private:
  double eval(double t) const {
    const double v = f_(t);
    if (std::isnan(v)) throw DomainError("function value is NaN at t=" + format_real(t));
    return v;
  }

  // Records the sign of f at t in the bracket; handles exact zeros.
  ZeroVerdict classify(double t) {
    const double v = eval(t);
    return classify(t, v);
  }

  ZeroVerdict classify(double t, double v) {
    if (v > 0) {
      if (!have_lo_ || t > lo_) lo_ = t;
      have_lo_ = true;
      return ZeroVerdict::Continue;
    }
    if (v < 0) {
      if (!have_hi_ || t < hi_) hi_ = t;
      have_hi_ = true;
      return ZeroVerdict::Continue;
    }
    return on_zero(t);
  }

  double scale_at(double t) const {
    double s = std::max(1.0, std::fabs(t));
    if (have_lo_) s = std::max(s, std::fabs(lo_));
    if (have_hi_) s = std::max(s, std::fabs(hi_));
    return s;
  }

  // Probe position at distance delta from t, kept inside the domain and
  // inside the current bracket.
  double probe_left(double t, double delta) const {
    double p = t - delta;
    if (have_lo_ && p < lo_) p = lo_;
    if (!(p > domain_.lo())) p = domain_.lo() + (t - domain_.lo()) / 2;
    return p;
  }

  double probe_right(double t, double delta) const {
    double p = t + delta;
    if (have_hi_ && p > hi_) p = hi_;
    if (!(p < domain_.hi())) p = domain_.hi() - (domain_.hi() - t) / 2;
    return p;
  }

  ZeroVerdict on_zero(double t) {
    const double scale = scale_at(t);
    const double plateau_width = 4.0 * cfg_.bracket_tol * scale;
    const double delta = std::max(cfg_.bracket_tol, std::ldexp(1.0, -26) * scale);
    const double pl = probe_left(t, delta);
    const double pr = probe_right(t, delta);
    const double fl = (pl < t) ? eval(pl) : 1.0;
    const double fr = (pr > t) ? eval(pr) : -1.0;

    if (fl > 0 && fr < 0) {
      accept(t, t, t);
      return ZeroVerdict::Accept;
    }
    if (fl < 0) {
      classify(pl, fl);
      return ZeroVerdict::Continue;
    }
    if (fr > 0) {
      classify(pr, fr);
      return ZeroVerdict::Continue;
    }
    // f vanishes at t and at a probe.
    const double other = (fl == 0) ? pl : pr;
    const double gap = std::fabs(other - t);
    if (gap <= plateau_width) {
      const double a = std::min(other, t);
      const double b = std::max(other, t);
      accept(a + (b - a) / 2, a, b);
      return ZeroVerdict::Accept;
    }
    const double mid = std::min(other, t) + gap / 2;
    if (eval(mid) == 0.0) {
      throw NonUniqueSignChange("f vanishes on [" + format_real(std::min(other, t)) + ", " +
                                format_real(std::max(other, t)) +
                                "]; the sign change point is not unique");
    }
    throw NonUniqueSignChange("f vanishes at both " + format_real(t) + " and " +
                              format_real(other) + "; not a sign change of decreasing type");
  }

  void accept(double theta, double a, double b) {
    accepted_.theta_hat = theta;
    accepted_.residual = 0.0;
    accepted_.bracket_lo = a;
    accepted_.bracket_hi = b;
    accepted_.iterations = iterations_;
    accepted_.is_zero_point = true;
    accepted_.status = SolveStatus::ZeroPoint;
  }

  // k-th outward point from r toward the upper (dir=+1) or lower end.
  double outward(double r, int k, int dir) const {
    const double end = dir > 0 ? domain_.hi() : domain_.lo();
    if (std::isinf(end)) {
      const double d0 = std::max(1.0, std::fabs(r));
      return r + dir * std::ldexp(d0, k - 1);
    }
    return end - (end - r) * std::ldexp(1.0, -k);
  }

  // Walks outward from r until both signs are seen. Returns true when an
  // exact zero was accepted along the way.
  bool expand(double r) {
    int used = 0;
    int k_up = 0;
    int k_down = 0;
    double last_up = r;
    double last_down = r;
    bool up_exhausted = false;
    bool down_exhausted = false;
    while (!(have_lo_ && have_hi_)) {
      bool progressed = false;
      if (!have_hi_ && !up_exhausted && used < cfg_.max_expansions) {
        const double p = outward(r, ++k_up, +1);
        if (!domain_.contains(p) || p == last_up) {
          up_exhausted = true;
        } else {
          last_up = p;
          ++used;
          progressed = true;
          if (classify(p) == ZeroVerdict::Accept) return true;
        }
      }
      if (!have_lo_ && !down_exhausted && used < cfg_.max_expansions) {
        const double p = outward(r, ++k_down, -1);
        if (!domain_.contains(p) || p == last_down) {
          down_exhausted = true;
        } else {
          last_down = p;
          ++used;
          progressed = true;
          if (classify(p) == ZeroVerdict::Accept) return true;
        }
      }
      if (!progressed && !(have_lo_ && have_hi_)) {
        throw NoSignChange(std::string("no ") + (have_lo_ ? "negative" : "positive") +
                           " value of f found on " + domain_.to_string() + " after " +
                           std::to_string(used) + " expansion steps");
      }
    }
    return false;
  }

  EstimateResult bisect() {
    while (true) {
      const double width = hi_ - lo_;
      const double mid = lo_ + width / 2;
      if (!(mid > lo_ && mid < hi_)) break;
      const bool narrow = width <= cfg_.bracket_tol * tolerance_scale(lo_, hi_);
      if (!narrow && iterations_ >= cfg_.max_iterations) {
        throw MaxIterations("bracket [" + format_real(lo_) + ", " + format_real(hi_) +
                            "] still wider than tolerance after " +
                            std::to_string(iterations_) + " iterations");
      }
      if (narrow && iterations_ >= cfg_.max_iterations) break;
      const double v = eval(mid);
      if (narrow && std::fabs(v) <= cfg_.zero_tol) break;
      ++iterations_;
      if (classify(mid, v) == ZeroVerdict::Accept) return accepted_;
    }
    EstimateResult out;
    out.bracket_lo = lo_;
    out.bracket_hi = hi_;
    out.theta_hat = std::clamp(lo_ + (hi_ - lo_) / 2, lo_, hi_);
    out.residual = eval(out.theta_hat);
    out.iterations = iterations_;
    out.is_zero_point = std::fabs(out.residual) <= cfg_.zero_tol;
    out.status = out.is_zero_point ? SolveStatus::ZeroPoint : SolveStatus::SignChange;
    return out;
  }

  const std::function<double(double)>& f_;
  const ParameterDomain& domain_;
  const SolverConfig& cfg_;
  double lo_ = 0.0;  // f(lo_) > 0
  double hi_ = 0.0;  // f(hi_) < 0
  bool have_lo_ = false;
  bool have_hi_ = false;
  int iterations_ = 0;
  EstimateResult accepted_;
};

}  // namespace

double weighted_sum(const PsiFunction& psi, const WeightedSample& sample, double t) {
  if (!psi.theta().contains(t)) {
    throw DomainError("t=" + format_real(t) + " is not inside " + psi.theta().to_string());
  }
  check_observations(psi, sample);
  return unchecked_sum(psi, sample, t);
}

EstimateResult find_sign_change(const std::function<double(double)>& f,
                                const ParameterDomain& domain, const SolverConfig& cfg) {
  cfg.validate();
  return SignChangeSearch(f, domain, cfg).run();
}

EstimateResult estimate(const PsiFunction& psi, std::span<const double> xs,
                        const SolverConfig& cfg) {
  return estimate_weighted(psi, WeightedSample::unit(xs), cfg);
}

EstimateResult estimate_weighted(const PsiFunction& psi, const WeightedSample& sample,
                                 const SolverConfig& cfg) {
  check_observations(psi, sample);
  const std::function<double(double)> f = [&](double t) { return unchecked_sum(psi, sample, t); };
  return find_sign_change(f, psi.theta(), cfg);
}

namespace {

std::vector<double> counts_as_weights(std::span<const double> xs,
                                      std::span<const std::size_t> counts) {
  if (xs.size() != counts.size()) {
    throw DomainError("observations and counts differ in length");
  }
  std::vector<double> w(counts.begin(), counts.end());
  return w;
}

}  // namespace

EstimateResult estimate_replicated(const PsiFunction& psi, std::span<const double> xs,
                                   std::span<const std::size_t> counts,
                                   const SolverConfig& cfg) {
  const auto w = counts_as_weights(xs, counts);
  return estimate_weighted(psi, WeightedSample(xs, w), cfg);
}

std::vector<double> replicate(std::span<const double> xs, std::span<const std::size_t> counts) {
  if (xs.size() != counts.size()) {
    throw DomainError("observations and counts differ in length");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < xs.size(); ++i) out.insert(out.end(), counts[i], xs[i]);
  return out;
}

EstimateResult estimate_materialized(const PsiFunction& psi, std::span<const double> xs,
                                     std::span<const std::size_t> counts,
                                     const SolverConfig& cfg) {
  const auto tuple = replicate(xs, counts);
  if (tuple.empty()) throw ZeroWeightVector("all replication counts are zero");
  return estimate(psi, tuple, cfg);
}

}  // namespace psiest

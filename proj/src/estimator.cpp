#include "psiest/estimator.hpp"

#include <cmath>
#include <memory>

#include "psiest/errors.hpp"

namespace psiest {

Estimator Estimator::from_psi(PsiFunction psi, SolverConfig cfg) {
  cfg.validate();
  Estimator e;
  e.kind_ = EstimatorKind::Psi;
  e.name_ = psi.name();
  e.observation_domain_ = psi.observation_domain();
  e.cfg_ = cfg;
  e.strict_ = psi.continuous_in_t();
  e.psi_ = std::make_shared<const PsiFunction>(std::move(psi));
  auto p = e.psi_;
  e.weighted_ = [p, cfg](const WeightedSample& s) { return estimate_weighted(*p, s, cfg).theta_hat; };
  e.plain_ = [p, cfg](std::span<const double> xs) { return estimate(*p, xs, cfg).theta_hat; };
  return e;
}

Estimator Estimator::from_composite(CompositeEstimator c, SolverConfig cfg) {
  cfg.validate();
  Estimator e;
  e.kind_ = EstimatorKind::Composite;
  e.name_ = "composite(g=" + print(c.g()) + ")";
  e.observation_domain_ = c.observation_domain();
  e.cfg_ = cfg;
  auto shared = std::make_shared<const CompositeEstimator>(std::move(c));
  e.weighted_ = [shared, cfg](const WeightedSample& s) {
    return composite_estimate_weighted(*shared, s, cfg);
  };
  e.plain_ = [shared, cfg](std::span<const double> xs) {
    return composite_estimate(*shared, xs, cfg);
  };
  return e;
}

Estimator Estimator::from_reference(ReferenceEstimator r, SolverConfig cfg) {
  Estimator e;
  e.kind_ = EstimatorKind::Reference;
  e.name_ = r.name();
  e.observation_domain_ = r.observation_domain();
  e.cfg_ = cfg;
  e.plain_ = [r](std::span<const double> xs) { return r(xs); };
  e.weighted_ = [r](const WeightedSample& s) {
    for (const auto& p : s.points()) {
      if (p.weight != std::floor(p.weight)) {
        throw DomainError(r.name() + " accepts only integer weights, got " +
                          format_real(p.weight));
      }
    }
    std::vector<double> tuple;
    if (r.kind == ReferenceKind::Kappa) {
      for (const auto& p : s.points()) tuple.insert(tuple.end(), static_cast<std::size_t>(p.weight), p.x);
    } else {
      // max and mid-range only see which values occur, not how often
      for (const auto& p : s.points()) {
        if (p.weight > 0) tuple.push_back(p.x);
      }
    }
    return r(tuple);
  };
  return e;
}

double Estimator::operator()(std::span<const double> xs) const { return plain_(xs); }

double Estimator::weighted(std::span<const double> xs, std::span<const double> weights) const {
  return weighted_(WeightedSample(xs, weights));
}

double Estimator::weighted(const WeightedSample& sample) const { return weighted_(sample); }

double Estimator::single(double x) const { return plain_(std::span<const double>(&x, 1)); }

const PsiFunction& Estimator::psi() const {
  if (!psi_) throw DomainError(name_ + " is not a psi-estimator");
  return *psi_;
}

}  // namespace psiest

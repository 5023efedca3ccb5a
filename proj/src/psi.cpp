#include "psiest/psi.hpp"

#include <cmath>
#include <utility>

#include "psiest/errors.hpp"

namespace psiest {

PsiFunction::PsiFunction(std::string name, Eval eval, Interval observation_domain,
                         ParameterDomain theta, bool continuous_in_t)
    : name_(std::move(name)),
      eval_(std::move(eval)),
      observation_domain_(observation_domain),
      theta_(theta),
      continuous_in_t_(continuous_in_t) {}

WeightedSample::WeightedSample(std::vector<WeightedPoint> points) : points_(std::move(points)) {
  if (points_.empty()) throw DomainError("weighted sample must contain at least one point");
  bool any_positive = false;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.x)) {
      throw DomainError("observation " + std::to_string(i) + " is not finite");
    }
    if (!std::isfinite(p.weight) || p.weight < 0) {
      throw DomainError("weight " + std::to_string(i) + " = " + format_real(p.weight) +
                        " is not a finite nonnegative number");
    }
    any_positive = any_positive || p.weight > 0;
  }
  if (!any_positive) throw ZeroWeightVector("all weights are zero");
}

namespace {

std::vector<WeightedPoint> zip(std::span<const double> xs, std::span<const double> weights) {
  if (xs.size() != weights.size()) {
    throw DomainError("observations and weights differ in length (" + std::to_string(xs.size()) +
                      " vs " + std::to_string(weights.size()) + ")");
  }
  std::vector<WeightedPoint> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out.push_back({xs[i], weights[i]});
  return out;
}

}  // namespace

WeightedSample::WeightedSample(std::span<const double> xs, std::span<const double> weights)
    : WeightedSample(zip(xs, weights)) {}

WeightedSample WeightedSample::unit(std::span<const double> xs) {
  std::vector<WeightedPoint> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back({x, 1.0});
  return WeightedSample(std::move(pts));
}

std::vector<double> WeightedSample::xs() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.x);
  return out;
}

std::vector<double> WeightedSample::weights() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.weight);
  return out;
}

double WeightedSample::total_weight() const {
  double s = 0.0;
  for (const auto& p : points_) s += p.weight;
  return s;
}

WeightedSample WeightedSample::scaled(double s) const {
  if (!(s > 0) || !std::isfinite(s)) throw DomainError("weight scale must be positive and finite");
  auto pts = points_;
  for (auto& p : pts) p.weight *= s;
  return WeightedSample(std::move(pts));
}

}  // namespace psiest

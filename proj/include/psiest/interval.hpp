#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace psiest {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// An open, nondegenerate, possibly unbounded interval Θ = (lo, hi).
/// Endpoints are never valid estimator values.
class ParameterDomain {
 public:
  /// Throws DomainError unless lo < hi and neither bound is NaN.
  ParameterDomain(double lo, double hi);

  static ParameterDomain real_line() { return {-kInf, kInf}; }
  static ParameterDomain positive() { return {0.0, kInf}; }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  bool contains(double t) const noexcept { return lo_ < t && t < hi_; }

  /// Starting point for bracket search: midpoint of a finite domain, 0 when
  /// it lies inside an infinite one, otherwise one unit in from the finite end.
  double reference_point() const noexcept;

  std::string to_string() const;

  friend bool operator==(const ParameterDomain&, const ParameterDomain&) = default;

 private:
  double lo_;
  double hi_;
};

/// Observation set X: an interval with per-end closedness.
class Interval {
 public:
  Interval(double lo, double hi, bool lo_closed = false, bool hi_closed = false);

  static Interval real_line() { return {-kInf, kInf}; }
  static Interval open(double lo, double hi) { return {lo, hi}; }
  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  bool lo_closed() const noexcept { return lo_closed_; }
  bool hi_closed() const noexcept { return hi_closed_; }
  bool empty() const noexcept;
  bool contains(double x) const noexcept;

  /// A finite closed box strictly inside the interval, used to draw random
  /// observations: infinite ends are cut at ±10 (or 10 units past the finite
  /// end), finite open ends are pulled in by 1% of the width.
  Interval sampling_box() const;

  std::string to_string() const;

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_;
  double hi_;
  bool lo_closed_;
  bool hi_closed_;
};

/// Shortest text that reads back to the same double: 17 significant digits,
/// "inf"/"-inf" for infinities.
std::string format_real(double v);

/// Inverse of format_real; accepts "inf", "+inf", "-inf".
/// Throws DomainError on malformed text.
double parse_real(const std::string& text);

}  // namespace psiest

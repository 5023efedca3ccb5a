#include "psiest/interval.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "psiest/errors.hpp"

namespace psiest {

std::string EvalDomainError::format_arg(double v) { return format_real(v); }

ParameterDomain::ParameterDomain(double lo, double hi) : lo_(lo), hi_(hi) {
  if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) {
    throw DomainError("parameter domain must satisfy lo < hi, got (" + format_real(lo) + ", " +
                      format_real(hi) + ")");
  }
}

double ParameterDomain::reference_point() const noexcept {
  const bool lo_finite = std::isfinite(lo_);
  const bool hi_finite = std::isfinite(hi_);
  if (lo_finite && hi_finite) {
    const double mid = lo_ + (hi_ - lo_) / 2;
    return mid;
  }
  if (contains(0.0)) return 0.0;
  if (lo_finite) return lo_ + 1.0;
  return hi_ - 1.0;
}

std::string ParameterDomain::to_string() const {
  return "(" + format_real(lo_) + ", " + format_real(hi_) + ")";
}

Interval::Interval(double lo, double hi, bool lo_closed, bool hi_closed)
    : lo_(lo), hi_(hi), lo_closed_(lo_closed && std::isfinite(lo)),
      hi_closed_(hi_closed && std::isfinite(hi)) {
  if (std::isnan(lo) || std::isnan(hi)) throw DomainError("interval bound is NaN");
}

bool Interval::empty() const noexcept {
  if (lo_ < hi_) return false;
  return !(lo_ == hi_ && lo_closed_ && hi_closed_);
}

bool Interval::contains(double x) const noexcept {
  if (std::isnan(x)) return false;
  const bool above = lo_closed_ ? x >= lo_ : x > lo_;
  const bool below = hi_closed_ ? x <= hi_ : x < hi_;
  return above && below;
}

Interval Interval::sampling_box() const {
  double a = lo_;
  double b = hi_;
  if (!std::isfinite(a) && !std::isfinite(b)) return closed(-10.0, 10.0);
  if (!std::isfinite(b)) b = a + 10.0;
  if (!std::isfinite(a)) a = b - 10.0;
  const double pad = 0.01 * (b - a);
  if (!(lo_closed_ && std::isfinite(lo_))) a += pad;
  if (!(hi_closed_ && std::isfinite(hi_))) b -= pad;
  return closed(a, b);
}

std::string Interval::to_string() const {
  return std::string(lo_closed_ ? "[" : "(") + format_real(lo_) + ", " + format_real(hi_) +
         (hi_closed_ ? "]" : ")");
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& text) {
  if (text == "inf" || text == "+inf") return kInf;
  if (text == "-inf") return -kInf;
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || first == last) {
    throw DomainError("not a real number: '" + text + "'");
  }
  return v;
}

}  // namespace psiest

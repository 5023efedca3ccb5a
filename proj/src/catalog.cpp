#include "psiest/catalog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "psiest/errors.hpp"

namespace psiest {

std::string_view to_string(FamilyKind k) noexcept {
  switch (k) {
    case FamilyKind::NormalLocation: return "NormalLocation";
    case FamilyKind::AlphaDensity: return "AlphaDensity";
    case FamilyKind::QuasiArithmetic: return "QuasiArithmetic";
    case FamilyKind::SignLocation: return "SignLocation";
    case FamilyKind::UserExpression: return "UserExpression";
  }
  return "?";
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string interval_text(double lo, double hi, bool lo_closed, bool hi_closed) {
  return std::string(lo_closed ? "[" : "(") + format_real(lo) + "," + format_real(hi) +
         (hi_closed ? "]" : ")");
}

}  // namespace

std::string FamilySpec::descriptor() const {
  switch (kind) {
    case FamilyKind::NormalLocation: return "normal(sigma=" + format_real(sigma) + ")";
    case FamilyKind::AlphaDensity: return "alpha-density";
    case FamilyKind::SignLocation: return "sign";
    case FamilyKind::QuasiArithmetic:
      return "quasi-arith(f=" + quote(source) + ", domain=" +
             interval_text(observation_domain.lo(), observation_domain.hi(),
                           observation_domain.lo_closed(), observation_domain.hi_closed()) +
             ")";
    case FamilyKind::UserExpression:
      return "expr(psi=" + quote(source) + ", theta=" +
             interval_text(theta.lo(), theta.hi(), false, false) + ", x-domain=" +
             interval_text(observation_domain.lo(), observation_domain.hi(),
                           observation_domain.lo_closed(), observation_domain.hi_closed()) +
             ")";
  }
  return "?";
}

FamilySpec normal_location(double sigma) {
  if (!(sigma > 0) || !std::isfinite(sigma)) {
    throw DomainError("normal location family needs sigma > 0, got " + format_real(sigma));
  }
  FamilySpec f;
  f.kind = FamilyKind::NormalLocation;
  f.sigma = sigma;
  return f;
}

FamilySpec alpha_density() {
  FamilySpec f;
  f.kind = FamilyKind::AlphaDensity;
  f.theta = ParameterDomain::positive();
  f.observation_domain = Interval::open(0.0, 1.0);
  return f;
}

FamilySpec sign_location() {
  FamilySpec f;
  f.kind = FamilyKind::SignLocation;
  f.continuous_in_t = false;
  return f;
}

FamilySpec quasi_arithmetic(std::string_view generator, Interval domain) {
  static const std::array<std::string, 1> kDeclared{"x"};
  FamilySpec f;
  f.kind = FamilyKind::QuasiArithmetic;
  f.source = std::string(generator);
  f.expression = parse_expression(generator, kDeclared);
  f.observation_domain = domain;
  f.theta = ParameterDomain(domain.lo(), domain.hi());

  // Probe strict monotonicity on a grid inside the domain.
  const auto bound = f.expression->bind({"x"});
  const Interval box = domain.sampling_box();
  constexpr int kProbes = 17;
  double prev = 0.0;
  int direction = 0;
  for (int i = 0; i < kProbes; ++i) {
    const double x = box.lo() + (box.hi() - box.lo()) * i / (kProbes - 1);
    double v = 0.0;
    try {
      v = bound(std::span<const double>(&x, 1));
    } catch (const Error& e) {
      throw DomainError("generator " + f.source + " cannot be evaluated on " +
                        domain.to_string() + ": " + e.what());
    }
    if (i > 0) {
      const int d = v > prev ? 1 : (v < prev ? -1 : 0);
      if (d == 0 || (direction != 0 && d != direction)) {
        throw DomainError("generator " + f.source + " is not strictly monotone on " +
                          domain.to_string());
      }
      direction = d;
    }
    prev = v;
  }
  f.generator_direction = direction;
  return f;
}

FamilySpec sqrt_mean() { return quasi_arithmetic("sqrt(x)", Interval::open(0.0, kInf)); }

FamilySpec user_expression(std::string_view psi, ParameterDomain theta, Interval x_domain,
                           std::optional<bool> continuous) {
  static const std::array<std::string, 2> kDeclared{"x", "t"};
  FamilySpec f;
  f.kind = FamilyKind::UserExpression;
  f.source = std::string(psi);
  f.expression = parse_expression(psi, kDeclared);
  f.theta = theta;
  f.observation_domain = x_domain;
  f.continuous_in_t = continuous.value_or(!f.expression->uses(Function::Sign));
  return f;
}

PsiFunction make_psi(const FamilySpec& family) {
  switch (family.kind) {
    case FamilyKind::NormalLocation: {
      const double s2 = family.sigma * family.sigma;
      return PsiFunction(
          family.descriptor(), [s2](double x, double m) { return (x - m) / s2; },
          family.observation_domain, family.theta, true);
    }
    case FamilyKind::AlphaDensity:
      return PsiFunction(
          family.descriptor(),
          [](double x, double alpha) { return 1.0 / alpha + std::log1p(-x * x); },
          family.observation_domain, family.theta, true);
    case FamilyKind::SignLocation:
      return PsiFunction(
          family.descriptor(),
          [](double x, double t) {
            const double d = x - t;
            return d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
          },
          family.observation_domain, family.theta, false);
    case FamilyKind::QuasiArithmetic: {
      const auto f = family.expression->bind({"x"});
      const double dir = family.generator_direction;
      return PsiFunction(
          family.descriptor(),
          [f, dir](double x, double t) {
            return dir * (f(std::span<const double>(&x, 1)) - f(std::span<const double>(&t, 1)));
          },
          family.observation_domain, family.theta, family.continuous_in_t);
    }
    case FamilyKind::UserExpression: {
      const auto f = family.expression->bind({"x", "t"});
      return PsiFunction(
          family.descriptor(),
          [f](double x, double t) {
            const std::array<double, 2> args{x, t};
            return f(args);
          },
          family.observation_domain, family.theta, family.continuous_in_t);
    }
  }
  throw DomainError("unknown family");
}

namespace {

// Plain Neumaier sum used by the closed forms.
double accurate_sum(std::span<const double> v) {
  double sum = 0.0;
  double comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

void require_in_domain(const FamilySpec& family, const WeightedSample& sample) {
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!family.observation_domain.contains(sample[i].x)) {
      throw DomainError("observation " + std::to_string(i) + " (x=" + format_real(sample[i].x) +
                        ") outside " + family.observation_domain.to_string());
    }
  }
}

// Solves f(t) = target on [lo, hi] for monotone f by bisection down to one ulp.
double invert_monotone(const BoundExpression& f, int direction, double target, double lo,
                       double hi) {
  for (int i = 0; i < 2000; ++i) {
    const double mid = lo + (hi - lo) / 2;
    if (!(mid > lo && mid < hi)) break;
    const double v = direction * (f(std::span<const double>(&mid, 1)) - target);
    if (v < 0) {
      lo = mid;
    } else if (v > 0) {
      hi = mid;
    } else {
      return mid;
    }
  }
  return lo + (hi - lo) / 2;
}

}  // namespace

std::optional<double> closed_form_weighted(const FamilySpec& family, const WeightedSample& sample) {
  switch (family.kind) {
    case FamilyKind::SignLocation:
    case FamilyKind::UserExpression:
      return std::nullopt;
    default:
      break;
  }
  require_in_domain(family, sample);
  std::vector<double> weights = sample.weights();
  const double total = accurate_sum(weights);
  std::vector<double> terms;
  terms.reserve(sample.size());

  switch (family.kind) {
    case FamilyKind::NormalLocation:
      for (const auto& p : sample.points()) terms.push_back(p.weight * p.x);
      return accurate_sum(terms) / total;
    case FamilyKind::AlphaDensity:
      for (const auto& p : sample.points()) terms.push_back(p.weight * std::log1p(-p.x * p.x));
      return -total / accurate_sum(terms);
    case FamilyKind::QuasiArithmetic: {
      const auto f = family.expression->bind({"x"});
      double lo = kInf;
      double hi = -kInf;
      for (const auto& p : sample.points()) {
        if (p.weight == 0.0) continue;
        terms.push_back(p.weight * f(std::span<const double>(&p.x, 1)));
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
      }
      if (lo == hi) return lo;
      const double target = accurate_sum(terms) / total;
      return invert_monotone(f, family.generator_direction, target, lo, hi);
    }
    default:
      return std::nullopt;
  }
}

double kappa(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("kappa needs at least one observation");
  std::vector<double> logs;
  logs.reserve(xs.size());
  for (double x : xs) {
    if (!(x > 0) || !std::isfinite(x)) {
      throw DomainError("kappa is defined for positive observations, got " + format_real(x));
    }
    logs.push_back(std::log(x));
  }
  const double n = static_cast<double>(xs.size());
  const double geometric = std::exp(accurate_sum(logs) / n);
  std::vector<double> xv(xs.begin(), xs.end());
  return (accurate_sum(xv) + n * geometric) / (2.0 * n);
}

double sample_max(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("max needs at least one observation");
  return *std::max_element(xs.begin(), xs.end());
}

double mid_range(std::span<const double> xs) {
  if (xs.empty()) throw DomainError("mid-range needs at least one observation");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return (*lo + *hi) / 2.0;
}

double ReferenceEstimator::operator()(std::span<const double> xs) const {
  switch (kind) {
    case ReferenceKind::Kappa: return kappa(xs);
    case ReferenceKind::Max: return sample_max(xs);
    case ReferenceKind::MidRange: return mid_range(xs);
  }
  return 0.0;
}

std::string ReferenceEstimator::name() const {
  switch (kind) {
    case ReferenceKind::Kappa: return "kappa";
    case ReferenceKind::Max: return "max";
    case ReferenceKind::MidRange: return "mid-range";
  }
  return "?";
}

Interval ReferenceEstimator::observation_domain() const {
  return kind == ReferenceKind::Kappa ? Interval::open(0.0, kInf) : Interval::real_line();
}

ParameterDomain ReferenceEstimator::theta() const {
  return kind == ReferenceKind::Kappa ? ParameterDomain::positive()
                                      : ParameterDomain::real_line();
}

namespace {

std::vector<std::string> component_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back("t" + std::to_string(i));
  return out;
}

Expression parse_g(std::size_t n, std::string_view g) {
  if (n == 0) throw ArityError("a composite estimator needs at least one component");
  const auto names = component_names(n);
  return parse_expression(g, names);
}

}  // namespace

CompositeEstimator::CompositeEstimator(std::vector<PsiFunction> components, std::string_view g,
                                       ParameterDomain theta0)
    : components_(std::move(components)),
      g_(parse_g(components_.size(), g)),
      g_bound_(g_.bind(component_names(components_.size()))),
      theta0_(theta0) {}

Interval CompositeEstimator::observation_domain() const {
  double lo = -kInf;
  double hi = kInf;
  bool lo_closed = false;
  bool hi_closed = false;
  for (const auto& c : components_) {
    const auto& d = c.observation_domain();
    if (d.lo() > lo || (d.lo() == lo && !d.lo_closed())) {
      lo = d.lo();
      lo_closed = d.lo_closed();
    }
    if (d.hi() < hi || (d.hi() == hi && !d.hi_closed())) {
      hi = d.hi();
      hi_closed = d.hi_closed();
    }
  }
  return Interval(lo, hi, lo_closed, hi_closed);
}

double CompositeEstimator::combine(std::span<const double> component_values) const {
  const double v = g_bound_(component_values);
  if (!theta0_.contains(v)) {
    throw DomainError("composite value " + format_real(v) + " is outside " + theta0_.to_string());
  }
  return v;
}

double composite_estimate(const CompositeEstimator& c, std::span<const double> xs,
                          const SolverConfig& cfg) {
  return composite_estimate_weighted(c, WeightedSample::unit(xs), cfg);
}

double composite_estimate_weighted(const CompositeEstimator& c, const WeightedSample& sample,
                                   const SolverConfig& cfg) {
  std::vector<double> values;
  values.reserve(c.components().size());
  for (const auto& psi : c.components()) {
    values.push_back(estimate_weighted(psi, sample, cfg).theta_hat);
  }
  return c.combine(values);
}

}  // namespace psiest

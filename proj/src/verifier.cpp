#include "psiest/verifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <typeinfo>
#include <variant>

#include "psiest/errors.hpp"
#include "psiest/random.hpp"

namespace psiest {

namespace {

struct PropertyName {
  PropertyKind kind;
  std::string_view name;
  std::string_view cli;
};

constexpr std::array<PropertyName, 13> kPropertyNames{{
    {PropertyKind::MeanType, "MeanType", "mean-type"},
    {PropertyKind::MeanTypeStrict, "MeanTypeStrict", "mean-type-strict"},
    {PropertyKind::WeightLineMonotone, "WeightLineMonotone", "weight-line-monotone"},
    {PropertyKind::Bisymmetry, "Bisymmetry", "bisymmetry"},
    {PropertyKind::Bisymmetry2x2, "Bisymmetry2x2", "bisymmetry-2x2"},
    {PropertyKind::ReplicationLimit, "ReplicationLimit", "replication-limit"},
    {PropertyKind::WeightContinuity, "WeightContinuity", "weight-continuity"},
    {PropertyKind::Sensitivity, "Sensitivity", "sensitivity"},
    {PropertyKind::NullHomogeneity, "NullHomogeneity", "null-homogeneity"},
    {PropertyKind::PermutationInvariance, "PermutationInvariance", "permutation-invariance"},
    {PropertyKind::QuasiAffineMonotone, "QuasiAffineMonotone", "quasi-affine-monotone"},
    {PropertyKind::ReplicationCollapse, "ReplicationCollapse", "replication-collapse"},
    {PropertyKind::SignChangeCertificate, "SignChangeCertificate", "sign-change-certificate"},
}};

}  // namespace

std::string_view to_string(PropertyKind k) noexcept {
  for (const auto& p : kPropertyNames) {
    if (p.kind == k) return p.name;
  }
  return "?";
}

std::string_view to_string(PropertyStatus s) noexcept {
  switch (s) {
    case PropertyStatus::Holds: return "Holds";
    case PropertyStatus::Violated: return "Violated";
    case PropertyStatus::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::optional<PropertyKind> property_from_string(std::string_view name) {
  for (const auto& p : kPropertyNames) {
    if (p.name == name || p.cli == name) return p.kind;
  }
  return std::nullopt;
}

const WitnessInput* Witness::input(std::string_view name) const {
  for (const auto& in : inputs) {
    if (in.name == name) return &in;
  }
  return nullptr;
}

namespace {

const WitnessInput& need_input(const Witness& w, std::string_view name) {
  const auto* in = w.input(name);
  if (in == nullptr) throw DomainError("witness has no input '" + std::string(name) + "'");
  return *in;
}

}  // namespace

double Witness::scalar(std::string_view name) const {
  const auto& in = need_input(*this, name);
  if (in.values.size() != 1) throw DomainError("witness input '" + in.name + "' is not a scalar");
  return in.values[0];
}

std::vector<double> Witness::vector(std::string_view name) const {
  return need_input(*this, name).values;
}

std::vector<std::vector<double>> Witness::matrix(std::string_view name) const {
  const auto& in = need_input(*this, name);
  if (in.shape.size() != 2 || in.shape[0] * in.shape[1] != in.values.size()) {
    throw DomainError("witness input '" + in.name + "' is not a matrix");
  }
  Matrix out(in.shape[0]);
  for (std::size_t r = 0; r < in.shape[0]; ++r) {
    out[r].assign(in.values.begin() + static_cast<std::ptrdiff_t>(r * in.shape[1]),
                  in.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * in.shape[1]));
  }
  return out;
}

double Witness::value(std::string_view name) const {
  for (const auto& v : values) {
    if (v.name == name) return v.value;
  }
  throw DomainError("witness has no value '" + std::string(name) + "'");
}

double inequality_tolerance(const SolverConfig& cfg, std::span<const double> values) {
  double scale = 1.0;
  for (double v : values) {
    if (std::isfinite(v)) scale = std::max(scale, std::fabs(v));
  }
  return 10.0 * cfg.bracket_tol * scale;
}

namespace {

WitnessInput scalar_input(std::string name, double v) { return {std::move(name), {v}, {}}; }

WitnessInput vector_input(std::string name, std::span<const double> v) {
  return {std::move(name), std::vector<double>(v.begin(), v.end()), {v.size()}};
}

WitnessInput matrix_input(std::string name, const Matrix& m) {
  WitnessInput in{std::move(name), {}, {m.size(), m.empty() ? 0 : m[0].size()}};
  for (const auto& row : m) in.values.insert(in.values.end(), row.begin(), row.end());
  return in;
}

PropertyReport make_report(PropertyKind kind, double tol) {
  PropertyReport r;
  r.property = kind;
  r.tolerance = tol;
  return r;
}

PropertyReport inconclusive(PropertyKind kind, const std::string& cause) {
  PropertyReport r;
  r.property = kind;
  r.status = PropertyStatus::Inconclusive;
  r.cause = cause;
  return r;
}

// Runs body; solver failures and ψ evaluation failures become Inconclusive.
template <typename Body>
PropertyReport guarded(PropertyKind kind, Body&& body) {
  try {
    return body();
  } catch (const SolverError& e) {
    return inconclusive(kind, std::string("estimator undefined: ") + e.what());
  } catch (const EvalDomainError& e) {
    return inconclusive(kind, std::string("psi not evaluable: ") + e.what());
  }
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

// ---------------------------------------------------------------------------

PropertyReport check_mean_type(const Estimator& est, const std::vector<std::vector<double>>& blocks) {
  if (blocks.empty()) throw DomainError("mean-type check needs at least one block");
  for (const auto& b : blocks) {
    if (b.empty()) throw DomainError("mean-type check: every block must be nonempty");
  }
  return guarded(PropertyKind::MeanType, [&] {
    std::vector<double> values;
    std::vector<double> concat;
    for (const auto& b : blocks) {
      values.push_back(est(b));
      concat.insert(concat.end(), b.begin(), b.end());
    }
    const double whole = est(concat);
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;

    std::vector<double> all = values;
    all.push_back(whole);
    const double tol = inequality_tolerance(est.config(), all);
    const bool strict = est.strict_mean_type() && (hi - lo) > tol;
    PropertyReport r = make_report(strict ? PropertyKind::MeanTypeStrict : PropertyKind::MeanType, tol);

    const double lower_gap = whole - lo;
    const double upper_gap = hi - whole;
    double margin = 0.0;
    bool violated = false;
    if (strict) {
      const double gap = std::min(lower_gap, upper_gap);
      if (gap <= tol) {
        violated = true;
        margin = tol - gap;
      }
    } else if (lower_gap < -tol || upper_gap < -tol) {
      violated = true;
      margin = std::max(-lower_gap, -upper_gap);
    }
    if (violated) {
      r.status = PropertyStatus::Violated;
      Witness w;
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        w.inputs.push_back(vector_input("block" + std::to_string(i), blocks[i]));
      }
      for (std::size_t i = 0; i < values.size(); ++i) {
        w.values.push_back({"block" + std::to_string(i), values[i]});
      }
      w.values.push_back({"min", lo});
      w.values.push_back({"max", hi});
      w.values.push_back({"concatenated", whole});
      w.margin = margin;
      r.witness = std::move(w);
    }
    return r;
  });
}

// ---------------------------------------------------------------------------

Interval weight_line_domain(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw DomainError("weight line needs direction and offset of equal nonzero length");
  }
  const Interval empty(1.0, 0.0);
  double lo = -kInf;
  double hi = kInf;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0) {
      lo = std::max(lo, -b[i] / a[i]);
    } else if (a[i] < 0) {
      hi = std::min(hi, -b[i] / a[i]);
    } else if (b[i] < 0) {
      return empty;
    }
  }
  if (lo > hi) return empty;

  // All coordinates vanish together only if every coordinate has the same
  // root -b/a (and b = 0 where a = 0); that root is then an endpoint.
  bool lo_open = false;
  bool hi_open = false;
  std::optional<double> common_root;
  bool shared = true;
  for (std::size_t i = 0; i < a.size() && shared; ++i) {
    if (a[i] == 0) {
      shared = b[i] == 0;
    } else if (!common_root) {
      common_root = -b[i] / a[i];
    } else {
      shared = -b[i] / a[i] == *common_root;
    }
  }
  if (shared && !common_root) return empty;  // a = b = 0
  if (shared) {
    if (*common_root == lo) lo_open = true;
    if (*common_root == hi) hi_open = true;
  }
  if (lo == hi && (lo_open || hi_open)) return empty;
  return Interval(lo, hi, !lo_open, !hi_open);
}

Interval weight_line_sampling_range(const Interval& j) {
  constexpr double kSpan = 100.0;
  constexpr double kShrink = 1e-6 * kSpan;
  if (j.empty()) throw DomainError("weight line domain is empty");
  double lo = std::max(j.lo(), -kSpan);
  double hi = std::min(j.hi(), kSpan);
  if (j.lo() == j.hi()) return Interval::closed(j.lo(), j.hi());
  if (!j.lo_closed() && j.lo() >= -kSpan) lo += kShrink;
  if (!std::isfinite(j.lo())) lo += kShrink;
  if (!j.hi_closed() && j.hi() <= kSpan) hi -= kShrink;
  if (!std::isfinite(j.hi())) hi -= kShrink;
  if (lo > hi) {
    const double mid = std::max(j.lo(), -kSpan) + (std::min(j.hi(), kSpan) - std::max(j.lo(), -kSpan)) / 2;
    return Interval::closed(mid, mid);
  }
  return Interval::closed(lo, hi);
}

std::optional<UpDownPattern> find_up_down_pattern(std::span<const double> v, double tol) {
  const std::size_t n = v.size();
  if (n < 3) return std::nullopt;
  // Prefix argmin/argmax over [0, j) and suffix argmin/argmax over (j, n).
  std::vector<std::size_t> pmin(n), pmax(n), smin(n), smax(n);
  pmin[1] = pmax[1] = 0;
  for (std::size_t j = 2; j < n; ++j) {
    pmin[j] = v[j - 1] < v[pmin[j - 1]] ? j - 1 : pmin[j - 1];
    pmax[j] = v[j - 1] > v[pmax[j - 1]] ? j - 1 : pmax[j - 1];
  }
  smin[n - 2] = smax[n - 2] = n - 1;
  for (std::size_t j = n - 2; j-- > 0;) {
    smin[j] = v[j + 1] < v[smin[j + 1]] ? j + 1 : smin[j + 1];
    smax[j] = v[j + 1] > v[smax[j + 1]] ? j + 1 : smax[j + 1];
  }
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double rise = v[j] - v[pmin[j]];
    const double fall = v[j] - v[smin[j]];
    if (rise > tol && fall > tol) return UpDownPattern{pmin[j], j, smin[j], std::min(rise, fall)};
    const double drop = v[pmax[j]] - v[j];
    const double climb = v[smax[j]] - v[j];
    if (drop > tol && climb > tol) {
      return UpDownPattern{pmax[j], j, smax[j], std::min(drop, climb)};
    }
  }
  return std::nullopt;
}

bool sampled_quasi_affine(std::span<const double> v, double tol) {
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 2; k < n; ++k) {
      const double lo = std::min(v[i], v[k]);
      const double hi = std::max(v[i], v[k]);
      for (std::size_t j = i + 1; j < k; ++j) {
        // quasi-convexity and quasi-concavity at the interior sample point
        if (v[j] > hi + tol || v[j] < lo - tol) return false;
      }
    }
  }
  return true;
}

PropertyReport check_quasi_affine_monotone(std::span<const double> values, double tol) {
  PropertyReport r = make_report(PropertyKind::QuasiAffineMonotone, tol);
  const bool monotone = !find_up_down_pattern(values, tol).has_value();
  const bool quasi_affine = sampled_quasi_affine(values, tol);
  if (monotone != quasi_affine) {
    r.status = PropertyStatus::Violated;
    Witness w;
    w.inputs.push_back(vector_input("values", values));
    w.values.push_back({"monotone", monotone ? 1.0 : 0.0});
    w.values.push_back({"quasi_affine", quasi_affine ? 1.0 : 0.0});
    w.margin = 1.0;
    r.witness = std::move(w);
  }
  return r;
}

PropertyReport check_weight_line_monotone(const Estimator& est, std::span<const double> xs,
                                          std::span<const double> a, std::span<const double> b,
                                          int grid_size) {
  if (grid_size < 3) throw DomainError("weight-line grid needs at least 3 points");
  if (a.size() != xs.size()) throw DomainError("weight line and observations differ in length");
  const Interval j = weight_line_domain(a, b);
  if (j.empty()) throw DomainError("weight line does not meet the weight set");
  const Interval range = weight_line_sampling_range(j);
  return guarded(PropertyKind::WeightLineMonotone, [&] {
    const int points = range.lo() == range.hi() ? 1 : grid_size;
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> w(a.size());
    for (int g = 0; g < points; ++g) {
      const double s = points == 1 ? range.lo()
                       : g == points - 1
                           ? range.hi()
                           : range.lo() + (range.hi() - range.lo()) * g / (points - 1);
      for (std::size_t i = 0; i < a.size(); ++i) w[i] = std::max(0.0, s * a[i] + b[i]);
      grid.push_back(s);
      values.push_back(est.weighted(xs, w));
    }
    const double tol = inequality_tolerance(est.config(), values);
    PropertyReport r = make_report(PropertyKind::WeightLineMonotone, tol);
    r.trials = points;
    if (const auto p = find_up_down_pattern(values, tol)) {
      r.status = PropertyStatus::Violated;
      Witness wit;
      wit.inputs.push_back(vector_input("x", xs));
      wit.inputs.push_back(vector_input("a", a));
      wit.inputs.push_back(vector_input("b", b));
      wit.inputs.push_back(scalar_input("grid", grid_size));
      wit.values = {{"s_i", grid[p->i]}, {"s_j", grid[p->j]}, {"s_k", grid[p->k]},
                    {"v_i", values[p->i]}, {"v_j", values[p->j]}, {"v_k", values[p->k]}};
      wit.margin = p->margin;
      r.witness = std::move(wit);
    }
    return r;
  });
}

// ---------------------------------------------------------------------------

namespace {

void require_rectangular(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.size() != rows) throw DomainError(std::string(what) + " has the wrong number of rows");
  for (const auto& row : m) {
    if (row.size() != cols) throw DomainError(std::string(what) + " is not rectangular");
  }
}

}  // namespace

PropertyReport check_bisymmetry(const Estimator& est, const Matrix& x, const Matrix& lambda) {
  if (x.empty() || x[0].empty()) throw DomainError("bisymmetry grid must be nonempty");
  const std::size_t n = x.size();
  const std::size_t m = x[0].size();
  require_rectangular(x, n, m, "observation grid");
  require_rectangular(lambda, n, m, "weight grid");
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (lambda[i][j] < 0) throw DomainError("weights must be nonnegative");
      s += lambda[i][j];
    }
    if (!(s > 0)) throw PositivityViolation("row " + std::to_string(i) + " of the weights sums to 0");
  }
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += lambda[i][j];
    if (!(s > 0)) {
      throw PositivityViolation("column " + std::to_string(j) + " of the weights sums to 0");
    }
  }
  return guarded(PropertyKind::Bisymmetry, [&] {
    std::vector<double> row_values;
    std::vector<double> col_values;
    for (std::size_t i = 0; i < n; ++i) row_values.push_back(est.weighted(x[i], lambda[i]));
    std::vector<double> cx(n);
    std::vector<double> cl(n);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        cx[i] = x[i][j];
        cl[i] = lambda[i][j];
      }
      col_values.push_back(est.weighted(cx, cl));
    }
    const double min_row = *std::min_element(row_values.begin(), row_values.end());
    const double max_col = *std::max_element(col_values.begin(), col_values.end());
    const std::array<double, 2> pair{min_row, max_col};
    const double tol = inequality_tolerance(est.config(), pair);
    PropertyReport r = make_report(PropertyKind::Bisymmetry, tol);
    if (min_row > max_col + tol) {
      r.status = PropertyStatus::Violated;
      Witness w;
      w.inputs.push_back(matrix_input("x", x));
      w.inputs.push_back(matrix_input("lambda", lambda));
      for (std::size_t i = 0; i < n; ++i) w.values.push_back({"row" + std::to_string(i), row_values[i]});
      for (std::size_t j = 0; j < m; ++j) w.values.push_back({"col" + std::to_string(j), col_values[j]});
      w.values.push_back({"min_row", min_row});
      w.values.push_back({"max_col", max_col});
      w.margin = min_row - max_col;
      r.witness = std::move(w);
    }
    return r;
  });
}

PropertyReport check_bisymmetry_2x2(const Estimator& est, double x, double y, double u, double v,
                                    double alpha, double beta, double gamma, double delta) {
  for (double w : {alpha, beta, gamma, delta}) {
    if (!(w >= 0) || !std::isfinite(w)) throw DomainError("weights must be finite and nonnegative");
  }
  if (!(alpha + beta > 0) || !(gamma + delta > 0) || !(alpha + gamma > 0) || !(beta + delta > 0)) {
    throw PositivityViolation("need alpha+beta, gamma+delta, alpha+gamma, beta+delta > 0");
  }
  return guarded(PropertyKind::Bisymmetry2x2, [&] {
    auto two = [&](double p, double q, double wp, double wq) {
      const std::array<double, 2> xs{p, q};
      const std::array<double, 2> ws{wp, wq};
      return est.weighted(xs, ws);
    };
    const double row1 = two(x, y, alpha, beta);
    const double row2 = two(u, v, gamma, delta);
    const double col1 = two(x, u, alpha, gamma);
    const double col2 = two(y, v, beta, delta);
    const double lhs = std::min(row1, row2);
    const double rhs = std::max(col1, col2);
    const std::array<double, 2> pair{lhs, rhs};
    const double tol = inequality_tolerance(est.config(), pair);
    PropertyReport r = make_report(PropertyKind::Bisymmetry2x2, tol);
    if (lhs > rhs + tol) {
      r.status = PropertyStatus::Violated;
      Witness w;
      for (auto [name, val] : {std::pair{"x", x}, {"y", y}, {"u", u}, {"v", v}, {"alpha", alpha},
                               {"beta", beta}, {"gamma", gamma}, {"delta", delta}}) {
        w.inputs.push_back(scalar_input(name, val));
      }
      w.values = {{"row_xy", row1}, {"row_uv", row2}, {"col_xu", col1}, {"col_yv", col2}};
      w.margin = lhs - rhs;
      r.witness = std::move(w);
    }
    return r;
  });
}

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> doubling_schedule(int max_exponent) {
  std::vector<std::uint64_t> out;
  for (int e = 0; e <= max_exponent; ++e) out.push_back(std::uint64_t{1} << e);
  return out;
}

ReplicationLimitResult check_replication_limit(const Estimator& est, std::span<const double> y,
                                               std::span<const double> z,
                                               std::span<const std::uint64_t> schedule,
                                               double limit_tol) {
  if (y.empty()) throw DomainError("replication limit needs a nonempty repeated block");
  if (schedule.empty()) throw DomainError("replication schedule is empty");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) throw DomainError("replication schedule must increase");
  }
  ReplicationLimitResult out;
  out.schedule.assign(schedule.begin(), schedule.end());
  out.report = guarded(PropertyKind::ReplicationLimit, [&] {
    const double base = est.weighted(y, ones(y.size()));
    out.limit = limit_tol * std::max(1.0, std::fabs(base));
    std::vector<double> xs(y.begin(), y.end());
    xs.insert(xs.end(), z.begin(), z.end());
    std::vector<double> w(xs.size(), 1.0);
    for (std::uint64_t ell : schedule) {
      std::fill(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(y.size()),
                static_cast<double>(ell));
      out.errors.push_back(std::fabs(est.weighted(xs, w) - base));
    }
    PropertyReport r = make_report(PropertyKind::ReplicationLimit, out.limit);
    r.trials = static_cast<int>(schedule.size());
    const std::size_t k = std::min<std::size_t>(3, out.errors.size());
    const double head = *std::max_element(out.errors.begin(), out.errors.begin() + static_cast<std::ptrdiff_t>(k));
    const double tail = *std::max_element(out.errors.end() - static_cast<std::ptrdiff_t>(k), out.errors.end());
    const double last = out.errors.back();
    if (last > out.limit || tail > head) {
      r.status = PropertyStatus::Violated;
      Witness wit;
      wit.inputs.push_back(vector_input("y", y));
      wit.inputs.push_back(vector_input("z", z));
      std::vector<double> sched(schedule.begin(), schedule.end());
      wit.inputs.push_back(vector_input("schedule", sched));
      wit.inputs.push_back(scalar_input("limit_tol", limit_tol));
      wit.values = {{"limit_estimate", base}, {"last_error", last}, {"head_max", head}, {"tail_max", tail}};
      wit.margin = last > out.limit ? last - out.limit : tail - head;
      r.witness = std::move(wit);
    }
    return r;
  });
  return out;
}

PropertyReport check_weight_continuity(const Estimator& est, std::span<const double> xs,
                                       std::span<const double> lambda0,
                                       const ContinuityOptions& opts) {
  if (xs.size() != lambda0.size()) throw DomainError("weights and observations differ in length");
  (void)WeightedSample(xs, lambda0);  // λ0 ∈ Λ_n
  if (!(opts.radius > 0) || opts.probes < 1) throw DomainError("continuity needs radius > 0 and probes >= 1");
  const std::size_t n = xs.size();

  Rng rng(opts.seed);
  std::vector<std::vector<double>> directions(static_cast<std::size_t>(opts.probes), std::vector<double>(n));
  for (auto& d : directions) {
    for (auto& c : d) c = rng.uniform(-1.0, 1.0);
  }

  PropertyReport r = guarded(PropertyKind::WeightContinuity, [&] {
    const double base = est.weighted(xs, lambda0);
    const std::array<double, 1> base_arr{base};
    const double tol = inequality_tolerance(est.config(), base_arr);
    const double eps = opts.eps_cont * std::max(1.0, std::fabs(base));
    PropertyReport rep = make_report(PropertyKind::WeightContinuity, tol);

    std::vector<double> w(n);
    double radius = opts.radius;
    double prev = kInf;
    const int steps = 3 + std::max(0, opts.max_halvings);
    for (int step = 0; step < steps; ++step, radius /= 2) {
      double dev = 0.0;
      for (const auto& d : directions) {
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
          w[i] = std::max(0.0, lambda0[i] + radius * d[i]);
          any = any || w[i] > 0;
        }
        if (!any) throw InvalidProbe("probe at radius " + format_real(radius) + " leaves the weight set");
        dev = std::max(dev, std::fabs(est.weighted(xs, w) - base));
      }
      rep.trials = step + 1;
      if (dev > prev + tol) {
        rep.status = PropertyStatus::Violated;
        Witness wit;
        wit.inputs.push_back(vector_input("x", xs));
        wit.inputs.push_back(vector_input("lambda0", lambda0));
        wit.inputs.push_back(scalar_input("radius", opts.radius));
        wit.inputs.push_back(scalar_input("probes", opts.probes));
        wit.inputs.push_back(scalar_input("eps_cont", opts.eps_cont));
        wit.values = {{"radius_at_violation", radius}, {"deviation", dev}, {"previous_deviation", prev}};
        wit.margin = dev - prev;
        rep.witness = std::move(wit);
        return rep;
      }
      if (step >= 2 && dev < eps) return rep;
      prev = dev;
    }
    rep.status = PropertyStatus::Inconclusive;
    rep.cause = "deviation shrank to " + format_real(prev) + " but not below " + format_real(eps);
    return rep;
  });
  r.seed = opts.seed;
  return r;
}

SensitivityResult find_sensitivity_witness(const Estimator& est, const SensitivityQuery& q) {
  const double mx = est.single(q.x);
  const double my = est.single(q.y);
  if (!(mx < q.u && q.u < q.v && q.v < my)) {
    throw DomainError("sensitivity query needs M1(x) < u < v < M1(y); got M1(x)=" +
                      format_real(mx) + ", u=" + format_real(q.u) + ", v=" + format_real(q.v) +
                      ", M1(y)=" + format_real(my));
  }
  SensitivityResult out;
  const std::array<double, 2> xs{q.x, q.y};
  for (std::size_t total = 2; total <= q.max_total; ++total) {
    for (std::size_t m = 1; m < total; ++m) {
      const std::size_t k = total - m;
      const std::array<double, 2> w{static_cast<double>(k), static_cast<double>(m)};
      ++out.evaluations;
      double value = 0.0;
      try {
        value = est.weighted(xs, w);
      } catch (const SolverError&) {
        continue;  // no estimate at these weights, so no witness either
      }
      if (q.u < value && value < q.v) {
        out.found = true;
        out.k = k;
        out.m = m;
        out.value = value;
        return out;
      }
    }
  }
  return out;
}

PropertyReport check_sensitivity(const Estimator& est, const SensitivityQuery& q) {
  const auto res = find_sensitivity_witness(est, q);
  PropertyReport r = make_report(PropertyKind::Sensitivity, 0.0);
  r.trials = static_cast<int>(res.evaluations);
  if (!res.found) {
    r.status = PropertyStatus::Violated;
    Witness w;
    for (auto [name, val] : {std::pair{"x", q.x}, {"y", q.y}, {"u", q.u}, {"v", q.v},
                             {"max_total", static_cast<double>(q.max_total)}}) {
      w.inputs.push_back(scalar_input(name, val));
    }
    w.values = {{"m1_x", est.single(q.x)}, {"m1_y", est.single(q.y)}};
    w.margin = q.v - q.u;
    r.witness = std::move(w);
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// Either an estimate or the name of the solver error that prevented it.
using Outcome = std::variant<double, std::string>;

template <typename F>
Outcome attempt(F&& f) {
  try {
    return f();
  } catch (const NoSignChange&) {
    return std::string("NoSignChange");
  } catch (const NonUniqueSignChange&) {
    return std::string("NonUniqueSignChange");
  } catch (const MaxIterations&) {
    return std::string("MaxIterations");
  }
}

std::string describe(const Outcome& o) {
  if (const auto* d = std::get_if<double>(&o)) return format_real(*d);
  return std::get<std::string>(o);
}

// Compares two outcomes: equal errors agree, values agree within
// 2·bracket_tol·scale. Returns the margin of disagreement (≤ 0 on agreement).
double disagreement(const Outcome& a, const Outcome& b, const SolverConfig& cfg, double& tol) {
  const auto* da = std::get_if<double>(&a);
  const auto* db = std::get_if<double>(&b);
  if (da && db) {
    tol = 2.0 * cfg.bracket_tol * tolerance_scale(*da, *db);
    return std::fabs(*da - *db) - tol;
  }
  tol = 2.0 * cfg.bracket_tol;
  if (!da && !db && std::get<std::string>(a) == std::get<std::string>(b)) return -tol;
  return kInf;
}

PropertyReport compare_outcomes(PropertyKind kind, const Outcome& a, const Outcome& b,
                                const SolverConfig& cfg, std::vector<WitnessInput> inputs,
                                const char* a_name, const char* b_name) {
  double tol = 0.0;
  const double excess = disagreement(a, b, cfg, tol);
  PropertyReport r = make_report(kind, tol);
  if (excess > 0) {
    r.status = PropertyStatus::Violated;
    Witness w;
    w.inputs = std::move(inputs);
    if (const auto* d = std::get_if<double>(&a)) w.values.push_back({a_name, *d});
    if (const auto* d = std::get_if<double>(&b)) w.values.push_back({b_name, *d});
    w.margin = std::isfinite(excess) ? excess + tol : kInf;
    r.witness = std::move(w);
    if (!std::isfinite(excess)) r.cause = std::string(a_name) + "=" + describe(a) + ", " + b_name + "=" + describe(b);
  }
  return r;
}

}  // namespace

PropertyReport check_null_homogeneity(const Estimator& est, const WeightedSample& sample, double s) {
  const auto scaled = sample.scaled(s);
  const auto a = attempt([&] { return est.weighted(sample); });
  const auto b = attempt([&] { return est.weighted(scaled); });
  const auto xs = sample.xs();
  const auto ws = sample.weights();
  return compare_outcomes(PropertyKind::NullHomogeneity, a, b, est.config(),
                          {vector_input("x", xs), vector_input("lambda", ws), scalar_input("s", s)},
                          "estimate", "scaled_estimate");
}

PropertyReport check_permutation_invariance(const Estimator& est, std::span<const double> xs,
                                            std::span<const std::size_t> perm) {
  if (perm.size() != xs.size()) throw DomainError("permutation length differs from sample size");
  std::vector<bool> seen(xs.size(), false);
  std::vector<double> permuted;
  for (std::size_t p : perm) {
    if (p >= xs.size() || seen[p]) throw DomainError("not a permutation");
    seen[p] = true;
    permuted.push_back(xs[p]);
  }
  const auto a = attempt([&] { return est(xs); });
  const auto b = attempt([&] { return est(permuted); });
  std::vector<double> perm_d(perm.begin(), perm.end());
  return compare_outcomes(PropertyKind::PermutationInvariance, a, b, est.config(),
                          {vector_input("x", xs), vector_input("perm", perm_d)}, "estimate",
                          "permuted_estimate");
}

PropertyReport check_replication_collapse(const Estimator& est, std::span<const double> xs,
                                          std::span<const std::size_t> counts) {
  const PsiFunction& psi = est.psi();
  const auto a = attempt([&] { return estimate_replicated(psi, xs, counts, est.config()).theta_hat; });
  const auto b = attempt([&] { return estimate_materialized(psi, xs, counts, est.config()).theta_hat; });
  std::vector<double> counts_d(counts.begin(), counts.end());
  return compare_outcomes(PropertyKind::ReplicationCollapse, a, b, est.config(),
                          {vector_input("x", xs), vector_input("counts", counts_d)}, "weighted",
                          "materialized");
}

PropertyReport check_sign_change_certificate(const Estimator& est, const WeightedSample& sample) {
  const PsiFunction& psi = est.psi();
  const SolverConfig& cfg = est.config();
  return guarded(PropertyKind::SignChangeCertificate, [&] {
    const auto res = estimate_weighted(psi, sample, cfg);
    const double delta = 10.0 * cfg.bracket_tol * tolerance_scale(res.bracket_lo, res.bracket_hi);
    PropertyReport r = make_report(PropertyKind::SignChangeCertificate, cfg.zero_tol);
    double margin = -kInf;
    std::vector<NamedValue> values{{"theta_hat", res.theta_hat}};
    const double left = res.theta_hat - delta;
    const double right = res.theta_hat + delta;
    if (psi.theta().contains(left) && left < res.theta_hat) {
      const double fl = weighted_sum(psi, sample, left);
      values.push_back({"f_left", fl});
      margin = std::max(margin, -fl - cfg.zero_tol);
    }
    if (psi.theta().contains(right) && right > res.theta_hat) {
      const double fr = weighted_sum(psi, sample, right);
      values.push_back({"f_right", fr});
      margin = std::max(margin, fr - cfg.zero_tol);
    }
    if (psi.continuous_in_t() && res.status != SolveStatus::ZeroPoint) {
      values.push_back({"residual", res.residual});
      margin = std::max(margin, std::fabs(res.residual) - cfg.zero_tol);
    }
    if (margin > 0) {
      r.status = PropertyStatus::Violated;
      Witness w;
      const auto xs = sample.xs();
      const auto ws = sample.weights();
      w.inputs = {vector_input("x", xs), vector_input("lambda", ws)};
      w.values = std::move(values);
      w.margin = margin;
      r.witness = std::move(w);
    }
    return r;
  });
}

// ---------------------------------------------------------------------------

PropertyReport replay(const Estimator& est, const PropertyReport& report) {
  if (!report.witness) throw DomainError("report has no witness to replay");
  const Witness& w = *report.witness;
  PropertyReport out;
  switch (report.property) {
    case PropertyKind::MeanType:
    case PropertyKind::MeanTypeStrict: {
      std::vector<std::vector<double>> blocks;
      for (std::size_t i = 0;; ++i) {
        const auto* in = w.input("block" + std::to_string(i));
        if (in == nullptr) break;
        blocks.push_back(in->values);
      }
      out = check_mean_type(est, blocks);
      break;
    }
    case PropertyKind::WeightLineMonotone:
      out = check_weight_line_monotone(est, w.vector("x"), w.vector("a"), w.vector("b"),
                                       static_cast<int>(w.scalar("grid")));
      break;
    case PropertyKind::Bisymmetry:
      out = check_bisymmetry(est, w.matrix("x"), w.matrix("lambda"));
      break;
    case PropertyKind::Bisymmetry2x2:
      out = check_bisymmetry_2x2(est, w.scalar("x"), w.scalar("y"), w.scalar("u"), w.scalar("v"),
                                 w.scalar("alpha"), w.scalar("beta"), w.scalar("gamma"),
                                 w.scalar("delta"));
      break;
    case PropertyKind::ReplicationLimit: {
      const auto sched_d = w.vector("schedule");
      std::vector<std::uint64_t> sched(sched_d.begin(), sched_d.end());
      out = check_replication_limit(est, w.vector("y"), w.vector("z"), sched, w.scalar("limit_tol")).report;
      break;
    }
    case PropertyKind::WeightContinuity: {
      ContinuityOptions opts;
      opts.radius = w.scalar("radius");
      opts.probes = static_cast<int>(w.scalar("probes"));
      opts.eps_cont = w.scalar("eps_cont");
      opts.seed = report.seed;
      out = check_weight_continuity(est, w.vector("x"), w.vector("lambda0"), opts);
      break;
    }
    case PropertyKind::Sensitivity:
      out = check_sensitivity(est, {w.scalar("x"), w.scalar("y"), w.scalar("u"), w.scalar("v"),
                                    static_cast<std::size_t>(w.scalar("max_total"))});
      break;
    case PropertyKind::NullHomogeneity:
      out = check_null_homogeneity(est, WeightedSample(w.vector("x"), w.vector("lambda")),
                                   w.scalar("s"));
      break;
    case PropertyKind::PermutationInvariance: {
      const auto p = w.vector("perm");
      std::vector<std::size_t> perm(p.begin(), p.end());
      out = check_permutation_invariance(est, w.vector("x"), perm);
      break;
    }
    case PropertyKind::QuasiAffineMonotone:
      out = check_quasi_affine_monotone(w.vector("values"), report.tolerance);
      break;
    case PropertyKind::ReplicationCollapse: {
      const auto c = w.vector("counts");
      std::vector<std::size_t> counts(c.begin(), c.end());
      out = check_replication_collapse(est, w.vector("x"), counts);
      break;
    }
    case PropertyKind::SignChangeCertificate:
      out = check_sign_change_certificate(est, WeightedSample(w.vector("x"), w.vector("lambda")));
      break;
  }
  out.seed = report.seed;
  return out;
}

}  // namespace psiest

#include "psiest/cli/demo.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "psiest/catalog.hpp"
#include "psiest/errors.hpp"
#include "psiest/estimator.hpp"
#include "psiest/verifier.hpp"

namespace psiest::cli {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Tracks whether everything printed matched what was expected.
class Tally {
 public:
  explicit Tally(std::ostream& out) : out_(out) {}

  void value(const std::string& label, double got, double want, double tol = 1e-12) {
    const bool ok = std::fabs(got - want) <= tol;
    out_ << "  " << label << " = " << num(got);
    if (!ok) out_ << "   MISMATCH (expected " << num(want) << ")";
    out_ << "\n";
    ok_ = ok_ && ok;
  }

  void verdict(const std::string& label, bool as_expected) {
    out_ << "  " << label;
    if (!as_expected) out_ << "   MISMATCH";
    out_ << "\n";
    ok_ = ok_ && as_expected;
  }

  void fail(const std::string& why) {
    out_ << "  MISMATCH: " << why << "\n";
    ok_ = false;
  }

  int exit_code() const { return ok_ ? 0 : 3; }

 private:
  std::ostream& out_;
  bool ok_ = true;
};

int kappa_mean_type(std::ostream& out) {
  Tally t(out);
  const std::array<double, 2> a{1, 81};
  const std::array<double, 2> b{25, 25};
  const std::array<double, 4> ab{1, 81, 25, 25};
  out << "kappa(x) = (sum x + n * geometric mean) / (2n)\n";
  t.value("kappa(1,81)", kappa(a), 25);
  t.value("kappa(25,25)", kappa(b), 25);
  t.value("kappa(1,81,25,25)", kappa(ab), 24);
  const auto est = Estimator::from_reference({ReferenceKind::Kappa});
  const auto r = check_mean_type(est, {{1, 81}, {25, 25}});
  const bool violated = r.status == PropertyStatus::Violated && r.witness &&
                        std::fabs(r.witness->margin - 1.0) <= 1e-12;
  t.verdict(violated ? "mean-type VIOLATED: min block value 25 > 24 for the concatenation (margin " +
                           num(r.witness->margin) + ")"
                     : "mean-type " + std::string(to_string(r.status)),
            violated);
  return t.exit_code();
}

int kappa_bisymmetry(std::ostream& out) {
  Tally t(out);
  const Matrix x{{1, 81}, {81, 1}, {25, 25}, {25, 25}};
  const Matrix w(4, std::vector<double>(2, 1.0));
  const auto est = Estimator::from_reference({ReferenceKind::Kappa});
  out << "4x2 grid, rows (1,81) (81,1) (25,25) (25,25), unit weights\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    t.value("row " + std::to_string(i + 1) + ": kappa(" + num(x[i][0]) + "," + num(x[i][1]) + ")",
            kappa(x[i]), 25);
  }
  t.value("column 1: kappa(1,81,25,25)", kappa(std::array<double, 4>{1, 81, 25, 25}), 24);
  t.value("column 2: kappa(81,1,25,25)", kappa(std::array<double, 4>{81, 1, 25, 25}), 24);
  const auto r = check_bisymmetry(est, x, w);
  bool violated = r.status == PropertyStatus::Violated && r.witness;
  if (violated) {
    violated = std::fabs(r.witness->value("min_row") - 25) <= 1e-12 &&
               std::fabs(r.witness->value("max_col") - 24) <= 1e-12;
  }
  t.verdict(violated ? "bisymmetry VIOLATED: min row 25 > max column 24"
                     : "bisymmetry " + std::string(to_string(r.status)),
            violated);
  return t.exit_code();
}

int sign_table(std::ostream& out) {
  Tally t(out);
  const auto psi = make_psi(sign_location());
  const double x = 1;
  const double y = 5;
  out << "psi(x,t) = sign(x - t), x = 1, y = 5, weights (lambda, 1 - lambda)\n";
  out << "  lambda   estimate\n";
  for (int i = 0; i <= 10; ++i) {
    const double lambda = i / 10.0;
    const std::array<double, 2> xs{x, y};
    const std::array<double, 2> ws{lambda, 1.0 - lambda};
    char label[32];
    std::snprintf(label, sizeof label, "  %-8.1f ", lambda);
    try {
      const auto r = estimate_weighted(psi, WeightedSample(xs, ws));
      if (i == 5) {
        out << label << num(r.theta_hat) << "   MISMATCH (expected NonUniqueSignChange)\n";
        t.fail("lambda = 1/2 produced an estimate");
        continue;
      }
      const double want = lambda < 0.5 ? y : x;
      const bool ok = std::fabs(r.theta_hat - want) <= 4e-12 * std::max(1.0, want);
      out << label << num(r.theta_hat) << (ok ? "" : "   MISMATCH") << "\n";
      if (!ok) t.fail("wrong estimate at lambda " + num(lambda));
    } catch (const NonUniqueSignChange&) {
      out << label << "NonUniqueSignChange (not a T-function at these weights)\n";
      if (i != 5) t.fail("NonUniqueSignChange at lambda " + num(lambda));
    }
  }
  return t.exit_code();
}

int replication(std::ostream& out) {
  Tally t(out);
  const auto est = Estimator::from_psi(make_psi(normal_location(1.0)));
  const std::array<double, 1> y{0};
  const std::array<double, 1> z{1};
  const auto schedule = doubling_schedule(10);
  const auto res = check_replication_limit(est, y, z, schedule);
  out << "normal location, y = (0), z = (1): e(l) = |estimate(l copies of y, z) - estimate(y)|\n";
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double ell = static_cast<double>(schedule[i]);
    t.value("e(" + std::to_string(schedule[i]) + ")", res.errors[i], 1.0 / (ell + 1.0));
  }
  const auto long_run = check_replication_limit(est, y, z, doubling_schedule(30));
  out << "  ...\n";
  t.value("e(2^30)", long_run.errors.back(), 1.0 / (std::ldexp(1.0, 30) + 1.0));
  t.verdict("replication limit " + std::string(to_string(long_run.report.status)) + " (e(2^30) <= " +
                num(long_run.limit) + ")",
            long_run.report.status == PropertyStatus::Holds);
  return t.exit_code();
}

int sensitivity_normal(std::ostream& out) {
  Tally t(out);
  const auto est = Estimator::from_psi(make_psi(normal_location(1.0)));
  const auto r = find_sensitivity_witness(est, {0, 1, 0.3, 0.4, 512});
  out << "normal location, x = 0, y = 1, (u, v) = (0.3, 0.4)\n";
  if (!r.found) {
    t.fail("NotFoundUpToBound");
    return t.exit_code();
  }
  t.verdict("(k, m) = (" + std::to_string(r.k) + ", " + std::to_string(r.m) + ")", r.k == 2 && r.m == 1);
  t.value("estimate(k copies of x, m copies of y)", r.value, 1.0 / 3.0);
  return t.exit_code();
}

int sensitivity_max(std::ostream& out) {
  Tally t(out);
  const auto report = [&](ReferenceKind kind, const SensitivityQuery& q) {
    const auto est = Estimator::from_reference({kind});
    const auto r = find_sensitivity_witness(est, q);
    out << est.name() << ", x = " << num(q.x) << ", y = " << num(q.y) << ", (u, v) = (" << num(q.u)
        << ", " << num(q.v) << "), k + m <= " << q.max_total << "\n";
    t.verdict(r.found ? "witness (" + std::to_string(r.k) + ", " + std::to_string(r.m) + ")"
                      : "NotFoundUpToBound",
              !r.found);
  };
  report(ReferenceKind::Max, {0, 1, 0.3, 0.4, 512});
  report(ReferenceKind::MidRange, {0, 1, 0.6, 0.7, 512});
  return t.exit_code();
}

struct Demo {
  std::string_view id;
  int (*run)(std::ostream&);
};

constexpr std::array<Demo, 6> kDemos{{
    {"kappa-mean-type", kappa_mean_type},
    {"kappa-bisymmetry", kappa_bisymmetry},
    {"sign-table", sign_table},
    {"replication", replication},
    {"sensitivity-normal", sensitivity_normal},
    {"sensitivity-max", sensitivity_max},
}};

}  // namespace

const std::vector<std::string_view>& demo_ids() {
  static const std::vector<std::string_view> ids = [] {
    std::vector<std::string_view> v;
    for (const auto& d : kDemos) v.push_back(d.id);
    return v;
  }();
  return ids;
}

int run_demo(std::string_view id, std::ostream& out) {
  for (const auto& d : kDemos) {
    if (d.id == id) {
      const int code = d.run(out);
      out << (code == 0 ? "reproduced\n" : "REGRESSION: demo output differs from the expected values\n");
      return code;
    }
  }
  throw DomainError("unknown demo '" + std::string(id) + "'");
}

}  // namespace psiest::cli

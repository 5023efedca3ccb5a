#include "psiest/cli/app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>

#include "psiest/catalog.hpp"
#include "psiest/cli/demo.hpp"
#include "psiest/cli/ingest.hpp"
#include "psiest/errors.hpp"
#include "psiest/estimator.hpp"
#include "psiest/family_spec.hpp"
#include "psiest/report_json.hpp"
#include "psiest/suites.hpp"

namespace psiest::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

struct EstimatorOptions {
  std::vector<std::string> psi;
  std::string psi_expr;
  std::string theta = "(-inf,inf)";
  std::string x_domain = "(-inf,inf)";
  std::string g_expr;
  std::string theta0 = "(-inf,inf)";
  std::optional<double> tol;
  std::optional<double> zero_tol;
  std::optional<int> max_iterations;
};

void add_estimator_options(CLI::App* cmd, EstimatorOptions& o) {
  cmd->add_option("--psi", o.psi,
                  "family or reference estimator: normal(sigma=1), alpha-density, sign, sqrt-mean, "
                  "quasi-arith(f=\"...\", domain=(a,b)), expr(...), kappa, max, mid-range; repeat for "
                  "composite components");
  cmd->add_option("--psi-expr", o.psi_expr, "psi(x,t) as an expression");
  cmd->add_option("--theta", o.theta, "parameter interval for --psi-expr")->capture_default_str();
  cmd->add_option("--x-domain", o.x_domain, "observation interval for --psi-expr")->capture_default_str();
  cmd->add_option("--g-expr", o.g_expr, "combine component estimates t1..tN into one value");
  cmd->add_option("--theta0", o.theta0, "range allowed for --g-expr values")->capture_default_str();
  cmd->add_option("--tol", o.tol, "bracket tolerance, relative to max(1,|bracket|) (default 1e-12)");
  cmd->add_option("--zero-tol", o.zero_tol, "|f| at or below this is a zero point (default 1e-9)");
  cmd->add_option("--max-iterations", o.max_iterations, "bisection budget (default 200)");
}

ParameterDomain open_domain(const std::string& text, const char* flag) {
  const Interval i = parse_interval(text);
  if (i.lo_closed() || i.hi_closed()) {
    throw DescriptorError(std::string(flag) + " must be an open interval, got " + text);
  }
  return ParameterDomain(i.lo(), i.hi());
}

SolverConfig solver_config(const EstimatorOptions& o) {
  SolverConfig cfg;
  if (o.tol) cfg.bracket_tol = *o.tol;
  if (o.zero_tol) cfg.zero_tol = *o.zero_tol;
  if (o.max_iterations) cfg.max_iterations = *o.max_iterations;
  cfg.validate();
  return cfg;
}

Estimator build_estimator(const EstimatorOptions& o) {
  const SolverConfig cfg = solver_config(o);
  std::vector<PsiFunction> components;
  std::optional<ReferenceEstimator> reference;
  for (const auto& text : o.psi) {
    if (auto ref = parse_reference(text)) {
      reference = ref;
    } else {
      components.push_back(make_psi(parse_family_spec(text)));
    }
  }
  if (!o.psi_expr.empty()) {
    components.push_back(
        make_psi(user_expression(o.psi_expr, open_domain(o.theta, "--theta"), parse_interval(o.x_domain))));
  }
  if (reference) {
    if (o.psi.size() != 1 || !o.psi_expr.empty() || !o.g_expr.empty()) {
      throw DescriptorError("a reference estimator cannot be combined with other estimators");
    }
    return Estimator::from_reference(*reference, cfg);
  }
  if (components.empty()) throw DescriptorError("give --psi or --psi-expr");
  if (!o.g_expr.empty()) {
    return Estimator::from_composite(
        CompositeEstimator(std::move(components), o.g_expr, open_domain(o.theta0, "--theta0")), cfg);
  }
  if (components.size() != 1) throw DescriptorError("several ψ given without --g-expr to combine them");
  return Estimator::from_psi(std::move(components.front()), cfg);
}

std::string num(double v, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("PSIEST_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw DomainError(std::string("PSIEST_SEED is not an unsigned integer: '") + env + "'");
  }
  return kDefaultSeed;
}

void print_report(const PropertyReport& r, std::ostream& out) {
  out << "property: " << to_string(r.property) << "\n";
  out << "status: " << to_string(r.status) << "\n";
  out << "seed: " << r.seed << "\n";
  out << "tolerance: " << format_real(r.tolerance) << "\n";
  if (!r.cause.empty()) out << "note: " << r.cause << "\n";
  if (r.witness) {
    const Witness& w = *r.witness;
    out << "witness:\n";
    for (const auto& in : w.inputs) {
      out << "  " << in.name << " =";
      if (in.shape.size() == 2) {
        for (std::size_t row = 0; row < in.shape[0]; ++row) {
          out << (row ? " |" : "");
          for (std::size_t c = 0; c < in.shape[1]; ++c) out << " " << format_real(in.values[row * in.shape[1] + c]);
        }
      } else {
        for (double v : in.values) out << " " << format_real(v);
      }
      out << "\n";
    }
    for (const auto& v : w.values) out << "  " << v.name << " -> " << format_real(v.value) << "\n";
    out << "  margin: " << format_real(w.margin) << "\n";
  }
}

int report_exit(const PropertyReport& r) {
  switch (r.status) {
    case PropertyStatus::Holds: return kOk;
    case PropertyStatus::Violated: return kViolated;
    case PropertyStatus::Inconclusive: return kSolverFailure;
  }
  return kSolverFailure;
}

int cmd_estimate(const EstimatorOptions& eo, const std::string& data, const std::string& format_name,
                 const std::string& weights, bool json, std::ostream& out) {
  const Estimator est = build_estimator(eo);
  DataFormat format = format_from_path(data);
  if (!format_name.empty()) {
    const auto f = parse_format(format_name);
    if (!f) throw DomainError("unknown --format '" + format_name + "' (csv or jsonl)");
    format = *f;
  }
  WeightSource ws;
  if (!weights.empty()) ws = parse_weight_source(weights);
  const WeightedSample sample = ingest_file(data, format, est.observation_domain(), ws);

  nlohmann::ordered_json doc;
  doc["estimator"] = est.name();
  doc["n"] = sample.size();
  if (est.kind() == EstimatorKind::Psi) {
    const auto r = estimate_weighted(est.psi(), sample, est.config());
    if (json) {
      doc["theta_hat"] = real_json(r.theta_hat);
      doc["status"] = std::string(to_string(r.status));
      doc["residual"] = real_json(r.residual);
      doc["bracket"] = {real_json(r.bracket_lo), real_json(r.bracket_hi)};
      doc["iterations"] = r.iterations;
      out << doc.dump(2) << "\n";
    } else {
      out << num(r.theta_hat) << "\n";
      out << "  estimator " << est.name() << ", n = " << sample.size() << ", " << to_string(r.status)
          << ", residual " << num(r.residual, 3) << ", bracket [" << format_real(r.bracket_lo) << ", "
          << format_real(r.bracket_hi) << "], " << r.iterations << " iterations\n";
    }
    return kOk;
  }
  const double value = est.weighted(sample);
  if (json) {
    doc["theta_hat"] = real_json(value);
    out << doc.dump(2) << "\n";
  } else {
    out << num(value) << "\n";
    out << "  estimator " << est.name() << ", n = " << sample.size() << "\n";
  }
  return kOk;
}

int cmd_check(const EstimatorOptions& eo, const std::string& property, const SuiteOptions& so,
              bool json, std::ostream& out) {
  const auto kind = property_from_string(property);
  if (!kind) throw DomainError("unknown property '" + property + "'");
  const Estimator est = build_estimator(eo);
  const auto res = run_suite(*kind, est, so);
  if (json) {
    out << to_json(res.report).dump(2) << "\n";
  } else {
    print_report(res.report, out);
    out << "trials: " << so.trials << " (holds " << res.holds << ", violated " << res.violated
        << ", inconclusive " << res.inconclusive;
    if (*kind == PropertyKind::MeanType || *kind == PropertyKind::MeanTypeStrict) {
      out << ", strict " << res.strict;
    }
    out << ")\n";
  }
  return report_exit(res.report);
}

int cmd_sensitivity(const EstimatorOptions& eo, const SensitivityQuery& q, bool json, std::ostream& out) {
  const Estimator est = build_estimator(eo);
  const auto r = find_sensitivity_witness(est, q);
  if (json) {
    nlohmann::ordered_json doc;
    doc["estimator"] = est.name();
    doc["found"] = r.found;
    if (r.found) {
      doc["k"] = r.k;
      doc["m"] = r.m;
      doc["value"] = real_json(r.value);
    }
    doc["max_total"] = q.max_total;
    doc["evaluations"] = r.evaluations;
    out << doc.dump(2) << "\n";
  } else if (r.found) {
    out << "(k, m) = (" << r.k << ", " << r.m << "), value " << num(r.value) << "\n";
  } else {
    out << "NotFoundUpToBound (k + m <= " << q.max_total << ")\n";
  }
  return r.found ? kOk : kViolated;
}

int cmd_replay(const EstimatorOptions& eo, const std::string& path, bool json, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw psiest::Error("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(std::string("report is not JSON: ") + e.what());
  }
  const Estimator est = build_estimator(eo);
  const auto r = replay(est, report_from_json(doc));
  if (json) {
    out << to_json(r).dump(2) << "\n";
  } else {
    print_report(r, out);
  }
  return report_exit(r);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted generalized psi-estimators and their properties", "psiest"};
  app.require_subcommand(1);
  bool json = false;

  EstimatorOptions eo;
  std::string data;
  std::string format;
  std::string weights;
  auto* estimate = app.add_subcommand("estimate", "estimate from a data file");
  add_estimator_options(estimate, eo);
  estimate->add_option("--data", data, "csv (columns x[,weight]) or jsonl ({\"x\":..,\"weight\":..})")->required();
  estimate->add_option("--format", format, "csv or jsonl (default: from the file extension)");
  estimate->add_option("--weights", weights, "weight column name, or an inline list such as 1,2,0.5");
  estimate->add_flag("--json", json, "machine-readable output");

  std::string property;
  SuiteOptions so;
  std::optional<std::uint64_t> seed;
  auto* check = app.add_subcommand("check", "run a seeded property suite");
  check->add_option("property", property, "mean-type, weight-line-monotone, bisymmetry, bisymmetry-2x2, "
                                          "replication-limit, weight-continuity, sensitivity, null-homogeneity, "
                                          "permutation-invariance, quasi-affine-monotone, replication-collapse, "
                                          "sign-change-certificate")
      ->required();
  add_estimator_options(check, eo);
  check->add_option("--trials", so.trials, "number of seeded trials")->capture_default_str()->check(CLI::PositiveNumber);
  check->add_option("--seed", seed, "suite seed (default 42, or PSIEST_SEED)");
  check->add_option("--threads", so.threads, "worker threads (0 = all cores)");
  check->add_option("--grid", so.grid, "weight-line grid size")->capture_default_str();
  check->add_option("--max-total", so.max_total, "bound on k+m for sensitivity")->capture_default_str();
  check->add_flag("--unit-weights", so.unit_weights, "bisymmetry with all weights 1");
  check->add_flag("--json", json, "machine-readable output");

  SensitivityQuery q{0, 0, 0, 0, 512};
  auto* sens = app.add_subcommand("sensitivity", "search replication counts (k, m) with u < M(k*x, m*y) < v");
  add_estimator_options(sens, eo);
  sens->add_option("--x", q.x)->required();
  sens->add_option("--y", q.y)->required();
  sens->add_option("--u", q.u)->required();
  sens->add_option("--v", q.v)->required();
  sens->add_option("--max-total", q.max_total, "bound on k+m")->capture_default_str();
  sens->add_flag("--json", json, "machine-readable output");

  std::string demo_id;
  auto* demo = app.add_subcommand("demo", "reproduce a worked example");
  demo->add_option("id", demo_id)->required()->check(CLI::IsMember(std::vector<std::string>(
      demo_ids().begin(), demo_ids().end())));

  std::string report_path;
  auto* replay_cmd = app.add_subcommand("replay", "re-run the witness of a saved JSON report");
  replay_cmd->add_option("report", report_path)->required();
  add_estimator_options(replay_cmd, eo);
  replay_cmd->add_flag("--json", json, "machine-readable output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (estimate->parsed()) return cmd_estimate(eo, data, format, weights, json, out);
    if (check->parsed()) {
      so.seed = seed ? *seed : default_seed();
      return cmd_check(eo, property, so, json, out);
    }
    if (sens->parsed()) return cmd_sensitivity(eo, q, json, out);
    if (demo->parsed()) return run_demo(demo_id, out);
    if (replay_cmd->parsed()) return cmd_replay(eo, report_path, json, out);
  } catch (const SolverError& e) {
    err << "psiest: solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const psiest::Error& e) {
    err << "psiest: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace psiest::cli

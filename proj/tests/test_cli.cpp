#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "psiest/cli/app.hpp"
#include "psiest/cli/ingest.hpp"
#include "psiest/errors.hpp"

using namespace psiest;

namespace {

const std::string kData = PSIEST_TEST_DATA;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

int process_exit(const std::string& args) {
  const std::string cmd = std::string(PSIEST_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("ingest csv and jsonl") {
  std::istringstream csv("x,weight\n1,3\n3,1\n");
  const auto s = cli::ingest(csv, cli::DataFormat::Csv, Interval::real_line());
  CHECK(s.size() == 2);
  CHECK(s[0].weight == 3);

  std::istringstream jsonl("{\"x\": 0.5}\n\n{\"x\": \"0.25\", \"weight\": 2}\n");
  const auto j = cli::ingest(jsonl, cli::DataFormat::Jsonl, Interval::open(0, 1));
  CHECK(j.size() == 2);
  CHECK(j[1].x == 0.25);
  CHECK(j[0].weight == 1);

  std::istringstream crlf("x\r\n2\r\n");
  CHECK(cli::ingest(crlf, cli::DataFormat::Csv, Interval::real_line())[0].x == 2);
}

TEST_CASE("ingest errors name lines and rows") {
  try {
    cli::ingest_file(kData + "/not_a_number.csv", cli::DataFormat::Csv, Interval::real_line());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    cli::ingest_file(kData + "/alpha_outside.csv", cli::DataFormat::Csv, Interval::open(0, 1));
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    const std::string what = e.what();
    CHECK(what.find("line(s) 3, 5") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::ingest_file(kData + "/header_only.csv", cli::DataFormat::Csv, Interval::real_line()), EmptyData);
  CHECK_THROWS_AS(cli::ingest_file(kData + "/ragged.csv", cli::DataFormat::Csv, Interval::real_line()), ParseError);
  CHECK_THROWS_AS(cli::ingest_file(kData + "/broken.jsonl", cli::DataFormat::Jsonl, Interval::real_line()), ParseError);
  CHECK_THROWS_AS(cli::ingest_file(kData + "/zero_weights.csv", cli::DataFormat::Csv, Interval::real_line()),
                  ZeroWeightVector);
  CHECK_THROWS_AS(cli::ingest_file(kData + "/negative_weight.csv", cli::DataFormat::Csv, Interval::real_line()),
                  DomainError);
  CHECK_THROWS_AS(cli::ingest_file(kData + "/missing.csv", cli::DataFormat::Csv, Interval::real_line()), Error);

  std::istringstream empty("");
  CHECK_THROWS_AS(cli::ingest(empty, cli::DataFormat::Jsonl, Interval::real_line()), EmptyData);
}

TEST_CASE("weight sources") {
  const auto col = cli::parse_weight_source("w");
  CHECK(*col.column == "w");
  const auto list = cli::parse_weight_source("3, 1");
  CHECK(*list.inline_values == std::vector<double>{3, 1});
  CHECK_THROWS_AS(cli::parse_weight_source("1,x"), DomainError);
}

TEST_CASE("estimate subcommand") {
  auto r = invoke({"estimate", "--psi", "normal(sigma=1)", "--data", kData + "/mean.csv"});
  CHECK(r.code == 0);
  CHECK(first_line(r.out) == "2");

  r = invoke({"estimate", "--psi", "normal", "--data", kData + "/weighted.csv"});
  CHECK(first_line(r.out) == "1.5");
  r = invoke({"estimate", "--psi", "normal", "--data", kData + "/weighted.jsonl"});
  CHECK(first_line(r.out) == "1.5");
  r = invoke({"estimate", "--psi", "normal", "--data", kData + "/mean.csv", "--weights", "3,1"});
  CHECK(first_line(r.out) == "1.5");
  r = invoke({"estimate", "--psi", "normal", "--data", kData + "/custom_weight.csv", "--weights", "w"});
  CHECK(first_line(r.out) == "1.5");
  r = invoke({"estimate", "--psi", "sqrt-mean", "--data", kData + "/mean.csv"});
  CHECK(r.code == 0);
  r = invoke({"estimate", "--psi", "kappa", "--data", kData + "/mean.csv"});
  CHECK(r.code == 0);
  r = invoke({"estimate", "--psi", "normal", "--psi", "sqrt-mean", "--g-expr", "(t1+t2)/2", "--data", kData + "/mean.csv"});
  CHECK(r.code == 0);
  r = invoke({"estimate", "--psi-expr", "x - t", "--data", kData + "/mean.csv"});
  CHECK(first_line(r.out) == "2");

  r = invoke({"estimate", "--psi", "normal", "--data", kData + "/weighted.csv", "--json"});
  CHECK(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(std::stod(doc["theta_hat"].get<std::string>()) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(doc["status"] == "ZeroPoint");
}

TEST_CASE("estimate errors map to exit codes") {
  auto r = invoke({"estimate", "--psi", "alpha-density", "--data", kData + "/alpha_outside.csv"});
  CHECK(r.code == 2);
  CHECK(r.err.find("line(s) 3, 5") != std::string::npos);
  CHECK(invoke({"estimate", "--psi", "normal", "--data", kData + "/not_a_number.csv"}).code == 2);
  CHECK(invoke({"estimate", "--psi", "normal", "--data", kData + "/header_only.csv"}).code == 2);
  CHECK(invoke({"estimate", "--psi", "normal", "--data", kData + "/nope.csv"}).code == 2);
  CHECK(invoke({"estimate", "--psi", "cauchy", "--data", kData + "/mean.csv"}).code == 2);
  CHECK(invoke({"estimate", "--psi", "normal"}).code == 2);
  CHECK(invoke({"estimate", "--psi", "normal", "--data", kData + "/mean.csv", "--tol", "-1"}).code == 2);
  r = invoke({"estimate", "--psi", "sign", "--data", kData + "/sign_even.csv"});
  CHECK(r.code == 4);
  CHECK(r.err.find("solver failure") != std::string::npos);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"frobnicate"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("check subcommand") {
  auto r = invoke({"check", "mean-type", "--psi", "normal", "--trials", "50"});
  CHECK(r.code == 0);
  CHECK(r.out.find("status: Holds") != std::string::npos);

  const auto a = invoke({"check", "bisymmetry", "--psi", "alpha-density", "--trials", "30", "--json"});
  const auto b = invoke({"check", "bisymmetry", "--psi", "alpha-density", "--trials", "30", "--json"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(nlohmann::json::parse(a.out)["seed"] == 42);

  r = invoke({"check", "weight-line-monotone", "--psi", "normal", "--g-expr", "(t1-0.5)^2", "--trials", "50"});
  CHECK(r.code == 1);
  CHECK(r.out.find("witness:") != std::string::npos);

  r = invoke({"check", "weight-continuity", "--psi", "kappa", "--trials", "5"});
  CHECK(r.code == 4);
  CHECK(invoke({"check", "nonsense", "--psi", "normal"}).code == 2);
  CHECK(invoke({"check", "mean-type", "--psi", "normal", "--trials", "0"}).code == 2);
}

TEST_CASE("seed from PSIEST_SEED unless --seed is given") {
  ::setenv("PSIEST_SEED", "1234", 1);
  auto r = invoke({"check", "mean-type", "--psi", "normal", "--trials", "5", "--json"});
  CHECK(nlohmann::json::parse(r.out)["seed"] == 1234);
  r = invoke({"check", "mean-type", "--psi", "normal", "--trials", "5", "--json", "--seed", "9"});
  CHECK(nlohmann::json::parse(r.out)["seed"] == 9);
  ::setenv("PSIEST_SEED", "junk", 1);
  CHECK(invoke({"check", "mean-type", "--psi", "normal", "--trials", "5"}).code == 2);
  ::unsetenv("PSIEST_SEED");
}

TEST_CASE("replay a saved report") {
  const auto r = invoke({"check", "weight-line-monotone", "--psi", "normal", "--g-expr", "(t1-0.5)^2", "--trials", "50", "--json"});
  REQUIRE(r.code == 1);
  const std::string path = "replay_report.json";
  std::ofstream(path) << r.out;
  const auto again = invoke({"replay", path, "--psi", "normal", "--g-expr", "(t1-0.5)^2", "--json"});
  CHECK(again.code == 1);
  const auto m1 = std::stod(nlohmann::json::parse(r.out)["witness"]["margin"].get<std::string>());
  const auto m2 = std::stod(nlohmann::json::parse(again.out)["witness"]["margin"].get<std::string>());
  CHECK(std::fabs(m1 - m2) <= 1e-12);
  std::remove(path.c_str());
}

TEST_CASE("sensitivity subcommand") {
  auto r = invoke({"sensitivity", "--psi", "normal", "--x", "0", "--y", "1", "--u", "0.3", "--v", "0.4"});
  CHECK(r.code == 0);
  CHECK(r.out.find("(k, m) = (2, 1)") != std::string::npos);
  r = invoke({"sensitivity", "--psi", "max", "--x", "0", "--y", "1", "--u", "0.3", "--v", "0.4"});
  CHECK(r.code == 1);
  CHECK(r.out.find("NotFoundUpToBound") != std::string::npos);
  r = invoke({"sensitivity", "--psi", "normal", "--x", "0", "--y", "1", "--u", "0.5", "--v", "0.4"});
  CHECK(r.code == 2);
}

TEST_CASE("demo subcommand") {
  for (const char* id : {"kappa-mean-type", "kappa-bisymmetry", "sign-table", "replication", "sensitivity-normal",
                         "sensitivity-max"}) {
    const auto r = invoke({"demo", id});
    CHECK_MESSAGE(r.code == 0, id, "\n", r.out);
  }
  const auto k = invoke({"demo", "kappa-mean-type"});
  CHECK(k.out.find("= 25\n") != std::string::npos);
  CHECK(k.out.find("= 24\n") != std::string::npos);
  CHECK(k.out.find("mean-type VIOLATED") != std::string::npos);
  CHECK(invoke({"demo", "sensitivity-max"}).out.find("NotFoundUpToBound") != std::string::npos);
  CHECK(invoke({"demo", "nope"}).code == 2);
}

TEST_CASE("installed binary exit codes") {
  CHECK(process_exit("demo kappa-mean-type") == 0);
  CHECK(process_exit("estimate --psi alpha-density --data " + kData + "/alpha_outside.csv") == 2);
  CHECK(process_exit("estimate --psi sign --data " + kData + "/sign_even.csv") == 4);
  CHECK(process_exit("sensitivity --psi mid-range --x 0 --y 1 --u 0.6 --v 0.7") == 1);
}

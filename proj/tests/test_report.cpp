#include <doctest.h>

#include <cmath>
#include <cstring>

#include "psiest/catalog.hpp"
#include "psiest/errors.hpp"
#include "psiest/report_json.hpp"

using namespace psiest;

TEST_CASE("report JSON shape") {
  PropertyReport r;
  r.property = PropertyKind::Bisymmetry;
  r.status = PropertyStatus::Holds;
  r.trials = 3;
  r.seed = 42;
  r.tolerance = 1e-11;
  const auto j = to_json(r);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"property", "status", "trials", "seed", "tolerance"});
  CHECK(j["property"] == "Bisymmetry");
  CHECK(j["tolerance"] == "9.9999999999999994e-12");
}

TEST_CASE("violated report round-trips bit for bit and replays") {
  const auto kappa_est = Estimator::from_reference({ReferenceKind::Kappa});
  const auto r = check_mean_type(kappa_est, {{1.1, 81.3}, {25.2, 25.2}});
  REQUIRE(r.status == PropertyStatus::Violated);
  const auto text = to_json(r).dump(2);
  const auto back = report_from_json(nlohmann::json::parse(text));
  CHECK(back.property == r.property);
  CHECK(back.status == r.status);
  REQUIRE(back.witness);
  CHECK(std::memcmp(&back.witness->margin, &r.witness->margin, sizeof(double)) == 0);
  CHECK(back.witness->vector("block0") == r.witness->vector("block0"));
  CHECK(to_json(back).dump(2) == text);
  const auto again = replay(kappa_est, back);
  CHECK(std::fabs(again.witness->margin - r.witness->margin) <= 1e-12);
}

TEST_CASE("matrix witnesses keep their shape") {
  const auto k = Estimator::from_reference({ReferenceKind::Kappa});
  const Matrix x{{1, 81}, {81, 1}, {25, 25}, {25, 25}};
  const Matrix w(4, std::vector<double>(2, 1.0));
  const auto r = check_bisymmetry(k, x, w);
  const auto back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(back.witness->matrix("x") == x);
}

TEST_CASE("malformed reports") {
  CHECK_THROWS_AS(report_from_json(nlohmann::json::parse("{}")), DomainError);
  CHECK_THROWS_AS(report_from_json(nlohmann::json::parse(
                      R"({"property":"Nope","status":"Holds","trials":1,"seed":1,"tolerance":"0"})")),
                  DomainError);
  CHECK_THROWS_AS(report_from_json(nlohmann::json::parse(
                      R"({"property":"MeanType","status":"Holds","trials":1,"seed":1,"tolerance":"x"})")),
                  DomainError);
}

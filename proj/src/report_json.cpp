#include "psiest/report_json.hpp"

#include "psiest/errors.hpp"

namespace psiest {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json real_json(double v) { return format_real(v); }

ordered_json to_json(const PropertyReport& report) {
  ordered_json doc;
  doc["property"] = std::string(to_string(report.property));
  doc["status"] = std::string(to_string(report.status));
  doc["trials"] = report.trials;
  doc["seed"] = report.seed;
  doc["tolerance"] = real_json(report.tolerance);
  if (report.witness) {
    const Witness& w = *report.witness;
    ordered_json inputs = ordered_json::array();
    for (const auto& in : w.inputs) {
      ordered_json item;
      item["name"] = in.name;
      item["shape"] = in.shape;
      ordered_json values = ordered_json::array();
      for (double v : in.values) values.push_back(real_json(v));
      item["values"] = std::move(values);
      inputs.push_back(std::move(item));
    }
    ordered_json values = ordered_json::array();
    for (const auto& v : w.values) {
      ordered_json item;
      item["name"] = v.name;
      item["value"] = real_json(v.value);
      values.push_back(std::move(item));
    }
    ordered_json wj;
    wj["inputs"] = std::move(inputs);
    wj["values"] = std::move(values);
    wj["margin"] = real_json(w.margin);
    doc["witness"] = std::move(wj);
  }
  if (!report.cause.empty()) doc["cause"] = report.cause;
  return doc;
}

namespace {

double read_real(const json& v) {
  if (v.is_string()) return parse_real(v.get<std::string>());
  if (v.is_number()) return v.get<double>();
  throw DomainError("expected a real as a decimal string");
}

}  // namespace

PropertyReport report_from_json(const json& doc) {
  try {
    PropertyReport r;
    const auto kind = property_from_string(doc.at("property").get<std::string>());
    if (!kind) throw DomainError("unknown property '" + doc.at("property").get<std::string>() + "'");
    r.property = *kind;
    const auto status = doc.at("status").get<std::string>();
    if (status == "Holds") {
      r.status = PropertyStatus::Holds;
    } else if (status == "Violated") {
      r.status = PropertyStatus::Violated;
    } else if (status == "Inconclusive") {
      r.status = PropertyStatus::Inconclusive;
    } else {
      throw DomainError("unknown status '" + status + "'");
    }
    r.trials = doc.at("trials").get<int>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.tolerance = read_real(doc.at("tolerance"));
    if (doc.contains("witness")) {
      const json& wj = doc.at("witness");
      Witness w;
      for (const auto& item : wj.at("inputs")) {
        WitnessInput in;
        in.name = item.at("name").get<std::string>();
        in.shape = item.at("shape").get<std::vector<std::size_t>>();
        for (const auto& v : item.at("values")) in.values.push_back(read_real(v));
        w.inputs.push_back(std::move(in));
      }
      for (const auto& item : wj.at("values")) {
        w.values.push_back({item.at("name").get<std::string>(), read_real(item.at("value"))});
      }
      w.margin = read_real(wj.at("margin"));
      r.witness = std::move(w);
    }
    if (doc.contains("cause")) r.cause = doc.at("cause").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace psiest

#include "psiest/cli/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "psiest/errors.hpp"

namespace psiest::cli {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Row {
  std::size_t line;
  double x;
  double weight;
};

std::string join_lines(const std::vector<std::size_t>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size() && i < 20; ++i) {
    if (i) out += ", ";
    out += std::to_string(lines[i]);
  }
  if (lines.size() > 20) out += ", ... (" + std::to_string(lines.size()) + " rows)";
  return out;
}

double cell_real(const std::string& text, std::size_t line, const std::string& column) {
  try {
    return parse_real(text);
  } catch (const DomainError&) {
    throw ParseError("column '" + column + "': '" + text + "' is not a number", line);
  }
}

std::vector<Row> read_csv(std::istream& in, const std::string& weight_column, bool weight_named) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) {
      header = split_commas(line);
      break;
    }
  }
  if (header.empty()) throw EmptyData("no header row");
  const auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto x_col = find("x");
  if (!x_col) throw ParseError("header has no 'x' column", line_no);
  const auto w_col = find(weight_column);
  if (weight_named && !w_col) throw ParseError("header has no '" + weight_column + "' column", line_no);

  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()),
                       line_no);
    }
    Row r{line_no, cell_real(cells[*x_col], line_no, "x"), 1.0};
    if (w_col) r.weight = cell_real(cells[*w_col], line_no, weight_column);
    rows.push_back(r);
  }
  return rows;
}

double json_real(const nlohmann::json& v, std::size_t line, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return cell_real(v.get<std::string>(), line, key);
  throw ParseError("'" + key + "' must be a number", line);
}

std::vector<Row> read_jsonl(std::istream& in, const std::string& weight_column, bool weight_named) {
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
    if (!obj.contains("x")) throw ParseError("object has no 'x'", line_no);
    Row r{line_no, json_real(obj["x"], line_no, "x"), 1.0};
    if (obj.contains(weight_column)) {
      r.weight = json_real(obj[weight_column], line_no, weight_column);
    } else if (weight_named) {
      throw ParseError("object has no '" + weight_column + "'", line_no);
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

std::optional<DataFormat> parse_format(const std::string& name) {
  if (name == "csv") return DataFormat::Csv;
  if (name == "jsonl") return DataFormat::Jsonl;
  return std::nullopt;
}

DataFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos && (path.substr(dot) == ".jsonl" || path.substr(dot) == ".ndjson")) {
    return DataFormat::Jsonl;
  }
  return DataFormat::Csv;
}

WeightSource parse_weight_source(const std::string& text) {
  WeightSource src;
  std::vector<double> values;
  for (const auto& cell : split_commas(text)) {
    try {
      values.push_back(parse_real(cell));
    } catch (const DomainError&) {
      if (text.find(',') != std::string::npos) {
        throw DomainError("--weights list has a non-numeric entry '" + cell + "'");
      }
      src.column = trim(text);
      return src;
    }
  }
  src.inline_values = std::move(values);
  return src;
}

WeightedSample ingest(std::istream& in, DataFormat format, const Interval& x_domain,
                      const WeightSource& weights) {
  const std::string column = weights.column.value_or("weight");
  const bool named = weights.column.has_value();
  auto rows = format == DataFormat::Csv ? read_csv(in, column, named) : read_jsonl(in, column, named);
  if (rows.empty()) throw EmptyData("no data rows");

  if (weights.inline_values) {
    const auto& w = *weights.inline_values;
    if (w.size() != rows.size()) {
      throw DomainError("--weights lists " + std::to_string(w.size()) + " values for " +
                        std::to_string(rows.size()) + " observations");
    }
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].weight = w[i];
  }

  std::vector<std::size_t> bad_x;
  std::vector<std::size_t> bad_w;
  for (const auto& r : rows) {
    if (!std::isfinite(r.x) || !x_domain.contains(r.x)) bad_x.push_back(r.line);
    if (!std::isfinite(r.weight) || r.weight < 0) bad_w.push_back(r.line);
  }
  std::string problems;
  if (!bad_x.empty()) {
    problems += "x outside " + x_domain.to_string() + " on line(s) " + join_lines(bad_x);
  }
  if (!bad_w.empty()) {
    if (!problems.empty()) problems += "; ";
    problems += "weight negative or not finite on line(s) " + join_lines(bad_w);
  }
  if (!problems.empty()) throw DomainError(problems);

  std::vector<WeightedPoint> points;
  points.reserve(rows.size());
  for (const auto& r : rows) points.push_back({r.x, r.weight});
  return WeightedSample(std::move(points));
}

WeightedSample ingest_file(const std::string& path, DataFormat format, const Interval& x_domain,
                           const WeightSource& weights) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return ingest(in, format, x_domain, weights);
}

}  // namespace psiest::cli

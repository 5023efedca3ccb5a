#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "psiest/interval.hpp"
#include "psiest/psi.hpp"

namespace psiest::cli {

enum class DataFormat { Csv, Jsonl };

/// "csv" or "jsonl"; nullopt otherwise.
std::optional<DataFormat> parse_format(const std::string& name);
/// From the file extension; csv when unknown.
DataFormat format_from_path(const std::string& path);

/// `--weights` is either a column/key name or an inline list "1,2,0.5".
struct WeightSource {
  std::optional<std::string> column;
  std::optional<std::vector<double>> inline_values;
};
WeightSource parse_weight_source(const std::string& text);

/// Reads observations ("x") and weights ("weight" unless weights.column names
/// another one; default 1) and validates them against Λ_n and x_domain.
///
/// Throws ParseError naming the line, DomainError listing the offending rows,
/// EmptyData when there is no data row.
WeightedSample ingest(std::istream& in, DataFormat format, const Interval& x_domain,
                      const WeightSource& weights = {});

/// Throws Error when the file cannot be opened.
WeightedSample ingest_file(const std::string& path, DataFormat format, const Interval& x_domain,
                           const WeightSource& weights = {});

}  // namespace psiest::cli

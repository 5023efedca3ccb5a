#pragma once

#include <json.hpp>

#include "psiest/verifier.hpp"

namespace psiest {

/// {property, status, trials, seed, tolerance, witness?, cause?}. Every real
/// is a decimal string with 17 significant digits, so witnesses read back
/// bit for bit.
nlohmann::ordered_json to_json(const PropertyReport& report);

/// Inverse of to_json. Throws DomainError on a malformed document.
PropertyReport report_from_json(const nlohmann::json& doc);

/// Real encoded as a 17-significant-digit string.
nlohmann::ordered_json real_json(double v);

}  // namespace psiest

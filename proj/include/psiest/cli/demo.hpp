#pragma once

#include <ostream>
#include <string_view>
#include <vector>

namespace psiest::cli {

const std::vector<std::string_view>& demo_ids();

/// Prints the demonstration and returns 0 when every expected number and
/// verdict is reproduced, 3 otherwise. Throws DomainError for an unknown id.
int run_demo(std::string_view id, std::ostream& out);

}  // namespace psiest::cli

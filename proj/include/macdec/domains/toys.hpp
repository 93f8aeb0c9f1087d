#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "macdec/domains/domain.hpp"

namespace macdec {

/// Small fixtures: "coin-coord", "chain-cooperate", "relay-discount" and
/// "fig3-shape". Throws std::invalid_argument for other names.
Domain gen_toy(std::string_view name);

std::vector<std::string> toy_names();

}  // namespace macdec

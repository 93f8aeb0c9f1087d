#pragma once

#include <optional>
#include <string>
#include <vector>

#include "macdec/model.hpp"
#include "macdec/options.hpp"

namespace macdec {

struct Domain {
  std::string name;
  ModelSpec model;
  OptionSet options;
  /// Optimal value at the model horizon when it is known independently.
  std::optional<double> known_optimum;
};

/// Joint observation distribution from independent per-agent distributions.
SparseDist product_distribution(const ModelSpec& model, const std::vector<SparseDist>& per_agent);

}  // namespace macdec

#pragma once

#include <string>
#include <string_view>

#include "macdec/model.hpp"

namespace macdec {

/// Reads the line-oriented model format:
///
///     agents: 2
///     states: s0 s1
///     start: 0.5 0.5          # or a single state name, or `uniform`
///     horizon: 3              # or `infinite`
///     discount: 1
///     actions[0]: a b
///     observations[0]: x y
///     default_T: identity     # optional, identity|uniform
///     default_O: uniform      # optional
///     T: a b : s0 : s1 0.5
///     O: a b : s1 : x y 0.8
///     R: a b : s0 -1
///
/// Rows without any entry are filled from the default directive; without one
/// they are a parse error. The result is validated; failures throw
/// ValidationError.
ModelSpec parse_model(std::string_view text);

/// Inverse of parse_model. Every row is written explicitly and numbers use
/// the shortest round-trip representation, so parse_model(emit_model(m)) == m.
std::string emit_model(const ModelSpec& model);

ModelSpec load_model(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace macdec

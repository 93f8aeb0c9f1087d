#pragma once

#include <string>
#include <string_view>

#include "macdec/model.hpp"
#include "macdec/options.hpp"

namespace macdec {

/// Reads option blocks:
///
///     option go_left agent=0 root=1 min_dur=1
///     signals: done blocked
///     pi: START : left 1
///     pi: * : left 1            # `*` fills every row not given explicitly
///     beta: * 1
///     signal: wall blocked
///     signal: * done
///     init: *                   # applicable after anything
///     init: go_right done       # or after a (predecessor, signal) pair
///
/// Names resolve against `model`. When `signals:` is absent the alphabet is
/// the labels in order of first use. The result is validated; failures throw
/// ValidationError.
OptionSet parse_options(const ModelSpec& model, std::string_view text);

/// Writes every row explicitly; parse_options(model, emit_options(model, s)) == s.
std::string emit_options(const ModelSpec& model, const OptionSet& options);

OptionSet load_options(const ModelSpec& model, const std::string& path);

}  // namespace macdec

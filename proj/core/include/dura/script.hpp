#pragma once

// Per-process operation scripts.
//
//   script := item (';' item)*
//   item   := 'join' | name [ '(' [int (',' int)*] ')' ] [ '@' object-index ]
//
// `join` creates the process's handle at that point instead of during setup
// and must come first. Arguments may be left out, in which case the harness
// fills them in when the op is invoked (see Simulation).

#include <string>
#include <string_view>
#include <vector>

#include "dura/specmodels.hpp"
#include "dura/types.hpp"

namespace dura::harness {

enum class Algorithm : std::uint8_t { durec, durecw, durall, duracas };

Algorithm parse_algorithm(std::string_view name);
const char* to_string(Algorithm a);
spec::SpecKind spec_of(Algorithm a);

struct ScriptOp {
  std::string name;
  std::vector<Word> args;
  bool explicit_args = false;
  int object = 0;
  bool join = false;
};

using Script = std::vector<ScriptOp>;

/// Throws std::invalid_argument on syntax errors, unknown op names for the
/// algorithm, wrong argument counts, or a misplaced join.
Script parse_script(std::string_view text, Algorithm algo);

/// Number of arguments `op` takes under `algo`.
std::size_t arity(Algorithm algo, const std::string& op);

/// Op names of `algo`, sorted.
std::vector<std::string> op_names(Algorithm algo);

std::string to_string(const ScriptOp& op);
/// Inverse of parse_script for scripts it produced.
std::string to_string(const Script& s);

}  // namespace dura::harness

#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace dura {

using Word = std::uint64_t;
using Seq = std::uint64_t;

/// Identifier of one persistent cell. Zero is never allocated.
enum class CellId : std::uint64_t { nil = 0 };

/// Handles are named by the id of their first cell.
using HandleId = CellId;

constexpr std::uint64_t to_u64(CellId c) noexcept { return static_cast<std::uint64_t>(c); }
constexpr CellId cell_at(std::uint64_t raw) noexcept { return static_cast<CellId>(raw); }

/// Content of one double-width cell.
struct WordPair {
  Word first = 0;
  Word second = 0;
  friend constexpr bool operator==(const WordPair&, const WordPair&) = default;
};

/// Largest payload storable by the writable objects (one bit is reserved).
inline constexpr Word kMaxPayload = (Word{1} << 63) - 1;

/// Response of an operation as it appears in a history.
struct Response {
  enum class Type : std::uint8_t { none, boolean, word, pair, ack };
  Type type = Type::none;
  Word a = 0;
  Word b = 0;

  static constexpr Response none() { return {}; }
  static constexpr Response boolean(bool v) { return {Type::boolean, v ? 1u : 0u, 0}; }
  static constexpr Response word(Word v) { return {Type::word, v, 0}; }
  static constexpr Response pair(Word s, Word v) { return {Type::pair, s, v}; }
  static constexpr Response ack() { return {Type::ack, 0, 0}; }

  bool has_value() const { return type != Type::none; }
  bool as_bool() const { return a != 0; }

  friend constexpr bool operator==(const Response&, const Response&) = default;
};

/// Result of Detect: a counter that grows exactly when a visible operation
/// completes, and the response that operation would have returned.
struct Detection {
  std::uint64_t counter = 0;
  Response response;
};

/// Writes answer `ack`; some formulations answer `true`. Both are accepted as equal.
bool equivalent(const Response& x, const Response& y);

std::string to_string(const Response& r);

}  // namespace dura

#pragma once

// Sequential specifications of the four object types. Pure functions over
// value states; used as the checker's oracle.
//
// Sequence numbers are opaque ordered tokens. A successful ECSC or Write
// mints the next token, which is greater than every token seen before on the
// same object; any strictly greater number would do.

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "dura/types.hpp"

namespace dura::spec {

enum class SpecKind : std::uint8_t { ec, ecw, llsc, wcas };

SpecKind parse_spec(std::string_view name);
const char* to_string(SpecKind k);

struct SeqToken {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(const SeqToken&, const SeqToken&) = default;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// ---- EC / ECW ----

struct EcState {
  SeqToken seq;
  Word val = 0;
  friend bool operator==(const EcState&, const EcState&) = default;
};

enum class EcOp : std::uint8_t { ll, vl, sc, write };

struct EcCall {
  EcOp op = EcOp::ll;
  SeqToken s;  // vl, sc
  Word v = 0;  // sc, write
};

struct EcStep {
  EcState state;
  Response response;
};

/// Transition of the writable external-context type; with `writable == false`
/// it is the non-writable EC type and Write is a contract violation.
EcStep ec_apply(const EcState& state, const EcCall& call, bool writable = true);

// ---- LL/SC ----

struct LlscState {
  SeqToken seq;
  Word val = 0;
  std::map<std::uint64_t, SeqToken> last;  // process identity -> context seen by its LL
  friend bool operator==(const LlscState&, const LlscState&) = default;
};

enum class LlscOp : std::uint8_t { ll, vl, sc, write };

struct LlscStep {
  LlscState state;
  Response response;
};

/// VL and SC of a process without a recorded LL fail.
LlscStep llsc_apply(const LlscState& state, std::uint64_t pid, LlscOp op, Word v = 0);

// ---- Writable CAS ----

struct WcasState {
  Word val = 0;
  friend bool operator==(const WcasState&, const WcasState&) = default;
};

enum class WcasOp : std::uint8_t { read, write, cas };

struct WcasStep {
  WcasState state;
  Response response;
};

WcasStep wcas_apply(const WcasState& state, WcasOp op, Word a = 0, Word b = 0);

}  // namespace dura::spec

#pragma once

// Durable-linearizability checking of recorded histories.
//
// An operation that crashed and was recovered is judged by the detect probes
// taken before it and after its recovery:
//   - counter grew: it must take effect, with the response Detect reported;
//   - counter equal: it may or may not take effect, with any response, and
//     the process is expected to issue it again.
// Every crash-free completed operation must take effect inside its interval
// with its observed response. Sequence numbers are matched to the oracle's
// tokens by a consistent renaming, never by value.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dura/specmodels.hpp"
#include "dura/trace.hpp"
#include "dura/types.hpp"

namespace dura::verify {

inline constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

enum class OpStatus : std::uint8_t {
  completed,   // responded without crashing
  effective,   // crashed; detect reported that it took effect
  repeatable,  // crashed; detect reported no visible effect
  pending,     // never completed nor recovered within the trace
};

const char* to_string(OpStatus s);

struct OpRecord {
  int proc = -1;
  std::uint64_t handle = 0;
  std::uint64_t obj = 0;
  std::string name;
  std::vector<Word> args;
  std::uint64_t invoke = 0;
  std::uint64_t end = kNever;  // response, or the last recover_done
  OpStatus status = OpStatus::pending;
  Response response;  // observed response, or the one reported by Detect
  bool crashed = false;
  std::optional<Detection> before;
  std::optional<Detection> after;

  bool mandatory() const { return status == OpStatus::completed || status == OpStatus::effective; }
};

std::string describe(const OpRecord& op);

class MalformedHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-process pass over invoke/response/crash/recover/detect events.
std::vector<OpRecord> extract_ops(const trace::Trace& t);

/// Initial value of every object registered in the trace. Objects without a
/// registration start at 0.
std::map<std::uint64_t, Word> initial_values(const trace::Trace& t);

struct WitnessEntry {
  std::size_t op = 0;   // index into the op list given to the checker
  bool effect = false;  // false: the op is dropped from the linearization
  Response response;    // response the oracle produced; none for an unobserved read
};

struct Verdict {
  bool ok = true;
  std::vector<WitnessEntry> witness;  // effective ops in order, then dropped ops
  std::string explanation;
  std::uint64_t nodes = 0;
};

struct CheckOptions {
  std::uint64_t node_budget = 20'000'000;
};

/// Checks one object's operations. At most 64 operations.
Verdict check_object(const std::vector<OpRecord>& ops, spec::SpecKind spec, Word init,
                     const CheckOptions& opt = {});

/// Checks every object in the history; witnesses index into `ops`.
Verdict check_durable(const std::vector<OpRecord>& ops, spec::SpecKind spec,
                      const std::map<std::uint64_t, Word>& init, const CheckOptions& opt = {});

/// Convenience overload: extracts ops and initial values from the trace.
Verdict check_durable(const trace::Trace& t, spec::SpecKind spec, const CheckOptions& opt = {});

/// Replays a witness through the sequential oracle and re-checks real-time
/// order and responses. Independent of the search that produced it.
bool replay_witness(const std::vector<OpRecord>& ops, const std::vector<WitnessEntry>& witness,
                    spec::SpecKind spec, const std::map<std::uint64_t, Word>& init, std::string* why);

struct DetectAudit {
  bool ok = true;
  std::vector<std::string> problems;
  std::uint64_t ops = 0;
  std::uint64_t crashed = 0;
  std::uint64_t effective = 0;
  std::uint64_t reissued = 0;
  std::uint64_t visible = 0;  // ops whose counter grew
};

/// Cross-checks every detect probe pair against the install events in the
/// trace and checks that each repeatable op was issued again.
DetectAudit audit_detect(const trace::Trace& t, const std::vector<OpRecord>& ops);

}  // namespace dura::verify

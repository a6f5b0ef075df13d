#pragma once

// Runtime monitors over a trace. Pure functions of the event sequence.
//
// DurEC level, per object:
//   alternation   installs and moves alternate, starting with an install;
//                 a move carries the installer's handle, seq and value
//   lag           X.seq >= Y.seq after every access; an install needs
//                 X.seq == Y.seq, a move needs X.seq > Y.seq
//   pinned        a move sets Y to (X.seq, Val of the installer)
//   detval        every handle's detval never decreases
//   hitchhiker    an ECSC whose install CAS failed saw a move in its interval
// Composite level (DurECW, DuraCAS, DuraLL), per object:
//   alternation   installs and moves alternate, starting with an install
//   seesaw        bits equal before an install, different before a move,
//                 and a move copies (W.val, W.bit)
//   imprint       an imprint keeps Z.bit (and, for DuraCAS, changes Z.val)
//   norepeat      DuraCAS: an install differs from the last moved value
//                 when no imprint came in between
//   write_move    a completed, non-trivial write saw a move in its interval
//   cas_retry     DuraCAS: no CAS exhausted both iterations
// Per operation: shared accesses stay within the declared bound.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dura/pmem.hpp"
#include "dura/trace.hpp"

namespace dura::monitors {

struct Violation {
  std::uint64_t step = 0;
  std::string rule;
  std::string detail;
};

std::string to_string(const Violation& v);

/// Declared worst-case shared accesses; ops without an entry are unbounded.
struct StepBounds {
  std::map<std::string, int> op;
  std::optional<int> recover;
};

/// Shared accesses performed by one operation or one recovery attempt.
struct OpCost {
  int proc = -1;
  std::string op;  // "recover" for recovery attempts
  std::uint64_t start = 0;
  int events = 0;
  bool crashed = false;
};

std::vector<OpCost> op_costs(const trace::Trace& t);

/// Turns DurEC move events on the halves of composite objects into
/// composite install / move / imprint events.
class CompositeTracker {
 public:
  /// Feeds one monitor event; returns the derived composite event, if any.
  std::optional<pmem::MonitorEvent> feed(const pmem::MonitorEvent& e);

  struct Composite {
    CellId w = CellId::nil;
    CellId z = CellId::nil;
    pmem::CompositeKind kind = pmem::CompositeKind::durecw;
  };
  const std::map<CellId, Composite>& composites() const { return objects_; }

 private:
  struct Role {
    HandleId composite = CellId::nil;
    bool critical = false;
  };
  std::map<CellId, Composite> objects_;
  std::map<CellId, CellId> half_owner_;  // W or Z x-cell -> composite id
  std::map<HandleId, Role> roles_;
};

std::vector<Violation> run_monitors(const trace::Trace& t, const StepBounds* bounds = nullptr);

}  // namespace dura::monitors

#pragma once

// DurEC: durable, detectable, non-writable external-context LL/SC built from
// two CAS cells.
//
//   X = (installer handle, seq)   announces the next successful ECSC
//   Y = (seq, value)              the object's abstract state
//
// X.seq == Y.seq means nothing is pending. X.seq > Y.seq means the handle in
// X has installed an ECSC whose value waits in its Val cell; every ECSC and
// Recover that passes through Forward helps move it into Y. A handle's detval
// is raised to the installed seq before the move, so Detect sees the growth
// even if the installer crashes right after installing.
//
// Handles are process-independent records of two cells (detval, Val) and can
// be used on any number of objects.

#include "dura/pmem.hpp"
#include "dura/task.hpp"
#include "dura/types.hpp"

namespace dura::durec {

class Handle {
 public:
  Handle() = default;
  static Handle create(pmem::Memory& mem);
  static Handle from_id(HandleId id) { return Handle(id); }

  HandleId id() const { return detval_; }
  CellId detval_cell() const { return detval_; }
  CellId val_cell() const { return cell_at(to_u64(detval_) + 1); }
  /// Second word of the detval cell: free for the owner's own bookkeeping.
  /// Helpers never change it, and once the owner's operations and recoveries
  /// have returned no helper can change the cell at all.
  CellId aux_cell() const { return detval_; }
  bool is_nil() const { return detval_ == CellId::nil; }

  friend bool operator==(Handle, Handle) = default;

 private:
  explicit Handle(CellId detval) : detval_(detval) {}
  CellId detval_ = CellId::nil;
};

/// Cells allocated per object and per handle.
inline constexpr int kObjectCells = 2;
inline constexpr int kHandleCells = 2;

struct View {
  Seq seq = 0;
  Word val = 0;
  friend bool operator==(const View&, const View&) = default;
};

class Object {
 public:
  Object() = default;
  static Object create(pmem::Memory& mem, Word init);

  // Operations copy the object into their frame; the Object need not
  // outlive the returned task.

  /// Returns (Y.seq, Y.val) in one read.
  Task<View> ecll(Handle h) const { return ecll_op(*this, h); }
  Task<bool> ecvl(Handle h, Seq s) const { return ecvl_op(*this, h, s); }
  /// Succeeds iff the object's seq is still `s`; on success the value becomes
  /// `v` and the seq grows. Wait-free, at most 11 memory accesses.
  Task<bool> ecsc(Handle h, Seq s, Word v) const { return ecsc_op(*this, h, s, v); }
  /// Must run after a crash of an operation issued through `h`, before `h`
  /// starts another operation on this object.
  Task<void> recover(Handle h) const { return forward(*this, h); }

  CellId id() const { return x_; }
  CellId x_cell() const { return x_; }
  CellId y_cell() const { return y_; }
  pmem::Memory& memory() const { return *mem_; }

 private:
  Object(pmem::Memory* mem, CellId x, CellId y) : mem_(mem), x_(x), y_(y) {}
  static Task<View> ecll_op(Object self, Handle h);
  static Task<bool> ecvl_op(Object self, Handle h, Seq s);
  static Task<bool> ecsc_op(Object self, Handle h, Seq s, Word v);
  static Task<void> forward(Object self, Handle h);

  pmem::Memory* mem_ = nullptr;
  CellId x_ = CellId::nil;
  CellId y_ = CellId::nil;
};

/// (detval, true). The counter grows across an operation iff it was an
/// installing ECSC.
Task<Detection> detect(pmem::Memory& mem, Handle h);

/// Declared worst-case memory accesses per method, counted line by line.
inline constexpr int kEcllBound = 1;
inline constexpr int kEcvlBound = 1;
inline constexpr int kEcscBound = 11;
inline constexpr int kRecoverBound = 6;
inline constexpr int kDetectBound = 1;

}  // namespace dura::durec

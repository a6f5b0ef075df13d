#pragma once

// DuraCAS: durable, detectable Writable CAS from two DurEC objects, sharing
// the W/Z skeleton of DurECW.
//
// Differences from DurECW:
//  - CAS reads Z, fails early on a mismatch, returns true on old == new
//    without touching Z, and otherwise helps a pending write before its
//    ECSC on Z. The body runs at most twice: a first ECSC may lose to a
//    transfer that moved a write of the very same value.
//  - A write whose value is already in Z returns at once, so it does not
//    bump Z.seq under a concurrent CAS.
//  - The handle carries a persistent op-name cell, written at the start of
//    each CAS or Write, from which Detect rebuilds the response.

#include "dura/durec.hpp"
#include "dura/durecw.hpp"
#include "dura/pmem.hpp"
#include "dura/task.hpp"
#include "dura/types.hpp"

namespace dura::duracas {

enum class OpName : Word { none = 0, cas = 1, write = 2 };

class Handle {
 public:
  Handle() = default;
  static Handle create(pmem::Memory& mem);

  HandleId id() const { return inner_.id(); }
  durec::Handle critical() const { return inner_.critical(); }
  durec::Handle casual() const { return inner_.casual(); }
  CellId op_name_cell() const { return op_name_; }
  const durecw::Handle& pair() const { return inner_; }

 private:
  Handle(durecw::Handle inner, CellId op_name) : inner_(inner), op_name_(op_name) {}
  durecw::Handle inner_;
  CellId op_name_ = CellId::nil;
};

inline constexpr int kObjectCells = durecw::kObjectCells;
inline constexpr int kHandleCells = durecw::kHandleCells + 1;

class Object {
 public:
  Object() = default;
  static Object create(pmem::Memory& mem, Word init);

  Task<Word> read(Handle h) const { return read_op(*this, h); }
  Task<bool> cas(Handle h, Word old_val, Word new_val) const { return cas_op(*this, h, old_val, new_val); }
  Task<void> write(Handle h, Word v) const { return write_op(*this, h, v); }
  Task<void> recover(Handle h) const { return recover_op(*this, h); }

  CellId id() const { return inner_.id(); }
  const durecw::Object& pair() const { return inner_; }

 private:
  explicit Object(durecw::Object inner) : inner_(inner) {}
  static Task<Word> read_op(Object self, Handle h);
  static Task<bool> cas_op(Object self, Handle h, Word old_val, Word new_val);
  static Task<void> write_op(Object self, Handle h, Word v);
  static Task<void> recover_op(Object self, Handle h);

  durecw::Object inner_;
};

/// (critical detval, true if the last op started was a CAS, ack otherwise).
Task<Detection> detect(pmem::Memory& mem, Handle h);

inline constexpr int kCasIterations = 2;
inline constexpr int kReadBound = durec::kEcllBound;
inline constexpr int kCasBound =
    1 + kCasIterations * (durec::kEcllBound + durecw::kTransferBound + durec::kEcscBound);
inline constexpr int kWriteBound = 1 + durecw::kWriteBound;
inline constexpr int kRecoverBound = durecw::kRecoverBound;
inline constexpr int kDetectBound = durec::kDetectBound + 1;

}  // namespace dura::duracas

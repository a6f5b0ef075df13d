#pragma once

// DurECW: durable, detectable, writable external-context LL/SC built from two
// DurEC objects W and Z.
//
// Z holds the abstract state. A write first installs (value, !bit) into W;
// while W.bit != Z.bit the write is pending and every ECSC and Write helps
// transfer it into Z, which flips Z.bit. ECSC acts on Z directly and keeps
// Z.bit as it found it. Values stored in W and Z are packed as
// (payload << 1) | bit, so payloads are limited to 63 bits.
//
// Each handle owns two DurEC handles. `critical` is used only for the ECSCs
// that make the caller's own operation visible (installing a write into W,
// an ECSC on Z); `casual` serves reads and helping, so a move performed on
// behalf of someone else never shows up in the helper's detect counter.

#include "dura/durec.hpp"
#include "dura/pmem.hpp"
#include "dura/task.hpp"
#include "dura/types.hpp"

namespace dura::durecw {

struct Packed {
  Word val = 0;
  bool bit = false;
  friend bool operator==(const Packed&, const Packed&) = default;
};

constexpr Word pack(Word val, bool bit) noexcept { return (val << 1) | (bit ? 1u : 0u); }
constexpr Packed unpack(Word w) noexcept { return Packed{w >> 1, (w & 1u) != 0}; }

struct View {
  Seq seq = 0;
  Word val = 0;
  bool bit = false;
};

/// Throws std::out_of_range for payloads wider than 63 bits.
void check_payload(Word v);

class Handle {
 public:
  Handle() = default;
  /// Two DurEC handles; emits reg_handle with `kind` and `extra`.
  static Handle create(pmem::Memory& mem, pmem::CompositeKind kind = pmem::CompositeKind::durecw,
                       CellId extra = CellId::nil);
  static Handle from_parts(durec::Handle critical, durec::Handle casual) { return Handle(critical, casual); }

  HandleId id() const { return critical_.id(); }
  durec::Handle critical() const { return critical_; }
  durec::Handle casual() const { return casual_; }

 private:
  Handle(durec::Handle critical, durec::Handle casual) : critical_(critical), casual_(casual) {}
  durec::Handle critical_;
  durec::Handle casual_;
};

inline constexpr int kObjectCells = 2 * durec::kObjectCells;
inline constexpr int kHandleCells = 2 * durec::kHandleCells;

class Object {
 public:
  Object() = default;
  static Object create(pmem::Memory& mem, Word init, pmem::CompositeKind kind = pmem::CompositeKind::durecw);

  Task<View> ecll(Handle h) const { return ecll_op(*this, h); }
  Task<bool> ecvl(Handle h, Seq s) const { return ecvl_op(*this, h, s); }
  Task<bool> ecsc(Handle h, Seq s, Word v) const { return ecsc_op(*this, h, s, v); }
  Task<void> write(Handle h, Word v) const { return write_op(*this, h, v); }
  Task<void> recover(Handle h) const { return recover_op(*this, h); }

  /// One helping round: if W holds a write that Z has not seen, try to move it.
  /// Two consecutive rounds guarantee that a pending write has been moved.
  Task<void> transfer(Handle h) const { return transfer_op(*this, h); }

  CellId id() const { return w_.id(); }
  const durec::Object& w() const { return w_; }
  const durec::Object& z() const { return z_; }

 private:
  Object(durec::Object w, durec::Object z) : w_(w), z_(z) {}
  static Task<View> ecll_op(Object self, Handle h);
  static Task<bool> ecvl_op(Object self, Handle h, Seq s);
  static Task<bool> ecsc_op(Object self, Handle h, Seq s, Word v);
  static Task<void> write_op(Object self, Handle h, Word v);
  static Task<void> recover_op(Object self, Handle h);
  static Task<void> transfer_op(Object self, Handle h);

  durec::Object w_;
  durec::Object z_;
};

/// Detect through the critical handle.
Task<Detection> detect(pmem::Memory& mem, Handle h);

inline constexpr int kEcllBound = durec::kEcllBound;
inline constexpr int kEcvlBound = durec::kEcvlBound;
inline constexpr int kTransferBound = 2 * durec::kEcllBound + durec::kEcscBound;
inline constexpr int kEcscBound = durec::kEcllBound + kTransferBound + durec::kEcscBound;
inline constexpr int kWriteBound = 2 * durec::kEcllBound + durec::kEcscBound + 2 * kTransferBound;
inline constexpr int kRecoverBound = 4 * durec::kRecoverBound + 2 * kTransferBound;
inline constexpr int kDetectBound = durec::kDetectBound;

}  // namespace dura::durecw

#pragma once

// DuraLL: durable, detectable Writable LL/SC over one DurECW object.
//
// The external context returned by ECLL is kept in a per-handle persistent
// map keyed by object id. SC and Write remove the key; Recover removes it
// when the stored context has gone stale. Only the owning handle touches its
// map, so map updates are plain reads and writes.

#include <optional>

#include "dura/durecw.hpp"
#include "dura/pmem.hpp"
#include "dura/task.hpp"
#include "dura/types.hpp"

namespace dura::durall {

/// Linear-probing table of (object id, seq) entries in persistent cells.
///
/// Nothing is allocated until the first insert. The anchor is a cell whose
/// second word the owner may use freely; it points at a header cell holding
/// (first table cell, cap_log2 << 32 | used). The table is replaced by a copy
/// twice the size when more than half full. Deletion shifts later entries of
/// the cluster back, so there are no tombstones and `used` tracks live
/// entries. A crash mid-shift can leave a duplicate of an entry behind; the
/// copy nearer its home slot is the one found, and a leftover only surfaces
/// after its key was erased, by which time its seq is stale. A crash during a
/// rehash leaves the old table in place and leaks the partial copy.
class ContextMap {
 public:
  static constexpr Word kEmpty = 0;
  static constexpr unsigned kInitialLog2 = 2;

  ContextMap() = default;
  static ContextMap at(pmem::Memory& mem, CellId anchor) { return ContextMap(&mem, anchor); }

  Task<std::optional<Seq>> get(CellId key) const { return get_op(*this, key); }
  Task<void> put(CellId key, Seq seq) const { return put_op(*this, key, seq); }
  Task<void> erase(CellId key) const { return erase_op(*this, key); }

  CellId anchor() const { return anchor_; }

  /// Live entries and table cells, read without accounting.
  std::size_t peek_size() const;
  std::size_t peek_capacity() const;

 private:
  ContextMap(pmem::Memory* mem, CellId anchor) : mem_(mem), anchor_(anchor) {}

  struct Layout {
    CellId header = CellId::nil;
    Word base = 0;
    unsigned log2 = 0;
    Word used = 0;
    Word cap() const { return base == 0 ? 0 : Word{1} << log2; }
  };
  struct Probe {
    std::optional<Word> found;  // slot holding the key
    std::optional<Word> free;   // first empty slot on the probe path
    Seq seq = 0;                // entry of the found slot
  };

  static Layout decode(CellId header, const WordPair& h) {
    return Layout{header, h.first, static_cast<unsigned>(h.second >> 32), h.second & 0xffffffffu};
  }
  static WordPair encode(const Layout& l) { return WordPair{l.base, (Word{l.log2} << 32) | l.used}; }
  static Word home(Word key, unsigned log2);
  Layout peek_layout() const;

  static Task<Layout> load(ContextMap self);
  static Task<Probe> probe(ContextMap self, Layout l, Word key);
  static Task<std::optional<Seq>> get_op(ContextMap self, CellId key);
  static Task<void> put_op(ContextMap self, CellId key, Seq seq);
  static Task<void> erase_op(ContextMap self, CellId key);
  static Task<Layout> grow(ContextMap self, Layout l);

  pmem::Memory* mem_ = nullptr;
  CellId anchor_ = CellId::nil;
};

class Handle {
 public:
  Handle() = default;
  static Handle create(pmem::Memory& mem);
  static Handle from_inner(pmem::Memory& mem, durecw::Handle inner) {
    return Handle(inner, ContextMap::at(mem, inner.casual().aux_cell()));
  }

  HandleId id() const { return inner_.id(); }
  const durecw::Handle& inner() const { return inner_; }
  const ContextMap& contexts() const { return contexts_; }

 private:
  Handle(durecw::Handle inner, ContextMap contexts) : inner_(inner), contexts_(contexts) {}
  durecw::Handle inner_;
  ContextMap contexts_;
};

inline constexpr int kObjectCells = durecw::kObjectCells;
/// The contexts table is anchored in the handle's own cells and allocated on
/// the first LL, so creating a handle costs no more than a DurECW handle.
inline constexpr int kHandleCells = durecw::kHandleCells;

class Object {
 public:
  Object() = default;
  static Object create(pmem::Memory& mem, Word init);

  Task<Word> ll(Handle h) const { return ll_op(*this, h); }
  Task<bool> vl(Handle h) const { return vl_op(*this, h); }
  Task<bool> sc(Handle h, Word v) const { return sc_op(*this, h, v); }
  Task<void> write(Handle h, Word v) const { return write_op(*this, h, v); }
  Task<void> recover(Handle h) const { return recover_op(*this, h); }

  CellId id() const { return inner_.id(); }
  const durecw::Object& inner() const { return inner_; }

 private:
  explicit Object(durecw::Object inner) : inner_(inner) {}
  static Task<Word> ll_op(Object self, Handle h);
  static Task<bool> vl_op(Object self, Handle h);
  static Task<bool> sc_op(Object self, Handle h, Word v);
  static Task<void> write_op(Object self, Handle h, Word v);
  static Task<void> recover_op(Object self, Handle h);

  durecw::Object inner_;
};

Task<Detection> detect(pmem::Memory& mem, Handle h);

}  // namespace dura::durall

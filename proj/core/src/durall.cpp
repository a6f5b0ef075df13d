#include "dura/durall.hpp"

#include <map>
#include <set>

namespace dura::durall {

Word ContextMap::home(Word key, unsigned log2) {
  // Fibonacci hashing; object ids are small consecutive integers.
  return (key * 0x9e3779b97f4a7c15ull) >> (64 - log2);
}

ContextMap::Layout ContextMap::peek_layout() const {
  const CellId header = cell_at(mem_->peek(anchor_).second);
  if (header == CellId::nil) return {};
  return decode(header, mem_->peek(header));
}

std::size_t ContextMap::peek_size() const {
  const Layout l = peek_layout();
  std::set<Word> keys;
  for (Word i = 0; i < l.cap(); ++i) {
    const Word k = mem_->peek(cell_at(l.base + i)).first;
    if (k != kEmpty) keys.insert(k);
  }
  return keys.size();
}

std::size_t ContextMap::peek_capacity() const { return peek_layout().cap(); }

Task<ContextMap::Layout> ContextMap::load(ContextMap self) {
  const WordPair a = co_await self.mem_->read(self.anchor_);
  const CellId header = cell_at(a.second);
  if (header == CellId::nil) co_return Layout{};
  const WordPair h = co_await self.mem_->read(header);
  co_return decode(header, h);
}

Task<ContextMap::Probe> ContextMap::probe(ContextMap self, Layout l, Word key) {
  Probe p;
  if (l.base == 0) co_return p;
  const Word mask = l.cap() - 1;
  Word i = home(key, l.log2);
  for (Word n = 0; n < l.cap(); ++n, i = (i + 1) & mask) {
    const WordPair e = co_await self.mem_->read(cell_at(l.base + i));
    if (e.first == key) {
      p.found = i;
      p.seq = e.second;
      co_return p;
    }
    if (e.first == kEmpty) {
      p.free = i;
      co_return p;
    }
  }
  co_return p;
}

Task<std::optional<Seq>> ContextMap::get_op(ContextMap self, CellId key) {
  const Layout l = co_await load(self);
  const Probe p = co_await probe(self, l, to_u64(key));
  if (!p.found) co_return std::nullopt;
  co_return p.seq;
}

Task<ContextMap::Layout> ContextMap::grow(ContextMap self, Layout l) {
  pmem::Memory& mem = *self.mem_;
  // Gather live entries first. A key left twice by a crashed shift keeps the
  // copy nearest its home slot, which is the one lookups find.
  std::map<Word, std::pair<Word, WordPair>> live;  // key -> (distance, entry)
  for (Word i = 0; i < l.cap(); ++i) {
    const WordPair e = co_await mem.read(cell_at(l.base + i));
    if (e.first == kEmpty) continue;
    const Word dist = (i - home(e.first, l.log2)) & (l.cap() - 1);
    auto [it, fresh] = live.try_emplace(e.first, dist, e);
    if (!fresh && dist < it->second.first) it->second = {dist, e};
  }

  Layout next;
  next.header = l.header;
  next.log2 = l.base == 0 ? kInitialLog2 : l.log2 + 1;
  while (2 * (live.size() + 1) > (Word{1} << next.log2)) ++next.log2;
  next.base = to_u64(mem.alloc_block(Word{1} << next.log2, WordPair{kEmpty, 0}));
  const Word mask = next.cap() - 1;
  for (const auto& [key, entry] : live) {
    Word j = home(key, next.log2);
    // The new block is private until the header points at it.
    while (mem.peek(cell_at(next.base + j)).first != kEmpty) j = (j + 1) & mask;
    co_await mem.write(cell_at(next.base + j), entry.second);
    ++next.used;
  }
  co_await mem.write(l.header, encode(next));
  co_return next;
}

Task<void> ContextMap::put_op(ContextMap self, CellId key, Seq seq) {
  pmem::Memory& mem = *self.mem_;
  Layout l = co_await load(self);
  if (l.header == CellId::nil) {
    l.header = mem.alloc(WordPair{0, 0});
    // Only the owner writes the second word; a failed CAS means a helper
    // raised the detval in the first word meanwhile.
    for (;;) {
      const WordPair a = co_await mem.read(self.anchor_);
      const bool set = co_await mem.cas(self.anchor_, a, WordPair{a.first, to_u64(l.header)});
      if (set) break;
    }
  }
  Probe p = co_await probe(self, l, to_u64(key));
  if (p.found) {
    co_await mem.write(cell_at(l.base + *p.found), WordPair{to_u64(key), seq});
    co_return;
  }
  // `used` can lag by one per crash between the slot write and the header
  // write, so a probe may still come back without a free slot.
  if (l.base == 0 || 2 * (l.used + 1) > l.cap() || !p.free) {
    l = co_await grow(self, l);
    p = co_await probe(self, l, to_u64(key));
  }
  co_await mem.write(cell_at(l.base + *p.free), WordPair{to_u64(key), seq});
  ++l.used;
  co_await mem.write(l.header, encode(l));
}

Task<void> ContextMap::erase_op(ContextMap self, CellId key) {
  pmem::Memory& mem = *self.mem_;
  Layout l = co_await load(self);
  const Probe p = co_await probe(self, l, to_u64(key));
  if (!p.found) co_return;
  const Word mask = l.cap() - 1;
  Word hole = *p.found;
  Word j = hole;
  for (Word n = 1; n < l.cap(); ++n) {
    j = (j + 1) & mask;
    const WordPair e = co_await mem.read(cell_at(l.base + j));
    if (e.first == kEmpty) break;
    const Word k = home(e.first, l.log2);
    // Entries whose home lies cyclically in (hole, j] stay put.
    const bool stays = hole <= j ? (hole < k && k <= j) : (hole < k || k <= j);
    if (stays) continue;
    co_await mem.write(cell_at(l.base + hole), e);
    hole = j;
  }
  co_await mem.write(cell_at(l.base + hole), WordPair{kEmpty, 0});
  if (l.used > 0) --l.used;
  co_await mem.write(l.header, encode(l));
}

Handle Handle::create(pmem::Memory& mem) {
  return from_inner(mem, durecw::Handle::create(mem, pmem::CompositeKind::durall));
}

Object Object::create(pmem::Memory& mem, Word init) {
  return Object(durecw::Object::create(mem, init, pmem::CompositeKind::durall));
}

Task<Word> Object::ll_op(Object self, Handle h) {
  const auto view = co_await self.inner_.ecll(h.inner());
  co_await h.contexts().put(self.id(), view.seq);
  co_return view.val;
}

Task<bool> Object::vl_op(Object self, Handle h) {
  const auto ctx = co_await h.contexts().get(self.id());
  if (!ctx) co_return false;
  const bool ok = co_await self.inner_.ecvl(h.inner(), *ctx);
  co_return ok;
}

Task<bool> Object::sc_op(Object self, Handle h, Word v) {
  const auto ctx = co_await h.contexts().get(self.id());
  if (!ctx) co_return false;
  const bool ok = co_await self.inner_.ecsc(h.inner(), *ctx, v);
  co_await h.contexts().erase(self.id());
  co_return ok;
}

Task<void> Object::write_op(Object self, Handle h, Word v) {
  co_await self.inner_.write(h.inner(), v);
  co_await h.contexts().erase(self.id());
}

Task<void> Object::recover_op(Object self, Handle h) {
  co_await self.inner_.recover(h.inner());
  const auto ctx = co_await h.contexts().get(self.id());
  if (!ctx) co_return;
  const bool current = co_await self.inner_.ecvl(h.inner(), *ctx);
  if (!current) co_await h.contexts().erase(self.id());
}

Task<Detection> detect(pmem::Memory& mem, Handle h) {
  const auto d = co_await durecw::detect(mem, h.inner());
  co_return d;
}

}  // namespace dura::durall

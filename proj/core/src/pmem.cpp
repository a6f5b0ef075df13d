#include "dura/pmem.hpp"

#include <bit>
#include <cassert>
#include <memory>
#include <stdexcept>

namespace dura::pmem {

namespace {

thread_local int tl_crash_countdown = -1;
thread_local std::uint64_t tl_events = 0;

using u128 = unsigned __int128;

constexpr u128 pack(WordPair p) { return (static_cast<u128>(p.second) << 64) | p.first; }
constexpr WordPair unpack(u128 v) {
  return WordPair{static_cast<Word>(v), static_cast<Word>(v >> 64)};
}

// cmpxchg16b is the only 16-byte atomic primitive on x86-64; loads go
// through it as well.
inline u128 atomic_load(u128* p) { return __sync_val_compare_and_swap(p, u128{0}, u128{0}); }

inline u128 atomic_cas(u128* p, u128 expected, u128 desired) {
  return __sync_val_compare_and_swap(p, expected, desired);
}

inline void atomic_store(u128* p, u128 v) {
  u128 cur = atomic_load(p);
  for (;;) {
    const u128 seen = atomic_cas(p, cur, v);
    if (seen == cur) return;
    cur = seen;
  }
}

}  // namespace

const char* to_string(MonitorKind k) {
  switch (k) {
    case MonitorKind::ec_install: return "ec_install";
    case MonitorKind::ec_move: return "ec_move";
    case MonitorKind::ec_detval: return "ec_detval";
    case MonitorKind::reg_ec_object: return "reg_ec_object";
    case MonitorKind::reg_ec_handle: return "reg_ec_handle";
    case MonitorKind::reg_object: return "reg_object";
    case MonitorKind::reg_handle: return "reg_handle";
    case MonitorKind::trivial_write: return "trivial_write";
    case MonitorKind::trivial_cas: return "trivial_cas";
    case MonitorKind::cas_retry_exhausted: return "cas_retry_exhausted";
    case MonitorKind::install: return "install";
    case MonitorKind::move: return "move";
    case MonitorKind::imprint: return "imprint";
  }
  return "?";
}

Memory::Memory(Mode mode) : mode_(mode) {}

Memory::~Memory() {
  for (auto& c : chunks_) delete[] c.load(std::memory_order_relaxed);
}

Memory::Slot& Memory::slot(CellId cell) const {
  // Chunk k holds kBaseChunk << k cells; positions are dense from zero.
  const std::uint64_t pos = to_u64(cell) - 1;
  const std::uint64_t q = pos / kBaseChunk + 1;
  const unsigned k = static_cast<unsigned>(std::bit_width(q)) - 1;
  const std::uint64_t offset = pos - kBaseChunk * ((std::uint64_t{1} << k) - 1);
  Slot* chunk = chunks_[k].load(std::memory_order_acquire);
  assert(chunk != nullptr);
  return chunk[offset];
}

CellId Memory::alloc(WordPair init, CellUse use) { return alloc_block(1, init, use); }

CellId Memory::alloc_block(std::size_t count, WordPair init, CellUse use) {
  if (count == 0) throw std::invalid_argument("alloc_block: empty block");
  std::uint64_t first = 0;
  {
    std::lock_guard lock(grow_mu_);
    first = next_id_;
    next_id_ += count;
    const std::uint64_t last_pos = next_id_ - 2;
    const unsigned last_chunk =
        static_cast<unsigned>(std::bit_width(last_pos / kBaseChunk + 1)) - 1;
    if (last_chunk >= kChunks) throw std::length_error("persistent memory exhausted");
    for (unsigned k = 0; k <= last_chunk; ++k) {
      if (chunks_[k].load(std::memory_order_relaxed) == nullptr) {
        chunks_[k].store(new Slot[kBaseChunk << k](), std::memory_order_release);
      }
    }
    for (std::uint64_t id = first; id < next_id_; ++id) {
      atomic_store(&slot(cell_at(id)).bits, pack(init));
    }
    published_.store(next_id_, std::memory_order_release);
  }
  if (use == CellUse::algorithm) {
    cells_.fetch_add(count, std::memory_order_relaxed);
  } else {
    bookkeeping_.fetch_add(count, std::memory_order_relaxed);
  }
  if (sink_ != nullptr) {
    for (std::uint64_t id = first; id < first + count; ++id) sink_->on_alloc(cell_at(id), init, use);
  }
  return cell_at(first);
}

bool Memory::allocated(CellId cell) const {
  const auto id = to_u64(cell);
  return id != 0 && id < published_.load(std::memory_order_acquire);
}

void Memory::before_native_access() {
  if (tl_crash_countdown >= 0) {
    if (tl_crash_countdown == 0) {
      tl_crash_countdown = -1;
      throw CrashSignal{};
    }
    --tl_crash_countdown;
  }
}

void Memory::perform(Access& a) {
  if (mode_ == Mode::native) before_native_access();
  assert(allocated(a.cell));
  u128* bits = &slot(a.cell).bits;
  switch (a.kind) {
    case AccessKind::read:
      a.result = unpack(atomic_load(bits));
      break;
    case AccessKind::write:
      atomic_store(bits, pack(a.desired));
      break;
    case AccessKind::cas: {
      const u128 seen = atomic_cas(bits, pack(a.expected), pack(a.desired));
      a.result = unpack(seen);
      a.ok = seen == pack(a.expected);
      break;
    }
  }
  ++tl_events;
  events_.fetch_add(1, std::memory_order_relaxed);
  if (sink_ != nullptr) sink_->on_access(a);
}

WordPair Memory::peek(CellId cell) const { return unpack(atomic_load(&slot(cell).bits)); }

MemStats Memory::stats() const {
  return MemStats{cells_.load(std::memory_order_relaxed), bookkeeping_.load(std::memory_order_relaxed),
                  events_.load(std::memory_order_relaxed)};
}

void Memory::arm_crash(int accesses) { tl_crash_countdown = accesses; }
void Memory::disarm_crash() { tl_crash_countdown = -1; }
std::uint64_t Memory::thread_events() { return tl_events; }

}  // namespace dura::pmem

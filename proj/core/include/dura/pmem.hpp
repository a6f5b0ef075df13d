#pragma once

// Persistent memory: double-width cells supporting atomic read, write and CAS.
//
// Two backends share one cell store. In native mode every access executes on
// the spot with a hardware 128-bit CAS, safe from any number of threads. In
// simulated mode an access parks the calling coroutine; the scheduler that owns
// the Memory later performs the access and resumes it, so each access is one
// scheduler step. Cells are never freed and survive crashes by construction.

#include <array>
#include <atomic>
#include <coroutine>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

#include "dura/types.hpp"

namespace dura::pmem {

enum class Mode : std::uint8_t { simulated, native };

/// Algorithm cells are charged to the space bounds; bookkeeping cells hold
/// client-side records (pending-op records) and are reported separately.
enum class CellUse : std::uint8_t { algorithm, bookkeeping };

enum class AccessKind : std::uint8_t { read, write, cas };

struct Access {
  AccessKind kind = AccessKind::read;
  CellId cell = CellId::nil;
  WordPair expected;  // cas only
  WordPair desired;   // write and cas
  WordPair result;    // read: value read; cas: value observed before the attempt
  bool ok = false;    // cas outcome
};

struct MemStats {
  std::uint64_t cells_allocated = 0;
  std::uint64_t bookkeeping_cells = 0;
  std::uint64_t events = 0;
};

/// Monitor records emitted by the algorithms. Field meaning per kind is listed
/// next to each enumerator; unused fields are zero.
enum class MonitorKind : std::uint8_t {
  ec_install,         // obj=X cell, handle=installer, args={new seq, value}
  ec_move,            // obj=X cell, handle=installer, args={seq, value}
  ec_detval,          // handle, args={old, new}
  reg_ec_object,      // obj=X cell, args={Y cell}
  reg_ec_handle,      // handle, args={Val cell}
  reg_object,         // obj=composite id, args={W id, Z id, kind}
  reg_handle,         // handle=composite id, args={critical, casual, kind, extra cell}
  trivial_write,      // obj, handle, args={value}
  trivial_cas,        // obj, handle, args={value}
  cas_retry_exhausted,  // obj, handle
  install,            // composite level: obj, handle=installer critical, args={value, bit}
  move,               // obj, handle=installer casual, args={value, bit}
  imprint,            // obj, handle=installer critical, args={value, bit}
};

const char* to_string(MonitorKind k);

/// Composite object kinds carried in reg_object / reg_handle.
enum class CompositeKind : std::uint8_t { durecw = 1, duracas = 2, durall = 3 };

struct MonitorEvent {
  MonitorKind kind = MonitorKind::ec_install;
  CellId obj = CellId::nil;
  HandleId handle = CellId::nil;
  std::array<Word, 4> args{};
};

/// Receives allocation, access and monitor notifications. Native sinks must be
/// thread-safe; the simulated backend calls from the scheduler thread only.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_alloc(CellId, const WordPair&, CellUse) {}
  virtual void on_access(const Access&) {}
  virtual void on_monitor(const MonitorEvent&) {}
};

/// Thrown from a native access when an injected crash fires.
struct CrashSignal : std::exception {
  const char* what() const noexcept override { return "injected crash"; }
};

/// Slot a simulated access parks into; owned by the scheduler, one per process.
struct Parking {
  std::coroutine_handle<> handle;
  Access* access = nullptr;
  bool parked() const { return static_cast<bool>(handle); }
};

class Memory {
 public:
  explicit Memory(Mode mode);
  ~Memory();
  Memory(const Memory&) = delete;
  Memory& operator=(const Memory&) = delete;

  Mode mode() const { return mode_; }

  CellId alloc(WordPair init, CellUse use = CellUse::algorithm);
  /// Allocates `count` cells with consecutive ids; returns the first.
  CellId alloc_block(std::size_t count, WordPair init, CellUse use = CellUse::algorithm);

  class AccessAwaiter;
  class ReadAwaiter;
  class WriteAwaiter;
  class CasAwaiter;

  ReadAwaiter read(CellId cell);
  WriteAwaiter write(CellId cell, WordPair value);
  CasAwaiter cas(CellId cell, WordPair expected, WordPair desired);

  /// Executes an access now and notifies the sink. Used by awaiters on the
  /// immediate path and by the scheduler for parked accesses.
  void perform(Access& a);

  /// Raw load without accounting or notification (inspection only).
  WordPair peek(CellId cell) const;

  MemStats stats() const;
  bool allocated(CellId cell) const;

  void set_sink(EventSink* sink) { sink_ = sink; }
  EventSink* sink() const { return sink_; }
  void emit(const MonitorEvent& e) {
    if (sink_ != nullptr) sink_->on_monitor(e);
  }

  /// Simulated mode: where the next parking access registers itself.
  void set_parking(Parking* p) { parking_ = p; }

  /// Simulated mode: while > 0 accesses complete on the spot.
  bool immediate() const { return mode_ == Mode::native || immediate_depth_ > 0; }

  class ImmediateScope {
   public:
    explicit ImmediateScope(Memory& m) : m_(m) { ++m_.immediate_depth_; }
    ~ImmediateScope() { --m_.immediate_depth_; }
    ImmediateScope(const ImmediateScope&) = delete;
    ImmediateScope& operator=(const ImmediateScope&) = delete;

   private:
    Memory& m_;
  };

  /// Native crash injection for the calling thread: the access after
  /// `accesses` more accesses throws CrashSignal instead of executing.
  static void arm_crash(int accesses);
  static void disarm_crash();
  /// Accesses performed by the calling thread since it started.
  static std::uint64_t thread_events();

 private:
  struct alignas(16) Slot {
    unsigned __int128 bits;
  };
  static constexpr std::size_t kBaseChunk = 64;
  static constexpr std::size_t kChunks = 40;

  Slot& slot(CellId cell) const;
  void before_native_access();

  Mode mode_;
  EventSink* sink_ = nullptr;
  Parking* parking_ = nullptr;
  int immediate_depth_ = 0;

  std::array<std::atomic<Slot*>, kChunks> chunks_{};
  std::mutex grow_mu_;
  std::uint64_t next_id_ = 1;  // guarded by grow_mu_
  std::atomic<std::uint64_t> published_{0};
  std::atomic<std::uint64_t> cells_{0};
  std::atomic<std::uint64_t> bookkeeping_{0};
  std::atomic<std::uint64_t> events_{0};
};

class Memory::AccessAwaiter {
 public:
  AccessAwaiter(Memory& m, Access a) : m_(&m), a_(a) {}
  bool await_ready() {
    if (!m_->immediate()) return false;
    m_->perform(a_);
    return true;
  }
  void await_suspend(std::coroutine_handle<> h) noexcept {
    m_->parking_->handle = h;
    m_->parking_->access = &a_;
  }

 protected:
  Memory* m_;
  Access a_;
};

class Memory::ReadAwaiter : public AccessAwaiter {
 public:
  using AccessAwaiter::AccessAwaiter;
  WordPair await_resume() const noexcept { return a_.result; }
};

class Memory::WriteAwaiter : public AccessAwaiter {
 public:
  using AccessAwaiter::AccessAwaiter;
  void await_resume() const noexcept {}
};

class Memory::CasAwaiter : public AccessAwaiter {
 public:
  using AccessAwaiter::AccessAwaiter;
  bool await_resume() const noexcept { return a_.ok; }
};

inline Memory::ReadAwaiter Memory::read(CellId cell) {
  return ReadAwaiter(*this, Access{AccessKind::read, cell, {}, {}, {}, false});
}
inline Memory::WriteAwaiter Memory::write(CellId cell, WordPair value) {
  return WriteAwaiter(*this, Access{AccessKind::write, cell, {}, value, {}, false});
}
inline Memory::CasAwaiter Memory::cas(CellId cell, WordPair expected, WordPair desired) {
  return CasAwaiter(*this, Access{AccessKind::cas, cell, expected, desired, {}, false});
}

}  // namespace dura::pmem

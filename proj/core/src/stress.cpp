#include "dura/stress.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <iomanip>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dura/duracas.hpp"
#include "dura/durall.hpp"
#include "dura/durec.hpp"
#include "dura/durecw.hpp"
#include "dura/pmem.hpp"

namespace dura::harness {

using pmem::CrashSignal;
using pmem::Memory;
using pmem::MonitorEvent;
using pmem::MonitorKind;

namespace {

struct ZEvent {
  Seq seq = 0;
  Word packed = 0;
  HandleId handle = CellId::nil;
};

struct ThreadLog {
  std::map<CellId, std::vector<ZEvent>> moves;  // DurEC x-cell -> moves
  std::uint64_t cas_retry_exhausted = 0;
};

thread_local ThreadLog* tl_log = nullptr;

// Records DurEC moves per executor; nothing is shared between threads.
class LogSink final : public pmem::EventSink {
 public:
  void on_monitor(const MonitorEvent& m) override {
    if (tl_log == nullptr) return;
    if (m.kind == MonitorKind::ec_move) tl_log->moves[m.obj].push_back(ZEvent{m.args[0], m.args[1], m.handle});
    if (m.kind == MonitorKind::cas_retry_exhausted) ++tl_log->cas_retry_exhausted;
  }
};

struct Failures {
  std::mutex mu;
  std::uint64_t count = 0;
  std::vector<std::string> messages;
  std::size_t keep = 20;

  void add(const std::string& msg) {
    std::lock_guard<std::mutex> lock(mu);
    ++count;
    if (messages.size() < keep) messages.push_back(msg);
  }
};

struct Tally {
  std::uint64_t ops = 0;
  std::uint64_t increments = 0;
  std::uint64_t crashes = 0;
  std::uint64_t effective = 0;
  std::uint64_t reissued = 0;
};

// Runs one op with crash injection and detect-driven recovery. `run` builds
// the op task, `recover` the recovery task; returns the op's response.
template <class Run, class Recover, class Detect>
Response run_detectably(Run run, Recover recover, Detect detect, int window, double rate, std::mt19937_64& rng,
                        Seq& last_detval, Tally& t, Failures& f, const std::string& where) {
  std::bernoulli_distribution coin(rate);
  std::uniform_int_distribution<int> at(0, std::max(0, window - 1));
  for (;;) {
    const Detection d1 = run_sync(detect());
    if (d1.counter < last_detval) f.add(where + ": detect counter decreased");
    last_detval = d1.counter;

    if (coin(rng)) Memory::arm_crash(at(rng));
    try {
      const Response r = run_sync(run());
      Memory::disarm_crash();
      last_detval = run_sync(detect()).counter;
      return r;
    } catch (const CrashSignal&) {
      ++t.crashes;
    }
    // Restart: the frame is gone; recover on the same object, crashing again
    // at the same rate.
    for (;;) {
      if (coin(rng)) Memory::arm_crash(at(rng));
      try {
        run_sync(recover());
        Memory::disarm_crash();
        break;
      } catch (const CrashSignal&) {
        ++t.crashes;
      }
    }
    const Detection d2 = run_sync(detect());
    if (d2.counter < d1.counter) f.add(where + ": detect counter decreased across recovery");
    last_detval = d2.counter;
    if (d2.counter > d1.counter) {
      ++t.effective;
      return d2.response;
    }
    ++t.reissued;
  }
}

// Checks the Z history of one composite object. `critical` holds the
// critical DurEC handle ids; everything else is a casual handle.
void check_z(std::vector<ZEvent> events, Word init, bool counter, bool cas_kind, const std::set<HandleId>& critical,
             const std::string& name, Failures& f) {
  std::sort(events.begin(), events.end(), [](const ZEvent& a, const ZEvent& b) { return a.seq < b.seq; });
  durecw::Packed prev = durecw::unpack(durecw::pack(init, false));
  Seq prev_seq = 0;
  std::optional<Word> last_moved;
  for (const ZEvent& e : events) {
    const auto cur = durecw::unpack(e.packed);
    if (e.seq <= prev_seq) f.add(name + ": two Z updates share seq " + std::to_string(e.seq));
    const bool imprint = critical.count(e.handle) != 0;
    if (imprint) {
      if (cur.bit != prev.bit) f.add(name + ": imprint changed Z.bit at seq " + std::to_string(e.seq));
      if (cas_kind && cur.val == prev.val) f.add(name + ": imprint kept Z.val at seq " + std::to_string(e.seq));
      last_moved.reset();
    } else {
      if (cur.bit == prev.bit) f.add(name + ": move kept Z.bit at seq " + std::to_string(e.seq));
      if (cas_kind && last_moved && *last_moved == cur.val) {
        f.add(name + ": value " + std::to_string(cur.val) + " moved twice in a row at seq " + std::to_string(e.seq));
      }
      last_moved = cur.val;
    }
    if (counter && cur.val != prev.val + 1) {
      f.add(name + ": counter went from " + std::to_string(prev.val) + " to " + std::to_string(cur.val));
    }
    prev = cur;
    prev_seq = e.seq;
  }
}

Word random_value(std::mt19937_64& rng) { return std::uniform_int_distribution<Word>(1, (Word{1} << 20))(rng); }

Task<Response> wrap_read(duracas::Object o, duracas::Handle h) {
  const Word v = co_await o.read(h);
  co_return Response::word(v);
}
Task<Response> wrap_cas(duracas::Object o, duracas::Handle h, Word old_val, Word new_val) {
  const bool ok = co_await o.cas(h, old_val, new_val);
  co_return Response::boolean(ok);
}
Task<Response> wrap_write(duracas::Object o, duracas::Handle h, Word v) {
  co_await o.write(h, v);
  co_return Response::ack();
}
Task<Response> wrap_ll(durall::Object o, durall::Handle h) {
  const Word v = co_await o.ll(h);
  co_return Response::word(v);
}
Task<Response> wrap_vl(durall::Object o, durall::Handle h) {
  const bool ok = co_await o.vl(h);
  co_return Response::boolean(ok);
}
Task<Response> wrap_sc(durall::Object o, durall::Handle h, Word v) {
  const bool ok = co_await o.sc(h, v);
  co_return Response::boolean(ok);
}
Task<Response> wrap_write(durall::Object o, durall::Handle h, Word v) {
  co_await o.write(h, v);
  co_return Response::ack();
}

struct Plan {
  std::uint64_t increments = 0;
  std::vector<bool> is_increment;
};

Plan make_plan(const StressConfig& cfg, std::mt19937_64& rng) {
  Plan p;
  p.is_increment.resize(cfg.ops_per_thread);
  const auto target = static_cast<std::uint64_t>(cfg.increment_share * static_cast<double>(cfg.ops_per_thread));
  for (std::uint64_t i = 0; i < target; ++i) p.is_increment[i] = true;
  std::shuffle(p.is_increment.begin(), p.is_increment.end(), rng);
  p.increments = target;
  return p;
}

void duracas_worker(int id, const StressConfig& cfg, Memory& mem, duracas::Handle h, duracas::Object counter,
                    const std::vector<duracas::Object>& objects, Tally& t, ThreadLog& log, Failures& f) {
  tl_log = &log;
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(id));
  const Plan plan = make_plan(cfg, rng);
  Seq last_detval = 0;
  std::uniform_int_distribution<int> pick_obj(0, static_cast<int>(objects.size()) - 1);
  std::uniform_int_distribution<int> pick_kind(0, 2);
  std::vector<Word> seen(objects.size(), 0);
  auto detect = [&] { return duracas::detect(mem, h); };

  for (std::uint64_t i = 0; i < cfg.ops_per_thread; ++i) {
    const std::string where = "executor " + std::to_string(id) + " op " + std::to_string(i);
    ++t.ops;
    if (plan.is_increment[i]) {
      auto rec = [&] { return counter.recover(h); };
      Word v = run_detectably([&] { return wrap_read(counter, h); }, rec, detect, duracas::kReadBound,
                              cfg.crash_rate, rng, last_detval, t, f, where)
                   .a;
      for (;;) {
        const Word next = v + 1;
        const Response r = run_detectably([&] { return wrap_cas(counter, h, v, next); }, rec, detect,
                                          duracas::kCasBound, cfg.crash_rate, rng, last_detval, t, f, where);
        if (r.as_bool()) break;
        v = run_detectably([&] { return wrap_read(counter, h); }, rec, detect, duracas::kReadBound, cfg.crash_rate,
                           rng, last_detval, t, f, where)
                .a;
      }
      ++t.increments;
      continue;
    }
    const auto o = static_cast<std::size_t>(pick_obj(rng));
    const duracas::Object& obj = objects[o];
    auto rec = [&] { return obj.recover(h); };
    switch (pick_kind(rng)) {
      case 0:
        seen[o] = run_detectably([&] { return wrap_read(obj, h); }, rec, detect, duracas::kReadBound, cfg.crash_rate,
                                 rng, last_detval, t, f, where)
                      .a;
        break;
      case 1: {
        const Word v = random_value(rng);
        run_detectably([&] { return wrap_write(obj, h, v); }, rec, detect, duracas::kWriteBound, cfg.crash_rate, rng,
                       last_detval, t, f, where);
        seen[o] = v;
        break;
      }
      default: {
        Word next = random_value(rng);
        if (next == seen[o]) ++next;
        const Response r = run_detectably([&] { return wrap_cas(obj, h, seen[o], next); }, rec, detect,
                                          duracas::kCasBound, cfg.crash_rate, rng, last_detval, t, f, where);
        if (r.as_bool()) seen[o] = next;
        break;
      }
    }
  }
  tl_log = nullptr;
}

// Window for arming crashes in DuraLL ops, which have no fixed access bound.
constexpr int kDurallWindow = 64;

void durall_worker(int id, const StressConfig& cfg, Memory& mem, durall::Handle h, durall::Object counter,
                   const std::vector<durall::Object>& objects, Tally& t, ThreadLog& log, Failures& f) {
  tl_log = &log;
  std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + static_cast<std::uint64_t>(id));
  const Plan plan = make_plan(cfg, rng);
  Seq last_detval = 0;
  std::uniform_int_distribution<int> pick_obj(0, static_cast<int>(objects.size()) - 1);
  std::uniform_int_distribution<int> pick_kind(0, 3);
  // Whether this executor holds a context for each object: 0 no, 1 yes, 2 unknown (after a crash).
  std::vector<int> context(objects.size(), 0);
  auto detect = [&] { return durall::detect(mem, h); };
  const double rate = cfg.crash_rate;

  for (std::uint64_t i = 0; i < cfg.ops_per_thread; ++i) {
    const std::string where = "executor " + std::to_string(id) + " op " + std::to_string(i);
    ++t.ops;
    if (plan.is_increment[i]) {
      auto rec = [&] { return counter.recover(h); };
      for (;;) {
        const Word v = run_detectably([&] { return wrap_ll(counter, h); }, rec, detect, kDurallWindow, rate, rng,
                                      last_detval, t, f, where)
                           .a;
        const Response r = run_detectably([&] { return wrap_sc(counter, h, v + 1); }, rec, detect, kDurallWindow,
                                          rate, rng, last_detval, t, f, where);
        if (r.as_bool()) break;
      }
      ++t.increments;
      continue;
    }
    const auto o = static_cast<std::size_t>(pick_obj(rng));
    const durall::Object& obj = objects[o];
    auto rec = [&] { return obj.recover(h); };
    const std::uint64_t crashes_before = t.crashes;
    int after = context[o];
    switch (pick_kind(rng)) {
      case 0:
        run_detectably([&] { return wrap_ll(obj, h); }, rec, detect, kDurallWindow, rate, rng, last_detval, t, f,
                       where);
        after = 1;
        break;
      case 1:
        run_detectably([&] { return wrap_vl(obj, h); }, rec, detect, kDurallWindow, rate, rng, last_detval, t, f,
                       where);
        break;
      case 2: {
        const Word v = random_value(rng);
        const Response r = run_detectably([&] { return wrap_sc(obj, h, v); }, rec, detect, kDurallWindow, rate, rng,
                                          last_detval, t, f, where);
        if (r.as_bool() && context[o] == 0) f.add(where + ": SC succeeded with no LL since the last SC or Write");
        after = 0;
        break;
      }
      default: {
        const Word v = random_value(rng);
        run_detectably([&] { return wrap_write(obj, h, v); }, rec, detect, kDurallWindow, rate, rng, last_detval, t,
                       f, where);
        after = 0;
        break;
      }
    }
    context[o] = t.crashes != crashes_before ? 2 : after;
  }
  tl_log = nullptr;
}

const durecw::Object& pair_of(const duracas::Object& o) { return o.pair(); }
const durecw::Object& pair_of(const durall::Object& o) { return o.inner(); }

template <class Obj>
void final_checks(const Memory& mem, const std::vector<Obj>& all, const std::vector<ThreadLog>& logs,
                  const std::set<HandleId>& critical, bool cas_kind, StressReport& rep, Failures& f) {
  for (std::size_t i = 0; i < all.size(); ++i) {
    const durecw::Object& pair = pair_of(all[i]);
    const std::string name = i == 0 ? "counter" : "object " + std::to_string(i - 1);
    const auto w = durecw::unpack(mem.peek(pair.w().y_cell()).second);
    const auto z = durecw::unpack(mem.peek(pair.z().y_cell()).second);
    if (w.bit != z.bit) f.add(name + ": W.bit != Z.bit after all executors finished");
    if (i == 0) rep.counter_final = z.val;
    std::vector<ZEvent> events;
    for (const ThreadLog& l : logs) {
      if (auto it = l.moves.find(pair.z().x_cell()); it != l.moves.end()) {
        events.insert(events.end(), it->second.begin(), it->second.end());
      }
    }
    rep.z_events += events.size();
    check_z(std::move(events), 0, i == 0, cas_kind, critical, name, f);
  }
}

}  // namespace

StressReport stress(const StressConfig& cfg) {
  if (cfg.algorithm != Algorithm::duracas && cfg.algorithm != Algorithm::durall) {
    throw std::invalid_argument(std::string("no stress workload for ") + to_string(cfg.algorithm));
  }
  if (cfg.threads < 1 || cfg.objects < 1) throw std::invalid_argument("stress needs at least one thread and object");

  Memory mem(pmem::Mode::native);
  LogSink sink;
  mem.set_sink(&sink);
  Failures f;
  f.keep = cfg.keep_failures;
  StressReport rep;
  std::vector<Tally> tallies(static_cast<std::size_t>(cfg.threads));
  std::vector<ThreadLog> logs(static_cast<std::size_t>(cfg.threads));
  std::vector<std::thread> threads;
  std::set<HandleId> critical;
  std::chrono::steady_clock::time_point start;

  auto run_all = [&](auto&& body) {
    start = std::chrono::steady_clock::now();
    for (int i = 0; i < cfg.threads; ++i) threads.emplace_back([&, i] { body(i); });
    for (auto& th : threads) th.join();
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  if (cfg.algorithm == Algorithm::duracas) {
    std::vector<duracas::Object> all;
    for (int i = 0; i <= cfg.objects; ++i) all.push_back(duracas::Object::create(mem, 0));
    const std::vector<duracas::Object> mixed(all.begin() + 1, all.end());
    std::vector<duracas::Handle> handles;
    for (int i = 0; i < cfg.threads; ++i) {
      handles.push_back(duracas::Handle::create(mem));
      critical.insert(handles.back().critical().id());
    }
    run_all([&](int i) {
      const auto u = static_cast<std::size_t>(i);
      duracas_worker(i, cfg, mem, handles[u], all[0], mixed, tallies[u], logs[u], f);
    });
    final_checks(mem, all, logs, critical, true, rep, f);
  } else {
    std::vector<durall::Object> all;
    for (int i = 0; i <= cfg.objects; ++i) all.push_back(durall::Object::create(mem, 0));
    const std::vector<durall::Object> mixed(all.begin() + 1, all.end());
    std::vector<durall::Handle> handles;
    for (int i = 0; i < cfg.threads; ++i) {
      handles.push_back(durall::Handle::create(mem));
      critical.insert(handles.back().inner().critical().id());
    }
    run_all([&](int i) {
      const auto u = static_cast<std::size_t>(i);
      durall_worker(i, cfg, mem, handles[u], all[0], mixed, tallies[u], logs[u], f);
    });
    final_checks(mem, all, logs, critical, false, rep, f);
  }

  const auto per_thread = static_cast<std::uint64_t>(cfg.increment_share * static_cast<double>(cfg.ops_per_thread));
  rep.counter_expected = per_thread * static_cast<std::uint64_t>(cfg.threads);
  for (const Tally& t : tallies) {
    rep.ops += t.ops;
    rep.increments += t.increments;
    rep.crashes += t.crashes;
    rep.effective += t.effective;
    rep.reissued += t.reissued;
  }
  for (const ThreadLog& l : logs) rep.cas_retry_exhausted += l.cas_retry_exhausted;
  if (rep.counter_final != rep.counter_expected) {
    f.add("counter is " + std::to_string(rep.counter_final) + ", expected " + std::to_string(rep.counter_expected));
  }
  if (rep.cas_retry_exhausted != 0) f.add("a CAS exhausted its retry loop");
  rep.failures = f.count;
  rep.messages = std::move(f.messages);
  return rep;
}

std::string to_string(const StressReport& r) {
  std::ostringstream os;
  os << "ops " << r.ops << " in " << std::fixed << std::setprecision(2) << r.seconds << " s ("
     << std::setprecision(0) << r.ops_per_second() << " ops/s)\n";
  os << "crashes " << r.crashes << ", effective " << r.effective << ", reissued " << r.reissued << "\n";
  os << "counter " << r.counter_final << " (expected " << r.counter_expected << "), increments " << r.increments
     << "\n";
  os << "Z updates checked " << r.z_events << ", cas retry exhausted " << r.cas_retry_exhausted << "\n";
  os << "failures " << r.failures << "\n";
  for (const auto& m : r.messages) os << "failure: " << m << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// bench

namespace {

template <class Body>
BenchRow timed(const std::string& name, const BenchConfig& cfg, Body body) {
  std::vector<std::uint64_t> accesses(static_cast<std::size_t>(cfg.threads), 0);
  std::vector<std::thread> threads;
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < cfg.threads; ++i) {
    threads.emplace_back([&, i] {
      std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(i));
      const std::uint64_t before = Memory::thread_events();
      const std::uint64_t extra = body(i, rng);
      accesses[static_cast<std::size_t>(i)] = Memory::thread_events() - before + extra;
    });
  }
  for (auto& th : threads) th.join();
  BenchRow row;
  row.name = name;
  row.threads = cfg.threads;
  row.ops = cfg.ops_per_thread * static_cast<std::uint64_t>(cfg.threads);
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::uint64_t total = 0;
  for (auto a : accesses) total += a;
  row.accesses_per_op = static_cast<double>(total) / static_cast<double>(row.ops);
  return row;
}

}  // namespace

std::vector<BenchRow> bench(const BenchConfig& cfg) {
  if (cfg.threads < 1 || cfg.objects < 1) throw std::invalid_argument("bench needs at least one thread and object");
  std::vector<BenchRow> rows;
  const auto n = static_cast<std::size_t>(cfg.objects);
  auto is_read = [&](std::mt19937_64& rng) { return std::bernoulli_distribution(cfg.read_share)(rng); };
  auto pick = [&](std::mt19937_64& rng) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  {
    std::vector<std::atomic<Word>> cells(n);
    for (auto& c : cells) c.store(0);
    rows.push_back(timed("hw-cas", cfg, [&](int, std::mt19937_64& rng) {
      std::uint64_t acc = 0;
      for (std::uint64_t k = 0; k < cfg.ops_per_thread; ++k) {
        auto& c = cells[pick(rng)];
        Word v = c.load();
        ++acc;
        if (!is_read(rng)) {
          c.compare_exchange_strong(v, v + 1);
          ++acc;
        }
      }
      return acc;
    }));
  }
  {
    Memory mem(pmem::Mode::native);
    std::vector<durec::Object> objs;
    for (std::size_t i = 0; i < n; ++i) objs.push_back(durec::Object::create(mem, 0));
    std::vector<durec::Handle> hs;
    for (int i = 0; i < cfg.threads; ++i) hs.push_back(durec::Handle::create(mem));
    rows.push_back(timed("durec", cfg, [&](int i, std::mt19937_64& rng) {
      const auto h = hs[static_cast<std::size_t>(i)];
      std::vector<Seq> seq(n, 0);
      for (std::uint64_t k = 0; k < cfg.ops_per_thread; ++k) {
        const std::size_t o = pick(rng);
        if (is_read(rng)) {
          seq[o] = run_sync(objs[o].ecll(h)).seq;
        } else {
          (void)run_sync(objs[o].ecsc(h, seq[o], k));
        }
      }
      return std::uint64_t{0};
    }));
  }
  {
    Memory mem(pmem::Mode::native);
    std::vector<durecw::Object> objs;
    for (std::size_t i = 0; i < n; ++i) objs.push_back(durecw::Object::create(mem, 0));
    std::vector<durecw::Handle> hs;
    for (int i = 0; i < cfg.threads; ++i) hs.push_back(durecw::Handle::create(mem));
    rows.push_back(timed("durecw", cfg, [&](int i, std::mt19937_64& rng) {
      const auto h = hs[static_cast<std::size_t>(i)];
      for (std::uint64_t k = 0; k < cfg.ops_per_thread; ++k) {
        const std::size_t o = pick(rng);
        if (is_read(rng)) {
          (void)run_sync(objs[o].ecll(h));
        } else {
          run_sync(objs[o].write(h, k));
        }
      }
      return std::uint64_t{0};
    }));
  }
  {
    Memory mem(pmem::Mode::native);
    std::vector<durall::Object> objs;
    for (std::size_t i = 0; i < n; ++i) objs.push_back(durall::Object::create(mem, 0));
    std::vector<durall::Handle> hs;
    for (int i = 0; i < cfg.threads; ++i) hs.push_back(durall::Handle::create(mem));
    rows.push_back(timed("durall", cfg, [&](int i, std::mt19937_64& rng) {
      const auto h = hs[static_cast<std::size_t>(i)];
      for (std::uint64_t k = 0; k < cfg.ops_per_thread; ++k) {
        const std::size_t o = pick(rng);
        if (is_read(rng)) {
          (void)run_sync(objs[o].ll(h));
        } else {
          (void)run_sync(objs[o].sc(h, k));
        }
      }
      return std::uint64_t{0};
    }));
  }
  {
    Memory mem(pmem::Mode::native);
    std::vector<duracas::Object> objs;
    for (std::size_t i = 0; i < n; ++i) objs.push_back(duracas::Object::create(mem, 0));
    std::vector<duracas::Handle> hs;
    for (int i = 0; i < cfg.threads; ++i) hs.push_back(duracas::Handle::create(mem));
    rows.push_back(timed("duracas", cfg, [&](int i, std::mt19937_64& rng) {
      const auto h = hs[static_cast<std::size_t>(i)];
      std::vector<Word> seen(n, 0);
      for (std::uint64_t k = 0; k < cfg.ops_per_thread; ++k) {
        const std::size_t o = pick(rng);
        if (is_read(rng)) {
          seen[o] = run_sync(objs[o].read(h));
        } else {
          const Word next = seen[o] + 1;
          if (run_sync(objs[o].cas(h, seen[o], next))) seen[o] = next;
        }
      }
      return std::uint64_t{0};
    }));
  }
  return rows;
}

std::string format_table(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(10) << "algorithm" << std::right << std::setw(8) << "threads" << std::setw(12) << "ops"
     << std::setw(10) << "Mops/s" << std::setw(10) << "ns/op" << std::setw(12) << "accesses/op" << "\n";
  for (const BenchRow& r : rows) {
    os << std::left << std::setw(10) << r.name << std::right << std::setw(8) << r.threads << std::setw(12) << r.ops
       << std::fixed << std::setprecision(2) << std::setw(10) << r.mops() << std::setprecision(1) << std::setw(10)
       << r.ns_per_op() << std::setprecision(2) << std::setw(12) << r.accesses_per_op << "\n";
  }
  return os.str();
}

}  // namespace dura::harness

#include <doctest.h>

#include <thread>
#include <vector>

#include "dura/pmem.hpp"
#include "dura/task.hpp"

using namespace dura;
using pmem::Memory;
using pmem::Mode;

namespace {

struct Recorder : pmem::EventSink {
  std::vector<pmem::Access> accesses;
  int allocs = 0;
  void on_alloc(CellId, const WordPair&, pmem::CellUse) override { ++allocs; }
  void on_access(const pmem::Access& a) override { accesses.push_back(a); }
};

Task<WordPair> read_task(Memory& m, CellId c) {
  const WordPair v = co_await m.read(c);
  co_return v;
}

Task<bool> cas_task(Memory& m, CellId c, WordPair e, WordPair d) {
  const bool ok = co_await m.cas(c, e, d);
  co_return ok;
}

Task<void> write_task(Memory& m, CellId c, WordPair v) { co_await m.write(c, v); }

Task<int> three_reads(Memory& m, CellId c) {
  for (int i = 0; i < 3; ++i) {
    auto v = co_await m.read(c);
    (void)v;
  }
  co_return 3;
}

}  // namespace

TEST_CASE("native cells: read, write, cas") {
  Memory m(Mode::native);
  const CellId c = m.alloc(WordPair{1, 2});
  CHECK(run_sync(read_task(m, c)) == WordPair{1, 2});
  run_sync(write_task(m, c, WordPair{3, 4}));
  CHECK(m.peek(c) == WordPair{3, 4});
  CHECK_FALSE(run_sync(cas_task(m, c, WordPair{3, 5}, WordPair{9, 9})));
  CHECK(m.peek(c) == WordPair{3, 4});
  CHECK(run_sync(cas_task(m, c, WordPair{3, 4}, WordPair{~Word{0}, 7})));
  CHECK(m.peek(c) == WordPair{~Word{0}, 7});
}

TEST_CASE("allocation accounting separates bookkeeping cells") {
  Memory m(Mode::native);
  Recorder r;
  m.set_sink(&r);
  const CellId a = m.alloc_block(5, WordPair{});
  const CellId b = m.alloc(WordPair{}, pmem::CellUse::bookkeeping);
  CHECK(to_u64(a) != 0);
  CHECK(to_u64(b) == to_u64(a) + 5);
  const auto s = m.stats();
  CHECK(s.cells_allocated == 5);
  CHECK(s.bookkeeping_cells == 1);
  CHECK(r.allocs == 6);
  CHECK(m.allocated(a));
  CHECK_FALSE(m.allocated(cell_at(to_u64(b) + 1)));
  CHECK_THROWS(m.alloc_block(0, WordPair{}));
}

TEST_CASE("block allocation spans chunk boundaries") {
  Memory m(Mode::native);
  std::vector<CellId> cells;
  for (Word i = 0; i < 1000; ++i) cells.push_back(m.alloc(WordPair{i, i + 1}));
  const CellId big = m.alloc_block(300, WordPair{7, 7});
  for (Word i = 0; i < 1000; ++i) CHECK(m.peek(cells[i]) == WordPair{i, i + 1});
  CHECK(m.peek(cell_at(to_u64(big) + 299)) == WordPair{7, 7});
  CHECK(m.stats().cells_allocated == 1300);
}

TEST_CASE("every access is counted once") {
  Memory m(Mode::native);
  Recorder r;
  m.set_sink(&r);
  const CellId c = m.alloc(WordPair{});
  const auto before = m.stats().events;
  CHECK(run_sync(three_reads(m, c)) == 3);
  CHECK(m.stats().events - before == 3);
  REQUIRE(r.accesses.size() == 3);
  CHECK(r.accesses[0].kind == pmem::AccessKind::read);
}

TEST_CASE("simulated accesses park until performed") {
  Memory m(Mode::simulated);
  pmem::Parking park;
  m.set_parking(&park);
  const CellId c = m.alloc(WordPair{5, 6});
  auto t = three_reads(m, c);
  t.resume();
  int performed = 0;
  while (!t.done()) {
    REQUIRE(park.parked());
    auto h = park.handle;
    m.perform(*park.access);
    park.handle = {};
    ++performed;
    h.resume();
  }
  CHECK(performed == 3);
  CHECK(t.result() == 3);
}

TEST_CASE("immediate scope runs simulated accesses on the spot") {
  Memory m(Mode::simulated);
  const CellId c = m.alloc(WordPair{5, 6});
  Memory::ImmediateScope now(m);
  CHECK(run_sync(read_task(m, c)) == WordPair{5, 6});
}

TEST_CASE("armed crash fires at the chosen access") {
  Memory m(Mode::native);
  const CellId c = m.alloc(WordPair{});
  Memory::arm_crash(2);
  CHECK_THROWS_AS(run_sync(three_reads(m, c)), pmem::CrashSignal);
  CHECK(run_sync(three_reads(m, c)) == 3);  // disarmed after firing
  Memory::arm_crash(5);
  Memory::disarm_crash();
  CHECK(run_sync(three_reads(m, c)) == 3);
}

TEST_CASE("concurrent cas increments lose nothing") {
  Memory m(Mode::native);
  const CellId c = m.alloc(WordPair{0, 0});
  constexpr int kThreads = 4;
  constexpr int kPerThread = 5000;
  std::vector<std::thread> ts;
  for (int t = 0; t < kThreads; ++t) {
    ts.emplace_back([&] {
      for (int i = 0; i < kPerThread; ++i) {
        for (;;) {
          const WordPair cur = m.peek(c);
          if (run_sync(cas_task(m, c, cur, WordPair{cur.first + 1, cur.second + 2}))) break;
        }
      }
    });
  }
  for (auto& t : ts) t.join();
  CHECK(m.peek(c) == WordPair{kThreads * kPerThread, 2 * kThreads * kPerThread});
}

// Sequential behaviour, access counts, space and single-process crash
// recovery of the four objects, on the native backend.

#include <doctest.h>

#include <map>
#include <optional>
#include <random>
#include <set>

#include "dura/duracas.hpp"
#include "dura/durall.hpp"
#include "dura/durec.hpp"
#include "dura/durecw.hpp"
#include "dura/pmem.hpp"

using namespace dura;
using pmem::Memory;
using pmem::Mode;

namespace {

std::uint64_t events(const Memory& m) { return m.stats().events; }
std::uint64_t cells(const Memory& m) { return m.stats().cells_allocated; }

// Runs `make()` with a crash armed at access k. Returns true if the crash fired.
template <class Make>
bool crash_at(int k, Make make) {
  Memory::arm_crash(k);
  bool fired = false;
  try {
    make();
  } catch (const pmem::CrashSignal&) {
    fired = true;
  }
  Memory::disarm_crash();
  return fired;
}

}  // namespace

// ---------------------------------------------------------------- DurEC

TEST_CASE("durec: space is two cells per object and per handle") {
  Memory m(Mode::native);
  for (int i = 0; i < 7; ++i) durec::Object::create(m, 0);
  for (int i = 0; i < 5; ++i) durec::Handle::create(m);
  CHECK(cells(m) == 2 * 7 + 2 * 5);
}

TEST_CASE("durec: sequential ops follow the EC type") {
  Memory m(Mode::native);
  auto o = durec::Object::create(m, 42);
  auto h1 = durec::Handle::create(m);
  auto h2 = durec::Handle::create(m);

  const auto v0 = run_sync(o.ecll(h1));
  CHECK(v0.val == 42);
  CHECK(run_sync(o.ecvl(h2, v0.seq)));
  CHECK(run_sync(o.ecsc(h1, v0.seq, 7)));
  const auto v1 = run_sync(o.ecll(h2));
  CHECK(v1.val == 7);
  CHECK(v1.seq > v0.seq);
  CHECK_FALSE(run_sync(o.ecvl(h1, v0.seq)));
  CHECK_FALSE(run_sync(o.ecsc(h2, v0.seq, 9)));
  CHECK(run_sync(o.ecll(h1)).val == 7);
  CHECK(run_sync(o.ecsc(h2, v1.seq, 7)));  // same value, new context
  CHECK(run_sync(o.ecll(h1)).seq > v1.seq);
}

TEST_CASE("durec: random sequential runs match a plain model and stay within bounds") {
  Memory m(Mode::native);
  std::mt19937_64 rng(11);
  std::vector<durec::Object> objs;
  for (int i = 0; i < 3; ++i) objs.push_back(durec::Object::create(m, static_cast<Word>(i)));
  std::vector<durec::Handle> hs;
  for (int i = 0; i < 3; ++i) hs.push_back(durec::Handle::create(m));

  // model: per object value and number of successful SCs; contexts seen per handle
  std::vector<Word> val{0, 1, 2};
  std::vector<int> gen(3, 0);
  std::map<std::pair<int, int>, std::pair<Seq, int>> ctx;  // (handle, obj) -> (seq, gen at LL)
  std::vector<std::uint64_t> detvals(3, 0);

  for (int step = 0; step < 3000; ++step) {
    const int oi = static_cast<int>(rng() % 3);
    const int hi = static_cast<int>(rng() % 3);
    const auto& o = objs[oi];
    const auto& h = hs[hi];
    const auto before = events(m);
    switch (rng() % 3) {
      case 0: {
        const auto v = run_sync(o.ecll(h));
        CHECK(v.val == val[oi]);
        ctx[{hi, oi}] = {v.seq, gen[oi]};
        CHECK(events(m) - before <= durec::kEcllBound);
        break;
      }
      case 1: {
        auto it = ctx.find({hi, oi});
        if (it == ctx.end()) break;
        CHECK(run_sync(o.ecvl(h, it->second.first)) == (it->second.second == gen[oi]));
        CHECK(events(m) - before <= durec::kEcvlBound);
        break;
      }
      default: {
        auto it = ctx.find({hi, oi});
        if (it == ctx.end()) break;
        const Word v = rng() % 1000;
        const bool expect = it->second.second == gen[oi];
        CHECK(run_sync(o.ecsc(h, it->second.first, v)) == expect);
        if (expect) {
          val[oi] = v;
          ++gen[oi];
        }
        CHECK(events(m) - before <= durec::kEcscBound);
        const auto d = run_sync(durec::detect(m, h));
        CHECK((d.counter > detvals[hi]) == expect);
        detvals[hi] = d.counter;
      }
    }
  }
}

TEST_CASE("durec: a crash at any access leaves the ECSC all-or-nothing and detect tells which") {
  for (int k = 0; k <= durec::kEcscBound; ++k) {
    CAPTURE(k);
    Memory m(Mode::native);
    auto o = durec::Object::create(m, 1);
    auto h = durec::Handle::create(m);
    const auto v0 = run_sync(o.ecll(h));
    const auto d0 = run_sync(durec::detect(m, h));
    const bool crashed = crash_at(k, [&] { (void)run_sync(o.ecsc(h, v0.seq, 2)); });
    if (crashed) {
      const auto before = events(m);
      run_sync(o.recover(h));
      CHECK(events(m) - before <= durec::kRecoverBound);
    }
    const auto d1 = run_sync(durec::detect(m, h));
    const auto now = run_sync(o.ecll(h));
    if (d1.counter > d0.counter) {
      CHECK(now.val == 2);
      CHECK(d1.response == Response::boolean(true));
    } else {
      CHECK(crashed);
      CHECK(now.val == 1);
      CHECK(now.seq == v0.seq);
    }
  }
}

// ---------------------------------------------------------------- DurECW

TEST_CASE("durecw: writes and ecsc follow the writable EC type") {
  Memory m(Mode::native);
  auto o = durecw::Object::create(m, 5);
  auto h1 = durecw::Handle::create(m);
  auto h2 = durecw::Handle::create(m);
  CHECK(cells(m) == durecw::kObjectCells + 2 * durecw::kHandleCells);

  const auto a = run_sync(o.ecll(h1));
  CHECK(a.val == 5);
  run_sync(o.write(h2, 5));  // same value still invalidates the context
  const auto b = run_sync(o.ecll(h1));
  CHECK(b.val == 5);
  CHECK(b.seq > a.seq);
  CHECK_FALSE(run_sync(o.ecsc(h1, a.seq, 6)));
  CHECK(run_sync(o.ecsc(h1, b.seq, 6)));
  CHECK(run_sync(o.ecll(h2)).val == 6);
  CHECK(run_sync(o.ecvl(h2, run_sync(o.ecll(h2)).seq)));
}

TEST_CASE("durecw: random sequential runs stay within the declared bounds") {
  Memory m(Mode::native);
  std::mt19937_64 rng(5);
  auto o = durecw::Object::create(m, 0);
  std::vector<durecw::Handle> hs{durecw::Handle::create(m), durecw::Handle::create(m)};
  Word val = 0;
  int gen = 0;
  std::map<int, std::pair<Seq, int>> ctx;
  for (int step = 0; step < 2000; ++step) {
    const int hi = static_cast<int>(rng() % 2);
    const auto before = events(m);
    switch (rng() % 3) {
      case 0: {
        const auto v = run_sync(o.ecll(hs[hi]));
        CHECK(v.val == val);
        ctx[hi] = {v.seq, gen};
        break;
      }
      case 1: {
        const Word v = rng() % 4;
        run_sync(o.write(hs[hi], v));
        val = v;
        ++gen;
        CHECK(events(m) - before <= durecw::kWriteBound);
        break;
      }
      default: {
        if (!ctx.count(hi)) break;
        const Word v = rng() % 4;
        const bool expect = ctx[hi].second == gen;
        CHECK(run_sync(o.ecsc(hs[hi], ctx[hi].first, v)) == expect);
        if (expect) val = v, ++gen;
        CHECK(events(m) - before <= durecw::kEcscBound);
      }
    }
  }
}

TEST_CASE("durecw: payloads wider than 63 bits are rejected") {
  CHECK_THROWS_AS(durecw::check_payload(kMaxPayload + 1), std::out_of_range);
  CHECK_NOTHROW(durecw::check_payload(kMaxPayload));
  CHECK(durecw::unpack(durecw::pack(kMaxPayload, true)) == durecw::Packed{kMaxPayload, true});
}

// ---------------------------------------------------------------- DuraCAS

TEST_CASE("duracas: space is 4m + 5n") {
  Memory m(Mode::native);
  for (int i = 0; i < 6; ++i) duracas::Object::create(m, 0);
  for (int i = 0; i < 4; ++i) duracas::Handle::create(m);
  CHECK(cells(m) == 4 * 6 + 5 * 4);
}

TEST_CASE("duracas: random sequential runs match a register model") {
  Memory m(Mode::native);
  std::mt19937_64 rng(3);
  auto o = duracas::Object::create(m, 0);
  std::vector<duracas::Handle> hs{duracas::Handle::create(m), duracas::Handle::create(m), duracas::Handle::create(m)};
  Word val = 0;
  std::vector<std::uint64_t> detvals(3, 0);
  for (int step = 0; step < 5000; ++step) {
    const int hi = static_cast<int>(rng() % 3);
    const auto& h = hs[hi];
    const auto before = events(m);
    bool visible = false;
    Response r;
    switch (rng() % 3) {
      case 0:
        CHECK(run_sync(o.read(h)) == val);
        CHECK(events(m) - before <= duracas::kReadBound);
        continue;
      case 1: {
        const Word v = rng() % 3;
        run_sync(o.write(h, v));
        CHECK(events(m) - before <= duracas::kWriteBound);
        visible = v != val;
        val = v;
        r = Response::ack();
        break;
      }
      default: {
        const Word a = rng() % 3;
        const Word b = rng() % 3;
        const bool expect = a == val;
        CHECK(run_sync(o.cas(h, a, b)) == expect);
        CHECK(events(m) - before <= duracas::kCasBound);
        visible = expect && a != b;
        if (expect) val = b;
        r = Response::boolean(true);
        break;
      }
    }
    const auto d = run_sync(duracas::detect(m, h));
    CHECK((d.counter > detvals[hi]) == visible);
    if (visible) CHECK(equivalent(d.response, r));
    detvals[hi] = d.counter;
  }
}

TEST_CASE("duracas: crashed cas and write are all-or-nothing, and detect says which") {
  for (int op = 0; op < 2; ++op) {
    for (int k = 0; k <= duracas::kWriteBound; ++k) {
      CAPTURE(op);
      CAPTURE(k);
      Memory m(Mode::native);
      auto o = duracas::Object::create(m, 1);
      auto h = duracas::Handle::create(m);
      auto other = duracas::Handle::create(m);
      run_sync(o.write(other, 3));
      const auto d0 = run_sync(duracas::detect(m, h));
      const bool crashed = crash_at(k, [&] {
        if (op == 0) (void)run_sync(o.cas(h, 3, 4));
        else run_sync(o.write(h, 4));
      });
      if (!crashed) break;
      const auto before = events(m);
      run_sync(o.recover(h));
      CHECK(events(m) - before <= duracas::kRecoverBound);
      const auto d1 = run_sync(duracas::detect(m, h));
      const Word now = run_sync(o.read(other));
      if (d1.counter > d0.counter) {
        CHECK(now == 4);
        CHECK(equivalent(d1.response, op == 0 ? Response::boolean(true) : Response::ack()));
      } else {
        CHECK(now == 3);
        // Re-issuing must now succeed.
        if (op == 0) CHECK(run_sync(o.cas(h, 3, 4)));
        else run_sync(o.write(h, 4));
        CHECK(run_sync(o.read(other)) == 4);
        CHECK(run_sync(duracas::detect(m, h)).counter > d0.counter);
      }
    }
  }
}

TEST_CASE("duracas: a trivial write and a trivial cas are invisible") {
  Memory m(Mode::native);
  auto o = duracas::Object::create(m, 9);
  auto h = duracas::Handle::create(m);
  const auto z0 = m.peek(o.pair().z().y_cell());
  const auto d0 = run_sync(duracas::detect(m, h));
  run_sync(o.write(h, 9));
  CHECK(run_sync(o.cas(h, 9, 9)));
  CHECK(m.peek(o.pair().z().y_cell()) == z0);
  CHECK(run_sync(duracas::detect(m, h)).counter == d0.counter);
}

// ---------------------------------------------------------------- DuraLL

TEST_CASE("contexts table: random puts and erases match std::map") {
  Memory m(Mode::native);
  const CellId anchor = m.alloc(WordPair{17, 0});
  const auto table = durall::ContextMap::at(m, anchor);
  CHECK(table.peek_capacity() == 0);
  CHECK(cells(m) == 1);

  std::mt19937_64 rng(8);
  std::map<Word, Seq> model;
  std::size_t peak = 0;
  for (int step = 0; step < 20000; ++step) {
    const Word key = 1 + rng() % 40;
    switch (rng() % 3) {
      case 0: {
        const Seq s = rng() % 1000 + 1;
        run_sync(table.put(cell_at(key), s));
        model[key] = s;
        break;
      }
      case 1:
        run_sync(table.erase(cell_at(key)));
        model.erase(key);
        break;
      default: {
        const auto got = run_sync(table.get(cell_at(key)));
        auto it = model.find(key);
        CHECK(got.has_value() == (it != model.end()));
        if (got && it != model.end()) CHECK(*got == it->second);
      }
    }
    peak = std::max(peak, model.size());
    REQUIRE(table.peek_size() == model.size());
  }
  CHECK(m.peek(anchor).first == 17);  // the owner's word is left alone
  // header + current table + leaked earlier tables (a geometric series)
  CHECK(cells(m) - 1 <= 1 + 8 * (peak + 1));
}

TEST_CASE("durall: LL/SC semantics with per-handle contexts") {
  Memory m(Mode::native);
  auto o = durall::Object::create(m, 3);
  auto p = durall::Handle::create(m);
  auto q = durall::Handle::create(m);
  CHECK(cells(m) == 4 + 2 * 4);

  CHECK_FALSE(run_sync(o.vl(p)));      // no LL yet
  CHECK_FALSE(run_sync(o.sc(p, 1)));
  CHECK(run_sync(o.ll(p)) == 3);
  CHECK(run_sync(o.ll(q)) == 3);
  CHECK(run_sync(o.vl(p)));
  CHECK(run_sync(o.sc(q, 4)));
  CHECK_FALSE(run_sync(o.vl(p)));
  CHECK_FALSE(run_sync(o.sc(p, 5)));
  CHECK_FALSE(run_sync(o.sc(q, 6)));  // the context was used up
  CHECK(run_sync(o.ll(p)) == 4);
  run_sync(o.write(q, 4));
  CHECK_FALSE(run_sync(o.sc(p, 7)));  // write of the same value still breaks the link
  CHECK(run_sync(o.ll(q)) == 4);
}

TEST_CASE("durall: random sequential runs match a per-process context model") {
  Memory m(Mode::native);
  std::mt19937_64 rng(21);
  std::vector<durall::Object> objs;
  for (int i = 0; i < 4; ++i) objs.push_back(durall::Object::create(m, 0));
  std::vector<durall::Handle> hs;
  for (int i = 0; i < 3; ++i) hs.push_back(durall::Handle::create(m));
  std::vector<Word> val(4, 0);
  std::vector<int> gen(4, 0);
  std::map<std::pair<int, int>, int> linked;  // (handle, obj) -> gen at LL
  std::vector<std::uint64_t> detvals(3, 0);

  for (int step = 0; step < 5000; ++step) {
    const int oi = static_cast<int>(rng() % 4);
    const int hi = static_cast<int>(rng() % 3);
    const auto& o = objs[oi];
    const auto& h = hs[hi];
    bool visible = false;
    switch (rng() % 4) {
      case 0:
        CHECK(run_sync(o.ll(h)) == val[oi]);
        linked[{hi, oi}] = gen[oi];
        break;
      case 1: {
        auto it = linked.find({hi, oi});
        CHECK(run_sync(o.vl(h)) == (it != linked.end() && it->second == gen[oi]));
        break;
      }
      case 2: {
        auto it = linked.find({hi, oi});
        const bool expect = it != linked.end() && it->second == gen[oi];
        const Word v = rng() % 5;
        CHECK(run_sync(o.sc(h, v)) == expect);
        linked.erase({hi, oi});
        if (expect) val[oi] = v, ++gen[oi], visible = true;
        break;
      }
      default: {
        const Word v = rng() % 5;
        run_sync(o.write(h, v));
        linked.erase({hi, oi});
        val[oi] = v;
        ++gen[oi];
        visible = true;
      }
    }
    const auto d = run_sync(durall::detect(m, h));
    CHECK((d.counter > detvals[hi]) == visible);
    detvals[hi] = d.counter;
  }
}

TEST_CASE("durall: a crashed SC is all-or-nothing and a crashed LL can be repeated") {
  for (int k = 0; k < 80; ++k) {
    CAPTURE(k);
    Memory m(Mode::native);
    auto o = durall::Object::create(m, 1);
    auto h = durall::Handle::create(m);
    auto other = durall::Handle::create(m);
    CHECK(run_sync(o.ll(h)) == 1);
    const auto d0 = run_sync(durall::detect(m, h));
    const bool crashed = crash_at(k, [&] { (void)run_sync(o.sc(h, 2)); });
    if (!crashed) break;
    run_sync(o.recover(h));
    const auto d1 = run_sync(durall::detect(m, h));
    const Word now = run_sync(o.ll(other));
    if (d1.counter > d0.counter) {
      CHECK(now == 2);
    } else {
      CHECK(now == 1);
    }
  }
  for (int k = 0; k < 80; ++k) {
    CAPTURE(k);
    Memory m(Mode::native);
    auto o = durall::Object::create(m, 1);
    auto h = durall::Handle::create(m);
    const bool crashed = crash_at(k, [&] { (void)run_sync(o.ll(h)); });
    if (!crashed) break;
    run_sync(o.recover(h));
    CHECK(run_sync(o.ll(h)) == 1);
    CHECK(run_sync(o.sc(h, 5)));
  }
}

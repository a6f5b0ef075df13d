#include <doctest.h>

#include <random>

#include "brute_force.hpp"
#include "dura/verify.hpp"

using namespace dura;
using namespace dura::verify;
using trace::Event;
using trace::EventKind;

namespace {

OpRecord op(int proc, std::string name, std::vector<Word> args, std::uint64_t inv, std::uint64_t end, Response r,
            OpStatus st = OpStatus::completed) {
  OpRecord o;
  o.proc = proc;
  o.handle = static_cast<std::uint64_t>(proc) + 1;
  o.obj = 1;
  o.name = std::move(name);
  o.args = std::move(args);
  o.invoke = inv;
  o.end = end;
  o.response = r;
  o.status = st;
  o.crashed = st == OpStatus::effective || st == OpStatus::repeatable;
  return o;
}

bool ok(const std::vector<OpRecord>& ops, spec::SpecKind k, Word init = 0) {
  return check_durable(ops, k, {{1, init}}).ok;
}

struct TraceBuilder {
  trace::Trace t;
  std::uint64_t step = 0;
  Event& add(EventKind k, int proc, std::string op = "", std::vector<Word> args = {}, Response r = {}) {
    Event e;
    e.step = step++;
    e.proc = proc;
    e.handle = static_cast<std::uint64_t>(proc) + 10;
    e.obj = 1;
    e.kind = k;
    e.op = std::move(op);
    e.args = std::move(args);
    e.result = r;
    t.push_back(e);
    return t.back();
  }
  void detect(int proc, const char* phase, std::uint64_t d, Response r = Response::boolean(true)) {
    add(EventKind::detect, proc, phase, {}, r).counter = d;
  }
};

}  // namespace

TEST_CASE("wcas: overlapping ops may take either order") {
  // p0 cas(0,1) overlaps p1 read -> 1 and p1 read -> 0 in sequence.
  auto a = op(0, "cas", {0, 1}, 0, 10, Response::boolean(true));
  auto r1 = op(1, "read", {}, 1, 2, Response::word(0));
  auto r2 = op(1, "read", {}, 3, 4, Response::word(1));
  CHECK(ok({a, r1, r2}, spec::SpecKind::wcas));
  // Values going back in time are not allowed.
  auto r3 = op(1, "read", {}, 1, 2, Response::word(1));
  auto r4 = op(1, "read", {}, 3, 4, Response::word(0));
  CHECK_FALSE(ok({a, r3, r4}, spec::SpecKind::wcas));
}

TEST_CASE("wcas: real-time order is respected") {
  auto w = op(0, "write", {5}, 0, 1, Response::ack());
  auto r = op(1, "read", {}, 2, 3, Response::word(0));
  CHECK_FALSE(ok({w, r}, spec::SpecKind::wcas));
  r.invoke = 0;
  CHECK(ok({w, r}, spec::SpecKind::wcas));
}

TEST_CASE("crashed ops: effective ones must happen, repeatable ones may") {
  auto w = op(0, "write", {5}, 0, 4, Response::ack(), OpStatus::effective);
  auto r = op(1, "read", {}, 6, 7, Response::word(0));
  CHECK_FALSE(ok({w, r}, spec::SpecKind::wcas));

  w.status = OpStatus::repeatable;
  CHECK(ok({w, r}, spec::SpecKind::wcas));
  r.response = Response::word(5);
  CHECK(ok({w, r}, spec::SpecKind::wcas));

  // A crashed op only takes effect inside its interval, which ends at recovery.
  auto late = op(1, "read", {}, 1, 2, Response::word(5));
  auto w2 = op(0, "write", {5}, 3, 4, Response::ack(), OpStatus::repeatable);
  CHECK_FALSE(ok({w2, late}, spec::SpecKind::wcas));
}

TEST_CASE("pending ops are optional with any response") {
  auto c = op(0, "cas", {0, 3}, 0, kNever, Response::none(), OpStatus::pending);
  auto r = op(1, "read", {}, 5, 6, Response::word(3));
  CHECK(ok({c, r}, spec::SpecKind::wcas));
  r.response = Response::word(0);
  CHECK(ok({c, r}, spec::SpecKind::wcas));
  r.response = Response::word(4);
  CHECK_FALSE(ok({c, r}, spec::SpecKind::wcas));
}

TEST_CASE("ec: seqs are matched by renaming, not by value") {
  // The implementation reports seqs 0 and 37; only their identity matters.
  auto ll1 = op(0, "ecll", {}, 0, 1, Response::pair(0, 4));
  auto sc = op(0, "ecsc", {0, 9}, 2, 3, Response::boolean(true));
  auto ll2 = op(1, "ecll", {}, 4, 5, Response::pair(37, 9));
  auto vl = op(1, "ecvl", {37}, 6, 7, Response::boolean(true));
  CHECK(ok({ll1, sc, ll2, vl}, spec::SpecKind::ec, 4));
  // Seq 0 names the initial context and cannot reappear later.
  auto bad = op(1, "ecll", {}, 4, 5, Response::pair(0, 9));
  CHECK_FALSE(ok({ll1, sc, bad}, spec::SpecKind::ec, 4));
  // Two different contexts cannot share a seq.
  auto sc2 = op(1, "ecsc", {37, 1}, 8, 9, Response::boolean(true));
  auto ll3 = op(0, "ecll", {}, 10, 11, Response::pair(37, 1));
  CHECK_FALSE(ok({ll1, sc, ll2, vl, sc2, ll3}, spec::SpecKind::ec, 4));
}

TEST_CASE("llsc: an SC needs the same process's LL") {
  auto ll = op(0, "ll", {}, 0, 1, Response::word(0));
  auto sc = op(1, "sc", {3}, 2, 3, Response::boolean(true));
  CHECK_FALSE(ok({ll, sc}, spec::SpecKind::llsc));
  sc.proc = 0;
  sc.handle = 1;
  CHECK(ok({ll, sc}, spec::SpecKind::llsc));
}

TEST_CASE("witnesses replay through the oracle") {
  auto a = op(0, "cas", {0, 1}, 0, 10, Response::boolean(true));
  auto b = op(1, "cas", {0, 2}, 1, 9, Response::boolean(false));
  auto c = op(1, "read", {}, 11, 12, Response::word(1));
  const std::vector<OpRecord> ops{a, b, c};
  const auto v = check_durable(ops, spec::SpecKind::wcas, {{1, 0}});
  REQUIRE(v.ok);
  std::string why;
  CHECK(replay_witness(ops, v.witness, spec::SpecKind::wcas, {{1, 0}}, &why));
  // Swapping the first two entries breaks the replay.
  auto broken = v.witness;
  std::swap(broken[0], broken[1]);
  CHECK_FALSE(replay_witness(ops, broken, spec::SpecKind::wcas, {{1, 0}}, &why));
  CHECK_FALSE(why.empty());
}

TEST_CASE("failures come with an explanation") {
  auto r = op(0, "read", {}, 0, 1, Response::word(7));
  const auto v = check_durable({r}, spec::SpecKind::wcas, {{1, 0}});
  CHECK_FALSE(v.ok);
  CHECK(v.explanation.find("read") != std::string::npos);
}

TEST_CASE("an empty history is linearizable") {
  CHECK(check_durable(trace::Trace{}, spec::SpecKind::wcas).ok);
  CHECK(extract_ops(trace::Trace{}).empty());
}

TEST_CASE("extract_ops classifies crashed ops by the detect counter") {
  TraceBuilder b;
  b.detect(0, "before", 3);
  b.add(EventKind::invoke, 0, "write", {4});
  b.add(EventKind::crash, 0);
  b.add(EventKind::recover_begin, 0);
  b.add(EventKind::recover_done, 0);
  b.detect(0, "after", 4, Response::ack());

  b.detect(0, "before", 4);
  b.add(EventKind::invoke, 0, "cas", {4, 5});
  b.add(EventKind::crash, 0);
  b.add(EventKind::recover_begin, 0);
  b.add(EventKind::recover_done, 0);
  b.detect(0, "after", 4);

  b.detect(0, "before", 4);
  b.add(EventKind::invoke, 0, "cas", {4, 5});
  b.add(EventKind::response, 0, "cas", {}, Response::boolean(true));
  b.detect(0, "after", 5);

  const auto ops = extract_ops(b.t);
  REQUIRE(ops.size() == 3);
  CHECK(ops[0].status == OpStatus::effective);
  CHECK(equivalent(ops[0].response, Response::ack()));
  CHECK(ops[1].status == OpStatus::repeatable);
  CHECK(ops[2].status == OpStatus::completed);
  CHECK(ops[2].response == Response::boolean(true));
}

TEST_CASE("extract_ops rejects malformed histories") {
  {
    TraceBuilder b;
    b.add(EventKind::response, 0, "read", {}, Response::word(0));
    CHECK_THROWS_AS(extract_ops(b.t), MalformedHistory);
  }
  {
    TraceBuilder b;
    b.add(EventKind::invoke, 0, "read");
    b.add(EventKind::invoke, 0, "read");
    CHECK_THROWS_AS(extract_ops(b.t), MalformedHistory);
  }
  {
    TraceBuilder b;
    b.add(EventKind::invoke, 0, "read");
    b.add(EventKind::recover_begin, 0);
    CHECK_THROWS_AS(extract_ops(b.t), MalformedHistory);
  }
  {
    // Two processes sharing one handle at once.
    TraceBuilder b;
    b.add(EventKind::invoke, 0, "read");
    b.add(EventKind::invoke, 1, "read").handle = 10;
    CHECK_THROWS_AS(extract_ops(b.t), MalformedHistory);
  }
}

TEST_CASE("audit_detect demands re-issue of repeatable ops") {
  TraceBuilder b;
  b.detect(0, "before", 0);
  b.add(EventKind::invoke, 0, "cas", {0, 1});
  b.add(EventKind::crash, 0);
  b.add(EventKind::recover_begin, 0);
  b.add(EventKind::recover_done, 0);
  b.detect(0, "after", 0);
  b.detect(0, "before", 0);
  b.add(EventKind::invoke, 0, "read");
  b.add(EventKind::response, 0, "read", {}, Response::word(0));
  b.detect(0, "after", 0);
  const auto ops = extract_ops(b.t);
  const auto audit = audit_detect(b.t, ops);
  CHECK_FALSE(audit.ok);
  REQUIRE_FALSE(audit.problems.empty());
  CHECK(audit.problems[0].find("not issued again") != std::string::npos);
}

TEST_CASE("audit_detect: counter growth must match an install by the op's handle") {
  TraceBuilder b;
  b.detect(0, "before", 0);
  b.add(EventKind::invoke, 0, "write", {7});
  b.add(EventKind::response, 0, "write", {}, Response::ack());
  b.detect(0, "after", 1, Response::ack());
  const auto audit = audit_detect(b.t, extract_ops(b.t));
  CHECK_FALSE(audit.ok);
}

TEST_CASE("checker agrees with brute force on random small histories") {
  std::mt19937_64 rng(1234);
  int accepted = 0;
  int rejected = 0;
  const spec::SpecKind kinds[] = {spec::SpecKind::wcas, spec::SpecKind::llsc, spec::SpecKind::ec,
                                  spec::SpecKind::ecw};
  for (int i = 0; i < 400; ++i) {
    const auto kind = kinds[i % 4];
    const Word init = rng() % 3;
    const auto ops = brute::random_history(kind, init, 7, 0.4, rng);
    const bool expect = brute::linearizable(ops, kind, init);
    const auto v = check_durable(ops, kind, {{1, init}});
    CAPTURE(i);
    REQUIRE(v.ok == expect);
    if (v.ok) {
      std::string why;
      CHECK(replay_witness(ops, v.witness, kind, {{1, init}}, &why));
    }
    (expect ? accepted : rejected)++;
  }
  CHECK(accepted > 50);
  CHECK(rejected > 50);
}

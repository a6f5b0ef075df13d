#include <doctest.h>

#include <random>
#include <sstream>

#include "dura/trace.hpp"

using namespace dura;
using namespace dura::trace;

namespace {

Trace sample() {
  Trace t;
  Event a;
  a.step = 0;
  a.proc = 1;
  a.handle = 7;
  a.obj = 3;
  a.kind = EventKind::invoke;
  a.op = "cas";
  a.args = {4, 5};
  t.push_back(a);

  Event d;
  d.step = 1;
  d.proc = 1;
  d.handle = 7;
  d.kind = EventKind::detect;
  d.op = "before";
  d.counter = 12;
  d.result = Response::boolean(true);
  t.push_back(d);

  Event m;
  m.step = 2;
  m.proc = 0;
  m.obj = 9;
  m.kind = EventKind::memory;
  m.op = "cas";
  m.args = {1, 2, 3, ~Word{0}};
  m.result = Response::boolean(false);
  t.push_back(m);

  Event r;
  r.step = 3;
  r.proc = 1;
  r.handle = 7;
  r.obj = 3;
  r.kind = EventKind::response;
  r.op = "ecll";
  r.result = Response::pair(6, 8);
  t.push_back(r);

  Event w;
  w.step = 4;
  w.proc = 2;
  w.kind = EventKind::response;
  w.op = "write";
  w.result = Response::ack();
  t.push_back(w);
  return t;
}

}  // namespace

TEST_CASE("JSON lines round-trip and keep their field order") {
  const Trace t = sample();
  std::ostringstream out;
  write_jsonl(out, t);
  const std::string text = out.str();
  std::istringstream in(text);
  const Trace back = read_jsonl(in);
  CHECK(back == t);

  std::ostringstream again;
  write_jsonl(again, back);
  CHECK(again.str() == text);

  const std::string first = to_json_line(t[0]);
  const char* keys[] = {"\"step\"", "\"proc\"", "\"handle\"", "\"obj\"", "\"kind\"",
                        "\"op\"",   "\"args\"", "\"result\"", "\"monitor\""};
  std::size_t pos = 0;
  for (const char* k : keys) {
    const auto at = first.find(k);
    REQUIRE(at != std::string::npos);
    CHECK(at >= pos);
    pos = at;
  }
}

TEST_CASE("parse errors name the line") {
  const std::string good = to_json_line(sample()[0]);
  std::istringstream in(good + "\n\n" + good + "\n{\"step\": 1}\n");
  try {
    (void)read_jsonl(in);
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  std::istringstream junk("not json\n");
  CHECK_THROWS_AS(read_jsonl(junk), ParseError);
}

TEST_CASE("blank lines are skipped and an empty stream is an empty trace") {
  std::istringstream empty("");
  CHECK(read_jsonl(empty).empty());
  std::istringstream blanks("\n\n");
  CHECK(read_jsonl(blanks).empty());
}

TEST_CASE("monitor events survive the trace form") {
  pmem::MonitorEvent m{pmem::MonitorKind::ec_move, cell_at(5), cell_at(9), {3, 4, 0, 0}};
  const Event e = monitor_event(2, m);
  CHECK(e.kind == EventKind::monitor);
  CHECK(e.monitor == "ec_move");
  const auto back = to_monitor(from_json_line(to_json_line(e)));
  CHECK(back.kind == m.kind);
  CHECK(back.obj == m.obj);
  CHECK(back.handle == m.handle);
  CHECK(back.args == m.args);
  CHECK_THROWS(parse_monitor_kind("nope"));
}

TEST_CASE("event kinds round-trip") {
  for (int k = 0; k <= static_cast<int>(EventKind::alloc); ++k) {
    const auto kind = static_cast<EventKind>(k);
    CHECK(parse_kind(to_string(kind)) == kind);
  }
}

#include "dura/trace.hpp"

#include <array>
#include <istream>
#include <json.hpp>
#include <ostream>

namespace dura::trace {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<const char*, 10> kKindNames = {
    "invoke", "response", "crash", "restart", "recover_begin",
    "recover_done", "detect", "memory", "monitor", "alloc"};

ojson response_json(const Response& r) {
  switch (r.type) {
    case Response::Type::none: return nullptr;
    case Response::Type::boolean: return r.a != 0;
    case Response::Type::word: return r.a;
    case Response::Type::pair: return ojson::array({r.a, r.b});
    case Response::Type::ack: return "ack";
  }
  return nullptr;
}

Response response_from(const ojson& j, std::size_t line) {
  if (j.is_null()) return Response::none();
  if (j.is_boolean()) return Response::boolean(j.get<bool>());
  if (j.is_number_unsigned() || j.is_number_integer()) return Response::word(j.get<Word>());
  if (j.is_string() && j.get<std::string>() == "ack") return Response::ack();
  if (j.is_array() && j.size() == 2) return Response::pair(j[0].get<Word>(), j[1].get<Word>());
  throw ParseError(line, "unrecognised result " + j.dump());
}

}  // namespace

const char* to_string(EventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

EventKind parse_kind(const std::string& s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (s == kKindNames[i]) return static_cast<EventKind>(i);
  }
  throw std::invalid_argument("unknown event kind: " + s);
}

pmem::MonitorKind parse_monitor_kind(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(pmem::MonitorKind::imprint); ++i) {
    const auto k = static_cast<pmem::MonitorKind>(i);
    if (s == pmem::to_string(k)) return k;
  }
  throw std::invalid_argument("unknown monitor kind: " + s);
}

std::string to_json_line(const Event& e) {
  ojson j;
  j["step"] = e.step;
  j["proc"] = e.proc;
  j["handle"] = e.handle;
  j["obj"] = e.obj;
  j["kind"] = to_string(e.kind);
  j["op"] = e.op;
  j["args"] = e.args;
  if (e.kind == EventKind::detect) {
    ojson r;
    r["d"] = e.counter;
    r["r"] = response_json(e.result);
    j["result"] = std::move(r);
  } else {
    j["result"] = response_json(e.result);
  }
  j["monitor"] = e.monitor;
  return j.dump();
}

Event from_json_line(const std::string& line, std::size_t line_no) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const nlohmann::json::parse_error& err) {
    throw ParseError(line_no, err.what());
  }
  if (!j.is_object()) throw ParseError(line_no, "expected an object");
  try {
    Event e;
    e.step = j.at("step").get<std::uint64_t>();
    e.proc = j.at("proc").get<int>();
    e.handle = j.at("handle").get<std::uint64_t>();
    e.obj = j.at("obj").get<std::uint64_t>();
    e.kind = parse_kind(j.at("kind").get<std::string>());
    e.op = j.at("op").get<std::string>();
    e.args = j.at("args").get<std::vector<Word>>();
    const ojson& r = j.at("result");
    if (e.kind == EventKind::detect) {
      e.counter = r.at("d").get<std::uint64_t>();
      e.result = response_from(r.at("r"), line_no);
    } else {
      e.result = response_from(r, line_no);
    }
    e.monitor = j.at("monitor").get<std::string>();
    return e;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& err) {
    throw ParseError(line_no, err.what());
  }
}

void write_jsonl(std::ostream& out, const Trace& t) {
  for (const auto& e : t) out << to_json_line(e) << '\n';
}

Trace read_jsonl(std::istream& in) {
  Trace t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    t.push_back(from_json_line(line, n));
  }
  return t;
}

Event memory_event(int proc, const pmem::Access& a) {
  Event e;
  e.proc = proc;
  e.obj = to_u64(a.cell);
  e.kind = EventKind::memory;
  switch (a.kind) {
    case pmem::AccessKind::read:
      e.op = "read";
      e.result = Response::pair(a.result.first, a.result.second);
      break;
    case pmem::AccessKind::write:
      e.op = "write";
      e.args = {a.desired.first, a.desired.second};
      break;
    case pmem::AccessKind::cas:
      e.op = "cas";
      e.args = {a.expected.first, a.expected.second, a.desired.first, a.desired.second};
      e.result = Response::boolean(a.ok);
      break;
  }
  return e;
}

Event monitor_event(int proc, const pmem::MonitorEvent& m) {
  Event e;
  e.proc = proc;
  e.obj = to_u64(m.obj);
  e.handle = to_u64(m.handle);
  e.kind = EventKind::monitor;
  e.monitor = pmem::to_string(m.kind);
  e.args.assign(m.args.begin(), m.args.end());
  return e;
}

pmem::MonitorEvent to_monitor(const Event& e) {
  pmem::MonitorEvent m;
  m.kind = parse_monitor_kind(e.monitor);
  m.obj = cell_at(e.obj);
  m.handle = cell_at(e.handle);
  for (std::size_t i = 0; i < m.args.size() && i < e.args.size(); ++i) m.args[i] = e.args[i];
  return m;
}

}  // namespace dura::trace

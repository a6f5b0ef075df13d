#pragma once

// History and trace events, and their JSON-lines form.
//
// One line per event with the keys
//   step, proc, handle, obj, kind, op, args, result, monitor
// always in that order, so a trace written twice from the same run is
// byte-identical.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dura/pmem.hpp"
#include "dura/types.hpp"

namespace dura::trace {

enum class EventKind : std::uint8_t {
  invoke,
  response,
  crash,
  restart,
  recover_begin,
  recover_done,
  detect,   // op = "before" | "after"; result carries (counter, response)
  memory,   // op = read | write | cas; obj = cell
  monitor,  // monitor = kind name
  alloc,    // obj = cell; args = {init.first, init.second, use}
};

const char* to_string(EventKind k);
EventKind parse_kind(const std::string& s);

struct Event {
  std::uint64_t step = 0;
  int proc = -1;
  std::uint64_t handle = 0;
  std::uint64_t obj = 0;
  EventKind kind = EventKind::invoke;
  std::string op;
  std::vector<Word> args;
  Response result;
  std::uint64_t counter = 0;  // detect only
  std::string monitor;

  bool operator==(const Event&) const = default;
};

using Trace = std::vector<Event>;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

std::string to_json_line(const Event& e);
Event from_json_line(const std::string& line, std::size_t line_no = 0);

void write_jsonl(std::ostream& out, const Trace& t);
/// Blank lines are skipped. Throws ParseError naming the offending line.
Trace read_jsonl(std::istream& in);

/// Builds the event for a memory access.
Event memory_event(int proc, const pmem::Access& a);
Event monitor_event(int proc, const pmem::MonitorEvent& m);

/// Rebuilds the monitor record from a trace event of kind monitor.
pmem::MonitorEvent to_monitor(const Event& e);
pmem::MonitorKind parse_monitor_kind(const std::string& s);

}  // namespace dura::trace

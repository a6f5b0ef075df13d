#pragma once

// Deterministic execution of op scripts over the simulated backend.
//
// Each process runs its script one op at a time through its own handle. A
// process moves by transitions:
//
//   join       create the handle (scripts starting with `join`)
//   invoke     detect probe, pending-op record, invoke event; the op runs up
//              to its first shared access
//   access     perform the parked access and run to the next one
//   response   response event, detect probe, clear the record
//   crash      drop every volatile frame, restart, start recover on the
//              object named by the pending-op record
//   recovered  recover_done event and detect probe; if the counter did not
//              grow the same op is issued again
//
// Crashes are allowed wherever the next transition is an access, a response
// or a recovered, except right after an access that changed no cell (a
// read or a failed CAS): crashing there leaves the same memory as crashing
// just before that access. These are the process's crash points, numbered in
// the order the process reaches them.
//
// Exhaustive mode explores every schedule up to commutation of independent
// transitions (dynamic partial-order reduction with sleep sets), once per
// crash plan. A crash plan names the points at which each process crashes;
// plans are generated until no new point becomes reachable. Random mode picks
// a process uniformly at each step and crashes it at a point with a fixed
// probability.
//
// A schedule is written as a choice string: '.'-separated tokens, `P` to run
// the next transition of process P and `cP` to crash it.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dura/driver.hpp"
#include "dura/monitors.hpp"
#include "dura/pmem.hpp"
#include "dura/script.hpp"
#include "dura/trace.hpp"
#include "dura/verify.hpp"

namespace dura::harness {

enum class Scheduler : std::uint8_t { exhaustive, random };

struct ExploreConfig {
  Algorithm algorithm = Algorithm::durec;
  std::vector<Script> scripts;  // one per process
  std::vector<Word> init;       // per object; missing entries start at 0
  int objects = 0;              // 0: one more than the largest index the scripts use
  int max_crashes = 0;          // per process; in random mode 0 means no cap
  Scheduler scheduler = Scheduler::exhaustive;

  // random mode
  std::uint64_t seed = 1;
  std::uint64_t runs = 1;
  double crash_rate = 0.01;        // per crash point
  std::uint64_t min_steps = 0;     // keep starting runs until this many steps
  std::size_t random_ops = 0;      // > 0: fresh random scripts of this length per run
  int random_procs = 2;            // process count for random scripts

  std::uint64_t run_step_limit = 100'000;  // per run; exceeding it is a violation
  std::uint64_t max_schedules = 0;         // 0: no limit
  double time_limit = 0;                   // seconds; 0: no limit
  bool stop_on_violation = true;
  std::size_t keep_violations = 20;
  verify::CheckOptions check;
};

/// Per-process record of the op in flight, kept in memory that survives
/// crashes. Its cell write is not part of any op's access count.
struct PendingOpRecord {
  int object = 0;
  std::string name;
  std::vector<Word> args;
};

struct RunResult {
  std::vector<Script> scripts;
  std::string choices;
  trace::Trace trace;
  std::uint64_t steps = 0;
  int crashes = 0;
  pmem::MemStats setup;       // after objects and initial handles were created
  std::string space_problem;  // a construction that allocated other than its declared cells
};

struct ExploreReport {
  std::uint64_t schedules = 0;   // complete runs checked
  std::uint64_t duplicates = 0;  // runs where a planned crash never fired
  std::uint64_t blocked = 0;     // runs cut short by sleep sets
  std::uint64_t plans = 0;
  std::uint64_t plans_left = 0;  // crash plans not started when a limit stopped the search
  bool complete = true;          // false when max_schedules or time_limit cut the search short
  std::uint64_t steps = 0;
  std::uint64_t crashes = 0;

  std::uint64_t ops = 0;
  std::uint64_t crashed_ops = 0;
  std::uint64_t effective = 0;
  std::uint64_t reissued = 0;
  std::uint64_t visible = 0;

  std::uint64_t linearizability_failures = 0;
  std::uint64_t detect_failures = 0;
  std::uint64_t monitor_violations = 0;
  std::uint64_t malformed = 0;
  std::uint64_t harness_errors = 0;

  std::map<std::string, int> max_events;  // op name (or "recover") -> max shared accesses
  std::uint64_t cas_retry_exhausted = 0;
  std::uint64_t trivial_writes = 0;
  std::uint64_t trivial_cas = 0;

  std::uint64_t algorithm_cells = 0;   // after setup
  std::uint64_t bookkeeping_cells = 0;
  bool space_ok = true;
  std::string space_detail;

  std::vector<std::string> violations;
  std::optional<std::string> failing_choices;
  std::optional<std::string> failing_scripts;
  double seconds = 0;

  bool ok() const {
    return linearizability_failures == 0 && detect_failures == 0 && monitor_violations == 0 && malformed == 0 &&
           harness_errors == 0 && space_ok;
  }
};

std::string to_string(const ExploreReport& r);

/// Called for every checked run, after evaluation.
using RunHook = std::function<void(const RunResult&)>;

/// Throws std::invalid_argument for configs the harness cannot run.
void validate(const ExploreConfig& cfg);

ExploreReport explore(const ExploreConfig& cfg, const RunHook& hook = {});

/// Re-runs one schedule. `scripts` defaults to cfg.scripts.
RunResult replay(const ExploreConfig& cfg, const std::string& choices,
                 const std::vector<Script>* scripts = nullptr);

/// Checks one finished run and folds the outcome into `report`. Returns false
/// when something failed; the first problem lands in report.violations.
bool evaluate(const ExploreConfig& cfg, const RunResult& run, ExploreReport& report);

// ---------------------------------------------------------------------------

enum class TransitionKind : std::uint8_t { none, join, invoke, access, response, recovered, crash };

/// What a pending transition touches, for the dependency relation.
struct Footprint {
  TransitionKind kind = TransitionKind::none;
  CellId cell = CellId::nil;
  pmem::AccessKind access = pmem::AccessKind::read;
  std::vector<CellId> reads;  // detect probes of invoke / response / recovered
};

/// Whether the transitions of two different processes may not commute.
bool dependent(const Footprint& a, const Footprint& b);

/// One execution in progress. Deterministic: the same sequence of step and
/// crash calls yields the same trace.
class Simulation {
 public:
  Simulation(const ExploreConfig& cfg, std::vector<Script> scripts);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  int procs() const { return static_cast<int>(procs_.size()); }
  bool finished(int p) const;
  bool all_finished() const;

  /// Next non-crash transition of p.
  Footprint pending(int p) const;
  /// Whether p stands at a crash point.
  bool at_point(int p) const;
  /// Crash points p has reached so far.
  int points(int p) const;
  int crashes(int p) const;
  /// Whether p's last transition was an access that changed no cell.
  bool quiet(int p) const;

  void step(int p);
  void crash(int p);

  const trace::Trace& trace() const;
  RunResult result() const;
  /// Like result(), but moves the trace out; the simulation is spent after this.
  RunResult release_result();
  std::uint64_t steps() const { return steps_; }

  pmem::Memory& memory() { return *mem_; }
  Driver& driver() { return *driver_; }
  const pmem::MemStats& setup_stats() const { return setup_stats_; }
  /// Empty when every create_object / create_handle allocated its declared cells.
  const std::string& space_problem() const { return space_problem_; }

  std::optional<PendingOpRecord> record(int p) const;

 private:
  struct Proc;
  class Sink;

  void invoke(Proc& pr);
  void perform(Proc& pr);
  void respond(Proc& pr);
  void recovered(Proc& pr);
  void join(Proc& pr);
  void arrive(Proc& pr);
  Detection probe(Proc& pr, const char* phase);
  void save_record(Proc& pr, bool in_flight);
  int make_handle(int proc);
  std::vector<Word> resolve(const Proc& pr, const ScriptOp& op) const;
  TransitionKind next_kind(const Proc& pr) const;

  const ExploreConfig& cfg_;
  std::unique_ptr<pmem::Memory> mem_;
  std::unique_ptr<Sink> sink_;
  std::unique_ptr<Driver> driver_;
  std::vector<std::unique_ptr<Proc>> procs_;
  std::vector<Word> init_;
  std::uint64_t steps_ = 0;
  std::string choices_;
  pmem::MemStats setup_stats_;
  std::string space_problem_;
};

}  // namespace dura::harness

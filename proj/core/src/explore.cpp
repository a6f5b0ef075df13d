#include "dura/explore.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <sstream>
#include <stdexcept>

namespace dura::harness {

using pmem::MonitorEvent;
using trace::Event;
using trace::EventKind;

// ---------------------------------------------------------------------------
// Simulation

class Simulation::Sink final : public pmem::EventSink {
 public:
  trace::Trace events;
  int proc = -1;
  bool muted = false;
  monitors::CompositeTracker tracker;

  void push(Event e) {
    e.step = events.size();
    events.push_back(std::move(e));
  }
  void on_alloc(CellId cell, const WordPair& init, pmem::CellUse use) override {
    Event e;
    e.proc = proc;
    e.obj = to_u64(cell);
    e.kind = EventKind::alloc;
    e.args = {init.first, init.second, use == pmem::CellUse::bookkeeping ? 1u : 0u};
    push(std::move(e));
  }
  void on_access(const pmem::Access& a) override {
    if (!muted) push(trace::memory_event(proc, a));
  }
  void on_monitor(const MonitorEvent& m) override {
    push(trace::monitor_event(proc, m));
    if (auto d = tracker.feed(m)) push(trace::monitor_event(proc, *d));
  }
};

struct Simulation::Proc {
  enum class Phase : std::uint8_t { idle, running, recovering };

  int id = 0;
  Script script;
  std::size_t next_op = 0;
  int handle = -1;
  Phase phase = Phase::idle;
  Task<Response> op;
  Task<void> rec;
  pmem::Parking park;

  // Survives crashes.
  std::optional<PendingOpRecord> record;
  CellId record_cell = CellId::nil;
  bool repeat = false;  // the recorded op must be issued again

  std::map<int, Seq> last_seq;
  std::map<int, Word> last_val;
  Detection before;
  int points = 0;
  bool at_point = false;
  bool quiet = false;  // last transition was an access that changed no cell
  int crashes = 0;
};

namespace {

int objects_needed(const ExploreConfig& cfg, const std::vector<Script>& scripts) {
  int n = std::max(cfg.objects, static_cast<int>(cfg.init.size()));
  for (const Script& s : scripts) {
    for (const ScriptOp& op : s) n = std::max(n, op.object + 1);
  }
  return std::max(n, 1);
}

}  // namespace

Simulation::Simulation(const ExploreConfig& cfg, std::vector<Script> scripts)
    : cfg_(cfg), mem_(std::make_unique<pmem::Memory>(pmem::Mode::simulated)), sink_(std::make_unique<Sink>()) {
  mem_->set_sink(sink_.get());
  sink_->events.reserve(512);
  driver_ = make_driver(cfg.algorithm, *mem_);

  const int objects = objects_needed(cfg, scripts);
  init_.assign(static_cast<std::size_t>(objects), 0);
  std::copy(cfg.init.begin(), cfg.init.end(), init_.begin());
  for (int o = 0; o < objects; ++o) {
    const auto before = mem_->stats().cells_allocated;
    driver_->create_object(init_[static_cast<std::size_t>(o)]);
    const auto used = mem_->stats().cells_allocated - before;
    if (used != driver_->object_cells()) {
      space_problem_ += "object " + std::to_string(o) + " took " + std::to_string(used) + " cells; ";
    }
  }

  for (std::size_t p = 0; p < scripts.size(); ++p) {
    auto pr = std::make_unique<Proc>();
    pr->id = static_cast<int>(p);
    pr->script = std::move(scripts[p]);
    pr->record_cell = mem_->alloc(WordPair{0, 0}, pmem::CellUse::bookkeeping);
    if (pr->script.empty() || !pr->script.front().join) pr->handle = make_handle(pr->id);
    procs_.push_back(std::move(pr));
  }
  setup_stats_ = mem_->stats();
  for (auto& pr : procs_) arrive(*pr);
}

Simulation::~Simulation() {
  // Frames go before the memory they point into.
  procs_.clear();
}

int Simulation::make_handle(int proc) {
  const auto before = mem_->stats().cells_allocated;
  const int h = driver_->create_handle();
  const auto used = mem_->stats().cells_allocated - before;
  if (used != driver_->handle_cells()) {
    space_problem_ += "handle of p" + std::to_string(proc) + " took " + std::to_string(used) + " cells; ";
  }
  return h;
}

TransitionKind Simulation::next_kind(const Proc& pr) const {
  switch (pr.phase) {
    case Proc::Phase::idle:
      if (pr.repeat) return TransitionKind::invoke;
      if (pr.next_op >= pr.script.size()) return TransitionKind::none;
      return pr.script[pr.next_op].join ? TransitionKind::join : TransitionKind::invoke;
    case Proc::Phase::running:
      return pr.op.done() ? TransitionKind::response : TransitionKind::access;
    case Proc::Phase::recovering:
      return pr.rec.done() ? TransitionKind::recovered : TransitionKind::access;
  }
  return TransitionKind::none;
}

bool Simulation::finished(int p) const { return next_kind(*procs_.at(p)) == TransitionKind::none; }

bool Simulation::all_finished() const {
  for (int p = 0; p < procs(); ++p) {
    if (!finished(p)) return false;
  }
  return true;
}

Footprint Simulation::pending(int p) const {
  const Proc& pr = *procs_.at(p);
  Footprint f;
  f.kind = next_kind(pr);
  switch (f.kind) {
    case TransitionKind::access:
      f.cell = pr.park.access->cell;
      f.access = pr.park.access->kind;
      break;
    case TransitionKind::invoke:
    case TransitionKind::response:
    case TransitionKind::recovered:
      f.reads = driver_->detect_cells(pr.handle);
      break;
    default:
      break;
  }
  return f;
}

bool Simulation::at_point(int p) const { return procs_.at(p)->at_point; }
int Simulation::points(int p) const { return procs_.at(p)->points; }
bool Simulation::quiet(int p) const { return procs_.at(p)->quiet; }
int Simulation::crashes(int p) const { return procs_.at(p)->crashes; }

std::optional<PendingOpRecord> Simulation::record(int p) const { return procs_.at(p)->record; }

const trace::Trace& Simulation::trace() const { return sink_->events; }

RunResult Simulation::result() const {
  RunResult r;
  for (const auto& pr : procs_) r.scripts.push_back(pr->script);
  r.choices = choices_;
  r.trace = sink_->events;
  r.steps = steps_;
  for (const auto& pr : procs_) r.crashes += pr->crashes;
  r.setup = setup_stats_;
  r.space_problem = space_problem_;
  return r;
}

RunResult Simulation::release_result() {
  RunResult r;
  for (const auto& pr : procs_) r.scripts.push_back(pr->script);
  r.choices = choices_;
  r.trace = std::move(sink_->events);
  sink_->events.clear();
  r.steps = steps_;
  for (const auto& pr : procs_) r.crashes += pr->crashes;
  r.setup = setup_stats_;
  r.space_problem = space_problem_;
  return r;
}

void Simulation::arrive(Proc& pr) {
  const TransitionKind k = next_kind(pr);
  pr.at_point =
      !pr.quiet && (k == TransitionKind::access || k == TransitionKind::response || k == TransitionKind::recovered);
  if (pr.at_point) ++pr.points;
}

void Simulation::step(int p) {
  Proc& pr = *procs_.at(p);
  sink_->proc = p;
  mem_->set_parking(&pr.park);
  pr.quiet = false;
  switch (next_kind(pr)) {
    case TransitionKind::join: join(pr); break;
    case TransitionKind::invoke: invoke(pr); break;
    case TransitionKind::access: perform(pr); break;
    case TransitionKind::response: respond(pr); break;
    case TransitionKind::recovered: recovered(pr); break;
    default: throw std::logic_error("step on a finished process");
  }
  if (!choices_.empty()) choices_ += '.';
  choices_ += std::to_string(p);
  ++steps_;
  arrive(pr);
}

void Simulation::crash(int p) {
  Proc& pr = *procs_.at(p);
  if (!pr.at_point) throw std::logic_error("crash away from a crash point");
  if (!pr.record) throw std::logic_error("crash with no pending-op record");
  sink_->proc = p;
  mem_->set_parking(&pr.park);
  pr.op.reset();
  pr.rec.reset();
  pr.park = {};
  pr.quiet = false;
  ++pr.crashes;

  const std::uint64_t hid = driver_->handle_id(pr.handle);
  const std::uint64_t oid = driver_->object_id(pr.record->object);
  Event e;
  e.proc = p;
  e.handle = hid;
  e.obj = oid;
  e.op = pr.record->name;
  e.kind = EventKind::crash;
  sink_->push(e);
  e.kind = EventKind::restart;
  sink_->push(e);
  // The restarted process learns which object to recover from its record.
  e.kind = EventKind::recover_begin;
  sink_->push(e);

  pr.phase = Proc::Phase::recovering;
  pr.rec = driver_->recover(pr.handle, pr.record->object);
  pr.rec.resume();

  if (!choices_.empty()) choices_ += '.';
  choices_ += "c" + std::to_string(p);
  ++steps_;
  arrive(pr);
}

void Simulation::join(Proc& pr) {
  pr.handle = make_handle(pr.id);
  ++pr.next_op;
}

std::vector<Word> Simulation::resolve(const Proc& pr, const ScriptOp& op) const {
  if (op.explicit_args) return op.args;
  const int o = op.object;
  const Word fresh = 100 * static_cast<Word>(pr.id + 1) + pr.next_op;
  auto seq = [&] {
    const auto it = pr.last_seq.find(o);
    return it == pr.last_seq.end() ? Seq{0} : it->second;
  };
  auto val = [&] {
    const auto it = pr.last_val.find(o);
    return it == pr.last_val.end() ? init_.at(static_cast<std::size_t>(o)) : it->second;
  };
  if (op.name == "ecvl") return {seq()};
  if (op.name == "ecsc") return {seq(), fresh};
  if (op.name == "write" || op.name == "sc") return {fresh};
  if (op.name == "cas") return {val(), fresh};
  return {};
}

Detection Simulation::probe(Proc& pr, const char* phase) {
  Detection d;
  {
    pmem::Memory::ImmediateScope now(*mem_);
    d = run_sync(driver_->detect(pr.handle));
  }
  Event e;
  e.proc = pr.id;
  e.handle = driver_->handle_id(pr.handle);
  e.kind = EventKind::detect;
  e.op = phase;
  e.result = d.response;
  e.counter = d.counter;
  sink_->push(std::move(e));
  return d;
}

void Simulation::save_record(Proc& pr, bool in_flight) {
  pmem::Access a;
  a.kind = pmem::AccessKind::write;
  a.cell = pr.record_cell;
  a.desired = in_flight ? WordPair{static_cast<Word>(pr.record->object) + 1, pr.record->args.size()} : WordPair{};
  sink_->muted = true;
  mem_->perform(a);
  sink_->muted = false;
}

void Simulation::invoke(Proc& pr) {
  if (!pr.repeat) {
    const ScriptOp& op = pr.script[pr.next_op];
    pr.record = PendingOpRecord{op.object, op.name, resolve(pr, op)};
  }
  const PendingOpRecord& r = *pr.record;
  for (const auto& other : procs_) {
    if (other.get() != &pr && other->handle == pr.handle && other->phase != Proc::Phase::idle) {
      throw spec::ContractViolation("second operation started on a busy handle");
    }
  }
  pr.before = probe(pr, "before");
  save_record(pr, true);

  Event e;
  e.proc = pr.id;
  e.handle = driver_->handle_id(pr.handle);
  e.obj = driver_->object_id(r.object);
  e.kind = EventKind::invoke;
  e.op = r.name;
  e.args = r.args;
  sink_->push(std::move(e));

  pr.phase = Proc::Phase::running;
  pr.op = driver_->run(pr.handle, r.object, r.name, r.args);
  pr.op.resume();
}

void Simulation::perform(Proc& pr) {
  pmem::Access* a = pr.park.access;
  const auto h = pr.park.handle;
  pr.park = {};
  mem_->perform(*a);
  pr.quiet = a->kind == pmem::AccessKind::read || (a->kind == pmem::AccessKind::cas && !a->ok);
  h.resume();
}

namespace {

void learn(std::map<int, Seq>& last_seq, std::map<int, Word>& last_val, const PendingOpRecord& r, const Response& res) {
  const int o = r.object;
  if (r.name == "ecll") {
    last_seq[o] = res.a;
    last_val[o] = res.b;
  } else if (r.name == "ll" || r.name == "read") {
    last_val[o] = res.a;
  } else if (r.name == "write") {
    last_val[o] = r.args.at(0);
  } else if (res.type == Response::Type::boolean && res.as_bool()) {
    if (r.name == "cas" || r.name == "ecsc") last_val[o] = r.args.at(1);
    if (r.name == "sc") last_val[o] = r.args.at(0);
  }
}

}  // namespace

void Simulation::respond(Proc& pr) {
  const Response res = pr.op.result();
  pr.op.reset();
  const PendingOpRecord& r = *pr.record;

  Event e;
  e.proc = pr.id;
  e.handle = driver_->handle_id(pr.handle);
  e.obj = driver_->object_id(r.object);
  e.kind = EventKind::response;
  e.op = r.name;
  e.args = r.args;
  e.result = res;
  sink_->push(std::move(e));
  probe(pr, "after");

  learn(pr.last_seq, pr.last_val, r, res);
  pr.record.reset();
  save_record(pr, false);
  pr.repeat = false;
  pr.phase = Proc::Phase::idle;
  ++pr.next_op;
}

void Simulation::recovered(Proc& pr) {
  pr.rec.result();
  pr.rec.reset();
  const PendingOpRecord& r = *pr.record;

  Event e;
  e.proc = pr.id;
  e.handle = driver_->handle_id(pr.handle);
  e.obj = driver_->object_id(r.object);
  e.kind = EventKind::recover_done;
  e.op = r.name;
  sink_->push(std::move(e));
  const Detection d = probe(pr, "after");

  pr.phase = Proc::Phase::idle;
  if (d.counter > pr.before.counter) {
    learn(pr.last_seq, pr.last_val, r, d.response);
    pr.record.reset();
    save_record(pr, false);
    pr.repeat = false;
    ++pr.next_op;
  } else {
    pr.repeat = true;
  }
}

// ---------------------------------------------------------------------------
// Dependency

bool dependent(const Footprint& a, const Footprint& b) {
  using K = TransitionKind;
  // Fast path for the common case of two accesses.
  if (a.kind == K::access && b.kind == K::access) {
    return a.cell == b.cell && (a.access != pmem::AccessKind::read || b.access != pmem::AccessKind::read);
  }
  if (a.kind == K::none || b.kind == K::none) return false;
  if (a.kind == K::join || b.kind == K::join) return true;
  if (a.kind == K::crash || b.kind == K::crash) return false;
  auto ends = [](K k) { return k == K::response || k == K::recovered; };
  // Real-time order between one op's end and another's start is observable.
  if ((a.kind == K::invoke && ends(b.kind)) || (b.kind == K::invoke && ends(a.kind))) return true;
  auto writes = [](const Footprint& f) { return f.kind == K::access && f.access != pmem::AccessKind::read; };
  if (a.kind == K::access && b.kind == K::access) return a.cell == b.cell && (writes(a) || writes(b));
  const Footprint& acc = a.kind == K::access ? a : b;
  const Footprint& other = a.kind == K::access ? b : a;
  if (acc.kind != K::access) return false;
  return writes(acc) && std::find(other.reads.begin(), other.reads.end(), acc.cell) != other.reads.end();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

const monitors::StepBounds& bounds_of(Algorithm a) {
  static std::map<Algorithm, monitors::StepBounds> cache;
  auto it = cache.find(a);
  if (it == cache.end()) {
    pmem::Memory mem(pmem::Mode::simulated);
    it = cache.emplace(a, make_driver(a, mem)->bounds()).first;
  }
  return it->second;
}

}  // namespace

bool evaluate(const ExploreConfig& cfg, const RunResult& run, ExploreReport& report) {
  ++report.schedules;
  report.steps += run.steps;
  report.crashes += static_cast<std::uint64_t>(run.crashes);
  if (report.schedules == 1) {
    report.algorithm_cells = run.setup.cells_allocated;
    report.bookkeeping_cells = run.setup.bookkeeping_cells;
  }

  std::string first;
  auto fail = [&](std::uint64_t& counter, const std::string& msg) {
    ++counter;
    if (first.empty()) first = msg;
  };

  if (!run.space_problem.empty()) {
    report.space_ok = false;
    if (report.space_detail.empty()) report.space_detail = run.space_problem;
    if (first.empty()) first = "space: " + run.space_problem;
  }

  const trace::Trace& t = run.trace;
  std::vector<verify::OpRecord> ops;
  bool well_formed = true;
  try {
    ops = verify::extract_ops(t);
  } catch (const verify::MalformedHistory& err) {
    well_formed = false;
    fail(report.malformed, std::string("malformed history: ") + err.what());
  }
  if (well_formed) {
    try {
      const verify::Verdict v = verify::check_durable(ops, spec_of(cfg.algorithm), verify::initial_values(t), cfg.check);
      if (!v.ok) fail(report.linearizability_failures, "not durably linearizable: " + v.explanation);
    } catch (const std::exception& err) {
      fail(report.malformed, std::string("checker rejected history: ") + err.what());
    }
    const verify::DetectAudit a = verify::audit_detect(t, ops);
    report.ops += a.ops;
    report.crashed_ops += a.crashed;
    report.effective += a.effective;
    report.reissued += a.reissued;
    report.visible += a.visible;
    if (!a.ok) {
      report.detect_failures += a.problems.size();
      if (first.empty()) first = "detect: " + a.problems.front();
    }
  }

  for (const monitors::Violation& v : monitors::run_monitors(t, &bounds_of(cfg.algorithm))) {
    fail(report.monitor_violations, "monitor: " + monitors::to_string(v));
  }
  for (const monitors::OpCost& c : monitors::op_costs(t)) {
    int& m = report.max_events[c.op];
    m = std::max(m, c.events);
  }
  for (const Event& e : t) {
    if (e.kind != EventKind::monitor) continue;
    if (e.monitor == "cas_retry_exhausted") ++report.cas_retry_exhausted;
    if (e.monitor == "trivial_write") ++report.trivial_writes;
    if (e.monitor == "trivial_cas") ++report.trivial_cas;
  }

  if (first.empty()) return true;
  if (report.violations.size() < cfg.keep_violations) report.violations.push_back(first);
  if (!report.failing_choices) {
    report.failing_choices = run.choices;
    std::string scripts;
    for (std::size_t p = 0; p < run.scripts.size(); ++p) {
      scripts += (p ? " | " : "") + to_string(run.scripts[p]);
    }
    report.failing_scripts = scripts;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Exhaustive exploration

namespace {

using Plan = std::vector<std::vector<int>>;  // per process, sorted crash point indices

class Explorer {
 public:
  Explorer(const ExploreConfig& cfg, const RunHook& hook, ExploreReport& report)
      : cfg_(cfg), hook_(hook), report_(report), procs_(static_cast<int>(cfg.scripts.size())) {}

  void run() {
    std::set<Plan> seen;
    std::deque<Plan> work;
    Plan empty(static_cast<std::size_t>(procs_));
    seen.insert(empty);
    work.push_back(empty);
    while (!work.empty() && !stop_) {
      Plan plan = std::move(work.front());
      work.pop_front();
      ++report_.plans;
      const std::vector<int> reach = explore_plan(plan);
      for (int p = 0; p < procs_; ++p) {
        const auto& mine = plan[static_cast<std::size_t>(p)];
        if (static_cast<int>(mine.size()) >= cfg_.max_crashes) continue;
        for (int k = mine.empty() ? 0 : mine.back() + 1; k < reach[static_cast<std::size_t>(p)]; ++k) {
          Plan next = plan;
          next[static_cast<std::size_t>(p)].push_back(k);
          if (seen.insert(next).second) work.push_back(std::move(next));
        }
      }
    }
    if (limited_) {
      report_.complete = false;
      report_.plans_left = work.size();
    }
  }

 private:
  struct Node {
    std::vector<Footprint> next;  // per process; kind none when finished
    std::uint64_t backtrack = 0, done = 0, sleep = 0;  // process bit sets
    int chosen = -1;
    Footprint fired;  // transition taken from this node
    std::vector<std::uint32_t> clock;
  };

  // The transition p takes next under the plan.
  Footprint planned(const Simulation& sim, int p) const {
    if (sim.at_point(p) && planned_crash(sim, p)) return Footprint{TransitionKind::crash, CellId::nil, {}, {}};
    return sim.pending(p);
  }
  bool planned_crash(const Simulation& sim, int p) const {
    const auto& mine = plan_[static_cast<std::size_t>(p)];
    return std::binary_search(mine.begin(), mine.end(), sim.points(p) - 1);
  }

  void take(Simulation& sim, std::size_t depth, int p) {
    Node& node = stack_[depth];
    node.chosen = p;
    node.fired = node.next[static_cast<std::size_t>(p)];
    if (node.fired.kind == TransitionKind::crash) {
      sim.crash(p);
      ++fired_;
    } else {
      sim.step(p);
      // A CAS that failed changed nothing; ordered against others it acts as a read.
      if (node.fired.kind == TransitionKind::access && node.fired.access == pmem::AccessKind::cas && sim.quiet(p)) {
        node.fired.access = pmem::AccessKind::read;
      }
    }
    std::vector<std::uint32_t> c = pclock_[static_cast<std::size_t>(p)];
    for (std::size_t j = 0; j < depth; ++j) {
      const Node& prev = stack_[j];
      if (prev.chosen == p || c[static_cast<std::size_t>(prev.chosen)] > j) continue;  // already in the past
      if (dependent(prev.fired, node.fired)) {
        for (std::size_t q = 0; q < c.size(); ++q) c[q] = std::max(c[q], prev.clock[q]);
      }
    }
    c[static_cast<std::size_t>(p)] = static_cast<std::uint32_t>(depth + 1);
    node.clock = c;
    pclock_[static_cast<std::size_t>(p)] = std::move(c);
  }

  std::unique_ptr<Simulation> rebuild(std::size_t depth) {
    auto sim = std::make_unique<Simulation>(cfg_, cfg_.scripts);
    pclock_.assign(static_cast<std::size_t>(procs_), std::vector<std::uint32_t>(static_cast<std::size_t>(procs_), 0));
    fired_ = 0;
    // Clocks of the prefix are already on the stack; only the simulation is redone.
    for (std::size_t i = 0; i < depth; ++i) {
      const Node& node = stack_[i];
      if (node.fired.kind == TransitionKind::crash) {
        sim->crash(node.chosen);
        ++fired_;
      } else {
        sim->step(node.chosen);
      }
      pclock_[static_cast<std::size_t>(node.chosen)] = node.clock;
    }
    return sim;
  }

  // Adds the backtrack points for every enabled process at the top state.
  void detect_races(std::size_t depth) {
    const Node& top = stack_[depth];
    for (int p = 0; p < procs_; ++p) {
      const Footprint& t = top.next[static_cast<std::size_t>(p)];
      if (t.kind == TransitionKind::none) continue;
      const auto& clock = pclock_[static_cast<std::size_t>(p)];
      for (std::size_t i = depth; i-- > 0;) {
        const Node& ev = stack_[i];
        if (ev.chosen == p || !dependent(ev.fired, t)) continue;
        if (clock[static_cast<std::size_t>(ev.chosen)] >= i + 1) continue;  // already ordered before p
        Node& pre = stack_[i];
        // Prefer p itself, else a process whose later step leads to p.
        int pick = -1;
        if (pre.next[static_cast<std::size_t>(p)].kind != TransitionKind::none) {
          pick = p;
        } else {
          for (std::size_t j = i + 1; j < depth && pick < 0; ++j) {
            const int q = stack_[j].chosen;
            if (clock[static_cast<std::size_t>(q)] >= j + 1 && pre.next[static_cast<std::size_t>(q)].kind != TransitionKind::none) {
              pick = q;
            }
          }
        }
        if (pick >= 0) {
          pre.backtrack |= bit(pick);
        } else {
          for (int q = 0; q < procs_; ++q) {
            if (pre.next[static_cast<std::size_t>(q)].kind != TransitionKind::none) pre.backtrack |= bit(q);
          }
        }
        break;
      }
    }
  }

  void fill(Node& node, const Simulation& sim) const {
    node.next.resize(static_cast<std::size_t>(procs_));
    for (int p = 0; p < procs_; ++p) {
      node.next[static_cast<std::size_t>(p)] = sim.finished(p) ? Footprint{} : planned(sim, p);
    }
  }

  static std::uint64_t bit(int p) { return std::uint64_t{1} << p; }

  std::uint64_t child_sleep(const Node& node, int p) const {
    std::uint64_t out = 0;
    const Footprint& t = node.next[static_cast<std::size_t>(p)];
    auto consider = [&](int q) {
      if (q != p && !dependent(node.next[static_cast<std::size_t>(q)], t)) out |= bit(q);
    };
    const std::uint64_t candidates = node.sleep | node.done;
    for (int q = 0; q < procs_; ++q) {
      if (candidates & bit(q)) consider(q);
    }
    return out;
  }

  void finish_run(Simulation& sim, std::vector<int>& reach) {
    for (int p = 0; p < procs_; ++p) {
      reach[static_cast<std::size_t>(p)] = std::max(reach[static_cast<std::size_t>(p)], sim.points(p));
    }
    std::size_t planned_total = 0;
    for (const auto& v : plan_) planned_total += v.size();
    if (fired_ != planned_total) {
      ++report_.duplicates;
      return;
    }
    const RunResult r = sim.release_result();
    const bool ok = evaluate(cfg_, r, report_);
    if (hook_) hook_(r);
    if (!ok && cfg_.stop_on_violation) stop_ = true;
    if (cfg_.max_schedules != 0 && report_.schedules >= cfg_.max_schedules) limited_ = true;
    if (cfg_.time_limit > 0 && std::chrono::duration<double>(Clock::now() - start_).count() >= cfg_.time_limit) {
      limited_ = true;
    }
    if (limited_) stop_ = true;
  }

  // Returns, per process, the most crash points reached in any run.
  std::vector<int> explore_plan(const Plan& plan) {
    plan_ = plan;
    std::vector<int> reach(static_cast<std::size_t>(procs_), 0);
    stack_.clear();
    auto sim = rebuild(0);
    std::uint64_t sleep = 0;

    while (!stop_) {
      const std::size_t depth = stack_.size();
      stack_.emplace_back();
      fill(stack_[depth], *sim);
      stack_[depth].sleep = sleep;
      sleep = 0;

      bool terminal = true;
      for (const Footprint& f : stack_[depth].next) terminal = terminal && f.kind == TransitionKind::none;
      bool abandon = false;
      if (terminal) {
        finish_run(*sim, reach);
        abandon = true;
      } else if (sim->steps() >= cfg_.run_step_limit) {
        ++report_.harness_errors;
        if (report_.violations.size() < cfg_.keep_violations) {
          report_.violations.push_back("run exceeded the step limit: " + sim->result().choices);
        }
        if (cfg_.stop_on_violation) stop_ = true;
        abandon = true;
      } else {
        detect_races(depth);
        Node& node = stack_[depth];
        int pick = -1;
        for (int p = 0; p < procs_ && pick < 0; ++p) {
          if (node.next[static_cast<std::size_t>(p)].kind != TransitionKind::none && (node.sleep & bit(p)) == 0) pick = p;
        }
        if (pick < 0) {
          ++report_.blocked;
          abandon = true;
        } else {
          node.backtrack |= bit(pick);
          sleep = child_sleep(node, pick);
          take(*sim, depth, pick);
        }
      }
      if (!abandon) continue;

      // The top node is a leaf; drop it and find the deepest node with work left.
      stack_.pop_back();
      bool resumed = false;
      while (!stack_.empty() && !stop_) {
        Node& node = stack_.back();
        node.done |= bit(node.chosen);
        int next = -1;
        const std::uint64_t open = node.backtrack & ~node.done & ~node.sleep;
        for (int q = 0; q < procs_ && next < 0; ++q) {
          if (open & bit(q)) next = q;
        }
        if (next < 0) {
          stack_.pop_back();
          continue;
        }
        const std::size_t d = stack_.size() - 1;
        sim = rebuild(d);
        sleep = child_sleep(node, next);
        take(*sim, d, next);
        resumed = true;
        break;
      }
      if (!resumed) break;
    }
    return reach;
  }

  const ExploreConfig& cfg_;
  const RunHook& hook_;
  ExploreReport& report_;
  int procs_;
  Plan plan_;
  std::vector<Node> stack_;
  std::vector<std::vector<std::uint32_t>> pclock_;
  std::size_t fired_ = 0;
  bool stop_ = false;
  bool limited_ = false;
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_ = Clock::now();
};

std::vector<Script> random_scripts(const ExploreConfig& cfg, std::mt19937_64& rng) {
  const auto names = op_names(cfg.algorithm);
  const int objects = std::max(1, cfg.objects);
  std::uniform_int_distribution<std::size_t> pick_op(0, names.size() - 1);
  std::uniform_int_distribution<int> pick_obj(0, objects - 1);
  std::vector<Script> out(static_cast<std::size_t>(cfg.random_procs));
  for (Script& s : out) {
    for (std::size_t i = 0; i < cfg.random_ops; ++i) {
      ScriptOp op;
      op.name = names[pick_op(rng)];
      op.object = pick_obj(rng);
      s.push_back(std::move(op));
    }
  }
  return out;
}

void explore_random(const ExploreConfig& cfg, const RunHook& hook, ExploreReport& report) {
  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution crash(cfg.crash_rate);
  for (std::uint64_t r = 0; r < cfg.runs || report.steps < cfg.min_steps; ++r) {
    ++report.plans;
    Simulation sim(cfg, cfg.random_ops > 0 ? random_scripts(cfg, rng) : cfg.scripts);
    std::vector<int> live;
    while (sim.steps() < cfg.run_step_limit) {
      live.clear();
      for (int p = 0; p < sim.procs(); ++p) {
        if (!sim.finished(p)) live.push_back(p);
      }
      if (live.empty()) break;
      const int p = live[std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng)];
      if (sim.at_point(p) && (cfg.max_crashes == 0 || sim.crashes(p) < cfg.max_crashes) && crash(rng)) {
        sim.crash(p);
      } else {
        sim.step(p);
      }
    }
    if (!sim.all_finished()) {
      ++report.harness_errors;
      if (report.violations.size() < cfg.keep_violations) report.violations.push_back("run exceeded the step limit");
      if (cfg.stop_on_violation) return;
      continue;
    }
    const RunResult res = sim.result();
    const bool ok = evaluate(cfg, res, report);
    if (hook) hook(res);
    if (!ok && cfg.stop_on_violation) return;
    if (cfg.max_schedules != 0 && report.schedules >= cfg.max_schedules) return;
  }
}

}  // namespace

void validate(const ExploreConfig& cfg) {
  if (cfg.max_crashes < 0) throw std::invalid_argument("max crashes must be >= 0");
  if (cfg.scheduler == Scheduler::exhaustive || cfg.random_ops == 0) {
    if (cfg.scripts.empty()) throw std::invalid_argument("no process scripts");
  }
  if (cfg.scheduler == Scheduler::exhaustive && cfg.scripts.size() > 64) {
    throw std::invalid_argument("exhaustive mode supports at most 64 processes");
  }
  if (cfg.scheduler == Scheduler::random && cfg.random_ops > 0 && cfg.random_procs < 1) {
    throw std::invalid_argument("random scripts need at least one process");
  }
  if (cfg.crash_rate < 0 || cfg.crash_rate > 1) throw std::invalid_argument("crash rate must lie in [0, 1]");
  for (std::size_t p = 0; p < cfg.scripts.size(); ++p) {
    for (std::size_t i = 0; i < cfg.scripts[p].size(); ++i) {
      const ScriptOp& op = cfg.scripts[p][i];
      if (op.join && i != 0) throw std::invalid_argument("join must come first in the script of p" + std::to_string(p));
      if (!op.join) arity(cfg.algorithm, op.name);
    }
  }
  for (Word v : cfg.init) {
    if (cfg.algorithm != Algorithm::durec && v > kMaxPayload) throw std::invalid_argument("initial value exceeds 63 bits");
  }
}

ExploreReport explore(const ExploreConfig& cfg, const RunHook& hook) {
  validate(cfg);
  ExploreReport report;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (cfg.scheduler == Scheduler::exhaustive) {
      Explorer(cfg, hook, report).run();
    } else {
      explore_random(cfg, hook, report);
    }
  } catch (const std::exception& err) {
    ++report.harness_errors;
    report.violations.push_back(std::string("harness error: ") + err.what());
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

RunResult replay(const ExploreConfig& cfg, const std::string& choices, const std::vector<Script>* scripts) {
  Simulation sim(cfg, scripts != nullptr ? *scripts : cfg.scripts);
  std::istringstream in(choices);
  std::string tok;
  while (std::getline(in, tok, '.')) {
    if (tok.empty()) continue;
    const bool is_crash = tok.front() == 'c';
    const int p = std::stoi(is_crash ? tok.substr(1) : tok);
    if (p < 0 || p >= sim.procs()) throw std::invalid_argument("choice names no process: " + tok);
    if (is_crash) {
      sim.crash(p);
    } else {
      sim.step(p);
    }
  }
  return sim.result();
}

std::string to_string(const ExploreReport& r) {
  std::ostringstream os;
  os << "schedules " << r.schedules << ", plans " << r.plans << ", duplicates " << r.duplicates << ", blocked "
     << r.blocked << ", steps " << r.steps << ", crashes " << r.crashes << "\n";
  if (!r.complete) os << "search cut short by a limit; " << r.plans_left << " crash plans not started\n";
  os << "ops " << r.ops << " (crashed " << r.crashed_ops << ", effective " << r.effective << ", reissued "
     << r.reissued << ", visible " << r.visible << ")\n";
  os << "failures: linearizability " << r.linearizability_failures << ", detect " << r.detect_failures
     << ", monitors " << r.monitor_violations << ", malformed " << r.malformed << ", harness " << r.harness_errors
     << ", space " << (r.space_ok ? "ok" : r.space_detail) << "\n";
  os << "cells: algorithm " << r.algorithm_cells << ", pending-op records " << r.bookkeeping_cells
     << " (record writes are not counted against op bounds)\n";
  os << "max accesses:";
  for (const auto& [op, n] : r.max_events) os << " " << op << "=" << n;
  os << "\ncas retry exhausted " << r.cas_retry_exhausted << ", trivial writes " << r.trivial_writes
     << ", trivial cas " << r.trivial_cas << "\n";
  for (const auto& v : r.violations) os << "violation: " << v << "\n";
  if (r.failing_choices) os << "replay: --replay " << *r.failing_choices << "\n";
  if (r.failing_scripts) os << "scripts: " << *r.failing_scripts << "\n";
  os << "time " << r.seconds << " s\n";
  return os.str();
}

}  // namespace dura::harness

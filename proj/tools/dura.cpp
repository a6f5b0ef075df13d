// dura: explore, stress, check and bench from the command line.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dura/check.hpp"
#include "dura/explore.hpp"
#include "dura/stress.hpp"
#include "dura/trace.hpp"

namespace {

using namespace dura;
using namespace dura::harness;

struct ExploreArgs {
  std::string algo = "durec";
  int procs = 0;
  std::vector<std::string> scripts;
  int crashes = 0;
  std::uint64_t seed = 1;
  std::uint64_t runs = 0;
  std::string trace_out;
  std::string replay;
  bool random = false;
  std::uint64_t steps = 0;
  std::size_t random_ops = 0;
  double crash_rate = 0.01;
  std::vector<Word> init;
  int objects = 0;
  std::uint64_t max_schedules = 0;
  double time_limit = 0;
  bool keep_going = false;
};

ExploreConfig build_config(const ExploreArgs& a) {
  ExploreConfig cfg;
  cfg.algorithm = parse_algorithm(a.algo);
  for (const auto& s : a.scripts) cfg.scripts.push_back(parse_script(s, cfg.algorithm));
  if (a.procs > 0) {
    if (cfg.scripts.size() == 1) {
      cfg.scripts.resize(static_cast<std::size_t>(a.procs), cfg.scripts.front());
    } else if (!cfg.scripts.empty() && static_cast<int>(cfg.scripts.size()) != a.procs) {
      throw std::invalid_argument("--procs disagrees with the number of --script options");
    }
    cfg.random_procs = a.procs;
  }
  cfg.max_crashes = a.crashes;
  cfg.seed = a.seed;
  cfg.init = a.init;
  cfg.objects = a.objects;
  cfg.max_schedules = a.max_schedules;
  cfg.time_limit = a.time_limit;
  cfg.stop_on_violation = !a.keep_going;
  if (a.random || a.runs > 0 || a.steps > 0 || a.random_ops > 0) {
    cfg.scheduler = Scheduler::random;
    cfg.runs = a.runs > 0 ? a.runs : 1;
    cfg.min_steps = a.steps;
    cfg.random_ops = a.random_ops;
    cfg.crash_rate = a.crash_rate;
  }
  return cfg;
}

void write_trace(const std::string& path, const trace::Trace& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  trace::write_jsonl(out, t);
}

int run_explore(const ExploreArgs& a) {
  const ExploreConfig cfg = build_config(a);

  if (!a.replay.empty()) {
    validate(cfg);
    const RunResult run = replay(cfg, a.replay);
    ExploreReport report;
    const bool ok = evaluate(cfg, run, report);
    std::cout << "replay " << run.choices << ": " << run.steps << " steps, " << run.crashes << " crashes\n"
              << to_string(report);
    if (!a.trace_out.empty()) write_trace(a.trace_out, run.trace);
    return ok ? 0 : 1;
  }

  std::optional<trace::Trace> last;
  RunHook hook;
  if (!a.trace_out.empty()) hook = [&](const RunResult& run) { last = run.trace; };
  const ExploreReport report = explore(cfg, hook);
  std::cout << to_string(report);
  if (!a.trace_out.empty()) {
    if (report.failing_choices) {
      std::vector<Script> scripts;
      if (report.failing_scripts) {
        const std::string& text = *report.failing_scripts;
        std::size_t from = 0;
        for (;;) {
          const std::size_t bar = text.find(" | ", from);
          scripts.push_back(parse_script(text.substr(from, bar - from), cfg.algorithm));
          if (bar == std::string::npos) break;
          from = bar + 3;
        }
      }
      last = replay(cfg, *report.failing_choices, report.failing_scripts ? &scripts : nullptr).trace;
    }
    if (last) write_trace(a.trace_out, *last);
  }
  return report.ok() ? 0 : 1;
}

int run_check(const std::string& file, const std::string& spec_name, const std::string& algo) {
  std::ifstream in(file);
  if (!in) {
    std::cerr << "cannot open " << file << "\n";
    return 2;
  }
  trace::Trace t;
  try {
    t = trace::read_jsonl(in);
  } catch (const trace::ParseError& e) {
    std::cerr << file << ": " << e.what() << "\n";
    return 2;
  }
  std::optional<Algorithm> a;
  spec::SpecKind kind;
  if (!algo.empty()) a = parse_algorithm(algo);
  if (!spec_name.empty()) {
    kind = spec::parse_spec(spec_name);
  } else if (a) {
    kind = spec_of(*a);
  } else {
    std::cerr << "check needs --spec or --algo\n";
    return 2;
  }
  const TraceCheck c = check_trace(t, kind, a);
  std::cout << to_json(c) << "\n";
  return c.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detectable recoverable LL/SC and CAS objects: model checker, stress and bench"};
  app.set_config("--config", "", "key=value file mirroring the flags, one [section] per subcommand");
  app.require_subcommand(1);

  ExploreArgs ex;
  auto* explore_cmd = app.add_subcommand("explore", "run scripts under the simulated scheduler and check every run");
  explore_cmd->add_option("--algo", ex.algo, "durec | durecw | durall | duracas")->capture_default_str();
  explore_cmd->add_option("--procs", ex.procs, "process count; a single --script is given to every process");
  explore_cmd->add_option("--script", ex.scripts, "per-process script, e.g. 'ecll;ecsc' (repeat per process)");
  explore_cmd->add_option("--crashes", ex.crashes, "max crashes per process (random mode: 0 means no cap)")->capture_default_str();
  explore_cmd->add_option("--seed", ex.seed, "random scheduler seed")->capture_default_str();
  explore_cmd->add_option("--runs", ex.runs, "random runs (implies the random scheduler)");
  explore_cmd->add_option("--trace-out", ex.trace_out, "write the failing (else last) run as JSON lines");
  explore_cmd->add_option("--replay", ex.replay, "re-run one choice string, e.g. '0.0.1.c1.1'");
  explore_cmd->add_flag("--random", ex.random, "use the random scheduler");
  explore_cmd->add_option("--steps", ex.steps, "random mode: keep starting runs until this many steps");
  explore_cmd->add_option("--random-ops", ex.random_ops, "random mode: fresh random scripts of this length");
  explore_cmd->add_option("--crash-rate", ex.crash_rate, "random mode: crash probability per crash point")
      ->capture_default_str();
  explore_cmd->add_option("--init", ex.init, "initial value per object");
  explore_cmd->add_option("--objects", ex.objects, "object count (default: from the scripts)");
  explore_cmd->add_option("--max-schedules", ex.max_schedules, "stop after this many schedules");
  explore_cmd->add_option("--time-limit", ex.time_limit, "exhaustive mode: stop after this many seconds");
  explore_cmd->add_flag("--keep-going", ex.keep_going, "do not stop at the first violation");

  StressConfig st;
  std::string stress_algo = "duracas";
  auto* stress_cmd = app.add_subcommand("stress", "native threads with injected crashes");
  stress_cmd->add_option("--algo", stress_algo, "duracas | durall")->capture_default_str();
  stress_cmd->add_option("--procs", st.threads, "executor threads")->capture_default_str();
  stress_cmd->add_option("--ops", st.ops_per_thread, "ops per executor")->capture_default_str();
  stress_cmd->add_option("--crash-rate", st.crash_rate, "crash probability per op")->capture_default_str();
  stress_cmd->add_option("--increments", st.increment_share, "share of counter increments")->capture_default_str();
  stress_cmd->add_option("--objects", st.objects, "shared objects besides the counter")->capture_default_str();
  stress_cmd->add_option("--seed", st.seed, "seed")->capture_default_str();

  std::string check_file;
  std::string check_spec;
  std::string check_algo;
  auto* check_cmd = app.add_subcommand("check", "check a JSON-lines trace; exit 0 iff clean");
  check_cmd->add_option("trace", check_file, "trace file")->required();
  check_cmd->add_option("--spec", check_spec, "ec | ecw | llsc | wcas");
  check_cmd->add_option("--algo", check_algo, "also enforce this algorithm's access bounds");

  BenchConfig bc;
  auto* bench_cmd = app.add_subcommand("bench", "throughput table over the native backend");
  bench_cmd->add_option("--procs", bc.threads, "threads")->capture_default_str();
  bench_cmd->add_option("--ops", bc.ops_per_thread, "ops per thread")->capture_default_str();
  bench_cmd->add_option("--read-share", bc.read_share, "fraction of reads")->capture_default_str();
  bench_cmd->add_option("--objects", bc.objects, "objects")->capture_default_str();
  bench_cmd->add_option("--seed", bc.seed, "seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*explore_cmd) return run_explore(ex);
    if (*stress_cmd) {
      st.algorithm = parse_algorithm(stress_algo);
      const StressReport r = stress(st);
      std::cout << to_string(r);
      return r.ok() ? 0 : 1;
    }
    if (*check_cmd) return run_check(check_file, check_spec, check_algo);
    if (*bench_cmd) {
      std::cout << format_table(bench(bc));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

#pragma once

// Reference durable-linearizability decision for tiny histories: tries every
// subset of the optional ops, every order of the chosen ops, and for EC
// histories every injective renaming of observed seqs to tokens. No memo, no
// pruning beyond dropping a prefix that already disagrees. Also a generator
// of random small histories with a known linearization, optionally corrupted.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "dura/specmodels.hpp"
#include "dura/verify.hpp"

namespace brute {

using dura::Response;
using dura::Word;
using dura::spec::SpecKind;
using dura::verify::OpRecord;
using dura::verify::OpStatus;

struct State {
  Word val = 0;
  std::uint64_t token = 0;                      // current context, counted in successful updates
  std::map<std::uint64_t, std::uint64_t> link;  // llsc: handle -> token seen by its LL
  std::map<Word, std::uint64_t> named;          // ec: observed seq -> token
  std::vector<Word> not_current;                // ec: seqs known to differ from the current token
};

inline bool token_named(const State& s, std::uint64_t t) {
  for (const auto& [k, v] : s.named) {
    if (v == t) return true;
  }
  return false;
}

// Every (next state, response) the op can produce from s.
inline std::vector<std::pair<State, Response>> apply(const State& s, SpecKind spec, const OpRecord& op) {
  std::vector<std::pair<State, Response>> out;
  auto advanced = [&](State n, Word v) {
    n.val = v;
    ++n.token;
    n.not_current.clear();
    return n;
  };
  const auto& a = op.args;
  switch (spec) {
    case SpecKind::wcas:
      if (op.name == "read") out.push_back({s, Response::word(s.val)});
      if (op.name == "write") out.push_back({advanced(s, a[0]), Response::ack()});
      if (op.name == "cas") {
        if (s.val == a[0]) out.push_back({advanced(s, a[1]), Response::boolean(true)});
        else out.push_back({s, Response::boolean(false)});
      }
      break;
    case SpecKind::llsc: {
      auto it = s.link.find(op.handle);
      const bool linked = it != s.link.end() && it->second == s.token;
      if (op.name == "ll") {
        State n = s;
        n.link[op.handle] = s.token;
        out.push_back({n, Response::word(s.val)});
      }
      if (op.name == "vl") out.push_back({s, Response::boolean(linked)});
      if (op.name == "sc") {
        if (linked) out.push_back({advanced(s, a[0]), Response::boolean(true)});
        else out.push_back({s, Response::boolean(false)});
      }
      if (op.name == "write") out.push_back({advanced(s, a[0]), Response::ack()});
      break;
    }
    case SpecKind::ec:
    case SpecKind::ecw: {
      // Both ways of settling whether seq q names the current token.
      auto cases = [&](Word q, auto&& body) {
        auto it = s.named.find(q);
        if (it != s.named.end()) {
          body(s, it->second == s.token);
          return;
        }
        const bool excluded = std::find(s.not_current.begin(), s.not_current.end(), q) != s.not_current.end();
        if (!excluded && !token_named(s, s.token)) {
          State yes = s;
          yes.named[q] = s.token;
          body(yes, true);
        }
        State no = s;
        no.not_current.push_back(q);
        body(no, false);
      };
      if (op.name == "ecll") {
        if (op.response.type != Response::Type::pair) {
          // Unobserved: any response.
          out.push_back({s, Response::none()});
        } else {
          cases(op.response.a, [&](const State& n, bool current) {
            if (current && op.response.b == s.val) out.push_back({n, op.response});
          });
        }
      }
      if (op.name == "ecvl") {
        cases(a[0], [&](const State& n, bool current) { out.push_back({n, Response::boolean(current)}); });
      }
      if (op.name == "ecsc") {
        cases(a[0], [&](const State& n, bool current) {
          if (current) out.push_back({advanced(n, a[1]), Response::boolean(true)});
          else out.push_back({n, Response::boolean(false)});
        });
      }
      if (op.name == "write" && spec == SpecKind::ecw) out.push_back({advanced(s, a[0]), Response::ack()});
      break;
    }
  }
  return out;
}

class Decider {
 public:
  Decider(const std::vector<OpRecord>& ops, SpecKind spec, Word init) : ops_(ops), spec_(spec), init_(init) {}

  bool linearizable() {
    std::vector<std::size_t> optional;
    for (std::size_t i = 0; i < ops_.size(); ++i) {
      if (!ops_[i].mandatory()) optional.push_back(i);
    }
    for (std::uint64_t pick = 0; pick < (std::uint64_t{1} << optional.size()); ++pick) {
      chosen_.clear();
      for (std::size_t i = 0; i < ops_.size(); ++i) {
        if (ops_[i].mandatory()) chosen_.push_back(i);
      }
      for (std::size_t j = 0; j < optional.size(); ++j) {
        if (pick >> j & 1) chosen_.push_back(optional[j]);
      }
      State s;
      s.val = init_;
      s.named[0] = 0;
      order_.clear();
      used_.assign(ops_.size(), false);
      if (orders(s)) return true;
    }
    return false;
  }

 private:
  bool orders(const State& s) {
    if (order_.size() == chosen_.size()) return true;
    for (std::size_t i : chosen_) {
      if (used_[i]) continue;
      // Every already placed op must not have begun after i ended.
      bool fits = true;
      for (std::size_t j : order_) fits = fits && !(ops_[i].end < ops_[j].invoke);
      if (!fits) continue;
      for (auto& [next, r] : apply(s, spec_, ops_[i])) {
        if (ops_[i].mandatory() && !dura::equivalent(r, ops_[i].response)) continue;
        used_[i] = true;
        order_.push_back(i);
        if (orders(next)) return true;
        order_.pop_back();
        used_[i] = false;
      }
    }
    return false;
  }

  const std::vector<OpRecord>& ops_;
  SpecKind spec_;
  Word init_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> order_;
  std::vector<bool> used_;
};

inline bool linearizable(const std::vector<OpRecord>& ops, SpecKind spec, Word init) {
  return Decider(ops, spec, init).linearizable();
}

// ---------------------------------------------------------------------------

inline const char* random_name(SpecKind spec, std::mt19937_64& rng) {
  static const char* wcas[] = {"read", "write", "cas"};
  static const char* llsc[] = {"ll", "vl", "sc", "write"};
  static const char* ec[] = {"ecll", "ecvl", "ecsc"};
  static const char* ecw[] = {"ecll", "ecvl", "ecsc", "write"};
  switch (spec) {
    case SpecKind::wcas: return wcas[rng() % 3];
    case SpecKind::llsc: return llsc[rng() % 4];
    case SpecKind::ec: return ec[rng() % 3];
    case SpecKind::ecw: return ecw[rng() % 4];
  }
  return "read";
}

/// A history of at most `max_ops` ops from up to three processes. Effects are
/// applied at random points inside the intervals, so the uncorrupted history
/// is durably linearizable; with probability `corrupt` one observed response
/// is then changed.
inline std::vector<OpRecord> random_history(SpecKind spec, Word init, std::size_t max_ops, double corrupt,
                                            std::mt19937_64& rng) {
  const int procs = 1 + static_cast<int>(rng() % 3);
  const std::size_t n = 1 + rng() % max_ops;

  // Interval endpoints: a random interleaving of per-process invoke/end pairs.
  std::vector<int> owner(n);
  for (auto& o : owner) o = static_cast<int>(rng() % procs);
  std::vector<std::pair<int, bool>> marks;  // (op, is_end)
  {
    std::vector<std::vector<std::size_t>> per(static_cast<std::size_t>(procs));
    for (std::size_t i = 0; i < n; ++i) per[static_cast<std::size_t>(owner[i])].push_back(i);
    std::vector<std::size_t> pos(static_cast<std::size_t>(procs), 0);
    std::vector<bool> open(static_cast<std::size_t>(procs), false);
    for (;;) {
      std::vector<int> live;
      for (int p = 0; p < procs; ++p) {
        if (pos[static_cast<std::size_t>(p)] < per[static_cast<std::size_t>(p)].size()) live.push_back(p);
      }
      if (live.empty()) break;
      const auto p = static_cast<std::size_t>(live[rng() % live.size()]);
      const auto op = per[p][pos[p]];
      marks.push_back({static_cast<int>(op), open[p]});
      if (open[p]) ++pos[p];
      open[p] = !open[p];
    }
  }

  std::vector<OpRecord> ops(n);
  std::vector<std::uint64_t> effect_at(n);
  for (std::size_t t = 0; t < marks.size(); ++t) {
    auto& op = ops[static_cast<std::size_t>(marks[t].first)];
    if (marks[t].second) op.end = 2 * t;
    else op.invoke = 2 * t;
  }
  for (std::size_t i = 0; i < n; ++i) {
    ops[i].proc = owner[i];
    ops[i].handle = static_cast<std::uint64_t>(owner[i]) + 1;
    ops[i].obj = 1;
    ops[i].name = random_name(spec, rng);
    effect_at[i] = ops[i].invoke + 1 + 2 * (rng() % ((ops[i].end - ops[i].invoke) / 2));
  }

  // Statuses. The last op of a process may be left pending.
  std::vector<bool> takes_effect(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    const auto roll = rng() % 10;
    if (roll == 0) {
      ops[i].status = OpStatus::effective;
      ops[i].crashed = true;
    } else if (roll == 1) {
      ops[i].status = OpStatus::repeatable;
      ops[i].crashed = true;
      takes_effect[i] = rng() % 2 == 0;
    } else {
      ops[i].status = OpStatus::completed;
    }
  }
  for (int p = 0; p < procs; ++p) {
    for (std::size_t i = n; i-- > 0;) {
      if (owner[i] != p) continue;
      if (rng() % 5 == 0) {
        ops[i].status = OpStatus::pending;
        ops[i].end = dura::verify::kNever;
        takes_effect[i] = rng() % 2 == 0;
      }
      break;
    }
  }

  // Apply effects in order of their points and record responses. Seqs seen by
  // a process feed its later ecvl / ecsc arguments.
  std::vector<std::size_t> by_point(n);
  for (std::size_t i = 0; i < n; ++i) by_point[i] = i;
  std::sort(by_point.begin(), by_point.end(), [&](auto x, auto y) { return effect_at[x] < effect_at[y]; });
  Word val = init;
  std::uint64_t token = 0;
  std::vector<Word> impl_seq{0};  // token -> seq the implementation reports
  std::map<std::uint64_t, std::uint64_t> link;
  std::map<int, Word> last_seq;
  Word next_value = 1;
  for (std::size_t i : by_point) {
    OpRecord& op = ops[i];
    const std::string& name = op.name;
    auto fresh = [&] { return (next_value++ % 4) + (rng() % 2 ? 0 : init); };
    Response r;
    bool mutate = false;
    Word nv = 0;
    if (spec == SpecKind::wcas) {
      if (name == "read") r = Response::word(val);
      if (name == "write") op.args = {nv = fresh()}, r = Response::ack(), mutate = true;
      if (name == "cas") {
        const Word old = rng() % 3 == 0 ? fresh() : val;
        op.args = {old, nv = fresh()};
        mutate = old == val;
        r = Response::boolean(mutate);
      }
    } else if (spec == SpecKind::llsc) {
      auto it = link.find(op.handle);
      const bool linked = it != link.end() && it->second == token;
      if (name == "ll") r = Response::word(val);
      if (name == "vl") r = Response::boolean(linked);
      if (name == "sc") op.args = {nv = fresh()}, mutate = linked, r = Response::boolean(linked);
      if (name == "write") op.args = {nv = fresh()}, mutate = true, r = Response::ack();
      if (name == "ll" && takes_effect[i]) link[op.handle] = token;
    } else {
      const Word s = last_seq.count(op.proc) ? last_seq[op.proc] : impl_seq[rng() % impl_seq.size()];
      const bool current = s == impl_seq[token];
      if (name == "ecll") {
        r = Response::pair(impl_seq[token], val);
        if (takes_effect[i]) last_seq[op.proc] = impl_seq[token];
      }
      if (name == "ecvl") op.args = {s}, r = Response::boolean(current);
      if (name == "ecsc") op.args = {s, nv = fresh()}, mutate = current, r = Response::boolean(current);
      if (name == "write") op.args = {nv = fresh()}, mutate = true, r = Response::ack();
    }
    if (!takes_effect[i]) {
      // The op is dropped: any response it reports is fine, the state stays.
      mutate = false;
    }
    if (mutate) {
      val = nv;
      ++token;
      // Seqs grow but their spacing is arbitrary.
      impl_seq.push_back(impl_seq.back() + 1 + rng() % 3);
    }
    op.response = r;
  }
  for (auto& op : ops) {
    if (op.status == OpStatus::pending) op.response = Response::none();
  }

  if (std::uniform_real_distribution<double>(0, 1)(rng) < corrupt) {
    std::vector<std::size_t> observed;
    for (std::size_t i = 0; i < n; ++i) {
      if (ops[i].mandatory()) observed.push_back(i);
    }
    if (!observed.empty()) {
      OpRecord& op = ops[observed[rng() % observed.size()]];
      switch (op.response.type) {
        case Response::Type::boolean: op.response = Response::boolean(!op.response.as_bool()); break;
        case Response::Type::word: op.response = Response::word(op.response.a + 1 + rng() % 2); break;
        case Response::Type::pair:
          if (rng() % 2) op.response.a += 1;
          else op.response.b += 1;
          break;
        default: op.response = Response::boolean(false); break;
      }
    }
  }
  return ops;
}

}  // namespace brute

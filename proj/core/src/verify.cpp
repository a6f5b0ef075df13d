#include "dura/verify.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dura/durecw.hpp"

namespace dura::verify {

using trace::Event;
using trace::EventKind;

const char* to_string(OpStatus s) {
  switch (s) {
    case OpStatus::completed: return "completed";
    case OpStatus::effective: return "effective";
    case OpStatus::repeatable: return "repeatable";
    case OpStatus::pending: return "pending";
  }
  return "?";
}

std::string describe(const OpRecord& op) {
  std::ostringstream os;
  os << "p" << op.proc << " " << op.name << "(";
  for (std::size_t i = 0; i < op.args.size(); ++i) os << (i ? "," : "") << op.args[i];
  os << ")@" << op.obj << " [" << op.invoke << ",";
  if (op.end == kNever) {
    os << "inf";
  } else {
    os << op.end;
  }
  os << "] " << to_string(op.status);
  if (op.mandatory()) os << " -> " << to_string(op.response);
  return os.str();
}

// ---------------------------------------------------------------------------
// History extraction

std::vector<OpRecord> extract_ops(const trace::Trace& t) {
  struct ProcState {
    std::optional<std::size_t> open;
    std::optional<std::size_t> last_closed;
    std::optional<Detection> before;
    bool in_recover = false;
  };
  std::map<int, ProcState> procs;
  std::map<std::uint64_t, int> busy_handles;  // handle -> proc with an open op
  std::vector<OpRecord> ops;

  auto fail = [](const Event& e, const std::string& msg) {
    throw MalformedHistory("step " + std::to_string(e.step) + " (p" + std::to_string(e.proc) + "): " + msg);
  };
  auto close = [&](ProcState& ps, const OpRecord& op) {
    busy_handles.erase(op.handle);
    ps.last_closed = ps.open;
    ps.open.reset();
    ps.in_recover = false;
  };

  for (const Event& e : t) {
    switch (e.kind) {
      case EventKind::detect: {
        ProcState& ps = procs[e.proc];
        const Detection d{e.counter, e.result};
        if (e.op == "before") {
          ps.before = d;
        } else if (e.op == "after") {
          if (ps.open || !ps.last_closed) fail(e, "detect after with no finished operation");
          OpRecord& op = ops[*ps.last_closed];
          op.after = d;
          if (op.crashed) {
            const bool grew = op.before && d.counter > op.before->counter;
            op.status = grew ? OpStatus::effective : OpStatus::repeatable;
            op.response = grew ? d.response : Response::none();
          }
          ps.last_closed.reset();
        } else {
          fail(e, "detect phase must be before or after");
        }
        break;
      }
      case EventKind::invoke: {
        ProcState& ps = procs[e.proc];
        if (ps.open) fail(e, "invoke while an operation is in flight");
        if (auto it = busy_handles.find(e.handle); it != busy_handles.end()) {
          fail(e, "handle " + std::to_string(e.handle) + " already busy in p" + std::to_string(it->second));
        }
        OpRecord op;
        op.proc = e.proc;
        op.handle = e.handle;
        op.obj = e.obj;
        op.name = e.op;
        op.args = e.args;
        op.invoke = e.step;
        op.before = ps.before;
        ps.before.reset();
        ps.open = ops.size();
        ps.last_closed.reset();
        busy_handles[e.handle] = e.proc;
        ops.push_back(std::move(op));
        break;
      }
      case EventKind::response: {
        ProcState& ps = procs[e.proc];
        if (!ps.open) fail(e, "response without an invoke");
        OpRecord& op = ops[*ps.open];
        if (op.crashed) fail(e, "response from a crashed operation");
        op.end = e.step;
        op.status = OpStatus::completed;
        op.response = e.result;
        close(ps, op);
        break;
      }
      case EventKind::crash: {
        ProcState& ps = procs[e.proc];
        if (ps.open) ops[*ps.open].crashed = true;
        ps.in_recover = false;
        break;
      }
      case EventKind::recover_begin: {
        ProcState& ps = procs[e.proc];
        if (!ps.open || !ops[*ps.open].crashed) fail(e, "recover without a crashed operation");
        ps.in_recover = true;
        break;
      }
      case EventKind::recover_done: {
        ProcState& ps = procs[e.proc];
        if (!ps.open || !ps.in_recover) fail(e, "recover_done without recover_begin");
        OpRecord& op = ops[*ps.open];
        op.end = e.step;
        op.status = OpStatus::repeatable;
        close(ps, op);
        break;
      }
      case EventKind::restart:
      case EventKind::memory:
      case EventKind::monitor:
      case EventKind::alloc:
        break;
    }
  }
  return ops;
}

std::map<std::uint64_t, Word> initial_values(const trace::Trace& t) {
  std::map<std::uint64_t, WordPair> alloc_init;
  std::map<std::uint64_t, std::uint64_t> y_of_x;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> composites;  // (obj, Z x-cell)
  for (const Event& e : t) {
    if (e.kind == EventKind::alloc && e.args.size() >= 2) {
      alloc_init[e.obj] = WordPair{e.args[0], e.args[1]};
    } else if (e.kind == EventKind::monitor) {
      if (e.monitor == "reg_ec_object" && !e.args.empty()) y_of_x[e.obj] = e.args[0];
      if (e.monitor == "reg_object" && e.args.size() >= 2) composites.emplace_back(e.obj, e.args[1]);
    }
  }
  std::map<std::uint64_t, Word> init;
  for (const auto& [x, y] : y_of_x) {
    if (auto it = alloc_init.find(y); it != alloc_init.end()) init[x] = it->second.second;
  }
  for (const auto& [obj, zx] : composites) {
    if (auto it = init.find(zx); it != init.end()) init[obj] = durecw::unpack(it->second).val;
  }
  return init;
}

// ---------------------------------------------------------------------------
// Search

namespace {

enum class Kind : std::uint8_t { ecll, ecvl, ecsc, ecwrite, ll, vl, sc, llwrite, read, write, cas };

struct Prepared {
  Kind kind = Kind::ecll;
  Word a = 0;
  Word b = 0;
};

Prepared prepare(const OpRecord& op, spec::SpecKind spec) {
  auto need = [&](std::size_t n) {
    if (op.args.size() != n) {
      throw MalformedHistory(describe(op) + ": expected " + std::to_string(n) + " argument(s)");
    }
  };
  auto arg = [&](std::size_t i) { return op.args[i]; };
  switch (spec) {
    case spec::SpecKind::ec:
    case spec::SpecKind::ecw:
      if (op.name == "ecll") return need(0), Prepared{Kind::ecll};
      if (op.name == "ecvl") return need(1), Prepared{Kind::ecvl, arg(0)};
      if (op.name == "ecsc") return need(2), Prepared{Kind::ecsc, arg(0), arg(1)};
      if (op.name == "write") {
        if (spec == spec::SpecKind::ec) throw MalformedHistory(describe(op) + ": Write on a non-writable object");
        return need(1), Prepared{Kind::ecwrite, arg(0)};
      }
      break;
    case spec::SpecKind::llsc:
      if (op.name == "ll") return need(0), Prepared{Kind::ll};
      if (op.name == "vl") return need(0), Prepared{Kind::vl};
      if (op.name == "sc") return need(1), Prepared{Kind::sc, arg(0)};
      if (op.name == "write") return need(1), Prepared{Kind::llwrite, arg(0)};
      break;
    case spec::SpecKind::wcas:
      if (op.name == "read") return need(0), Prepared{Kind::read};
      if (op.name == "write") return need(1), Prepared{Kind::write, arg(0)};
      if (op.name == "cas") return need(2), Prepared{Kind::cas, arg(0), arg(1)};
      break;
  }
  throw MalformedHistory(describe(op) + ": not an operation of spec " + spec::to_string(spec));
}

constexpr std::uint64_t kNotCurrent = std::numeric_limits<std::uint64_t>::max();

// Oracle state plus the partial renaming from implementation seqs to tokens.
struct Abstract {
  spec::EcState ec;
  spec::LlscState llsc;
  spec::WcasState wcas;
  std::vector<std::pair<Word, std::uint64_t>> bound;  // impl seq -> token, sorted
  std::vector<Word> unequal;                           // impl seqs known to differ from ec.seq

  std::optional<std::uint64_t> lookup(Word s) const {
    auto it = std::lower_bound(bound.begin(), bound.end(), std::make_pair(s, std::uint64_t{0}));
    if (it != bound.end() && it->first == s) return it->second;
    return std::nullopt;
  }
  bool token_taken(std::uint64_t t) const {
    return std::any_of(bound.begin(), bound.end(), [&](const auto& p) { return p.second == t; });
  }
  bool can_bind(Word s) const {
    return !lookup(s) && !token_taken(ec.seq.value) &&
           std::find(unequal.begin(), unequal.end(), s) == unequal.end();
  }
  void bind(Word s) {
    const auto v = std::make_pair(s, ec.seq.value);
    bound.insert(std::lower_bound(bound.begin(), bound.end(), v), v);
  }
  void mark_unequal(Word s) {
    unequal.insert(std::lower_bound(unequal.begin(), unequal.end(), s), s);
  }
  void advance(const spec::EcState& next) {
    if (next.seq != ec.seq) unequal.clear();  // constraints only concern the current token
    ec = next;
  }

  void append_key(std::string& k) const {
    auto put = [&](std::uint64_t x) { k.append(reinterpret_cast<const char*>(&x), sizeof x); };
    put(ec.seq.value);
    put(ec.val);
    put(bound.size());
    for (const auto& [s, t] : bound) put(s), put(t);
    put(unequal.size());
    for (Word s : unequal) put(s);
    put(llsc.seq.value);
    put(llsc.val);
    put(llsc.last.size());
    for (const auto& [p, t] : llsc.last) put(p), put(t.value);
    put(wcas.val);
  }
};

struct Outcome {
  Abstract next;
  Response response;
};

// All oracle outcomes of `p` from `s`. `observed` (when set) restricts the
// outcomes to those whose response matches it.
void step(const Abstract& s, const Prepared& p, const OpRecord& op, const Response* observed,
          std::vector<Outcome>& out) {
  auto emit = [&](Abstract next, Response r) {
    if (observed != nullptr && !equivalent(*observed, r)) return;
    out.push_back(Outcome{std::move(next), r});
  };
  // EC ops naming a context: branch on whether the context is the current token.
  auto with_context = [&](Word ctx, auto&& apply) {
    if (auto tok = s.lookup(ctx)) {
      apply(Abstract(s), *tok);
      return;
    }
    if (s.can_bind(ctx)) {
      Abstract same = s;
      same.bind(ctx);
      apply(std::move(same), s.ec.seq.value);
      Abstract differ = s;
      differ.mark_unequal(ctx);
      apply(std::move(differ), kNotCurrent);
      return;
    }
    apply(Abstract(s), kNotCurrent);
  };

  switch (p.kind) {
    case Kind::ecll: {
      if (observed == nullptr) {
        emit(s, Response::none());
        return;
      }
      if (observed->type != Response::Type::pair || observed->b != s.ec.val) return;
      Abstract next = s;
      if (auto tok = s.lookup(observed->a)) {
        if (*tok != s.ec.seq.value) return;
      } else {
        if (!s.can_bind(observed->a)) return;
        next.bind(observed->a);
      }
      emit(std::move(next), *observed);
      return;
    }
    case Kind::ecvl:
    case Kind::ecsc:
      with_context(p.a, [&](Abstract next, std::uint64_t tok) {
        const spec::EcCall call{p.kind == Kind::ecvl ? spec::EcOp::vl : spec::EcOp::sc, spec::SeqToken{tok}, p.b};
        const auto r = spec::ec_apply(next.ec, call, true);
        next.advance(r.state);
        emit(std::move(next), r.response);
      });
      return;
    case Kind::ecwrite: {
      Abstract next = s;
      const auto r = spec::ec_apply(s.ec, spec::EcCall{spec::EcOp::write, {}, p.a}, true);
      next.advance(r.state);
      emit(std::move(next), r.response);
      return;
    }
    case Kind::ll:
    case Kind::vl:
    case Kind::sc:
    case Kind::llwrite: {
      static constexpr spec::LlscOp map[] = {spec::LlscOp::ll, spec::LlscOp::vl, spec::LlscOp::sc, spec::LlscOp::write};
      const auto r = spec::llsc_apply(s.llsc, op.handle, map[static_cast<int>(p.kind) - static_cast<int>(Kind::ll)], p.a);
      Abstract next = s;
      next.llsc = r.state;
      emit(std::move(next), r.response);
      return;
    }
    case Kind::read:
    case Kind::write:
    case Kind::cas: {
      static constexpr spec::WcasOp map[] = {spec::WcasOp::read, spec::WcasOp::write, spec::WcasOp::cas};
      const auto r = spec::wcas_apply(s.wcas, map[static_cast<int>(p.kind) - static_cast<int>(Kind::read)], p.a, p.b);
      Abstract next = s;
      next.wcas = r.state;
      emit(std::move(next), r.response);
      return;
    }
  }
}

Abstract initial_state(Word init) {
  Abstract a;
  a.ec.val = init;
  a.llsc.val = init;
  a.wcas.val = init;
  a.bound.emplace_back(0, 0);  // every object starts at seq 0 = the first token
  return a;
}

class Search {
 public:
  Search(const std::vector<OpRecord>& ops, spec::SpecKind spec, Word init, const CheckOptions& opt)
      : ops_(ops), opt_(opt), init_(init) {
    order_.resize(ops.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::sort(order_.begin(), order_.end(), [&](std::size_t x, std::size_t y) { return ops[x].invoke < ops[y].invoke; });
    for (std::size_t i : order_) prepared_.push_back(prepare(ops[i], spec));
    for (std::size_t k = 0; k < order_.size(); ++k) {
      if (ops[order_[k]].mandatory()) mandatory_ |= std::uint64_t{1} << k;
    }
  }

  Verdict run() {
    Verdict v;
    budget_hit_ = false;
    const bool ok = dfs(0, initial_state(init_));
    v.nodes = nodes_;
    if (ok) {
      std::uint64_t used = 0;
      for (const auto& [k, r] : path_) {
        v.witness.push_back(WitnessEntry{order_[k], true, r});
        used |= std::uint64_t{1} << k;
      }
      for (std::size_t k = 0; k < order_.size(); ++k) {
        if (!(used >> k & 1)) v.witness.push_back(WitnessEntry{order_[k], false, Response::none()});
      }
      return v;
    }
    v.ok = false;
    std::ostringstream os;
    if (budget_hit_) {
      os << "search budget of " << opt_.node_budget << " nodes exhausted; verdict inconclusive";
    } else {
      os << "no durable linearization. Longest consistent prefix:";
      for (const auto& [k, r] : best_path_) os << "\n  " << describe(ops_[order_[k]]) << " => " << to_string(r);
      os << "\nNo remaining op can be placed next; pending mandatory ops:";
      std::uint64_t used = 0;
      for (const auto& pr : best_path_) used |= std::uint64_t{1} << pr.first;
      for (std::size_t k = 0; k < order_.size(); ++k) {
        if ((mandatory_ >> k & 1) && !(used >> k & 1)) os << "\n  " << describe(ops_[order_[k]]);
      }
    }
    v.explanation = os.str();
    return v;
  }

 private:
  bool dfs(std::uint64_t mask, const Abstract& state) {
    if ((mask & mandatory_) == mandatory_) return true;
    if (++nodes_ > opt_.node_budget) {
      budget_hit_ = true;
      return false;
    }
    std::string key(reinterpret_cast<const char*>(&mask), sizeof mask);
    state.append_key(key);
    if (failed_.count(key) != 0) return false;

    std::uint64_t min_end = kNever;
    std::uint64_t max_inv = 0;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      const OpRecord& op = ops_[order_[k]];
      if (mask >> k & 1) {
        max_inv = std::max(max_inv, op.invoke);
      } else if (mandatory_ >> k & 1) {
        min_end = std::min(min_end, op.end);
      }
    }

    std::vector<Outcome> outs;
    for (std::size_t k = 0; k < order_.size(); ++k) {
      if (mask >> k & 1) continue;
      const OpRecord& op = ops_[order_[k]];
      if (op.invoke > min_end) break;        // some mandatory op ended before this began
      if (op.end < max_inv) continue;        // ended before an already placed op began
      outs.clear();
      step(state, prepared_[k], op, op.mandatory() ? &op.response : nullptr, outs);
      for (auto& o : outs) {
        path_.emplace_back(k, o.response);
        if (path_.size() > best_path_.size()) best_path_ = path_;
        if (dfs(mask | (std::uint64_t{1} << k), o.next)) return true;
        path_.pop_back();
        if (budget_hit_) return false;
      }
    }
    failed_.insert(std::move(key));
    return false;
  }

  const std::vector<OpRecord>& ops_;
  CheckOptions opt_;
  Word init_;
  std::vector<std::size_t> order_;
  std::vector<Prepared> prepared_;
  std::uint64_t mandatory_ = 0;
  std::uint64_t nodes_ = 0;
  bool budget_hit_ = false;
  std::unordered_set<std::string> failed_;
  std::vector<std::pair<std::size_t, Response>> path_;
  std::vector<std::pair<std::size_t, Response>> best_path_;
};

}  // namespace

Verdict check_object(const std::vector<OpRecord>& ops, spec::SpecKind spec, Word init, const CheckOptions& opt) {
  if (ops.size() > 64) throw MalformedHistory("more than 64 operations on one object");
  return Search(ops, spec, init, opt).run();
}

Verdict check_durable(const std::vector<OpRecord>& ops, spec::SpecKind spec,
                      const std::map<std::uint64_t, Word>& init, const CheckOptions& opt) {
  std::map<std::uint64_t, std::vector<std::size_t>> by_obj;
  for (std::size_t i = 0; i < ops.size(); ++i) by_obj[ops[i].obj].push_back(i);

  Verdict all;
  for (const auto& [obj, idx] : by_obj) {
    std::vector<OpRecord> sub;
    sub.reserve(idx.size());
    for (std::size_t i : idx) sub.push_back(ops[i]);
    const auto it = init.find(obj);
    Verdict v = check_object(sub, spec, it == init.end() ? 0 : it->second, opt);
    all.nodes += v.nodes;
    if (!v.ok) {
      all.ok = false;
      all.explanation = "object " + std::to_string(obj) + ": " + v.explanation;
      all.witness.clear();
      return all;
    }
    for (auto& w : v.witness) {
      w.op = idx[w.op];
      all.witness.push_back(w);
    }
  }
  std::string why;
  if (!replay_witness(ops, all.witness, spec, init, &why)) {
    all.ok = false;
    all.explanation = "internal error: witness does not replay: " + why;
  }
  return all;
}

Verdict check_durable(const trace::Trace& t, spec::SpecKind spec, const CheckOptions& opt) {
  return check_durable(extract_ops(t), spec, initial_values(t), opt);
}

// ---------------------------------------------------------------------------
// Witness replay

bool replay_witness(const std::vector<OpRecord>& ops, const std::vector<WitnessEntry>& witness,
                    spec::SpecKind spec, const std::map<std::uint64_t, Word>& init, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why != nullptr) *why = m;
    return false;
  };
  std::vector<int> seen(ops.size(), 0);
  for (const auto& w : witness) {
    if (w.op >= ops.size()) return fail("witness names op " + std::to_string(w.op) + " out of range");
    if (seen[w.op]++ != 0) return fail("op listed twice: " + describe(ops[w.op]));
    if (!w.effect && ops[w.op].mandatory()) return fail("mandatory op dropped: " + describe(ops[w.op]));
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (seen[i] == 0) return fail("op missing from witness: " + describe(ops[i]));
  }

  struct ObjState {
    spec::EcState ec;
    spec::LlscState llsc;
    spec::WcasState wcas;
    std::map<Word, std::uint64_t> to_token{{0, 0}};
    std::map<std::uint64_t, Word> to_impl{{0, 0}};
    std::set<Word> differs;  // impl seqs seen to differ from the current token
    std::vector<std::size_t> placed;
  };
  std::map<std::uint64_t, ObjState> objs;

  for (const auto& w : witness) {
    if (!w.effect) continue;
    const OpRecord& op = ops[w.op];
    auto [it, fresh] = objs.try_emplace(op.obj);
    ObjState& st = it->second;
    if (fresh) {
      const auto iv = init.find(op.obj);
      const Word v = iv == init.end() ? 0 : iv->second;
      st.ec.val = st.llsc.val = st.wcas.val = v;
    }
    for (std::size_t prev : st.placed) {
      if (op.end < ops[prev].invoke) {
        return fail(describe(op) + " placed after " + describe(ops[prev]) + " which began after it ended");
      }
    }
    st.placed.push_back(w.op);
    if (op.mandatory() && !equivalent(op.response, w.response)) {
      return fail(describe(op) + " witness response " + to_string(w.response) + " differs from observed");
    }

    // Resolve an implementation seq against the current token, binding it
    // when the witness response says they are equal.
    auto resolve = [&](Word s, bool equal_expected) -> std::optional<std::uint64_t> {
      if (auto t = st.to_token.find(s); t != st.to_token.end()) return t->second;
      const std::uint64_t cur = st.ec.seq.value;
      if (!equal_expected) {
        st.differs.insert(s);
        return kNotCurrent;
      }
      if (st.to_impl.count(cur) != 0 || st.differs.count(s) != 0) return std::nullopt;
      st.to_token[s] = cur;
      st.to_impl[cur] = s;
      return cur;
    };
    auto apply_ec = [&](const spec::EcCall& call) -> std::optional<Response> {
      try {
        const auto r = spec::ec_apply(st.ec, call, spec == spec::SpecKind::ecw);
        if (r.state.seq != st.ec.seq) st.differs.clear();
        st.ec = r.state;
        return r.response;
      } catch (const spec::ContractViolation&) {
        return std::nullopt;
      }
    };

    std::optional<Response> got;
    const bool said_true = w.response.type == Response::Type::boolean && w.response.as_bool();
    if (op.name == "ecll") {
      if (w.response.type == Response::Type::pair) {
        if (w.response.b != st.ec.val) return fail(describe(op) + " reads a value the oracle does not hold");
        const auto tok = resolve(w.response.a, true);
        if (!tok || *tok != st.ec.seq.value) return fail(describe(op) + " seq cannot be renamed consistently");
        got = w.response;
      } else {
        got = Response::none();
      }
    } else if (op.name == "ecvl" || op.name == "ecsc") {
      const auto tok = resolve(op.args.at(0), said_true);
      if (!tok) return fail(describe(op) + " context cannot be renamed consistently");
      const bool vl = op.name == "ecvl";
      got = apply_ec(spec::EcCall{vl ? spec::EcOp::vl : spec::EcOp::sc, spec::SeqToken{*tok}, vl ? 0 : op.args.at(1)});
    } else if (spec == spec::SpecKind::ec || spec == spec::SpecKind::ecw) {
      got = apply_ec(spec::EcCall{spec::EcOp::write, {}, op.args.at(0)});
    } else if (spec == spec::SpecKind::llsc) {
      spec::LlscOp k = spec::LlscOp::ll;
      if (op.name == "vl") k = spec::LlscOp::vl;
      if (op.name == "sc") k = spec::LlscOp::sc;
      if (op.name == "write") k = spec::LlscOp::write;
      const auto r = spec::llsc_apply(st.llsc, op.handle, k, op.args.empty() ? 0 : op.args[0]);
      st.llsc = r.state;
      got = r.response;
    } else {
      spec::WcasOp k = spec::WcasOp::read;
      if (op.name == "write") k = spec::WcasOp::write;
      if (op.name == "cas") k = spec::WcasOp::cas;
      const auto r = spec::wcas_apply(st.wcas, k, op.args.empty() ? 0 : op.args[0], op.args.size() > 1 ? op.args[1] : 0);
      st.wcas = r.state;
      got = r.response;
    }
    if (!got) return fail(describe(op) + " rejected by the oracle");
    if (!equivalent(*got, w.response)) {
      return fail(describe(op) + " oracle answers " + to_string(*got) + ", witness says " + to_string(w.response));
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Detect audit

DetectAudit audit_detect(const trace::Trace& t, const std::vector<OpRecord>& ops) {
  DetectAudit a;
  std::map<std::uint64_t, std::vector<std::uint64_t>> cells_of;  // composite obj -> {W, Z}
  struct Install {
    std::uint64_t step, handle, x;
  };
  std::vector<Install> installs;
  for (const Event& e : t) {
    if (e.kind != EventKind::monitor) continue;
    if (e.monitor == "reg_object" && e.args.size() >= 2) cells_of[e.obj] = {e.args[0], e.args[1]};
    if (e.monitor == "ec_install") installs.push_back(Install{e.step, e.handle, e.obj});
  }
  auto problem = [&](const OpRecord& op, const std::string& what) {
    a.ok = false;
    a.problems.push_back(describe(op) + ": " + what);
  };

  for (std::size_t i = 0; i < ops.size(); ++i) {
    const OpRecord& op = ops[i];
    ++a.ops;
    if (op.crashed) ++a.crashed;
    if (!op.before || !op.after) {
      if (op.crashed && op.status != OpStatus::pending) problem(op, "crashed op lacks detect probes");
      continue;
    }
    const bool grew = op.after->counter > op.before->counter;
    if (op.after->counter < op.before->counter) problem(op, "detect counter decreased");

    std::vector<std::uint64_t> cells = {op.obj};
    if (auto it = cells_of.find(op.obj); it != cells_of.end()) cells = it->second;
    const bool installed = std::any_of(installs.begin(), installs.end(), [&](const Install& in) {
      return in.handle == op.handle && in.step > op.invoke && in.step < op.end &&
             std::find(cells.begin(), cells.end(), in.x) != cells.end();
    });
    if (grew != installed) {
      problem(op, grew ? "counter grew without a visible install" : "visible install left the counter unchanged");
    }
    if (grew) {
      ++a.visible;
      if (op.name != "ecsc" && op.name != "write" && op.name != "cas" && op.name != "sc") {
        problem(op, "counter grew across an operation that can never be visible");
      }
      if (op.status == OpStatus::completed && !equivalent(op.response, op.after->response)) {
        problem(op, "detect response " + to_string(op.after->response) + " differs from the op's own");
      }
    }
    if (op.status == OpStatus::effective) ++a.effective;
    if (op.status == OpStatus::repeatable) {
      const auto next = std::find_if(ops.begin() + static_cast<std::ptrdiff_t>(i) + 1, ops.end(),
                                     [&](const OpRecord& o) { return o.proc == op.proc; });
      if (next == ops.end() || next->name != op.name || next->args != op.args || next->obj != op.obj) {
        problem(op, "repeatable op was not issued again");
      } else if (next->status == OpStatus::pending) {
        problem(op, "re-issued op did not finish");
      } else {
        ++a.reissued;
      }
    }
  }
  return a;
}

}  // namespace dura::verify

#include "dura/monitors.hpp"

#include <algorithm>
#include <sstream>

#include "dura/durecw.hpp"

namespace dura::monitors {

using pmem::MonitorEvent;
using pmem::MonitorKind;
using trace::Event;
using trace::EventKind;

std::string to_string(const Violation& v) {
  return "step " + std::to_string(v.step) + " [" + v.rule + "] " + v.detail;
}

std::vector<OpCost> op_costs(const trace::Trace& t) {
  std::vector<OpCost> out;
  std::map<int, std::size_t> open;
  auto close = [&](int proc, bool crashed) {
    if (auto it = open.find(proc); it != open.end()) {
      out[it->second].crashed = crashed;
      open.erase(it);
    }
  };
  for (const Event& e : t) {
    switch (e.kind) {
      case EventKind::invoke:
      case EventKind::recover_begin:
        close(e.proc, false);
        open[e.proc] = out.size();
        out.push_back(OpCost{e.proc, e.kind == EventKind::invoke ? e.op : "recover", e.step, 0, false});
        break;
      case EventKind::memory:
        if (auto it = open.find(e.proc); it != open.end()) ++out[it->second].events;
        break;
      case EventKind::response:
      case EventKind::recover_done:
        close(e.proc, false);
        break;
      case EventKind::crash:
        close(e.proc, true);
        break;
      default:
        break;
    }
  }
  return out;
}

std::optional<MonitorEvent> CompositeTracker::feed(const MonitorEvent& e) {
  switch (e.kind) {
    case MonitorKind::reg_object: {
      const Composite c{cell_at(e.args[0]), cell_at(e.args[1]), static_cast<pmem::CompositeKind>(e.args[2])};
      objects_[e.obj] = c;
      half_owner_[c.w] = e.obj;
      half_owner_[c.z] = e.obj;
      return std::nullopt;
    }
    case MonitorKind::reg_handle:
      roles_[cell_at(e.args[0])] = Role{e.handle, true};
      roles_[cell_at(e.args[1])] = Role{e.handle, false};
      return std::nullopt;
    case MonitorKind::ec_move: {
      const auto owner = half_owner_.find(e.obj);
      if (owner == half_owner_.end()) return std::nullopt;
      const Composite& c = objects_.at(owner->second);
      const auto role = roles_.find(e.handle);
      const auto p = durecw::unpack(e.args[1]);
      MonitorEvent d;
      d.obj = owner->second;
      d.handle = role == roles_.end() ? e.handle : role->second.composite;
      d.args = {p.val, p.bit ? 1u : 0u, e.args[0], 0};
      if (e.obj == c.w) {
        d.kind = MonitorKind::install;
      } else {
        d.kind = role != roles_.end() && role->second.critical ? MonitorKind::imprint : MonitorKind::move;
      }
      return d;
    }
    default:
      return std::nullopt;
  }
}

namespace {

class Checker {
 public:
  Checker(const trace::Trace& t, const StepBounds* bounds) : t_(t), bounds_(bounds) {}

  std::vector<Violation> run() {
    for (const Event& e : t_) {
      switch (e.kind) {
        case EventKind::alloc:
          if (e.args.size() >= 2) shadow(e.obj) = WordPair{e.args[0], e.args[1]};
          break;
        case EventKind::memory:
          on_memory(e);
          break;
        case EventKind::monitor:
          on_monitor(e);
          break;
        case EventKind::invoke:
          ops_[e.proc] = OpWindow{e.op, e.obj, e.step, false, false, false, e.handle, false};
          break;
        case EventKind::response:
          on_response(e);
          break;
        case EventKind::crash:
          ops_[e.proc].crashed = true;
          break;
        default:
          break;
      }
    }
    check_bounds();
    return std::move(out_);
  }

 private:
  struct EcObject {
    CellId y = CellId::nil;
    bool open = false;  // installed, not yet moved
    HandleId installer = CellId::nil;
    Seq seq = 0;
    Word val = 0;
  };
  struct CompState {
    Word w_val = 0, z_val = 0;
    bool w_bit = false, z_bit = false;
    bool pending = false;
    std::optional<Word> last_moved;  // cleared by an imprint
  };
  struct OpWindow {
    std::string name;
    std::uint64_t obj = 0;
    std::uint64_t invoke = 0;
    bool crashed = false;
    bool failed_install = false;
    bool trivial = false;
    std::uint64_t handle = 0;
    bool saw_move = false;
  };

  void flag(std::uint64_t step, const char* rule, const std::string& detail) {
    out_.push_back(Violation{step, rule, detail});
  }

  static Word x_seq(const WordPair& x) { return x.second; }
  static Word y_seq(const WordPair& y) { return y.first; }

  void on_memory(const Event& e) {
    const CellId cell = cell_at(e.obj);
    WordPair before = shadow(e.obj);
    WordPair after = before;
    if (e.op == "write" && e.args.size() == 2) {
      after = WordPair{e.args[0], e.args[1]};
    } else if (e.op == "cas" && e.args.size() == 4 && e.result.as_bool()) {
      after = WordPair{e.args[2], e.args[3]};
    } else if (e.op == "cas" && e.args.size() == 4 && !e.result.as_bool()) {
      if (auto it = ec_.find(cell); it != ec_.end() && e.proc >= 0) ops_[e.proc].failed_install = true;
    }
    if (after == before) return;
    shadow(e.obj) = after;

    if (auto it = ec_.find(cell); it != ec_.end()) {
      const WordPair y = shadow(to_u64(it->second.y));
      if (x_seq(before) != y_seq(y)) {
        flag(e.step, "lag", "X of " + std::to_string(e.obj) + " changed while a move was pending");
      }
      if (x_seq(after) <= x_seq(before)) flag(e.step, "lag", "X.seq did not grow");
    }
    if (auto it = y_owner_.find(cell); it != y_owner_.end()) {
      const WordPair x = shadow(to_u64(it->second));
      if (!(x_seq(x) > y_seq(before))) {
        flag(e.step, "lag", "Y of " + std::to_string(to_u64(it->second)) + " changed with no install pending");
      }
      if (y_seq(after) != x_seq(x)) flag(e.step, "pinned", "move did not copy X.seq into Y");
      const auto val_cell = val_of_.find(cell_at(x.first));
      if (val_cell != val_of_.end() && after.second != shadow(to_u64(val_cell->second)).first) {
        flag(e.step, "pinned", "move did not copy the installer's Val into Y");
      }
    }
    if (val_of_.count(cell) != 0 && after.first < before.first) {
      flag(e.step, "detval", "detval of handle " + std::to_string(e.obj) + " decreased");
    }
    // Lag holds after every access of a registered object.
    const CellId x = ec_.count(cell) ? cell : (y_owner_.count(cell) ? y_owner_[cell] : CellId::nil);
    if (x != CellId::nil && x_seq(shadow(to_u64(x))) < y_seq(shadow(to_u64(ec_[x].y)))) {
      flag(e.step, "lag", "X.seq < Y.seq on object " + std::to_string(to_u64(x)));
    }
  }

  void on_monitor(const Event& e) {
    MonitorEvent m;
    try {
      m = trace::to_monitor(e);
    } catch (const std::exception& err) {
      flag(e.step, "trace", err.what());
      return;
    }
    switch (m.kind) {
      case MonitorKind::reg_ec_object:
        ec_[m.obj].y = cell_at(m.args[0]);
        y_owner_[cell_at(m.args[0])] = m.obj;
        break;
      case MonitorKind::reg_ec_handle:
        val_of_[m.handle] = cell_at(m.args[0]);
        break;
      case MonitorKind::ec_install: {
        EcObject& o = ec_[m.obj];
        if (o.open) flag(e.step, "alternation", "two installs without a move on " + std::to_string(e.obj));
        o.open = true;
        o.installer = m.handle;
        o.seq = m.args[0];
        o.val = m.args[1];
        break;
      }
      case MonitorKind::ec_move: {
        EcObject& o = ec_[m.obj];
        if (!o.open) {
          flag(e.step, "alternation", "move without an install on " + std::to_string(e.obj));
        } else if (o.installer != m.handle || o.seq != m.args[0] || o.val != m.args[1]) {
          flag(e.step, "alternation", "move does not carry the pending install on " + std::to_string(e.obj));
        }
        o.open = false;
        // A DurEC move on W is a composite install, not a move.
        if (composite_.composites().count(m.obj) == 0) {
          for (auto& [proc, w] : ops_) {
            if (w.obj == e.obj) w.saw_move = true;
          }
        }
        break;
      }
      case MonitorKind::reg_object: {
        // Both halves were registered just before; their Y cells hold the initial packed value.
        CompState& s = comp_[e.obj];
        const auto w = durecw::unpack(shadow(to_u64(ec_[cell_at(m.args[0])].y)).second);
        const auto z = durecw::unpack(shadow(to_u64(ec_[cell_at(m.args[1])].y)).second);
        s.w_val = w.val;
        s.w_bit = w.bit;
        s.z_val = z.val;
        s.z_bit = z.bit;
        break;
      }
      case MonitorKind::ec_detval:
        if (m.args[1] < m.args[0]) flag(e.step, "detval", "detval lowered");
        break;
      case MonitorKind::trivial_write:
      case MonitorKind::trivial_cas:
        if (e.proc >= 0) ops_[e.proc].trivial = true;
        break;
      case MonitorKind::cas_retry_exhausted:
        flag(e.step, "cas_retry", "CAS on " + std::to_string(e.obj) + " failed both ECSC attempts");
        break;
      default:
        break;
    }
    if (auto d = composite_.feed(m)) on_composite(e.step, *d);
  }

  void on_composite(std::uint64_t step, const MonitorEvent& d) {
    const auto& info = composite_.composites().at(d.obj);
    CompState& s = comp_[to_u64(d.obj)];
    const Word val = d.args[0];
    const bool bit = d.args[1] != 0;
    const std::string where = " on " + std::to_string(to_u64(d.obj));
    const bool cas_kind = info.kind == pmem::CompositeKind::duracas;
    switch (d.kind) {
      case MonitorKind::install:
        if (s.pending) flag(step, "alternation", "install while a write is pending" + where);
        if (s.w_bit != s.z_bit) flag(step, "seesaw", "install with W.bit != Z.bit" + where);
        if (bit == s.w_bit) flag(step, "seesaw", "install did not flip W.bit" + where);
        if (cas_kind && s.last_moved && *s.last_moved == val) {
          flag(step, "norepeat", "installed value " + std::to_string(val) + " repeats the last move" + where);
        }
        s.w_val = val;
        s.w_bit = bit;
        s.pending = true;
        break;
      case MonitorKind::move:
        if (!s.pending) flag(step, "alternation", "move without an install" + where);
        if (s.w_bit == s.z_bit) flag(step, "seesaw", "move with W.bit == Z.bit" + where);
        if (val != s.w_val || bit != s.w_bit) flag(step, "seesaw", "move does not copy W" + where);
        s.z_val = val;
        s.z_bit = bit;
        s.pending = false;
        s.last_moved = val;
        for (auto& [proc, w] : ops_) {
          if (w.obj == to_u64(d.obj)) w.saw_move = true;
        }
        break;
      case MonitorKind::imprint:
        if (bit != s.z_bit) flag(step, "imprint", "imprint changed Z.bit" + where);
        if (cas_kind && val == s.z_val) flag(step, "imprint", "imprint left Z.val unchanged" + where);
        s.z_val = val;
        s.last_moved.reset();
        break;
      default:
        break;
    }
  }

  void on_response(const Event& e) {
    auto it = ops_.find(e.proc);
    if (it == ops_.end()) return;
    const OpWindow& w = it->second;
    const bool composite = composite_.composites().count(cell_at(w.obj)) != 0;
    if (!w.crashed && !composite && w.name == "ecsc" && w.failed_install && !w.saw_move) {
      flag(e.step, "hitchhiker", "ECSC lost the install race but saw no move");
    }
    if (!w.crashed && composite && w.name == "write" && !w.trivial && !w.saw_move) {
      flag(e.step, "write_move", "completed write saw no move in its interval");
    }
    ops_.erase(it);
  }

  void check_bounds() {
    if (bounds_ == nullptr) return;
    for (const OpCost& c : op_costs(t_)) {
      std::optional<int> bound;
      if (c.op == "recover") {
        bound = bounds_->recover;
      } else if (auto it = bounds_->op.find(c.op); it != bounds_->op.end()) {
        bound = it->second;
      }
      if (bound && c.events > *bound) {
        flag(c.start, "step_bound",
             c.op + " by p" + std::to_string(c.proc) + " used " + std::to_string(c.events) + " accesses, bound " +
                 std::to_string(*bound));
      }
    }
  }

  const trace::Trace& t_;
  const StepBounds* bounds_;
  std::vector<Violation> out_;
  // Cell ids are dense from 1; ids from a hand-written trace may not be.
  std::vector<WordPair> shadow_;
  std::map<std::uint64_t, WordPair> sparse_shadow_;

  WordPair& shadow(std::uint64_t id) {
    constexpr std::uint64_t kDense = 1 << 20;
    if (id >= kDense) return sparse_shadow_[id];
    if (id >= shadow_.size()) shadow_.resize(std::max<std::size_t>(id + 1, 2 * shadow_.size()));
    return shadow_[id];
  }
  std::map<CellId, EcObject> ec_;
  std::map<CellId, CellId> y_owner_;
  std::map<HandleId, CellId> val_of_;  // detval cell (= handle id) -> Val cell
  CompositeTracker composite_;
  std::map<std::uint64_t, CompState> comp_;
  std::map<int, OpWindow> ops_;
};

}  // namespace

std::vector<Violation> run_monitors(const trace::Trace& t, const StepBounds* bounds) {
  return Checker(t, bounds).run();
}

}  // namespace dura::monitors

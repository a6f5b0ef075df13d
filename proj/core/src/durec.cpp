#include "dura/durec.hpp"

#include <algorithm>

namespace dura::durec {

using pmem::MonitorEvent;
using pmem::MonitorKind;

Handle Handle::create(pmem::Memory& mem) {
  const CellId first = mem.alloc_block(kHandleCells, WordPair{0, 0});
  Handle h(first);
  mem.emit(MonitorEvent{MonitorKind::reg_ec_handle, CellId::nil, h.id(), {to_u64(h.val_cell()), 0, 0, 0}});
  return h;
}

Object Object::create(pmem::Memory& mem, Word init) {
  const CellId x = mem.alloc(WordPair{to_u64(CellId::nil), 0});
  const CellId y = mem.alloc(WordPair{0, init});
  mem.emit(MonitorEvent{MonitorKind::reg_ec_object, x, CellId::nil, {to_u64(y), 0, 0, 0}});
  return Object(&mem, x, y);
}

Task<View> Object::ecll_op(Object self, Handle) {
  const WordPair y = co_await self.mem_->read(self.y_);
  co_return View{y.first, y.second};
}

Task<bool> Object::ecvl_op(Object self, Handle, Seq s) {
  const WordPair y = co_await self.mem_->read(self.y_);
  co_return y.first == s;
}

Task<bool> Object::ecsc_op(Object self, Handle h, Seq s, Word v) {
  pmem::Memory& mem = *self.mem_;
  const WordPair y = co_await mem.read(self.y_);
  if (y.first != s) co_return false;

  co_await mem.write(h.val_cell(), WordPair{v, 0});

  const WordPair x = co_await mem.read(self.x_);
  const WordPair d = co_await mem.read(h.detval_cell());
  const Seq next = std::max(x.second, d.first) + 1;

  // Expected seq is s, not the one just read: if X already moved past s,
  // another ECSC installed first and this one hitchhikes.
  const bool installed =
      co_await mem.cas(self.x_, WordPair{x.first, s}, WordPair{to_u64(h.id()), next});
  if (installed) {
    mem.emit(MonitorEvent{MonitorKind::ec_install, self.x_, h.id(), {next, v, 0, 0}});
  }
  co_await forward(self, h);
  co_return installed;
}

Task<void> Object::forward(Object self, Handle) {
  pmem::Memory& mem = *self.mem_;
  const WordPair x = co_await mem.read(self.x_);
  const auto installer = Handle::from_id(cell_at(x.first));
  // Before the first install X names no handle, and X.seq == Y.seq == 0.
  if (installer.is_nil()) co_return;

  // Mission 1: make the install detectable through the installer's detval.
  // The second word of detval belongs to the handle's owner and is carried over.
  const WordPair d = co_await mem.read(installer.detval_cell());
  if (d.first < x.second) {
    const bool raised = co_await mem.cas(installer.detval_cell(), d, WordPair{x.second, d.second});
    if (raised) {
      mem.emit(MonitorEvent{MonitorKind::ec_detval, CellId::nil, installer.id(), {d.first, x.second, 0, 0}});
    }
  }

  // Mission 2: move the installed value into Y.
  const WordPair vh = co_await mem.read(installer.val_cell());
  const WordPair y = co_await mem.read(self.y_);
  if (y.first < x.second) {
    const bool moved = co_await mem.cas(self.y_, y, WordPair{x.second, vh.first});
    if (moved) {
      mem.emit(MonitorEvent{MonitorKind::ec_move, self.x_, installer.id(), {x.second, vh.first, 0, 0}});
    }
  }
}

Task<Detection> detect(pmem::Memory& mem, Handle h) {
  const WordPair d = co_await mem.read(h.detval_cell());
  co_return Detection{d.first, Response::boolean(true)};
}

}  // namespace dura::durec

#include "dura/duracas.hpp"

namespace dura::duracas {

using durecw::pack;
using durecw::unpack;
using pmem::MonitorEvent;
using pmem::MonitorKind;

Handle Handle::create(pmem::Memory& mem) {
  const CellId op_name = mem.alloc(WordPair{static_cast<Word>(OpName::none), 0});
  const auto inner = durecw::Handle::create(mem, pmem::CompositeKind::duracas, op_name);
  return Handle(inner, op_name);
}

Object Object::create(pmem::Memory& mem, Word init) {
  return Object(durecw::Object::create(mem, init, pmem::CompositeKind::duracas));
}

Task<Word> Object::read_op(Object self, Handle h) {
  const auto z = co_await self.inner_.z().ecll(h.casual());
  co_return unpack(z.val).val;
}

Task<bool> Object::cas_op(Object self, Handle h, Word old_val, Word new_val) {
  durecw::check_payload(old_val);
  durecw::check_payload(new_val);
  pmem::Memory& mem = self.inner_.z().memory();
  const auto& z_obj = self.inner_.z();
  co_await mem.write(h.op_name_cell(), WordPair{static_cast<Word>(OpName::cas), 0});

  for (int i = 0; i < kCasIterations; ++i) {
    const auto z = co_await z_obj.ecll(h.critical());
    const auto zp = unpack(z.val);
    if (zp.val != old_val) co_return false;
    if (old_val == new_val) {
      mem.emit(MonitorEvent{MonitorKind::trivial_cas, self.id(), h.id(), {new_val, 0, 0, 0}});
      co_return true;
    }
    co_await self.inner_.transfer(h.pair());
    const bool ok = co_await z_obj.ecsc(h.critical(), z.seq, pack(new_val, zp.bit));
    if (ok) co_return true;
  }
  mem.emit(MonitorEvent{MonitorKind::cas_retry_exhausted, self.id(), h.id(), {old_val, new_val, 0, 0}});
  co_return false;
}

Task<void> Object::write_op(Object self, Handle h, Word v) {
  durecw::check_payload(v);
  pmem::Memory& mem = self.inner_.z().memory();
  co_await mem.write(h.op_name_cell(), WordPair{static_cast<Word>(OpName::write), 0});

  const auto w = co_await self.inner_.w().ecll(h.critical());
  const auto z = co_await self.inner_.z().ecll(h.casual());
  const auto wp = unpack(w.val);
  const auto zp = unpack(z.val);
  if (zp.val == v) {
    mem.emit(MonitorEvent{MonitorKind::trivial_write, self.id(), h.id(), {v, 0, 0, 0}});
    co_return;
  }
  if (wp.bit == zp.bit) {
    co_await self.inner_.w().ecsc(h.critical(), w.seq, pack(v, !wp.bit));
  }
  co_await self.inner_.transfer(h.pair());
  co_await self.inner_.transfer(h.pair());
}

Task<void> Object::recover_op(Object self, Handle h) {
  const auto& w = self.inner_.w();
  const auto& z = self.inner_.z();
  co_await w.recover(h.casual());
  co_await z.recover(h.casual());
  co_await z.recover(h.critical());
  co_await w.recover(h.critical());
  co_await self.inner_.transfer(h.pair());
  co_await self.inner_.transfer(h.pair());
}

Task<Detection> detect(pmem::Memory& mem, Handle h) {
  const auto d = co_await durec::detect(mem, h.critical());
  const WordPair op = co_await mem.read(h.op_name_cell());
  const Response r = op.first == static_cast<Word>(OpName::cas) ? Response::boolean(true) : Response::ack();
  co_return Detection{d.counter, r};
}

}  // namespace dura::duracas

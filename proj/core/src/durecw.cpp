#include "dura/durecw.hpp"

#include <stdexcept>

namespace dura::durecw {

using pmem::MonitorEvent;
using pmem::MonitorKind;

void check_payload(Word v) {
  if (v > kMaxPayload) throw std::out_of_range("payload exceeds 63 bits");
}

Handle Handle::create(pmem::Memory& mem, pmem::CompositeKind kind, CellId extra) {
  const auto critical = durec::Handle::create(mem);
  const auto casual = durec::Handle::create(mem);
  Handle h(critical, casual);
  mem.emit(MonitorEvent{MonitorKind::reg_handle, CellId::nil, h.id(),
                        {to_u64(critical.id()), to_u64(casual.id()), static_cast<Word>(kind), to_u64(extra)}});
  return h;
}

Object Object::create(pmem::Memory& mem, Word init, pmem::CompositeKind kind) {
  check_payload(init);
  const auto w = durec::Object::create(mem, pack(init, false));
  const auto z = durec::Object::create(mem, pack(init, false));
  Object o(w, z);
  mem.emit(MonitorEvent{MonitorKind::reg_object, o.id(), CellId::nil,
                        {to_u64(w.id()), to_u64(z.id()), static_cast<Word>(kind), 0}});
  return o;
}

Task<View> Object::ecll_op(Object self, Handle h) {
  const auto z = co_await self.z_.ecll(h.casual());
  const auto p = unpack(z.val);
  co_return View{z.seq, p.val, p.bit};
}

Task<bool> Object::ecvl_op(Object self, Handle h, Seq s) {
  const bool ok = co_await self.z_.ecvl(h.casual(), s);
  co_return ok;
}

Task<bool> Object::ecsc_op(Object self, Handle h, Seq s, Word v) {
  check_payload(v);
  const auto z = co_await self.z_.ecll(h.casual());
  if (z.seq != s) co_return false;
  co_await transfer_op(self, h);
  // Keep Z.bit: an ECSC must not make a pending write look moved.
  const bool ok = co_await self.z_.ecsc(h.critical(), s, pack(v, unpack(z.val).bit));
  co_return ok;
}

Task<void> Object::write_op(Object self, Handle h, Word v) {
  check_payload(v);
  const auto w = co_await self.w_.ecll(h.casual());
  const auto z = co_await self.z_.ecll(h.casual());
  const auto wp = unpack(w.val);
  if (wp.bit == unpack(z.val).bit) {
    // A failed install means another write got in first; this one hitchhikes.
    co_await self.w_.ecsc(h.critical(), w.seq, pack(v, !wp.bit));
  }
  co_await transfer_op(self, h);
  co_await transfer_op(self, h);
}

Task<void> Object::transfer_op(Object self, Handle h) {
  const auto z = co_await self.z_.ecll(h.casual());
  const auto w = co_await self.w_.ecll(h.casual());
  const auto wp = unpack(w.val);
  if (unpack(z.val).bit != wp.bit) {
    co_await self.z_.ecsc(h.casual(), z.seq, pack(wp.val, wp.bit));
  }
}

Task<void> Object::recover_op(Object self, Handle h) {
  co_await self.w_.recover(h.casual());
  co_await self.z_.recover(h.casual());
  co_await self.w_.recover(h.critical());
  co_await self.z_.recover(h.critical());
  co_await transfer_op(self, h);
  co_await transfer_op(self, h);
}

Task<Detection> detect(pmem::Memory& mem, Handle h) {
  const auto d = co_await durec::detect(mem, h.critical());
  co_return d;
}

}  // namespace dura::durecw

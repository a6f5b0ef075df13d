#include "dura/specmodels.hpp"

namespace dura::spec {

SpecKind parse_spec(std::string_view name) {
  if (name == "ec") return SpecKind::ec;
  if (name == "ecw") return SpecKind::ecw;
  if (name == "llsc") return SpecKind::llsc;
  if (name == "wcas") return SpecKind::wcas;
  throw std::invalid_argument("unknown spec: " + std::string(name));
}

const char* to_string(SpecKind k) {
  switch (k) {
    case SpecKind::ec: return "ec";
    case SpecKind::ecw: return "ecw";
    case SpecKind::llsc: return "llsc";
    case SpecKind::wcas: return "wcas";
  }
  return "?";
}

namespace {
SeqToken next_token(SeqToken t) { return SeqToken{t.value + 1}; }
}  // namespace

EcStep ec_apply(const EcState& state, const EcCall& call, bool writable) {
  switch (call.op) {
    case EcOp::ll:
      return {state, Response::pair(state.seq.value, state.val)};
    case EcOp::vl:
      return {state, Response::boolean(call.s == state.seq)};
    case EcOp::sc:
      if (call.s != state.seq) return {state, Response::boolean(false)};
      return {EcState{next_token(state.seq), call.v}, Response::boolean(true)};
    case EcOp::write:
      if (!writable) throw ContractViolation("Write on a non-writable EC object");
      return {EcState{next_token(state.seq), call.v}, Response::ack()};
  }
  throw std::logic_error("ec_apply: bad op");
}

LlscStep llsc_apply(const LlscState& state, std::uint64_t pid, LlscOp op, Word v) {
  const auto it = state.last.find(pid);
  const bool current = it != state.last.end() && it->second == state.seq;
  switch (op) {
    case LlscOp::ll: {
      LlscState next = state;
      next.last[pid] = state.seq;
      return {std::move(next), Response::word(state.val)};
    }
    case LlscOp::vl:
      return {state, Response::boolean(current)};
    case LlscOp::sc: {
      if (!current) return {state, Response::boolean(false)};
      LlscState next = state;
      next.seq = next_token(state.seq);
      next.val = v;
      return {std::move(next), Response::boolean(true)};
    }
    case LlscOp::write: {
      LlscState next = state;
      next.seq = next_token(state.seq);
      next.val = v;
      return {std::move(next), Response::ack()};
    }
  }
  throw std::logic_error("llsc_apply: bad op");
}

WcasStep wcas_apply(const WcasState& state, WcasOp op, Word a, Word b) {
  switch (op) {
    case WcasOp::read:
      return {state, Response::word(state.val)};
    case WcasOp::write:
      return {WcasState{a}, Response::ack()};
    case WcasOp::cas:
      if (state.val == a) return {WcasState{b}, Response::boolean(true)};
      return {state, Response::boolean(false)};
  }
  throw std::logic_error("wcas_apply: bad op");
}

}  // namespace dura::spec

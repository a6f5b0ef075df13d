#include "dura/types.hpp"

namespace dura {

bool equivalent(const Response& x, const Response& y) {
  auto is_ackish = [](const Response& r) {
    return r.type == Response::Type::ack || (r.type == Response::Type::boolean && r.a == 1);
  };
  if (x.type == Response::Type::ack || y.type == Response::Type::ack) return is_ackish(x) && is_ackish(y);
  return x == y;
}

std::string to_string(const Response& r) {
  switch (r.type) {
    case Response::Type::none: return "none";
    case Response::Type::boolean: return r.a ? "true" : "false";
    case Response::Type::word: return std::to_string(r.a);
    case Response::Type::pair: return "(" + std::to_string(r.a) + "," + std::to_string(r.b) + ")";
    case Response::Type::ack: return "ack";
  }
  return "?";
}

}  // namespace dura

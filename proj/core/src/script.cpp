#include "dura/script.hpp"

#include <charconv>
#include <map>
#include <stdexcept>

namespace dura::harness {

namespace {

const std::map<std::string, std::size_t>& ops_of(Algorithm a) {
  static const std::map<std::string, std::size_t> durec{{"ecll", 0}, {"ecvl", 1}, {"ecsc", 2}};
  static const std::map<std::string, std::size_t> durecw{{"ecll", 0}, {"ecvl", 1}, {"ecsc", 2}, {"write", 1}};
  static const std::map<std::string, std::size_t> durall{{"ll", 0}, {"vl", 0}, {"sc", 1}, {"write", 1}};
  static const std::map<std::string, std::size_t> duracas{{"read", 0}, {"cas", 2}, {"write", 1}};
  switch (a) {
    case Algorithm::durec: return durec;
    case Algorithm::durecw: return durecw;
    case Algorithm::durall: return durall;
    case Algorithm::duracas: return duracas;
  }
  return durec;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::uint64_t parse_uint(std::string_view s, std::string_view ctx) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("bad number '" + std::string(s) + "' in '" + std::string(ctx) + "'");
  }
  return v;
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "durec") return Algorithm::durec;
  if (name == "durecw") return Algorithm::durecw;
  if (name == "durall") return Algorithm::durall;
  if (name == "duracas") return Algorithm::duracas;
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::durec: return "durec";
    case Algorithm::durecw: return "durecw";
    case Algorithm::durall: return "durall";
    case Algorithm::duracas: return "duracas";
  }
  return "?";
}

spec::SpecKind spec_of(Algorithm a) {
  switch (a) {
    case Algorithm::durec: return spec::SpecKind::ec;
    case Algorithm::durecw: return spec::SpecKind::ecw;
    case Algorithm::durall: return spec::SpecKind::llsc;
    case Algorithm::duracas: return spec::SpecKind::wcas;
  }
  return spec::SpecKind::ec;
}

std::size_t arity(Algorithm algo, const std::string& op) {
  const auto& table = ops_of(algo);
  const auto it = table.find(op);
  if (it == table.end()) throw std::invalid_argument(std::string("no op '") + op + "' in " + to_string(algo));
  return it->second;
}

std::vector<std::string> op_names(Algorithm algo) {
  std::vector<std::string> out;
  for (const auto& [name, n] : ops_of(algo)) out.push_back(name);
  return out;
}

Script parse_script(std::string_view text, Algorithm algo) {
  Script out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(';', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = trim(text.substr(start, end - start));
    start = end + 1;
    if (item.empty()) {
      if (end == text.size()) break;
      continue;
    }

    ScriptOp op;
    std::string_view body = item;
    if (const auto at = body.rfind('@'); at != std::string_view::npos) {
      op.object = static_cast<int>(parse_uint(body.substr(at + 1), item));
      body = trim(body.substr(0, at));
    }
    if (const auto lp = body.find('('); lp != std::string_view::npos) {
      if (body.back() != ')') throw std::invalid_argument("missing ')' in '" + std::string(item) + "'");
      const std::string_view inner = trim(body.substr(lp + 1, body.size() - lp - 2));
      op.explicit_args = true;
      std::size_t a = 0;
      while (!inner.empty() && a <= inner.size()) {
        std::size_t comma = inner.find(',', a);
        if (comma == std::string_view::npos) comma = inner.size();
        op.args.push_back(parse_uint(inner.substr(a, comma - a), item));
        a = comma + 1;
      }
      body = trim(body.substr(0, lp));
    }
    op.name = std::string(body);
    if (op.name == "join") {
      if (!out.empty()) throw std::invalid_argument("join must be the first item of a script");
      if (op.explicit_args || op.object != 0) throw std::invalid_argument("join takes no arguments");
      op.join = true;
    } else {
      const std::size_t n = arity(algo, op.name);
      if (op.explicit_args && op.args.size() != n) {
        throw std::invalid_argument("'" + std::string(item) + "' needs " + std::to_string(n) + " argument(s)");
      }
    }
    out.push_back(std::move(op));
  }
  return out;
}

std::string to_string(const ScriptOp& op) {
  std::string s = op.name;
  if (op.explicit_args) {
    s += '(';
    for (std::size_t i = 0; i < op.args.size(); ++i) s += (i ? "," : "") + std::to_string(op.args[i]);
    s += ')';
  }
  if (op.object != 0) s += "@" + std::to_string(op.object);
  return s;
}

std::string to_string(const Script& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ";" : "") + to_string(s[i]);
  return out;
}

}  // namespace dura::harness

#pragma once

// Offline check of a recorded trace: durable linearizability against a
// sequential type, the detect audit and the runtime monitors.

#include <optional>
#include <string>
#include <vector>

#include "dura/monitors.hpp"
#include "dura/script.hpp"
#include "dura/specmodels.hpp"
#include "dura/trace.hpp"
#include "dura/verify.hpp"

namespace dura::harness {

struct TraceCheck {
  std::size_t events = 0;
  std::size_t ops = 0;
  bool linearizable = true;
  std::string linearizability;  // checker explanation when not
  std::vector<std::string> detect_problems;
  std::vector<std::string> monitor_violations;
  std::string malformed;

  bool ok() const {
    return linearizable && detect_problems.empty() && monitor_violations.empty() && malformed.empty();
  }
};

/// `algo`, when given, adds that algorithm's declared access bounds to the
/// monitors.
TraceCheck check_trace(const trace::Trace& t, spec::SpecKind spec, std::optional<Algorithm> algo = std::nullopt,
                       const verify::CheckOptions& opt = {});

std::string to_json(const TraceCheck& c);

}  // namespace dura::harness

#include "dura/check.hpp"

#include <json.hpp>

#include "dura/driver.hpp"
#include "dura/pmem.hpp"

namespace dura::harness {

TraceCheck check_trace(const trace::Trace& t, spec::SpecKind spec, std::optional<Algorithm> algo,
                       const verify::CheckOptions& opt) {
  TraceCheck c;
  c.events = t.size();

  try {
    const std::vector<verify::OpRecord> ops = verify::extract_ops(t);
    c.ops = ops.size();
    const verify::Verdict v = verify::check_durable(ops, spec, verify::initial_values(t), opt);
    c.linearizable = v.ok;
    if (!v.ok) c.linearizability = v.explanation;
    c.detect_problems = verify::audit_detect(t, ops).problems;
  } catch (const verify::MalformedHistory& e) {
    c.malformed = e.what();
    return c;
  }

  monitors::StepBounds bounds;
  if (algo) {
    pmem::Memory scratch(pmem::Mode::simulated);
    bounds = make_driver(*algo, scratch)->bounds();
  }
  for (const auto& m : monitors::run_monitors(t, algo ? &bounds : nullptr)) {
    c.monitor_violations.push_back(monitors::to_string(m));
  }
  return c;
}

std::string to_json(const TraceCheck& c) {
  nlohmann::ordered_json j;
  j["ok"] = c.ok();
  j["events"] = c.events;
  j["ops"] = c.ops;
  j["linearizable"] = c.linearizable;
  if (!c.linearizability.empty()) j["linearizability"] = c.linearizability;
  j["detect_problems"] = c.detect_problems;
  j["monitor_violations"] = c.monitor_violations;
  if (!c.malformed.empty()) j["malformed"] = c.malformed;
  return j.dump(2);
}

}  // namespace dura::harness

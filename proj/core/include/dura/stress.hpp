#pragma once

// Native-thread runs over the hardware backend.
//
// stress: each executor owns one handle and runs a mix of operations on a few
// shared objects plus increments of a shared counter (a CAS retry loop for
// DuraCAS, an LL/SC loop for DuraLL). With probability `crash_rate` an
// operation is armed to crash at a random access; the executor then drops the
// frame, runs Recover on the same object and consults Detect, re-issuing the
// op when Detect reports no effect. Checks kept cheap enough for real runs:
//   - detect counters never decrease;
//   - Z of every object, ordered by seq: imprints keep the bit and change the
//     value, moves flip the bit, and two moves with no imprint between carry
//     different values;
//   - counter: Z values go up by exactly one, final value = sum of increments;
//   - W.bit = Z.bit for every object once all executors are done;
//   - no CAS exhausts its retry loop;
//   - DuraLL: an SC with no LL since the last SC/Write on that object fails.
//
// bench: throughput per algorithm and a plain hardware CAS baseline.

#include <cstdint>
#include <string>
#include <vector>

#include "dura/script.hpp"

namespace dura::harness {

struct StressConfig {
  Algorithm algorithm = Algorithm::duracas;
  int threads = 8;
  std::uint64_t ops_per_thread = 100'000;
  double crash_rate = 0.01;
  double increment_share = 0.5;  // fraction of ops that are counter increments
  int objects = 4;               // shared objects besides the counter
  std::uint64_t seed = 1;
  std::size_t keep_failures = 20;
};

struct StressReport {
  std::uint64_t ops = 0;
  std::uint64_t increments = 0;
  std::uint64_t crashes = 0;
  std::uint64_t effective = 0;  // crashed ops that detect reported as done
  std::uint64_t reissued = 0;
  std::uint64_t cas_retry_exhausted = 0;
  std::uint64_t counter_final = 0;
  std::uint64_t counter_expected = 0;
  std::uint64_t z_events = 0;  // Z moves and imprints inspected
  std::uint64_t failures = 0;
  std::vector<std::string> messages;
  double seconds = 0;

  bool ok() const { return failures == 0 && counter_final == counter_expected && cas_retry_exhausted == 0; }
  double ops_per_second() const { return seconds > 0 ? static_cast<double>(ops) / seconds : 0; }
};

/// Throws std::invalid_argument for algorithms without a stress workload
/// (supported: duracas, durall).
StressReport stress(const StressConfig& cfg);

std::string to_string(const StressReport& r);

struct BenchConfig {
  int threads = 1;
  std::uint64_t ops_per_thread = 200'000;
  double read_share = 0.9;
  int objects = 4;
  std::uint64_t seed = 1;
};

struct BenchRow {
  std::string name;  // algorithm, or "hw-cas"
  int threads = 0;
  std::uint64_t ops = 0;
  double seconds = 0;
  double accesses_per_op = 0;
  double mops() const { return seconds > 0 ? static_cast<double>(ops) / seconds / 1e6 : 0; }
  double ns_per_op() const { return ops > 0 ? seconds * 1e9 * threads / static_cast<double>(ops) : 0; }
};

std::vector<BenchRow> bench(const BenchConfig& cfg);

std::string format_table(const std::vector<BenchRow>& rows);

}  // namespace dura::harness

#pragma once

// Uniform access to the four algorithms for the harness: objects and handles
// are addressed by small indices, operations by name with resolved arguments.

#include <memory>
#include <string>
#include <vector>

#include "dura/monitors.hpp"
#include "dura/pmem.hpp"
#include "dura/script.hpp"
#include "dura/task.hpp"
#include "dura/types.hpp"

namespace dura::harness {

class Driver {
 public:
  virtual ~Driver() = default;

  virtual Algorithm algorithm() const = 0;

  virtual int create_object(Word init) = 0;
  virtual int create_handle() = 0;
  virtual std::uint64_t object_id(int object) const = 0;
  virtual std::uint64_t handle_id(int handle) const = 0;

  /// Cells one create_object / create_handle call allocates.
  virtual std::uint64_t object_cells() const = 0;
  virtual std::uint64_t handle_cells() const = 0;

  virtual Task<Response> run(int handle, int object, std::string op, std::vector<Word> args) = 0;
  virtual Task<void> recover(int handle, int object) = 0;
  virtual Task<Detection> detect(int handle) = 0;

  /// Cells read by detect(handle).
  virtual std::vector<CellId> detect_cells(int handle) const = 0;

  /// Declared per-op access bounds, counted from the code.
  virtual monitors::StepBounds bounds() const = 0;
};

std::unique_ptr<Driver> make_driver(Algorithm algo, pmem::Memory& mem);

}  // namespace dura::harness

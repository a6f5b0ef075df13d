#include "dura/driver.hpp"

#include <stdexcept>

#include "dura/duracas.hpp"
#include "dura/durall.hpp"
#include "dura/durec.hpp"
#include "dura/durecw.hpp"

namespace dura::harness {

namespace {

[[noreturn]] void bad_op(const std::string& op, Algorithm a) {
  throw std::invalid_argument("op '" + op + "' is not supported by " + std::string(to_string(a)));
}

template <class Obj, class Hnd>
class DriverBase : public Driver {
 public:
  explicit DriverBase(pmem::Memory& mem) : mem_(mem) {}

  std::uint64_t object_id(int o) const override { return to_u64(objects_.at(o).id()); }
  std::uint64_t handle_id(int h) const override { return to_u64(handles_.at(h).id()); }

 protected:
  pmem::Memory& mem_;
  std::vector<Obj> objects_;
  std::vector<Hnd> handles_;
};

class DurecDriver final : public DriverBase<durec::Object, durec::Handle> {
 public:
  using DriverBase::DriverBase;
  Algorithm algorithm() const override { return Algorithm::durec; }
  int create_object(Word init) override {
    objects_.push_back(durec::Object::create(mem_, init));
    return static_cast<int>(objects_.size()) - 1;
  }
  int create_handle() override {
    handles_.push_back(durec::Handle::create(mem_));
    return static_cast<int>(handles_.size()) - 1;
  }
  std::uint64_t object_cells() const override { return durec::kObjectCells; }
  std::uint64_t handle_cells() const override { return durec::kHandleCells; }

  Task<Response> run(int h, int o, std::string op, std::vector<Word> args) override {
    const auto obj = objects_.at(o);
    const auto hnd = handles_.at(h);
    if (op == "ecll") {
      const auto v = co_await obj.ecll(hnd);
      co_return Response::pair(v.seq, v.val);
    }
    if (op == "ecvl") {
      const bool r = co_await obj.ecvl(hnd, args.at(0));
      co_return Response::boolean(r);
    }
    if (op == "ecsc") {
      const bool r = co_await obj.ecsc(hnd, args.at(0), args.at(1));
      co_return Response::boolean(r);
    }
    bad_op(op, algorithm());
  }
  Task<void> recover(int h, int o) override { return objects_.at(o).recover(handles_.at(h)); }
  Task<Detection> detect(int h) override { return durec::detect(mem_, handles_.at(h)); }
  std::vector<CellId> detect_cells(int h) const override { return {handles_.at(h).detval_cell()}; }
  monitors::StepBounds bounds() const override {
    return {{{"ecll", durec::kEcllBound}, {"ecvl", durec::kEcvlBound}, {"ecsc", durec::kEcscBound}},
            durec::kRecoverBound};
  }
};

class DurecwDriver final : public DriverBase<durecw::Object, durecw::Handle> {
 public:
  using DriverBase::DriverBase;
  Algorithm algorithm() const override { return Algorithm::durecw; }
  int create_object(Word init) override {
    objects_.push_back(durecw::Object::create(mem_, init));
    return static_cast<int>(objects_.size()) - 1;
  }
  int create_handle() override {
    handles_.push_back(durecw::Handle::create(mem_));
    return static_cast<int>(handles_.size()) - 1;
  }
  std::uint64_t object_cells() const override { return durecw::kObjectCells; }
  std::uint64_t handle_cells() const override { return durecw::kHandleCells; }

  Task<Response> run(int h, int o, std::string op, std::vector<Word> args) override {
    const auto obj = objects_.at(o);
    const auto hnd = handles_.at(h);
    if (op == "ecll") {
      const auto v = co_await obj.ecll(hnd);
      co_return Response::pair(v.seq, v.val);
    }
    if (op == "ecvl") {
      const bool r = co_await obj.ecvl(hnd, args.at(0));
      co_return Response::boolean(r);
    }
    if (op == "ecsc") {
      const bool r = co_await obj.ecsc(hnd, args.at(0), args.at(1));
      co_return Response::boolean(r);
    }
    if (op == "write") {
      co_await obj.write(hnd, args.at(0));
      co_return Response::ack();
    }
    bad_op(op, algorithm());
  }
  Task<void> recover(int h, int o) override { return objects_.at(o).recover(handles_.at(h)); }
  Task<Detection> detect(int h) override { return durecw::detect(mem_, handles_.at(h)); }
  std::vector<CellId> detect_cells(int h) const override { return {handles_.at(h).critical().detval_cell()}; }
  monitors::StepBounds bounds() const override {
    return {{{"ecll", durecw::kEcllBound},
             {"ecvl", durecw::kEcvlBound},
             {"ecsc", durecw::kEcscBound},
             {"write", durecw::kWriteBound}},
            durecw::kRecoverBound};
  }
};

class DurallDriver final : public DriverBase<durall::Object, durall::Handle> {
 public:
  using DriverBase::DriverBase;
  Algorithm algorithm() const override { return Algorithm::durall; }
  int create_object(Word init) override {
    objects_.push_back(durall::Object::create(mem_, init));
    return static_cast<int>(objects_.size()) - 1;
  }
  int create_handle() override {
    handles_.push_back(durall::Handle::create(mem_));
    return static_cast<int>(handles_.size()) - 1;
  }
  std::uint64_t object_cells() const override { return durall::kObjectCells; }
  std::uint64_t handle_cells() const override { return durall::kHandleCells; }

  Task<Response> run(int h, int o, std::string op, std::vector<Word> args) override {
    const auto obj = objects_.at(o);
    const auto hnd = handles_.at(h);
    if (op == "ll") {
      const Word v = co_await obj.ll(hnd);
      co_return Response::word(v);
    }
    if (op == "vl") {
      const bool r = co_await obj.vl(hnd);
      co_return Response::boolean(r);
    }
    if (op == "sc") {
      const bool r = co_await obj.sc(hnd, args.at(0));
      co_return Response::boolean(r);
    }
    if (op == "write") {
      co_await obj.write(hnd, args.at(0));
      co_return Response::ack();
    }
    bad_op(op, algorithm());
  }
  Task<void> recover(int h, int o) override { return objects_.at(o).recover(handles_.at(h)); }
  Task<Detection> detect(int h) override { return durall::detect(mem_, handles_.at(h)); }
  std::vector<CellId> detect_cells(int h) const override {
    return {handles_.at(h).inner().critical().detval_cell()};
  }
  // The contexts table makes LL, SC, Write and Recover depend on its size.
  monitors::StepBounds bounds() const override { return {}; }
};

class DuracasDriver final : public DriverBase<duracas::Object, duracas::Handle> {
 public:
  using DriverBase::DriverBase;
  Algorithm algorithm() const override { return Algorithm::duracas; }
  int create_object(Word init) override {
    objects_.push_back(duracas::Object::create(mem_, init));
    return static_cast<int>(objects_.size()) - 1;
  }
  int create_handle() override {
    handles_.push_back(duracas::Handle::create(mem_));
    return static_cast<int>(handles_.size()) - 1;
  }
  std::uint64_t object_cells() const override { return duracas::kObjectCells; }
  std::uint64_t handle_cells() const override { return duracas::kHandleCells; }

  Task<Response> run(int h, int o, std::string op, std::vector<Word> args) override {
    const auto obj = objects_.at(o);
    const auto hnd = handles_.at(h);
    if (op == "read") {
      const Word v = co_await obj.read(hnd);
      co_return Response::word(v);
    }
    if (op == "cas") {
      const bool r = co_await obj.cas(hnd, args.at(0), args.at(1));
      co_return Response::boolean(r);
    }
    if (op == "write") {
      co_await obj.write(hnd, args.at(0));
      co_return Response::ack();
    }
    bad_op(op, algorithm());
  }
  Task<void> recover(int h, int o) override { return objects_.at(o).recover(handles_.at(h)); }
  Task<Detection> detect(int h) override { return duracas::detect(mem_, handles_.at(h)); }
  std::vector<CellId> detect_cells(int h) const override {
    return {handles_.at(h).critical().detval_cell(), handles_.at(h).op_name_cell()};
  }
  monitors::StepBounds bounds() const override {
    return {{{"read", duracas::kReadBound}, {"cas", duracas::kCasBound}, {"write", duracas::kWriteBound}},
            duracas::kRecoverBound};
  }
};

}  // namespace

std::unique_ptr<Driver> make_driver(Algorithm algo, pmem::Memory& mem) {
  switch (algo) {
    case Algorithm::durec: return std::make_unique<DurecDriver>(mem);
    case Algorithm::durecw: return std::make_unique<DurecwDriver>(mem);
    case Algorithm::durall: return std::make_unique<DurallDriver>(mem);
    case Algorithm::duracas: return std::make_unique<DuracasDriver>(mem);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace dura::harness

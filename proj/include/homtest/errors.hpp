#pragma once

#include <stdexcept>
#include <string>

namespace homtest {

// Input document violates the expected schema (unknown key, bad shape, ...).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An exact search or materialization exceeded its resource guard.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised where an operation needs at least one list-homomorphism to exist.
struct UnsatisfiableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An operation was called outside its contract (wrong tester for the target,
// invalid parameter, degenerate input).
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested target admits no sublinear tester; `test` refuses to run.
struct NoSublinearTesterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace homtest

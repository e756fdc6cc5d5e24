#pragma once

// Translation of an elaborated machine into a raw PTM program.
//
// Supported subset: predicates built from head-at-endmark and scanned-symbol
// tests; actions that write a symbol, move a head, reset a head or clear a
// tape. Every state keeps its id; `true` and `false` become ordinary states
// (one always-on perceptron feeding from one always-off perceptron). Integer
// differentials become multiplicities of +1/-1 genes and multi-step actions
// run through chains of pass-through states.

#include <stdexcept>
#include <string>

#include "ptm/lopro/highlevel.hpp"
#include "ptm/machine.hpp"

namespace ptm::lopro {

class LoweringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

MachineSpec lower(const HlMachine& m);

}  // namespace ptm::lopro

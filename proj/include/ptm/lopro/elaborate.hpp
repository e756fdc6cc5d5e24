#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "ptm/lopro/ast.hpp"
#include "ptm/lopro/highlevel.hpp"

namespace ptm::lopro {

struct ElaborateOptions {
  std::map<std::string, std::int64_t> params;  // overrides for `param` declarations
  // Reuse a finished call's local tapes in later calls needing the same cell count.
  bool recycle_tapes = true;
  // Replace `tape relop constant` tests by head scans so the result stays lowerable.
  bool expand_comparisons = true;
};

// Inlines calls, allocates tapes and compiles rule groups to first-match
// instructions. Throws LoproError on recursion, end mismatches, unknown param
// overrides and integer errors.
HlMachine elaborate(const Program& program, const ElaborateOptions& options = {});

}  // namespace ptm::lopro

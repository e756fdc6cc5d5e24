#pragma once

// Elaborated Lopro machine: tapes, states and first-match instructions with
// integer differentials, plus the direct network build over it.

#include <cstdint>
#include <string>
#include <vector>

#include "ptm/machine.hpp"
#include "ptm/network.hpp"

namespace ptm::lopro {

struct HlTape {
  std::string name;
  std::uint64_t end = 2;  // dim of an index tape
  std::uint32_t cells = 1;
  bool input_index = false;
  bool output_index = false;
};

struct HlState {
  enum class Kind { Plain, Output, Input, True, False };
  std::string name;
  Kind kind = Kind::Plain;
  std::uint32_t scope = 0;
};

struct HlScope {
  std::string name;
  std::uint32_t parent = 0;  // the root scope is its own parent
  std::vector<std::uint32_t> locals;  // tapes cleared on entry and exit
  std::vector<std::uint32_t> heads;   // tapes whose head is reset on entry and exit
};

struct HlPred {
  enum class Kind { True, False, Not, And, Or, IsEnd, Scan, CmpConst, CmpTape };
  Kind kind = Kind::True;
  std::vector<HlPred> operands;
  std::uint32_t tape = 0;
  std::uint32_t other = 0;  // CmpTape right side
  Symbol symbol = Symbol::Zero;
  int op = 0;               // RelOp as int
  std::int64_t value = 0;   // CmpConst right side

  static HlPred constant(bool v) {
    HlPred p;
    p.kind = v ? Kind::True : Kind::False;
    return p;
  }
  bool is_constant() const { return kind == Kind::True || kind == Kind::False; }

  friend bool operator==(const HlPred&, const HlPred&) = default;
};

struct HlAction {
  enum class Kind { Write, Move, SetValue, Copy, ResetHead, ClearTape };
  Kind kind = Kind::Move;
  std::uint32_t tape = 0;
  Symbol symbol = Symbol::Zero;  // Write
  ptm::Move move = ptm::Move::N; // Move
  std::uint64_t value = 0;       // SetValue
  std::uint32_t source = 0;      // Copy

  friend bool operator==(const HlAction&, const HlAction&) = default;
};

struct HlBranch {
  StateId target = 0;
  std::vector<HlAction> actions;  // after-actions followed by scope effects
  std::int64_t dw = 0;
  std::int64_t db = 0;
};

struct HlInstruction {
  StateId from = 0;
  HlPred pred;
  std::vector<HlBranch> branches;
  std::string origin;  // "file:line:col rule for 'state'"
};

struct HlMachine {
  static constexpr StateId kOutput = 0;
  static constexpr StateId kInput = 1;
  static constexpr StateId kTrue = 2;
  static constexpr StateId kFalse = 3;

  std::vector<HlTape> tapes;
  std::vector<HlState> states;
  std::vector<HlScope> scopes;
  std::vector<HlInstruction> instructions;  // grouped by `from`, first match wins within a group
  std::vector<std::uint32_t> input_tapes;   // coordinate order of the input state
  std::vector<std::uint32_t> output_tapes;  // coordinate order of the output state
  bool has_input = false;

  std::vector<std::uint64_t> input_dims() const;
  std::vector<std::uint64_t> output_dims() const;
  // Instructions whose `from` is `state`, in order.
  std::vector<const HlInstruction*> group(StateId state) const;
  std::size_t work_tape_count() const;
};

bool eval_pred(const HlPred& p, const HlMachine& m, const Configuration& c);
void apply_action(const HlAction& a, const HlMachine& m, Configuration& c);

// Depth-first build over high-level configurations, same contract as ptm::build.
Network build_highlevel(const HlMachine& m, const Limits& limits = {}, bool keep_configurations = false);

// Human-readable listing of states and instructions.
std::string describe(const HlMachine& m);

}  // namespace ptm::lopro

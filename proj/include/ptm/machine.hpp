#pragma once

// Machines, instructions and configurations over the alphabet {0, 1, endmark}.
//
// Every tape is a vector of `cells + 1` symbols with the endmark fixed at
// index 0. Tapes are circular through the endmark and heads start on it.
// Index tapes hold an unsigned integer whose low-order bit sits in cell 1.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ptm {

enum class Symbol : std::uint8_t { Zero = 0, One = 1, End = 2 };
enum class Move : std::uint8_t { L = 0, N = 1, R = 2 };
enum class Flavor : std::uint8_t { PTM, ATM };
enum class TapeRole : std::uint8_t { Work, InputIndex, OutputIndex };
enum class GateType : std::uint8_t { And, Or, True, False, Read, ReadInverted };

using StateId = std::uint32_t;

inline constexpr StateId kOutputState = 0;
inline constexpr StateId kInputState = 1;

char symbol_char(Symbol s);
std::optional<Symbol> symbol_from_char(char c);
char move_char(Move m);
std::optional<Move> move_from_char(char c);
const char* gate_name(GateType g);
std::optional<GateType> gate_from_name(std::string_view name);
const char* role_name(TapeRole r);

// Number of cells needed to hold every value in [0, dim): ceil(log2(dim)), at least 1.
std::uint32_t index_cells(std::uint64_t dim);

struct TapeSpec {
  TapeRole role = TapeRole::Work;
  std::uint64_t dim = 2;  // array extent for index tapes; 2^cells for work tapes
  std::uint32_t cells = 1;

  static TapeSpec work(std::uint32_t cells);
  static TapeSpec index(TapeRole role, std::uint64_t dim);

  bool is_index() const { return role != TapeRole::Work; }
  friend bool operator==(const TapeSpec&, const TapeSpec&) = default;
};

struct Instruction {
  StateId from = 0;
  std::vector<Symbol> read;
  StateId to = 0;
  std::vector<Symbol> write;
  std::vector<Move> moves;
  int dw = 1;  // PTM only, in {-1, +1}
  int db = 1;  // PTM only, in {-1, +1}

  friend bool operator==(const Instruction&, const Instruction&) = default;
  friend auto operator<=>(const Instruction&, const Instruction&) = default;
};

// Everything about a machine except its program.
struct MachineHeader {
  Flavor flavor = Flavor::PTM;
  std::uint32_t num_states = 2;
  std::vector<TapeSpec> tapes;
  std::vector<GateType> gates;  // ATM only, one per state

  std::size_t tape_count() const { return tapes.size(); }
  std::vector<std::size_t> tapes_with_role(TapeRole role) const;
  std::vector<std::uint64_t> dims_of(TapeRole role) const;

  // Throws ArgumentError when the header is not well formed.
  void validate() const;
  // True when `instr` has the right arity and in-range state ids and differentials.
  bool accepts(const Instruction& instr) const;

  friend bool operator==(const MachineHeader&, const MachineHeader&) = default;
};

struct MachineSpec {
  MachineHeader header;
  std::vector<Instruction> program;

  // Throws ArgumentError naming the first offending instruction.
  void validate() const;

  friend bool operator==(const MachineSpec&, const MachineSpec&) = default;
};

struct Configuration {
  StateId state = 0;
  std::vector<std::vector<Symbol>> tapes;
  std::vector<std::uint32_t> heads;

  Symbol scanned(std::size_t tape) const { return tapes[tape][heads[tape]]; }
  std::vector<Symbol> scanned() const;

  // Byte string that is equal for two configurations iff they are equal.
  std::string canonical_key() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

// All-zero tapes, heads on the endmark.
Configuration blank_configuration(const MachineHeader& header, StateId state);

// True when the configuration cannot be expanded regardless of the program
// (PTM: input state; ATM: gate in {true, false, read, read-inverted}).
bool is_leaf(const MachineHeader& header, StateId state);

// Instructions applicable to `config`, in program order, paired with their program index.
std::vector<std::pair<std::size_t, const Instruction*>> matching_instructions(
    const MachineSpec& machine, const Configuration& config);

// Writes (endmark-protected) then moves each head with circular wraparound.
Configuration apply_instruction(const Configuration& config, const Instruction& instr);

// Unsigned value of one tape, cell 1 = least significant bit.
std::uint64_t tape_value(const std::vector<Symbol>& tape);
// Overwrites the non-endmark cells with `value` truncated to the tape width.
void set_tape_value(std::vector<Symbol>& tape, std::uint64_t value);

// One coordinate per tape with the given role, in tape order.
std::vector<std::uint64_t> decode_index(const MachineHeader& header, const Configuration& config,
                                        TapeRole role);

// State q0, output-index tapes hold `coords`, everything else blank.
Configuration make_output_config(const MachineHeader& header, std::span<const std::uint64_t> coords);

// Row-major enumeration of every coordinate tuple inside `dims`; one empty tuple for no dims.
std::vector<std::vector<std::uint64_t>> row_major_coords(std::span<const std::uint64_t> dims);

}  // namespace ptm

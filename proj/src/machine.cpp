#include "ptm/machine.hpp"

#include <string>

#include "ptm/errors.hpp"

namespace ptm {

char symbol_char(Symbol s) {
  switch (s) {
    case Symbol::Zero: return '0';
    case Symbol::One: return '1';
    case Symbol::End: return '#';
  }
  return '?';
}

std::optional<Symbol> symbol_from_char(char c) {
  switch (c) {
    case '0': return Symbol::Zero;
    case '1': return Symbol::One;
    case '#': return Symbol::End;
    default: return std::nullopt;
  }
}

char move_char(Move m) {
  switch (m) {
    case Move::L: return 'L';
    case Move::N: return 'N';
    case Move::R: return 'R';
  }
  return '?';
}

std::optional<Move> move_from_char(char c) {
  switch (c) {
    case 'L': return Move::L;
    case 'N': return Move::N;
    case 'R': return Move::R;
    default: return std::nullopt;
  }
}

const char* gate_name(GateType g) {
  switch (g) {
    case GateType::And: return "and";
    case GateType::Or: return "or";
    case GateType::True: return "true";
    case GateType::False: return "false";
    case GateType::Read: return "read";
    case GateType::ReadInverted: return "read-inverted";
  }
  return "?";
}

std::optional<GateType> gate_from_name(std::string_view name) {
  for (GateType g : {GateType::And, GateType::Or, GateType::True, GateType::False, GateType::Read,
                     GateType::ReadInverted}) {
    if (name == gate_name(g)) return g;
  }
  return std::nullopt;
}

const char* role_name(TapeRole r) {
  switch (r) {
    case TapeRole::Work: return "work";
    case TapeRole::InputIndex: return "input-index";
    case TapeRole::OutputIndex: return "output-index";
  }
  return "?";
}

std::uint32_t index_cells(std::uint64_t dim) {
  std::uint32_t cells = 1;
  while (cells < 64 && (std::uint64_t{1} << cells) < dim) ++cells;
  return cells;
}

TapeSpec TapeSpec::work(std::uint32_t cells) {
  if (cells == 0 || cells > 62) throw ArgumentError("work tape needs 1..62 cells");
  return TapeSpec{TapeRole::Work, std::uint64_t{1} << cells, cells};
}

TapeSpec TapeSpec::index(TapeRole role, std::uint64_t dim) {
  if (dim == 0) throw ArgumentError("index tape dim must be positive");
  return TapeSpec{role, dim, index_cells(dim)};
}

std::vector<std::size_t> MachineHeader::tapes_with_role(TapeRole role) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tapes.size(); ++i) {
    if (tapes[i].role == role) out.push_back(i);
  }
  return out;
}

std::vector<std::uint64_t> MachineHeader::dims_of(TapeRole role) const {
  std::vector<std::uint64_t> out;
  for (const auto& t : tapes) {
    if (t.role == role) out.push_back(t.dim);
  }
  return out;
}

void MachineHeader::validate() const {
  if (num_states == 0) throw ArgumentError("machine needs at least one state");
  if (flavor == Flavor::PTM && num_states < 2) {
    throw ArgumentError("PTM needs at least two states (output state 0, input state 1)");
  }
  if (flavor == Flavor::PTM && !gates.empty()) throw ArgumentError("PTM machines carry no gate types");
  if (flavor == Flavor::ATM && gates.size() != num_states) {
    throw ArgumentError("ATM needs a gate type for each of its " + std::to_string(num_states) +
                        " states");
  }
  for (std::size_t i = 0; i < tapes.size(); ++i) {
    const auto& t = tapes[i];
    if (t.cells == 0 || t.cells > 62) {
      throw ArgumentError("tape " + std::to_string(i) + " has an invalid cell count");
    }
    if (t.is_index() && (t.dim == 0 || t.cells != index_cells(t.dim))) {
      throw ArgumentError("index tape " + std::to_string(i) + " cells do not match its dim");
    }
  }
}

bool MachineHeader::accepts(const Instruction& instr) const {
  const std::size_t k = tapes.size();
  if (instr.read.size() != k || instr.write.size() != k || instr.moves.size() != k) return false;
  if (instr.from >= num_states || instr.to >= num_states) return false;
  if (flavor == Flavor::PTM) {
    if ((instr.dw != 1 && instr.dw != -1) || (instr.db != 1 && instr.db != -1)) return false;
  }
  return true;
}

void MachineSpec::validate() const {
  header.validate();
  for (std::size_t i = 0; i < program.size(); ++i) {
    if (!header.accepts(program[i])) {
      throw ArgumentError("instruction " + std::to_string(i) + " does not fit the machine header");
    }
  }
}

std::vector<Symbol> Configuration::scanned() const {
  std::vector<Symbol> out(tapes.size());
  for (std::size_t i = 0; i < tapes.size(); ++i) out[i] = tapes[i][heads[i]];
  return out;
}

std::string Configuration::canonical_key() const {
  std::string key;
  std::size_t total = 8;
  for (const auto& t : tapes) total += t.size() + 4;
  key.reserve(total);
  auto put32 = [&key](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) key.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
  };
  put32(state);
  put32(static_cast<std::uint32_t>(tapes.size()));
  for (std::size_t i = 0; i < tapes.size(); ++i) {
    put32(heads[i]);
    key.push_back(static_cast<char>(tapes[i].size() & 0xff));
    for (Symbol s : tapes[i]) key.push_back(static_cast<char>(s));
  }
  return key;
}

Configuration blank_configuration(const MachineHeader& header, StateId state) {
  Configuration c;
  c.state = state;
  c.tapes.reserve(header.tapes.size());
  for (const auto& t : header.tapes) {
    std::vector<Symbol> cells(t.cells + 1, Symbol::Zero);
    cells[0] = Symbol::End;
    c.tapes.push_back(std::move(cells));
  }
  c.heads.assign(header.tapes.size(), 0);
  return c;
}

bool is_leaf(const MachineHeader& header, StateId state) {
  if (header.flavor == Flavor::PTM) return state == kInputState;
  const GateType g = header.gates.at(state);
  return g != GateType::And && g != GateType::Or;
}

std::vector<std::pair<std::size_t, const Instruction*>> matching_instructions(
    const MachineSpec& machine, const Configuration& config) {
  const std::size_t k = machine.header.tapes.size();
  if (config.tapes.size() != k || config.heads.size() != k) {
    throw StructuralError("configuration has " + std::to_string(config.tapes.size()) +
                          " tapes, machine has " + std::to_string(k));
  }
  std::vector<std::pair<std::size_t, const Instruction*>> out;
  if (is_leaf(machine.header, config.state)) return out;
  for (std::size_t i = 0; i < machine.program.size(); ++i) {
    const Instruction& instr = machine.program[i];
    if (instr.from != config.state) continue;
    if (instr.read.size() != k) throw StructuralError("instruction arity differs from tape count");
    bool match = true;
    for (std::size_t t = 0; t < k && match; ++t) match = instr.read[t] == config.scanned(t);
    if (match) out.emplace_back(i, &instr);
  }
  return out;
}

Configuration apply_instruction(const Configuration& config, const Instruction& instr) {
  Configuration next = config;
  next.state = instr.to;
  for (std::size_t t = 0; t < next.tapes.size(); ++t) {
    auto& tape = next.tapes[t];
    auto& head = next.heads[t];
    const Symbol current = tape[head];
    const Symbol wanted = instr.write[t];
    if ((current == Symbol::End) == (wanted == Symbol::End)) tape[head] = wanted;
    const auto size = static_cast<std::uint32_t>(tape.size());
    switch (instr.moves[t]) {
      case Move::R: head = (head + 1) % size; break;
      case Move::L: head = (head + size - 1) % size; break;
      case Move::N: break;
    }
  }
  return next;
}

std::uint64_t tape_value(const std::vector<Symbol>& tape) {
  std::uint64_t value = 0;
  for (std::size_t i = tape.size(); i-- > 1;) {
    value = (value << 1) | (tape[i] == Symbol::One ? 1u : 0u);
  }
  return value;
}

void set_tape_value(std::vector<Symbol>& tape, std::uint64_t value) {
  for (std::size_t i = 1; i < tape.size(); ++i) {
    tape[i] = (value & 1) ? Symbol::One : Symbol::Zero;
    value >>= 1;
  }
}

std::vector<std::uint64_t> decode_index(const MachineHeader& header, const Configuration& config,
                                        TapeRole role) {
  std::vector<std::uint64_t> out;
  for (std::size_t i : header.tapes_with_role(role)) out.push_back(tape_value(config.tapes.at(i)));
  return out;
}

Configuration make_output_config(const MachineHeader& header, std::span<const std::uint64_t> coords) {
  const auto out_tapes = header.tapes_with_role(TapeRole::OutputIndex);
  if (coords.size() != out_tapes.size()) {
    throw ArgumentError("expected " + std::to_string(out_tapes.size()) + " output coordinates, got " +
                        std::to_string(coords.size()));
  }
  Configuration c = blank_configuration(header, kOutputState);
  for (std::size_t i = 0; i < out_tapes.size(); ++i) {
    const auto& spec = header.tapes[out_tapes[i]];
    if (coords[i] >= spec.dim) {
      throw ArgumentError("output coordinate " + std::to_string(coords[i]) + " out of range for dim " +
                          std::to_string(spec.dim));
    }
    set_tape_value(c.tapes[out_tapes[i]], coords[i]);
  }
  return c;
}

std::vector<std::vector<std::uint64_t>> row_major_coords(std::span<const std::uint64_t> dims) {
  std::vector<std::vector<std::uint64_t>> out;
  std::vector<std::uint64_t> current(dims.size(), 0);
  for (auto d : dims) {
    if (d == 0) return out;
  }
  while (true) {
    out.push_back(current);
    std::size_t axis = dims.size();
    while (axis > 0) {
      --axis;
      if (++current[axis] < dims[axis]) break;
      current[axis] = 0;
      if (axis == 0) return out;
    }
    if (dims.empty()) return out;
  }
}

}  // namespace ptm

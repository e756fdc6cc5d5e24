#include "ptm/machine_format.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "ptm/errors.hpp"

namespace ptm {
namespace {

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::uint64_t parse_uint(const std::string& tok, std::size_t line, const char* what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError(line, std::string("expected ") + what + ", got '" + tok + "'");
  }
  return v;
}

int parse_unit(const std::string& tok, std::size_t line) {
  if (tok == "+1" || tok == "1") return 1;
  if (tok == "-1") return -1;
  throw FormatError(line, "differential must be +1 or -1, got '" + tok + "'");
}

Symbol parse_symbol(const std::string& tok, std::size_t line) {
  if (tok.size() == 1) {
    if (auto s = symbol_from_char(tok[0])) return *s;
  }
  throw FormatError(line, "expected symbol 0, 1 or #, got '" + tok + "'");
}

Move parse_move(const std::string& tok, std::size_t line) {
  if (tok.size() == 1) {
    if (auto m = move_from_char(tok[0])) return *m;
  }
  throw FormatError(line, "expected move L, N or R, got '" + tok + "'");
}

}  // namespace

MachineSpec parse_machine(std::string_view text) {
  MachineSpec machine;
  bool have_magic = false;
  bool have_states = false;
  std::map<std::uint64_t, std::pair<TapeSpec, std::size_t>> tapes;
  std::map<std::uint64_t, std::pair<GateType, std::size_t>> gates;
  struct PendingInstr {
    std::vector<std::string> tokens;
    std::size_t line;
  };
  std::vector<PendingInstr> pending;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') continue;
    const auto tokens = split_tokens(raw);
    const std::string& kw = tokens[0];
    if (!have_magic) {
      if (tokens.size() != 2 || tokens[1] != "v1" || (kw != "ptm" && kw != "atm")) {
        throw FormatError(line_no, "expected header 'ptm v1' or 'atm v1'");
      }
      machine.header.flavor = kw == "ptm" ? Flavor::PTM : Flavor::ATM;
      have_magic = true;
    } else if (kw == "states") {
      if (tokens.size() != 2) throw FormatError(line_no, "usage: states <n>");
      if (have_states) throw FormatError(line_no, "duplicate 'states' line");
      machine.header.num_states = static_cast<std::uint32_t>(parse_uint(tokens[1], line_no, "state count"));
      have_states = true;
    } else if (kw == "tape") {
      if (tokens.size() != 5) throw FormatError(line_no, "usage: tape <idx> <role> cells|dim <n>");
      const auto idx = parse_uint(tokens[1], line_no, "tape index");
      const auto n = parse_uint(tokens[4], line_no, "tape size");
      TapeSpec spec;
      try {
        if (tokens[2] == "work" && tokens[3] == "cells") {
          spec = TapeSpec::work(static_cast<std::uint32_t>(n));
        } else if (tokens[2] == "input-index" && tokens[3] == "dim") {
          spec = TapeSpec::index(TapeRole::InputIndex, n);
        } else if (tokens[2] == "output-index" && tokens[3] == "dim") {
          spec = TapeSpec::index(TapeRole::OutputIndex, n);
        } else {
          throw FormatError(line_no, "unknown tape role/size form '" + tokens[2] + " " + tokens[3] + "'");
        }
      } catch (const ArgumentError& e) {
        throw FormatError(line_no, e.what());
      }
      if (!tapes.emplace(idx, std::make_pair(spec, line_no)).second) {
        throw FormatError(line_no, "duplicate tape " + tokens[1]);
      }
    } else if (kw == "gate") {
      if (machine.header.flavor != Flavor::ATM) throw FormatError(line_no, "gate lines are ATM only");
      if (tokens.size() != 3) throw FormatError(line_no, "usage: gate <state> <type>");
      const auto state = parse_uint(tokens[1], line_no, "state id");
      const auto g = gate_from_name(tokens[2]);
      if (!g) throw FormatError(line_no, "unknown gate type '" + tokens[2] + "'");
      if (!gates.emplace(state, std::make_pair(*g, line_no)).second) {
        throw FormatError(line_no, "duplicate gate for state " + tokens[1]);
      }
    } else if (kw == "instr") {
      pending.push_back({tokens, line_no});
    } else {
      throw FormatError(line_no, "unknown directive '" + kw + "'");
    }
  }
  if (!have_magic) throw FormatError(0, "empty machine file");
  if (!have_states) throw FormatError(0, "missing 'states' line");

  std::uint64_t expect = 0;
  for (const auto& [idx, entry] : tapes) {
    if (idx != expect) throw FormatError(entry.second, "tape indices must be 0..k-1 without gaps");
    machine.header.tapes.push_back(entry.first);
    ++expect;
  }
  if (machine.header.flavor == Flavor::ATM) {
    for (const auto& [state, entry] : gates) {
      if (state >= machine.header.num_states) {
        throw FormatError(entry.second, "gate for undeclared state " + std::to_string(state));
      }
    }
    for (std::uint32_t s = 0; s < machine.header.num_states; ++s) {
      auto it = gates.find(s);
      if (it == gates.end()) throw FormatError(0, "state " + std::to_string(s) + " has no gate type");
      machine.header.gates.push_back(it->second.first);
    }
  }
  try {
    machine.header.validate();
  } catch (const ArgumentError& e) {
    throw FormatError(0, e.what());
  }

  const std::size_t k = machine.header.tapes.size();
  const bool ptm = machine.header.flavor == Flavor::PTM;
  const std::size_t expected = 1 + 1 + k + 1 + 1 + k + k + (ptm ? 2 : 0);
  for (const auto& p : pending) {
    const auto& t = p.tokens;
    if (t.size() != expected || t[2 + k] != "->") {
      throw FormatError(p.line, "instruction needs " + std::to_string(expected) +
                                    " tokens for a machine with " + std::to_string(k) + " tapes");
    }
    Instruction instr;
    std::size_t pos = 1;
    instr.from = static_cast<StateId>(parse_uint(t[pos++], p.line, "state id"));
    for (std::size_t i = 0; i < k; ++i) instr.read.push_back(parse_symbol(t[pos++], p.line));
    ++pos;  // ->
    instr.to = static_cast<StateId>(parse_uint(t[pos++], p.line, "state id"));
    for (std::size_t i = 0; i < k; ++i) instr.write.push_back(parse_symbol(t[pos++], p.line));
    for (std::size_t i = 0; i < k; ++i) instr.moves.push_back(parse_move(t[pos++], p.line));
    if (ptm) {
      instr.dw = parse_unit(t[pos++], p.line);
      instr.db = parse_unit(t[pos++], p.line);
    }
    if (instr.from >= machine.header.num_states || instr.to >= machine.header.num_states) {
      throw FormatError(p.line, "state id out of range");
    }
    machine.program.push_back(std::move(instr));
  }
  return machine;
}

std::string format_instruction(const Instruction& instr, Flavor flavor) {
  std::string out = "instr " + std::to_string(instr.from);
  for (Symbol s : instr.read) (out += ' ') += symbol_char(s);
  out += " -> " + std::to_string(instr.to);
  for (Symbol s : instr.write) (out += ' ') += symbol_char(s);
  for (Move m : instr.moves) (out += ' ') += move_char(m);
  if (flavor == Flavor::PTM) {
    out += instr.dw > 0 ? " +1" : " -1";
    out += instr.db > 0 ? " +1" : " -1";
  }
  return out;
}

std::string format_machine(const MachineSpec& machine) {
  const auto& h = machine.header;
  std::string out = h.flavor == Flavor::PTM ? "ptm v1\n" : "atm v1\n";
  out += "states " + std::to_string(h.num_states) + "\n";
  for (std::size_t i = 0; i < h.tapes.size(); ++i) {
    const auto& t = h.tapes[i];
    out += "tape " + std::to_string(i) + " " + role_name(t.role);
    out += t.is_index() ? " dim " + std::to_string(t.dim) : " cells " + std::to_string(t.cells);
    out += "\n";
  }
  for (std::size_t s = 0; s < h.gates.size(); ++s) {
    out += "gate " + std::to_string(s) + " " + gate_name(h.gates[s]) + "\n";
  }
  for (const auto& instr : machine.program) out += format_instruction(instr, h.flavor) + "\n";
  return out;
}

MachineSpec load_machine_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open machine file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_machine(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(e.line(), e.message(), path);
  }
}

void save_machine_file(const std::string& path, const MachineSpec& machine) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << format_machine(machine);
}

}  // namespace ptm

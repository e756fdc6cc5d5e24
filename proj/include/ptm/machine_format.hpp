#pragma once

// Line-oriented text format for machines and genotypes.
//
//   ptm v1                      (or: atm v1)
//   states <n>
//   tape <idx> work cells <c>
//   tape <idx> input-index dim <d>
//   tape <idx> output-index dim <d>
//   gate <state> <and|or|true|false|read|read-inverted>     ATM only
//   instr <q> <a1..ak> -> <q'> <b1..bk> <m1..mk> <dw> <db>  dw/db PTM only
//
// Symbols are 0, 1, #; moves L, N, R. Lines whose first character is '#'
// are comments. Instruction order in the file is program order.

#include <string>
#include <string_view>

#include "ptm/machine.hpp"

namespace ptm {

MachineSpec parse_machine(std::string_view text);
std::string format_machine(const MachineSpec& machine);
std::string format_instruction(const Instruction& instr, Flavor flavor);

MachineSpec load_machine_file(const std::string& path);
void save_machine_file(const std::string& path, const MachineSpec& machine);

}  // namespace ptm

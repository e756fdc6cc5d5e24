#include <doctest.h>

#include <random>
#include <set>

#include "ptm/errors.hpp"
#include "ptm/machine.hpp"
#include "ptm/machine_format.hpp"
#include "support/oracles.hpp"

using namespace ptm;
using ptm::testing::oracle_apply;
using ptm::testing::oracle_little_endian;
using ptm::testing::oracle_matches;
using ptm::testing::random_machine;

namespace {

MachineHeader one_work_tape(std::uint32_t cells, std::uint32_t states = 3) {
  MachineHeader h;
  h.num_states = states;
  h.tapes.push_back(TapeSpec::work(cells));
  return h;
}

Instruction instr(StateId from, Symbol read, StateId to, Symbol write, Move move, int dw = 1, int db = 1) {
  return Instruction{from, {read}, to, {write}, {move}, dw, db};
}

Configuration with_cells(const MachineHeader& h, StateId state, std::vector<std::vector<int>> bits) {
  Configuration c = blank_configuration(h, state);
  for (std::size_t t = 0; t < bits.size(); ++t) {
    for (std::size_t i = 0; i < bits[t].size(); ++i) {
      c.tapes[t][i + 1] = bits[t][i] ? Symbol::One : Symbol::Zero;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("index tapes use ceil(log2(dim)) cells with a minimum of one") {
  CHECK(index_cells(1) == 1);
  CHECK(index_cells(2) == 1);
  CHECK(index_cells(3) == 2);
  CHECK(index_cells(4) == 2);
  CHECK(index_cells(6) == 3);
  CHECK(index_cells(16) == 4);
  CHECK(index_cells(17) == 5);
}

TEST_CASE("matching_instructions") {
  MachineSpec m;
  m.header = one_work_tape(2);
  const Configuration c = blank_configuration(m.header, 2);

  SUBCASE("empty program matches nothing") { CHECK(matching_instructions(m, c).empty()); }

  SUBCASE("identical preconditions all match, in program order") {
    m.program = {instr(2, Symbol::End, 0, Symbol::End, Move::N), instr(2, Symbol::Zero, 0, Symbol::Zero, Move::N),
                 instr(2, Symbol::End, 1, Symbol::End, Move::R)};
    auto found = matching_instructions(m, c);
    REQUIRE(found.size() == 2);
    CHECK(found[0].first == 0);
    CHECK(found[1].first == 2);
    CHECK(found[1].second->to == 1);
  }

  SUBCASE("input state is a leaf even with instructions out of it") {
    m.program = {instr(kInputState, Symbol::End, 0, Symbol::End, Move::N)};
    CHECK(matching_instructions(m, blank_configuration(m.header, kInputState)).empty());
  }

  SUBCASE("ATM leaf gates override the program") {
    m.header.flavor = Flavor::ATM;
    m.header.gates = {GateType::Or, GateType::Read, GateType::True};
    m.program = {instr(1, Symbol::End, 0, Symbol::End, Move::N), instr(2, Symbol::End, 0, Symbol::End, Move::N),
                 instr(0, Symbol::End, 1, Symbol::End, Move::N)};
    CHECK(matching_instructions(m, blank_configuration(m.header, 1)).empty());
    CHECK(matching_instructions(m, blank_configuration(m.header, 2)).empty());
    CHECK(matching_instructions(m, blank_configuration(m.header, 0)).size() == 1);
  }

  SUBCASE("tape count mismatch is a structural error") {
    Configuration wrong = c;
    wrong.tapes.pop_back();
    wrong.heads.pop_back();
    CHECK_THROWS_AS(matching_instructions(m, wrong), StructuralError);
  }
}

TEST_CASE("apply_instruction") {
  const MachineHeader h = one_work_tape(3);
  const Configuration start = with_cells(h, 2, {{1, 0, 1}});

  SUBCASE("identity action only changes the state") {
    auto n = apply_instruction(start, instr(2, Symbol::End, 0, Symbol::End, Move::N));
    CHECK(n.state == 0);
    CHECK(n.tapes == start.tapes);
    CHECK(n.heads == start.heads);
  }
  SUBCASE("moving right from the endmark lands on the first cell") {
    auto n = apply_instruction(start, instr(2, Symbol::End, 2, Symbol::End, Move::R));
    CHECK(n.heads[0] == 1);
  }
  SUBCASE("moving left from the endmark lands on the last cell") {
    auto n = apply_instruction(start, instr(2, Symbol::End, 2, Symbol::End, Move::L));
    CHECK(n.heads[0] == 3);
  }
  SUBCASE("moving right from the last cell wraps to the endmark") {
    Configuration c = start;
    c.heads[0] = 3;
    auto n = apply_instruction(c, instr(2, Symbol::One, 2, Symbol::One, Move::R));
    CHECK(n.heads[0] == 0);
  }
  SUBCASE("writing over the endmark is ignored") {
    auto n = apply_instruction(start, instr(2, Symbol::End, 2, Symbol::Zero, Move::N));
    CHECK(n.tapes[0][0] == Symbol::End);
  }
  SUBCASE("writing an endmark over a cell is ignored") {
    Configuration c = start;
    c.heads[0] = 2;
    auto n = apply_instruction(c, instr(2, Symbol::Zero, 2, Symbol::End, Move::N));
    CHECK(n.tapes[0][2] == Symbol::Zero);
  }
  SUBCASE("ordinary writes land before the move") {
    Configuration c = start;
    c.heads[0] = 2;
    auto n = apply_instruction(c, instr(2, Symbol::Zero, 2, Symbol::One, Move::R));
    CHECK(n.tapes[0][2] == Symbol::One);
    CHECK(n.heads[0] == 3);
  }
}

TEST_CASE("decode_index reads cell 1 as the low-order bit") {
  MachineHeader h;
  h.tapes = {TapeSpec::index(TapeRole::InputIndex, 8)};
  CHECK(decode_index(h, blank_configuration(h, 0), TapeRole::InputIndex) == std::vector<std::uint64_t>{0});
  CHECK(decode_index(h, with_cells(h, 0, {{1, 0, 1}}), TapeRole::InputIndex) ==
        std::vector<std::uint64_t>{oracle_little_endian({1, 0, 1})});
  CHECK(oracle_little_endian({1, 0, 1}) == 5);

  MachineHeader two;
  two.tapes = {TapeSpec::index(TapeRole::InputIndex, 4), TapeSpec::work(1), TapeSpec::index(TapeRole::InputIndex, 4)};
  auto c = with_cells(two, 0, {{1, 0}, {1}, {0, 1}});
  CHECK(decode_index(two, c, TapeRole::InputIndex) == std::vector<std::uint64_t>{1, 2});
  CHECK(decode_index(two, c, TapeRole::OutputIndex).empty());
}

TEST_CASE("make_output_config") {
  MachineHeader none;
  none.tapes = {TapeSpec::work(2)};
  auto c = make_output_config(none, {});
  CHECK(c.state == kOutputState);
  CHECK(c == blank_configuration(none, kOutputState));

  MachineHeader h;
  h.tapes = {TapeSpec::index(TapeRole::OutputIndex, 4), TapeSpec::work(1)};
  const std::vector<std::uint64_t> zero{0};
  CHECK(make_output_config(h, zero).tapes[0] == std::vector<Symbol>{Symbol::End, Symbol::Zero, Symbol::Zero});
  const std::vector<std::uint64_t> three{3};
  auto c3 = make_output_config(h, three);
  CHECK(c3.tapes[0] == std::vector<Symbol>{Symbol::End, Symbol::One, Symbol::One});
  CHECK(c3.heads == std::vector<std::uint32_t>{0, 0});
  const std::vector<std::uint64_t> four{4};
  CHECK_THROWS_AS(make_output_config(h, four), ArgumentError);
  CHECK_THROWS_AS(make_output_config(h, {}), ArgumentError);
}

TEST_CASE("decode_index inverts make_output_config over random headers") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    MachineHeader h;
    const int tapes = static_cast<int>(rng() % 3);
    for (int i = 0; i < tapes; ++i) h.tapes.push_back(TapeSpec::index(TapeRole::OutputIndex, 1 + rng() % 9));
    h.tapes.push_back(TapeSpec::work(2));
    for (const auto& coords : row_major_coords(h.dims_of(TapeRole::OutputIndex))) {
      CHECK(decode_index(h, make_output_config(h, coords), TapeRole::OutputIndex) == coords);
    }
  }
}

TEST_CASE("canonical_key is injective on every configuration of small machines") {
  for (std::uint32_t cells = 1; cells <= 2; ++cells) {
    for (std::uint32_t tapes = 1; tapes <= 2; ++tapes) {
      MachineHeader h;
      h.num_states = 3;
      for (std::uint32_t t = 0; t < tapes; ++t) h.tapes.push_back(TapeSpec::work(cells));
      // Enumerate state x contents x heads.
      const std::uint64_t per_tape = (std::uint64_t{1} << cells) * (cells + 1);
      std::uint64_t total = h.num_states;
      for (std::uint32_t t = 0; t < tapes; ++t) total *= per_tape;
      std::set<std::string> keys;
      std::vector<Configuration> all;
      for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t rest = code;
        Configuration c = blank_configuration(h, static_cast<StateId>(rest % h.num_states));
        rest /= h.num_states;
        for (std::uint32_t t = 0; t < tapes; ++t) {
          const std::uint64_t v = rest % per_tape;
          rest /= per_tape;
          set_tape_value(c.tapes[t], v / (cells + 1));
          c.heads[t] = static_cast<std::uint32_t>(v % (cells + 1));
        }
        keys.insert(c.canonical_key());
        all.push_back(c);
      }
      CHECK(keys.size() == total);
      for (std::size_t i = 1; i < all.size(); ++i) CHECK(!(all[i] == all[i - 1]));
    }
  }
}

TEST_CASE("opposite head moves restore positions") {
  std::mt19937_64 rng(11);
  const MachineHeader h = one_work_tape(3, 2);
  for (int trial = 0; trial < 500; ++trial) {
    Configuration c = blank_configuration(h, 0);
    set_tape_value(c.tapes[0], rng() % 8);
    c.heads[0] = static_cast<std::uint32_t>(rng() % 4);
    const Symbol s = c.scanned(0);
    const Move m = (rng() % 2) ? Move::R : Move::L;
    const Move back = m == Move::R ? Move::L : Move::R;
    auto there = apply_instruction(c, Instruction{0, {s}, 0, {s}, {m}, 1, 1});
    auto again = apply_instruction(there, Instruction{0, {there.scanned(0)}, 0, {there.scanned(0)}, {back}, 1, 1});
    CHECK(again == c);
  }
}

TEST_CASE("matching and apply agree with the reference step rule on random machines") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    MachineSpec m = random_machine(rng);
    Configuration c = blank_configuration(m.header, static_cast<StateId>(rng() % m.header.num_states));
    for (std::size_t t = 0; t < c.tapes.size(); ++t) {
      set_tape_value(c.tapes[t], rng());
      c.heads[t] = static_cast<std::uint32_t>(rng() % c.tapes[t].size());
    }
    auto found = matching_instructions(m, c);
    std::vector<std::size_t> expected;
    if (c.state != kInputState) {
      for (std::size_t i = 0; i < m.program.size(); ++i) {
        if (oracle_matches(m.program[i], c)) expected.push_back(i);
      }
    }
    REQUIRE(found.size() == expected.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
      CHECK(found[i].first == expected[i]);
      CHECK(apply_instruction(c, *found[i].second) == oracle_apply(c, *found[i].second));
    }
  }
}

TEST_CASE("machine text format") {
  SUBCASE("round trip preserves program order") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      testing::RandomMachineShape shape;
      shape.atm = trial % 3 == 0;
      MachineSpec m = random_machine(rng, shape);
      if (shape.atm) {
        for (auto& i : m.program) i.dw = i.db = 1;
      }
      CHECK(parse_machine(format_machine(m)) == m);
    }
  }

  SUBCASE("documented layout parses") {
    auto m = parse_machine(R"(# and-like output node
ptm v1
states 3
tape 0 input-index dim 2
tape 1 work cells 2
instr 0 # # -> 1 # # N R +1 -1
instr 0 # # -> 2 # # R N -1 +1
)");
    CHECK(m.header.tapes.size() == 2);
    CHECK(m.header.tapes[1].cells == 2);
    REQUIRE(m.program.size() == 2);
    CHECK(m.program[0].moves == std::vector<Move>{Move::N, Move::R});
    CHECK(m.program[1].dw == -1);
    CHECK(m.program[1].db == 1);
  }

  SUBCASE("errors carry line numbers") {
    try {
      parse_machine("ptm v1\nstates 2\ninstr 0 -> 1 +1\n");
      FAIL("expected a format error");
    } catch (const FormatError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_machine(""), FormatError);
    CHECK_THROWS_AS(parse_machine("ptm v1\nstates 2\ntape 1 work cells 1\n"), FormatError);
    CHECK_THROWS_AS(parse_machine("ptm v1\nstates 2\nbogus\n"), FormatError);
    CHECK_THROWS_AS(parse_machine("atm v1\nstates 2\ngate 0 or\n"), FormatError);
    CHECK_THROWS_AS(parse_machine("ptm v1\nstates 2\ninstr 0 -> 5 +1 +1\n"), FormatError);
    CHECK_THROWS_AS(parse_machine("ptm v1\nstates 2\ninstr 0 -> 1 +2 +1\n"), FormatError);
  }
}

#include <doctest.h>

#include <map>
#include <random>

#include "ptm/errors.hpp"
#include "ptm/exec.hpp"
#include "ptm/machine_format.hpp"
#include "support/oracles.hpp"

using namespace ptm;

namespace {

// Hand-assembled single perceptron over two inputs.
Network perceptron(std::int64_t w0, std::int64_t w1, std::int64_t bias) {
  Network net;
  net.nodes = {Node{NodeKind::Output, bias, GateType::Or, {}}, Node{NodeKind::Input, 0, GateType::Or, {0}},
               Node{NodeKind::Input, 0, GateType::Or, {1}}};
  net.links = {Link{0, 1, w0}, Link{0, 2, w1}};
  net.outputs = {0};
  net.input_dims = {2};
  net.finalize();
  return net;
}

Network gate(GateType g) {
  Network net = perceptron(1, 1, 0);
  net.perceptron = false;
  net.nodes[0].gate = g;
  return net;
}

BitArray pair(int x0, int x1) {
  BitArray a = BitArray::zeros({2});
  a.bits = {static_cast<std::uint8_t>(x0), static_cast<std::uint8_t>(x1)};
  return a;
}

bool out(const Network& net, int x0, int x1) { return evaluate(net, pair(x0, x1)).bits[0] != 0; }

}  // namespace

TEST_CASE("bit strings follow the bitset convention") {
  BitArray a = BitArray::from_string({6}, "001101");
  CHECK(a.bits == std::vector<std::uint8_t>{1, 0, 1, 1, 0, 0});
  CHECK(a.to_string() == "001101");
  BitArray m = BitArray::from_string({2, 2}, "0010");
  CHECK(m.at({0, 1}));
  CHECK_FALSE(m.at({1, 0}));
  CHECK(BitArray::zeros({}).size() == 1);
  try {
    BitArray::from_string({2, 3}, "0101");
    FAIL("expected an error");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("[2x3]") != std::string::npos);
  }
  CHECK_THROWS_AS(BitArray::from_string({2}, "0a"), ArgumentError);
}

TEST_CASE("perceptron threshold") {
  Network and_net = perceptron(2, 2, -2);
  CHECK(out(and_net, 1, 1));
  CHECK_FALSE(out(and_net, 1, 0));
  CHECK_FALSE(out(and_net, 0, 1));
  CHECK_FALSE(out(and_net, 0, 0));

  Network or_net = perceptron(2, 2, 0);
  CHECK(out(or_net, 0, 1));
  CHECK_FALSE(out(or_net, 0, 0));

  SUBCASE("sum equal to -bias is strictly below threshold") {
    Network boundary = perceptron(3, 5, -3);
    CHECK_FALSE(out(boundary, 1, 0));
    CHECK(out(boundary, 0, 1));
  }
  SUBCASE("pass-through reproduces its child") {
    Network pass = perceptron(2, 0, 0);
    CHECK(out(pass, 1, 0));
    CHECK_FALSE(out(pass, 0, 1));
  }
}

TEST_CASE("AND and OR perceptrons agree with the gate versions") {
  for (int x0 = 0; x0 < 2; ++x0) {
    for (int x1 = 0; x1 < 2; ++x1) {
      CHECK(out(perceptron(2, 2, -2), x0, x1) == out(gate(GateType::And), x0, x1));
      CHECK(out(perceptron(2, 2, 0), x0, x1) == out(gate(GateType::Or), x0, x1));
      CHECK(out(gate(GateType::And), x0, x1) == (x0 && x1));
      CHECK(out(gate(GateType::Or), x0, x1) == (x0 || x1));
    }
  }
}

TEST_CASE("gates with no inputs read as false") {
  Network net;
  net.perceptron = false;
  net.nodes = {Node{NodeKind::Output, 0, GateType::And, {}}};
  net.outputs = {0};
  net.finalize();
  CHECK(evaluate(net, BitArray::zeros({})).bits[0] == 0);
  net.nodes[0].gate = GateType::Or;
  CHECK(evaluate(net, BitArray::zeros({})).bits[0] == 0);
}

TEST_CASE("read-inverted leaves complement the input bit") {
  Network net;
  net.perceptron = false;
  net.nodes = {Node{NodeKind::Output, 0, GateType::And, {}}, Node{NodeKind::Read, 0, GateType::Or, {0}, true}};
  net.links = {Link{0, 1, 1}};
  net.outputs = {0};
  net.input_dims = {1};
  net.finalize();
  CHECK(evaluate(net, BitArray::from_string({1}, "0")).bits[0] == 1);
  CHECK(evaluate(net, BitArray::from_string({1}, "1")).bits[0] == 0);
}

TEST_CASE("truth tables") {
  SUBCASE("AND network built from genes") {
    // States 2 and 3 write the index bit and pass through to the input state.
    auto m = parse_machine(R"(ptm v1
states 4
tape 0 input-index dim 2
instr 0 # -> 2 # R +1 -1
instr 0 # -> 2 # R +1 -1
instr 0 # -> 3 # R +1 -1
instr 0 # -> 3 # R +1 +1
instr 2 0 -> 1 0 N +1 +1
instr 2 0 -> 1 0 N +1 -1
instr 3 0 -> 1 1 N +1 +1
instr 3 0 -> 1 1 N +1 -1
)");
    auto rows = truth_table(build(m));
    REQUIRE(rows.size() == 4);
    std::vector<std::string> got;
    for (const auto& [in, o] : rows) got.push_back(in.to_string() + "->" + o.to_string());
    CHECK(got == std::vector<std::string>{"00->0", "01->0", "10->0", "11->1"});
  }
  SUBCASE("empty program is constant zero") {
    MachineSpec m;
    m.header.tapes = {TapeSpec::index(TapeRole::InputIndex, 3)};
    for (const auto& [in, o] : truth_table(build(m))) CHECK(o.to_string() == "0");
  }
  SUBCASE("single input identity") {
    auto m = parse_machine("ptm v1\nstates 2\ntape 0 input-index dim 1\ninstr 0 # -> 1 # N +1 +1\ninstr 0 # -> 1 # N +1 -1\n");
    auto rows = truth_table(build(m));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].second.to_string() == "0");
    CHECK(rows[1].second.to_string() == "1");
  }
  SUBCASE("cap is enforced") {
    MachineSpec m;
    m.header.tapes = {TapeSpec::index(TapeRole::InputIndex, 21)};
    CHECK_THROWS_AS(truth_table(build(m)), ArgumentError);
    CHECK_NOTHROW(truth_table(build(m), 21));
  }
}

TEST_CASE("evaluation matches naive recursion on random machines") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    ptm::testing::RandomMachineShape shape;
    shape.atm = trial % 2 == 1;
    shape.max_output_dim = 3;
    const MachineSpec m = ptm::testing::random_machine(rng, shape);
    const Network net = build(m);
    for (const auto& [in, o] : truth_table(net)) {
      std::map<NodeId, bool> memo;
      for (std::size_t i = 0; i < net.outputs.size(); ++i) {
        CHECK(o.bits[i] == ptm::testing::oracle_node_value(net, net.outputs[i], in, memo));
      }
      CHECK(evaluate(net, in) == o);
    }
  }
}

TEST_CASE("input dims are checked") {
  MachineSpec m;
  m.header.tapes = {TapeSpec::index(TapeRole::InputIndex, 3)};
  CHECK_THROWS_AS(evaluate(build(m), BitArray::zeros({4})), ArgumentError);
}

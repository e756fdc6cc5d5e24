#pragma once

// Network phenotype and the depth-first build that produces it.
//
// A node is identified with a configuration; a link from -> to means the
// `to` node feeds an input of the `from` node. Links are kept grouped by
// their source node so evaluation can walk a node's inputs contiguously.

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptm/machine.hpp"

namespace ptm {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class NodeKind : std::uint8_t { Output, Hidden, Input, Constant, Read };

const char* node_kind_name(NodeKind k);

struct Node {
  NodeKind kind = NodeKind::Hidden;
  std::int64_t bias = 0;                // perceptron networks
  GateType gate = GateType::Or;         // gate networks, Output/Hidden nodes only
  std::vector<std::uint64_t> coords;    // output coords (Output) or input coords (Input/Read)
  bool inverted = false;                // Read
  bool value = false;                   // Constant

  bool is_leaf() const { return kind == NodeKind::Input || kind == NodeKind::Constant || kind == NodeKind::Read; }
  friend bool operator==(const Node&, const Node&) = default;
};

struct Link {
  NodeId from = 0;
  NodeId to = 0;
  std::int64_t weight = 0;
  friend bool operator==(const Link&, const Link&) = default;
};

enum class LimitKind : std::uint8_t { None, Nodes, Depth, Fanout };

const char* limit_kind_name(LimitKind k);

struct Limits {
  std::optional<std::uint64_t> max_nodes;
  std::optional<std::uint64_t> max_depth;
  std::optional<std::uint64_t> max_fanout;
  bool fatal = false;

  static Limits unlimited() { return {}; }
};

struct BuildReport {
  std::uint64_t nodes = 0;
  std::uint64_t links = 0;
  std::uint64_t skipped_cycle_links = 0;
  std::uint64_t limit_hits = 0;
  LimitKind limit = LimitKind::None;
  std::uint64_t missing_outputs = 0;  // outputs never reached because the build stopped early

  bool complete() const { return limit_hits == 0; }
  friend bool operator==(const BuildReport&, const BuildReport&) = default;
};

class BuildError : public std::runtime_error {
 public:
  BuildError(const std::string& what, BuildReport report)
      : std::runtime_error(what), report_(report) {}
  const BuildReport& report() const noexcept { return report_; }

 private:
  BuildReport report_;
};

struct Network {
  bool perceptron = true;  // false: Boolean gate network built from an ATM
  std::vector<Node> nodes;
  std::vector<Link> links;               // grouped by `from`, ascending
  std::vector<std::size_t> link_begin;   // size nodes+1; links of n are [link_begin[n], link_begin[n+1])
  std::vector<NodeId> outputs;           // row-major over output_dims; kNoNode if never built
  std::vector<std::uint64_t> output_dims;
  std::vector<std::uint64_t> input_dims;
  std::uint64_t depth = 0;
  BuildReport report;
  // Filled only when the build was asked to keep them; index = node id.
  std::vector<Configuration> configurations;

  std::size_t fanout(NodeId n) const { return link_begin[n + 1] - link_begin[n]; }
  // Leaves first; every node appears after all nodes it links to.
  const std::vector<NodeId>& evaluation_order() const { return order_; }

  // Recomputes link_begin, evaluation order and depth from nodes/links.
  // Throws StructuralError if links are not grouped by source or form a cycle.
  void finalize();

 private:
  std::vector<NodeId> order_;
};

// One successor produced by expanding a configuration.
struct Step {
  Configuration next;
  std::int64_t dw = 0;
  std::int64_t db = 0;
};

// What a configuration becomes in the network.
struct NodeShape {
  NodeKind kind = NodeKind::Hidden;  // Hidden means "expand me"
  GateType gate = GateType::Or;
  std::vector<std::uint64_t> coords;
  bool inverted = false;
  bool value = false;
};

// The configuration graph a network is built from.
class TransitionSystem {
 public:
  virtual ~TransitionSystem() = default;
  virtual bool perceptron() const = 0;
  virtual std::vector<std::uint64_t> output_dims() const = 0;
  virtual std::vector<std::uint64_t> input_dims() const = 0;
  virtual Configuration output_config(const std::vector<std::uint64_t>& coords) const = 0;
  virtual NodeShape classify(const Configuration& config) const = 0;
  // Appends successors of a non-leaf configuration, in instruction order.
  virtual void successors(const Configuration& config, std::vector<Step>& out) const = 0;
};

struct BuildOptions {
  Limits limits;
  bool keep_configurations = false;
};

Network build_network(const TransitionSystem& system, const BuildOptions& options);

// Raw machine program as a transition system.
class MachineTransitions final : public TransitionSystem {
 public:
  explicit MachineTransitions(const MachineSpec& machine);

  bool perceptron() const override;
  std::vector<std::uint64_t> output_dims() const override;
  std::vector<std::uint64_t> input_dims() const override;
  Configuration output_config(const std::vector<std::uint64_t>& coords) const override;
  NodeShape classify(const Configuration& config) const override;
  void successors(const Configuration& config, std::vector<Step>& out) const override;

 private:
  const MachineSpec& machine_;
};

Network build(const MachineSpec& machine, const Limits& limits = {}, bool keep_configurations = false);

}  // namespace ptm

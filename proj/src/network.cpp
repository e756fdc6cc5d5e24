#include "ptm/network.hpp"

#include <algorithm>
#include <unordered_map>

#include "ptm/errors.hpp"

namespace ptm {

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Output: return "output";
    case NodeKind::Hidden: return "hidden";
    case NodeKind::Input: return "input";
    case NodeKind::Constant: return "constant";
    case NodeKind::Read: return "read";
  }
  return "?";
}

const char* limit_kind_name(LimitKind k) {
  switch (k) {
    case LimitKind::None: return "none";
    case LimitKind::Nodes: return "max_nodes";
    case LimitKind::Depth: return "max_depth";
    case LimitKind::Fanout: return "max_fanout";
  }
  return "?";
}

void Network::finalize() {
  const std::size_t n = nodes.size();
  link_begin.assign(n + 1, 0);
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& l = links[i];
    if (l.from >= n || l.to >= n) throw StructuralError("link endpoint out of range");
    if (i > 0 && links[i - 1].from > l.from) throw StructuralError("links are not grouped by source node");
    ++link_begin[l.from + 1];
  }
  for (std::size_t i = 0; i < n; ++i) link_begin[i + 1] += link_begin[i];

  // Iterative post-order; colour 1 = on stack, 2 = done.
  order_.clear();
  order_.reserve(n);
  std::vector<std::uint8_t> colour(n, 0);
  std::vector<std::uint64_t> height(n, 0);
  std::vector<std::pair<NodeId, std::size_t>> stack;
  for (NodeId root = 0; root < n; ++root) {
    if (colour[root]) continue;
    stack.emplace_back(root, link_begin[root]);
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < link_begin[node + 1]) {
        const NodeId child = links[next++].to;
        if (colour[child] == 1) throw StructuralError("network contains a cycle");
        if (colour[child] == 0) {
          colour[child] = 1;
          stack.emplace_back(child, link_begin[child]);
        }
        continue;
      }
      std::uint64_t h = 0;
      for (std::size_t i = link_begin[node]; i < link_begin[node + 1]; ++i) {
        h = std::max(h, height[links[i].to] + 1);
      }
      height[node] = h;
      colour[node] = 2;
      order_.push_back(node);
      stack.pop_back();
    }
  }
  depth = 0;
  for (NodeId o : outputs) {
    if (o != kNoNode) depth = std::max(depth, height[o]);
  }
}

namespace {

class Builder {
 public:
  Builder(const TransitionSystem& system, const BuildOptions& options)
      : system_(system), options_(options) {}

  Network run() {
    net_.perceptron = system_.perceptron();
    net_.output_dims = system_.output_dims();
    net_.input_dims = system_.input_dims();
    for (const auto& coords : row_major_coords(net_.output_dims)) {
      if (stopped_) {
        net_.outputs.push_back(kNoNode);
        ++report_.missing_outputs;
        continue;
      }
      Configuration config = system_.output_config(coords);
      std::string key = config.canonical_key();
      if (auto it = index_.find(key); it != index_.end()) {
        mark_output(it->second, coords);
        net_.outputs.push_back(it->second);
        continue;
      }
      if (!admit_node()) {
        net_.outputs.push_back(kNoNode);
        ++report_.missing_outputs;
        continue;
      }
      const NodeId root = create(std::move(config), std::move(key), 0);
      mark_output(root, coords);
      net_.outputs.push_back(root);
      explore();
    }
    return finish();
  }

 private:
  struct Frame {
    NodeId node;
    std::vector<Step> steps;
    std::size_t next = 0;
    std::uint64_t depth = 0;
  };

  void mark_output(NodeId id, const std::vector<std::uint64_t>& coords) {
    Node& node = net_.nodes[id];
    if (node.is_leaf()) return;
    node.kind = NodeKind::Output;
    node.coords = coords;
  }

  // Returns false (or throws when fatal) if adding one more node breaks max_nodes.
  bool admit_node() {
    if (options_.limits.max_nodes && net_.nodes.size() + 1 > *options_.limits.max_nodes) {
      return breach(LimitKind::Nodes);
    }
    return true;
  }

  bool breach(LimitKind kind) {
    ++report_.limit_hits;
    report_.limit = kind;
    stopped_ = true;
    stack_.clear();
    if (options_.limits.fatal) {
      report_.nodes = net_.nodes.size();
      report_.links = link_count();
      throw BuildError(std::string("build limit exceeded: ") + limit_kind_name(kind), report_);
    }
    return false;
  }

  std::uint64_t link_count() const {
    std::uint64_t total = 0;
    for (const auto& l : out_links_) total += l.size();
    return total;
  }

  NodeId create(Configuration config, std::string key, std::uint64_t depth) {
    const auto id = static_cast<NodeId>(net_.nodes.size());
    NodeShape shape = system_.classify(config);
    Node node;
    node.kind = shape.kind;
    node.gate = shape.gate;
    node.coords = std::move(shape.coords);
    node.inverted = shape.inverted;
    node.value = shape.value;
    net_.nodes.push_back(std::move(node));
    out_links_.emplace_back();
    on_path_.push_back(0);
    height_.push_back(0);
    index_.emplace(std::move(key), id);
    if (!net_.nodes[id].is_leaf()) {
      Frame frame{id, {}, 0, depth};
      system_.successors(config, frame.steps);
      on_path_[id] = 1;
      stack_.push_back(std::move(frame));
    }
    if (options_.keep_configurations) net_.configurations.push_back(std::move(config));
    return id;
  }

  // Adds (or aggregates onto) the link from -> to. Returns false on a fanout breach.
  bool connect(NodeId from, NodeId to, const Step& step) {
    auto& list = out_links_[from];
    for (auto& [target, weight] : list) {
      if (target == to) {
        weight += step.dw;
        net_.nodes[from].bias += step.db;
        return true;
      }
    }
    if (options_.limits.max_fanout && list.size() + 1 > *options_.limits.max_fanout) {
      return breach(LimitKind::Fanout);
    }
    list.emplace_back(to, step.dw);
    net_.nodes[from].bias += step.db;
    return true;
  }

  void explore() {
    while (!stack_.empty()) {
      Frame& frame = stack_.back();
      if (frame.next == frame.steps.size()) {
        std::uint64_t h = 0;
        for (const auto& [to, w] : out_links_[frame.node]) h = std::max(h, height_[to] + 1);
        height_[frame.node] = h;
        on_path_[frame.node] = 0;
        stack_.pop_back();
        continue;
      }
      Step& step = frame.steps[frame.next++];
      const NodeId from = frame.node;
      const std::uint64_t depth = frame.depth;
      std::string key = step.next.canonical_key();
      if (auto it = index_.find(key); it != index_.end()) {
        const NodeId to = it->second;
        if (on_path_[to]) {
          ++report_.skipped_cycle_links;
          continue;
        }
        if (options_.limits.max_depth && depth + 1 + height_[to] > *options_.limits.max_depth) {
          breach(LimitKind::Depth);
          return;
        }
        if (!connect(from, to, step)) return;
        continue;
      }
      if (options_.limits.max_depth && depth + 1 > *options_.limits.max_depth) {
        breach(LimitKind::Depth);
        return;
      }
      if (!admit_node()) return;
      if (options_.limits.max_fanout && out_links_[from].size() + 1 > *options_.limits.max_fanout) {
        breach(LimitKind::Fanout);
        return;
      }
      // `frame` may dangle after create() pushes a new frame.
      Step moved = std::move(step);
      const NodeId to = create(std::move(moved.next), std::move(key), depth + 1);
      connect(from, to, moved);
    }
  }

  Network finish() {
    for (NodeId n = 0; n < out_links_.size(); ++n) {
      for (const auto& [to, w] : out_links_[n]) net_.links.push_back(Link{n, to, w});
    }
    net_.finalize();
    report_.nodes = net_.nodes.size();
    report_.links = net_.links.size();
    net_.report = report_;
    return std::move(net_);
  }

  const TransitionSystem& system_;
  const BuildOptions& options_;
  Network net_;
  BuildReport report_;
  bool stopped_ = false;
  std::vector<Frame> stack_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::vector<std::pair<NodeId, std::int64_t>>> out_links_;
  std::vector<std::uint8_t> on_path_;
  std::vector<std::uint64_t> height_;
};

}  // namespace

Network build_network(const TransitionSystem& system, const BuildOptions& options) {
  return Builder(system, options).run();
}

MachineTransitions::MachineTransitions(const MachineSpec& machine) : machine_(machine) {
  machine_.validate();
}

bool MachineTransitions::perceptron() const { return machine_.header.flavor == Flavor::PTM; }

std::vector<std::uint64_t> MachineTransitions::output_dims() const {
  return machine_.header.dims_of(TapeRole::OutputIndex);
}

std::vector<std::uint64_t> MachineTransitions::input_dims() const {
  return machine_.header.dims_of(TapeRole::InputIndex);
}

Configuration MachineTransitions::output_config(const std::vector<std::uint64_t>& coords) const {
  return make_output_config(machine_.header, coords);
}

NodeShape MachineTransitions::classify(const Configuration& config) const {
  const auto& header = machine_.header;
  NodeShape shape;
  if (!is_leaf(header, config.state)) {
    if (header.flavor == Flavor::ATM) shape.gate = header.gates[config.state];
    return shape;
  }
  if (header.flavor == Flavor::ATM) {
    const GateType g = header.gates[config.state];
    if (g == GateType::True || g == GateType::False) {
      shape.kind = NodeKind::Constant;
      shape.value = g == GateType::True;
      return shape;
    }
    shape.kind = NodeKind::Read;
    shape.inverted = g == GateType::ReadInverted;
  } else {
    shape.kind = NodeKind::Input;
  }
  shape.coords = decode_index(header, config, TapeRole::InputIndex);
  const auto dims = header.dims_of(TapeRole::InputIndex);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (shape.coords[i] >= dims[i]) {
      // Index beyond the input array reads as constant false.
      return NodeShape{NodeKind::Constant, GateType::Or, {}, false, false};
    }
  }
  return shape;
}

void MachineTransitions::successors(const Configuration& config, std::vector<Step>& out) const {
  const bool ptm = machine_.header.flavor == Flavor::PTM;
  for (const auto& [index, instr] : matching_instructions(machine_, config)) {
    out.push_back(Step{apply_instruction(config, *instr), ptm ? instr->dw : 1, ptm ? instr->db : 0});
  }
}

Network build(const MachineSpec& machine, const Limits& limits, bool keep_configurations) {
  MachineTransitions system(machine);
  return build_network(system, BuildOptions{limits, keep_configurations});
}

}  // namespace ptm

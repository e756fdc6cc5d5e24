#include "ptm/network_export.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ptm/errors.hpp"
#include "ptm/exec.hpp"

namespace ptm {
namespace {

using nlohmann::json;

NodeKind kind_from_name(const std::string& name) {
  for (NodeKind k : {NodeKind::Output, NodeKind::Hidden, NodeKind::Input, NodeKind::Constant, NodeKind::Read}) {
    if (name == node_kind_name(k)) return k;
  }
  throw FormatError(0, "unknown node kind '" + name + "'");
}

LimitKind limit_from_name(const std::string& name) {
  for (LimitKind k : {LimitKind::None, LimitKind::Nodes, LimitKind::Depth, LimitKind::Fanout}) {
    if (name == limit_kind_name(k)) return k;
  }
  throw FormatError(0, "unknown limit kind '" + name + "'");
}

json report_json(const BuildReport& r) {
  return json{{"nodes", r.nodes},
              {"links", r.links},
              {"skipped_cycle_links", r.skipped_cycle_links},
              {"limit_hits", r.limit_hits},
              {"limit", limit_kind_name(r.limit)},
              {"missing_outputs", r.missing_outputs}};
}

std::string structured(const Network& net) {
  json nodes = json::array();
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const Node& n = net.nodes[i];
    json j{{"id", i}, {"kind", node_kind_name(n.kind)}};
    const bool interior = n.kind == NodeKind::Output || n.kind == NodeKind::Hidden;
    if (interior) {
      if (net.perceptron) {
        j["bias"] = n.bias;
      } else {
        j["gate"] = gate_name(n.gate);
      }
    }
    if (n.kind != NodeKind::Constant && n.kind != NodeKind::Hidden) j["coords"] = n.coords;
    if (n.kind == NodeKind::Read) j["inverted"] = n.inverted;
    if (n.kind == NodeKind::Constant) j["value"] = n.value;
    nodes.push_back(std::move(j));
  }
  json links = json::array();
  for (const auto& l : net.links) links.push_back(json{{"from", l.from}, {"to", l.to}, {"weight", l.weight}});
  json outputs = json::array();
  for (NodeId o : net.outputs) {
    if (o == kNoNode) {
      outputs.push_back(nullptr);
    } else {
      outputs.push_back(o);
    }
  }
  json doc{{"format", "ptm-network v1"},
           {"flavor", net.perceptron ? "ptm" : "atm"},
           {"nodes", std::move(nodes)},
           {"links", std::move(links)},
           {"outputs", std::move(outputs)},
           {"output_dims", net.output_dims},
           {"input_dims", net.input_dims},
           {"depth", net.depth},
           {"report", report_json(net.report)}};
  return doc.dump(1) + "\n";
}

std::string coords_label(const std::vector<std::uint64_t>& coords) {
  std::string s = "(";
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(coords[i]);
  }
  return s + ")";
}

std::string dot(const Network& net) {
  std::ostringstream out;
  out << "digraph network {\n  rankdir=BT;\n";
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const Node& n = net.nodes[i];
    std::string label;
    std::string shape = "ellipse";
    switch (n.kind) {
      case NodeKind::Output:
      case NodeKind::Hidden:
        label = n.kind == NodeKind::Output ? "out" + coords_label(n.coords) : "h" + std::to_string(i);
        label += net.perceptron ? "\\nb=" + std::to_string(n.bias) : std::string("\\n") + gate_name(n.gate);
        if (n.kind == NodeKind::Output) shape = "doublecircle";
        break;
      case NodeKind::Input:
        label = "in" + coords_label(n.coords);
        shape = "box";
        break;
      case NodeKind::Read:
        label = std::string(n.inverted ? "!in" : "in") + coords_label(n.coords);
        shape = "box";
        break;
      case NodeKind::Constant:
        label = n.value ? "true" : "false";
        shape = "plaintext";
        break;
    }
    out << "  n" << i << " [label=\"" << label << "\", shape=" << shape << "];\n";
  }
  // Edges drawn in signal direction: input side -> consumer.
  for (const auto& l : net.links) {
    out << "  n" << l.to << " -> n" << l.from;
    if (net.perceptron) out << " [label=\"" << l.weight << "\"]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace

std::string export_network(const Network& net, ExportFormat format) {
  return format == ExportFormat::Dot ? dot(net) : structured(net);
}

Network import_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(0, std::string("network file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "ptm-network v1") {
      throw FormatError(0, "unsupported network format");
    }
    Network net;
    net.perceptron = doc.at("flavor").get<std::string>() == "ptm";
    for (const auto& j : doc.at("nodes")) {
      Node n;
      if (j.at("id").get<std::size_t>() != net.nodes.size()) throw FormatError(0, "node ids must be dense and ascending");
      n.kind = kind_from_name(j.at("kind").get<std::string>());
      if (j.contains("bias")) n.bias = j["bias"].get<std::int64_t>();
      if (j.contains("gate")) {
        auto g = gate_from_name(j["gate"].get<std::string>());
        if (!g) throw FormatError(0, "unknown gate type");
        n.gate = *g;
      }
      if (j.contains("coords")) n.coords = j["coords"].get<std::vector<std::uint64_t>>();
      if (j.contains("inverted")) n.inverted = j["inverted"].get<bool>();
      if (j.contains("value")) n.value = j["value"].get<bool>();
      net.nodes.push_back(std::move(n));
    }
    for (const auto& j : doc.at("links")) {
      net.links.push_back(Link{j.at("from").get<NodeId>(), j.at("to").get<NodeId>(), j.at("weight").get<std::int64_t>()});
    }
    for (const auto& j : doc.at("outputs")) {
      const NodeId id = j.is_null() ? kNoNode : j.get<NodeId>();
      if (id != kNoNode && id >= net.nodes.size()) throw FormatError(0, "output refers to missing node");
      net.outputs.push_back(id);
    }
    net.output_dims = doc.at("output_dims").get<std::vector<std::uint64_t>>();
    net.input_dims = doc.at("input_dims").get<std::vector<std::uint64_t>>();
    if (net.outputs.size() != BitArray::size_of(net.output_dims)) throw FormatError(0, "output count does not match output_dims");
    const auto& r = doc.at("report");
    net.report.nodes = r.at("nodes").get<std::uint64_t>();
    net.report.links = r.at("links").get<std::uint64_t>();
    net.report.skipped_cycle_links = r.at("skipped_cycle_links").get<std::uint64_t>();
    net.report.limit_hits = r.at("limit_hits").get<std::uint64_t>();
    net.report.limit = limit_from_name(r.at("limit").get<std::string>());
    net.report.missing_outputs = r.at("missing_outputs").get<std::uint64_t>();
    try {
      net.finalize();
    } catch (const StructuralError& e) {
      throw FormatError(0, e.what());
    }
    return net;
  } catch (const json::exception& e) {
    throw FormatError(0, std::string("malformed network file: ") + e.what());
  }
}

Network load_network_file(const std::string& path) {
  try {
    return import_network(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(e.line(), e.message(), path);
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void save_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  out << contents;
}

}  // namespace ptm

#pragma once

// Structured (JSON) and DOT renderings of a built network.
//
// Structured layout, keys sorted:
//   {"depth": d, "flavor": "ptm"|"atm", "format": "ptm-network v1",
//    "input_dims": [...], "output_dims": [...],
//    "links": [{"from": i, "to": j, "weight": w}, ...],
//    "nodes": [{"id": i, "kind": "...", "bias": b | "gate": g, "coords": [...],
//               "inverted": bool (read), "value": bool (constant)}, ...],
//    "outputs": [id | null, ...],
//    "report": {...}}
// Nodes and links appear in ascending id order.

#include <string>
#include <string_view>

#include "ptm/network.hpp"

namespace ptm {

enum class ExportFormat { Structured, Dot };

std::string export_network(const Network& net, ExportFormat format);
Network import_network(std::string_view structured);

Network load_network_file(const std::string& path);
void save_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

}  // namespace ptm

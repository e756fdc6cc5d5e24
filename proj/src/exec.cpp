#include "ptm/exec.hpp"

#include "ptm/errors.hpp"

namespace ptm {

std::uint64_t BitArray::size_of(const std::vector<std::uint64_t>& dims) {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

BitArray BitArray::zeros(std::vector<std::uint64_t> dims) {
  BitArray a;
  a.bits.assign(size_of(dims), 0);
  a.dims = std::move(dims);
  return a;
}

std::size_t BitArray::flat_index(const std::vector<std::uint64_t>& coords) const {
  if (coords.size() != dims.size()) throw ArgumentError("coordinate arity does not match array dims");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (coords[i] >= dims[i]) throw ArgumentError("coordinate out of range");
    flat = flat * dims[i] + coords[i];
  }
  return flat;
}

std::string format_dims(const std::vector<std::uint64_t>& dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

BitArray BitArray::from_string(std::vector<std::uint64_t> dims, std::string_view text) {
  BitArray a = zeros(std::move(dims));
  if (text.size() != a.size()) {
    throw ArgumentError("expected " + std::to_string(a.size()) + " bits for dims " + format_dims(a.dims) +
                        ", got " + std::to_string(text.size()));
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '0' && c != '1') throw ArgumentError(std::string("bit string may only contain 0 and 1, got '") + c + "'");
    a.bits[a.size() - 1 - i] = c == '1';
  }
  return a;
}

std::string BitArray::to_string() const {
  std::string out(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[bits.size() - 1 - i] = '1';
  }
  return out;
}

namespace {

void evaluate_into(const Network& net, const BitArray& input, std::vector<std::uint8_t>& value, BitArray& out) {
  for (NodeId id : net.evaluation_order()) {
    const Node& node = net.nodes[id];
    bool v = false;
    switch (node.kind) {
      case NodeKind::Input: v = input.at(node.coords); break;
      case NodeKind::Read: v = input.at(node.coords) != node.inverted; break;
      case NodeKind::Constant: v = node.value; break;
      case NodeKind::Output:
      case NodeKind::Hidden: {
        const std::size_t begin = net.link_begin[id];
        const std::size_t end = net.link_begin[id + 1];
        if (net.perceptron) {
          std::int64_t sum = node.bias;
          for (std::size_t i = begin; i < end; ++i) {
            if (value[net.links[i].to]) sum += net.links[i].weight;
          }
          v = sum > 0;
        } else if (begin == end) {
          v = false;
        } else if (node.gate == GateType::And) {
          v = true;
          for (std::size_t i = begin; i < end && v; ++i) v = value[net.links[i].to] != 0;
        } else {
          for (std::size_t i = begin; i < end && !v; ++i) v = value[net.links[i].to] != 0;
        }
        break;
      }
    }
    value[id] = v;
  }
  for (std::size_t i = 0; i < net.outputs.size(); ++i) {
    const NodeId o = net.outputs[i];
    out.bits[i] = o == kNoNode ? 0 : value[o];
  }
}

}  // namespace

BitArray evaluate(const Network& net, const BitArray& input) {
  if (input.dims != net.input_dims) {
    throw ArgumentError("input dims " + format_dims(input.dims) + " do not match network input dims " +
                        format_dims(net.input_dims));
  }
  std::vector<std::uint8_t> value(net.nodes.size(), 0);
  BitArray out = BitArray::zeros(net.output_dims);
  evaluate_into(net, input, value, out);
  return out;
}

std::vector<std::pair<BitArray, BitArray>> truth_table(const Network& net, std::size_t max_input_bits) {
  const std::uint64_t n = BitArray::size_of(net.input_dims);
  if (n > max_input_bits) {
    throw ArgumentError("truth table needs 2^" + std::to_string(n) + " rows; cap is 2^" +
                        std::to_string(max_input_bits));
  }
  std::vector<std::pair<BitArray, BitArray>> rows;
  rows.reserve(std::size_t{1} << n);
  std::vector<std::uint8_t> value(net.nodes.size(), 0);
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
    BitArray in = BitArray::zeros(net.input_dims);
    for (std::uint64_t j = 0; j < n; ++j) in.bits[j] = (m >> j) & 1;
    BitArray out = BitArray::zeros(net.output_dims);
    evaluate_into(net, in, value, out);
    rows.emplace_back(std::move(in), std::move(out));
  }
  return rows;
}

}  // namespace ptm

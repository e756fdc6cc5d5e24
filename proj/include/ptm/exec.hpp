#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ptm/network.hpp"

namespace ptm {

// Row-major bit array. Empty dims hold a single bit.
struct BitArray {
  std::vector<std::uint64_t> dims;
  std::vector<std::uint8_t> bits;

  static BitArray zeros(std::vector<std::uint64_t> dims);
  static std::uint64_t size_of(const std::vector<std::uint64_t>& dims);

  std::size_t size() const { return bits.size(); }
  std::size_t flat_index(const std::vector<std::uint64_t>& coords) const;
  bool at(const std::vector<std::uint64_t>& coords) const { return bits[flat_index(coords)] != 0; }

  // Text form follows std::bitset: the first character is the highest flat
  // index, the last character is flat index 0.
  static BitArray from_string(std::vector<std::uint64_t> dims, std::string_view text);
  std::string to_string() const;

  friend bool operator==(const BitArray&, const BitArray&) = default;
};

std::string format_dims(const std::vector<std::uint64_t>& dims);

BitArray evaluate(const Network& net, const BitArray& input);

inline constexpr std::size_t kDefaultTruthTableCap = 20;

// Every input in increasing flat-value order (flat bit j of row m is bit j of m).
std::vector<std::pair<BitArray, BitArray>> truth_table(const Network& net,
                                                       std::size_t max_input_bits = kDefaultTruthTableCap);

}  // namespace ptm

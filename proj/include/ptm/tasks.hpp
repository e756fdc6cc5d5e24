#pragma once

// Truth-table benchmark tasks with exact oracles.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ptm/exec.hpp"
#include "ptm/machine.hpp"

namespace ptm {

struct Task {
  enum class Mode { Exhaustive, Sampled };

  std::string name;
  std::uint64_t size = 0;  // n bits, or vertices for transitive-closure
  std::vector<std::uint64_t> input_dims;
  std::vector<std::uint64_t> output_dims;
  std::function<BitArray(const BitArray&)> oracle;
  Mode mode = Mode::Exhaustive;
  std::size_t samples = 0;
  std::uint64_t sample_seed = 0;

  // Exhaustive: every input in increasing flat value. Sampled: `samples`
  // uniformly random inputs drawn from `sample_seed`.
  std::vector<BitArray> inputs() const;
};

inline constexpr std::size_t kDefaultTaskSamples = 256;
inline constexpr std::uint64_t kDefaultSampleSeed = 0x5eed;

// exists, all, parity (n <= 4) and transitive-closure (n <= 4 vertices,
// sampled above 3). Throws ArgumentError for unknown names or sizes.
Task make_task(const std::string& name, std::uint64_t n, std::size_t samples = kDefaultTaskSamples,
               std::uint64_t sample_seed = kDefaultSampleSeed);
std::vector<std::string> task_names();

// PTM header whose index tapes fit the task, plus `work_tapes` work tapes of `work_cells` cells.
MachineHeader task_header(const Task& task, std::uint32_t num_states, std::uint32_t work_tapes = 0,
                          std::uint32_t work_cells = 1);

}  // namespace ptm

#include "ptm/tasks.hpp"

#include <random>

#include "ptm/errors.hpp"

namespace ptm {

std::vector<BitArray> Task::inputs() const {
  std::vector<BitArray> out;
  const std::uint64_t bits = BitArray::size_of(input_dims);
  if (mode == Mode::Exhaustive) {
    if (bits > 24) throw ArgumentError("task '" + name + "' has too many input bits for exhaustive evaluation");
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << bits); ++m) {
      BitArray a = BitArray::zeros(input_dims);
      for (std::uint64_t j = 0; j < bits; ++j) a.bits[j] = (m >> j) & 1;
      out.push_back(std::move(a));
    }
    return out;
  }
  std::mt19937_64 rng(sample_seed);
  for (std::size_t s = 0; s < samples; ++s) {
    BitArray a = BitArray::zeros(input_dims);
    for (auto& b : a.bits) b = rng() & 1;
    out.push_back(std::move(a));
  }
  return out;
}

namespace {

BitArray single(bool v) {
  BitArray out = BitArray::zeros({});
  out.bits[0] = v;
  return out;
}

BitArray closure(const BitArray& in) {
  const std::uint64_t n = in.dims[0];
  BitArray r = in;
  for (std::uint64_t k = 0; k < n; ++k) {
    for (std::uint64_t i = 0; i < n; ++i) {
      if (!r.bits[i * n + k]) continue;
      for (std::uint64_t j = 0; j < n; ++j) {
        if (r.bits[k * n + j]) r.bits[i * n + j] = 1;
      }
    }
  }
  return r;
}

}  // namespace

std::vector<std::string> task_names() { return {"exists", "all", "parity", "transitive-closure"}; }

Task make_task(const std::string& name, std::uint64_t n, std::size_t samples, std::uint64_t sample_seed) {
  Task t;
  t.name = name;
  t.size = n;
  if (n == 0) throw ArgumentError("task size must be at least 1");
  if (name == "exists" || name == "all" || name == "parity") {
    if (n > 20) throw ArgumentError("task '" + name + "' supports at most 20 input bits");
    t.input_dims = {n};
    if (name == "exists") {
      t.oracle = [](const BitArray& in) {
        for (auto b : in.bits) {
          if (b) return single(true);
        }
        return single(false);
      };
    } else if (name == "all") {
      t.oracle = [](const BitArray& in) {
        for (auto b : in.bits) {
          if (!b) return single(false);
        }
        return single(true);
      };
    } else {
      if (n > 4) throw ArgumentError("parity supports at most 4 input bits");
      t.oracle = [](const BitArray& in) {
        bool v = false;
        for (auto b : in.bits) v ^= b != 0;
        return single(v);
      };
    }
    return t;
  }
  if (name == "transitive-closure") {
    if (n > 4) throw ArgumentError("transitive-closure supports at most 4 vertices");
    t.input_dims = {n, n};
    t.output_dims = {n, n};
    t.oracle = closure;
    if (n > 3) {
      t.mode = Task::Mode::Sampled;
      t.samples = samples;
      t.sample_seed = sample_seed;
    }
    return t;
  }
  std::string known;
  for (const auto& k : task_names()) known += (known.empty() ? "" : ", ") + k;
  throw ArgumentError("unknown task '" + name + "' (known: " + known + ")");
}

MachineHeader task_header(const Task& task, std::uint32_t num_states, std::uint32_t work_tapes,
                          std::uint32_t work_cells) {
  MachineHeader h;
  h.flavor = Flavor::PTM;
  h.num_states = num_states;
  for (auto d : task.output_dims) h.tapes.push_back(TapeSpec::index(TapeRole::OutputIndex, d));
  for (auto d : task.input_dims) h.tapes.push_back(TapeSpec::index(TapeRole::InputIndex, d));
  for (std::uint32_t i = 0; i < work_tapes; ++i) h.tapes.push_back(TapeSpec::work(work_cells));
  h.validate();
  return h;
}

}  // namespace ptm

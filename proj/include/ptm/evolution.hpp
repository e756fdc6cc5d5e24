#pragma once

// Genetic algorithm over PTM instruction lists.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ptm/machine.hpp"
#include "ptm/network.hpp"
#include "ptm/tasks.hpp"

namespace ptm {

// Header plus genes; the program order is the gene order.
using Genotype = MachineSpec;

struct EvolutionConfig {
  std::size_t population = 100;
  std::size_t generations = 50;  // breeding rounds after the initial population
  std::size_t tournament = 3;
  std::size_t elitism = 1;
  double p_point = 0.8;
  double p_insert = 0.1;
  double p_delete = 0.1;
  double p_crossover = 0.7;
  double p_inversion = 0.1;
  std::size_t min_length = 0;
  std::size_t max_length = 512;
  std::size_t initial_length = 12;
  // Header of random individuals when no seed genotype is given.
  std::uint32_t num_states = 4;
  std::uint32_t work_tapes = 0;
  std::uint32_t work_cells = 1;
  Limits limits{20000, 1000, std::nullopt, false};
  std::uint64_t seed = 1;
  unsigned workers = 1;

  // Throws ArgumentError naming the offending field.
  void validate() const;
};

struct Individual {
  Genotype genotype;
  double fitness = 0;
  std::uint64_t hash = 0;
};

struct GenerationStats {
  std::size_t generation = 0;
  double best = 0;
  double mean = 0;
  std::uint64_t best_hash = 0;
  std::size_t best_length = 0;

  friend bool operator==(const GenerationStats&, const GenerationStats&) = default;
};

struct EvolutionResult {
  Individual best;
  std::vector<GenerationStats> history;
};

// FNV-1a over the machine-format text.
std::uint64_t genotype_hash(const Genotype& g);

Instruction random_gene(const MachineHeader& header, std::mt19937_64& rng);
Genotype random_genotype(const MachineHeader& header, std::size_t length, std::mt19937_64& rng);

// Resamples one component of one gene to a different value. No-op on an empty genotype.
Genotype mutate_point(const Genotype& g, std::mt19937_64& rng);
// Random gene at a random position / removal of a random gene, within the length bounds.
Genotype mutate_insert(const Genotype& g, std::size_t max_length, std::mt19937_64& rng);
Genotype mutate_delete(const Genotype& g, std::size_t min_length, std::mt19937_64& rng);

// Children prefix(a, cut_a) + suffix(b, cut_b) and prefix(b, cut_b) + suffix(a, cut_a),
// truncated to max_length and padded with random genes up to min_length.
std::pair<Genotype, Genotype> crossover_at(const Genotype& a, const Genotype& b, std::size_t cut_a,
                                           std::size_t cut_b, std::size_t min_length, std::size_t max_length,
                                           std::mt19937_64& rng);
std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, std::size_t min_length,
                                        std::size_t max_length, std::mt19937_64& rng);

// Reverses genes [begin, end).
Genotype invert_segment(const Genotype& g, std::size_t begin, std::size_t end);
Genotype invert(const Genotype& g, std::mt19937_64& rng);

// Fraction of output bits over the task's inputs that match the oracle; 0
// when the build fails. Throws ArgumentError if the index dims do not fit the task.
double evaluate_fitness(const Genotype& g, const Task& task, const Limits& limits);

using ProgressFn = std::function<void(const GenerationStats&)>;

// Seed genotypes occupy the first slots of the initial population; the rest
// are random over the first seed's header (or the task header without seeds).
EvolutionResult evolve(const EvolutionConfig& config, const Task& task, const std::vector<Genotype>& seeds = {},
                       const ProgressFn& progress = {});

std::string history_json(const EvolutionResult& result);
std::string manifest_json(const EvolutionConfig& config, const Task& task, const EvolutionResult& result,
                          const std::vector<std::string>& seed_files = {});

}  // namespace ptm

#include "ptm/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "ptm/errors.hpp"
#include "ptm/exec.hpp"
#include "ptm/machine_format.hpp"

namespace ptm {

void EvolutionConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError(std::string(name) + " must be within [0, 1]");
  };
  prob(p_point, "p_point");
  prob(p_insert, "p_insert");
  prob(p_delete, "p_delete");
  prob(p_crossover, "p_crossover");
  prob(p_inversion, "p_inversion");
  if (population == 0) throw ArgumentError("population must be at least 1");
  if (elitism >= population) throw ArgumentError("elitism must be smaller than the population");
  if (tournament == 0) throw ArgumentError("tournament size must be at least 1");
  if (min_length > max_length) throw ArgumentError("min_length exceeds max_length");
  if (initial_length > max_length) throw ArgumentError("initial_length exceeds max_length");
  if (num_states < 2) throw ArgumentError("num_states must be at least 2");
  if (work_cells == 0 && work_tapes > 0) throw ArgumentError("work_cells must be at least 1");
  if (workers == 0) throw ArgumentError("workers must be at least 1");
}

std::uint64_t genotype_hash(const Genotype& g) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_machine(g)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

template <typename T>
T pick(std::mt19937_64& rng, T lo, T hi) {  // inclusive
  return std::uniform_int_distribution<T>(lo, hi)(rng);
}

Symbol random_symbol(std::mt19937_64& rng) { return static_cast<Symbol>(pick<int>(rng, 0, 2)); }
Move random_move(std::mt19937_64& rng) { return static_cast<Move>(pick<int>(rng, 0, 2)); }

template <typename E>
E other_value(E old, std::mt19937_64& rng) {
  const int shift = pick<int>(rng, 1, 2);
  return static_cast<E>((static_cast<int>(old) + shift) % 3);
}

StateId other_state(StateId old, std::uint32_t num_states, std::mt19937_64& rng) {
  const auto shift = pick<std::uint32_t>(rng, 1, num_states - 1);
  return (old + shift) % num_states;
}

bool chance(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

void clamp(Genotype& g, std::size_t min_length, std::size_t max_length, std::mt19937_64& rng) {
  if (g.program.size() > max_length) g.program.resize(max_length);
  while (g.program.size() < min_length) g.program.push_back(random_gene(g.header, rng));
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t generation, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(generation), static_cast<std::uint32_t>(index)};
  return std::mt19937_64(seq);
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

struct Cases {
  std::vector<BitArray> inputs;
  std::vector<BitArray> expected;
};

Cases make_cases(const Task& task) {
  Cases c;
  c.inputs = task.inputs();
  for (const auto& in : c.inputs) c.expected.push_back(task.oracle(in));
  return c;
}

void check_dims(const Genotype& g, const Task& task) {
  if (g.header.dims_of(TapeRole::InputIndex) != task.input_dims ||
      g.header.dims_of(TapeRole::OutputIndex) != task.output_dims) {
    throw ArgumentError("genotype index dims (input " + format_dims(g.header.dims_of(TapeRole::InputIndex)) +
                        ", output " + format_dims(g.header.dims_of(TapeRole::OutputIndex)) +
                        ") do not fit task '" + task.name + "' (input " + format_dims(task.input_dims) +
                        ", output " + format_dims(task.output_dims) + ")");
  }
}

double fitness_on(const Genotype& g, const Cases& cases, const Limits& limits) {
  Network net;
  try {
    net = build(g, limits);
  } catch (const BuildError&) {
    return 0.0;
  }
  std::size_t good = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < cases.inputs.size(); ++i) {
    const BitArray out = evaluate(net, cases.inputs[i]);
    for (std::size_t b = 0; b < out.bits.size(); ++b) good += out.bits[b] == cases.expected[i].bits[b];
    total += out.bits.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(total);
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Instruction random_gene(const MachineHeader& header, std::mt19937_64& rng) {
  Instruction g;
  const std::size_t k = header.tape_count();
  g.from = pick<StateId>(rng, 0, header.num_states - 1);
  g.to = pick<StateId>(rng, 0, header.num_states - 1);
  for (std::size_t t = 0; t < k; ++t) g.read.push_back(random_symbol(rng));
  for (std::size_t t = 0; t < k; ++t) g.write.push_back(random_symbol(rng));
  for (std::size_t t = 0; t < k; ++t) g.moves.push_back(random_move(rng));
  g.dw = pick<int>(rng, 0, 1) ? 1 : -1;
  g.db = pick<int>(rng, 0, 1) ? 1 : -1;
  return g;
}

Genotype random_genotype(const MachineHeader& header, std::size_t length, std::mt19937_64& rng) {
  Genotype g;
  g.header = header;
  for (std::size_t i = 0; i < length; ++i) g.program.push_back(random_gene(header, rng));
  return g;
}

Genotype mutate_point(const Genotype& g, std::mt19937_64& rng) {
  Genotype out = g;
  if (out.program.empty()) return out;
  Instruction& gene = out.program[pick<std::size_t>(rng, 0, out.program.size() - 1)];
  const std::size_t k = g.header.tape_count();
  const std::size_t components = 2 + 3 * k + (g.header.flavor == Flavor::PTM ? 2 : 0);
  std::size_t c = pick<std::size_t>(rng, 0, components - 1);
  if (c == 0) {
    gene.from = other_state(gene.from, g.header.num_states, rng);
  } else if (c == 1) {
    gene.to = other_state(gene.to, g.header.num_states, rng);
  } else if ((c -= 2) < k) {
    gene.read[c] = other_value(gene.read[c], rng);
  } else if ((c -= k) < k) {
    gene.write[c] = other_value(gene.write[c], rng);
  } else if ((c -= k) < k) {
    gene.moves[c] = other_value(gene.moves[c], rng);
  } else if (c - k == 0) {
    gene.dw = -gene.dw;
  } else {
    gene.db = -gene.db;
  }
  return out;
}

Genotype mutate_insert(const Genotype& g, std::size_t max_length, std::mt19937_64& rng) {
  Genotype out = g;
  if (out.program.size() >= max_length) return out;
  const auto at = pick<std::size_t>(rng, 0, out.program.size());
  out.program.insert(out.program.begin() + static_cast<std::ptrdiff_t>(at), random_gene(g.header, rng));
  return out;
}

Genotype mutate_delete(const Genotype& g, std::size_t min_length, std::mt19937_64& rng) {
  Genotype out = g;
  if (out.program.empty() || out.program.size() <= min_length) return out;
  const auto at = pick<std::size_t>(rng, 0, out.program.size() - 1);
  out.program.erase(out.program.begin() + static_cast<std::ptrdiff_t>(at));
  return out;
}

std::pair<Genotype, Genotype> crossover_at(const Genotype& a, const Genotype& b, std::size_t cut_a,
                                           std::size_t cut_b, std::size_t min_length, std::size_t max_length,
                                           std::mt19937_64& rng) {
  if (!(a.header == b.header)) throw ArgumentError("crossover parents have different headers");
  if (cut_a > a.program.size() || cut_b > b.program.size()) throw ArgumentError("crossover cut out of range");
  Genotype x{a.header, {}};
  Genotype y{b.header, {}};
  x.program.assign(a.program.begin(), a.program.begin() + static_cast<std::ptrdiff_t>(cut_a));
  x.program.insert(x.program.end(), b.program.begin() + static_cast<std::ptrdiff_t>(cut_b), b.program.end());
  y.program.assign(b.program.begin(), b.program.begin() + static_cast<std::ptrdiff_t>(cut_b));
  y.program.insert(y.program.end(), a.program.begin() + static_cast<std::ptrdiff_t>(cut_a), a.program.end());
  clamp(x, min_length, max_length, rng);
  clamp(y, min_length, max_length, rng);
  return {std::move(x), std::move(y)};
}

std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, std::size_t min_length,
                                        std::size_t max_length, std::mt19937_64& rng) {
  if (!(a.header == b.header)) throw ArgumentError("crossover parents have different headers");
  const auto cut_a = pick<std::size_t>(rng, 0, a.program.size());
  const auto cut_b = pick<std::size_t>(rng, 0, b.program.size());
  return crossover_at(a, b, cut_a, cut_b, min_length, max_length, rng);
}

Genotype invert_segment(const Genotype& g, std::size_t begin, std::size_t end) {
  if (begin > end || end > g.program.size()) throw ArgumentError("inversion segment out of range");
  Genotype out = g;
  std::reverse(out.program.begin() + static_cast<std::ptrdiff_t>(begin),
               out.program.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

Genotype invert(const Genotype& g, std::mt19937_64& rng) {
  if (g.program.size() < 2) return g;
  std::size_t i = pick<std::size_t>(rng, 0, g.program.size());
  std::size_t j = pick<std::size_t>(rng, 0, g.program.size());
  if (i > j) std::swap(i, j);
  return invert_segment(g, i, j);
}

double evaluate_fitness(const Genotype& g, const Task& task, const Limits& limits) {
  check_dims(g, task);
  return fitness_on(g, make_cases(task), limits);
}

EvolutionResult evolve(const EvolutionConfig& config, const Task& task, const std::vector<Genotype>& seeds,
                       const ProgressFn& progress) {
  config.validate();
  const MachineHeader header =
      seeds.empty() ? task_header(task, config.num_states, config.work_tapes, config.work_cells) : seeds[0].header;
  for (const auto& s : seeds) {
    if (!(s.header == header)) throw ArgumentError("seed genotypes must share one header");
    s.validate();
    if (s.program.size() > config.max_length) {
      throw ArgumentError("seed genotype has " + std::to_string(s.program.size()) + " genes, above max_length " +
                          std::to_string(config.max_length));
    }
  }
  Genotype probe{header, {}};
  check_dims(probe, task);
  const Cases cases = make_cases(task);

  auto score = [&](Individual& ind) {
    ind.hash = genotype_hash(ind.genotype);
    ind.fitness = fitness_on(ind.genotype, cases, config.limits);
  };

  std::vector<Individual> pop(config.population);
  parallel_for(pop.size(), config.workers, [&](std::size_t i) {
    if (i < seeds.size()) {
      pop[i].genotype = seeds[i];
    } else {
      auto rng = derived_rng(config.seed, 0, i);
      const std::size_t lo = std::min(std::max<std::size_t>(config.min_length, 1), config.initial_length);
      pop[i].genotype = random_genotype(header, pick<std::size_t>(rng, lo, config.initial_length), rng);
    }
    score(pop[i]);
  });

  EvolutionResult result;
  auto ranked = [&] {
    std::vector<std::size_t> order(pop.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return pop[x].fitness > pop[y].fitness; });
    return order;
  };
  auto record = [&](std::size_t generation, const std::vector<std::size_t>& order) {
    GenerationStats st;
    st.generation = generation;
    const Individual& top = pop[order[0]];
    st.best = top.fitness;
    st.best_hash = top.hash;
    st.best_length = top.genotype.program.size();
    double sum = 0;
    for (const auto& ind : pop) sum += ind.fitness;
    st.mean = sum / static_cast<double>(pop.size());
    result.history.push_back(st);
    if (generation == 0 || top.fitness > result.best.fitness) result.best = top;
    if (progress) progress(st);
  };

  auto order = ranked();
  record(0, order);
  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<Individual> next(pop.size());
    for (std::size_t e = 0; e < config.elitism; ++e) next[e] = pop[order[e]];
    parallel_for(pop.size() - config.elitism, config.workers, [&](std::size_t k) {
      const std::size_t i = k + config.elitism;
      auto rng = derived_rng(config.seed, gen, i);
      auto tournament = [&]() -> const Individual& {
        std::size_t best = pick<std::size_t>(rng, 0, pop.size() - 1);
        for (std::size_t t = 1; t < config.tournament; ++t) {
          const std::size_t c = pick<std::size_t>(rng, 0, pop.size() - 1);
          if (pop[c].fitness > pop[best].fitness || (pop[c].fitness == pop[best].fitness && c < best)) best = c;
        }
        return pop[best];
      };
      const Individual& a = tournament();
      const Individual& b = tournament();
      Genotype child = a.genotype;
      if (chance(rng, config.p_crossover)) {
        auto kids = crossover(a.genotype, b.genotype, config.min_length, config.max_length, rng);
        child = pick<int>(rng, 0, 1) ? std::move(kids.second) : std::move(kids.first);
      }
      if (chance(rng, config.p_point)) child = mutate_point(child, rng);
      if (chance(rng, config.p_insert)) child = mutate_insert(child, config.max_length, rng);
      if (chance(rng, config.p_delete)) child = mutate_delete(child, config.min_length, rng);
      if (chance(rng, config.p_inversion)) child = invert(child, rng);
      next[i].genotype = std::move(child);
      score(next[i]);
    });
    pop = std::move(next);
    order = ranked();
    record(gen, order);
  }
  return result;
}

std::string history_json(const EvolutionResult& result) {
  nlohmann::ordered_json j;
  j["generations"] = nlohmann::ordered_json::array();
  for (const auto& s : result.history) {
    j["generations"].push_back({{"generation", s.generation},
                                {"best_fitness", s.best},
                                {"mean_fitness", s.mean},
                                {"best_hash", hex(s.best_hash)},
                                {"best_length", s.best_length}});
  }
  j["best"] = {{"fitness", result.best.fitness},
               {"hash", hex(result.best.hash)},
               {"length", result.best.genotype.program.size()}};
  return j.dump(2) + "\n";
}

std::string manifest_json(const EvolutionConfig& c, const Task& task, const EvolutionResult& result,
                          const std::vector<std::string>& seed_files) {
  nlohmann::ordered_json j;
  j["tool"] = "ptm evolve";
  j["task"] = {{"name", task.name},
               {"size", task.size},
               {"input_dims", task.input_dims},
               {"output_dims", task.output_dims},
               {"mode", task.mode == Task::Mode::Exhaustive ? "exhaustive" : "sampled"},
               {"samples", task.samples},
               {"sample_seed", task.sample_seed}};
  nlohmann::ordered_json limits;
  limits["max_nodes"] = c.limits.max_nodes ? nlohmann::ordered_json(*c.limits.max_nodes) : nullptr;
  limits["max_depth"] = c.limits.max_depth ? nlohmann::ordered_json(*c.limits.max_depth) : nullptr;
  limits["max_fanout"] = c.limits.max_fanout ? nlohmann::ordered_json(*c.limits.max_fanout) : nullptr;
  limits["fatal"] = c.limits.fatal;
  j["config"] = {{"population", c.population},   {"generations", c.generations},
                 {"tournament", c.tournament},   {"elitism", c.elitism},
                 {"p_point", c.p_point},         {"p_insert", c.p_insert},
                 {"p_delete", c.p_delete},       {"p_crossover", c.p_crossover},
                 {"p_inversion", c.p_inversion}, {"min_length", c.min_length},
                 {"max_length", c.max_length},   {"initial_length", c.initial_length},
                 {"num_states", c.num_states},   {"work_tapes", c.work_tapes},
                 {"work_cells", c.work_cells},   {"limits", limits},
                 {"seed", c.seed},               {"workers", c.workers}};
  j["seed_genotypes"] = seed_files;
  j["result"] = {{"best_fitness", result.best.fitness},
                 {"best_hash", hex(result.best.hash)},
                 {"best_length", result.best.genotype.program.size()},
                 {"generations_recorded", result.history.size()}};
  return j.dump(2) + "\n";
}

}  // namespace ptm

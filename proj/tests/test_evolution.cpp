#include <doctest.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "ptm/errors.hpp"
#include "ptm/evolution.hpp"
#include "support/lopro_support.hpp"

using namespace ptm;
using namespace ptm::testing;

namespace {

MachineHeader small_header() {
  MachineHeader h;
  h.num_states = 4;
  h.tapes = {TapeSpec::index(TapeRole::InputIndex, 4), TapeSpec::work(2)};
  return h;
}

// Independent well-formedness check.
bool well_formed(const MachineHeader& h, const Instruction& g) {
  const std::size_t k = h.tapes.size();
  if (g.from >= h.num_states || g.to >= h.num_states) return false;
  if (g.read.size() != k || g.write.size() != k || g.moves.size() != k) return false;
  for (std::size_t t = 0; t < k; ++t) {
    if (static_cast<int>(g.read[t]) > 2 || static_cast<int>(g.write[t]) > 2 || static_cast<int>(g.moves[t]) > 2) {
      return false;
    }
  }
  return (g.dw == 1 || g.dw == -1) && (g.db == 1 || g.db == -1);
}

// Number of differing components between two genes of equal arity.
int component_diff(const Instruction& a, const Instruction& b) {
  int d = (a.from != b.from) + (a.to != b.to) + (a.dw != b.dw) + (a.db != b.db);
  for (std::size_t t = 0; t < a.read.size(); ++t) {
    d += (a.read[t] != b.read[t]) + (a.write[t] != b.write[t]) + (a.moves[t] != b.moves[t]);
  }
  return d;
}

std::vector<Instruction> sorted_genes(std::vector<Instruction> v) {
  std::sort(v.begin(), v.end());
  return v;
}

Genotype lowered_exists(std::int64_t n) { return lopro::lower(elaborate_program("exists.lp", {{"n", n}})); }

}  // namespace

TEST_CASE("random genotypes") {
  std::mt19937_64 rng(1);
  CHECK(random_genotype(small_header(), 0, rng).program.empty());
  std::mt19937_64 a(99);
  std::mt19937_64 b(99);
  CHECK(random_genotype(small_header(), 10, a) == random_genotype(small_header(), 10, b));
  for (int i = 0; i < 1000; ++i) {
    const auto g = random_genotype(small_header(), 10, rng);
    REQUIRE(g.program.size() == 10);
    for (const auto& gene : g.program) REQUIRE(well_formed(g.header, gene));
    CHECK_NOTHROW(g.validate());
  }
}

TEST_CASE("point mutation changes exactly one component") {
  std::mt19937_64 rng(2);
  int db_flips = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto g = random_genotype(small_header(), 1 + i % 7, rng);
    const auto m = mutate_point(g, rng);
    REQUIRE(m.program.size() == g.program.size());
    int total = 0;
    for (std::size_t j = 0; j < g.program.size(); ++j) {
      total += component_diff(g.program[j], m.program[j]);
      if (g.program[j].db != m.program[j].db) {
        CHECK(m.program[j].db == -g.program[j].db);
        ++db_flips;
      }
      CHECK(well_formed(m.header, m.program[j]));
    }
    REQUIRE(total == 1);
  }
  CHECK(db_flips > 0);
  Genotype empty{small_header(), {}};
  CHECK(mutate_point(empty, rng) == empty);
}

TEST_CASE("insertion and deletion respect bounds") {
  std::mt19937_64 rng(3);
  const auto g = random_genotype(small_header(), 5, rng);
  CHECK(mutate_insert(g, 6, rng).program.size() == 6);
  CHECK(mutate_insert(g, 5, rng).program.size() == 5);
  CHECK(mutate_delete(g, 0, rng).program.size() == 4);
  CHECK(mutate_delete(g, 5, rng).program.size() == 5);
  Genotype empty{small_header(), {}};
  CHECK(mutate_delete(empty, 0, rng) == empty);
  CHECK(mutate_insert(empty, 10, rng).program.size() == 1);
}

TEST_CASE("crossover") {
  std::mt19937_64 rng(4);
  const auto a = random_genotype(small_header(), 6, rng);
  const auto b = random_genotype(small_header(), 9, rng);
  SUBCASE("degenerate cuts") {
    auto [x, y] = crossover_at(a, b, 0, 0, 0, 100, rng);
    CHECK(x == b);
    CHECK(y == a);
    auto [p, q] = crossover_at(a, b, 6, 9, 0, 100, rng);
    CHECK(p == a);
    CHECK(q == b);
  }
  SUBCASE("multiset preserved") {
    std::vector<Instruction> parents = a.program;
    parents.insert(parents.end(), b.program.begin(), b.program.end());
    for (int i = 0; i < 1000; ++i) {
      auto [x, y] = crossover(a, b, 0, 100, rng);
      std::vector<Instruction> kids = x.program;
      kids.insert(kids.end(), y.program.begin(), y.program.end());
      REQUIRE(sorted_genes(kids) == sorted_genes(parents));
    }
    for (std::size_t cut = 0; cut <= 6; ++cut) {
      auto [x, y] = crossover_at(a, b, cut, cut, 0, 100, rng);
      CHECK(x.program.size() == 9);
      CHECK(y.program.size() == 6);
    }
  }
  SUBCASE("clamped to bounds") {
    auto [x, y] = crossover_at(a, b, 6, 0, 0, 10, rng);
    CHECK(x.program.size() == 10);
    CHECK(y.program.empty());
    auto [p, q] = crossover_at(a, b, 6, 0, 3, 100, rng);
    CHECK(q.program.size() == 3);
    (void)p;
  }
  SUBCASE("header mismatch") {
    Genotype c = b;
    c.header.num_states = 5;
    CHECK_THROWS_AS(crossover(a, c, 0, 100, rng), ArgumentError);
  }
}

TEST_CASE("inversion") {
  std::mt19937_64 rng(5);
  const auto g = random_genotype(small_header(), 8, rng);
  CHECK(invert_segment(g, 3, 4) == g);
  CHECK(invert_segment(invert_segment(g, 1, 6), 1, 6) == g);
  CHECK(invert_segment(g, 0, 8).program.front() == g.program.back());
  for (int i = 0; i < 1000; ++i) {
    const auto h = invert(g, rng);
    REQUIRE(sorted_genes(h.program) == sorted_genes(g.program));
  }
  CHECK_THROWS_AS(invert_segment(g, 5, 9), ArgumentError);
}

TEST_CASE("tasks") {
  const auto ex = make_task("exists", 3);
  const auto all = make_task("all", 3);
  const auto par = make_task("parity", 4);
  CHECK(ex.inputs().size() == 8);
  for (const auto& in : par.inputs()) {
    int ones = 0;
    for (auto b : in.bits) ones += b;
    CHECK(par.oracle(in).bits[0] == (ones % 2));
  }
  for (const auto& in : ex.inputs()) {
    CHECK((ex.oracle(in).bits[0] != 0) == any_bit(in));
    CHECK((all.oracle(in).bits[0] != 0) == all_bits(in));
  }
  const auto tc3 = make_task("transitive-closure", 3);
  CHECK(tc3.mode == Task::Mode::Exhaustive);
  const auto ins = tc3.inputs();
  CHECK(ins.size() == 512);
  for (const auto& in : ins) {
    std::vector<std::vector<int>> adj(3, std::vector<int>(3));
    for (std::size_t k = 0; k < 9; ++k) adj[k / 3][k % 3] = in.bits[k];
    const auto want = warshall(adj);
    const auto got = tc3.oracle(in);
    for (std::size_t k = 0; k < 9; ++k) REQUIRE((got.bits[k] != 0) == (want[k / 3][k % 3] != 0));
  }
  const auto tc4 = make_task("transitive-closure", 4, 64, 11);
  CHECK(tc4.mode == Task::Mode::Sampled);
  CHECK(tc4.inputs().size() == 64);
  CHECK(tc4.inputs() == make_task("transitive-closure", 4, 64, 11).inputs());
  CHECK_THROWS_AS(make_task("parity", 5), ArgumentError);
  CHECK_THROWS_AS(make_task("transitive-closure", 5), ArgumentError);
  CHECK_THROWS_WITH_AS(make_task("nope", 2), doctest::Contains("exists"), ArgumentError);
}

TEST_CASE("fitness") {
  const auto task = make_task("exists", 4);
  CHECK(evaluate_fitness(lowered_exists(4), task, {}) == 1.0);
  Genotype empty{task_header(task, 4), {}};
  CHECK(evaluate_fitness(empty, task, {}) == doctest::Approx(1.0 / 16));
  Limits fatal;
  fatal.max_nodes = 2;
  fatal.fatal = true;
  CHECK(evaluate_fitness(lowered_exists(4), task, fatal) == 0.0);
  CHECK_THROWS_AS(evaluate_fitness(lowered_exists(3), task, {}), ArgumentError);
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    const auto g = random_genotype(task_header(task, 4, 1, 2), 12, rng);
    const double f = evaluate_fitness(g, task, EvolutionConfig{}.limits);
    REQUIRE(f >= 0.0);
    REQUIRE(f <= 1.0);
  }
}

TEST_CASE("evolve: seeded run keeps the solution") {
  EvolutionConfig c;
  c.population = 20;
  c.generations = 10;
  c.seed = 3;
  const auto r = evolve(c, make_task("exists", 4), {lowered_exists(4)});
  REQUIRE(r.history.size() == 11);
  for (const auto& s : r.history) CHECK(s.best == 1.0);
  CHECK(r.best.fitness == 1.0);
}

TEST_CASE("evolve: elitism, determinism and worker independence") {
  EvolutionConfig c;
  c.population = 30;
  c.generations = 15;
  c.seed = 8;
  const auto task = make_task("exists", 2);
  const auto a = evolve(c, task);
  const auto b = evolve(c, task);
  c.workers = 3;
  const auto d = evolve(c, task);
  CHECK(a.history == b.history);
  CHECK(a.history == d.history);
  for (std::size_t i = 1; i < a.history.size(); ++i) CHECK(a.history[i].best >= a.history[i - 1].best);
  const auto j = nlohmann::json::parse(history_json(a));
  CHECK(j["generations"].size() == 16);
  CHECK(history_json(a) == history_json(b));
  const auto m = nlohmann::json::parse(manifest_json(c, task, a));
  CHECK(m["config"]["seed"] == 8);
  CHECK(m["task"]["name"] == "exists");
}

TEST_CASE("evolve: config validation") {
  EvolutionConfig c;
  c.elitism = c.population;
  CHECK_THROWS_AS(evolve(c, make_task("exists", 2)), ArgumentError);
  c = {};
  c.p_point = 1.5;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("p_point"), ArgumentError);
}

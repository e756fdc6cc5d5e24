// Acceptance gate: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "ptm/evolution.hpp"
#include "ptm/machine_format.hpp"
#include "support/invariants.hpp"
#include "support/lopro_support.hpp"

using namespace ptm;
using namespace ptm::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "  failed: " << what << "\n";
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail << "  exception: " << e.what() << "\n";
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.expect(s < budget_s, "time budget " + std::to_string(budget_s) + " s");
  char line[200];
  std::snprintf(line, sizeof line, "%s %2d. %s (%.2f s, budget %.0f s)", o.ok ? "PASS" : "FAIL", id, name.c_str(), s,
                budget_s);
  std::cout << line << "\n" << o.detail.str() << std::flush;
  failures += !o.ok;
}

MachineSpec pair_machine(int db0, int db1, int db2, int db3) {
  std::ostringstream s;
  s << "ptm v1\nstates 4\ntape 0 input-index dim 2\n"
    << "instr 0 # -> 2 # R +1 " << (db0 > 0 ? "+1" : "-1") << "\n"
    << "instr 0 # -> 2 # R +1 " << (db1 > 0 ? "+1" : "-1") << "\n"
    << "instr 0 # -> 3 # R +1 " << (db2 > 0 ? "+1" : "-1") << "\n"
    << "instr 0 # -> 3 # R +1 " << (db3 > 0 ? "+1" : "-1") << "\n"
    << "instr 2 0 -> 1 0 N +1 +1\ninstr 2 0 -> 1 0 N +1 -1\n"
    << "instr 3 0 -> 1 1 N +1 +1\ninstr 3 0 -> 1 1 N +1 -1\n";
  return parse_machine(s.str());
}

void check_pair(Outcome& o, const MachineSpec& m, std::int64_t bias, bool want_and) {
  const Network net = build(m);
  const NodeId out = net.outputs[0];
  o.expect(net.nodes[out].bias == bias, "output bias " + std::to_string(bias));
  o.expect(net.fanout(out) == 2, "two links from the output node");
  for (std::size_t l = net.link_begin[out]; l < net.link_begin[out + 1]; ++l) {
    o.expect(net.links[l].weight == 2, "link weight 2");
  }
  for (int x0 = 0; x0 < 2; ++x0) {
    for (int x1 = 0; x1 < 2; ++x1) {
      BitArray in = BitArray::zeros({2});
      in.bits = {static_cast<std::uint8_t>(x0), static_cast<std::uint8_t>(x1)};
      const bool want = want_and ? (x0 && x1) : (x0 || x1);
      o.expect((evaluate(net, in).bits[0] != 0) == want, "truth table row " + in.to_string());
    }
  }
}

bool history_all_one(const EvolutionResult& r) {
  for (const auto& s : r.history) {
    if (s.best != 1.0) return false;
  }
  return true;
}

}  // namespace

int main() {
  criterion(1, "AND construction: bias -2, weights (2,2), AND table; OR variant", 1, [](Outcome& o) {
    check_pair(o, pair_machine(-1, -1, -1, +1), -2, true);
    check_pair(o, pair_machine(+1, -1, +1, -1), 0, false);
  });

  criterion(2, "Exists matches OR for n = 1..6 (126 evaluations); 001101 -> 1", 5, [](Outcome& o) {
    std::size_t evaluations = 0;
    for (std::int64_t n = 1; n <= 6; ++n) {
      const auto net = lopro::build_highlevel(elaborate_program("exists.lp", {{"n", n}}), {});
      evaluations += truth_table(net).size();
      o.expect(mismatches(net, any_bit) == 0, "OR oracle at n = " + std::to_string(n));
    }
    o.expect(evaluations == 126, "126 evaluations");
    const auto net = lopro::build_highlevel(elaborate_program("exists.lp"), {});
    const std::string out = evaluate(net, BitArray::from_string({6}, "001101")).to_string();
    std::cout << "     The output is " << out << "\n";
    o.expect(out == "1", "scenario output 1");
  });

  criterion(3, "All matches AND for n = 1..6", 5, [](Outcome& o) {
    for (std::int64_t n = 1; n <= 6; ++n) {
      const auto net = lopro::build_highlevel(elaborate_program("all.lp", {{"n", n}}), {});
      o.expect(mismatches(net, all_bits) == 0, "AND oracle at n = " + std::to_string(n));
    }
  });

  criterion(4, "TransitiveClosure matches Warshall: 512 graphs on 3, 200 random on 4", 60, [](Outcome& o) {
    const auto net3 = lopro::build_highlevel(elaborate_program("transitive_closure.lp", {{"vertices", 3}}), {});
    std::size_t bad = 0;
    for (std::uint32_t code = 0; code < 512; ++code) {
      std::vector<std::vector<int>> adj(3, std::vector<int>(3));
      for (std::size_t k = 0; k < 9; ++k) adj[k / 3][k % 3] = (code >> k) & 1;
      bad += !closure_matches(net3, 3, adj);
    }
    o.expect(bad == 0, std::to_string(bad) + " mismatches on 3 vertices");
    const auto net4 = lopro::build_highlevel(elaborate_program("transitive_closure.lp", {{"vertices", 4}}), {});
    std::mt19937_64 rng(2024);
    bad = 0;
    for (int t = 0; t < 200; ++t) {
      std::vector<std::vector<int>> adj(4, std::vector<int>(4));
      for (auto& row : adj) {
        for (int& x : row) x = static_cast<int>(rng() & 1);
      }
      bad += !closure_matches(net4, 4, adj);
    }
    o.expect(bad == 0, std::to_string(bad) + " mismatches on 4 vertices");
  });

  criterion(5, "Exists source scales to end = 4, 6, 16", 10, [](Outcome& o) {
    for (std::int64_t n : {4, 6, 16}) {
      const auto net = lopro::build_highlevel(elaborate_program("exists.lp", {{"n", n}}), {});
      o.expect(mismatches(net, any_bit) == 0, "OR oracle at end = " + std::to_string(n));
    }
  });

  criterion(6, "Lowered Exists reproduces the high-level truth table for n <= 4", 10, [](Outcome& o) {
    for (std::int64_t n = 1; n <= 4; ++n) {
      const auto hl = elaborate_program("exists.lp", {{"n", n}});
      const auto genes = parse_machine(format_machine(lopro::lower(hl)));
      o.expect(same_truth_table(lopro::build_highlevel(hl, {}), build(genes)), "n = " + std::to_string(n));
    }
  });

  criterion(7, "Builder invariants on 1000 random machines", 120, [](Outcome& o) {
    std::mt19937_64 rng(77);
    RandomMachineShape shape;
    shape.max_states = 4;
    shape.max_work_cells = 2;
    std::size_t bad = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto m = random_machine(rng, shape);
      const std::string why = check_random_machine(m);
      if (!why.empty() && bad++ < 3) o.detail << "  machine " << i << ": " << why << "\n";
    }
    o.expect(bad == 0, std::to_string(bad) + " machines violate an invariant");
  });

  criterion(8, "GA seeded with lowered Exists keeps fitness 1.0; runs repeat exactly", 120, [](Outcome& o) {
    const auto seed = lopro::lower(elaborate_program("exists.lp", {{"n", 4}}));
    const auto task = make_task("exists", 4);
    EvolutionConfig c;
    c.population = 100;
    c.generations = 50;
    c.elitism = 1;
    c.seed = 42;
    const auto a = evolve(c, task, {seed});
    const auto b = evolve(c, task, {seed});
    o.expect(history_all_one(a), "best fitness 1.0 at every generation");
    o.expect(a.history == b.history, "identical histories");
    o.expect(history_json(a) == history_json(b), "identical history files");
  });

  criterion(9, "GA reaches 1.0 on 2-bit OR within 200 generations for >= 3 of 5 seeds (smoke)", 300, [](Outcome& o) {
    const auto task = make_task("exists", 2);
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      EvolutionConfig c;
      c.generations = 200;
      c.seed = seed;
      const auto r = evolve(c, task);
      std::size_t first = 0;
      for (const auto& s : r.history) {
        if (s.best == 1.0) {
          first = s.generation;
          break;
        }
      }
      const bool hit = r.best.fitness == 1.0;
      hits += hit;
      std::cout << "     seed " << seed << ": best " << r.best.fitness;
      if (hit) std::cout << " (first reached at generation " << first << ")";
      std::cout << "\n";
    }
    o.expect(hits >= 3, std::to_string(hits) + " of 5 seeds reached 1.0");
  });

  criterion(10, "TransitiveClosure depth at 2, 4, 8 vertices grows sub-linearly in n^2", 60, [](Outcome& o) {
    std::vector<std::uint64_t> depth;
    for (std::int64_t v : {2, 4, 8}) {
      const auto net = lopro::build_highlevel(elaborate_program("transitive_closure.lp", {{"vertices", v}}), {});
      depth.push_back(net.depth);
      std::cout << "     vertices " << v << ": depth " << net.depth << ", nodes " << net.nodes.size() << "\n";
    }
    o.expect(depth[2] < 64 * depth[0] / 4, "depth(8) < 64 * depth(2) / 4");
    o.expect(depth[1] < 4 * depth[0] && depth[2] < 4 * depth[1], "each doubling of n grows depth by less than 4x");
    o.expect(depth[2] <= 3 * depth[0], "depth(8) <= 3 * depth(2)");
  });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << "\n";
  return failures == 0 ? 0 : 1;
}

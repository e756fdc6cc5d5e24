#include "ptm/lopro/lower.hpp"

#include <map>
#include <optional>

namespace ptm::lopro {
namespace {

struct MicroStep {
  enum class Kind { Plain, SeekEnd, ZeroSweep };
  Kind kind = Kind::Plain;
  std::vector<std::optional<Symbol>> write;  // Plain
  std::vector<Move> moves;                   // Plain
  std::size_t tape = 0;                      // loops

  bool empty() const {
    for (const auto& w : write) {
      if (w) return false;
    }
    for (Move mv : moves) {
      if (mv != Move::N) return false;
    }
    return true;
  }

  std::string key() const {
    std::string k(1, static_cast<char>('a' + static_cast<int>(kind)));
    if (kind != Kind::Plain) return k + std::to_string(tape) + ";";
    for (std::size_t t = 0; t < write.size(); ++t) {
      k += write[t] ? symbol_char(*write[t]) : '.';
      k += move_char(moves[t]);
    }
    return k + ";";
  }
};

class Lowerer {
 public:
  explicit Lowerer(const HlMachine& m) : m_(m) {}

  MachineSpec run() {
    map_tapes();
    check_subset();
    out_.header.flavor = Flavor::PTM;
    enumerate_vectors();
    genes_.resize(m_.states.size());
    std::vector<std::vector<const HlInstruction*>> groups(m_.states.size());
    for (const auto& i : m_.instructions) groups[i.from].push_back(&i);
    bool uses_true = false;
    for (StateId s = 0; s < m_.states.size(); ++s) {
      const auto kind = m_.states[s].kind;
      if (kind == HlState::Kind::Input || kind == HlState::Kind::True || kind == HlState::Kind::False) continue;
      for (const auto& v : vectors_) {
        const HlInstruction* hit = nullptr;
        for (const HlInstruction* i : groups[s]) {
          if (holds(i->pred, v)) {
            hit = i;
            break;
          }
        }
        if (!hit) continue;
        for (const auto& b : hit->branches) {
          uses_true |= b.target == HlMachine::kTrue;
          emit_branch(s, v, b);
        }
      }
    }
    if (uses_true) {
      for (const auto& v : vectors_) add_gene(HlMachine::kTrue, v, HlMachine::kFalse, v, moves_none(), 1, 1);
    }
    out_.header.num_states = static_cast<std::uint32_t>(genes_.size());
    for (auto& g : genes_) {
      for (auto& instr : g) out_.program.push_back(std::move(instr));
    }
    out_.validate();
    return std::move(out_);
  }

 private:
  [[noreturn]] static void fail(const std::string& origin, const std::string& what) {
    throw LoweringError(origin + ": cannot lower " + what);
  }

  void map_tapes() {
    raw_.assign(m_.tapes.size(), 0);
    for (std::uint32_t t = 0; t < m_.tapes.size(); ++t) {
      if (m_.tapes[t].input_index && m_.tapes[t].output_index) {
        throw LoweringError("tape '" + m_.tapes[t].name +
                            "' is both an input-index and an output-index tape, which raw machines cannot express");
      }
    }
    for (std::uint32_t t : m_.output_tapes) {
      raw_[t] = out_.header.tapes.size();
      out_.header.tapes.push_back(TapeSpec::index(TapeRole::OutputIndex, m_.tapes[t].end));
    }
    for (std::uint32_t t : m_.input_tapes) {
      raw_[t] = out_.header.tapes.size();
      out_.header.tapes.push_back(TapeSpec::index(TapeRole::InputIndex, m_.tapes[t].end));
    }
    for (std::uint32_t t = 0; t < m_.tapes.size(); ++t) {
      if (m_.tapes[t].input_index || m_.tapes[t].output_index) continue;
      raw_[t] = out_.header.tapes.size();
      out_.header.tapes.push_back(TapeSpec::work(m_.tapes[t].cells));
    }
  }

  void check_pred(const HlPred& p, const std::string& origin) const {
    switch (p.kind) {
      case HlPred::Kind::CmpConst:
        fail(origin, "the comparison of tape '" + m_.tapes[p.tape].name +
                         "' with a constant (elaborate with comparison expansion enabled)");
      case HlPred::Kind::CmpTape:
        fail(origin, "the comparison of tape '" + m_.tapes[p.tape].name + "' with tape '" + m_.tapes[p.other].name + "'");
      default:
        for (const auto& o : p.operands) check_pred(o, origin);
    }
  }

  void check_subset() const {
    for (const auto& i : m_.instructions) {
      check_pred(i.pred, i.origin);
      for (const auto& b : i.branches) {
        for (const auto& a : b.actions) {
          if (a.kind == HlAction::Kind::SetValue) {
            fail(i.origin, "the assignment of a number to tape '" + m_.tapes[a.tape].name + "'");
          }
          if (a.kind == HlAction::Kind::Copy) {
            fail(i.origin, "the assignment of tape '" + m_.tapes[a.source].name + "' to tape '" +
                               m_.tapes[a.tape].name + "'");
          }
        }
        if ((b.dw - b.db) % 2 != 0) fail(i.origin, "differentials of different parity");
      }
    }
  }

  void enumerate_vectors() {
    const std::size_t k = out_.header.tapes.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<Symbol> v(k);
      std::size_t rest = code;
      for (std::size_t t = 0; t < k; ++t) {
        v[t] = static_cast<Symbol>(rest % 3);
        rest /= 3;
      }
      vectors_.push_back(std::move(v));
    }
  }

  bool holds(const HlPred& p, const std::vector<Symbol>& v) const {
    using K = HlPred::Kind;
    switch (p.kind) {
      case K::True: return true;
      case K::False: return false;
      case K::Not: return !holds(p.operands[0], v);
      case K::And:
        for (const auto& o : p.operands) {
          if (!holds(o, v)) return false;
        }
        return true;
      case K::Or:
        for (const auto& o : p.operands) {
          if (holds(o, v)) return true;
        }
        return false;
      case K::IsEnd: return v[raw_[p.tape]] == Symbol::End;
      case K::Scan: return v[raw_[p.tape]] == p.symbol;
      default: return false;
    }
  }

  std::vector<Move> moves_none() const { return std::vector<Move>(out_.header.tapes.size(), Move::N); }

  MicroStep plain() const {
    MicroStep s;
    s.write.assign(out_.header.tapes.size(), std::nullopt);
    s.moves = moves_none();
    return s;
  }

  std::vector<MicroStep> micro_steps(const std::vector<HlAction>& actions) const {
    std::vector<MicroStep> steps;
    MicroStep cur = plain();
    auto flush = [&] {
      if (!cur.empty()) steps.push_back(cur);
      cur = plain();
    };
    auto loop = [&](MicroStep::Kind kind, std::size_t tape) {
      MicroStep s;
      s.kind = kind;
      s.tape = tape;
      steps.push_back(s);
    };
    for (const auto& a : actions) {
      const std::size_t t = raw_[a.tape];
      switch (a.kind) {
        case HlAction::Kind::Write:
          if (cur.write[t] || cur.moves[t] != Move::N) flush();
          cur.write[t] = a.symbol;
          break;
        case HlAction::Kind::Move:
          if (cur.moves[t] != Move::N) flush();
          cur.moves[t] = a.move;
          break;
        case HlAction::Kind::ResetHead:
          flush();
          loop(MicroStep::Kind::SeekEnd, t);
          break;
        case HlAction::Kind::ClearTape:
          flush();
          loop(MicroStep::Kind::SeekEnd, t);
          cur.moves[t] = Move::R;
          flush();
          loop(MicroStep::Kind::ZeroSweep, t);
          break;
        default:
          break;
      }
    }
    flush();
    if (steps.empty() || steps.front().kind != MicroStep::Kind::Plain) steps.insert(steps.begin(), plain());
    return steps;
  }

  void add_gene(StateId from, const std::vector<Symbol>& read, StateId to, const std::vector<Symbol>& write,
                const std::vector<Move>& moves, int dw, int db) {
    genes_[from].push_back(Instruction{from, read, to, write, moves, dw, db});
  }

  void pass_through(StateId from, const std::vector<Symbol>& read, StateId to, const std::vector<Symbol>& write,
                    const std::vector<Move>& moves) {
    add_gene(from, read, to, write, moves, 1, 1);
    add_gene(from, read, to, write, moves, 1, -1);
  }

  std::vector<Symbol> written(const MicroStep& s, const std::vector<Symbol>& scanned) const {
    std::vector<Symbol> w = scanned;
    for (std::size_t t = 0; t < w.size(); ++t) {
      if (s.write[t]) w[t] = *s.write[t];
    }
    return w;
  }

  // State that performs steps[i..] and then lands in `target`.
  StateId chain(const std::vector<MicroStep>& steps, std::size_t i, StateId target) {
    if (i == steps.size()) return target;
    std::string key = std::to_string(target) + ":";
    for (std::size_t j = i; j < steps.size(); ++j) key += steps[j].key();
    if (auto it = chains_.find(key); it != chains_.end()) return it->second;
    const auto id = static_cast<StateId>(genes_.size());
    genes_.emplace_back();
    chains_.emplace(key, id);
    const StateId next = chain(steps, i + 1, target);
    const MicroStep& s = steps[i];
    for (const auto& u : vectors_) {
      if (s.kind == MicroStep::Kind::Plain) {
        pass_through(id, u, next, written(s, u), s.moves);
        continue;
      }
      if (u[s.tape] == Symbol::End) {
        pass_through(id, u, next, u, moves_none());
        continue;
      }
      std::vector<Symbol> w = u;
      if (s.kind == MicroStep::Kind::ZeroSweep) w[s.tape] = Symbol::Zero;
      std::vector<Move> mv = moves_none();
      mv[s.tape] = Move::R;
      pass_through(id, u, id, w, mv);
    }
    return id;
  }

  void emit_branch(StateId from, const std::vector<Symbol>& v, const HlBranch& b) {
    const auto steps = micro_steps(b.actions);
    const StateId next = chain(steps, 1, b.target);
    std::int64_t n = std::max<std::int64_t>({std::abs(b.dw), std::abs(b.db), 1});
    if ((n - b.dw) % 2 != 0) ++n;
    const std::int64_t dw_plus = (n + b.dw) / 2;
    const std::int64_t db_plus = (n + b.db) / 2;
    const auto w = written(steps[0], v);
    for (std::int64_t g = 0; g < n; ++g) {
      add_gene(from, v, next, w, steps[0].moves, g < dw_plus ? 1 : -1, g < db_plus ? 1 : -1);
    }
  }

  const HlMachine& m_;
  MachineSpec out_;
  std::vector<std::size_t> raw_;
  std::vector<std::vector<Symbol>> vectors_;
  std::vector<std::vector<Instruction>> genes_;
  std::map<std::string, StateId> chains_;
};

}  // namespace

MachineSpec lower(const HlMachine& m) { return Lowerer(m).run(); }

}  // namespace ptm::lopro

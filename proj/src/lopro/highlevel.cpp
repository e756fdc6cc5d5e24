#include "ptm/lopro/highlevel.hpp"

#include <sstream>

#include "ptm/lopro/ast.hpp"

namespace ptm::lopro {

std::vector<std::uint64_t> HlMachine::input_dims() const {
  std::vector<std::uint64_t> dims;
  for (std::uint32_t t : input_tapes) dims.push_back(tapes[t].end);
  return dims;
}

std::vector<std::uint64_t> HlMachine::output_dims() const {
  std::vector<std::uint64_t> dims;
  for (std::uint32_t t : output_tapes) dims.push_back(tapes[t].end);
  return dims;
}

std::vector<const HlInstruction*> HlMachine::group(StateId state) const {
  std::vector<const HlInstruction*> out;
  for (const auto& i : instructions) {
    if (i.from == state) out.push_back(&i);
  }
  return out;
}

std::size_t HlMachine::work_tape_count() const {
  std::size_t n = 0;
  for (const auto& t : tapes) n += !t.input_index && !t.output_index;
  return n;
}

namespace {

int compare_values(std::uint64_t a, std::int64_t b) {
  if (b < 0) return 1;
  const auto ub = static_cast<std::uint64_t>(b);
  return a < ub ? -1 : (a > ub ? 1 : 0);
}

bool holds(int op, int cmp) {
  switch (static_cast<RelOp>(op)) {
    case RelOp::Eq: return cmp == 0;
    case RelOp::Ne: return cmp != 0;
    case RelOp::Lt: return cmp < 0;
    case RelOp::Le: return cmp <= 0;
    case RelOp::Gt: return cmp > 0;
    case RelOp::Ge: return cmp >= 0;
  }
  return false;
}

}  // namespace

bool eval_pred(const HlPred& p, const HlMachine& m, const Configuration& c) {
  using K = HlPred::Kind;
  switch (p.kind) {
    case K::True: return true;
    case K::False: return false;
    case K::Not: return !eval_pred(p.operands[0], m, c);
    case K::And:
      for (const auto& o : p.operands) {
        if (!eval_pred(o, m, c)) return false;
      }
      return true;
    case K::Or:
      for (const auto& o : p.operands) {
        if (eval_pred(o, m, c)) return true;
      }
      return false;
    case K::IsEnd: return c.heads[p.tape] == 0;
    case K::Scan: return c.scanned(p.tape) == p.symbol;
    case K::CmpConst: return holds(p.op, compare_values(tape_value(c.tapes[p.tape]), p.value));
    case K::CmpTape: {
      const std::uint64_t a = tape_value(c.tapes[p.tape]);
      const std::uint64_t b = tape_value(c.tapes[p.other]);
      return holds(p.op, a < b ? -1 : (a > b ? 1 : 0));
    }
  }
  (void)m;
  return false;
}

void apply_action(const HlAction& a, const HlMachine& m, Configuration& c) {
  auto& tape = c.tapes[a.tape];
  auto& head = c.heads[a.tape];
  switch (a.kind) {
    case HlAction::Kind::Write:
      if (head != 0) tape[head] = a.symbol;
      break;
    case HlAction::Kind::Move: {
      const auto len = static_cast<std::uint32_t>(tape.size());
      if (a.move == Move::R) head = head + 1 == len ? 0 : head + 1;
      if (a.move == Move::L) head = head == 0 ? len - 1 : head - 1;
      break;
    }
    case HlAction::Kind::SetValue: set_tape_value(tape, a.value); break;
    case HlAction::Kind::Copy: set_tape_value(tape, tape_value(c.tapes[a.source])); break;
    case HlAction::Kind::ResetHead: head = 0; break;
    case HlAction::Kind::ClearTape:
      set_tape_value(tape, 0);
      head = 0;
      break;
  }
  (void)m;
}

namespace {

class HighLevelTransitions final : public TransitionSystem {
 public:
  explicit HighLevelTransitions(const HlMachine& m) : m_(m), groups_(m.states.size()) {
    for (const auto& i : m.instructions) groups_[i.from].push_back(&i);
  }

  bool perceptron() const override { return true; }
  std::vector<std::uint64_t> output_dims() const override { return m_.output_dims(); }
  std::vector<std::uint64_t> input_dims() const override { return m_.input_dims(); }

  Configuration output_config(const std::vector<std::uint64_t>& coords) const override {
    Configuration c;
    c.state = HlMachine::kOutput;
    for (const auto& t : m_.tapes) {
      std::vector<Symbol> cells(t.cells + 1, Symbol::Zero);
      cells[0] = Symbol::End;
      c.tapes.push_back(std::move(cells));
    }
    c.heads.assign(m_.tapes.size(), 0);
    for (std::size_t i = 0; i < m_.output_tapes.size(); ++i) set_tape_value(c.tapes[m_.output_tapes[i]], coords[i]);
    return c;
  }

  NodeShape classify(const Configuration& c) const override {
    NodeShape shape;
    switch (m_.states[c.state].kind) {
      case HlState::Kind::True:
      case HlState::Kind::False:
        shape.kind = NodeKind::Constant;
        shape.value = m_.states[c.state].kind == HlState::Kind::True;
        return shape;
      case HlState::Kind::Input:
        shape.kind = NodeKind::Input;
        for (std::uint32_t t : m_.input_tapes) {
          const std::uint64_t v = tape_value(c.tapes[t]);
          if (v >= m_.tapes[t].end) return NodeShape{NodeKind::Constant, GateType::Or, {}, false, false};
          shape.coords.push_back(v);
        }
        return shape;
      default:
        return shape;
    }
  }

  void successors(const Configuration& c, std::vector<Step>& out) const override {
    for (const HlInstruction* i : groups_[c.state]) {
      if (!eval_pred(i->pred, m_, c)) continue;
      for (const auto& b : i->branches) {
        Configuration next = c;
        for (const auto& a : b.actions) apply_action(a, m_, next);
        next.state = b.target;
        out.push_back(Step{std::move(next), b.dw, b.db});
      }
      return;
    }
  }

 private:
  const HlMachine& m_;
  std::vector<std::vector<const HlInstruction*>> groups_;
};

void print_pred(std::ostream& out, const HlPred& p, const HlMachine& m) {
  using K = HlPred::Kind;
  switch (p.kind) {
    case K::True: out << "true"; return;
    case K::False: out << "false"; return;
    case K::Not:
      out << "not ";
      print_pred(out, p.operands[0], m);
      return;
    case K::And:
    case K::Or:
      out << "(";
      for (std::size_t i = 0; i < p.operands.size(); ++i) {
        if (i) out << (p.kind == K::And ? " and " : " or ");
        print_pred(out, p.operands[i], m);
      }
      out << ")";
      return;
    case K::IsEnd: out << m.tapes[p.tape].name << ".is_end"; return;
    case K::Scan: out << "*" << m.tapes[p.tape].name << " == " << symbol_char(p.symbol); return;
    case K::CmpConst:
      out << m.tapes[p.tape].name << " " << relop_text(static_cast<RelOp>(p.op)) << " " << p.value;
      return;
    case K::CmpTape:
      out << m.tapes[p.tape].name << " " << relop_text(static_cast<RelOp>(p.op)) << " " << m.tapes[p.other].name;
      return;
  }
}

void print_action(std::ostream& out, const HlAction& a, const HlMachine& m) {
  const std::string& t = m.tapes[a.tape].name;
  switch (a.kind) {
    case HlAction::Kind::Write: out << "*" << t << " = " << symbol_char(a.symbol); break;
    case HlAction::Kind::Move: out << (a.move == Move::R ? "++" : "--") << t; break;
    case HlAction::Kind::SetValue: out << t << " = " << a.value; break;
    case HlAction::Kind::Copy: out << t << " = " << m.tapes[a.source].name; break;
    case HlAction::Kind::ResetHead: out << "reset-head " << t; break;
    case HlAction::Kind::ClearTape: out << "clear " << t; break;
  }
}

}  // namespace

Network build_highlevel(const HlMachine& m, const Limits& limits, bool keep_configurations) {
  HighLevelTransitions system(m);
  return build_network(system, BuildOptions{limits, keep_configurations});
}

std::string describe(const HlMachine& m) {
  std::ostringstream out;
  out << "tapes " << m.tapes.size() << "\n";
  for (std::size_t i = 0; i < m.tapes.size(); ++i) {
    const auto& t = m.tapes[i];
    out << "  tape " << i << " " << t.name << " end " << t.end << " cells " << t.cells;
    if (t.input_index) out << " input-index";
    if (t.output_index) out << " output-index";
    out << "\n";
  }
  out << "states " << m.states.size() << "\n";
  for (std::size_t i = 0; i < m.instructions.size(); ++i) {
    const auto& ins = m.instructions[i];
    out << "  " << m.states[ins.from].name << " when ";
    print_pred(out, ins.pred, m);
    out << " =";
    for (std::size_t b = 0; b < ins.branches.size(); ++b) {
      const auto& br = ins.branches[b];
      out << (b ? " |" : "") << " " << m.states[br.target].name << " [dw " << br.dw << ", db " << br.db << "]";
      if (!br.actions.empty()) {
        out << " {";
        for (std::size_t k = 0; k < br.actions.size(); ++k) {
          out << (k ? "; " : " ");
          print_action(out, br.actions[k], m);
        }
        out << " }";
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace ptm::lopro

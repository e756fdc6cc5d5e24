#include "ptm/lopro/elaborate.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace ptm::lopro {
namespace {

struct TapeBinding {
  std::uint32_t id = 0;
  std::uint64_t end = 0;
};

struct Env {
  std::uint32_t scope = 0;
  std::map<std::string, TapeBinding> tapes;
  std::map<std::string, std::uint32_t> heads;  // head name -> tape
  std::map<std::string, StateId> states;
};

struct Pending {
  HlPred pred;
  std::vector<HlBranch> branches;
  std::string origin;
};

std::string where(const Loc& loc) {
  return loc.file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col);
}

// --- predicate algebra ---

HlPred make(HlPred::Kind k, std::vector<HlPred> ops) {
  HlPred p;
  p.kind = k;
  p.operands = std::move(ops);
  return p;
}

HlPred simplify(const HlPred& p) {
  using K = HlPred::Kind;
  switch (p.kind) {
    case K::Not: {
      HlPred inner = simplify(p.operands[0]);
      if (inner.kind == K::True) return HlPred::constant(false);
      if (inner.kind == K::False) return HlPred::constant(true);
      if (inner.kind == K::Not) return inner.operands[0];
      return make(K::Not, {std::move(inner)});
    }
    case K::And:
    case K::Or: {
      const bool is_and = p.kind == K::And;
      std::vector<HlPred> ops;
      for (const auto& o : p.operands) {
        HlPred s = simplify(o);
        if (s.kind == (is_and ? K::False : K::True)) return s;
        if (s.kind == (is_and ? K::True : K::False)) continue;
        if (s.kind == p.kind) {
          for (auto& x : s.operands) ops.push_back(std::move(x));
        } else {
          ops.push_back(std::move(s));
        }
      }
      if (ops.empty()) return HlPred::constant(is_and);
      if (ops.size() == 1) return ops[0];
      return make(p.kind, std::move(ops));
    }
    default:
      return p;
  }
}

bool relop_holds(int op, int cmp) {
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

const HlPred* find_comparison(const HlPred& p) {
  if (p.kind == HlPred::Kind::CmpConst) return &p;
  for (const auto& o : p.operands) {
    if (auto f = find_comparison(o)) return f;
  }
  return nullptr;
}

// Resolves every `tape relop value` atom given the sign of tape - value.
HlPred substitute(const HlPred& p, std::uint32_t tape, std::int64_t value, int cmp) {
  if (p.kind == HlPred::Kind::CmpConst && p.tape == tape && p.value == value) {
    return HlPred::constant(relop_holds(p.op, cmp));
  }
  HlPred out = p;
  for (auto& o : out.operands) o = substitute(o, tape, value, cmp);
  return out;
}

class Elaborator {
 public:
  Elaborator(const Program& program, const ElaborateOptions& options) : prog_(program), opt_(options) {}

  HlMachine run() {
    bind_params();
    m_.states = {HlState{"output", HlState::Kind::Output, 0}, HlState{"input", HlState::Kind::Input, 0},
                 HlState{"true", HlState::Kind::True, 0}, HlState{"false", HlState::Kind::False, 0}};
    m_.scopes.push_back(HlScope{"machine", 0, {}, {}});
    groups_.resize(m_.states.size());
    Env env;
    elaborate_body(*prog_.machine, env, true);
    compile_groups();
    return std::move(m_);
  }

 private:
  [[noreturn]] static void fail(const Loc& loc, const std::string& msg) { throw LoproError(loc, msg); }

  void bind_params() {
    for (const auto& [name, value] : opt_.params) {
      bool known = false;
      for (const auto& p : prog_.params) known |= p.name == name;
      if (!known) fail(Loc{"<params>", 0, 0}, "no param named '" + name + "'");
    }
    for (const auto& p : prog_.params) {
      auto it = opt_.params.find(p.name);
      params_[p.name] = it != opt_.params.end() ? it->second : eval(p.value, Env{});
    }
  }

  std::int64_t eval(const IntExpr& e, const Env& env) {
    std::int64_t out = 0;
    switch (e.kind) {
      case IntExpr::Kind::Literal: return e.value;
      case IntExpr::Kind::Name: {
        auto it = params_.find(e.name);
        if (it == params_.end()) fail(e.loc, "param '" + e.name + "' used before its value is known");
        return it->second;
      }
      case IntExpr::Kind::End: return static_cast<std::int64_t>(env.tapes.at(e.name).end);
      case IntExpr::Kind::Neg:
        if (__builtin_sub_overflow(std::int64_t{0}, eval(e.operands[0], env), &out)) fail(e.loc, "integer overflow");
        return out;
      case IntExpr::Kind::Add:
        if (__builtin_add_overflow(eval(e.operands[0], env), eval(e.operands[1], env), &out)) {
          fail(e.loc, "integer overflow");
        }
        return out;
      case IntExpr::Kind::Sub:
        if (__builtin_sub_overflow(eval(e.operands[0], env), eval(e.operands[1], env), &out)) {
          fail(e.loc, "integer overflow");
        }
        return out;
      case IntExpr::Kind::Mul:
        if (__builtin_mul_overflow(eval(e.operands[0], env), eval(e.operands[1], env), &out)) {
          fail(e.loc, "integer overflow");
        }
        return out;
    }
    return 0;
  }

  std::uint32_t allocate(const std::string& name, std::uint64_t end, std::uint32_t cells, bool recyclable) {
    if (recyclable && opt_.recycle_tapes) {
      auto& free = pool_[cells];
      if (!free.empty()) {
        const std::uint32_t id = *free.begin();
        free.erase(free.begin());
        m_.tapes[id].name += "/" + name;
        return id;
      }
    }
    m_.tapes.push_back(HlTape{name, end, cells, false, false});
    return static_cast<std::uint32_t>(m_.tapes.size() - 1);
  }

  StateId new_state(const std::string& name, std::uint32_t scope) {
    m_.states.push_back(HlState{name, HlState::Kind::Plain, scope});
    groups_.emplace_back();
    return static_cast<StateId>(m_.states.size() - 1);
  }

  void elaborate_body(const Body& body, Env& env, bool is_machine) {
    HlScope& scope_ref = m_.scopes[env.scope];
    const std::string prefix = is_machine ? "" : scope_ref.name + ".";
    for (const auto& t : body.tapes) {
      const std::int64_t end = eval(t.end, env);
      if (end < 1) fail(t.loc, "tape '" + t.name + "' needs an end of at least 1, got " + std::to_string(end));
      if (end > (std::int64_t{1} << 32)) fail(t.loc, "tape '" + t.name + "' end is too large");
      const std::uint32_t cells = index_cells(static_cast<std::uint64_t>(end));
      const std::uint32_t id = allocate(prefix + t.name, static_cast<std::uint64_t>(end), cells, !is_machine);
      m_.scopes[env.scope].locals.push_back(id);
      env.tapes[t.name] = TapeBinding{id, static_cast<std::uint64_t>(end)};
    }
    for (const auto& h : body.heads) {
      const std::uint32_t tape = env.tapes.at(h.tape).id;
      env.heads[h.name] = tape;
      auto& heads = m_.scopes[env.scope].heads;
      if (std::find(heads.begin(), heads.end(), tape) == heads.end()) heads.push_back(tape);
    }
    for (const auto& s : body.states) {
      if (s.kind == StateKind::Plain) {
        env.states[s.name] = new_state(prefix + s.name, env.scope);
        continue;
      }
      const bool input = s.kind == StateKind::Input;
      const StateId id = input ? HlMachine::kInput : HlMachine::kOutput;
      m_.states[id].name = s.name;
      env.states[s.name] = id;
      auto& order = input ? m_.input_tapes : m_.output_tapes;
      for (const auto& t : s.tapes) {
        const std::uint32_t tape = env.tapes.at(t).id;
        order.push_back(tape);
        (input ? m_.tapes[tape].input_index : m_.tapes[tape].output_index) = true;
      }
      if (input) m_.has_input = true;
    }
    for (const auto& r : body.rules) elaborate_rule(r, env);
  }

  void elaborate_rule(const Rule& r, const Env& env) {
    const StateId from = env.states.at(r.from);
    Pending p;
    p.pred = r.when ? compile_cond(*r.when, env) : HlPred::constant(true);
    p.origin = where(r.loc) + " rule for '" + r.from + "'";
    for (std::size_t i = 0; i < r.branches.size(); ++i) {
      const Branch& b = r.branches[i];
      HlBranch out;
      switch (b.target.kind) {
        case Target::Kind::True: out.target = HlMachine::kTrue; break;
        case Target::Kind::False: out.target = HlMachine::kFalse; break;
        case Target::Kind::State: out.target = env.states.at(b.target.name); break;
        case Target::Kind::Call: out.target = instantiate(b.target.call, env); break;
      }
      const bool constant = out.target == HlMachine::kTrue || out.target == HlMachine::kFalse;
      if (!constant) {
        for (const auto& a : b.after) compile_action(a, env, out.actions);
        add_effects(m_.states[from].scope, m_.states[out.target].scope, out.actions);
      }
      out.dw = 2;
      out.db = (r.combinator == Combinator::And && i > 0) ? -2 : 0;
      p.branches.push_back(std::move(out));
    }
    groups_[from].push_back(std::move(p));
  }

  StateId instantiate(const Call& call, const Env& caller) {
    const Function* f = prog_.find_function(call.function);
    for (const auto& active : call_stack_) {
      if (active == f->name) fail(call.loc, "recursive call to '" + f->name + "' is not supported");
    }
    const std::string scope_name = f->name + "#" + std::to_string(++instances_[f->name]);
    Env env;
    std::vector<std::pair<const FunctionParam*, const Arg*>> tape_args;
    for (std::size_t i = 0; i < call.args.size(); ++i) {
      const Arg& a = call.args[i];
      const FunctionParam& p = f->params[i];
      if (p.kind == FunctionParam::Kind::Tape) {
        env.tapes[p.name] = caller.tapes.at(a.name);
        tape_args.emplace_back(&p, &a);
      } else {
        env.states[p.name] = a.call ? instantiate(*a.call, caller) : caller.states.at(a.name);
      }
    }
    for (const auto& [p, a] : tape_args) {
      if (!p->end) continue;
      const std::int64_t want = eval(*p->end, env);
      const auto got = static_cast<std::int64_t>(env.tapes.at(p->name).end);
      if (want != got) {
        fail(a->loc, "tape '" + a->name + "' has end " + std::to_string(got) + " but '" + f->name + "' requires " +
                         std::to_string(want) + " for parameter '" + p->name + "'");
      }
    }
    m_.scopes.push_back(HlScope{scope_name, caller.scope, {}, {}});
    env.scope = static_cast<std::uint32_t>(m_.scopes.size() - 1);
    call_stack_.push_back(f->name);
    elaborate_body(f->body, env, false);
    call_stack_.pop_back();
    for (std::uint32_t t : m_.scopes[env.scope].locals) pool_[m_.tapes[t].cells].insert(t);
    return env.states.at(f->returns);
  }

  HlPred compile_cond(const Cond& c, const Env& env) {
    using K = HlPred::Kind;
    HlPred p;
    switch (c.kind) {
      case Cond::Kind::Or:
      case Cond::Kind::And:
      case Cond::Kind::Not:
        p.kind = c.kind == Cond::Kind::Or ? K::Or : c.kind == Cond::Kind::And ? K::And : K::Not;
        for (const auto& o : c.operands) p.operands.push_back(compile_cond(o, env));
        return p;
      case Cond::Kind::IsEnd:
        p.kind = K::IsEnd;
        p.tape = env.heads.at(c.name);
        return p;
      case Cond::Kind::Scan:
        p.kind = K::Scan;
        p.tape = env.heads.at(c.name);
        p.symbol = c.bit ? Symbol::One : Symbol::Zero;
        return p;
      case Cond::Kind::Compare:
        p.tape = env.tapes.at(c.name).id;
        p.op = static_cast<int>(c.op);
        if (c.rhs.kind == IntExpr::Kind::Name && env.tapes.count(c.rhs.name)) {
          p.kind = K::CmpTape;
          p.other = env.tapes.at(c.rhs.name).id;
        } else {
          p.kind = K::CmpConst;
          p.value = eval(c.rhs, env);
        }
        return p;
    }
    return p;
  }

  void compile_action(const Action& a, const Env& env, std::vector<HlAction>& out) {
    switch (a.kind) {
      case Action::Kind::Move:
        out.push_back(HlAction{HlAction::Kind::Move, env.heads.at(a.name), Symbol::Zero,
                               a.step > 0 ? ptm::Move::R : ptm::Move::L, 0, 0});
        return;
      case Action::Kind::Write:
        out.push_back(HlAction{HlAction::Kind::Write, env.heads.at(a.name), a.bit ? Symbol::One : Symbol::Zero,
                               ptm::Move::N, 0, 0});
        if (a.step != 0) {
          out.push_back(HlAction{HlAction::Kind::Move, env.heads.at(a.name), Symbol::Zero,
                                 a.step > 0 ? ptm::Move::R : ptm::Move::L, 0, 0});
        }
        return;
      case Action::Kind::Assign: {
        const std::uint32_t tape = env.tapes.at(a.name).id;
        if (a.value.kind == IntExpr::Kind::Name && env.tapes.count(a.value.name)) {
          out.push_back(HlAction{HlAction::Kind::Copy, tape, Symbol::Zero, ptm::Move::N, 0,
                                 env.tapes.at(a.value.name).id});
          return;
        }
        const std::int64_t v = eval(a.value, env);
        if (v < 0) fail(a.loc, "cannot store negative value " + std::to_string(v) + " on tape '" + a.name + "'");
        out.push_back(HlAction{HlAction::Kind::SetValue, tape, Symbol::Zero, ptm::Move::N,
                               static_cast<std::uint64_t>(v), 0});
        return;
      }
    }
  }

  // Scope exits up to the common ancestor, then entries down to the target.
  void add_effects(std::uint32_t from, std::uint32_t to, std::vector<HlAction>& out) {
    auto chain = [this](std::uint32_t s) {
      std::vector<std::uint32_t> c{s};
      while (s != 0) {
        s = m_.scopes[s].parent;
        c.push_back(s);
      }
      return c;
    };
    const auto a = chain(from);
    const auto b = chain(to);
    std::uint32_t lca = 0;
    for (std::uint32_t s : a) {
      if (std::find(b.begin(), b.end(), s) != b.end()) {
        lca = s;
        break;
      }
    }
    std::vector<std::uint32_t> touched;
    for (std::uint32_t s : a) {
      if (s == lca) break;
      touched.push_back(s);
    }
    std::vector<std::uint32_t> entered;
    for (std::uint32_t s : b) {
      if (s == lca) break;
      entered.push_back(s);
    }
    touched.insert(touched.end(), entered.rbegin(), entered.rend());
    std::vector<std::uint32_t> cleared;
    std::vector<std::uint32_t> reset;
    for (std::uint32_t s : touched) {
      for (std::uint32_t t : m_.scopes[s].locals) {
        if (std::find(cleared.begin(), cleared.end(), t) == cleared.end()) cleared.push_back(t);
      }
    }
    for (std::uint32_t s : touched) {
      for (std::uint32_t t : m_.scopes[s].heads) {
        if (std::find(cleared.begin(), cleared.end(), t) == cleared.end() &&
            std::find(reset.begin(), reset.end(), t) == reset.end()) {
          reset.push_back(t);
        }
      }
    }
    for (std::uint32_t t : cleared) out.push_back(HlAction{HlAction::Kind::ClearTape, t, Symbol::Zero, ptm::Move::N, 0, 0});
    for (std::uint32_t t : reset) out.push_back(HlAction{HlAction::Kind::ResetHead, t, Symbol::Zero, ptm::Move::N, 0, 0});
  }

  // Rule groups to first-match instructions, then optional comparison scans.
  void compile_groups() {
    std::vector<std::vector<HlInstruction>> compiled(groups_.size());
    for (StateId s = 0; s < groups_.size(); ++s) {
      std::vector<HlPred> earlier;
      for (auto& p : groups_[s]) {
        std::vector<HlPred> parts{p.pred};
        for (const auto& e : earlier) parts.push_back(make(HlPred::Kind::Not, {e}));
        earlier.push_back(p.pred);
        HlPred pred = simplify(make(HlPred::Kind::And, std::move(parts)));
        if (pred.kind == HlPred::Kind::False) continue;
        compiled[s].push_back(HlInstruction{s, std::move(pred), std::move(p.branches), std::move(p.origin)});
      }
    }
    if (opt_.expand_comparisons) expand(compiled);
    for (auto& g : compiled) {
      for (auto& i : g) m_.instructions.push_back(std::move(i));
    }
  }

  static void resolve_in_group(std::vector<HlInstruction>& group, std::uint32_t tape, std::int64_t value, int cmp) {
    std::vector<HlInstruction> kept;
    for (auto& i : group) {
      i.pred = simplify(substitute(i.pred, tape, value, cmp));
      if (i.pred.kind != HlPred::Kind::False) kept.push_back(std::move(i));
    }
    group = std::move(kept);
  }

  StateId add_scan_state(std::vector<std::vector<HlInstruction>>& groups, const std::string& name, std::uint32_t scope) {
    const StateId id = new_state(name, scope);
    groups.resize(m_.states.size());
    return id;
  }

  static HlInstruction step(StateId from, HlPred pred, StateId to, std::uint32_t tape, const std::string& origin) {
    HlBranch b;
    b.target = to;
    b.actions.push_back(HlAction{HlAction::Kind::Move, tape, Symbol::Zero, ptm::Move::R, 0, 0});
    b.dw = 2;
    b.db = 0;
    return HlInstruction{from, std::move(pred), {std::move(b)}, origin};
  }

  // Replaces the group of each state that tests `tape relop constant` by a
  // walk around the tape. The walk first counts moves to the endmark (A_k),
  // then compares cells low bit first (B), then walks back to the original
  // head position (C) and continues in a copy of the group with the test
  // resolved (X_lt, X_eq, X_gt).
  void expand(std::vector<std::vector<HlInstruction>>& groups) {
    std::deque<StateId> work;
    for (StateId s = 0; s < groups.size(); ++s) work.push_back(s);
    while (!work.empty()) {
      const StateId s = work.front();
      work.pop_front();
      const HlPred* atom = nullptr;
      for (const auto& i : groups[s]) {
        if ((atom = find_comparison(i.pred))) break;
      }
      if (!atom) continue;
      const std::uint32_t tape = atom->tape;
      const std::int64_t value = atom->value;
      const std::uint32_t c = m_.tapes[tape].cells;
      const std::string origin = groups[s].front().origin + " (comparison scan)";
      if (value < 0 || (c < 63 && value >= (std::int64_t{1} << c))) {
        resolve_in_group(groups[s], tape, value, value < 0 ? 1 : -1);
        work.push_front(s);
        continue;
      }
      const std::uint32_t scope = m_.states[s].scope;
      const std::string base = m_.states[s].name + "~cmp" + std::to_string(++scans_);
      std::vector<HlInstruction> original = std::move(groups[s]);
      groups[s].clear();

      StateId x[3];
      for (int r = 0; r < 3; ++r) {
        static const char* names[] = {"lt", "eq", "gt"};
        x[r] = add_scan_state(groups, base + ".x" + names[r], scope);
        std::vector<HlInstruction> copy = original;
        for (auto& i : copy) i.from = x[r];
        resolve_in_group(copy, tape, value, r - 1);
        groups[x[r]] = std::move(copy);
        work.push_back(x[r]);
      }
      std::map<std::tuple<std::uint32_t, std::uint32_t, int>, StateId> walk_back;
      auto back_state = [&](std::uint32_t k, std::uint32_t m, int r) -> StateId {
        // m moves right remain before the head is home again.
        StateId next = x[r + 1];
        for (std::uint32_t left = 1; left <= m; ++left) {
          auto key = std::make_tuple(k, left, r);
          auto it = walk_back.find(key);
          if (it == walk_back.end()) {
            const StateId id = add_scan_state(groups, base + ".c" + std::to_string(k) + "_" + std::to_string(left) +
                                                          "_" + std::to_string(r + 1), scope);
            groups[id].push_back(step(id, HlPred::constant(true), next, tape, origin));
            it = walk_back.emplace(key, id).first;
          }
          next = it->second;
        }
        return next;
      };
      std::map<std::tuple<std::uint32_t, std::uint32_t, int>, StateId> compare;
      // B(k, j, r): head on cell j, r = sign of (low j-1 bits of tape) - (low j-1 bits of value).
      std::function<StateId(std::uint32_t, std::uint32_t, int)> cmp_state = [&](std::uint32_t k, std::uint32_t j,
                                                                               int r) -> StateId {
        auto key = std::make_tuple(k, j, r);
        if (auto it = compare.find(key); it != compare.end()) return it->second;
        const StateId id = add_scan_state(
            groups, base + ".b" + std::to_string(k) + "_" + std::to_string(j) + "_" + std::to_string(r + 1), scope);
        compare.emplace(key, id);
        const int vbit = static_cast<int>((value >> (j - 1)) & 1);
        for (int cell = 0; cell < 2; ++cell) {
          const int nr = cell == vbit ? r : (cell < vbit ? -1 : 1);
          StateId next;
          if (j < c) {
            next = cmp_state(k, j + 1, nr);
          } else {
            next = back_state(k, (c + 1 - k) % (c + 1), nr);
          }
          HlPred pred;
          pred.kind = HlPred::Kind::Scan;
          pred.tape = tape;
          pred.symbol = cell ? Symbol::One : Symbol::Zero;
          groups[id].push_back(step(id, pred, next, tape, origin));
        }
        return id;
      };
      HlPred at_end;
      at_end.kind = HlPred::Kind::IsEnd;
      at_end.tape = tape;
      StateId a = s;
      for (std::uint32_t k = 0; k <= c; ++k) {
        const StateId scan = cmp_state(k, 1, 0);
        groups[a].push_back(step(a, at_end, scan, tape, origin));
        if (k == c) break;
        const StateId next = add_scan_state(groups, base + ".a" + std::to_string(k + 1), scope);
        groups[a].push_back(step(a, make(HlPred::Kind::Not, {at_end}), next, tape, origin));
        a = next;
      }
    }
  }

  const Program& prog_;
  const ElaborateOptions& opt_;
  HlMachine m_;
  std::map<std::string, std::int64_t> params_;
  std::map<std::uint32_t, std::set<std::uint32_t>> pool_;
  std::vector<std::string> call_stack_;
  std::map<std::string, int> instances_;
  std::vector<std::vector<Pending>> groups_;
  int scans_ = 0;
};

}  // namespace

HlMachine elaborate(const Program& program, const ElaborateOptions& options) {
  if (!program.machine) throw LoproError(Loc{"<input>", 1, 1}, "missing machine block");
  return Elaborator(program, options).run();
}

}  // namespace ptm::lopro

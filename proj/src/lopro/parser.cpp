#include "ptm/lopro/parser.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ptm::lopro {

std::string Diagnostic::format() const {
  return loc.file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + message;
}

namespace {

std::string join_diagnostics(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (std::size_t i = 0; i < diags.size(); ++i) {
    if (i) out += "\n";
    out += diags[i].format();
  }
  return out;
}

}  // namespace

LoproError::LoproError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

const char* relop_text(RelOp op) {
  switch (op) {
    case RelOp::Eq: return "==";
    case RelOp::Ne: return "!=";
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Gt: return ">";
    case RelOp::Ge: return ">=";
  }
  return "?";
}

const Function* Program::find_function(const std::string& name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

const std::set<std::string> kKeywords = {"param", "import", "function", "return", "machine", "tape",
                                         "head",  "state",  "when",     "after",
                                         "and",   "or",     "not",      "true",   "false"};

struct Token {
  enum class Kind { Ident, Int, String, Punct, Eof };
  Kind kind = Kind::Eof;
  std::string text;
  std::int64_t value = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 1;
  int col = 1;
  int end_line = 1;
  int end_col = 1;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.begin = pos_;
      t.line = line_;
      t.col = col_;
      if (pos_ >= text_.size()) {
        t.kind = Token::Kind::Eof;
        t.end = pos_;
        t.end_line = line_;
        t.end_col = col_;
        out.push_back(t);
        return out;
      }
      const char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
          advance();
        }
        t.kind = Token::Kind::Ident;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) advance();
        t.kind = Token::Kind::Int;
        const std::string digits(text_.substr(t.begin, pos_ - t.begin));
        if (digits.size() > 18) throw LoproError(loc(t), "integer literal too large");
        t.value = std::stoll(digits);
      } else if (c == '"') {
        advance();
        while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') advance();
        if (pos_ >= text_.size() || text_[pos_] != '"') throw LoproError(loc(t), "unterminated string");
        advance();
        t.kind = Token::Kind::String;
        t.text = std::string(text_.substr(t.begin + 1, pos_ - t.begin - 2));
      } else {
        static const char* two[] = {"++", "--", "==", "!=", "<=", ">=", "&&", "||"};
        bool matched = false;
        for (const char* p : two) {
          if (text_.substr(pos_, 2) == p) {
            advance();
            advance();
            matched = true;
            break;
          }
        }
        if (!matched) {
          if (std::string_view("<>=*+-(){},;.!").find(c) == std::string_view::npos) {
            throw LoproError(loc(t), std::string("unexpected character '") + c + "'");
          }
          advance();
        }
        t.kind = Token::Kind::Punct;
      }
      t.end = pos_;
      t.end_line = line_;
      t.end_col = col_;
      if (t.kind != Token::Kind::String) t.text = std::string(text_.substr(t.begin, t.end - t.begin));
      out.push_back(std::move(t));
    }
  }

 private:
  Loc loc(const Token& t) const { return Loc{file_, t.line, t.col}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (text_.substr(pos_, 2) == "/*") {
        const Loc start{file_, line_, col_};
        advance();
        advance();
        while (pos_ < text_.size() && text_.substr(pos_, 2) != "*/") advance();
        if (pos_ >= text_.size()) throw LoproError(start, "unterminated comment");
        advance();
        advance();
      } else {
        return;
      }
    }
  }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct LoadState {
  std::set<std::string> loaded;
  std::vector<std::string> active;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Parser {
 public:
  Parser(Program& program, LoadState& load, std::string_view text, std::string file, std::filesystem::path dir,
         bool is_main)
      : program_(program), load_(load), text_(text), file_(std::move(file)), dir_(std::move(dir)), is_main_(is_main) {}

  void run() {
    tokens_ = Lexer(text_, file_).run();
    SourceUnit unit;
    unit.name = file_;
    unit.text = std::string(text_);
    std::vector<std::size_t> own_params;
    while (!at_eof()) {
      if (peek_word("param")) {
        own_params.push_back(program_.params.size());
        parse_param();
      } else if (peek_word("import")) {
        parse_import(unit);
      } else if (peek_word("function")) {
        parse_function();
      } else if (peek_word("machine")) {
        const Token& kw = next();
        if (!is_main_) throw LoproError(loc(kw), "an imported file may not contain a machine block");
        if (program_.machine) throw LoproError(loc(kw), "duplicate machine block");
        program_.machine_loc = loc(kw);
        expect("{");
        program_.machine = parse_body(false, nullptr);
        expect("}");
      } else {
        throw LoproError(loc(peek()), "expected 'param', 'import', 'function' or 'machine', found " + describe(peek()));
      }
    }
    const std::size_t index = program_.units.size();
    for (std::size_t p : own_params) program_.params[p].unit = index;
    program_.units.push_back(std::move(unit));
  }

 private:
  // --- token helpers ---
  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  bool at_eof() const { return peek().kind == Token::Kind::Eof; }
  const Token& next() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
  bool peek_punct(std::string_view p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Punct && peek(ahead).text == p;
  }
  bool peek_word(std::string_view w, std::size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::Ident && peek(ahead).text == w;
  }
  bool accept(std::string_view p) {
    if (peek_punct(p) || peek_word(p)) {
      ++pos_;
      return true;
    }
    return false;
  }
  Loc loc(const Token& t) const { return Loc{file_, t.line, t.col}; }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Token::Kind::Eof: return "end of file";
      case Token::Kind::String: return "string \"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  // Reported just after the previous token so a missing ';' points at the
  // line it belongs to.
  [[noreturn]] void fail_expected(const std::string& what) {
    Loc where = loc(peek());
    if (pos_ > 0) {
      const Token& prev = tokens_[pos_ - 1];
      where = Loc{file_, prev.end_line, prev.end_col};
    }
    throw LoproError(where, "expected " + what + " before " + describe(peek()));
  }

  void expect(std::string_view p) {
    if (!accept(p)) fail_expected("'" + std::string(p) + "'");
  }

  std::string expect_ident(const std::string& what) {
    const Token& t = peek();
    if (t.kind != Token::Kind::Ident) fail_expected(what);
    if (kKeywords.count(t.text)) throw LoproError(loc(t), "'" + t.text + "' is a keyword and cannot be used as " + what);
    ++pos_;
    return t.text;
  }

  // --- top level ---
  void parse_param() {
    const Token& kw = next();
    ParamDecl p;
    p.loc = loc(kw);
    p.name = expect_ident("a param name");
    expect("=");
    p.value_begin = peek().begin;
    p.value = parse_int_expr();
    p.value_end = tokens_[pos_ - 1].end;
    expect(";");
    program_.params.push_back(std::move(p));
  }

  void parse_import(SourceUnit& unit) {
    const Token& kw = next();
    const std::size_t begin = kw.begin;
    const Token& what = next();
    std::string key;
    std::string text;
    std::string name;
    std::filesystem::path dir = dir_;
    if (what.kind == Token::Kind::Ident && what.text == "stdlib") {
      key = "<stdlib>";
      name = "stdlib.lp";
      text = std::string(stdlib_source());
    } else if (what.kind == Token::Kind::String) {
      std::filesystem::path path = dir_ / what.text;
      key = std::filesystem::weakly_canonical(path).string();
      name = path.string();
      dir = path.parent_path();
      if (!std::filesystem::exists(path)) throw LoproError(loc(what), "cannot open import '" + what.text + "'");
      text = read_file(path.string());
    } else {
      throw LoproError(loc(what), "expected 'stdlib' or a quoted file name after 'import'");
    }
    expect(";");
    unit.import_spans.emplace_back(begin, tokens_[pos_ - 1].end);
    for (const auto& a : load_.active) {
      if (a == key) throw LoproError(loc(what), "circular import of '" + name + "'");
    }
    if (!load_.loaded.insert(key).second) return;
    load_.active.push_back(key);
    Parser(program_, load_, text, name, dir, false).run();
    load_.active.pop_back();
  }

  void parse_function() {
    const Token& kw = next();
    Function f;
    f.loc = loc(kw);
    f.name = expect_ident("a function name");
    expect("(");
    if (!peek_punct(")")) {
      do {
        FunctionParam p;
        p.loc = loc(peek());
        if (accept("tape")) {
          p.kind = FunctionParam::Kind::Tape;
          p.name = expect_ident("a parameter name");
          if (accept("(")) {
            p.end = parse_int_expr();
            expect(")");
          }
        } else if (accept("state")) {
          p.kind = FunctionParam::Kind::State;
          p.name = expect_ident("a parameter name");
        } else {
          fail_expected("'tape' or 'state'");
        }
        f.params.push_back(std::move(p));
      } while (accept(","));
    }
    expect(")");
    expect("{");
    f.body = parse_body(true, &f);
    expect("}");
    program_.functions.push_back(std::move(f));
  }

  Body parse_body(bool in_function, Function* f) {
    Body body;
    while (!peek_punct("}") && !at_eof()) {
      if (peek_word("return")) {
        const Token& kw = next();
        if (!in_function) throw LoproError(loc(kw), "'return' outside a function");
        f->returns_loc = loc(peek());
        f->returns = expect_ident("a state name");
        expect(";");
        if (!peek_punct("}")) throw LoproError(loc(peek()), "'return' must be the last statement of a function");
        return body;
      }
      if (accept("tape")) {
        do {
          TapeDecl t;
          t.loc = loc(peek());
          t.name = expect_ident("a tape name");
          expect("(");
          t.end = parse_int_expr();
          expect(")");
          body.tapes.push_back(std::move(t));
        } while (accept(","));
        expect(";");
      } else if (accept("head")) {
        HeadDecl h;
        h.loc = loc(peek());
        h.name = expect_ident("a head name");
        expect("=");
        h.tape = expect_ident("a tape name");
        expect(".");
        expect("head");
        expect(";");
        body.heads.push_back(std::move(h));
      } else if (accept("state")) {
        do {
          StateDecl s;
          s.loc = loc(peek());
          s.name = expect_ident("a state name");
          body.states.push_back(std::move(s));
        } while (accept(","));
        expect(";");
      } else if ((peek_word("input") || peek_word("output")) && peek_word("state", 1)) {
        StateDecl s;
        s.kind = next().text == "input" ? StateKind::Input : StateKind::Output;
        expect("state");
        s.loc = loc(peek());
        s.name = expect_ident("a state name");
        expect("(");
        if (!peek_punct(")")) {
          do {
            s.tapes.push_back(expect_ident("an index tape name"));
          } while (accept(","));
        }
        expect(")");
        expect(";");
        body.states.push_back(std::move(s));
      } else if (peek().kind == Token::Kind::Ident && !kKeywords.count(peek().text)) {
        body.rules.push_back(parse_rule());
      } else {
        throw LoproError(loc(peek()), "expected a declaration or a rule, found " + describe(peek()));
      }
    }
    if (in_function) fail_expected("'return'");
    return body;
  }

  Rule parse_rule() {
    Rule r;
    r.loc = loc(peek());
    r.from = expect_ident("a state name");
    if (accept("when")) {
      expect("(");
      r.when = parse_cond();
      expect(")");
    }
    expect("=");
    r.branches.push_back(parse_branch());
    while (peek_word("and") || peek_word("or")) {
      const Token& op = next();
      const Combinator c = op.text == "and" ? Combinator::And : Combinator::Or;
      if (r.combinator != Combinator::Single && r.combinator != c) {
        throw LoproError(loc(op), "cannot mix 'and' and 'or' in one rule");
      }
      r.combinator = c;
      r.branches.push_back(parse_branch());
    }
    expect(";");
    return r;
  }

  Branch parse_branch() {
    Branch b;
    b.loc = loc(peek());
    b.target.loc = b.loc;
    if (accept("true")) {
      b.target.kind = Target::Kind::True;
    } else if (accept("false")) {
      b.target.kind = Target::Kind::False;
    } else {
      const std::string name = expect_ident("a state, a call, 'true' or 'false'");
      if (peek_punct("(")) {
        b.target.kind = Target::Kind::Call;
        b.target.call = parse_call_rest(name, b.loc);
      } else {
        b.target.kind = Target::Kind::State;
        b.target.name = name;
      }
    }
    if (accept("after")) {
      expect("{");
      while (!peek_punct("}")) {
        if (at_eof()) fail_expected("'}'");
        b.after.push_back(parse_action());
      }
      expect("}");
    }
    return b;
  }

  Call parse_call_rest(const std::string& name, const Loc& at) {
    Call c;
    c.function = name;
    c.loc = at;
    expect("(");
    if (!peek_punct(")")) {
      do {
        Arg a;
        a.loc = loc(peek());
        const std::string arg = expect_ident("an argument");
        if (peek_punct("(")) {
          a.call = std::make_shared<Call>(parse_call_rest(arg, a.loc));
        } else {
          a.name = arg;
        }
        c.args.push_back(std::move(a));
      } while (accept(","));
    }
    expect(")");
    return c;
  }

  Action parse_action() {
    Action a;
    a.loc = loc(peek());
    if (accept("++") || accept("--")) {
      a.kind = Action::Kind::Move;
      a.step = tokens_[pos_ - 1].text == "++" ? 1 : -1;
      a.name = expect_ident("a head name");
    } else if (accept("*")) {
      a.kind = Action::Kind::Write;
      a.name = expect_ident("a head name");
      if (accept("++")) {
        a.step = 1;
      } else if (accept("--")) {
        a.step = -1;
      }
      expect("=");
      a.bit = parse_bit();
    } else {
      a.name = expect_ident("an action");
      if (accept("++") || accept("--")) {
        a.kind = Action::Kind::Move;
        a.step = tokens_[pos_ - 1].text == "++" ? 1 : -1;
      } else if (accept("=")) {
        a.kind = Action::Kind::Assign;
        a.value = parse_int_expr();
      } else {
        fail_expected("'++', '--' or '='");
      }
    }
    expect(";");
    return a;
  }

  int parse_bit() {
    const Token& t = peek();
    if (t.kind != Token::Kind::Int || t.value > 1) fail_expected("0 or 1");
    ++pos_;
    return static_cast<int>(t.value);
  }

  // --- conditions ---
  Cond parse_cond() {
    Cond left = parse_conj();
    while (accept("or") || accept("||")) {
      Cond node;
      node.kind = Cond::Kind::Or;
      node.loc = left.loc;
      node.operands.push_back(std::move(left));
      node.operands.push_back(parse_conj());
      left = std::move(node);
    }
    return left;
  }

  Cond parse_conj() {
    Cond left = parse_unary();
    while (accept("and") || accept("&&")) {
      Cond node;
      node.kind = Cond::Kind::And;
      node.loc = left.loc;
      node.operands.push_back(std::move(left));
      node.operands.push_back(parse_unary());
      left = std::move(node);
    }
    return left;
  }

  Cond parse_unary() {
    const Loc at = loc(peek());
    if (accept("not") || accept("!")) {
      Cond node;
      node.kind = Cond::Kind::Not;
      node.loc = at;
      node.operands.push_back(parse_unary());
      return node;
    }
    if (accept("(")) {
      Cond inner = parse_cond();
      expect(")");
      return inner;
    }
    Cond atom;
    atom.loc = at;
    if (accept("*")) {
      atom.kind = Cond::Kind::Scan;
      atom.name = expect_ident("a head name");
      bool negate = false;
      if (accept("!=")) {
        negate = true;
      } else {
        expect("==");
      }
      atom.bit = parse_bit();
      if (!negate) return atom;
      Cond node;
      node.kind = Cond::Kind::Not;
      node.loc = at;
      node.operands.push_back(std::move(atom));
      return node;
    }
    atom.name = expect_ident("a condition");
    if (accept(".")) {
      if (!accept("is_end")) fail_expected("'is_end'");
      if (accept("(")) expect(")");
      atom.kind = Cond::Kind::IsEnd;
      return atom;
    }
    atom.kind = Cond::Kind::Compare;
    static const std::pair<const char*, RelOp> ops[] = {{"==", RelOp::Eq}, {"!=", RelOp::Ne}, {"<=", RelOp::Le},
                                                        {">=", RelOp::Ge}, {"<", RelOp::Lt},  {">", RelOp::Gt}};
    for (const auto& [text, op] : ops) {
      if (accept(text)) {
        atom.op = op;
        atom.rhs = parse_int_expr();
        return atom;
      }
    }
    fail_expected("a comparison operator or '.is_end'");
  }

  // --- integer expressions ---
  IntExpr parse_int_expr() {
    IntExpr left = parse_term();
    while (peek_punct("+") || peek_punct("-")) {
      const Token& op = next();
      IntExpr node;
      node.kind = op.text == "+" ? IntExpr::Kind::Add : IntExpr::Kind::Sub;
      node.loc = left.loc;
      node.operands.push_back(std::move(left));
      node.operands.push_back(parse_term());
      left = std::move(node);
    }
    return left;
  }

  IntExpr parse_term() {
    IntExpr left = parse_factor();
    while (accept("*")) {
      IntExpr node;
      node.kind = IntExpr::Kind::Mul;
      node.loc = left.loc;
      node.operands.push_back(std::move(left));
      node.operands.push_back(parse_factor());
      left = std::move(node);
    }
    return left;
  }

  IntExpr parse_factor() {
    IntExpr e;
    e.loc = loc(peek());
    if (peek().kind == Token::Kind::Int) {
      e.kind = IntExpr::Kind::Literal;
      e.value = next().value;
      return e;
    }
    if (accept("-")) {
      e.kind = IntExpr::Kind::Neg;
      e.operands.push_back(parse_factor());
      return e;
    }
    if (accept("(")) {
      IntExpr inner = parse_int_expr();
      expect(")");
      return inner;
    }
    e.name = expect_ident("an integer expression");
    e.kind = IntExpr::Kind::Name;
    if (accept(".")) {
      if (!accept("end")) fail_expected("'end'");
      if (accept("(")) expect(")");
      e.kind = IntExpr::Kind::End;
    }
    return e;
  }

  Program& program_;
  LoadState& load_;
  std::string_view text_;
  std::string file_;
  std::filesystem::path dir_;
  bool is_main_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// --- name resolution ---

enum class NameKind { Param, Tape, Head, State, InputState, OutputState, TapeParam, StateParam };

class Resolver {
 public:
  explicit Resolver(const Program& program) : program_(program) {}

  std::vector<Diagnostic> run() {
    std::map<std::string, const Function*> seen;
    for (const auto& f : program_.functions) {
      if (!seen.emplace(f.name, &f).second) error(f.loc, "duplicate function '" + f.name + "'");
    }
    for (const auto& p : program_.params) {
      if (!params_.insert(p.name).second) error(p.loc, "duplicate param '" + p.name + "'");
      check_int(p.value, {}, true);
    }
    if (!program_.machine) {
      const std::string file = program_.units.empty() ? "<input>" : program_.units.back().name;
      error(Loc{file, 1, 1}, "missing machine block");
      return diags_;
    }
    for (const auto& f : program_.functions) check_function(f);
    Names machine_names;
    check_body(*program_.machine, machine_names, true, program_.machine_loc);
    return diags_;
  }

 private:
  using Names = std::map<std::string, NameKind>;

  void error(const Loc& loc, std::string msg) { diags_.push_back(Diagnostic{loc, std::move(msg)}); }

  void declare(Names& names, const std::string& name, NameKind kind, const Loc& loc) {
    if (params_.count(name)) {
      error(loc, "'" + name + "' is already declared as a param");
      return;
    }
    if (!names.emplace(name, kind).second) error(loc, "duplicate name '" + name + "'");
  }

  static bool is_tape(const Names& names, const std::string& n) {
    auto it = names.find(n);
    return it != names.end() && (it->second == NameKind::Tape || it->second == NameKind::TapeParam);
  }
  static bool is_state(const Names& names, const std::string& n) {
    auto it = names.find(n);
    if (it == names.end()) return false;
    return it->second == NameKind::State || it->second == NameKind::InputState ||
           it->second == NameKind::OutputState || it->second == NameKind::StateParam;
  }

  void check_function(const Function& f) {
    Names names;
    for (const auto& p : f.params) {
      declare(names, p.name, p.kind == FunctionParam::Kind::Tape ? NameKind::TapeParam : NameKind::StateParam, p.loc);
      if (p.end) check_int(*p.end, names, false);
    }
    check_body(f.body, names, false, f.loc);
    auto it = names.find(f.returns);
    if (f.returns.empty()) {
      error(f.loc, "function '" + f.name + "' has no return");
    } else if (it == names.end()) {
      error(f.returns_loc, "unknown state '" + f.returns + "'");
    } else if (it->second != NameKind::State) {
      error(f.returns_loc, "'" + f.returns + "' must be a state declared in function '" + f.name + "'");
    }
  }

  void check_body(const Body& body, Names& names, bool is_machine, const Loc& where) {
    for (const auto& t : body.tapes) declare(names, t.name, NameKind::Tape, t.loc);
    for (const auto& h : body.heads) declare(names, h.name, NameKind::Head, h.loc);
    int outputs = 0;
    int inputs = 0;
    for (const auto& s : body.states) {
      NameKind kind = NameKind::State;
      if (s.kind != StateKind::Plain) {
        if (!is_machine) {
          error(s.loc, std::string(s.kind == StateKind::Input ? "input" : "output") +
                           " states may only be declared in the machine block");
        }
        kind = s.kind == StateKind::Input ? NameKind::InputState : NameKind::OutputState;
        (s.kind == StateKind::Input ? inputs : outputs) += 1;
        if (s.kind == StateKind::Input && inputs > 1) error(s.loc, "more than one input state");
        if (s.kind == StateKind::Output && outputs > 1) error(s.loc, "more than one output state");
      }
      declare(names, s.name, kind, s.loc);
    }
    if (is_machine && outputs == 0) error(where, "machine block declares no output state");
    // Tape ends may refer to earlier tapes.
    for (const auto& t : body.tapes) check_int(t.end, names, false);
    for (const auto& h : body.heads) {
      if (!is_tape(names, h.tape)) error(h.loc, "'" + h.tape + "' is not a tape");
    }
    for (const auto& s : body.states) {
      std::set<std::string> distinct;
      for (const auto& t : s.tapes) {
        if (!is_tape(names, t)) error(s.loc, "'" + t + "' is not a tape");
        if (!distinct.insert(t).second) error(s.loc, "tape '" + t + "' listed twice");
      }
    }
    for (const auto& r : body.rules) check_rule(r, names);
  }

  void check_rule(const Rule& r, const Names& names) {
    auto it = names.find(r.from);
    if (it == names.end()) {
      error(r.loc, "unknown state '" + r.from + "'");
    } else if (it->second == NameKind::InputState) {
      error(r.loc, "the input state is a leaf and cannot have rules");
    } else if (it->second == NameKind::StateParam) {
      error(r.loc, "rules may only be given for states declared in this scope, '" + r.from + "' is a parameter");
    } else if (it->second != NameKind::State && it->second != NameKind::OutputState) {
      error(r.loc, "'" + r.from + "' is not a state");
    }
    if (r.when) check_cond(*r.when, names);
    for (const auto& b : r.branches) {
      if (b.target.kind == Target::Kind::State && !is_state(names, b.target.name)) {
        error(b.target.loc, names.count(b.target.name) ? "'" + b.target.name + "' is not a state"
                                                       : "unknown state '" + b.target.name + "'");
      }
      if (b.target.kind == Target::Kind::Call) check_call(b.target.call, names);
      for (const auto& a : b.after) check_action(a, names);
    }
  }

  void check_call(const Call& c, const Names& names) {
    const Function* f = program_.find_function(c.function);
    if (!f) {
      error(c.loc, "unknown function '" + c.function + "'");
      return;
    }
    if (f->params.size() != c.args.size()) {
      error(c.loc, "function '" + c.function + "' takes " + std::to_string(f->params.size()) + " arguments, got " +
                       std::to_string(c.args.size()));
      return;
    }
    for (std::size_t i = 0; i < c.args.size(); ++i) {
      const Arg& a = c.args[i];
      const bool want_tape = f->params[i].kind == FunctionParam::Kind::Tape;
      if (a.call) {
        if (want_tape) error(a.loc, "argument " + std::to_string(i + 1) + " of '" + c.function + "' must be a tape");
        check_call(*a.call, names);
      } else if (!names.count(a.name)) {
        error(a.loc, "unknown name '" + a.name + "'");
      } else if (want_tape && !is_tape(names, a.name)) {
        error(a.loc, "argument " + std::to_string(i + 1) + " of '" + c.function + "' must be a tape");
      } else if (!want_tape && !is_state(names, a.name)) {
        error(a.loc, "argument " + std::to_string(i + 1) + " of '" + c.function + "' must be a state");
      }
    }
  }

  void check_head(const std::string& name, const Names& names, const Loc& loc) {
    auto it = names.find(name);
    if (it == names.end()) {
      error(loc, "unknown head '" + name + "'");
    } else if (it->second != NameKind::Head) {
      error(loc, "'" + name + "' is not a head");
    }
  }

  void check_cond(const Cond& c, const Names& names) {
    switch (c.kind) {
      case Cond::Kind::Or:
      case Cond::Kind::And:
      case Cond::Kind::Not:
        for (const auto& o : c.operands) check_cond(o, names);
        break;
      case Cond::Kind::IsEnd:
      case Cond::Kind::Scan:
        check_head(c.name, names, c.loc);
        break;
      case Cond::Kind::Compare:
        if (!is_tape(names, c.name)) {
          error(c.loc, names.count(c.name) || params_.count(c.name) ? "left side of a comparison must be a tape"
                                                                    : "unknown tape '" + c.name + "'");
        }
        check_value(c.rhs, names);
        break;
    }
  }

  void check_action(const Action& a, const Names& names) {
    if (a.kind == Action::Kind::Assign) {
      if (!is_tape(names, a.name)) {
        error(a.loc, names.count(a.name) ? "'" + a.name + "' is not a tape" : "unknown tape '" + a.name + "'");
      }
      check_value(a.value, names);
    } else {
      check_head(a.name, names, a.loc);
    }
  }

  // Right side of a comparison or assignment: a bare tape or an int_expr.
  void check_value(const IntExpr& e, const Names& names) {
    if (e.kind == IntExpr::Kind::Name && is_tape(names, e.name)) return;
    check_int(e, names, false);
  }

  void check_int(const IntExpr& e, const Names& names, bool params_only) {
    switch (e.kind) {
      case IntExpr::Kind::Literal: break;
      case IntExpr::Kind::Name:
        if (!params_.count(e.name)) {
          error(e.loc, is_tape(names, e.name) ? "tape '" + e.name + "' used as a number; write '" + e.name + ".end'"
                                              : "unknown param '" + e.name + "'");
        }
        break;
      case IntExpr::Kind::End:
        if (params_only || !is_tape(names, e.name)) error(e.loc, "unknown tape '" + e.name + "'");
        break;
      default:
        for (const auto& o : e.operands) check_int(o, names, params_only);
    }
  }

  const Program& program_;
  std::set<std::string> params_;
  std::vector<Diagnostic> diags_;
};

Program parse_with_dir(std::string_view source, const std::string& filename, const std::filesystem::path& dir) {
  Program program;
  LoadState load;
  Parser(program, load, source, filename, dir, true).run();
  auto diags = Resolver(program).run();
  if (!diags.empty()) throw LoproError(std::move(diags));
  return program;
}

}  // namespace

Program parse(std::string_view source, const std::string& filename) {
  return parse_with_dir(source, filename, std::filesystem::path(filename).parent_path());
}

Program parse_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw LoproError(Loc{path, 0, 0}, "cannot open source file");
  return parse(read_file(path), path);
}

bool looks_like_lopro(std::string_view text) {
  try {
    auto tokens = Lexer(text, "").run();
    static const std::set<std::string> starts = {"param", "import", "function", "machine"};
    return tokens.front().kind == Token::Kind::Ident && starts.count(tokens.front().text);
  } catch (const LoproError&) {
    return false;
  }
}

namespace {

std::string render_int(std::int64_t v) { return std::to_string(v); }

}  // namespace

std::string bundle(const Program& program, const std::map<std::string, std::int64_t>& overrides) {
  for (const auto& [name, value] : overrides) {
    bool known = false;
    for (const auto& p : program.params) known |= p.name == name;
    if (!known) throw LoproError(Loc{"<params>", 0, 0}, "no param named '" + name + "'");
  }
  std::string out;
  for (std::size_t u = 0; u < program.units.size(); ++u) {
    const SourceUnit& unit = program.units[u];
    // Edits sorted by position: imports removed, overridden params rewritten.
    std::vector<std::tuple<std::size_t, std::size_t, std::string>> edits;
    for (const auto& [b, e] : unit.import_spans) edits.emplace_back(b, e, "");
    for (const auto& p : program.params) {
      auto it = overrides.find(p.name);
      if (p.unit == u && it != overrides.end()) edits.emplace_back(p.value_begin, p.value_end, render_int(it->second));
    }
    std::sort(edits.begin(), edits.end());
    std::string text;
    std::size_t at = 0;
    for (const auto& [b, e, replacement] : edits) {
      text += unit.text.substr(at, b - at);
      text += replacement;
      at = e;
    }
    text += unit.text.substr(at);
    if (u + 1 < program.units.size()) out += "// ---- " + unit.name + " ----\n";
    out += text;
    if (!out.empty() && out.back() != '\n') out += "\n";
  }
  return out;
}

}  // namespace ptm::lopro

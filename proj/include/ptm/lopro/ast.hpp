#pragma once

// Syntax tree for Lopro sources.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptm::lopro {

struct Loc {
  std::string file;
  int line = 0;
  int col = 0;
};

struct Diagnostic {
  Loc loc;
  std::string message;

  std::string format() const;
};

// Every front-end failure. what() lists the diagnostics one per line as
// file:line:col: message.
class LoproError : public std::runtime_error {
 public:
  explicit LoproError(std::vector<Diagnostic> diagnostics);
  LoproError(const Loc& loc, const std::string& message) : LoproError(std::vector<Diagnostic>{{loc, message}}) {}
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

struct IntExpr {
  enum class Kind { Literal, Name, End, Add, Sub, Mul, Neg };
  Kind kind = Kind::Literal;
  std::int64_t value = 0;
  std::string name;  // Name: a param or a tape; End: the tape
  std::vector<IntExpr> operands;
  Loc loc;
};

enum class RelOp { Eq, Ne, Lt, Le, Gt, Ge };
const char* relop_text(RelOp op);

struct Cond {
  enum class Kind { Or, And, Not, IsEnd, Scan, Compare };
  Kind kind = Kind::IsEnd;
  std::vector<Cond> operands;  // Or/And/Not
  std::string name;            // head for IsEnd/Scan, tape for Compare
  int bit = 0;                 // Scan
  RelOp op = RelOp::Eq;        // Compare
  IntExpr rhs;                 // Compare; a bare tape name compares two tapes
  Loc loc;
};

struct Action {
  enum class Kind { Move, Write, Assign };
  Kind kind = Kind::Move;
  std::string name;  // head for Move/Write, tape for Assign
  int step = 0;      // Move: +1/-1; Write: move after writing, 0/+1/-1
  int bit = 0;       // Write
  IntExpr value;     // Assign; a bare tape name copies that tape
  Loc loc;
};

struct Call;

struct Arg {
  std::string name;
  std::shared_ptr<Call> call;  // set when the argument is itself a call
  Loc loc;
};

struct Call {
  std::string function;
  std::vector<Arg> args;
  Loc loc;
};

struct Target {
  enum class Kind { True, False, State, Call };
  Kind kind = Kind::State;
  std::string name;
  Call call;
  Loc loc;
};

struct Branch {
  Target target;
  std::vector<Action> after;
  Loc loc;
};

enum class Combinator { Single, And, Or };

struct Rule {
  std::string from;
  std::optional<Cond> when;
  std::vector<Branch> branches;
  Combinator combinator = Combinator::Single;
  Loc loc;
};

struct TapeDecl {
  std::string name;
  IntExpr end;
  Loc loc;
};

struct HeadDecl {
  std::string name;
  std::string tape;
  Loc loc;
};

enum class StateKind { Plain, Input, Output };

struct StateDecl {
  std::string name;
  StateKind kind = StateKind::Plain;
  std::vector<std::string> tapes;  // index tapes of input/output states
  Loc loc;
};

struct Body {
  std::vector<TapeDecl> tapes;
  std::vector<HeadDecl> heads;
  std::vector<StateDecl> states;
  std::vector<Rule> rules;
};

struct FunctionParam {
  enum class Kind { Tape, State };
  Kind kind = Kind::Tape;
  std::string name;
  std::optional<IntExpr> end;  // required end of a tape argument
  Loc loc;
};

struct Function {
  std::string name;
  std::vector<FunctionParam> params;
  Body body;
  std::string returns;
  Loc loc;
  Loc returns_loc;
};

struct ParamDecl {
  std::string name;
  IntExpr value;
  Loc loc;
  std::size_t unit = 0;  // source unit holding the declaration
  std::size_t value_begin = 0;
  std::size_t value_end = 0;
};

// One source text that contributed to the program, with the byte spans the
// bundler rewrites.
struct SourceUnit {
  std::string name;
  std::string text;
  std::vector<std::pair<std::size_t, std::size_t>> import_spans;
};

struct Program {
  std::vector<ParamDecl> params;
  std::vector<Function> functions;
  std::optional<Body> machine;
  Loc machine_loc;
  std::vector<SourceUnit> units;  // imports first, in load order; the main source last

  const Function* find_function(const std::string& name) const;
};

}  // namespace ptm::lopro

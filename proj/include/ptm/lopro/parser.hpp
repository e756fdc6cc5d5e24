#pragma once

// Lopro front end: tokenizer, recursive-descent parser and name resolution.
//
// Grammar (EBNF). `//` and `/* */` comments are ignored.
//
//   program   = { param | import | function | machine } ;      exactly one machine
//   param     = "param" IDENT "=" int_expr ";" ;
//   import    = "import" ( "stdlib" | STRING ) ";" ;
//   function  = "function" IDENT "(" [ fparam { "," fparam } ] ")"
//               "{" body "return" IDENT ";" "}" ;
//   fparam    = "tape" IDENT [ "(" int_expr ")" ] | "state" IDENT ;
//   machine   = "machine" "{" body "}" ;
//   body      = { decl | rule } ;
//   decl      = "tape" IDENT "(" int_expr ")" { "," IDENT "(" int_expr ")" } ";"
//             | "head" IDENT "=" IDENT "." "head" ";"
//             | "state" IDENT { "," IDENT } ";"
//             | ( "input" | "output" ) "state" IDENT "(" [ IDENT { "," IDENT } ] ")" ";" ;
//   rule      = IDENT [ "when" "(" cond ")" ] "=" branch { ( "and" | "or" ) branch } ";" ;
//   branch    = target [ "after" "{" { action } "}" ] ;
//   target    = "true" | "false" | IDENT | call ;
//   call      = IDENT "(" [ arg { "," arg } ] ")" ;
//   arg       = IDENT | call ;
//   action    = ( ( "++" | "--" ) IDENT | IDENT ( "++" | "--" )
//               | "*" IDENT [ "++" | "--" ] "=" BIT
//               | IDENT "=" int_expr ) ";" ;
//   cond      = conj { ( "or" | "||" ) conj } ;
//   conj      = unary { ( "and" | "&&" ) unary } ;
//   unary     = ( "not" | "!" ) unary | "(" cond ")" | atom ;
//   atom      = IDENT "." "is_end" [ "(" ")" ]
//             | "*" IDENT ( "==" | "!=" ) BIT
//             | IDENT relop int_expr ;
//   relop     = "==" | "!=" | "<" | "<=" | ">" | ">=" ;
//   int_expr  = term { ( "+" | "-" ) term } ;
//   term      = factor { "*" factor } ;
//   factor    = INT | "-" factor | "(" int_expr ")" | IDENT [ "." "end" [ "(" ")" ] ] ;
//
// `input` and `output` are keywords only when followed by `state`.
// A bare tape name on the right of a comparison or assignment refers to the
// tape's contents; anywhere else in an int_expr a name must be a param.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "ptm/lopro/ast.hpp"

namespace ptm::lopro {

// Parses and resolves names. Imports are loaded relative to the directory of
// `filename`; `import stdlib;` uses the built-in library.
Program parse(std::string_view source, const std::string& filename = "<input>");
Program parse_file(const std::string& path);

// Source of the built-in library shipping Exists and All.
std::string_view stdlib_source();

// True when `text` looks like Lopro rather than the machine file format.
bool looks_like_lopro(std::string_view text);

// Single self-contained source: imports inlined ahead of the main source,
// param values replaced by `overrides` where given.
std::string bundle(const Program& program, const std::map<std::string, std::int64_t>& overrides = {});

}  // namespace ptm::lopro

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "phever/jet.hpp"

namespace phever {

// Grammar (whitespace insensitive):
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number ['i'] | 'i' | ident | fn '(' expr ')' | 'pow' '(' expr ',' expr ')' | '(' expr ')'
//   number := digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
//   fn     := exp | ln | sqrt | sin | cos
class Expr {
 public:
  enum class Kind { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
  struct Node;

  Expr();
  static Expr parse(const std::string& text, const std::vector<std::string>& vars = {"w"});
  static Expr number(cplx v, const std::vector<std::string>& vars = {"w"});

  const std::vector<std::string>& vars() const { return vars_; }
  std::string print() const;

  // Arguments are jets of the declared variables, in order.
  Jet eval(const std::vector<Jet>& args) const;
  Jet eval_jet(cplx at, int order) const;
  cplx eval(const std::vector<cplx>& at) const;
  cplx eval(cplx at) const;

  bool depends_on(std::size_t var) const;
  bool operator==(const Expr& o) const;

 private:
  std::shared_ptr<const Node> root_;
  std::vector<std::string> vars_;
};

struct Expr::Node {
  Kind kind;
  cplx num = 0;
  std::size_t var = 0;
  std::string fn;
  std::vector<std::shared_ptr<const Node>> kids;
};

}  // namespace phever

#include "phever/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace phever {

using NodeP = std::shared_ptr<const Expr::Node>;

namespace {

const std::vector<std::string> kUnary = {"exp", "ln", "sqrt", "sin", "cos"};

NodeP mk(Expr::Kind k, std::vector<NodeP> kids = {}) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->kids = std::move(kids);
  return n;
}

NodeP mk_num(cplx v) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = Expr::Kind::Num;
  n->num = v;
  return n;
}

class Parser {
 public:
  Parser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  NodeP run() {
    NodeP e = expr();
    skip();
    if (pos_ < s_.size()) fail({"+", "-", "*", "/", "^", "end of input"});
    return e;
  }

 private:
  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    std::string found = pos_ < s_.size() ? "'" + std::string(1, s_[pos_]) + "'" : "end of input";
    throw SyntaxError(pos_, std::move(expected), found);
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail({std::string(1, c)});
  }

  NodeP expr() {
    NodeP l = term();
    for (;;) {
      if (accept('+')) l = mk(Expr::Kind::Add, {l, term()});
      else if (accept('-')) l = mk(Expr::Kind::Sub, {l, term()});
      else return l;
    }
  }

  NodeP term() {
    NodeP l = unary();
    for (;;) {
      if (accept('*')) l = mk(Expr::Kind::Mul, {l, unary()});
      else if (accept('/')) l = mk(Expr::Kind::Div, {l, unary()});
      else return l;
    }
  }

  NodeP unary() {
    if (accept('-')) return mk(Expr::Kind::Neg, {unary()});
    return power();
  }

  NodeP power() {
    NodeP b = atom();
    if (accept('^')) return mk(Expr::Kind::Pow, {b, unary()});
    return b;
  }

  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  NodeP atom() {
    skip();
    if (pos_ >= s_.size()) fail({"number", "identifier", "(", "-"});
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      if (id == "i") return mk_num(cplx(0, 1));
      auto v = std::find(vars_.begin(), vars_.end(), id);
      if (v != vars_.end()) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Kind::Var;
        n->var = static_cast<std::size_t>(v - vars_.begin());
        return n;
      }
      bool unary_fn = std::find(kUnary.begin(), kUnary.end(), id) != kUnary.end();
      if (!unary_fn && id != "pow") throw UnknownIdentifier(start, id);
      expect('(');
      auto n = std::make_shared<Expr::Node>();
      n->kind = Expr::Kind::Call;
      n->fn = id;
      n->kids.push_back(expr());
      if (id == "pow") {
        expect(',');
        n->kids.push_back(expr());
      }
      expect(')');
      return n;
    }
    if (c == '(') {
      ++pos_;
      NodeP e = expr();
      expect(')');
      return e;
    }
    fail({"number", "identifier", "(", "-"});
  }

  NodeP number() {
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t d0 = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      return pos_ - d0;
    };
    std::size_t nd = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) {
      pos_ = start;
      fail({"digit"});
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double v = 0;
    auto r = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (r.ec != std::errc() || r.ptr != s_.data() + pos_) {
      pos_ = start;
      fail({"number"});
    }
    if (pos_ < s_.size() && s_[pos_] == 'i' && (pos_ + 1 >= s_.size() || !ident_char(s_[pos_ + 1]))) {
      ++pos_;
      return mk_num(cplx(0, v));
    }
    return mk_num(cplx(v, 0));
  }
};

int prec(const Expr::Node& n) {
  switch (n.kind) {
    case Expr::Kind::Add:
    case Expr::Kind::Sub: return 1;
    case Expr::Kind::Mul:
    case Expr::Kind::Div: return 2;
    case Expr::Kind::Neg: return 3;
    case Expr::Kind::Pow: return 4;
    case Expr::Kind::Num:
      return (n.num.real() != 0 && n.num.imag() != 0) || n.num.real() < 0 || n.num.imag() < 0 ? 0 : 5;
    default: return 5;
  }
}

std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string print_num(cplx v) {
  if (v.imag() == 0 && v.real() >= 0) return fmt(v.real());
  if (v.real() == 0 && v.imag() > 0) return v.imag() == 1 ? "i" : fmt(v.imag()) + "i";
  std::string s = "(" + fmt(v.real());
  s += v.imag() < 0 ? "-" : "+";
  s += fmt(std::abs(v.imag())) + "i)";
  return s;
}

std::string print(const Expr::Node& n, const std::vector<std::string>& vars);

std::string wrap(const Expr::Node& n, const std::vector<std::string>& vars, bool paren) {
  std::string s = print(n, vars);
  return paren ? "(" + s + ")" : s;
}

std::string print(const Expr::Node& n, const std::vector<std::string>& vars) {
  using K = Expr::Kind;
  int p = prec(n);
  switch (n.kind) {
    case K::Num: return print_num(n.num);
    case K::Var: return vars[n.var];
    case K::Neg: return "-" + wrap(*n.kids[0], vars, prec(*n.kids[0]) < 3);
    case K::Pow: return wrap(*n.kids[0], vars, prec(*n.kids[0]) <= 4) + "^" + wrap(*n.kids[1], vars, prec(*n.kids[1]) < 3);
    case K::Call: {
      std::string s = n.fn + "(" + print(*n.kids[0], vars);
      if (n.kids.size() > 1) s += ", " + print(*n.kids[1], vars);
      return s + ")";
    }
    default: {
      const char* op = n.kind == K::Add ? " + " : n.kind == K::Sub ? " - " : n.kind == K::Mul ? "*" : "/";
      return wrap(*n.kids[0], vars, prec(*n.kids[0]) < p) + op + wrap(*n.kids[1], vars, prec(*n.kids[1]) <= p);
    }
  }
}

bool constant(const Expr::Node& n) {
  if (n.kind == Expr::Kind::Var) return false;
  return std::all_of(n.kids.begin(), n.kids.end(), [](const NodeP& k) { return constant(*k); });
}

bool depends(const Expr::Node& n, std::size_t v) {
  if (n.kind == Expr::Kind::Var) return n.var == v;
  return std::any_of(n.kids.begin(), n.kids.end(), [v](const NodeP& k) { return depends(*k, v); });
}

bool same(const Expr::Node& a, const Expr::Node& b) {
  if (a.kind != b.kind || a.num != b.num || a.var != b.var || a.fn != b.fn || a.kids.size() != b.kids.size())
    return false;
  for (std::size_t k = 0; k < a.kids.size(); ++k)
    if (!same(*a.kids[k], *b.kids[k])) return false;
  return true;
}

Jet ev(const Expr::Node& n, const std::vector<Jet>& args) {
  using K = Expr::Kind;
  const Jet& a0 = args[0];
  switch (n.kind) {
    case K::Num: return Jet::constant(n.num, a0.nvars(), a0.order());
    case K::Var: return args[n.var];
    case K::Neg: return -ev(*n.kids[0], args);
    case K::Add: return ev(*n.kids[0], args) + ev(*n.kids[1], args);
    case K::Sub: return ev(*n.kids[0], args) - ev(*n.kids[1], args);
    case K::Mul: return ev(*n.kids[0], args) * ev(*n.kids[1], args);
    case K::Div: return ev(*n.kids[0], args) / ev(*n.kids[1], args);
    case K::Pow: {
      Jet b = ev(*n.kids[0], args);
      if (constant(*n.kids[1])) return pow(b, ev(*n.kids[1], args).value());
      return exp(ev(*n.kids[1], args) * log(b));
    }
    case K::Call: {
      Jet x = ev(*n.kids[0], args);
      if (n.fn == "exp") return exp(x);
      if (n.fn == "ln") return log(x);
      if (n.fn == "sqrt") return sqrt(x);
      if (n.fn == "sin") return sin(x);
      if (n.fn == "cos") return cos(x);
      const Expr::Node& e = *n.kids[1];
      if (constant(e)) return pow(x, ev(e, args).value());
      return exp(ev(e, args) * log(x));
    }
  }
  throw InvalidArgument("corrupt expression node");
}

}  // namespace

Expr::Expr() : root_(mk_num(0.0)), vars_{"w"} {}

Expr Expr::parse(const std::string& text, const std::vector<std::string>& vars) {
  if (vars.empty()) throw InvalidArgument("expression needs at least one declared variable");
  for (const auto& v : vars)
    if (v == "i" || v == "pow" || std::find(kUnary.begin(), kUnary.end(), v) != kUnary.end())
      throw InvalidArgument("reserved name used as variable: " + v);
  Expr e;
  e.vars_ = vars;
  e.root_ = Parser(text, e.vars_).run();
  return e;
}

Expr Expr::number(cplx v, const std::vector<std::string>& vars) {
  Expr e;
  e.vars_ = vars;
  e.root_ = mk_num(v);
  return e;
}

std::string Expr::print() const { return phever::print(*root_, vars_); }

Jet Expr::eval(const std::vector<Jet>& args) const {
  if (args.size() != vars_.size()) throw InvalidArgument("expression argument count mismatch");
  return ev(*root_, args);
}

Jet Expr::eval_jet(cplx at, int order) const {
  if (order < 0) throw InvalidArgument("negative jet order");
  if (vars_.size() != 1) throw InvalidArgument("eval_jet needs a single-variable expression");
  return ev(*root_, {Jet::variable(at, 0, 1, order)});
}

cplx Expr::eval(const std::vector<cplx>& at) const {
  std::vector<Jet> args;
  for (std::size_t k = 0; k < at.size(); ++k) args.push_back(Jet::constant(at[k], 1, 0));
  return eval(args).value();
}

cplx Expr::eval(cplx at) const { return eval(std::vector<cplx>{at}); }

bool Expr::depends_on(std::size_t var) const { return depends(*root_, var); }

bool Expr::operator==(const Expr& o) const { return vars_ == o.vars_ && same(*root_, *o.root_); }

}  // namespace phever

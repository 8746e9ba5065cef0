#include "hypstab/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

#include "hypstab/error.hpp"

namespace hypstab {

struct Expr::Node {
  Op op = Op::kLiteral;
  double value = 0.0;
  VarRef var{};
  std::vector<Expr> args;
};

struct Expr::Program {
  struct Instr {
    Op op;
    double value;
    VarRef var;
  };
  std::vector<Instr> code;
  std::size_t max_stack = 0;
};

const char* op_name(Expr::Op op) {
  switch (op) {
    case Expr::Op::kLiteral: return "literal";
    case Expr::Op::kVariable: return "variable";
    case Expr::Op::kAdd: return "+";
    case Expr::Op::kSub: return "-";
    case Expr::Op::kMul: return "*";
    case Expr::Op::kDiv: return "/";
    case Expr::Op::kPow: return "^";
    case Expr::Op::kNeg: return "neg";
    case Expr::Op::kSin: return "sin";
    case Expr::Op::kCos: return "cos";
    case Expr::Op::kExp: return "exp";
    case Expr::Op::kTanh: return "tanh";
  }
  return "?";
}

std::string variable_name(VarRef var) {
  switch (var.kind) {
    case VarKind::kX: return "x" + std::to_string(var.index + 1);
    case VarKind::kT: return "t";
    case VarKind::kU: return "u" + std::to_string(var.index + 1);
    case VarKind::kEps: return "eps";
  }
  return "?";
}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {
  // Postfix program: children's programs followed by this node.
  auto program = std::make_shared<Program>();
  std::size_t offset = 0;
  for (const auto& a : node_->args) {
    const Program& child = *a.program_;
    program->code.insert(program->code.end(), child.code.begin(), child.code.end());
    program->max_stack = std::max(program->max_stack, offset + child.max_stack);
    ++offset;
  }
  program->code.push_back({node_->op, node_->value, node_->var});
  program->max_stack = std::max<std::size_t>(program->max_stack, 1);
  program_ = std::move(program);
}

Expr Expr::literal(double value) {
  auto n = std::make_shared<Node>();
  n->op = Op::kLiteral;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(VarRef var) {
  auto n = std::make_shared<Node>();
  n->op = Op::kVariable;
  n->var = var;
  return Expr(std::move(n));
}

Expr Expr::unary(Op op, Expr arg) {
  // Negated literals are stored as literals so that printed text parses back identically.
  if (op == Op::kNeg && arg.op() == Op::kLiteral) return literal(-arg.value());
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args.push_back(std::move(arg));
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args.push_back(std::move(lhs));
  n->args.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr::Op Expr::op() const { return node_->op; }
double Expr::value() const { return node_->value; }
VarRef Expr::var() const { return node_->var; }
const Expr& Expr::lhs() const { return node_->args.at(0); }
const Expr& Expr::rhs() const { return node_->args.at(1); }

double Expr::eval(const EvalPoint& at) const {
  std::array<double, 32> small{};
  std::vector<double> large;
  double* stack = small.data();
  if (program_->max_stack > small.size()) {
    large.resize(program_->max_stack);
    stack = large.data();
  }
  std::size_t top = 0;
  for (const auto& ins : program_->code) {
    switch (ins.op) {
      case Op::kLiteral:
        stack[top++] = ins.value;
        break;
      case Op::kVariable: {
        double v = 0.0;
        const auto idx = static_cast<std::size_t>(ins.var.index);
        switch (ins.var.kind) {
          case VarKind::kX:
            if (idx >= at.x.size()) throw DimensionError("x" + std::to_string(idx + 1) + " not bound");
            v = at.x[idx];
            break;
          case VarKind::kU:
            if (idx >= at.u.size()) throw DimensionError("u" + std::to_string(idx + 1) + " not bound");
            v = at.u[idx];
            break;
          case VarKind::kT: v = at.t; break;
          case VarKind::kEps: v = at.eps; break;
        }
        stack[top++] = v;
        break;
      }
      case Op::kNeg: stack[top - 1] = -stack[top - 1]; break;
      case Op::kSin: stack[top - 1] = std::sin(stack[top - 1]); break;
      case Op::kCos: stack[top - 1] = std::cos(stack[top - 1]); break;
      case Op::kExp: stack[top - 1] = std::exp(stack[top - 1]); break;
      case Op::kTanh: stack[top - 1] = std::tanh(stack[top - 1]); break;
      default: {
        const double b = stack[--top];
        const double a = stack[top - 1];
        double r = 0.0;
        switch (ins.op) {
          case Op::kAdd: r = a + b; break;
          case Op::kSub: r = a - b; break;
          case Op::kMul: r = a * b; break;
          case Op::kDiv:
            if (b == 0.0) throw EvalError("division by zero");
            r = a / b;
            break;
          case Op::kPow: r = std::pow(a, b); break;
          default: break;
        }
        stack[top - 1] = r;
      }
    }
  }
  const double result = stack[0];
  if (!std::isfinite(result)) throw EvalError("expression evaluated to a non-finite value");
  return result;
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::kLiteral: {
      std::array<char, 64> buf{};
      auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
      std::string s(buf.data(), end);
      return n.value < 0 ? "(-" + s.substr(1) + ")" : s;
    }
    case Op::kVariable: return variable_name(n.var);
    case Op::kNeg: return "(-" + n.args[0].to_string() + ")";
    case Op::kSin:
    case Op::kCos:
    case Op::kExp:
    case Op::kTanh: return std::string(op_name(n.op)) + "(" + n.args[0].to_string() + ")";
    default:
      return "(" + n.args[0].to_string() + " " + op_name(n.op) + " " + n.args[1].to_string() + ")";
  }
}

bool Expr::same_tree(const Expr& other) const {
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == Op::kLiteral) return a.value == b.value;
  if (a.op == Op::kVariable) return a.var == b.var;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!a.args[i].same_tree(b.args[i])) return false;
  }
  return true;
}

bool Expr::references(VarKind kind) const {
  for (const auto& ins : program_->code) {
    if (ins.op == Op::kVariable && ins.var.kind == kind) return true;
  }
  return false;
}

std::optional<double> Expr::as_literal() const {
  if (node_->op == Op::kLiteral) return node_->value;
  return std::nullopt;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const VariableSet& vars) : text_(text), vars_(vars) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= text_.size()) fail("empty expression");
    Expr e = parse_sum();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected token");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what, pos_, current_token());
  }

  std::string current_token() const {
    if (pos_ >= text_.size()) return {};
    std::size_t end = pos_;
    if (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '.' || text_[end] == '_') {
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '.' || text_[end] == '_')) {
        ++end;
      }
    } else {
      ++end;
    }
    return std::string(text_.substr(pos_, end - pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Expr::Op::kAdd, std::move(lhs), parse_product());
      } else if (accept('-')) {
        lhs = Expr::binary(Expr::Op::kSub, std::move(lhs), parse_product());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Expr::Op::kMul, std::move(lhs), parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Expr::Op::kDiv, std::move(lhs), parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::unary(Expr::Op::kNeg, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return Expr::binary(Expr::Op::kPow, std::move(base), parse_unary());
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("expected operand");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail("expected operand");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t k = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++k;
      }
      return k;
    };
    std::size_t mantissa = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) {
        pos_ = save;
        fail("malformed exponent");
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
      pos_ = start;
      fail("number out of range");
    }
    return Expr::literal(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    static constexpr std::pair<std::string_view, Expr::Op> kFunctions[] = {
        {"sin", Expr::Op::kSin}, {"cos", Expr::Op::kCos}, {"exp", Expr::Op::kExp}, {"tanh", Expr::Op::kTanh}};
    for (const auto& [fname, op] : kFunctions) {
      if (name == fname) {
        if (!accept('(')) fail("expected '(' after function name");
        Expr arg = parse_sum();
        if (!accept(')')) fail("expected ')'");
        return Expr::unary(op, std::move(arg));
      }
    }
    if (auto var = resolve(name)) return Expr::variable(*var);
    pos_ = start;
    throw ParseError("unknown identifier '" + std::string(name) + "'", start, std::string(name));
  }

  std::optional<VarRef> resolve(std::string_view name) const {
    if (name == "t") return vars_.allow_t ? std::optional<VarRef>(VarRef{VarKind::kT, 0}) : std::nullopt;
    if (name == "eps") return vars_.allow_eps ? std::optional<VarRef>(VarRef{VarKind::kEps, 0}) : std::nullopt;
    auto indexed = [&](char prefix, int limit, VarKind kind) -> std::optional<VarRef> {
      if (name.size() < 2 || name[0] != prefix || name[1] == '0') return std::nullopt;
      int idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec != std::errc() || ptr != name.data() + name.size()) return std::nullopt;
      if (idx < 1 || idx > limit) return std::nullopt;
      return VarRef{kind, idx - 1};
    };
    if (auto v = indexed('x', vars_.s, VarKind::kX)) return v;
    if (vars_.allow_u) {
      if (auto v = indexed('u', vars_.n, VarKind::kU)) return v;
    }
    return std::nullopt;
  }

  std::string_view text_;
  const VariableSet& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, const VariableSet& vars) { return Parser(text, vars).parse(); }

}  // namespace hypstab

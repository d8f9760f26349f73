#include "branchpde/expression.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <optional>

#include "branchpde/errors.hpp"
#include "branchpde/specfun.hpp"

namespace branchpde::expr {

namespace {

struct FunctionInfo {
  Function function;
  std::string_view name;
  int arity;
};

constexpr std::array kFunctions = {
    FunctionInfo{Function::Exp, "exp", 1},
    FunctionInfo{Function::Log, "log", 1},
    FunctionInfo{Function::Sqrt, "sqrt", 1},
    FunctionInfo{Function::Cos, "cos", 1},
    FunctionInfo{Function::Sin, "sin", 1},
    FunctionInfo{Function::Abs, "abs", 1},
    FunctionInfo{Function::Step, "step", 1},
    FunctionInfo{Function::Pospart, "pospart", 1},
    FunctionInfo{Function::Min, "min", 2},
    FunctionInfo{Function::Max, "max", 2},
    FunctionInfo{Function::Pow, "pow", 2},
    FunctionInfo{Function::Norm2, "norm2", 0},
    FunctionInfo{Function::PsiGetoor, "psi_getoor", 2},
    FunctionInfo{Function::PhiBump, "phi_bump", 2},
    FunctionInfo{Function::IndicatorBox, "indicator_box", 2},
};

const FunctionInfo& info(Function f) {
  for (const auto& entry : kFunctions) {
    if (entry.function == f) return entry;
  }
  throw DomainError("unknown function id");
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  Parser(std::string_view src, int d) : src_(src), d_(d) {}

  Node parse() {
    Node node = expression();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected input", {"operator", "end of input"});
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected) const {
    std::string list;
    for (const auto& e : expected) list += (list.empty() ? "" : ", ") + e;
    throw SyntaxError(fmt::format("{} at offset {} (expected {})", message, pos_, list), pos_,
                      std::move(expected));
  }

  void skip_space() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static Node binary(Node::Kind kind, Node lhs, Node rhs) {
    Node n;
    n.kind = kind;
    n.args.push_back(std::move(lhs));
    n.args.push_back(std::move(rhs));
    return n;
  }

  Node expression() {
    Node lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Node::Kind::Add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = binary(Node::Kind::Subtract, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  Node term() {
    Node lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Node::Kind::Multiply, std::move(lhs), unary());
      } else if (accept('/')) {
        lhs = binary(Node::Kind::Divide, std::move(lhs), unary());
      } else {
        return lhs;
      }
    }
  }

  Node unary() {
    if (accept('-')) {
      Node n;
      n.kind = Node::Kind::Negate;
      n.args.push_back(unary());
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  // '^' is right-associative and binds tighter than unary minus: -a^b = -(a^b).
  Node power() {
    Node base = primary();
    if (accept('^')) return binary(Node::Kind::Power, std::move(base), unary());
    return base;
  }

  Node primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input", {"number", "identifier", "(", "-"});
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Node inner = expression();
      if (!accept(')')) fail("unbalanced parenthesis", {")"});
      return inner;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_ident_start(c)) return identifier();
    fail(fmt::format("unexpected character '{}'", c), {"number", "identifier", "(", "-"});
  }

  Node number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && is_digit(src_[p])) {
        pos_ = p;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    Node n;
    n.kind = Node::Kind::Constant;
    const auto [end, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, n.value);
    if (ec != std::errc() || end != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number", {"number"});
    }
    return n;
  }

  Node identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    if (name == "t") return Node{Node::Kind::Time, 0.0, 0, Function::Exp, {}};
    if (name == "pi") return Node{Node::Kind::Constant, std::numbers::pi, 0, Function::Exp, {}};
    if (name.size() > 1 && name[0] == 'x' && name.find_first_not_of("0123456789", 1) == std::string_view::npos &&
        name[1] != '0') {
      int index = 0;
      const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec != std::errc() || index > d_) {
        throw DimensionError(fmt::format("variable {} at offset {} exceeds dimension d = {}", name, start, d_));
      }
      Node n;
      n.kind = Node::Kind::Coordinate;
      n.index = index;
      return n;
    }

    for (const auto& entry : kFunctions) {
      if (entry.name != name) continue;
      Node n;
      n.kind = Node::Kind::Call;
      n.function = entry.function;
      if (!accept('(')) fail(fmt::format("expected '(' after {}", name), {"("});
      if (!accept(')')) {
        do {
          n.args.push_back(expression());
        } while (accept(','));
        if (!accept(')')) fail("unterminated argument list", {",", ")"});
      }
      if (static_cast<int>(n.args.size()) != entry.arity) {
        pos_ = start;
        fail(fmt::format("{} takes {} argument(s), got {}", name, entry.arity, n.args.size()),
             {fmt::format("{} argument(s)", entry.arity)});
      }
      return n;
    }
    throw UnknownIdentifierError(fmt::format("unknown identifier '{}' at offset {}", name, start), start);
  }

  std::string_view src_;
  int d_;
  std::size_t pos_ = 0;
};

void append_number(std::string& out, double v) {
  std::array<char, 32> buffer;
  const auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), v);
  out.append(buffer.data(), end);
}

void print(const Node& n, std::string& out) {
  const auto infix = [&](const char* op) {
    out += '(';
    print(n.args[0], out);
    out += op;
    print(n.args[1], out);
    out += ')';
  };
  switch (n.kind) {
    case Node::Kind::Constant:
      append_number(out, n.value);
      break;
    case Node::Kind::Time:
      out += 't';
      break;
    case Node::Kind::Coordinate:
      out += 'x';
      out += std::to_string(n.index);
      break;
    case Node::Kind::Negate:
      out += "(-";
      print(n.args[0], out);
      out += ')';
      break;
    case Node::Kind::Add:
      infix(" + ");
      break;
    case Node::Kind::Subtract:
      infix(" - ");
      break;
    case Node::Kind::Multiply:
      infix(" * ");
      break;
    case Node::Kind::Divide:
      infix(" / ");
      break;
    case Node::Kind::Power:
      infix("^");
      break;
    case Node::Kind::Call:
      out += function_name(n.function);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i > 0) out += ", ";
        print(n.args[i], out);
      }
      out += ')';
      break;
  }
}

bool uses(const Node& n, Node::Kind kind) {
  if (n.kind == kind) return true;
  if (n.kind == Node::Kind::Call && kind == Node::Kind::Coordinate &&
      (n.function == Function::Norm2 || n.function == Function::PsiGetoor ||
       n.function == Function::PhiBump || n.function == Function::IndicatorBox)) {
    return true;
  }
  for (const auto& a : n.args) {
    if (uses(a, kind)) return true;
  }
  return false;
}

double checked_pow(double base, double exponent) {
  if (base < 0.0 && exponent != std::trunc(exponent)) {
    throw EvaluationError(fmt::format("negative base {} raised to non-integer power {}", base, exponent));
  }
  if (base == 0.0 && exponent < 0.0) throw EvaluationError("zero raised to a negative power");
  return std::pow(base, exponent);
}

}  // namespace

std::string_view function_name(Function f) { return info(f).name; }

Node parse_expression(std::string_view src, int d) {
  if (d < 1) throw DimensionError("dimension must be positive");
  return Parser(src, d).parse();
}

std::string to_string(const Node& node) {
  std::string out;
  print(node, out);
  return out;
}

// ---------------------------------------------------------------------------
// Postfix program

struct Expression::Instruction {
  enum class Op {
    Constant,
    Time,
    Coordinate,
    Negate,
    Add,
    Subtract,
    Multiply,
    Divide,
    Power,
    Exp,
    Log,
    Sqrt,
    Cos,
    Sin,
    Abs,
    Step,
    Pospart,
    Min,
    Max,
    Norm2,
    Psi,
    Phi,
    Box,
  };
  Op op;
  double a = 0.0;
  double b = 0.0;
  int index = 0;
};

struct Expression::Program {
  std::vector<Instruction> code;
  std::vector<specfun::GetoorPair> getoor;
  std::size_t max_stack = 0;
};

namespace {

using Op = Expression::Instruction::Op;

// Value of a subtree that uses neither t nor x.
double constant_value(const Node& n, int d, const char* what) {
  if (uses(n, Node::Kind::Time) || uses(n, Node::Kind::Coordinate)) {
    throw ConfigError(fmt::format("{} requires constant arguments, got {}", what, to_string(n)));
  }
  const std::vector<double> origin(static_cast<std::size_t>(d), 0.0);
  return Expression(n, d)(0.0, origin);
}

class Compiler {
 public:
  Compiler(Expression::Program& program, int d) : program_(program), d_(d) {}

  void emit(const Node& n) {
    switch (n.kind) {
      case Node::Kind::Constant:
        push({Op::Constant, n.value});
        return;
      case Node::Kind::Time:
        push({Op::Time});
        return;
      case Node::Kind::Coordinate:
        push({Op::Coordinate, 0, 0, n.index - 1});
        return;
      case Node::Kind::Negate:
        emit(n.args[0]);
        program_.code.push_back({Op::Negate});
        return;
      case Node::Kind::Add:
        return binary(n, Op::Add);
      case Node::Kind::Subtract:
        return binary(n, Op::Subtract);
      case Node::Kind::Multiply:
        return binary(n, Op::Multiply);
      case Node::Kind::Divide:
        return binary(n, Op::Divide);
      case Node::Kind::Power:
        return binary(n, Op::Power);
      case Node::Kind::Call:
        return call(n);
    }
  }

 private:
  void push(Expression::Instruction ins) {
    program_.code.push_back(ins);
    ++depth_;
    program_.max_stack = std::max(program_.max_stack, depth_);
  }

  void binary(const Node& n, Op op) {
    emit(n.args[0]);
    emit(n.args[1]);
    program_.code.push_back({op});
    --depth_;
  }

  void call(const Node& n) {
    switch (n.function) {
      case Function::Exp:
        return unary(n, Op::Exp);
      case Function::Log:
        return unary(n, Op::Log);
      case Function::Sqrt:
        return unary(n, Op::Sqrt);
      case Function::Cos:
        return unary(n, Op::Cos);
      case Function::Sin:
        return unary(n, Op::Sin);
      case Function::Abs:
        return unary(n, Op::Abs);
      case Function::Step:
        return unary(n, Op::Step);
      case Function::Pospart:
        return unary(n, Op::Pospart);
      case Function::Min:
        return binary(n, Op::Min);
      case Function::Max:
        return binary(n, Op::Max);
      case Function::Pow:
        return binary(n, Op::Power);
      case Function::Norm2:
        push({Op::Norm2});
        return;
      case Function::PsiGetoor:
      case Function::PhiBump: {
        const char* name = n.function == Function::PsiGetoor ? "psi_getoor" : "phi_bump";
        const double k = constant_value(n.args[0], d_, name);
        const double alpha = constant_value(n.args[1], d_, name);
        if (!(k >= 0.0) || k != std::trunc(k) || k > 1000.0) {
          throw ConfigError(fmt::format("{}: k must be a non-negative integer, got {}", name, k));
        }
        const bool psi = n.function == Function::PsiGetoor;
        if (psi ? !(alpha > 0.0 && alpha < 2.0) : !(alpha > 0.0 && alpha <= 2.0)) {
          throw ConfigError(fmt::format("{}: alpha out of range, got {}", name, alpha));
        }
        if (psi) {
          program_.getoor.emplace_back(static_cast<int>(k), alpha, d_);
          push({Op::Psi, 0, 0, static_cast<int>(program_.getoor.size() - 1)});
        } else {
          push({Op::Phi, k + alpha / 2.0});
        }
        return;
      }
      case Function::IndicatorBox: {
        const double lo = constant_value(n.args[0], d_, "indicator_box");
        const double hi = constant_value(n.args[1], d_, "indicator_box");
        push({Op::Box, lo, hi});
        return;
      }
    }
  }

  void unary(const Node& n, Op op) {
    emit(n.args[0]);
    program_.code.push_back({op});
  }

  Expression::Program& program_;
  int d_;
  std::size_t depth_ = 0;
};

double run(const Expression::Program& program, double t, std::span<const double> x, double* stack) {
  double* top = stack;  // one past the last value
  for (const auto& ins : program.code) {
    switch (ins.op) {
      case Op::Constant:
        *top++ = ins.a;
        break;
      case Op::Time:
        *top++ = t;
        break;
      case Op::Coordinate:
        *top++ = x[static_cast<std::size_t>(ins.index)];
        break;
      case Op::Negate:
        top[-1] = -top[-1];
        break;
      case Op::Add:
        --top;
        top[-1] += *top;
        break;
      case Op::Subtract:
        --top;
        top[-1] -= *top;
        break;
      case Op::Multiply:
        --top;
        top[-1] *= *top;
        break;
      case Op::Divide:
        --top;
        if (*top == 0.0) throw EvaluationError("division by zero");
        top[-1] /= *top;
        break;
      case Op::Power:
        --top;
        top[-1] = checked_pow(top[-1], *top);
        break;
      case Op::Exp:
        top[-1] = std::exp(top[-1]);
        break;
      case Op::Log:
        if (!(top[-1] > 0.0)) throw EvaluationError("log of a non-positive number");
        top[-1] = std::log(top[-1]);
        break;
      case Op::Sqrt:
        if (top[-1] < 0.0) throw EvaluationError("sqrt of a negative number");
        top[-1] = std::sqrt(top[-1]);
        break;
      case Op::Cos:
        top[-1] = std::cos(top[-1]);
        break;
      case Op::Sin:
        top[-1] = std::sin(top[-1]);
        break;
      case Op::Abs:
        top[-1] = std::abs(top[-1]);
        break;
      case Op::Step:
        top[-1] = top[-1] >= 0.0 ? 1.0 : 0.0;
        break;
      case Op::Pospart:
        top[-1] = std::max(top[-1], 0.0);
        break;
      case Op::Min:
        --top;
        top[-1] = std::min(top[-1], *top);
        break;
      case Op::Max:
        --top;
        top[-1] = std::max(top[-1], *top);
        break;
      case Op::Norm2: {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        *top++ = r2;
        break;
      }
      case Op::Psi: {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        *top++ = program.getoor[static_cast<std::size_t>(ins.index)].psi(r2);
        break;
      }
      case Op::Phi: {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        *top++ = r2 < 1.0 ? std::pow(1.0 - r2, ins.a) : 0.0;
        break;
      }
      case Op::Box: {
        bool inside = true;
        for (double v : x) inside = inside && v >= ins.a && v <= ins.b;
        *top++ = inside ? 1.0 : 0.0;
        break;
      }
    }
  }
  return top[-1];
}

}  // namespace

Expression::Expression(Node ast, int d) : ast_(std::move(ast)), d_(d) {
  if (d < 1) throw DimensionError("dimension must be positive");
  uses_time_ = uses(ast_, Node::Kind::Time);
  uses_space_ = uses(ast_, Node::Kind::Coordinate);
  auto program = std::make_shared<Program>();
  Compiler(*program, d).emit(ast_);
  program_ = std::move(program);
}

double Expression::operator()(double t, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d_) {
    throw DimensionError(fmt::format("point has {} coordinates, expression expects {}", x.size(), d_));
  }
  constexpr std::size_t kInline = 64;
  if (program_->max_stack <= kInline) {
    double stack[kInline];
    return run(*program_, t, x, stack);
  }
  std::vector<double> stack(program_->max_stack);
  return run(*program_, t, x, stack.data());
}

double eval_expression(const Expression& e, double t, std::span<const double> x) { return e(t, x); }

}  // namespace branchpde::expr

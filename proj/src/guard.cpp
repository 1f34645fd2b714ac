#include "loom/guard.hpp"

#include <cstdint>
#include <optional>

namespace loom {

namespace {

using Node = GuardExpr::Node;
using Op = GuardExpr::Op;

std::optional<std::int64_t> as_int(const Value& v) {
  if (auto* p = v.as_if<std::int32_t>()) return *p;
  if (auto* p = v.as_if<std::int64_t>()) return *p;
  if (auto* p = v.as_if<std::uint32_t>()) return static_cast<std::int64_t>(*p);
  if (auto* p = v.as_if<std::uint64_t>()) return static_cast<std::int64_t>(*p);
  if (auto* p = v.as_if<bool>()) return *p ? 1 : 0;
  return std::nullopt;
}

std::int64_t require_int(const Value& v, const char* what) {
  if (auto i = as_int(v)) return *i;
  throw GuardError(std::string("guard ") + what +
                   " requires an integer operand, got " + v.to_string());
}

bool require_bool(const Value& v) {
  if (auto* p = v.as_if<bool>()) return *p;
  throw GuardError("guard expression did not yield a bool: " + v.to_string());
}

Value eval_node(const Node& n, std::span<const Value> captures);

bool eval_bool(const GuardExpr& e, std::span<const Value> captures) {
  return require_bool(e.eval_value(captures));
}

bool values_equal(const Value& a, const Value& b) {
  if (a.tag() == b.tag()) return a.equals(b);
  auto ia = as_int(a), ib = as_int(b);
  if (ia && ib) return *ia == *ib;  // loose equality across integer widths
  return false;
}

Value eval_node(const Node& n, std::span<const Value> captures) {
  switch (n.op) {
    case Op::placeholder: {
      auto i = static_cast<std::size_t>(n.index);
      if (i < 1 || i > captures.size())
        throw GuardError("guard placeholder x" + std::to_string(n.index) +
                         " exceeds capture count " +
                         std::to_string(captures.size()));
      return captures[i - 1];
    }
    case Op::literal:
      return n.literal;
    case Op::lazy:
      return n.lazy();
    case Op::call: {
      std::vector<Value> args;
      args.reserve(n.args.size());
      for (const auto& a : n.args) args.push_back(a.eval_value(captures));
      return n.call(args);
    }
    case Op::eq:
      return Value::of(values_equal(eval_node(*n.lhs, captures),
                                    eval_node(*n.rhs, captures)));
    case Op::ne:
      return Value::of(!values_equal(eval_node(*n.lhs, captures),
                                     eval_node(*n.rhs, captures)));
    case Op::lt:
    case Op::le:
    case Op::gt:
    case Op::ge: {
      auto l = require_int(eval_node(*n.lhs, captures), "comparison");
      auto r = require_int(eval_node(*n.rhs, captures), "comparison");
      switch (n.op) {
        case Op::lt: return Value::of(l < r);
        case Op::le: return Value::of(l <= r);
        case Op::gt: return Value::of(l > r);
        default: return Value::of(l >= r);
      }
    }
    case Op::logic_and:
      return Value::of(require_bool(eval_node(*n.lhs, captures)) &&
                       require_bool(eval_node(*n.rhs, captures)));
    case Op::logic_or:
      return Value::of(require_bool(eval_node(*n.lhs, captures)) ||
                       require_bool(eval_node(*n.rhs, captures)));
    case Op::logic_not:
      return Value::of(!require_bool(eval_node(*n.lhs, captures)));
    case Op::mod: {
      auto l = require_int(eval_node(*n.lhs, captures), "modulo");
      auto r = require_int(eval_node(*n.rhs, captures), "modulo");
      if (r == 0) throw GuardError("guard modulo by zero");
      return Value::of(l % r);
    }
    case Op::add:
      return Value::of(require_int(eval_node(*n.lhs, captures), "addition") +
                       require_int(eval_node(*n.rhs, captures), "addition"));
  }
  throw GuardError("corrupt guard expression");
}

}  // namespace

bool GuardExpr::eval(std::span<const Value> captures) const {
  if (!node_) throw GuardError("evaluating an empty guard expression");
  return require_bool(eval_value(captures));
}

Value GuardExpr::eval_value(std::span<const Value> captures) const {
  if (!node_) throw GuardError("evaluating an empty guard expression");
  return eval_node(*node_, captures);
}

GuardExpr GuardExpr::literal(Value v) {
  auto n = std::make_shared<Node>();
  n->op = Op::literal;
  n->literal = std::move(v);
  return GuardExpr(std::move(n));
}

GuardExpr GuardExpr::placeholder(int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::placeholder;
  n->index = index;
  return GuardExpr(std::move(n));
}

GuardExpr GuardExpr::lazy(std::function<Value()> fn) {
  auto n = std::make_shared<Node>();
  n->op = Op::lazy;
  n->lazy = std::move(fn);
  return GuardExpr(std::move(n));
}

GuardExpr GuardExpr::call(std::function<Value(std::span<const Value>)> fn,
                          std::vector<GuardExpr> args) {
  auto n = std::make_shared<Node>();
  n->op = Op::call;
  n->call = std::move(fn);
  n->args = std::move(args);
  return GuardExpr(std::move(n));
}

GuardExpr GuardExpr::binary(Op op, GuardExpr lhs, GuardExpr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = lhs.node_;
  n->rhs = rhs.node_;
  return GuardExpr(std::move(n));
}

GuardExpr GuardExpr::negate(GuardExpr e) {
  auto n = std::make_shared<Node>();
  n->op = Op::logic_not;
  n->lhs = e.node_;
  return GuardExpr(std::move(n));
}

}  // namespace loom

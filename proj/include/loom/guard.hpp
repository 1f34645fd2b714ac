#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "loom/value.hpp"

namespace loom {

struct GuardError : std::logic_error {
  using std::logic_error::logic_error;
};

namespace detail {
template <class F>
struct callable_traits;
}

/// Lazily evaluated predicate tree over capture placeholders, literals,
/// late-bound variable references, and function-call nodes.
class GuardExpr {
public:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  GuardExpr() = default;
  explicit GuardExpr(NodePtr n) : node_(std::move(n)) {}

  /// Top-level evaluation; the expression must yield a bool.
  bool eval(std::span<const Value> captures) const;
  Value eval_value(std::span<const Value> captures) const;

  bool valid() const noexcept { return node_ != nullptr; }

  static GuardExpr literal(Value v);
  static GuardExpr placeholder(int index);  // 1-based
  static GuardExpr lazy(std::function<Value()> fn);
  static GuardExpr call(std::function<Value(std::span<const Value>)> fn,
                        std::vector<GuardExpr> args);

  enum class Op {
    placeholder,
    literal,
    lazy,
    call,
    eq,
    ne,
    lt,
    le,
    gt,
    ge,
    logic_and,
    logic_or,
    logic_not,
    mod,
    add
  };

  static GuardExpr binary(Op op, GuardExpr lhs, GuardExpr rhs);
  static GuardExpr negate(GuardExpr e);

private:
  NodePtr node_;
};

struct GuardExpr::Node {
  Op op{};
  int index = 0;
  Value literal;
  std::function<Value()> lazy;
  std::function<Value(std::span<const Value>)> call;
  std::vector<GuardExpr> args;
  NodePtr lhs, rhs;
};

/// Capture placeholder; index is 1-based. `x1(fun)` is shorthand for
/// `gcall(fun, x1)`.
struct Placeholder {
  int index;

  template <class F>
  GuardExpr operator()(F fn) const;
};

namespace placeholders {
inline constexpr Placeholder x1{1}, x2{2}, x3{3}, x4{4}, x5{5}, x6{6}, x7{7},
    x8{8}, x9{9};
}

namespace detail {

template <class C, class R, class... As>
struct callable_traits_base {
  using result = R;
  using args = std::tuple<std::decay_t<As>...>;
  static constexpr std::size_t arity = sizeof...(As);
};

template <class F>
struct callable_traits : callable_traits<decltype(&F::operator())> {};
template <class C, class R, class... As>
struct callable_traits<R (C::*)(As...) const>
    : callable_traits_base<C, R, As...> {};
template <class C, class R, class... As>
struct callable_traits<R (C::*)(As...)> : callable_traits_base<C, R, As...> {};
template <class R, class... As>
struct callable_traits<R (*)(As...)> : callable_traits_base<void, R, As...> {};
template <class R, class... As>
struct callable_traits<R (&)(As...)> : callable_traits_base<void, R, As...> {};

template <class T>
struct is_guard_operand : std::false_type {};
template <>
struct is_guard_operand<GuardExpr> : std::true_type {};
template <>
struct is_guard_operand<Placeholder> : std::true_type {};

template <class T>
inline constexpr bool is_guard_operand_v =
    is_guard_operand<std::decay_t<T>>::value;

inline GuardExpr to_guard(GuardExpr e) { return e; }
inline GuardExpr to_guard(Placeholder p) {
  return GuardExpr::placeholder(p.index);
}
template <class T>
GuardExpr to_guard(std::reference_wrapper<T> r) {
  return GuardExpr::lazy([p = &r.get()] { return Value::of(*p); });
}

template <class T>
struct is_reference_wrapper : std::false_type {};
template <class T>
struct is_reference_wrapper<std::reference_wrapper<T>> : std::true_type {};

template <class T>
  requires(!is_guard_operand_v<T> &&
           !is_reference_wrapper<std::decay_t<T>>::value)
GuardExpr to_guard(T&& v) {
  using S = std::conditional_t<std::is_convertible_v<std::decay_t<T>, const char*>,
                               std::string, std::decay_t<T>>;
  return GuardExpr::literal(Value::of(S(std::forward<T>(v))));
}

template <class L, class R>
concept GuardOperands = is_guard_operand_v<L> || is_guard_operand_v<R>;

}  // namespace detail

/// Late-bound reference: the variable is read at guard evaluation time.
template <class T>
GuardExpr gref(T& var) {
  return GuardExpr::lazy([p = &var] { return Value::of(*p); });
}

/// Wraps a function call into a guard node; arguments may be placeholders,
/// guard expressions, references, or plain values.
template <class F, class... Args>
GuardExpr gcall(F fn, Args&&... args) {
  using traits = detail::callable_traits<std::decay_t<F>>;
  static_assert(traits::arity == sizeof...(Args),
                "gcall argument count does not match the callable");
  std::vector<GuardExpr> exprs{detail::to_guard(std::forward<Args>(args))...};
  auto wrapper = [fn = std::move(fn)](std::span<const Value> vs) -> Value {
    return [&]<std::size_t... I>(std::index_sequence<I...>) {
      return Value::of(
          fn(vs[I].as<std::tuple_element_t<I, typename traits::args>>()...));
    }(std::make_index_sequence<traits::arity>{});
  };
  return GuardExpr::call(std::move(wrapper), std::move(exprs));
}

template <class F>
GuardExpr Placeholder::operator()(F fn) const {
  return gcall(std::move(fn), *this);
}

#define LOOM_GUARD_BINARY_OP(sym, op_enum)                                 \
  template <class L, class R>                                              \
    requires detail::GuardOperands<L, R>                                   \
  GuardExpr operator sym(L&& lhs, R&& rhs) {                               \
    return GuardExpr::binary(GuardExpr::Op::op_enum,                       \
                             detail::to_guard(std::forward<L>(lhs)),       \
                             detail::to_guard(std::forward<R>(rhs)));      \
  }

LOOM_GUARD_BINARY_OP(==, eq)
LOOM_GUARD_BINARY_OP(!=, ne)
LOOM_GUARD_BINARY_OP(<, lt)
LOOM_GUARD_BINARY_OP(<=, le)
LOOM_GUARD_BINARY_OP(>, gt)
LOOM_GUARD_BINARY_OP(>=, ge)
LOOM_GUARD_BINARY_OP(&&, logic_and)
LOOM_GUARD_BINARY_OP(||, logic_or)
LOOM_GUARD_BINARY_OP(%, mod)
LOOM_GUARD_BINARY_OP(+, add)

#undef LOOM_GUARD_BINARY_OP

template <class E>
  requires detail::is_guard_operand_v<E>
GuardExpr operator!(E&& e) {
  return GuardExpr::negate(detail::to_guard(std::forward<E>(e)));
}

}  // namespace loom

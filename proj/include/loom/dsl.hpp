#pragma once

#include <chrono>
#include <utility>

#include "loom/pattern.hpp"

namespace loom {

/// Type-match token for value-style patterns: `on(1, val<int>)`.
template <class T>
struct ValToken {};
template <class T>
inline constexpr ValToken<T> val{};

/// Marks the tail of a value-style pattern whose remaining types are deduced
/// from the handler signature: `on(atom("add"), arg_match)`.
struct ArgMatch {};
inline constexpr ArgMatch arg_match{};

namespace detail {

template <class T>
struct is_val_token : std::false_type {};
template <class T>
struct is_val_token<ValToken<T>> : std::true_type {};

template <class T, class = void>
struct has_call_operator : std::false_type {};
template <class T>
struct has_call_operator<T, std::void_t<decltype(&T::operator())>>
    : std::true_type {};

template <class T>
struct is_projection_fn
    : std::bool_constant<has_call_operator<T>::value ||
                         (std::is_pointer_v<T> &&
                          std::is_function_v<std::remove_pointer_t<T>>)> {};

template <class T>
struct optional_inner {
  using type = T;
};
template <class T>
struct optional_inner<std::optional<T>> {
  using type = T;
};

template <class F>
PatternElement make_projection(F fn) {
  using traits = callable_traits<std::decay_t<F>>;
  static_assert(traits::arity == 1,
                "projections must take exactly one argument");
  using In = std::tuple_element_t<0, typename traits::args>;
  using Raw = typename traits::result;
  using Out = typename optional_inner<std::decay_t<Raw>>::type;
  return PatternElement::projection(
      type_tag<In>(), type_tag<Out>(),
      [fn = std::move(fn)](const Value& v) -> std::optional<Value> {
        if constexpr (std::is_same_v<std::decay_t<Raw>, std::optional<Out>>) {
          auto r = fn(v.as<In>());
          if (!r) return std::nullopt;
          return Value::of(std::move(*r));
        } else {
          return Value::of(fn(v.as<In>()));
        }
      });
}

/// Wraps a typed handler into the erased span-of-values form; captures are
/// already trimmed to the handler arity by Case::invoke.
template <class F>
std::function<void(std::span<const Value>)> erase_handler(F fn) {
  using traits = callable_traits<std::decay_t<F>>;
  return [fn = std::move(fn)](std::span<const Value> vs) {
    [&]<std::size_t... I>(std::index_sequence<I...>) {
      fn(vs[I].as<std::tuple_element_t<I, typename traits::args>>()...);
    }(std::make_index_sequence<traits::arity>{});
  };
}

template <class... Ps>
void append_handler_types(std::vector<PatternElement>& elems,
                          std::tuple<Ps...>*) {
  (elems.push_back(PatternElement::type_match(type_tag<Ps>())), ...);
}

}  // namespace detail

/// Intermediate match-expression object: collects pattern elements, an
/// optional guard, and finally a handler via `operator>>`.
class CaseBuilder {
public:
  CaseBuilder(std::vector<PatternElement> elems, bool deduce_from_handler)
      : elems_(std::move(elems)), deduce_from_handler_(deduce_from_handler) {}

  CaseBuilder&& when(GuardExpr g) && {
    guard_ = std::move(g);
    return std::move(*this);
  }

  template <class F>
  Case operator>>(F handler) && {
    using traits = detail::callable_traits<std::decay_t<F>>;
    if (deduce_from_handler_)
      detail::append_handler_types(
          elems_, static_cast<typename traits::args*>(nullptr));
    validate_trailing_types<F>();
    return Case(std::move(elems_), std::move(guard_),
                detail::erase_handler(std::move(handler)), traits::arity);
  }

private:
  template <class F>
  void validate_trailing_types() {
    using traits = detail::callable_traits<std::decay_t<F>>;
    // The last `arity` capture-producing elements must agree with the
    // handler's parameter types; checked here so misuse fails at
    // construction rather than at match time.
    std::vector<TypeTag> capture_tags;
    for (const auto& e : elems_)
      if (e.captures()) capture_tags.push_back(e.capture_tag);
    if (traits::arity > capture_tags.size())
      throw MatchDefinitionError(
          "handler takes more arguments than the pattern captures");
    std::vector<TypeTag> want;
    [&]<std::size_t... I>(std::index_sequence<I...>) {
      (want.push_back(
           type_tag<std::tuple_element_t<I, typename traits::args>>()),
       ...);
    }(std::make_index_sequence<traits::arity>{});
    for (std::size_t i = 0; i < want.size(); ++i) {
      auto have = capture_tags[capture_tags.size() - want.size() + i];
      if (have != want[i])
        throw MatchDefinitionError(
            "handler parameter type does not match the pattern (parameter " +
            std::to_string(i + 1) + ")");
    }
  }

  std::vector<PatternElement> elems_;
  bool deduce_from_handler_;
  std::optional<GuardExpr> guard_;
};

namespace detail {

inline void add_on_arg(std::vector<PatternElement>& elems, bool& deduce,
                       Anything) {
  elems.push_back(PatternElement::wildcard());
  (void)deduce;
}
inline void add_on_arg(std::vector<PatternElement>& elems, bool& deduce,
                       ArgMatch) {
  deduce = true;
}
template <class T>
void add_on_arg(std::vector<PatternElement>& elems, bool&, ValToken<T>) {
  elems.push_back(PatternElement::type_match(type_tag<T>()));
}
template <class T>
  requires(!std::is_same_v<std::decay_t<T>, Anything> &&
           !std::is_same_v<std::decay_t<T>, ArgMatch> &&
           !is_val_token<std::decay_t<T>>::value)
void add_on_arg(std::vector<PatternElement>& elems, bool&, T&& v) {
  if constexpr (is_projection_fn<std::decay_t<T>>::value) {
    elems.push_back(make_projection(std::forward<T>(v)));
  } else {
    elems.push_back(PatternElement::value_match(
        Value::of(storage_t<T>(std::forward<T>(v)))));
  }
}

}  // namespace detail

/// Type-style match expression: `on<int, float>()`, `on<Anything, int>()`.
template <class... Spec>
CaseBuilder on() {
  std::vector<PatternElement> elems;
  (elems.push_back(std::is_same_v<std::decay_t<Spec>, Anything>
                       ? PatternElement::wildcard()
                       : PatternElement::type_match(
                             type_tag<std::decay_t<Spec>>())),
   ...);
  return CaseBuilder(std::move(elems), false);
}

/// Value-style match expression: values match by type and value; `val<T>`
/// matches by type; `any_vals` is a wildcard; a unary callable is a
/// projection; `arg_match` (last position) deduces the remaining types from
/// the handler.
template <class... Args>
  requires(sizeof...(Args) > 0)
CaseBuilder on(Args&&... args) {
  std::vector<PatternElement> elems;
  bool deduce = false;
  (detail::add_on_arg(elems, deduce, std::forward<Args>(args)), ...);
  return CaseBuilder(std::move(elems), deduce);
}

/// Catch-all: matches any tuple, captures nothing.
inline CaseBuilder others() { return on(any_vals); }

/// All pattern types deduced from the handler signature.
inline CaseBuilder on_arg_match() { return on(arg_match); }

/// Timeout-clause builder: `after(50ms) >> [] { ... }`.
class AfterBuilder {
public:
  explicit AfterBuilder(std::chrono::milliseconds d) : duration_(d) {}

  template <class F>
  TimeoutCase operator>>(F handler) && {
    static_assert(detail::callable_traits<std::decay_t<F>>::arity == 0,
                  "timeout handlers take no arguments");
    return TimeoutCase{duration_, std::move(handler)};
  }

private:
  std::chrono::milliseconds duration_;
};

template <class Rep, class Period>
AfterBuilder after(std::chrono::duration<Rep, Period> d) {
  return AfterBuilder(
      std::chrono::duration_cast<std::chrono::milliseconds>(d));
}

}  // namespace loom

#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "loom/guard.hpp"
#include "loom/message.hpp"

namespace loom {

struct MatchDefinitionError : std::logic_error {
  using std::logic_error::logic_error;
};

/// One slot of a pattern. Captures are produced by every kind except
/// `anything`; a projection captures its converted output.
struct PatternElement {
  enum class Kind { type_match, value_match, anything, projection };

  Kind kind = Kind::anything;
  TypeTag tag;          // input tag for type/value match and projection
  TypeTag capture_tag;  // tag of the produced capture (invalid for anything)
  Value expected;       // value_match only
  std::function<std::optional<Value>(const Value&)> project;

  static PatternElement type_match(TypeTag t);
  static PatternElement value_match(Value v);
  static PatternElement wildcard();
  static PatternElement projection(
      TypeTag in, TypeTag out,
      std::function<std::optional<Value>(const Value&)> fn);

  bool captures() const noexcept { return kind != Kind::anything; }
};

/// Pattern + optional guard + handler. The handler may take fewer arguments
/// than the pattern captures; skipping is only allowed from the left.
class Case {
public:
  Case(std::vector<PatternElement> pattern, std::optional<GuardExpr> guard,
       std::function<void(std::span<const Value>)> handler,
       std::size_t handler_arity);

  /// Captured values iff the tuple aligns with the pattern, every value
  /// match compares equal, every projection yields a value, and the guard
  /// holds. Projection results are memoized per application.
  std::optional<std::vector<Value>> try_match(const Message& m) const;

  void invoke(std::span<const Value> captures) const;

  std::size_t capture_count() const noexcept { return capture_count_; }
  std::size_t handler_arity() const noexcept { return handler_arity_; }
  const std::vector<PatternElement>& pattern() const noexcept {
    return pattern_;
  }

private:
  std::vector<PatternElement> pattern_;
  std::optional<GuardExpr> guard_;
  std::function<void(std::span<const Value>)> handler_;
  std::size_t handler_arity_;
  std::size_t capture_count_;
};

struct TimeoutCase {
  std::chrono::milliseconds duration{0};
  std::function<void()> handler;
};

namespace detail {
template <class C>
concept is_behavior_part = std::is_same_v<std::decay_t<C>, Case> ||
                           std::is_same_v<std::decay_t<C>, TimeoutCase>;
}  // namespace detail

/// Ordered case list with an optional trailing timeout clause; applying it
/// to a tuple invokes at most the first matching handler.
class Behavior {
public:
  enum class Result { matched, no_match };

  Behavior() = default;
  Behavior(std::vector<Case> cases, std::optional<TimeoutCase> timeout);

  template <class C1, class... Cs>
    requires(std::is_same_v<std::decay_t<C1>, Case> ||
             std::is_same_v<std::decay_t<C1>, TimeoutCase>)
  explicit Behavior(C1&& c1, Cs&&... cs) {
    add(std::forward<C1>(c1));
    (add(std::forward<Cs>(cs)), ...);
  }

  Result operator()(const Message& m) const;

  bool empty() const noexcept { return cases_.empty() && !timeout_; }
  const std::vector<Case>& cases() const noexcept { return cases_; }
  const std::optional<TimeoutCase>& timeout() const noexcept {
    return timeout_;
  }

  /// Concatenates case lists in order; at most one operand may carry a
  /// timeout clause.
  static Behavior concat(std::vector<Behavior> parts);

private:
  void add(Case c) { cases_.push_back(std::move(c)); }
  void add(TimeoutCase t) {
    if (timeout_)
      throw MatchDefinitionError("behavior has more than one timeout clause");
    timeout_ = std::move(t);
  }

  std::vector<Case> cases_;
  std::optional<TimeoutCase> timeout_;
};

}  // namespace loom

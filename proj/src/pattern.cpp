#include "loom/pattern.hpp"

#include <map>

namespace loom {

PatternElement PatternElement::type_match(TypeTag t) {
  PatternElement e;
  e.kind = Kind::type_match;
  e.tag = t;
  e.capture_tag = t;
  return e;
}

PatternElement PatternElement::value_match(Value v) {
  PatternElement e;
  e.kind = Kind::value_match;
  e.tag = v.tag();
  e.capture_tag = v.tag();
  e.expected = std::move(v);
  return e;
}

PatternElement PatternElement::wildcard() { return PatternElement{}; }

PatternElement PatternElement::projection(
    TypeTag in, TypeTag out,
    std::function<std::optional<Value>(const Value&)> fn) {
  PatternElement e;
  e.kind = Kind::projection;
  e.tag = in;
  e.capture_tag = out;
  e.project = std::move(fn);
  return e;
}

Case::Case(std::vector<PatternElement> pattern, std::optional<GuardExpr> guard,
           std::function<void(std::span<const Value>)> handler,
           std::size_t handler_arity)
    : pattern_(std::move(pattern)),
      guard_(std::move(guard)),
      handler_(std::move(handler)),
      handler_arity_(handler_arity),
      capture_count_(0) {
  for (const auto& e : pattern_)
    if (e.captures()) ++capture_count_;
  if (handler_arity_ > capture_count_)
    throw MatchDefinitionError(
        "handler takes " + std::to_string(handler_arity_) +
        " arguments but the pattern captures only " +
        std::to_string(capture_count_) +
        " values (skipping is only allowed from the left)");
}

namespace {

struct MatchState {
  const std::vector<PatternElement>& pattern;
  const Message& msg;
  std::vector<Value> captures;
  // Memoized projection results, keyed by (pattern slot, element index), so
  // a projection runs at most once per position per application.
  std::map<std::pair<std::size_t, std::size_t>, std::optional<Value>> memo;

  const std::optional<Value>& project(std::size_t pi, std::size_t mi) {
    auto key = std::make_pair(pi, mi);
    auto it = memo.find(key);
    if (it == memo.end())
      it = memo.emplace(key, pattern[pi].project(msg.at(mi))).first;
    return it->second;
  }

  bool match(std::size_t pi, std::size_t mi) {
    if (pi == pattern.size()) return mi == msg.size();
    const auto& elem = pattern[pi];
    switch (elem.kind) {
      case PatternElement::Kind::anything:
        // Leftmost-shortest absorption.
        for (std::size_t k = mi; k <= msg.size(); ++k)
          if (match(pi + 1, k)) return true;
        return false;
      case PatternElement::Kind::type_match:
        if (mi >= msg.size() || msg.tag_at(mi) != elem.tag) return false;
        captures.push_back(msg.at(mi));
        break;
      case PatternElement::Kind::value_match:
        if (mi >= msg.size() || msg.tag_at(mi) != elem.tag ||
            !msg.at(mi).equals(elem.expected))
          return false;
        captures.push_back(msg.at(mi));
        break;
      case PatternElement::Kind::projection: {
        if (mi >= msg.size() || msg.tag_at(mi) != elem.tag) return false;
        const auto& projected = project(pi, mi);
        if (!projected) return false;
        captures.push_back(*projected);
        break;
      }
    }
    if (match(pi + 1, mi + 1)) return true;
    captures.pop_back();
    return false;
  }
};

}  // namespace

std::optional<std::vector<Value>> Case::try_match(const Message& m) const {
  MatchState state{pattern_, m, {}, {}};
  if (!state.match(0, 0)) return std::nullopt;
  if (guard_ && !guard_->eval(state.captures)) return std::nullopt;
  return std::move(state.captures);
}

void Case::invoke(std::span<const Value> captures) const {
  // Left-skip: the handler receives the trailing handler_arity_ captures.
  handler_(captures.subspan(captures.size() - handler_arity_));
}

Behavior::Behavior(std::vector<Case> cases, std::optional<TimeoutCase> timeout)
    : cases_(std::move(cases)), timeout_(std::move(timeout)) {}

Behavior::Result Behavior::operator()(const Message& m) const {
  for (const auto& c : cases_) {
    if (auto captures = c.try_match(m)) {
      c.invoke(*captures);
      return Result::matched;
    }
  }
  return Result::no_match;
}

Behavior Behavior::concat(std::vector<Behavior> parts) {
  Behavior out;
  for (auto& p : parts) {
    for (auto& c : p.cases_) out.cases_.push_back(std::move(c));
    if (p.timeout_) out.add(std::move(*p.timeout_));
  }
  return out;
}

}  // namespace loom

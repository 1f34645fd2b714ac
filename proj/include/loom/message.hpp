#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "loom/value.hpp"

namespace loom {

/// Wildcard type for casts and patterns: absorbs any run of elements,
/// including the empty run.
struct Anything {
  friend constexpr bool operator==(Anything, Anything) noexcept { return true; }
};
inline constexpr Anything any_vals{};

namespace detail {

template <class T>
using storage_t =
    std::conditional_t<std::is_convertible_v<std::decay_t<T>, const char*> &&
                           !std::is_same_v<std::decay_t<T>, std::nullptr_t>,
                       std::string, std::decay_t<T>>;

}  // namespace detail

/// Reference-counted copy-on-write tuple of dynamically typed elements.
/// Copying a handle shares the payload; the first mutation through a shared
/// handle deep-copies the whole payload exactly once.
class Message {
public:
  Message() noexcept = default;
  explicit Message(std::vector<Value> elems);

  Message(const Message& other) noexcept;
  Message(Message&& other) noexcept;
  Message& operator=(const Message& other) noexcept;
  Message& operator=(Message&& other) noexcept;
  ~Message();

  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }

  const Value& at(std::size_t i) const;
  TypeTag tag_at(std::size_t i) const { return at(i).tag(); }

  template <class T>
  const T& get(std::size_t i) const {
    return at(i).as<T>();
  }

  /// Mutable access; detaches a shared payload first.
  Value& at_mut(std::size_t i);

  template <class T>
  T& get_ref(std::size_t i) {
    Value& v = at_mut(i);
    if (v.tag() != type_tag<T>()) v.as<T>();  // throws with a useful message
    return *static_cast<T*>(v.raw_unique());
  }

  bool equals(const Message& other) const;

  /// Current number of handles sharing the payload (1 for the empty tuple).
  long use_count() const noexcept;

  std::span<const Value> elements() const noexcept;

  /// Process-wide count of whole-payload deep copies; COW instrumentation.
  static std::uint64_t deep_copy_count() noexcept;

  friend bool operator==(const Message& a, const Message& b) {
    return a.equals(b);
  }

private:
  struct Payload {
    explicit Payload(std::vector<Value> e) : elems(std::move(e)) {}
    std::atomic<long> refs{1};
    std::vector<Value> elems;
  };

  void detach();
  static void release(Payload* p) noexcept;

  Payload* p_ = nullptr;
};

template <class... Ts>
Message make_message(Ts&&... xs) {
  std::vector<Value> elems;
  elems.reserve(sizeof...(Ts));
  (elems.push_back(Value::of(detail::storage_t<Ts>(std::forward<Ts>(xs)))),
   ...);
  return Message(std::move(elems));
}

/// `{elem1, elem2, ...}` with atoms rendered as their decoded text.
std::string to_string(const Message& m);

namespace detail {

/// Matches a tag sequence (nullopt = wildcard) against the tuple with
/// leftmost-shortest wildcard absorption. On success fills `positions` with
/// the element index of each non-wildcard pattern slot.
bool match_tag_seq(std::span<const std::optional<TypeTag>> pattern,
                   const Message& m, std::vector<std::size_t>& positions);

template <class... Spec>
struct concrete_types {
  using tuple =
      decltype(std::tuple_cat(std::declval<std::conditional_t<
                                  std::is_same_v<std::decay_t<Spec>, Anything>,
                                  std::tuple<>, std::tuple<std::decay_t<Spec>>>>()...));
};

}  // namespace detail

/// Statically typed read-only facade over a Message; keeps it alive.
template <class... Ts>
class TypedView {
public:
  TypedView(Message origin, std::array<std::size_t, sizeof...(Ts)> idx)
      : origin_(std::move(origin)), idx_(idx) {}

  static constexpr std::size_t size() noexcept { return sizeof...(Ts); }

  template <std::size_t I>
  const std::tuple_element_t<I, std::tuple<Ts...>>& get() const {
    return origin_.get<std::tuple_element_t<I, std::tuple<Ts...>>>(idx_[I]);
  }

  const Message& origin() const noexcept { return origin_; }

private:
  Message origin_;
  std::array<std::size_t, sizeof...(Ts)> idx_;
};

namespace detail {

template <class Tuple>
struct view_of;
template <class... Ts>
struct view_of<std::tuple<Ts...>> {
  using type = TypedView<Ts...>;
};

}  // namespace detail

/// Tries to view `m` as the given type sequence; `Anything` entries absorb
/// any number of elements. Mismatch yields an empty optional, never a copy.
template <class... Spec>
auto tuple_cast(const Message& m)
    -> std::optional<typename detail::view_of<
        typename detail::concrete_types<Spec...>::tuple>::type> {
  using View = typename detail::view_of<
      typename detail::concrete_types<Spec...>::tuple>::type;
  std::array<std::optional<TypeTag>, sizeof...(Spec)> pattern = {
      (std::is_same_v<std::decay_t<Spec>, Anything>
           ? std::optional<TypeTag>{}
           : std::optional<TypeTag>{type_tag<std::decay_t<Spec>>()})...};
  std::vector<std::size_t> positions;
  if (!detail::match_tag_seq(pattern, m, positions)) return std::nullopt;
  std::array<std::size_t, View::size()> idx{};
  for (std::size_t i = 0; i < positions.size(); ++i) idx[i] = positions[i];
  return View(m, idx);
}

}  // namespace loom

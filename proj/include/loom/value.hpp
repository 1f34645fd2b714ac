#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <typeindex>

#include "loom/atom.hpp"

namespace loom {

struct TypeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnregisteredType : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Stable identifier of a registered element type. Tag 0 is invalid.
class TypeTag {
public:
  constexpr TypeTag() noexcept = default;
  constexpr explicit TypeTag(std::uint32_t id) noexcept : id_(id) {}

  constexpr std::uint32_t id() const noexcept { return id_; }
  constexpr bool valid() const noexcept { return id_ != 0; }

  friend constexpr bool operator==(TypeTag a, TypeTag b) noexcept {
    return a.id_ == b.id_;
  }
  friend constexpr bool operator!=(TypeTag a, TypeTag b) noexcept {
    return a.id_ != b.id_;
  }
  friend constexpr bool operator<(TypeTag a, TypeTag b) noexcept {
    return a.id_ < b.id_;
  }

private:
  std::uint32_t id_ = 0;
};

/// Per-type operations the runtime needs to copy, compare, and render
/// elements it only knows by tag.
struct TypeInfo {
  std::string name;
  std::shared_ptr<void> (*clone)(const void*);
  bool (*equal)(const void*, const void*);
  std::string (*print)(const void*);
};

namespace detail {

TypeTag register_type_erased(std::type_index ti, TypeInfo info);
std::optional<TypeTag> lookup_tag(std::type_index ti);
const TypeInfo& type_info(TypeTag tag);  // throws UnregisteredType
std::optional<TypeTag> lookup_tag_by_name(std::string_view name);

template <class T, class = void>
struct is_streamable : std::false_type {};
template <class T>
struct is_streamable<T, std::void_t<decltype(std::declval<std::ostream&>()
                                             << std::declval<const T&>())>>
    : std::true_type {};

template <class T>
std::string print_value(const T& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return '"' + v + '"';
  } else if constexpr (std::is_same_v<T, Atom>) {
    return to_string(v);
  } else if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (is_streamable<T>::value) {
    std::ostringstream os;
    os << v;
    return os.str();
  } else {
    return std::string("<") + typeid(T).name() + ">";
  }
}

}  // namespace detail

/// Registers T under `name` and returns its tag. Registering the same T
/// twice returns the existing tag. T must be copyable and
/// equality-comparable.
template <class T>
TypeTag register_type(std::string name) {
  static_assert(std::is_copy_constructible_v<T>);
  return detail::register_type_erased(
      typeid(T),
      TypeInfo{
          std::move(name),
          [](const void* p) {
            return std::shared_ptr<void>(new T(*static_cast<const T*>(p)));
          },
          [](const void* a, const void* b) {
            return *static_cast<const T*>(a) == *static_cast<const T*>(b);
          },
          [](const void* p) {
            return detail::print_value(*static_cast<const T*>(p));
          }});
}

template <class T>
std::optional<TypeTag> try_type_tag() {
  return detail::lookup_tag(typeid(T));
}

template <class T>
TypeTag type_tag() {
  if (auto t = try_type_tag<T>()) return *t;
  throw UnregisteredType(std::string("type not registered: ") +
                         typeid(T).name());
}

/// One dynamically typed element: a tag plus a shared immutable payload.
class Value {
public:
  Value() noexcept = default;

  template <class T>
  static Value of(T v) {
    auto tag = type_tag<std::decay_t<T>>();
    return Value(tag, std::make_shared<std::decay_t<T>>(std::move(v)));
  }

  TypeTag tag() const noexcept { return tag_; }
  bool valid() const noexcept { return tag_.valid(); }

  template <class T>
  const T& as() const {
    require_tag(type_tag<T>());
    return *static_cast<const T*>(data_.get());
  }

  template <class T>
  const T* as_if() const noexcept {
    auto t = try_type_tag<T>();
    if (!t || *t != tag_) return nullptr;
    return static_cast<const T*>(data_.get());
  }

  bool equals(const Value& other) const;
  std::string to_string() const;

  /// Fresh payload via the registered clone operation.
  Value clone_deep() const;

  const void* raw() const noexcept { return data_.get(); }

  /// Replaces a shared payload with a private clone and returns a mutable
  /// pointer. Callers must hold the only handle to the enclosing tuple.
  void* raw_unique();

  long payload_use_count() const noexcept { return data_.use_count(); }

  friend bool operator==(const Value& a, const Value& b) { return a.equals(b); }

private:
  Value(TypeTag tag, std::shared_ptr<void> data) noexcept
      : tag_(tag), data_(std::move(data)) {}

  void require_tag(TypeTag expected) const {
    if (tag_ != expected)
      throw TypeError("value type mismatch: have '" +
                      (tag_.valid() ? detail::type_info(tag_).name
                                    : std::string("<invalid>")) +
                      "', want '" + detail::type_info(expected).name + "'");
  }

  TypeTag tag_;
  std::shared_ptr<void> data_;
};

}  // namespace loom

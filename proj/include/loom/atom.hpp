#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace loom {

/// Short constant identifier packed into a 64-bit integer, 6 bits per
/// character over the 64-symbol alphabet {space, '_', '0'-'9', 'A'-'Z',
/// 'a'-'z'}. Characters outside the alphabet encode as space. At most
/// ten characters fit, so every encoding is below 64^10 (top 4 bits zero).
class Atom {
public:
  static constexpr std::size_t max_length = 10;
  static constexpr std::uint64_t max_value = 1ull << 60;  // 64^10

  constexpr Atom() noexcept = default;
  constexpr explicit Atom(std::uint64_t value) noexcept : value_(value) {}

  constexpr std::uint64_t value() const noexcept { return value_; }

  friend constexpr bool operator==(Atom lhs, Atom rhs) noexcept {
    return lhs.value_ == rhs.value_;
  }
  friend constexpr bool operator!=(Atom lhs, Atom rhs) noexcept {
    return lhs.value_ != rhs.value_;
  }
  // Ordering is for containers only; it carries no meaning.
  friend constexpr bool operator<(Atom lhs, Atom rhs) noexcept {
    return lhs.value_ < rhs.value_;
  }

private:
  std::uint64_t value_ = 0;
};

/// Encodes `text` as an Atom. Throws std::length_error if `text` has more
/// than ten characters. Illegal characters map to the space symbol.
Atom atom(std::string_view text);

/// Decodes an Atom back to the shortest string that re-encodes to the same
/// value. Throws std::out_of_range if the value exceeds 64^10.
std::string to_string(Atom a);

}  // namespace loom

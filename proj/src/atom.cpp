#include "loom/atom.hpp"

#include <stdexcept>

namespace loom {

namespace {

// Symbol indices: space = 0, '_' = 1, '0'-'9' = 2..11, 'A'-'Z' = 12..37,
// 'a'-'z' = 38..63. Anything else collapses to the space symbol.
constexpr std::uint64_t symbol_index(char c) noexcept {
  if (c == '_') return 1;
  if (c >= '0' && c <= '9') return 2 + static_cast<std::uint64_t>(c - '0');
  if (c >= 'A' && c <= 'Z') return 12 + static_cast<std::uint64_t>(c - 'A');
  if (c >= 'a' && c <= 'z') return 38 + static_cast<std::uint64_t>(c - 'a');
  return 0;
}

constexpr char index_symbol(std::uint64_t i) noexcept {
  if (i == 0) return ' ';
  if (i == 1) return '_';
  if (i < 12) return static_cast<char>('0' + (i - 2));
  if (i < 38) return static_cast<char>('A' + (i - 12));
  return static_cast<char>('a' + (i - 38));
}

}  // namespace

Atom atom(std::string_view text) {
  if (text.size() > Atom::max_length)
    throw std::length_error("atom literal exceeds ten characters: '" +
                            std::string(text) + "'");
  std::uint64_t value = 0;
  for (char c : text) value = (value << 6) | symbol_index(c);
  return Atom(value);
}

std::string to_string(Atom a) {
  std::uint64_t v = a.value();
  if (v >= Atom::max_value)
    throw std::out_of_range("atom value out of range: " + std::to_string(v));
  std::string out;
  while (v != 0) {
    out.insert(out.begin(), index_symbol(v & 63));
    v >>= 6;
  }
  return out;
}

}  // namespace loom

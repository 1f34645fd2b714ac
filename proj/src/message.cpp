#include "loom/message.hpp"

namespace loom {

namespace {

std::atomic<std::uint64_t> g_deep_copies{0};

const bool message_type_registered = [] {
  register_type<Message>("tuple");
  return true;
}();

}  // namespace

Message::Message(std::vector<Value> elems) {
  if (!elems.empty()) p_ = new Payload(std::move(elems));
}

Message::Message(const Message& other) noexcept : p_(other.p_) {
  if (p_) p_->refs.fetch_add(1, std::memory_order_relaxed);
}

Message::Message(Message&& other) noexcept : p_(other.p_) {
  other.p_ = nullptr;
}

Message& Message::operator=(const Message& other) noexcept {
  if (this == &other) return *this;
  Payload* old = p_;
  p_ = other.p_;
  if (p_) p_->refs.fetch_add(1, std::memory_order_relaxed);
  release(old);
  return *this;
}

Message& Message::operator=(Message&& other) noexcept {
  if (this == &other) return *this;
  release(p_);
  p_ = other.p_;
  other.p_ = nullptr;
  return *this;
}

Message::~Message() { release(p_); }

void Message::release(Payload* p) noexcept {
  if (p && p->refs.fetch_sub(1, std::memory_order_acq_rel) == 1) delete p;
}

std::size_t Message::size() const noexcept { return p_ ? p_->elems.size() : 0; }

const Value& Message::at(std::size_t i) const {
  if (i >= size())
    throw std::out_of_range("tuple index " + std::to_string(i) +
                            " out of range (size " + std::to_string(size()) +
                            ")");
  return p_->elems[i];
}

void Message::detach() {
  if (!p_ || p_->refs.load(std::memory_order_acquire) == 1) return;
  std::vector<Value> copy;
  copy.reserve(p_->elems.size());
  for (const auto& v : p_->elems) copy.push_back(v.clone_deep());
  Payload* fresh = new Payload(std::move(copy));
  g_deep_copies.fetch_add(1, std::memory_order_relaxed);
  release(p_);
  p_ = fresh;
}

Value& Message::at_mut(std::size_t i) {
  if (i >= size())
    throw std::out_of_range("tuple index " + std::to_string(i) +
                            " out of range (size " + std::to_string(size()) +
                            ")");
  detach();
  return p_->elems[i];
}

bool Message::equals(const Message& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i)
    if (!at(i).equals(other.at(i))) return false;
  return true;
}

long Message::use_count() const noexcept {
  return p_ ? p_->refs.load(std::memory_order_relaxed) : 1;
}

std::span<const Value> Message::elements() const noexcept {
  if (!p_) return {};
  return {p_->elems.data(), p_->elems.size()};
}

std::uint64_t Message::deep_copy_count() noexcept {
  return g_deep_copies.load(std::memory_order_relaxed);
}

std::string to_string(const Message& m) {
  std::string out = "{";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i != 0) out += ", ";
    out += m.at(i).to_string();
  }
  out += "}";
  return out;
}

namespace detail {

namespace {

bool match_rec(std::span<const std::optional<TypeTag>> pattern,
               const Message& m, std::size_t pi, std::size_t mi,
               std::vector<std::size_t>& positions) {
  if (pi == pattern.size()) return mi == m.size();
  if (!pattern[pi]) {
    // Wildcard: absorb as few elements as possible first.
    for (std::size_t k = mi; k <= m.size(); ++k)
      if (match_rec(pattern, m, pi + 1, k, positions)) return true;
    return false;
  }
  if (mi >= m.size() || m.tag_at(mi) != *pattern[pi]) return false;
  positions.push_back(mi);
  if (match_rec(pattern, m, pi + 1, mi + 1, positions)) return true;
  positions.pop_back();
  return false;
}

}  // namespace

bool match_tag_seq(std::span<const std::optional<TypeTag>> pattern,
                   const Message& m, std::vector<std::size_t>& positions) {
  positions.clear();
  return match_rec(pattern, m, 0, 0, positions);
}

}  // namespace detail

}  // namespace loom

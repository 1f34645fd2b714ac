#include "loom/mailbox.hpp"

#include <cassert>

namespace loom {

MailNode* Mailbox::blocked_marker() noexcept {
  static MailNode marker;
  return &marker;
}

Mailbox::~Mailbox() { drain(); }

EnqueueResult Mailbox::enqueue(MailNode* n) noexcept {
  MailNode* e = intake_.load(std::memory_order_relaxed);
  for (;;) {
    if (e == blocked_marker()) {
      n->next = nullptr;
      if (intake_.compare_exchange_weak(e, n, std::memory_order_release,
                                        std::memory_order_relaxed))
        return EnqueueResult::enqueued_needs_wakeup;
    } else {
      n->next = e;
      if (intake_.compare_exchange_weak(e, n, std::memory_order_release,
                                        std::memory_order_relaxed))
        return EnqueueResult::enqueued;
    }
  }
}

std::unique_ptr<MailNode> Mailbox::try_dequeue() noexcept {
  if (!cache_head_) {
    MailNode* e = intake_.load(std::memory_order_acquire);
    for (;;) {
      if (!e || e == blocked_marker()) return nullptr;
      if (intake_.compare_exchange_weak(e, nullptr, std::memory_order_acquire,
                                        std::memory_order_acquire))
        break;
    }
    // Reverse the LIFO intake into FIFO order.
    MailNode* prev = nullptr;
    while (e) {
      MailNode* next = e->next;
      e->next = prev;
      prev = e;
      e = next;
      ++reversal_moves_;
    }
    cache_head_ = prev;
  }
  MailNode* head = cache_head_;
  cache_head_ = head->next;
  head->next = nullptr;
  return std::unique_ptr<MailNode>(head);
}

bool Mailbox::mark_blocked_if_empty() noexcept {
  assert(cache_head_ == nullptr);
  MailNode* e = intake_.load(std::memory_order_relaxed);
  for (;;) {
    if (e == blocked_marker()) return true;
    if (e != nullptr) return false;
    if (intake_.compare_exchange_weak(e, blocked_marker(),
                                      std::memory_order_release,
                                      std::memory_order_relaxed))
      return true;
  }
}

bool Mailbox::blocked() const noexcept {
  return intake_.load(std::memory_order_relaxed) == blocked_marker();
}

void Mailbox::drain() noexcept {
  // Clear a blocked marker so try_dequeue sees the real intake.
  MailNode* marker = blocked_marker();
  intake_.compare_exchange_strong(marker, nullptr,
                                  std::memory_order_acq_rel,
                                  std::memory_order_relaxed);
  while (try_dequeue()) {
  }
}

}  // namespace loom

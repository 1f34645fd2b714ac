#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

#include "loom/message.hpp"

namespace loom {

class Actor;
using ActorPtr = std::shared_ptr<Actor>;

enum class NodeKind : std::uint8_t {
  normal,
  sync_request,
  sync_response,
  exit_signal,
  behavior_timeout,
  sync_timeout,
};

struct MailNode {
  MailNode* next = nullptr;
  NodeKind kind = NodeKind::normal;
  ActorPtr sender;
  Message msg;
  std::uint64_t sync_id = 0;  // sync_request/sync_response/sync_timeout
  std::uint64_t gen = 0;      // behavior_timeout
};

enum class EnqueueResult : std::uint8_t {
  enqueued,
  /// The enqueue observed the consumer-blocked marker; exactly one producer
  /// per blocked period gets this and must wake the consumer.
  enqueued_needs_wakeup,
};

/// Single-consumer/multi-producer mailbox: an atomic LIFO intake pushed
/// with one CAS per enqueue, drained all-at-once by the consumer and
/// reversed into a private FIFO cache. The intake slot doubles as the
/// consumer status word: a reserved marker means the consumer is blocked.
class Mailbox {
public:
  Mailbox() = default;
  ~Mailbox();

  Mailbox(const Mailbox&) = delete;
  Mailbox& operator=(const Mailbox&) = delete;

  /// Takes ownership of `n`. Lock-free; one successful CAS per call.
  EnqueueResult enqueue(MailNode* n) noexcept;

  /// Consumer only. Pops the cache head, refilling the cache from the
  /// intake (take-all, then reverse) when it is empty. Null iff both the
  /// cache and the intake are empty.
  std::unique_ptr<MailNode> try_dequeue() noexcept;

  /// Consumer only; requires an empty cache. Installs the blocked marker if
  /// the intake is empty; returns false if a producer won the race and the
  /// consumer must keep draining. Idempotent while already blocked.
  bool mark_blocked_if_empty() noexcept;

  bool blocked() const noexcept;

  /// Total nodes moved stack-to-cache; reversal work is bounded by the
  /// number of enqueues.
  std::uint64_t reversal_moves() const noexcept { return reversal_moves_; }

  /// Consumer only: discards everything currently queued.
  void drain() noexcept;

private:
  static MailNode* blocked_marker() noexcept;

  std::atomic<MailNode*> intake_{nullptr};
  MailNode* cache_head_ = nullptr;
  std::uint64_t reversal_moves_ = 0;
};

}  // namespace loom

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "loom/dsl.hpp"
#include "loom/mailbox.hpp"
#include "loom/pattern.hpp"

namespace loom {

class LocalActor;
class EventBasedActor;
class BlockingActor;

/// Exit reason of a normally finished actor: the atom "normal".
Value exit_normal();
bool is_normal_exit(const Value& reason);

/// Death notification delivered to monitors as an ordinary message.
struct DownMsg {
  ActorPtr source;
  Value reason;
  bool operator==(const DownMsg& o) const {
    return source == o.source && reason.equals(o.reason);
  }
};

/// Exit signal delivered to link partners; actors trapping exits receive it
/// as an ordinary message.
struct ExitMsg {
  ActorPtr source;
  Value reason;
  bool operator==(const ExitMsg& o) const {
    return source == o.source && reason.equals(o.reason);
  }
};

/// Internal control-flow exception carrying an actor's exit reason.
struct ActorExitedException {
  Value reason;
};

/// Public face of an actor: message intake plus the link/monitor surface.
/// Private mailbox consumption lives in LocalActor.
class Actor : public std::enable_shared_from_this<Actor> {
public:
  virtual ~Actor();

  Actor(const Actor&) = delete;
  Actor& operator=(const Actor&) = delete;

  std::uint64_t id() const noexcept { return id_; }

  /// Asynchronous delivery; silently discarded once the actor terminated.
  void enqueue(ActorPtr sender, Message msg);
  void enqueue_node(std::unique_ptr<MailNode> n);

  /// Internal: registers the actor with the runtime liveness counters.
  void attach_to_runtime();

  bool terminated() const noexcept {
    return terminated_.load(std::memory_order_acquire);
  }
  /// Recorded exit reason; invalid Value while the actor is alive.
  Value exit_reason() const;

  /// `observer` receives a DownMsg when this actor terminates. Monitoring a
  /// terminated actor delivers the DownMsg immediately.
  void add_monitor(const ActorPtr& observer);
  void remove_monitor(const ActorPtr& observer);

  /// Bidirectional, idempotent failure-propagation bond. Linking to a
  /// terminated actor delivers an immediate exit signal with its recorded
  /// reason.
  friend void link(const ActorPtr& a, const ActorPtr& b);
  friend void unlink(const ActorPtr& a, const ActorPtr& b);

protected:
  Actor();

  virtual void wakeup() = 0;

  /// Idempotent; records the reason, notifies monitors, signals link
  /// partners (cascading per the Erlang rules), and drains the mailbox.
  void terminate(Value reason);

  bool add_link(const ActorPtr& partner);   // false once terminated
  void drop_link(const ActorPtr& partner);
  void deliver_exit_signal(ActorPtr source, Value reason);

  Mailbox mailbox_;
  bool pool_counted_ = false;  // participates in runtime liveness counters

private:
  const std::uint64_t id_;
  mutable std::mutex state_mtx_;
  std::vector<ActorPtr> links_;
  std::vector<ActorPtr> monitors_;
  std::atomic<bool> terminated_{false};
  Value exit_reason_;
};

/// Private access to an actor: processing context, behavior bookkeeping,
/// trap-exit flag, and synchronous-request state. Only the actor itself
/// touches this surface.
class LocalActor : public Actor {
public:
  ActorPtr ptr() { return shared_from_this(); }

  bool trapping_exits() const noexcept { return trap_exit_; }
  void trap_exit(bool enabled) noexcept { trap_exit_ = enabled; }

  /// The message currently being processed.
  const Message& last_received() const noexcept { return cur_msg_; }
  ActorPtr last_sender() const noexcept { return cur_sender_; }

  /// Sends `msg` to the current message's sender; responses to synchronous
  /// requests carry the request's correlation id.
  void reply(Message msg);

  /// Stops execution with the given reason (throws through the caller).
  [[noreturn]] void quit(Value reason = exit_normal());

  void link_to(const ActorPtr& other);
  void unlink_from(const ActorPtr& other);
  void monitor(const ActorPtr& target);
  void demonitor(const ActorPtr& target);

  /// Allocates a fresh synchronous-request id and marks it open.
  std::uint64_t start_request();

protected:
  LocalActor() = default;

  enum class Preprocessed {
    pass_to_behavior,  // node is ordinary mail (possibly a trapped exit)
    consumed,          // handled (or dropped) by the signal layer
    retain,            // keep for a later await (open sync response)
  };

  /// Signal-layer handling of a freshly dequeued node; runs before any
  /// behavior matching. Throws ActorExitedException for fatal exit signals.
  Preprocessed preprocess(std::unique_ptr<MailNode>& n);

  /// Applies `b` to the node's message with the processing context set.
  /// True iff a case matched (the node is then consumed).
  bool apply_behavior(const Behavior& b, MailNode& n);

  static std::uint64_t next_sync_id();
  void register_request(std::uint64_t id) { open_requests_.insert(id); }

  virtual void install_response_handler(std::uint64_t id, Behavior b);

  friend class ResponseHandle;

  std::deque<std::unique_ptr<MailNode>> skipped_;
  std::unordered_map<std::uint64_t, Behavior> pending_responses_;
  std::unordered_set<std::uint64_t> open_requests_;

  Message cur_msg_;
  ActorPtr cur_sender_;
  std::uint64_t cur_sync_id_ = 0;
  NodeKind cur_kind_ = NodeKind::normal;
  bool processing_ = false;
  bool trap_exit_ = false;
};

struct KeepBehavior {};
struct DiscardBehavior {};
inline constexpr KeepBehavior keep_behavior{};
inline constexpr DiscardBehavior discard_behavior{};

/// Cooperatively scheduled actor driven by a behavior stack; runs on the
/// shared worker pool and must never block.
class EventBasedActor : public LocalActor {
public:
  /// Replaces the top of the behavior stack (discard policy).
  void become(Behavior b);
  void become(DiscardBehavior, Behavior b) { become(std::move(b)); }
  /// Pushes onto the behavior stack; unbecome() returns to the previous one.
  void become(KeepBehavior, Behavior b);
  /// Pops the behavior stack; an empty stack ends the actor normally.
  void unbecome();

  template <class C1, class... Cs>
    requires(detail::is_behavior_part<C1>)
  void become(C1&& c1, Cs&&... cs) {
    become(Behavior(std::forward<C1>(c1), std::forward<Cs>(cs)...));
  }
  template <class C1, class... Cs>
    requires(detail::is_behavior_part<C1>)
  void become(KeepBehavior k, C1&& c1, Cs&&... cs) {
    become(k, Behavior(std::forward<C1>(c1), std::forward<Cs>(cs)...));
  }

  /// Scheduler entry point: processes mail until the mailbox is exhausted,
  /// the message budget runs out, or the actor terminates.
  void run_turn();

protected:
  virtual void init() = 0;

  void wakeup() override;
  void install_response_handler(std::uint64_t id, Behavior b) override;

private:
  enum class Step { progressed, idle };

  Step step();
  bool consume_with_behavior(MailNode& n);
  void run_timeout_handler(const TimeoutCase& tc);
  void finish(Value reason);
  void arm_behavior_timeout(const TimeoutCase& tc);

  std::vector<std::shared_ptr<const Behavior>> stack_;
  std::size_t scan_pos_ = 0;        // skipped_ prefix already tested
  std::uint64_t activity_gen_ = 0;  // bumped on every match / become
  std::uint64_t armed_gen_ = std::uint64_t(-1);
  bool started_ = false;
};

/// Event-based actor defined by a plain callable; the callable runs as the
/// init step and normally installs a behavior via become().
class FunctionActor : public EventBasedActor {
public:
  explicit FunctionActor(std::function<void()> body) : body_(std::move(body)) {}

protected:
  void init() override { body_(); }

private:
  std::function<void()> body_;
};

/// CRTP convenience: the derived class exposes a `Behavior init_state`
/// member that becomes the initial behavior.
template <class Derived>
class StateBasedActor : public EventBasedActor {
protected:
  void init() override {
    become(static_cast<Derived*>(this)->init_state);
  }
};

/// Actor allowed to block: detached (dedicated-thread) actors and
/// implicitly converted foreign threads.
class BlockingActor : public LocalActor {
public:
  /// Scans the mailbox front to back; consumes the first message the
  /// behavior matches, retaining skipped messages in order. With a timeout
  /// clause, runs the timeout handler once the duration elapses without a
  /// match (clock starts at entry).
  void receive(const Behavior& b);
  void receive(Behavior&& b) { receive(b); }

  template <class C1, class... Cs>
    requires(detail::is_behavior_part<C1>)
  void receive(C1&& c1, Cs&&... cs) {
    receive(Behavior(std::forward<C1>(c1), std::forward<Cs>(cs)...));
  }

  void receive_loop(const Behavior& b);

  /// Blocks until the response correlated with `id` arrives or the
  /// behavior's (mandatory) timeout fires.
  void await_response(std::uint64_t id, const Behavior& b);

protected:
  void wakeup() override;

  /// True once matched; false on timeout.
  bool receive_impl(const Behavior& b,
                    std::optional<std::chrono::steady_clock::time_point>
                        deadline_override,
                    std::uint64_t awaited_sync_id);

  std::mutex wake_mtx_;
  std::condition_variable wake_cv_;
  bool signaled_ = false;
};

/// Actor bound to a dedicated thread.
class DetachedActor : public BlockingActor {
public:
  explicit DetachedActor(std::function<void()> body) : body_(std::move(body)) {}

  void start();  // launches the thread; called once by spawn

private:
  std::function<void()> body_;
};

/// Implicit conversion target for foreign threads; terminated at thread
/// exit.
class ConvertedThreadActor : public BlockingActor {
public:
  void shutdown() {
    if (!terminated()) terminate(exit_normal());
  }
};

}  // namespace loom

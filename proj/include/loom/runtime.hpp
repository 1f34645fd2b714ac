#pragma once

#include <atomic>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "loom/actor.hpp"
#include "loom/scheduler.hpp"

namespace loom {

/// Process-wide actor environment: worker pool, timer, and liveness
/// counters. Pool size comes from set_pool_size(), the environment variable
/// LOOM_SCHEDULER_THREADS, or hardware concurrency, in that order.
class Runtime {
public:
  static Runtime& instance();

  /// Effective only before the first instance() call.
  static void set_pool_size(std::size_t n);

  Scheduler& scheduler() { return scheduler_; }
  Timer& timer() { return timer_; }
  std::size_t pool_size() const noexcept { return scheduler_.pool_size(); }

  /// Messages a pooled actor may process per scheduling turn before it
  /// yields the worker.
  std::size_t throughput() const noexcept { return throughput_; }
  void set_throughput(std::size_t n) noexcept { throughput_ = n; }

  // Liveness counters cover spawned actors only, not converted threads.
  std::uint64_t total_spawned() const noexcept {
    return total_spawned_.load(std::memory_order_relaxed);
  }
  std::size_t alive() const noexcept {
    return alive_.load(std::memory_order_relaxed);
  }
  std::size_t peak_alive() const noexcept {
    return peak_alive_.load(std::memory_order_relaxed);
  }
  void reset_peak() noexcept {
    peak_alive_.store(alive_.load(std::memory_order_relaxed),
                      std::memory_order_relaxed);
  }

  /// Blocks until every spawned actor has terminated.
  void await_all_actors_done();

  /// Registers a spawned actor; the runtime keeps it alive until it
  /// terminates, so idle actors need no external references.
  void note_spawn(ActorPtr a);
  void note_exit(Actor* a);

private:
  Runtime();

  static std::size_t configured_pool_size();

  std::mutex registry_mtx_;
  std::unordered_map<Actor*, ActorPtr> registry_;
  Scheduler scheduler_;
  Timer timer_;
  std::atomic<std::size_t> throughput_{300};
  std::atomic<std::uint64_t> total_spawned_{0};
  std::atomic<std::size_t> alive_{0};
  std::atomic<std::size_t> peak_alive_{0};
  std::mutex done_mtx_;
  std::condition_variable done_cv_;
};

/// Calling thread's actor context; a foreign thread is converted to an
/// actor on first use, so the result is never null.
LocalActor* self();
ActorPtr self_ptr();

namespace detail {
ActorPtr spawn_event(std::shared_ptr<EventBasedActor> a);
ActorPtr spawn_detached_fn(std::function<void()> body);
ActorPtr spawn_scheduled_fn(std::function<void()> body);

struct CurrentActorGuard {
  explicit CurrentActorGuard(LocalActor* a);
  ~CurrentActorGuard();
  LocalActor* saved;
};
}  // namespace detail

struct Detached {};
inline constexpr Detached detached{};

/// Spawns a pooled (event-based) actor from a callable; the callable is the
/// actor's init step and runs with `self()` bound to the new actor.
/// Arguments are evaluated at the call site, so `self()` passed as an
/// argument still refers to the spawning actor.
template <class F, class... Args>
  requires std::invocable<F&, Args&...>
ActorPtr spawn(F f, Args... args) {
  return detail::spawn_scheduled_fn(
      [f = std::move(f), ... args = std::move(args)]() mutable { f(args...); });
}

/// Spawns a dedicated-thread actor; its body may use blocking receive.
template <class F, class... Args>
  requires std::invocable<F&, Args&...>
ActorPtr spawn(Detached, F f, Args... args) {
  return detail::spawn_detached_fn(
      [f = std::move(f), ... args = std::move(args)]() mutable { f(args...); });
}

/// Spawns a class-defined event-based actor: `spawn<MyActor>(ctor args)`.
template <class T, class... Args>
  requires std::derived_from<T, EventBasedActor>
ActorPtr spawn(Args&&... args) {
  return detail::spawn_event(std::make_shared<T>(std::forward<Args>(args)...));
}

void send(const ActorPtr& to, Message msg);

template <class... Ts>
  requires(sizeof...(Ts) > 0 &&
           !(sizeof...(Ts) == 1 &&
             (std::is_same_v<std::decay_t<Ts>, Message> && ...)))
void send(const ActorPtr& to, Ts&&... xs) {
  send(to, make_message(std::forward<Ts>(xs)...));
}

/// Handle to the response of a synchronous request; consumable once.
class ResponseHandle {
public:
  ResponseHandle(std::uint64_t id);

  std::uint64_t id() const noexcept { return id_; }

  /// Blocking wait (detached/converted actors); the behavior must carry a
  /// timeout clause.
  void await(Behavior b);
  /// One-shot event-based handler (pooled actors); the behavior must carry
  /// a timeout clause. The actor keeps its current behavior.
  void then(Behavior b);

private:
  void consume();

  std::uint64_t id_;
  std::shared_ptr<std::atomic<bool>> used_;
};

ResponseHandle sync_send(const ActorPtr& to, Message msg);

template <class... Ts>
  requires(sizeof...(Ts) > 0 &&
           !(sizeof...(Ts) == 1 &&
             (std::is_same_v<std::decay_t<Ts>, Message> && ...)))
ResponseHandle sync_send(const ActorPtr& to, Ts&&... xs) {
  return sync_send(to, make_message(std::forward<Ts>(xs)...));
}

// Convenience wrappers over the current actor context. become/unbecome
// require a pooled actor; receive requires a blocking-capable one.
void become(Behavior b);
void become(KeepBehavior, Behavior b);
void become(DiscardBehavior, Behavior b);
void unbecome();

void receive(Behavior b);
void receive_loop(Behavior b);

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

template <class C1, class... Cs>
  requires(detail::is_behavior_part<C1>)
void receive(C1&& c1, Cs&&... cs) {
  receive(Behavior(std::forward<C1>(c1), std::forward<Cs>(cs)...));
}

template <class C1, class... Cs>
  requires(detail::is_behavior_part<C1>)
void receive_loop(C1&& c1, Cs&&... cs) {
  receive_loop(Behavior(std::forward<C1>(c1), std::forward<Cs>(cs)...));
}

template <class T>
class ReceiveForProxy {
public:
  ReceiveForProxy(T& counter, T last) : counter_(counter), last_(last) {}
  void operator()(const Behavior& b) {
    for (; counter_ < last_; ++counter_) receive(b);
  }

private:
  T& counter_;
  T last_;
};

/// `receive_for(i, n)(behavior)` runs the behavior while i < n.
template <class T>
ReceiveForProxy<T> receive_for(T& counter, T last) {
  return ReceiveForProxy<T>(counter, last);
}

class DoReceiveProxy {
public:
  explicit DoReceiveProxy(Behavior b) : b_(std::move(b)) {}
  /// Receives repeatedly until the predicate returns true (checked after
  /// each consumed message).
  void until(const std::function<bool()>& done);

private:
  Behavior b_;
};

DoReceiveProxy do_receive(Behavior b);

void reply(Message msg);

template <class... Ts>
  requires(sizeof...(Ts) > 0 &&
           !(sizeof...(Ts) == 1 &&
             (std::is_same_v<std::decay_t<Ts>, Message> && ...)))
void reply(Ts&&... xs) {
  reply(make_message(std::forward<Ts>(xs)...));
}

void await_all_actors_done();

}  // namespace loom

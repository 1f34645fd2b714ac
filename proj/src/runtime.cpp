#include "loom/runtime.hpp"

#include <cstdlib>
#include <string>

namespace loom {

namespace {

std::atomic<std::size_t> g_pool_override{0};
thread_local LocalActor* t_current = nullptr;

// Owns the calling thread's implicitly converted actor; the destructor runs
// at thread exit and terminates it (propagating to links/monitors).
struct ThreadActorOwner {
  std::shared_ptr<ConvertedThreadActor> actor;
  ~ThreadActorOwner() {
    if (actor) actor->shutdown();
  }
};
thread_local ThreadActorOwner t_owner;

}  // namespace

Runtime& Runtime::instance() {
  static Runtime rt;
  return rt;
}

void Runtime::set_pool_size(std::size_t n) {
  g_pool_override.store(n, std::memory_order_relaxed);
}

std::size_t Runtime::configured_pool_size() {
  if (auto n = g_pool_override.load(std::memory_order_relaxed)) return n;
  if (const char* e = std::getenv("LOOM_SCHEDULER_THREADS")) {
    auto v = std::atoi(e);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  auto hc = std::thread::hardware_concurrency();
  return hc != 0 ? hc : 2;
}

Runtime::Runtime() : scheduler_(configured_pool_size()) {}

void Runtime::note_spawn(ActorPtr a) {
  total_spawned_.fetch_add(1, std::memory_order_relaxed);
  auto now = alive_.fetch_add(1, std::memory_order_relaxed) + 1;
  auto peak = peak_alive_.load(std::memory_order_relaxed);
  while (now > peak &&
         !peak_alive_.compare_exchange_weak(peak, now,
                                            std::memory_order_relaxed)) {
  }
  std::lock_guard lock(registry_mtx_);
  registry_.emplace(a.get(), std::move(a));
}

void Runtime::note_exit(Actor* a) {
  {
    std::lock_guard lock(done_mtx_);
    alive_.fetch_sub(1, std::memory_order_relaxed);
  }
  done_cv_.notify_all();
  ActorPtr keep;  // drop the registry reference outside the lock
  {
    std::lock_guard lock(registry_mtx_);
    auto it = registry_.find(a);
    if (it != registry_.end()) {
      keep = std::move(it->second);
      registry_.erase(it);
    }
  }
}

void Runtime::await_all_actors_done() {
  std::unique_lock lock(done_mtx_);
  done_cv_.wait(lock,
                [this] { return alive_.load(std::memory_order_relaxed) == 0; });
}

void await_all_actors_done() { Runtime::instance().await_all_actors_done(); }

LocalActor* self() {
  if (!t_current) {
    auto a = std::make_shared<ConvertedThreadActor>();
    t_owner.actor = a;
    t_current = a.get();
  }
  return t_current;
}

ActorPtr self_ptr() { return self()->ptr(); }

namespace detail {

CurrentActorGuard::CurrentActorGuard(LocalActor* a) : saved(t_current) {
  t_current = a;
}
CurrentActorGuard::~CurrentActorGuard() { t_current = saved; }

ActorPtr spawn_event(std::shared_ptr<EventBasedActor> a) {
  a->attach_to_runtime();
  Runtime::instance().scheduler().enqueue(a);
  return a;
}

ActorPtr spawn_scheduled_fn(std::function<void()> body) {
  return spawn_event(std::make_shared<FunctionActor>(std::move(body)));
}

ActorPtr spawn_detached_fn(std::function<void()> body) {
  auto a = std::make_shared<DetachedActor>(std::move(body));
  a->attach_to_runtime();
  a->start();
  return a;
}

}  // namespace detail

void send(const ActorPtr& to, Message msg) {
  if (!to) return;
  to->enqueue(self_ptr(), std::move(msg));
}

ResponseHandle::ResponseHandle(std::uint64_t id)
    : id_(id), used_(std::make_shared<std::atomic<bool>>(false)) {}

void ResponseHandle::consume() {
  if (used_->exchange(true))
    throw std::logic_error("response handle already used");
}

void ResponseHandle::await(Behavior b) {
  consume();
  auto* ba = dynamic_cast<BlockingActor*>(self());
  if (!ba)
    throw std::logic_error(
        "await() requires a blocking-capable actor; pooled actors use then()");
  ba->await_response(id_, b);
}

void ResponseHandle::then(Behavior b) {
  consume();
  if (!b.timeout())
    throw MatchDefinitionError("response handlers require a timeout clause");
  self()->install_response_handler(id_, std::move(b));
}

ResponseHandle sync_send(const ActorPtr& to, Message msg) {
  auto* s = self();
  auto id = s->start_request();
  if (to && !to->terminated()) {
    auto n = std::make_unique<MailNode>();
    n->kind = NodeKind::sync_request;
    n->sender = s->ptr();
    n->msg = std::move(msg);
    n->sync_id = id;
    to->enqueue_node(std::move(n));
  }
  // A dead or null target never answers; the caller's timeout reports it.
  return ResponseHandle(id);
}

namespace {

EventBasedActor* event_self(const char* what) {
  auto* a = dynamic_cast<EventBasedActor*>(self());
  if (!a)
    throw std::logic_error(std::string(what) + " requires a pooled actor");
  return a;
}

BlockingActor* blocking_self(const char* what) {
  auto* a = dynamic_cast<BlockingActor*>(self());
  if (!a)
    throw std::logic_error(std::string(what) +
                           " requires a detached or converted-thread actor");
  return a;
}

}  // namespace

void become(Behavior b) { event_self("become")->become(std::move(b)); }
void become(KeepBehavior, Behavior b) {
  event_self("become")->become(keep_behavior, std::move(b));
}
void become(DiscardBehavior, Behavior b) {
  event_self("become")->become(std::move(b));
}
void unbecome() { event_self("unbecome")->unbecome(); }

void receive(Behavior b) { blocking_self("receive")->receive(b); }
void receive_loop(Behavior b) { blocking_self("receive_loop")->receive_loop(b); }

void DoReceiveProxy::until(const std::function<bool()>& done) {
  auto* a = blocking_self("do_receive");
  do {
    a->receive(b_);
  } while (!done());
}

DoReceiveProxy do_receive(Behavior b) { return DoReceiveProxy(std::move(b)); }

void reply(Message msg) { self()->reply(std::move(msg)); }

}  // namespace loom

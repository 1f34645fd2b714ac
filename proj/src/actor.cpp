#include "loom/actor.hpp"

#include <algorithm>
#include <cstdlib>

#include "loom/runtime.hpp"

namespace loom {

namespace {

std::atomic<std::uint64_t> g_next_actor_id{1};
std::atomic<std::uint64_t> g_next_sync_id{1};

const bool runtime_types_registered = [] {
  register_type<ActorPtr>("actor");
  register_type<ExitMsg>("exit_msg");
  register_type<DownMsg>("down_msg");
  return true;
}();

}  // namespace

Value exit_normal() {
  static const Value v = Value::of(atom("normal"));
  return v;
}

bool is_normal_exit(const Value& reason) {
  return reason.equals(exit_normal());
}

// ---------------------------------------------------------------- Actor --

Actor::Actor() : id_(g_next_actor_id.fetch_add(1, std::memory_order_relaxed)) {}

Actor::~Actor() {
  mailbox_.drain();
  // An actor dropped without terminating still leaves the liveness count.
  if (pool_counted_ && !terminated())
    Runtime::instance().note_exit(this);
}

void Actor::attach_to_runtime() {
  pool_counted_ = true;
  Runtime::instance().note_spawn(shared_from_this());
}

void Actor::enqueue(ActorPtr sender, Message msg) {
  auto n = std::make_unique<MailNode>();
  n->kind = NodeKind::normal;
  n->sender = std::move(sender);
  n->msg = std::move(msg);
  enqueue_node(std::move(n));
}

void Actor::enqueue_node(std::unique_ptr<MailNode> n) {
  if (terminated()) return;  // discarded
  if (mailbox_.enqueue(n.release()) == EnqueueResult::enqueued_needs_wakeup)
    wakeup();
}

Value Actor::exit_reason() const {
  std::lock_guard lock(state_mtx_);
  return exit_reason_;
}

void Actor::terminate(Value reason) {
  auto self = shared_from_this();  // outlive the registry reference
  std::vector<ActorPtr> links, monitors;
  {
    std::lock_guard lock(state_mtx_);
    if (terminated_.load(std::memory_order_relaxed)) return;
    exit_reason_ = reason;
    terminated_.store(true, std::memory_order_release);
    links.swap(links_);
    monitors.swap(monitors_);
  }
  // Leave the liveness count before anyone can observe the death, so a
  // monitor reacting to the down message never sees this actor as alive.
  if (pool_counted_) Runtime::instance().note_exit(this);
  for (auto& m : monitors)
    m->enqueue(self, make_message(DownMsg{self, reason}));
  for (auto& l : links) {
    auto n = std::make_unique<MailNode>();
    n->kind = NodeKind::exit_signal;
    n->sender = self;
    n->msg = make_message(ExitMsg{self, reason});
    l->enqueue_node(std::move(n));
  }
  mailbox_.drain();
}

bool Actor::add_link(const ActorPtr& partner) {
  std::lock_guard lock(state_mtx_);
  if (terminated_.load(std::memory_order_relaxed)) return false;
  if (std::find(links_.begin(), links_.end(), partner) == links_.end())
    links_.push_back(partner);
  return true;
}

void Actor::drop_link(const ActorPtr& partner) {
  std::lock_guard lock(state_mtx_);
  std::erase(links_, partner);
}

void Actor::deliver_exit_signal(ActorPtr source, Value reason) {
  auto n = std::make_unique<MailNode>();
  n->kind = NodeKind::exit_signal;
  n->sender = source;
  n->msg = make_message(ExitMsg{std::move(source), std::move(reason)});
  enqueue_node(std::move(n));
}

void Actor::add_monitor(const ActorPtr& observer) {
  {
    std::lock_guard lock(state_mtx_);
    if (!terminated_.load(std::memory_order_relaxed)) {
      if (std::find(monitors_.begin(), monitors_.end(), observer) ==
          monitors_.end())
        monitors_.push_back(observer);
      return;
    }
  }
  // Monitoring the dead: deliver the down message right away.
  auto self = shared_from_this();
  observer->enqueue(self, make_message(DownMsg{self, exit_reason()}));
}

void Actor::remove_monitor(const ActorPtr& observer) {
  std::lock_guard lock(state_mtx_);
  std::erase(monitors_, observer);
}

void link(const ActorPtr& a, const ActorPtr& b) {
  if (!a || !b || a == b) return;
  bool a_ok = a->add_link(b);
  bool b_ok = b->add_link(a);
  if (a_ok && !b_ok) {
    a->drop_link(b);
    a->deliver_exit_signal(b, b->exit_reason());
  } else if (b_ok && !a_ok) {
    b->drop_link(a);
    b->deliver_exit_signal(a, a->exit_reason());
  }
}

void unlink(const ActorPtr& a, const ActorPtr& b) {
  if (!a || !b) return;
  a->drop_link(b);
  b->drop_link(a);
}

// ----------------------------------------------------------- LocalActor --

void LocalActor::reply(Message msg) {
  if (!processing_)
    throw std::logic_error("reply() called outside message processing");
  if (!cur_sender_) return;  // sender already gone
  if (cur_kind_ == NodeKind::sync_request && cur_sync_id_ != 0) {
    auto n = std::make_unique<MailNode>();
    n->kind = NodeKind::sync_response;
    n->sender = ptr();
    n->msg = std::move(msg);
    n->sync_id = cur_sync_id_;
    cur_sender_->enqueue_node(std::move(n));
  } else {
    cur_sender_->enqueue(ptr(), std::move(msg));
  }
}

void LocalActor::quit(Value reason) {
  throw ActorExitedException{std::move(reason)};
}

void LocalActor::link_to(const ActorPtr& other) { link(ptr(), other); }
void LocalActor::unlink_from(const ActorPtr& other) { unlink(ptr(), other); }
void LocalActor::monitor(const ActorPtr& target) {
  if (target) target->add_monitor(ptr());
}
void LocalActor::demonitor(const ActorPtr& target) {
  if (target) target->remove_monitor(ptr());
}

std::uint64_t LocalActor::next_sync_id() {
  return g_next_sync_id.fetch_add(1, std::memory_order_relaxed);
}

std::uint64_t LocalActor::start_request() {
  auto id = next_sync_id();
  open_requests_.insert(id);
  return id;
}

void LocalActor::install_response_handler(std::uint64_t, Behavior) {
  throw std::logic_error(
      "then() requires a pooled actor; blocking actors use await()");
}

LocalActor::Preprocessed LocalActor::preprocess(std::unique_ptr<MailNode>& n) {
  switch (n->kind) {
    case NodeKind::normal:
    case NodeKind::sync_request:
      return Preprocessed::pass_to_behavior;
    case NodeKind::exit_signal: {
      const auto& em = n->msg.get<ExitMsg>(0);
      drop_link(em.source);  // the partner is gone either way
      if (trap_exit_) {
        n->kind = NodeKind::normal;  // deliver as an ordinary message
        return Preprocessed::pass_to_behavior;
      }
      if (!is_normal_exit(em.reason)) throw ActorExitedException{em.reason};
      return Preprocessed::consumed;
    }
    case NodeKind::sync_response: {
      auto it = pending_responses_.find(n->sync_id);
      if (it != pending_responses_.end()) {
        Behavior b = std::move(it->second);
        pending_responses_.erase(it);
        open_requests_.erase(n->sync_id);
        apply_behavior(b, *n);  // one-shot handler
        return Preprocessed::consumed;
      }
      if (open_requests_.count(n->sync_id) != 0) return Preprocessed::retain;
      return Preprocessed::consumed;  // stale response: dropped
    }
    case NodeKind::sync_timeout: {
      auto it = pending_responses_.find(n->sync_id);
      if (it != pending_responses_.end()) {
        Behavior b = std::move(it->second);
        pending_responses_.erase(it);
        open_requests_.erase(n->sync_id);
        if (b.timeout()) b.timeout()->handler();
      }
      return Preprocessed::consumed;
    }
    case NodeKind::behavior_timeout:
      return Preprocessed::pass_to_behavior;  // interpreted by the run loop
  }
  return Preprocessed::consumed;
}

bool LocalActor::apply_behavior(const Behavior& b, MailNode& n) {
  struct CtxGuard {
    LocalActor* a;
    Message msg;
    ActorPtr sender;
    std::uint64_t sync_id;
    NodeKind kind;
    bool processing;
    ~CtxGuard() {
      a->cur_msg_ = std::move(msg);
      a->cur_sender_ = std::move(sender);
      a->cur_sync_id_ = sync_id;
      a->cur_kind_ = kind;
      a->processing_ = processing;
    }
  } guard{this,          std::move(cur_msg_), std::move(cur_sender_),
          cur_sync_id_,  cur_kind_,           processing_};
  cur_msg_ = n.msg;
  cur_sender_ = n.sender;
  cur_sync_id_ = n.sync_id;
  cur_kind_ = n.kind;
  processing_ = true;
  return b(cur_msg_) == Behavior::Result::matched;
}

// ------------------------------------------------------ EventBasedActor --

void EventBasedActor::become(Behavior b) {
  auto sp = std::make_shared<const Behavior>(std::move(b));
  if (stack_.empty())
    stack_.push_back(std::move(sp));
  else
    stack_.back() = std::move(sp);
  scan_pos_ = 0;  // previously skipped mail gets retested
  ++activity_gen_;
}

void EventBasedActor::become(KeepBehavior, Behavior b) {
  stack_.push_back(std::make_shared<const Behavior>(std::move(b)));
  scan_pos_ = 0;
  ++activity_gen_;
}

void EventBasedActor::unbecome() {
  if (!stack_.empty()) stack_.pop_back();
  scan_pos_ = 0;
  ++activity_gen_;
}

void EventBasedActor::wakeup() {
  Runtime::instance().scheduler().enqueue(
      std::static_pointer_cast<EventBasedActor>(shared_from_this()));
}

void EventBasedActor::finish(Value reason) { terminate(std::move(reason)); }

void EventBasedActor::run_turn() {
  if (terminated()) return;
  detail::CurrentActorGuard guard(this);
  try {
    if (!started_) {
      started_ = true;
      init();
      if (stack_.empty()) {
        finish(exit_normal());
        return;
      }
    }
    auto budget = Runtime::instance().throughput();
    for (;;) {
      if (budget == 0) {
        // Yield the worker but stay runnable.
        Runtime::instance().scheduler().enqueue(
            std::static_pointer_cast<EventBasedActor>(shared_from_this()));
        return;
      }
      if (step() == Step::progressed) {
        --budget;
        continue;
      }
      if (!stack_.empty()) {
        const auto& top = *stack_.back();
        if (top.timeout() && armed_gen_ != activity_gen_)
          arm_behavior_timeout(*top.timeout());
      }
      if (mailbox_.mark_blocked_if_empty()) return;
    }
  } catch (ActorExitedException& e) {
    finish(std::move(e.reason));
  } catch (std::exception& e) {
    finish(Value::of(std::string(e.what())));
  } catch (...) {
    finish(Value::of(std::string("unknown failure")));
  }
}

EventBasedActor::Step EventBasedActor::step() {
  while (scan_pos_ < skipped_.size()) {
    MailNode* n = skipped_[scan_pos_].get();
    if (n->kind == NodeKind::sync_response) {
      ++scan_pos_;  // invisible to behaviors; consumed via then()
      continue;
    }
    if (!stack_.empty() && consume_with_behavior(*n)) {
      skipped_.erase(skipped_.begin() +
                     static_cast<std::ptrdiff_t>(scan_pos_));
      return Step::progressed;
    }
    ++scan_pos_;
  }
  auto n = mailbox_.try_dequeue();
  if (!n) return Step::idle;
  if (n->kind == NodeKind::behavior_timeout) {
    if (n->gen == activity_gen_ && !stack_.empty() &&
        stack_.back()->timeout())
      run_timeout_handler(*stack_.back()->timeout());
    return Step::progressed;  // stale timeouts are dropped
  }
  switch (preprocess(n)) {
    case Preprocessed::consumed:
      return Step::progressed;
    case Preprocessed::retain:
      skipped_.push_back(std::move(n));
      scan_pos_ = skipped_.size();
      return Step::progressed;
    case Preprocessed::pass_to_behavior:
      break;
  }
  if (!stack_.empty() && consume_with_behavior(*n)) return Step::progressed;
  skipped_.push_back(std::move(n));
  scan_pos_ = skipped_.size();
  return Step::progressed;
}

bool EventBasedActor::consume_with_behavior(MailNode& n) {
  auto b = stack_.back();  // keep alive across become()
  if (!apply_behavior(*b, n)) return false;
  ++activity_gen_;
  if (stack_.empty())  // drained by unbecome()
    throw ActorExitedException{exit_normal()};
  return true;
}

void EventBasedActor::run_timeout_handler(const TimeoutCase& tc) {
  ++activity_gen_;
  tc.handler();
  if (stack_.empty()) throw ActorExitedException{exit_normal()};
}

void EventBasedActor::arm_behavior_timeout(const TimeoutCase& tc) {
  armed_gen_ = activity_gen_;
  auto gen = activity_gen_;
  std::weak_ptr<Actor> wk = weak_from_this();
  Runtime::instance().timer().schedule(
      std::chrono::steady_clock::now() + tc.duration, [wk, gen] {
        if (auto sp = wk.lock()) {
          auto node = std::make_unique<MailNode>();
          node->kind = NodeKind::behavior_timeout;
          node->gen = gen;
          sp->enqueue_node(std::move(node));
        }
      });
}

void EventBasedActor::install_response_handler(std::uint64_t id, Behavior b) {
  // The response may already be waiting among retained messages.
  for (auto it = skipped_.begin(); it != skipped_.end(); ++it) {
    if ((*it)->kind == NodeKind::sync_response && (*it)->sync_id == id) {
      auto node = std::move(*it);
      skipped_.erase(it);
      scan_pos_ = 0;
      open_requests_.erase(id);
      apply_behavior(b, *node);
      return;
    }
  }
  auto deadline = std::chrono::steady_clock::now() + b.timeout()->duration;
  pending_responses_.emplace(id, std::move(b));
  std::weak_ptr<Actor> wk = weak_from_this();
  Runtime::instance().timer().schedule(deadline, [wk, id] {
    if (auto sp = wk.lock()) {
      auto node = std::make_unique<MailNode>();
      node->kind = NodeKind::sync_timeout;
      node->sync_id = id;
      sp->enqueue_node(std::move(node));
    }
  });
}

// -------------------------------------------------------- BlockingActor --

void BlockingActor::wakeup() {
  {
    std::lock_guard lock(wake_mtx_);
    signaled_ = true;
  }
  wake_cv_.notify_one();
}

void BlockingActor::receive(const Behavior& b) {
  receive_impl(b, std::nullopt, 0);
}

void BlockingActor::receive_loop(const Behavior& b) {
  for (;;) receive_impl(b, std::nullopt, 0);
}

void BlockingActor::await_response(std::uint64_t id, const Behavior& b) {
  if (!b.timeout())
    throw MatchDefinitionError(
        "response handlers require a timeout clause");
  receive_impl(b, std::nullopt, id);
}

bool BlockingActor::receive_impl(
    const Behavior& b,
    std::optional<std::chrono::steady_clock::time_point> deadline_override,
    std::uint64_t awaited_sync_id) {
  using clock = std::chrono::steady_clock;
  auto deadline = deadline_override;
  if (!deadline && b.timeout()) deadline = clock::now() + b.timeout()->duration;

  auto fire_timeout = [&] {
    if (awaited_sync_id != 0) open_requests_.erase(awaited_sync_id);
    if (b.timeout()) b.timeout()->handler();
  };

  std::size_t i = 0;  // per-call scan position over retained mail
  for (;;) {
    while (i < skipped_.size()) {
      MailNode* n = skipped_[i].get();
      if (awaited_sync_id != 0) {
        if (n->kind == NodeKind::sync_response &&
            n->sync_id == awaited_sync_id) {
          auto node = std::move(skipped_[i]);
          skipped_.erase(skipped_.begin() + static_cast<std::ptrdiff_t>(i));
          open_requests_.erase(awaited_sync_id);
          apply_behavior(b, *node);
          return true;
        }
        ++i;
        continue;
      }
      if (n->kind == NodeKind::sync_response) {
        ++i;  // invisible to plain receive
        continue;
      }
      if (apply_behavior(b, *n)) {
        skipped_.erase(skipped_.begin() + static_cast<std::ptrdiff_t>(i));
        return true;
      }
      ++i;
    }
    if (deadline && clock::now() >= *deadline) {
      fire_timeout();
      return false;
    }
    if (auto n = mailbox_.try_dequeue()) {
      if (n->kind == NodeKind::behavior_timeout) continue;  // pooled-only
      if (awaited_sync_id != 0 && n->kind == NodeKind::sync_response &&
          n->sync_id == awaited_sync_id) {
        open_requests_.erase(awaited_sync_id);
        apply_behavior(b, *n);
        return true;
      }
      switch (preprocess(n)) {
        case Preprocessed::consumed:
          continue;
        case Preprocessed::retain:
          skipped_.push_back(std::move(n));
          i = skipped_.size();
          continue;
        case Preprocessed::pass_to_behavior:
          break;
      }
      if (awaited_sync_id == 0 && apply_behavior(b, *n)) return true;
      skipped_.push_back(std::move(n));
      i = skipped_.size();
      continue;
    }
    // Mailbox exhausted: block until new mail or the deadline.
    {
      std::lock_guard lock(wake_mtx_);
      signaled_ = false;
    }
    if (!mailbox_.mark_blocked_if_empty()) continue;
    std::unique_lock lock(wake_mtx_);
    if (deadline) {
      if (!wake_cv_.wait_until(lock, *deadline, [&] { return signaled_; })) {
        lock.unlock();
        fire_timeout();
        return false;
      }
    } else {
      wake_cv_.wait(lock, [&] { return signaled_; });
    }
  }
}

// -------------------------------------------------------- DetachedActor --

void DetachedActor::start() {
  auto sp = std::static_pointer_cast<DetachedActor>(shared_from_this());
  std::thread([sp] {
    detail::CurrentActorGuard guard(sp.get());
    try {
      sp->body_();
      sp->terminate(exit_normal());
    } catch (ActorExitedException& e) {
      sp->terminate(std::move(e.reason));
    } catch (std::exception& e) {
      sp->terminate(Value::of(std::string(e.what())));
    } catch (...) {
      sp->terminate(Value::of(std::string("unknown failure")));
    }
  }).detach();
}

}  // namespace loom

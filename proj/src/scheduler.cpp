#include "loom/scheduler.hpp"

#include "loom/actor.hpp"

namespace loom {

Scheduler::Scheduler(std::size_t workers) {
  if (workers == 0) workers = 1;
  workers_.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i)
    workers_.emplace_back([this] { worker_loop(); });
}

Scheduler::~Scheduler() {
  {
    std::lock_guard lock(mtx_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& w : workers_) w.join();
}

void Scheduler::enqueue(std::shared_ptr<EventBasedActor> actor) {
  {
    std::lock_guard lock(mtx_);
    if (stop_) return;
    jobs_.push_back(std::move(actor));
  }
  cv_.notify_one();
}

void Scheduler::worker_loop() {
  for (;;) {
    std::shared_ptr<EventBasedActor> job;
    {
      std::unique_lock lock(mtx_);
      cv_.wait(lock, [this] { return stop_ || !jobs_.empty(); });
      if (stop_) return;
      job = std::move(jobs_.front());
      jobs_.pop_front();
    }
    job->run_turn();
  }
}

Timer::Timer() : thread_([this] { timer_loop(); }) {}

Timer::~Timer() {
  {
    std::lock_guard lock(mtx_);
    stop_ = true;
  }
  cv_.notify_all();
  thread_.join();
}

void Timer::schedule(std::chrono::steady_clock::time_point when,
                     std::function<void()> fn) {
  {
    std::lock_guard lock(mtx_);
    if (stop_) return;
    queue_.push(Entry{when, seq_++, std::move(fn)});
  }
  cv_.notify_all();
}

void Timer::timer_loop() {
  std::unique_lock lock(mtx_);
  for (;;) {
    if (stop_) return;
    if (queue_.empty()) {
      cv_.wait(lock);
      continue;
    }
    auto when = queue_.top().when;
    if (std::chrono::steady_clock::now() < when) {
      cv_.wait_until(lock, when);
      continue;
    }
    auto fn = std::move(const_cast<Entry&>(queue_.top()).fn);
    queue_.pop();
    lock.unlock();
    fn();
    lock.lock();
  }
}

}  // namespace loom

#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <queue>
#include <thread>
#include <vector>

namespace loom {

class EventBasedActor;

/// Fixed-size worker pool running pooled actors cooperatively. An actor is
/// queued as a job at most once at a time; re-queueing is driven by mailbox
/// wakeups and budget exhaustion only.
class Scheduler {
public:
  explicit Scheduler(std::size_t workers);
  ~Scheduler();

  void enqueue(std::shared_ptr<EventBasedActor> actor);
  std::size_t pool_size() const noexcept { return workers_.size(); }

private:
  void worker_loop();

  std::mutex mtx_;
  std::condition_variable cv_;
  std::deque<std::shared_ptr<EventBasedActor>> jobs_;
  bool stop_ = false;
  std::vector<std::thread> workers_;
};

/// Deadline facility backing receive and synchronous-response timeouts.
class Timer {
public:
  Timer();
  ~Timer();

  void schedule(std::chrono::steady_clock::time_point when,
                std::function<void()> fn);

private:
  struct Entry {
    std::chrono::steady_clock::time_point when;
    std::uint64_t seq;
    std::function<void()> fn;
    bool operator>(const Entry& o) const {
      return when > o.when || (when == o.when && seq > o.seq);
    }
  };

  void timer_loop();

  std::mutex mtx_;
  std::condition_variable cv_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  bool stop_ = false;
  std::thread thread_;
};

}  // namespace loom

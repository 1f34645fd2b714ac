#include "loom/bench.hpp"

#include <sys/resource.h>

#include <atomic>
#include <chrono>
#include <memory>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "loom/runtime.hpp"

namespace loom::bench {

namespace {

using clock_type = std::chrono::steady_clock;

std::optional<std::uint64_t> sample_peak_rss() {
  rusage ru{};
  if (getrusage(RUSAGE_SELF, &ru) != 0) return std::nullopt;
  // ru_maxrss is kilobytes on Linux.
  return std::uint64_t(ru.ru_maxrss) * 1024u;
}

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// ------------------------------------------------------- mailbox bench --

struct MailboxState {
  std::uint64_t expected = 0;
  std::uint64_t count = 0;
  std::vector<std::uint64_t> last_seq;  // per-sender FIFO audit
  bool fifo_ok = true;
};

void mailbox_receiver(std::shared_ptr<MailboxState> st) {
  become(on(val<std::uint32_t>, val<std::uint64_t>) >>
         [st](std::uint32_t sender, std::uint64_t seq) {
           ++st->count;
           if (seq != st->last_seq[sender] + 1) st->fifo_ok = false;
           st->last_seq[sender] = seq;
           if (st->count == st->expected) self()->quit();
         });
}

// ---------------------------------------------------------- ring bench --

struct RingShared {
  std::atomic<std::uint64_t> token_msgs{0};
  std::atomic<std::uint64_t> spawned_links{0};
};

void chain_link(std::shared_ptr<RingShared> sh, ActorPtr next) {
  become(on(atom("token"), val<std::uint64_t>) >>
         [sh, next](std::uint64_t n) {
           sh->token_msgs.fetch_add(1, std::memory_order_relaxed);
           send(next, atom("token"), n);
           if (n == 1) self()->quit();  // last circuit passed through
         });
}

struct MasterState {
  std::shared_ptr<RingShared> sh;
  ActorPtr worker;
  ActorPtr collector;
  RingBenchConfig cfg;
  std::size_t run = 0;
  std::size_t downs = 0;
  bool token_done = false;
  ActorPtr first;  // head of the current chain
};

void master_spawn_chain(const std::shared_ptr<MasterState>& st) {
  ActorPtr next = self_ptr();  // close the ring back to the master
  for (std::size_t i = 0; i < st->cfg.chain_length; ++i) {
    next = spawn(chain_link, st->sh, next);
    self()->monitor(next);
    st->sh->spawned_links.fetch_add(1, std::memory_order_relaxed);
  }
  st->first = next;
  st->downs = 0;
  st->token_done = false;
}

void master_inject(const std::shared_ptr<MasterState>& st) {
  st->sh->token_msgs.fetch_add(1, std::memory_order_relaxed);
  send(st->first, atom("token"), st->cfg.token_initial);
  send(st->worker, atom("calc"), st->cfg.factor_target);
}

void master_advance(const std::shared_ptr<MasterState>& st) {
  // A run is over once the token finished AND every link of the run is
  // confirmed dead; only then may the next chain exist (bounds peak
  // concurrency).
  if (!st->token_done || st->downs != st->cfg.chain_length) return;
  if (++st->run == st->cfg.respawns) {
    send(st->collector, atom("mdone"));
    self()->quit();
  }
  master_spawn_chain(st);
  master_inject(st);
}

void master_body(std::shared_ptr<MasterState> st) {
  become(
      on(atom("go")) >> [st] { master_inject(st); },
      on(atom("token"), val<std::uint64_t>) >>
          [st](std::uint64_t n) {
            if (n > 1) {
              st->sh->token_msgs.fetch_add(1, std::memory_order_relaxed);
              send(st->first, atom("token"), n - 1);
            } else {
              st->token_done = true;
              master_advance(st);
            }
          },
      on(val<DownMsg>) >> [st](const DownMsg&) {
        ++st->downs;
        master_advance(st);
      });
  master_spawn_chain(st);
  send(st->collector, atom("ready"));
}

void ring_worker(ActorPtr collector) {
  become(on(atom("calc"), val<std::uint64_t>) >>
             [collector](std::uint64_t x) {
               auto f = prime_factors(x);
               send(collector, atom("result"), x,
                    std::uint64_t(f.size()));
             },
         on(atom("stop")) >> [] { self()->quit(); });
}

struct CollectorState {
  std::size_t rings = 0;
  std::size_t expected_results = 0;
  std::size_t results = 0;
  std::size_t dones = 0;
  std::vector<ActorPtr> masters;
  std::set<ActorPtr> workers;  // learned from result senders
};

void collector_body(std::shared_ptr<CollectorState> st) {
  auto maybe_finish = [st] {
    if (st->results != st->expected_results || st->dones != st->rings) return;
    for (const auto& w : st->workers) send(w, atom("stop"));
    self()->quit();
  };
  become(
      on(atom("ready")) >>
          [st] {
            // Barrier: tokens start flowing only once every ring stands.
            st->masters.push_back(self()->last_sender());
            if (st->masters.size() == st->rings)
              for (const auto& m : st->masters) send(m, atom("go"));
          },
      on(atom("result"), val<std::uint64_t>, val<std::uint64_t>) >>
          [st, maybe_finish](std::uint64_t, std::uint64_t) {
            st->workers.insert(self()->last_sender());
            ++st->results;
            maybe_finish();
          },
      on(atom("mdone")) >> [st, maybe_finish] {
        ++st->dones;
        maybe_finish();
      });
}

}  // namespace

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  if (n < 2) throw std::domain_error("prime_factors requires n >= 2");
  std::vector<std::uint64_t> factors;
  while (n % 2 == 0) {
    factors.push_back(2);
    n /= 2;
  }
  for (std::uint64_t d = 3; n > 1 && d <= n / d; d += 2) {
    while (n % d == 0) {
      factors.push_back(d);
      n /= d;
    }
  }
  if (n > 1) factors.push_back(n);
  return factors;
}

BenchReport run_mailbox_bench(const MailboxBenchConfig& c) {
  if (c.senders < 1 || c.messages_per_sender < 1)
    throw std::invalid_argument("mailbox bench requires senders >= 1 and "
                                "messages_per_sender >= 1");
  if (c.workers != 0) Runtime::set_pool_size(c.workers);
  auto& rt = Runtime::instance();
  rt.reset_peak();

  auto st = std::make_shared<MailboxState>();
  st->expected = expected_mailbox_messages(c);
  st->last_seq.assign(c.senders, 0);

  auto t0 = clock_type::now();
  auto receiver = spawn(mailbox_receiver, st);
  self()->monitor(receiver);

  std::vector<std::thread> producers;
  producers.reserve(c.senders);
  for (std::size_t s = 0; s < c.senders; ++s) {
    producers.emplace_back([receiver, s, m = c.messages_per_sender] {
      for (std::uint64_t i = 1; i <= m; ++i)
        send(receiver, std::uint32_t(s), i);
    });
  }
  for (auto& t : producers) t.join();
  receive(on(val<DownMsg>) >> [](const DownMsg&) {});
  rt.await_all_actors_done();

  BenchReport r;
  r.wall_time = seconds_since(t0);
  r.messages_processed = st->count;
  r.actors_created = 1;
  r.peak_concurrent_actors = rt.peak_alive();
  r.pool_size = rt.pool_size();
  r.peak_rss = sample_peak_rss();
  if (!st->fifo_ok)
    throw std::runtime_error("per-sender FIFO violated in mailbox bench");
  return r;
}

BenchReport run_ring_bench(const RingBenchConfig& c) {
  if (c.rings < 1 || c.chain_length < 1 || c.token_initial < 1 ||
      c.respawns < 1)
    throw std::invalid_argument("ring bench requires all counts >= 1");
  if (c.factor_target < 2)
    throw std::invalid_argument("ring bench requires factor_target >= 2");
  if (c.workers != 0) Runtime::set_pool_size(c.workers);
  auto& rt = Runtime::instance();
  rt.reset_peak();

  auto sh = std::make_shared<RingShared>();
  auto cst = std::make_shared<CollectorState>();
  cst->rings = c.rings;
  cst->expected_results = c.rings * c.respawns;

  auto t0 = clock_type::now();
  auto collector = spawn(collector_body, cst);
  self()->monitor(collector);
  for (std::size_t r = 0; r < c.rings; ++r) {
    auto worker = spawn(ring_worker, collector);
    auto mst = std::make_shared<MasterState>();
    mst->sh = sh;
    mst->worker = worker;
    mst->collector = collector;
    mst->cfg = c;
    spawn(master_body, mst);
  }
  receive(on(val<DownMsg>) >> [](const DownMsg&) {});
  rt.await_all_actors_done();

  BenchReport r;
  r.wall_time = seconds_since(t0);
  r.messages_processed = sh->token_msgs.load(std::memory_order_relaxed);
  r.actors_created = sh->spawned_links.load(std::memory_order_relaxed);
  r.peak_concurrent_actors = rt.peak_alive();
  r.pool_size = rt.pool_size();
  r.peak_rss = sample_peak_rss();
  return r;
}

std::string BenchReport::to_json() const {
  nlohmann::json j{{"wall_time", wall_time},
                   {"messages_processed", messages_processed},
                   {"actors_created", actors_created},
                   {"peak_concurrent_actors", peak_concurrent_actors},
                   {"pool_size", pool_size}};
  if (peak_rss) j["peak_rss"] = *peak_rss;
  return j.dump();
}

std::string BenchReport::to_csv() const {
  std::string out =
      "wall_time,messages_processed,actors_created,peak_concurrent_actors,"
      "pool_size,peak_rss\n";
  out += std::to_string(wall_time) + ',' + std::to_string(messages_processed) +
         ',' + std::to_string(actors_created) + ',' +
         std::to_string(peak_concurrent_actors) + ',' +
         std::to_string(pool_size) + ',' +
         (peak_rss ? std::to_string(*peak_rss) : std::string()) + '\n';
  return out;
}

}  // namespace loom::bench

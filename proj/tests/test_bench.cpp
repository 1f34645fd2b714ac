#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>
#include <random>
#include <vector>

#include "loom/bench.hpp"

using namespace loom::bench;

TEST_CASE("prime_factors handles small cases") {
  CHECK(prime_factors(2) == std::vector<std::uint64_t>{2});
  CHECK(prime_factors(12) == std::vector<std::uint64_t>{2, 2, 3});
  CHECK(prime_factors(97) == std::vector<std::uint64_t>{97});
  CHECK(prime_factors(1024) == std::vector<std::uint64_t>(10, 2));
  CHECK_THROWS_AS(prime_factors(0), std::domain_error);
  CHECK_THROWS_AS(prime_factors(1), std::domain_error);
}

TEST_CASE("prime_factors agrees with a sieve on random inputs") {
  // Sieve oracle up to 10^6: smallest prime factor table.
  const std::uint32_t N = 1'000'000;
  std::vector<std::uint32_t> spf(N + 1, 0);
  for (std::uint32_t i = 2; i <= N; ++i)
    if (spf[i] == 0)
      for (std::uint64_t j = i; j <= N; j += i)
        if (spf[j] == 0) spf[j] = i;

  auto oracle = [&](std::uint32_t n) {
    std::vector<std::uint64_t> fs;
    while (n > 1) {
      fs.push_back(spf[n]);
      n /= spf[n];
    }
    return fs;
  };

  std::mt19937 rng(31337);
  std::uniform_int_distribution<std::uint32_t> dist(2, N);
  int primes_seen = 0;
  for (int i = 0; i < 2000; ++i) {
    auto n = dist(rng);
    CAPTURE(n);
    auto fs = prime_factors(n);
    REQUIRE(fs == oracle(n));
    REQUIRE(std::accumulate(fs.begin(), fs.end(), std::uint64_t(1),
                            std::multiplies<>()) == n);
    if (fs.size() == 1) ++primes_seen;
  }
  CHECK(primes_seen > 0);  // the sample actually covered primes
}

TEST_CASE("closed forms") {
  RingBenchConfig paper;  // defaults are the full-scale parameters
  CHECK(expected_ring_token_messages(paper) == 50'000'000);
  CHECK(expected_ring_master_spawned(paper) == 20 * 245);
  CHECK(expected_ring_peak(paper) == 1021);
  RingBenchConfig desk{2, 4, 100, 2, 28'350'160'440'309'881ull, 0};
  CHECK(expected_ring_token_messages(desk) == 2000);
  CHECK(expected_ring_master_spawned(desk) == 16);
  CHECK(expected_ring_peak(desk) == 13);
  MailboxBenchConfig mc{20, 1'000'000, 0};
  CHECK(expected_mailbox_messages(mc) == 20'000'000);
}

TEST_CASE("config invariants are enforced") {
  CHECK_THROWS_AS(run_mailbox_bench({0, 1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(run_mailbox_bench({1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(run_ring_bench({0, 1, 1, 1, 2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(run_ring_bench({1, 1, 1, 1, 1, 0}), std::invalid_argument);
}

TEST_CASE("mailbox bench counts exactly") {
  MailboxBenchConfig one{1, 1, 0};
  auto r1 = run_mailbox_bench(one);
  CHECK(r1.messages_processed == 1);
  CHECK(r1.actors_created == 1);

  MailboxBenchConfig c{4, 100'000, 0};
  auto r = run_mailbox_bench(c);
  CHECK(r.messages_processed == 400'000);  // FIFO audit runs inside
  CHECK(r.actors_created == 1);
  CHECK(r.peak_concurrent_actors == 1);
  CHECK(r.pool_size >= 1);
  CHECK(r.wall_time > 0.0);
}

TEST_CASE("smallest ring passes two token messages") {
  RingBenchConfig c{1, 1, 1, 1, 6, 0};
  auto r = run_ring_bench(c);
  CHECK(r.messages_processed == 2);
  CHECK(r.actors_created == 1);
  CHECK(r.peak_concurrent_actors == expected_ring_peak(c));
}

TEST_CASE("desk-scale ring matches every closed form") {
  // Small factor target keeps this test quick; the factorization result
  // itself is covered above and in the acceptance suite.
  RingBenchConfig c{2, 4, 100, 2, 1'000'003, 0};
  for (int run = 0; run < 3; ++run) {  // outcome must be deterministic
    auto r = run_ring_bench(c);
    REQUIRE(r.messages_processed == 2000);
    REQUIRE(r.actors_created == 16);
    REQUIRE(r.peak_concurrent_actors == 13);
  }
}

TEST_CASE("report serialization") {
  BenchReport r;
  r.wall_time = 1.5;
  r.messages_processed = 10;
  r.actors_created = 3;
  r.peak_concurrent_actors = 4;
  r.pool_size = 2;
  r.peak_rss = 2048;
  auto j = r.to_json();
  CHECK(j.find("\"messages_processed\":10") != std::string::npos);
  CHECK(j.find("\"peak_rss\":2048") != std::string::npos);
  auto csv = r.to_csv();
  CHECK(csv.find("wall_time,messages_processed") != std::string::npos);
  CHECK(csv.find(",10,3,4,2,2048") != std::string::npos);
  r.peak_rss.reset();
  CHECK(r.to_json().find("peak_rss") == std::string::npos);
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace loom::bench {

/// N:1 throughput benchmark: plain producer threads flooding one pooled
/// receiver through the implicit thread-conversion path.
struct MailboxBenchConfig {
  std::size_t senders = 20;
  std::uint64_t messages_per_sender = 1'000'000;
  std::size_t workers = 0;  // 0: keep the runtime's pool size
};

/// Mixed-scenario benchmark: token rings with failing/respawned chains and
/// message-free factorization workers.
struct RingBenchConfig {
  std::size_t rings = 20;
  std::size_t chain_length = 49;
  std::uint64_t token_initial = 10'000;
  std::size_t respawns = 5;
  std::uint64_t factor_target = 28'350'160'440'309'881ull;
  std::size_t workers = 0;
};

struct BenchReport {
  double wall_time = 0.0;  // seconds
  std::uint64_t messages_processed = 0;
  std::uint64_t actors_created = 0;
  std::uint64_t peak_concurrent_actors = 0;
  std::size_t pool_size = 0;
  std::optional<std::uint64_t> peak_rss = {};  // bytes, best effort

  std::string to_json() const;
  std::string to_csv() const;  // header line + data line
};

BenchReport run_mailbox_bench(const MailboxBenchConfig& c);
BenchReport run_ring_bench(const RingBenchConfig& c);

/// Ordered prime factorization with multiplicity via trial division.
/// Throws std::domain_error for n < 2.
std::vector<std::uint64_t> prime_factors(std::uint64_t n);

// Closed forms the reports must match exactly.
inline std::uint64_t expected_mailbox_messages(const MailboxBenchConfig& c) {
  return std::uint64_t(c.senders) * c.messages_per_sender;
}
inline std::uint64_t expected_ring_token_messages(const RingBenchConfig& c) {
  return std::uint64_t(c.rings) * c.respawns * c.token_initial *
         (c.chain_length + 1);
}
inline std::uint64_t expected_ring_master_spawned(const RingBenchConfig& c) {
  return std::uint64_t(c.rings) * c.respawns * c.chain_length;
}
inline std::uint64_t expected_ring_peak(const RingBenchConfig& c) {
  return std::uint64_t(c.rings) * (c.chain_length + 1) + c.rings + 1;
}

}  // namespace loom::bench

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "loom/bench.hpp"
#include "loom/runtime.hpp"

namespace {

void emit(const loom::bench::BenchReport& r, const std::string& format) {
  if (format == "csv")
    std::cout << r.to_csv();
  else
    std::cout << r.to_json() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"actor runtime benchmark harness"};
  app.require_subcommand(1);

  std::string format = "json";

  auto* mail = app.add_subcommand("mailbox", "N:1 mailbox throughput");
  loom::bench::MailboxBenchConfig mc;
  mail->add_option("--senders", mc.senders, "producer thread count")
      ->check(CLI::PositiveNumber);
  mail->add_option("--messages", mc.messages_per_sender,
                   "messages per sender")
      ->check(CLI::PositiveNumber);
  mail->add_option("--pool", mc.workers, "scheduler worker count");
  mail->add_option("--format", format)
      ->check(CLI::IsMember({"json", "csv"}));

  auto* ring = app.add_subcommand("ring", "mixed ring scenario");
  loom::bench::RingBenchConfig rc;
  ring->add_option("--rings", rc.rings)->check(CLI::PositiveNumber);
  ring->add_option("--chain", rc.chain_length)->check(CLI::PositiveNumber);
  ring->add_option("--token", rc.token_initial)->check(CLI::PositiveNumber);
  ring->add_option("--respawns", rc.respawns)->check(CLI::PositiveNumber);
  ring->add_option("--factor", rc.factor_target,
                   "number handed to the factorization workers");
  ring->add_option("--pool", rc.workers, "scheduler worker count");
  ring->add_option("--format", format)
      ->check(CLI::IsMember({"json", "csv"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (mail->parsed()) {
      auto r = loom::bench::run_mailbox_bench(mc);
      emit(r, format);
      bool ok =
          r.messages_processed == loom::bench::expected_mailbox_messages(mc);
      if (!ok) std::cerr << "count invariant violated\n";
      return ok ? 0 : 1;
    }
    auto r = loom::bench::run_ring_bench(rc);
    emit(r, format);
    bool ok =
        r.messages_processed ==
            loom::bench::expected_ring_token_messages(rc) &&
        r.actors_created == loom::bench::expected_ring_master_spawned(rc) &&
        r.peak_concurrent_actors == loom::bench::expected_ring_peak(rc);
    if (!ok) std::cerr << "count invariant violated\n";
    return ok ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

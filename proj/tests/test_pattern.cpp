#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "loom/atom.hpp"
#include "loom/dsl.hpp"
#include "loom/pattern.hpp"

using namespace loom;
using namespace loom::placeholders;

TEST_CASE("type-style matching with captures") {
  int got_i = 0;
  double got_d = 0;
  Behavior b(on<int, double>() >> [&](int i, double d) {
    got_i = i;
    got_d = d;
  });
  CHECK(b(make_message(3, 4.5)) == Behavior::Result::matched);
  CHECK(got_i == 3);
  CHECK(got_d == 4.5);
  CHECK(b(make_message(3)) == Behavior::Result::no_match);
  CHECK(b(make_message(4.5, 3)) == Behavior::Result::no_match);
}

TEST_CASE("value-style matching") {
  int hits = 0;
  std::string got;
  Behavior b(on(atom("set"), val<std::string>) >> [&](const std::string& s) {
    ++hits;
    got = s;
  });
  CHECK(b(make_message(atom("set"), "x")) == Behavior::Result::matched);
  CHECK(got == "x");
  CHECK(b(make_message(atom("get"), "x")) == Behavior::Result::no_match);
  CHECK(b(make_message(atom("set"), 1)) == Behavior::Result::no_match);
  CHECK(hits == 1);
}

TEST_CASE("wildcard absorbs leftmost-shortest") {
  std::vector<int> picked;
  Behavior b(on(any_vals, val<int>, any_vals) >> [&](int i) {
    picked.push_back(i);
  });
  CHECK(b(make_message("a", 7, 8, "b")) == Behavior::Result::matched);
  REQUIRE(picked.size() == 1);
  CHECK(picked[0] == 7);  // first int, shortest prefix absorption
}

TEST_CASE("handler may skip leading captures") {
  int last = 0;
  Behavior b(on<int, int, int>() >> [&](int c) { last = c; });
  CHECK(b(make_message(1, 2, 3)) == Behavior::Result::matched);
  CHECK(last == 3);
}

TEST_CASE("handler arity and types are validated at construction") {
  CHECK_THROWS_AS(Behavior(on<int>() >> [](int, int) {}),
                  MatchDefinitionError);
  CHECK_THROWS_AS(Behavior(on<int>() >> [](const std::string&) {}),
                  MatchDefinitionError);
  CHECK_NOTHROW(Behavior(on<int, double>() >> [](double) {}));
}

TEST_CASE("arg_match deduces trailing pattern types") {
  int a = 0;
  std::string s;
  Behavior b(on(atom("add"), arg_match) >> [&](int x, const std::string& y) {
    a = x;
    s = y;
  });
  CHECK(b(make_message(atom("add"), 4, "q")) == Behavior::Result::matched);
  CHECK(a == 4);
  CHECK(s == "q");
  CHECK(b(make_message(atom("add"), "q", 4)) == Behavior::Result::no_match);
}

TEST_CASE("guards run only after a structural match") {
  int guard_calls = 0;
  auto flag = [&guard_calls](int v) {
    ++guard_calls;
    return v > 5;
  };
  Behavior b(on<int>().when(x1(flag)) >> [](int) {});
  CHECK(b(make_message("no int")) == Behavior::Result::no_match);
  CHECK(guard_calls == 0);  // structural mismatch: guard untouched
  CHECK(b(make_message(3)) == Behavior::Result::no_match);
  CHECK(guard_calls == 1);
  CHECK(b(make_message(9)) == Behavior::Result::matched);
  CHECK(guard_calls == 2);
}

TEST_CASE("gref reads the variable at evaluation time") {
  int limit = 10;
  Behavior b(on<int>().when(x1 < gref(limit)) >> [](int) {});
  CHECK(b(make_message(5)) == Behavior::Result::matched);
  limit = 3;
  CHECK(b(make_message(5)) == Behavior::Result::no_match);
}

TEST_CASE("guard operators") {
  Behavior b(on<int, int>().when(x1 + x2 == 10 && x1 % 2 == 0) >>
             [](int, int) {});
  CHECK(b(make_message(4, 6)) == Behavior::Result::matched);
  CHECK(b(make_message(3, 7)) == Behavior::Result::no_match);
  CHECK(b(make_message(4, 7)) == Behavior::Result::no_match);
}

TEST_CASE("guard misuse raises GuardError") {
  Behavior b(on<int>().when(x2 == 1) >> [](int) {});
  CHECK_THROWS_AS(b(make_message(1)), GuardError);
}

TEST_CASE("projections convert and can reject") {
  auto half_even = [](int v) -> std::optional<int> {
    if (v % 2 != 0) return std::nullopt;
    return v / 2;
  };
  int got = 0;
  Behavior b(on(half_even) >> [&](int h) { got = h; });
  CHECK(b(make_message(8)) == Behavior::Result::matched);
  CHECK(got == 4);
  CHECK(b(make_message(7)) == Behavior::Result::no_match);
  CHECK(b(make_message("x")) == Behavior::Result::no_match);
}

TEST_CASE("projection evaluated once per element per application") {
  auto calls = std::make_shared<int>(0);
  auto proj = [calls](int v) -> std::optional<int> {
    ++*calls;
    if (v % 2 != 0) return std::nullopt;
    return v;
  };
  // Flanking wildcards force backtracking over candidate positions; the
  // memo must keep each element's conversion single.
  Behavior b(on(any_vals, proj, any_vals) >> [](int) {});
  CHECK(b(make_message(1, 3, 4)) == Behavior::Result::matched);
  CHECK(*calls == 3);  // one evaluation per int tried, no repeats
  *calls = 0;
  CHECK(b(make_message(1, 3, 4)) == Behavior::Result::matched);
  CHECK(*calls == 3);  // memo does not leak across applications
}

TEST_CASE("first matching case wins") {
  int which = 0;
  Behavior b(on(5) >> [&] { which = 1; },
             on<int>() >> [&](int) { which = 2; },
             others() >> [&] { which = 3; });
  b(make_message(5));
  CHECK(which == 1);
  b(make_message(6));
  CHECK(which == 2);
  b(make_message("z"));
  CHECK(which == 3);
}

TEST_CASE("concat keeps order; duplicate timeouts are rejected") {
  int which = 0;
  auto a = Behavior(on<int>() >> [&](int) { which = 1; });
  auto b = Behavior(on<int>() >> [&](int) { which = 2; },
                    on<double>() >> [&](double) { which = 3; });
  auto c = Behavior::concat({a, b});
  c(make_message(1));
  CHECK(which == 1);
  c(make_message(1.5));
  CHECK(which == 3);

  auto t1 = Behavior(on<int>() >> [](int) {},
                     after(std::chrono::milliseconds(1)) >> [] {});
  CHECK_THROWS_AS(Behavior::concat({t1, t1}), MatchDefinitionError);
  CHECK_THROWS_AS(Behavior(after(std::chrono::milliseconds(1)) >> [] {},
                           after(std::chrono::milliseconds(2)) >> [] {}),
                  MatchDefinitionError);
}

// ----------------------------------------- oracle equivalence (exhaustive) --

namespace {

struct PoolEntry {
  std::function<Case(std::function<void()> fired)> make;
  std::function<bool(const Message&)> oracle;
};

std::vector<PoolEntry> pattern_pool() {
  auto is_int = [](const Message& m, std::size_t i) {
    return m.tag_at(i) == type_tag<int>();
  };
  std::vector<PoolEntry> pool;
  pool.push_back({[](auto f) { return on<int>() >> [f](int) { f(); }; },
                  [is_int](const Message& m) {
                    return m.size() == 1 && is_int(m, 0);
                  }});
  pool.push_back({[](auto f) { return on(5) >> [f] { f(); }; },
                  [is_int](const Message& m) {
                    return m.size() == 1 && is_int(m, 0) && m.get<int>(0) == 5;
                  }});
  pool.push_back({[](auto f) { return on<Anything, int>() >> [f](int) { f(); }; },
                  [is_int](const Message& m) {
                    return m.size() >= 1 && is_int(m, m.size() - 1);
                  }});
  pool.push_back(
      {[](auto f) { return on<int>().when(x1 > 5) >> [f](int) { f(); }; },
       [is_int](const Message& m) {
         return m.size() == 1 && is_int(m, 0) && m.get<int>(0) > 5;
       }});
  pool.push_back(
      {[](auto f) {
         auto even = [](int v) -> std::optional<int> {
           if (v % 2 != 0) return std::nullopt;
           return v / 2;
         };
         return on(even) >> [f](int) { f(); };
       },
       [is_int](const Message& m) {
         return m.size() == 1 && is_int(m, 0) && m.get<int>(0) % 2 == 0;
       }});
  pool.push_back({[](auto f) { return others() >> [f] { f(); }; },
                  [](const Message&) { return true; }});
  return pool;
}

Message universe_message(const std::vector<int>& picks) {
  std::vector<Value> elems;
  for (int p : picks) {
    switch (p) {
      case 0: elems.push_back(Value::of(6)); break;   // int, >5, even
      case 1: elems.push_back(Value::of(5)); break;   // int, ==5, odd
      case 2: elems.push_back(Value::of(2.0)); break; // double
      default: elems.push_back(Value::of(atom("a"))); break;
    }
  }
  return Message(std::move(elems));
}

}  // namespace

TEST_CASE("first-match index equals the brute-force oracle everywhere") {
  auto pool = pattern_pool();
  const int P = int(pool.size());

  // All tuples of length <= 3 from the 4-element universe.
  std::vector<Message> msgs;
  msgs.push_back(Message{});
  for (int len = 1; len <= 3; ++len) {
    std::vector<int> picks(std::size_t(len), 0);
    for (;;) {
      msgs.push_back(universe_message(picks));
      int i = len - 1;
      while (i >= 0 && picks[std::size_t(i)] == 3) picks[std::size_t(i--)] = 0;
      if (i < 0) break;
      ++picks[std::size_t(i)];
    }
  }

  // All ordered case lists of length 1..3 over the pool (with repetition).
  std::vector<std::vector<int>> lists;
  for (int a = 0; a < P; ++a) {
    lists.push_back({a});
    for (int b = 0; b < P; ++b) {
      lists.push_back({a, b});
      for (int c = 0; c < P; ++c) lists.push_back({a, b, c});
    }
  }

  for (const auto& list : lists) {
    auto fired = std::make_shared<int>(-1);
    std::vector<Case> cases;
    for (std::size_t i = 0; i < list.size(); ++i) {
      int idx = int(i);
      cases.push_back(pool[std::size_t(list[i])].make(
          [fired, idx] { *fired = idx; }));
    }
    Behavior b(std::move(cases), std::nullopt);
    for (const auto& m : msgs) {
      int expect = -1;
      for (std::size_t i = 0; i < list.size(); ++i)
        if (pool[std::size_t(list[i])].oracle(m)) {
          expect = int(i);
          break;
        }
      *fired = -1;
      auto r = b(m);
      REQUIRE(r == (expect >= 0 ? Behavior::Result::matched
                                : Behavior::Result::no_match));
      REQUIRE(*fired == expect);
    }
  }
}

#include <catch2/catch_amalgamated.hpp>

#include "diaconf/core.hpp"
#include "diaconf/rng.hpp"
#include "diaconf/timeline.hpp"

using namespace diaconf;

TEST_CASE("TimeInterval rejects degenerate construction") {
  CHECK_THROWS_AS(TimeInterval(1.0, 1.0), Error);
  CHECK_THROWS_AS(TimeInterval(2.0, 1.0), Error);
  CHECK_THROWS_AS(TimeInterval(-0.5, 1.0), Error);
  const TimeInterval iv(0.5, 2.5);
  CHECK(iv.duration() == Catch::Approx(2.0));
  CHECK(iv.midpoint() == Catch::Approx(1.5));
  CHECK(iv.contains(0.5));
  CHECK_FALSE(iv.contains(2.5));
}

TEST_CASE("Segment requires a speaker label") {
  CHECK_THROWS_AS(Segment("c", TimeInterval(0, 1), ""), Error);
}

TEST_CASE("Diarization sorts segments and rejects same-speaker overlap") {
  std::vector<Segment> segs;
  segs.emplace_back("c", TimeInterval(2.0, 3.0), "a");
  segs.emplace_back("c", TimeInterval(0.0, 1.0), "b");
  const Diarization d("c", segs);
  CHECK(d.segments()[0].interval.start == 0.0);
  CHECK(d.speakers() == std::vector<std::string>{"a", "b"});

  std::vector<Segment> bad;
  bad.emplace_back("c", TimeInterval(0.0, 2.0), "a");
  bad.emplace_back("c", TimeInterval(1.0, 3.0), "a");
  CHECK_THROWS_AS(Diarization("c", bad), Error);

  // Cross-speaker overlap is allowed (reference overlap).
  std::vector<Segment> ok;
  ok.emplace_back("c", TimeInterval(0.0, 2.0), "a");
  ok.emplace_back("c", TimeInterval(1.0, 3.0), "b");
  CHECK_NOTHROW(Diarization("c", ok));

  std::vector<Segment> mixed;
  mixed.emplace_back("other", TimeInterval(0.0, 1.0), "a");
  CHECK_THROWS_AS(Diarization("c", mixed), Error);
}

TEST_CASE("Embedding invariants") {
  CHECK_THROWS_AS(Embedding({1.0}, TimeInterval(0, 1)), Error);
  CHECK_THROWS_AS(Embedding({0.0, 0.0}, TimeInterval(0, 1)), Error);
  CHECK_THROWS_AS(Embedding({1.0, std::nan("")}, TimeInterval(0, 1)), Error);
  CHECK_NOTHROW(Embedding({1.0, 0.0}, TimeInterval(0, 1)));
}

TEST_CASE("timeline_union merges adjacent and overlapping intervals") {
  const Timeline a{TimeInterval(0, 1), TimeInterval(2, 3)};
  const Timeline b{TimeInterval(1, 2)};
  const Timeline u = timeline_union(a, b);
  REQUIRE(u.intervals().size() == 1);
  CHECK(u.intervals()[0] == TimeInterval(0, 3));

  CHECK(timeline_union(a, Timeline()) == a);

  const Timeline c = timeline_union(Timeline{TimeInterval(0, 2)},
                                    Timeline{TimeInterval(1, 3)});
  REQUIRE(c.intervals().size() == 1);
  CHECK(c.intervals()[0] == TimeInterval(0, 3));
}

TEST_CASE("timeline_intersect") {
  const Timeline a{TimeInterval(0, 2)};
  const Timeline b{TimeInterval(1, 3)};
  const Timeline i = timeline_intersect(a, b);
  REQUIRE(i.intervals().size() == 1);
  CHECK(i.intervals()[0] == TimeInterval(1, 2));

  const Timeline x{TimeInterval(0, 1), TimeInterval(5, 9)};
  CHECK(timeline_intersect(x, x) == x);

  CHECK(timeline_intersect(Timeline{TimeInterval(0, 1)},
                           Timeline{TimeInterval(2, 3)})
            .empty());
}

TEST_CASE("timeline_subtract") {
  const Timeline a{TimeInterval(0, 3)};
  const Timeline b{TimeInterval(1, 2)};
  const Timeline s = timeline_subtract(a, b);
  REQUIRE(s.intervals().size() == 2);
  CHECK(s.intervals()[0] == TimeInterval(0, 1));
  CHECK(s.intervals()[1] == TimeInterval(2, 3));

  const Timeline x{TimeInterval(0, 1), TimeInterval(4, 6)};
  CHECK(timeline_subtract(x, Timeline()) == x);
  CHECK(timeline_subtract(x, x).empty());
}

namespace {

Timeline random_timeline(Rng& rng, int max_intervals, double horizon) {
  std::vector<TimeInterval> ivs;
  const int n = 1 + int(rng.next_below(max_intervals));
  for (int i = 0; i < n; ++i) {
    const double s = rng.uniform(0.0, horizon - 0.2);
    const double len = rng.uniform(0.01, horizon / 4);
    ivs.emplace_back(s, s + len);
  }
  return Timeline(ivs);
}

}  // namespace

TEST_CASE("timeline inclusion-exclusion and subtraction properties") {
  Rng rng(20240811);
  for (int trial = 0; trial < 500; ++trial) {
    const Timeline a = random_timeline(rng, 8, 60.0);
    const Timeline b = random_timeline(rng, 8, 60.0);
    const double lhs = timeline_union(a, b).total_duration() +
                       timeline_intersect(a, b).total_duration();
    const double rhs = a.total_duration() + b.total_duration();
    CHECK(std::abs(lhs - rhs) < 1e-9);

    const Timeline r = timeline_intersect(timeline_subtract(timeline_union(a, b), b), b);
    CHECK(r.total_duration() < 1e-9);
  }
}

TEST_CASE("timeline point membership") {
  const Timeline t{TimeInterval(1, 2), TimeInterval(4, 5)};
  CHECK_FALSE(t.contains(0.5));
  CHECK(t.contains(1.0));
  CHECK(t.contains(1.9));
  CHECK_FALSE(t.contains(2.0));
  CHECK(t.contains(4.5));
  CHECK_FALSE(t.contains(5.5));
}

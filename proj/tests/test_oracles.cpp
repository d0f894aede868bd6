#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace diaconf;

namespace {

Diarization make_diar(const std::string& conv,
                      std::vector<std::tuple<double, double, std::string>> rows) {
  std::vector<Segment> segs;
  for (const auto& [s, e, spk] : rows)
    segs.emplace_back(conv, TimeInterval(s, e), spk);
  return Diarization(conv, segs);
}

}  // namespace

// The frame oracle itself is validated on the two analytically trivial DER
// cases before it is trusted to check anything else.
TEST_CASE("frame oracle: identical ref and hyp has DER 0") {
  const Diarization ref =
      make_diar("c", {{0.0, 5.0, "a"}, {5.0, 10.0, "b"}});
  ScoringConfig cfg;
  cfg.collar = 0.0;
  const oracle::FrameDer r = oracle::frame_der(ref, ref, cfg);
  CHECK(r.miss == 0.0);
  CHECK(r.false_alarm == 0.0);
  CHECK(r.speaker_error == 0.0);
  CHECK(r.scored_speech == Catch::Approx(10.0).margin(0.02));
  CHECK(r.der() == 0.0);
}

TEST_CASE("frame oracle: empty hypothesis is all miss") {
  const Diarization ref = make_diar("c", {{0.0, 10.0, "a"}});
  const Diarization hyp("c", {});
  ScoringConfig cfg;
  cfg.collar = 0.0;
  const oracle::FrameDer r = oracle::frame_der(ref, hyp, cfg);
  CHECK(r.miss == Catch::Approx(10.0).margin(0.02));
  CHECK(r.false_alarm == 0.0);
  CHECK(r.speaker_error == 0.0);
  CHECK(r.der() == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("brute force assignment on a hand case") {
  // Both rows prefer col 1; row 1 wins it (1+7=8 beats 5+2=7).
  const std::vector<std::vector<double>> w{{1.0, 5.0}, {2.0, 7.0}};
  std::vector<int> assign;
  const double best = oracle::brute_force_assignment_value(w, &assign);
  CHECK(best == Catch::Approx(8.0));
  CHECK(assign == std::vector<int>{0, 1});
}

TEST_CASE("power iteration oracle on a known spectrum") {
  // diag(4, 2, 1) has eigenvalues 4, 2, 1.
  SymMatrix a(3);
  a.at(0, 0) = 4.0;
  a.at(1, 1) = 2.0;
  a.at(2, 2) = 1.0;
  const std::vector<double> v = oracle::power_iteration_eigenvalues(a, 3);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == Catch::Approx(4.0).margin(1e-6));
  CHECK(v[1] == Catch::Approx(2.0).margin(1e-6));
  CHECK(v[2] == Catch::Approx(1.0).margin(1e-6));
}

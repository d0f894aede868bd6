#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "diaconf/core.hpp"
#include "diaconf/rng.hpp"

namespace diaconf {

enum class ErrorBias { Random, DistanceCorrelated };

// Recipe for one synthetic conversation: speaker directions on the unit
// sphere, alternating turns, embeddings on the standard 1.5 s / 250 ms
// window grid, and a hypothesis with a known fraction of relabeled turns.
struct SynthSpec {
  std::uint64_t seed = 1;
  int num_speakers = 2;
  int dim = 16;
  double conversation_length = 60.0;   // seconds
  double turn_min = 2.0;               // uniform turn length bounds
  double turn_max = 6.0;
  double concentration = 20.0;         // kappa: larger = tighter clusters
  double inter_speaker_min_angle = 45.0;  // degrees
  double error_rate = 0.0;             // fraction of turns to mislabel
  ErrorBias error_bias = ErrorBias::Random;
  std::string conversation_id = "synth";
  double window_length = 1.5;
  double window_shift = 0.25;
};

struct SynthResult {
  EmbeddingTrack track;
  Diarization reference;
  Diarization hypothesis;
  std::vector<bool> error_mask;  // per hypothesis segment
  std::vector<std::vector<double>> speaker_directions;
};

namespace detail {

inline std::vector<double> unit_gaussian_direction(Rng& rng, int dim) {
  std::vector<double> v = rng.gaussian_vector(dim);
  const double n = norm(v);
  if (n <= 0.0) return unit_gaussian_direction(rng, dim);
  for (double& x : v) x /= n;
  return v;
}

// Approximate von-Mises-Fisher draw around mu: normalize(kappa*mu + g) with
// g standard gaussian. Larger kappa concentrates the angle toward mu.
inline std::vector<double> perturbed_direction(Rng& rng,
                                               const std::vector<double>& mu,
                                               double kappa) {
  std::vector<double> v = rng.gaussian_vector(mu.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += kappa * mu[k];
  const double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

}  // namespace detail

// Deterministic generator: a fixed seed reproduces the corpus exactly. The
// random stream is consumed in a fixed order (directions, then turns, then
// embedding noise, then corruption) so outputs never depend on evaluation
// order.
inline SynthResult generate(const SynthSpec& spec) {
  if (spec.num_speakers < 1) throw Error("synth: num_speakers must be >= 1");
  if (spec.dim < 2) throw Error("synth: dim must be >= 2");
  if (spec.error_rate < 0.0 || spec.error_rate >= 1.0)
    throw Error("synth: error_rate must lie in [0, 1)");
  if (spec.error_rate > 0.0 && spec.num_speakers < 2)
    throw Error("synth: cannot mislabel a single-speaker conversation");
  if (spec.turn_min <= 0.0 || spec.turn_max < spec.turn_min)
    throw Error("synth: invalid turn length bounds");
  if (spec.conversation_length < spec.window_length)
    throw Error("synth: conversation shorter than one embedding window");

  Rng rng(spec.seed);
  SynthResult out;

  // Speaker directions with a pairwise angle floor, by rejection.
  const double max_cos = std::cos(spec.inter_speaker_min_angle * M_PI / 180.0);
  const int max_attempts = 1000 * spec.num_speakers;
  int attempts = 0;
  while (static_cast<int>(out.speaker_directions.size()) < spec.num_speakers) {
    if (++attempts > max_attempts)
      throw Error("synth: could not satisfy inter_speaker_min_angle after " +
                  std::to_string(max_attempts) + " attempts");
    std::vector<double> dir = detail::unit_gaussian_direction(rng, spec.dim);
    bool ok = true;
    for (const std::vector<double>& other : out.speaker_directions)
      if (dot(dir, other) > max_cos) ok = false;
    if (ok) out.speaker_directions.push_back(std::move(dir));
  }

  // Alternating turns with uniform lengths, truncated at the end.
  std::vector<int> turn_speaker;
  std::vector<TimeInterval> turn_interval;
  double t = 0.0;
  int prev = -1;
  while (t < spec.conversation_length - kDurationTol) {
    int spk = 0;
    if (spec.num_speakers > 1) {
      spk = static_cast<int>(rng.next_below(
          static_cast<std::uint64_t>(spec.num_speakers - (prev >= 0 ? 1 : 0))));
      if (prev >= 0 && spk >= prev) ++spk;
    }
    const double len = rng.uniform(spec.turn_min, spec.turn_max);
    const double end = std::min(t + len, spec.conversation_length);
    if (end - t > kDurationTol) {
      turn_speaker.push_back(spk);
      turn_interval.emplace_back(t, end);
    }
    t = end;
    prev = spk;
  }

  std::vector<Segment> ref_segments;
  for (std::size_t i = 0; i < turn_speaker.size(); ++i)
    ref_segments.emplace_back(spec.conversation_id, turn_interval[i],
                              "spk" + std::to_string(turn_speaker[i]));
  out.reference = Diarization(spec.conversation_id, std::move(ref_segments));

  // Embeddings on the window grid; each window takes the speaker of the
  // turn containing its midpoint.
  std::vector<Embedding> embeddings;
  std::vector<int> embedding_turn;
  for (double w = 0.0; w + spec.window_length <= spec.conversation_length + kTimeEps;
       w += spec.window_shift) {
    const TimeInterval window(w, w + spec.window_length);
    const double mid = window.midpoint();
    int turn = -1;
    for (std::size_t i = 0; i < turn_interval.size(); ++i) {
      if (turn_interval[i].contains(mid)) {
        turn = static_cast<int>(i);
        break;
      }
    }
    if (turn < 0) continue;
    embeddings.emplace_back(
        detail::perturbed_direction(rng, out.speaker_directions[turn_speaker[turn]],
                                    spec.concentration),
        window);
    embedding_turn.push_back(turn);
  }
  out.track = EmbeddingTrack(spec.conversation_id, std::move(embeddings));

  // Corrupt a fixed fraction of turns.
  const std::size_t num_turns = turn_speaker.size();
  const std::size_t num_bad = static_cast<std::size_t>(
      std::llround(spec.error_rate * double(num_turns)));
  std::vector<std::size_t> order(num_turns);
  std::iota(order.begin(), order.end(), 0);
  if (spec.error_bias == ErrorBias::Random) {
    rng.shuffle(order);
  } else {
    // Rank turns by how far their embeddings sit from the true speaker
    // direction; corrupt the farthest first. Turns without embeddings are
    // never corrupted in this mode (no evidence to correlate with).
    std::vector<double> affinity(num_turns, 2.0);
    std::vector<std::size_t> counts(num_turns, 0);
    std::vector<double> sums(num_turns, 0.0);
    for (std::size_t e = 0; e < out.track.size(); ++e) {
      const std::size_t turn = static_cast<std::size_t>(embedding_turn[e]);
      sums[turn] += cosine(out.track.embeddings()[e].vector,
                           out.speaker_directions[turn_speaker[turn]]);
      ++counts[turn];
    }
    for (std::size_t i = 0; i < num_turns; ++i)
      if (counts[i] > 0) affinity[i] = sums[i] / double(counts[i]);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (affinity[a] != affinity[b]) return affinity[a] < affinity[b];
      return a < b;
    });
  }

  std::vector<bool> corrupted(num_turns, false);
  std::vector<int> hyp_speaker = turn_speaker;
  for (std::size_t k = 0; k < num_bad && k < num_turns; ++k) {
    const std::size_t i = order[k];
    corrupted[i] = true;
    int replacement = static_cast<int>(
        rng.next_below(static_cast<std::uint64_t>(spec.num_speakers - 1)));
    if (replacement >= turn_speaker[i]) ++replacement;
    hyp_speaker[i] = replacement;
  }

  std::vector<Segment> hyp_segments;
  for (std::size_t i = 0; i < num_turns; ++i)
    hyp_segments.emplace_back(spec.conversation_id, turn_interval[i],
                              "spk" + std::to_string(hyp_speaker[i]));
  out.hypothesis = Diarization(spec.conversation_id, std::move(hyp_segments));
  // Diarization sorting is stable and turns are already time-ordered, so the
  // mask index matches the hypothesis segment index.
  out.error_mask = std::move(corrupted);
  return out;
}

}  // namespace diaconf

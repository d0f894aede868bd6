#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "diaconf/errors.hpp"

namespace diaconf {

// Epsilon used when normalizing interval sets: gaps or slivers at most this
// long are treated as zero.
inline constexpr double kTimeEps = 1e-9;

// Tolerance for semantic duration comparisons (finer than the 250 ms
// embedding shift, coarser than accumulated float noise).
inline constexpr double kDurationTol = 1e-6;

// Half-open [start, end) span of audio, in seconds. Zero-length spans are
// rejected at construction.
struct TimeInterval {
  double start;
  double end;

  TimeInterval(double start_s, double end_s) : start(start_s), end(end_s) {
    if (!std::isfinite(start) || !std::isfinite(end))
      throw Error("TimeInterval: non-finite bound");
    if (start < 0.0) throw Error("TimeInterval: negative start");
    if (end <= start) throw Error("TimeInterval: end must exceed start");
  }

  double duration() const { return end - start; }
  double midpoint() const { return start + 0.5 * (end - start); }
  bool contains(double t) const { return t >= start && t < end; }

  bool operator==(const TimeInterval& o) const = default;
};

struct Segment {
  std::string conversation_id;
  TimeInterval interval;
  std::string speaker;

  Segment(std::string conv, TimeInterval iv, std::string spk)
      : conversation_id(std::move(conv)),
        interval(iv),
        speaker(std::move(spk)) {
    if (speaker.empty()) throw Error("Segment: empty speaker label");
  }
};

// Speaker-labeled segments of one conversation, sorted by start time.
// Segments of the same speaker must not overlap; segments of different
// speakers may (reference diarizations can contain cross-speaker overlap).
class Diarization {
 public:
  Diarization() = default;

  Diarization(std::string conversation_id, std::vector<Segment> segments)
      : conversation_id_(std::move(conversation_id)),
        segments_(std::move(segments)) {
    for (const Segment& s : segments_) {
      if (s.conversation_id != conversation_id_)
        throw Error("Diarization: segment conversation_id mismatch ('" +
                    s.conversation_id + "' vs '" + conversation_id_ + "')");
    }
    std::stable_sort(segments_.begin(), segments_.end(),
                     [](const Segment& a, const Segment& b) {
                       if (a.interval.start != b.interval.start)
                         return a.interval.start < b.interval.start;
                       return a.interval.end < b.interval.end;
                     });
    check_same_speaker_overlap();
  }

  const std::string& conversation_id() const { return conversation_id_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool empty() const { return segments_.empty(); }

  // Distinct speaker labels, sorted.
  std::vector<std::string> speakers() const {
    std::set<std::string> s;
    for (const Segment& seg : segments_) s.insert(seg.speaker);
    return {s.begin(), s.end()};
  }

  double total_speech_duration() const {
    double d = 0.0;
    for (const Segment& seg : segments_) d += seg.interval.duration();
    return d;
  }

 private:
  void check_same_speaker_overlap() const {
    std::map<std::string, double> last_end;
    for (const Segment& seg : segments_) {
      auto it = last_end.find(seg.speaker);
      if (it != last_end.end() && seg.interval.start < it->second - kDurationTol)
        throw Error("Diarization: overlapping segments for speaker '" +
                    seg.speaker + "' in " + conversation_id_);
      double& e = last_end[seg.speaker];
      e = std::max(e, seg.interval.end);
    }
  }

  std::string conversation_id_;
  std::vector<Segment> segments_;
};

// One D-dim speaker embedding together with the audio window it summarizes.
struct Embedding {
  std::vector<double> vector;
  TimeInterval interval;

  Embedding(std::vector<double> v, TimeInterval iv)
      : vector(std::move(v)), interval(iv) {
    if (vector.size() < 2) throw Error("Embedding: dimension must be >= 2");
    double sq = 0.0;
    for (double x : vector) {
      if (!std::isfinite(x)) throw Error("Embedding: non-finite component");
      sq += x * x;
    }
    if (sq <= 0.0) throw Error("Embedding: zero-norm vector");
  }
};

// Time-ordered embedding sequence of one conversation; all embeddings share
// one dimension.
class EmbeddingTrack {
 public:
  EmbeddingTrack() = default;

  EmbeddingTrack(std::string conversation_id, std::vector<Embedding> embeddings)
      : conversation_id_(std::move(conversation_id)),
        embeddings_(std::move(embeddings)) {
    if (!embeddings_.empty()) {
      dim_ = embeddings_.front().vector.size();
      for (const Embedding& e : embeddings_) {
        if (e.vector.size() != dim_)
          throw Error("EmbeddingTrack: inconsistent embedding dimension");
      }
      std::stable_sort(embeddings_.begin(), embeddings_.end(),
                       [](const Embedding& a, const Embedding& b) {
                         return a.interval.start < b.interval.start;
                       });
    }
  }

  const std::string& conversation_id() const { return conversation_id_; }
  const std::vector<Embedding>& embeddings() const { return embeddings_; }
  std::size_t size() const { return embeddings_.size(); }
  bool empty() const { return embeddings_.empty(); }
  std::size_t dim() const { return dim_; }

 private:
  std::string conversation_id_;
  std::size_t dim_ = 0;
  std::vector<Embedding> embeddings_;
};

// --- small vector helpers shared by the scoring and clustering code ---

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Cosine similarity; 0 when either vector has (numerically) zero norm.
inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double na = norm(a), nb = norm(b);
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

inline double cosine_distance(const std::vector<double>& a,
                              const std::vector<double>& b) {
  return 1.0 - cosine(a, b);
}

}  // namespace diaconf

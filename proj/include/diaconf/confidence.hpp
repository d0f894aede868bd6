#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diaconf/core.hpp"
#include "diaconf/spectral.hpp"

namespace diaconf {

enum class Method { Cosine, Local, Silhouette, Spectral };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Cosine: return "cosine";
    case Method::Local: return "local";
    case Method::Silhouette: return "silhouette";
    case Method::Spectral: return "spectral";
  }
  return "?";
}

inline std::optional<Method> method_from_string(const std::string& s) {
  if (s == "cosine") return Method::Cosine;
  if (s == "local") return Method::Local;
  if (s == "silhouette") return Method::Silhouette;
  if (s == "spectral") return Method::Spectral;
  return std::nullopt;
}

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::Cosine, Method::Local,
                                     Method::Silhouette, Method::Spectral};
  return m;
}

// Per-segment confidence. Segments with no embedding evidence keep the
// configured floor score and are flagged uncovered.
struct ConfidenceAnnotation {
  Segment segment;
  Method method;
  double score = 0.0;
  bool uncovered = false;
};

struct ConfidenceConfig {
  double uncovered_score = -1.0;  // score assigned to uncovered segments
  double local_eps = 1e-4;        // centroid movement (cosine distance) to stop
  int local_max_iters = 20;
};

// Which embeddings cover which hypothesis segment: embedding i belongs to
// the first segment (in start order) whose half-open interval contains the
// embedding window's midpoint. Each embedding maps to at most one segment.
struct SegmentEmbeddingMap {
  std::vector<std::vector<std::size_t>> segment_embeddings;  // per segment
  std::vector<std::size_t> unassigned;                       // leftover embeddings

  bool segment_covered(std::size_t seg) const {
    return !segment_embeddings[seg].empty();
  }
};

inline SegmentEmbeddingMap map_embeddings_to_segments(const Diarization& d,
                                                      const EmbeddingTrack& track) {
  if (!d.empty() && !track.empty() &&
      d.conversation_id() != track.conversation_id())
    throw Error("map_embeddings_to_segments: conversation mismatch ('" +
                d.conversation_id() + "' vs '" + track.conversation_id() + "')");
  SegmentEmbeddingMap map;
  map.segment_embeddings.assign(d.segments().size(), {});
  for (std::size_t i = 0; i < track.size(); ++i) {
    const double m = track.embeddings()[i].interval.midpoint();
    bool assigned = false;
    for (std::size_t s = 0; s < d.segments().size(); ++s) {
      const TimeInterval& iv = d.segments()[s].interval;
      if (iv.start > m) break;  // segments sorted by start
      if (iv.contains(m)) {
        map.segment_embeddings[s].push_back(i);
        assigned = true;
        break;
      }
    }
    if (!assigned) map.unassigned.push_back(i);
  }
  return map;
}

// Mean of the embeddings over all segments assigned to one speaker. A
// speaker whose segments carry no embeddings has no defined centroid.
struct SpeakerCentroid {
  std::string speaker;
  std::vector<double> vector;
  bool defined = false;
};

namespace detail {

inline std::map<std::string, std::vector<std::size_t>> speaker_members(
    const Diarization& d, const SegmentEmbeddingMap& map) {
  std::map<std::string, std::vector<std::size_t>> members;
  for (const std::string& spk : d.speakers()) members[spk];
  for (std::size_t s = 0; s < d.segments().size(); ++s) {
    auto& list = members[d.segments()[s].speaker];
    list.insert(list.end(), map.segment_embeddings[s].begin(),
                map.segment_embeddings[s].end());
  }
  return members;
}

inline std::vector<double> mean_vector(const std::vector<std::size_t>& idx,
                                       const EmbeddingTrack& track) {
  std::vector<double> m(track.dim(), 0.0);
  for (std::size_t i : idx)
    for (std::size_t k = 0; k < m.size(); ++k)
      m[k] += track.embeddings()[i].vector[k];
  for (double& x : m) x /= double(idx.size());
  return m;
}

}  // namespace detail

inline std::map<std::string, SpeakerCentroid> compute_centroids(
    const Diarization& d, const SegmentEmbeddingMap& map,
    const EmbeddingTrack& track) {
  std::map<std::string, SpeakerCentroid> out;
  for (const auto& [speaker, idx] : detail::speaker_members(d, map)) {
    SpeakerCentroid c;
    c.speaker = speaker;
    if (!idx.empty() && track.dim() > 0) {
      c.vector = detail::mean_vector(idx, track);
      c.defined = norm(c.vector) > 0.0;
    }
    out[speaker] = std::move(c);
  }
  return out;
}

namespace detail {

// Scores every segment as the mean cosine of its embeddings to its speaker's
// centroid; uncovered segments (or segments of a centroid-less speaker) get
// the floor.
inline std::vector<ConfidenceAnnotation> score_against_centroids(
    const Diarization& d, const SegmentEmbeddingMap& map,
    const EmbeddingTrack& track,
    const std::map<std::string, SpeakerCentroid>& centroids, Method method,
    const ConfidenceConfig& config) {
  std::vector<ConfidenceAnnotation> out;
  out.reserve(d.segments().size());
  for (std::size_t s = 0; s < d.segments().size(); ++s) {
    const Segment& seg = d.segments()[s];
    ConfidenceAnnotation ann{seg, method, config.uncovered_score, true};
    const auto it = centroids.find(seg.speaker);
    if (it != centroids.end() && it->second.defined && map.segment_covered(s)) {
      double sum = 0.0;
      for (std::size_t i : map.segment_embeddings[s])
        sum += cosine(track.embeddings()[i].vector, it->second.vector);
      ann.score = sum / double(map.segment_embeddings[s].size());
      ann.uncovered = false;
    }
    out.push_back(std::move(ann));
  }
  return out;
}

}  // namespace detail

// Mean cosine similarity between a segment's embeddings and the speaker
// centroid.
inline std::vector<ConfidenceAnnotation> cosine_similarity_score(
    const Diarization& d, const SegmentEmbeddingMap& map,
    const EmbeddingTrack& track, const ConfidenceConfig& config = {}) {
  return detail::score_against_centroids(
      d, map, track, compute_centroids(d, map, track), Method::Cosine, config);
}

// Iteratively re-estimates each speaker centroid after dropping cluster
// members whose cosine distance exceeds mean + 2 standard deviations, until
// the centroid stops moving. All segments (dropped ones included) are then
// scored against the converged centroids.
inline std::vector<ConfidenceAnnotation> local_confidence_score(
    const Diarization& d, const SegmentEmbeddingMap& map,
    const EmbeddingTrack& track, const ConfidenceConfig& config = {}) {
  std::map<std::string, SpeakerCentroid> centroids;
  for (const auto& [speaker, all_members] : detail::speaker_members(d, map)) {
    SpeakerCentroid c;
    c.speaker = speaker;
    if (all_members.empty() || track.dim() == 0) {
      centroids[speaker] = std::move(c);
      continue;
    }
    std::vector<std::size_t> members = all_members;
    std::vector<double> centroid = detail::mean_vector(members, track);
    for (int iter = 0; iter < config.local_max_iters; ++iter) {
      std::vector<double> dist(members.size());
      double mu = 0.0;
      for (std::size_t k = 0; k < members.size(); ++k) {
        dist[k] = cosine_distance(track.embeddings()[members[k]].vector, centroid);
        mu += dist[k];
      }
      mu /= double(members.size());
      double var = 0.0;
      for (double x : dist) var += (x - mu) * (x - mu);
      const double sigma = std::sqrt(var / double(members.size()));
      std::vector<std::size_t> survivors;
      for (std::size_t k = 0; k < members.size(); ++k)
        if (dist[k] <= mu + 2.0 * sigma) survivors.push_back(members[k]);
      if (survivors.empty()) break;  // keep the last non-empty centroid
      std::vector<double> next = detail::mean_vector(survivors, track);
      if (cosine_distance(next, centroid) < config.local_eps) break;
      centroid = std::move(next);
      members = std::move(survivors);
    }
    c.vector = std::move(centroid);
    c.defined = norm(c.vector) > 0.0;
    centroids[speaker] = std::move(c);
  }
  return detail::score_against_centroids(d, map, track, centroids, Method::Local,
                                         config);
}

// Silhouette confidence: s(x) = (b(x) - a(x)) / max(a(x), b(x)) with cosine
// distances to the own-speaker centroid (a) and the nearest other centroid
// (b). Needs at least two clusters; single-speaker diarizations fall back to
// the cosine similarity score (keeping the silhouette method tag).
inline std::vector<ConfidenceAnnotation> silhouette_score(
    const Diarization& d, const SegmentEmbeddingMap& map,
    const EmbeddingTrack& track, const ConfidenceConfig& config = {}) {
  const auto centroids = compute_centroids(d, map, track);
  std::size_t defined = 0;
  for (const auto& [_, c] : centroids) defined += c.defined ? 1 : 0;
  if (d.speakers().size() < 2 || defined < 2) {
    auto out = detail::score_against_centroids(d, map, track, centroids,
                                               Method::Silhouette, config);
    return out;
  }

  std::vector<ConfidenceAnnotation> out;
  out.reserve(d.segments().size());
  for (std::size_t s = 0; s < d.segments().size(); ++s) {
    const Segment& seg = d.segments()[s];
    ConfidenceAnnotation ann{seg, Method::Silhouette, config.uncovered_score, true};
    const auto own_it = centroids.find(seg.speaker);
    if (own_it != centroids.end() && own_it->second.defined &&
        map.segment_covered(s)) {
      double sum = 0.0;
      for (std::size_t i : map.segment_embeddings[s]) {
        const std::vector<double>& x = track.embeddings()[i].vector;
        const double a = cosine_distance(x, own_it->second.vector);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [speaker, c] : centroids) {
          if (speaker == seg.speaker || !c.defined) continue;
          b = std::min(b, cosine_distance(x, c.vector));
        }
        const double m = std::max(a, b);
        sum += m > 0.0 ? (b - a) / m : 0.0;
      }
      ann.score = sum / double(map.segment_embeddings[s].size());
      ann.uncovered = false;
    }
    out.push_back(std::move(ann));
  }
  return out;
}

// White-box variant: cosine similarity in the S-dim spectral basis, each
// embedding against the centroid of the cluster its segment is labeled with.
// Only hypotheses produced by the spectral pipeline carry the needed basis;
// anything else is rejected.
inline std::vector<ConfidenceAnnotation> spectral_clustering_score(
    const Diarization& d, const SegmentEmbeddingMap& map,
    const SpectralBasis& basis, const ConfidenceConfig& config = {}) {
  if (basis.rows.size() != basis.labels.size())
    throw Error("spectral_clustering_score: basis rows/labels size mismatch");

  // Cluster centroids in the spectral basis, from the clustering assignment.
  std::vector<std::vector<double>> centroid(basis.num_speakers);
  std::vector<std::size_t> count(basis.num_speakers, 0);
  for (std::size_t i = 0; i < basis.rows.size(); ++i) {
    const int label = basis.labels[i];
    if (label < 0 || label >= basis.num_speakers)
      throw Error("spectral_clustering_score: label out of range");
    if (centroid[label].empty()) centroid[label].assign(basis.rows[i].size(), 0.0);
    for (std::size_t k = 0; k < basis.rows[i].size(); ++k)
      centroid[label][k] += basis.rows[i][k];
    ++count[label];
  }
  for (int s = 0; s < basis.num_speakers; ++s)
    for (double& x : centroid[s]) x /= double(count[s]);

  std::vector<ConfidenceAnnotation> out;
  out.reserve(d.segments().size());
  for (std::size_t s = 0; s < d.segments().size(); ++s) {
    const Segment& seg = d.segments()[s];
    const std::optional<int> cluster = cluster_index_of_speaker(seg.speaker);
    if (!cluster || *cluster >= basis.num_speakers)
      throw UnsupportedError(
          "spectral confidence: basis unavailable for hypothesis speaker '" +
          seg.speaker + "' (not a spectral-pipeline hypothesis)");
    ConfidenceAnnotation ann{seg, Method::Spectral, config.uncovered_score, true};
    if (map.segment_covered(s) && count[*cluster] > 0 &&
        norm(centroid[*cluster]) > 0.0) {
      double sum = 0.0;
      for (std::size_t i : map.segment_embeddings[s])
        sum += cosine(basis.rows[i], centroid[*cluster]);
      ann.score = sum / double(map.segment_embeddings[s].size());
      ann.uncovered = false;
    }
    out.push_back(std::move(ann));
  }
  return out;
}

}  // namespace diaconf

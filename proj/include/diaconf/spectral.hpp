#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "diaconf/core.hpp"
#include "diaconf/matrix.hpp"

namespace diaconf {

// N x N cosine-similarity matrix of an embedding track: symmetric, unit
// diagonal, entries in [-1, 1].
struct AffinityMatrix {
  SymMatrix values;

  std::size_t size() const { return values.size(); }
};

inline AffinityMatrix build_affinity(const EmbeddingTrack& track) {
  const std::size_t n = track.size();
  if (n == 0) throw Error("build_affinity: empty embedding track");
  std::vector<std::vector<double>> unit(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double>& v = track.embeddings()[i].vector;
    const double nv = norm(v);
    if (nv <= 0.0) throw Error("build_affinity: zero-norm embedding");
    unit[i].resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) unit[i][k] = v[k] / nv;
  }
  SymMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.at(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = std::clamp(dot(unit[i], unit[j]), -1.0, 1.0);
      a.at(i, j) = c;
      a.at(j, i) = c;
    }
  }
  return AffinityMatrix{a};
}

inline EigenDecomposition eigendecompose(const AffinityMatrix& a) {
  return jacobi_eigendecompose(a.values);
}

struct SpectralParams {
  int max_speakers_cap = 10;
  std::optional<int> fixed_num_speakers;
};

// Eigen-gap speaker counting: the largest drop between consecutive
// descending eigenvalues, searched over k in [1, min(cap, N-1)].
inline int estimate_num_speakers(const std::vector<double>& eigenvalues,
                                 int max_speakers_cap,
                                 std::optional<int> fixed_s = std::nullopt) {
  const int n = static_cast<int>(eigenvalues.size());
  if (n < 1) throw Error("estimate_num_speakers: no eigenvalues");
  if (max_speakers_cap < 1) throw Error("estimate_num_speakers: cap must be >= 1");
  if (fixed_s) {
    if (*fixed_s < 1 || *fixed_s > n)
      throw Error("estimate_num_speakers: fixed speaker count " +
                  std::to_string(*fixed_s) + " out of range for N=" +
                  std::to_string(n));
    return *fixed_s;
  }
  if (n == 1) return 1;
  const int kmax = std::min(max_speakers_cap, n - 1);
  int best_k = 1;
  double best_gap = eigenvalues[0] - eigenvalues[1];
  for (int k = 2; k <= kmax; ++k) {
    const double gap = eigenvalues[k - 1] - eigenvalues[k];
    if (gap > best_gap) {
      best_gap = gap;
      best_k = k;
    }
  }
  return best_k;
}

// Eigendecomposition of an affinity matrix together with the retained
// S-dimensional spectral basis (basis row i = row i of the first S
// eigenvector columns).
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  std::vector<std::vector<double>> eigenvectors;  // [k][i], descending by value
  int num_speakers = 1;
  std::vector<std::vector<double>> basis;  // N rows of length num_speakers
};

inline SpectralDecomposition spectral_decompose(const AffinityMatrix& a,
                                                const SpectralParams& params) {
  EigenDecomposition eig = eigendecompose(a);
  const int s = estimate_num_speakers(eig.values, params.max_speakers_cap,
                                      params.fixed_num_speakers);
  SpectralDecomposition out;
  out.eigenvalues = std::move(eig.values);
  out.eigenvectors = std::move(eig.vectors);
  out.num_speakers = s;
  const std::size_t n = out.eigenvalues.size();
  out.basis.assign(n, std::vector<double>(s));
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < s; ++k) out.basis[i][k] = out.eigenvectors[k][i];
  return out;
}

struct ClusterAssignment {
  std::vector<int> labels;  // one per embedding, in [0, num_speakers)
};

// Eigenvector sign is arbitrary, so assignment uses the magnitude of the
// basis coordinates; ties break toward the smaller index.
inline ClusterAssignment assign_speakers(const SpectralDecomposition& d) {
  ClusterAssignment out;
  out.labels.reserve(d.basis.size());
  for (const std::vector<double>& row : d.basis) {
    int best = 0;
    for (int s = 1; s < static_cast<int>(row.size()); ++s)
      if (std::abs(row[s]) > std::abs(row[best])) best = s;
    out.labels.push_back(best);
  }
  return out;
}

inline std::string speaker_name(int cluster) {
  return "spk" + std::to_string(cluster);
}

// Inverse of speaker_name; nullopt when the label was not produced by the
// spectral pipeline.
inline std::optional<int> cluster_index_of_speaker(const std::string& label) {
  if (label.size() < 4 || label.compare(0, 3, "spk") != 0) return std::nullopt;
  int value = 0;
  for (std::size_t i = 3; i < label.size(); ++i) {
    const char c = label[i];
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
    if (value > 1'000'000) return std::nullopt;
  }
  return value;
}

// Per-embedding spectral state that outlives the clustering run: the
// S-dim basis rows, the argmax labels, and the source windows. This is what
// the white-box confidence method needs and what the CLI persists as a
// sidecar file next to the hypothesis RTTM.
struct SpectralBasis {
  std::string conversation_id;
  int num_speakers = 1;
  std::vector<TimeInterval> windows;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

inline SpectralBasis make_spectral_basis(const EmbeddingTrack& track,
                                         const SpectralDecomposition& decomp,
                                         const ClusterAssignment& assignment) {
  SpectralBasis b;
  b.conversation_id = track.conversation_id();
  b.num_speakers = decomp.num_speakers;
  b.rows = decomp.basis;
  b.labels = assignment.labels;
  b.windows.reserve(track.size());
  for (const Embedding& e : track.embeddings()) b.windows.push_back(e.interval);
  return b;
}

struct SpectralOutput {
  Diarization diarization;
  SpectralDecomposition decomposition;
  ClusterAssignment assignment;
};

// Full spectral diarization of one conversation: affinity, eigen-gap model
// selection, argmax assignment, then conversion of labeled windows into
// speaker segments. Runs of equal labels merge into one segment; at label
// changes the boundary sits at the midpoint of the adjacent window centers.
inline SpectralOutput spectral_diarize(const EmbeddingTrack& track,
                                       const SpectralParams& params) {
  if (track.empty()) throw Error("spectral_diarize: empty embedding track");
  SpectralOutput out;
  out.decomposition = spectral_decompose(build_affinity(track), params);
  out.assignment = assign_speakers(out.decomposition);

  const std::vector<int>& labels = out.assignment.labels;
  const std::vector<Embedding>& emb = track.embeddings();
  const std::size_t n = emb.size();
  std::vector<double> centers(n);
  for (std::size_t i = 0; i < n; ++i) centers[i] = emb[i].interval.midpoint();

  std::vector<Segment> segments;
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && labels[i] == labels[run_start]) continue;
    const std::size_t run_end = i - 1;  // inclusive
    const double start = run_start == 0
                             ? emb[run_start].interval.start
                             : 0.5 * (centers[run_start - 1] + centers[run_start]);
    const double end = i == n ? emb[run_end].interval.end
                              : 0.5 * (centers[run_end] + centers[run_end + 1]);
    segments.emplace_back(track.conversation_id(), TimeInterval(start, end),
                          speaker_name(labels[run_start]));
    run_start = i;
  }
  out.diarization = Diarization(track.conversation_id(), std::move(segments));
  return out;
}

}  // namespace diaconf

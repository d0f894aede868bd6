#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "diaconf/confidence.hpp"
#include "diaconf/core.hpp"
#include "diaconf/hungarian.hpp"
#include "diaconf/timeline.hpp"

namespace diaconf {

struct ScoringConfig {
  double collar = 0.25;         // seconds excluded around each reference boundary
  bool exclude_overlap = true;  // drop regions where >= 2 reference speakers overlap
};

struct DerBreakdown {
  double miss = 0.0;
  double false_alarm = 0.0;
  double speaker_error = 0.0;
  double scored_speech = 0.0;

  bool scorable() const { return scored_speech > 0.0; }
  double total_error() const { return miss + false_alarm + speaker_error; }
  double der() const { return scorable() ? total_error() / scored_speech : 0.0; }
};

// The region DER components are accumulated over: everything the reference
// or hypothesis touches, minus the collar around reference boundaries, minus
// reference overlap when configured.
inline Timeline scoring_region(const Diarization& ref, const Diarization& hyp,
                               const ScoringConfig& config) {
  Timeline region = timeline_union(speech_timeline(ref), speech_timeline(hyp));
  region = timeline_subtract(region, collar_timeline(ref, config.collar));
  if (config.exclude_overlap)
    region = timeline_subtract(region, overlap_timeline(ref));
  return region;
}

namespace detail {

inline std::map<std::string, Timeline> per_speaker_timelines(const Diarization& d) {
  std::map<std::string, Timeline> out;
  for (const std::string& s : d.speakers()) out.emplace(s, speaker_timeline(d, s));
  return out;
}

inline std::map<std::string, std::string> mapping_in_region(
    const Diarization& ref, const Diarization& hyp, const Timeline& region) {
  const auto ref_tl = per_speaker_timelines(ref);
  const auto hyp_tl = per_speaker_timelines(hyp);
  std::vector<std::string> ref_speakers, hyp_speakers;
  for (const auto& [s, _] : ref_tl) ref_speakers.push_back(s);
  for (const auto& [s, _] : hyp_tl) hyp_speakers.push_back(s);
  if (ref_speakers.empty() || hyp_speakers.empty()) return {};

  std::vector<std::vector<double>> overlap(
      hyp_speakers.size(), std::vector<double>(ref_speakers.size(), 0.0));
  for (std::size_t h = 0; h < hyp_speakers.size(); ++h) {
    const Timeline hyp_in_region =
        timeline_intersect(hyp_tl.at(hyp_speakers[h]), region);
    for (std::size_t r = 0; r < ref_speakers.size(); ++r)
      overlap[h][r] =
          timeline_intersect(hyp_in_region, ref_tl.at(ref_speakers[r]))
              .total_duration();
  }
  const std::vector<int> assignment = max_weight_assignment(overlap);
  std::map<std::string, std::string> mapping;
  for (std::size_t h = 0; h < hyp_speakers.size(); ++h)
    if (assignment[h] >= 0 && overlap[h][assignment[h]] > 0.0)
      mapping[hyp_speakers[h]] = ref_speakers[assignment[h]];
  return mapping;
}

// Walks the atomic intervals induced by all segment and region boundaries
// and accumulates the NIST DER components: per atomic span with nref active
// reference speakers and nhyp active hypothesis speakers,
//   miss += max(0, nref - nhyp), fa += max(0, nhyp - nref),
//   speaker_error += min(nref, nhyp) - #correctly-mapped active pairs,
// all weighted by span length; scored speech is span * nref.
inline DerBreakdown accumulate_der(const Diarization& ref, const Diarization& hyp,
                                   const Timeline& region,
                                   const std::map<std::string, std::string>& mapping) {
  std::vector<double> bounds;
  for (const Segment& s : ref.segments()) {
    bounds.push_back(s.interval.start);
    bounds.push_back(s.interval.end);
  }
  for (const Segment& s : hyp.segments()) {
    bounds.push_back(s.interval.start);
    bounds.push_back(s.interval.end);
  }
  for (const TimeInterval& iv : region.intervals()) {
    bounds.push_back(iv.start);
    bounds.push_back(iv.end);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  DerBreakdown acc;
  for (std::size_t b = 0; b + 1 < bounds.size(); ++b) {
    const double t0 = bounds[b], t1 = bounds[b + 1];
    const double len = t1 - t0;
    if (len <= kTimeEps) continue;
    const double mid = 0.5 * (t0 + t1);
    if (!region.contains(mid)) continue;

    std::set<std::string> ref_active, hyp_active;
    for (const Segment& s : ref.segments()) {
      if (s.interval.start > mid) break;
      if (s.interval.contains(mid)) ref_active.insert(s.speaker);
    }
    for (const Segment& s : hyp.segments()) {
      if (s.interval.start > mid) break;
      if (s.interval.contains(mid)) hyp_active.insert(s.speaker);
    }
    const int nref = static_cast<int>(ref_active.size());
    const int nhyp = static_cast<int>(hyp_active.size());
    int ncorrect = 0;
    for (const std::string& h : hyp_active) {
      const auto it = mapping.find(h);
      if (it != mapping.end() && ref_active.count(it->second)) ++ncorrect;
    }
    acc.miss += len * std::max(0, nref - nhyp);
    acc.false_alarm += len * std::max(0, nhyp - nref);
    acc.speaker_error += len * (std::min(nref, nhyp) - ncorrect);
    acc.scored_speech += len * nref;
  }
  return acc;
}

inline DerBreakdown der_in_region(const Diarization& ref, const Diarization& hyp,
                                  const Timeline& region) {
  return accumulate_der(ref, hyp, region, mapping_in_region(ref, hyp, region));
}

}  // namespace detail

// One-to-one partial mapping of hypothesis speakers onto reference speakers
// maximizing correctly attributed speech duration within the scoring region.
inline std::map<std::string, std::string> optimal_speaker_mapping(
    const Diarization& ref, const Diarization& hyp, const ScoringConfig& config) {
  return detail::mapping_in_region(ref, hyp, scoring_region(ref, hyp, config));
}

inline DerBreakdown compute_der(const Diarization& ref, const Diarization& hyp,
                                const ScoringConfig& config) {
  return detail::der_in_region(ref, hyp, scoring_region(ref, hyp, config));
}

// Hypothesis segments split into high- and low-confidence sides by
// rank-order: sort by score descending and accept the longest prefix whose
// duration share stays within the target coverage (never overshooting).
struct CoveragePartition {
  std::vector<ConfidenceAnnotation> high;
  std::vector<ConfidenceAnnotation> low;
  double achieved_coverage = 1.0;
};

inline CoveragePartition partition_by_confidence(
    std::vector<ConfidenceAnnotation> annotations, double target_coverage) {
  if (target_coverage < 0.0 || target_coverage > 1.0)
    throw Error("partition_by_confidence: target coverage out of [0,1]");
  CoveragePartition out;
  if (annotations.empty()) {
    out.achieved_coverage = 1.0;
    return out;
  }
  double total = 0.0;
  for (const ConfidenceAnnotation& a : annotations)
    total += a.segment.interval.duration();
  std::stable_sort(annotations.begin(), annotations.end(),
                   [](const ConfidenceAnnotation& a, const ConfidenceAnnotation& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.segment.interval.start != b.segment.interval.start)
                       return a.segment.interval.start < b.segment.interval.start;
                     return a.segment.interval.end < b.segment.interval.end;
                   });
  double high_duration = 0.0;
  std::size_t i = 0;
  for (; i < annotations.size(); ++i) {
    const double next = high_duration + annotations[i].segment.interval.duration();
    if (next / total > target_coverage + 1e-9) break;
    high_duration = next;
    out.high.push_back(annotations[i]);
  }
  for (; i < annotations.size(); ++i) out.low.push_back(annotations[i]);
  out.achieved_coverage = total > 0.0 ? high_duration / total : 1.0;
  return out;
}

// DER restricted to the high-confidence region: the low-confidence segments
// are subtracted from the scoring region on both sides, so their reference
// speech is neither a miss nor part of the denominator.
inline DerBreakdown compute_cder(const Diarization& ref, const Diarization& hyp,
                                 const CoveragePartition& partition,
                                 const ScoringConfig& config) {
  std::vector<TimeInterval> low;
  low.reserve(partition.low.size());
  for (const ConfidenceAnnotation& a : partition.low)
    low.push_back(a.segment.interval);
  const Timeline region =
      timeline_subtract(scoring_region(ref, hyp, config), Timeline(std::move(low)));
  return detail::der_in_region(ref, hyp, region);
}

// Dataset-level result: duration sums per component, DER recomputed from the
// sums (time-weighted, not a mean of per-conversation ratios).
inline DerBreakdown corpus_aggregate(const std::vector<DerBreakdown>& parts) {
  DerBreakdown acc;
  for (const DerBreakdown& p : parts) {
    acc.miss += p.miss;
    acc.false_alarm += p.false_alarm;
    acc.speaker_error += p.speaker_error;
    acc.scored_speech += p.scored_speech;
  }
  return acc;
}

}  // namespace diaconf

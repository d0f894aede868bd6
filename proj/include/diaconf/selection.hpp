#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "diaconf/confidence.hpp"
#include "diaconf/csv.hpp"
#include "diaconf/metrics.hpp"

namespace diaconf {

// One conversation ready for confidence evaluation: reference, hypothesis,
// and the hypothesis's annotations for a single method.
struct EvalConversation {
  Diarization reference;
  Diarization hypothesis;
  std::vector<ConfidenceAnnotation> annotations;
};

// Rebuilds the hypothesis segment list from a method's annotations (the
// annotations carry the segments themselves).
inline Diarization hypothesis_from_annotations(
    const std::string& conversation_id,
    const std::vector<ConfidenceAnnotation>& annotations) {
  std::vector<Segment> segs;
  segs.reserve(annotations.size());
  for (const ConfidenceAnnotation& a : annotations) segs.push_back(a.segment);
  return Diarization(conversation_id, std::move(segs));
}

struct SweepPoint {
  double coverage_target = 1.0;
  double achieved_coverage = 1.0;
  double cder = 0.0;
};

struct SweepCurve {
  Method method = Method::Cosine;
  std::vector<SweepPoint> points;  // sorted by coverage_target, strictly increasing
};

inline std::vector<double> default_coverage_grid() {
  std::vector<double> grid;
  for (int k = 30; k <= 100; k += 5) grid.push_back(k / 100.0);
  return grid;
}

namespace detail {

inline bool score_rank_before(const ConfidenceAnnotation& a,
                              const ConfidenceAnnotation& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.segment.interval.start != b.segment.interval.start)
    return a.segment.interval.start < b.segment.interval.start;
  return a.segment.interval.end < b.segment.interval.end;
}

}  // namespace detail

// Rank-order partition applied over the pooled corpus instead of per
// conversation: one joint ranking, coverage measured against the whole
// corpus duration. Returns one partition per input conversation.
inline std::vector<CoveragePartition> pooled_partition(
    const std::vector<EvalConversation>& conversations, double target_coverage) {
  std::vector<std::pair<std::size_t, ConfidenceAnnotation>> pooled;
  double total = 0.0;
  for (std::size_t c = 0; c < conversations.size(); ++c) {
    for (const ConfidenceAnnotation& a : conversations[c].annotations) {
      pooled.emplace_back(c, a);
      total += a.segment.interval.duration();
    }
  }
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const auto& x, const auto& y) {
                     return detail::score_rank_before(x.second, y.second);
                   });
  std::vector<CoveragePartition> parts(conversations.size());
  double high_duration = 0.0;
  std::size_t i = 0;
  for (; i < pooled.size() && total > 0.0; ++i) {
    const double next = high_duration + pooled[i].second.segment.interval.duration();
    if (next / total > target_coverage + 1e-9) break;
    high_duration = next;
    parts[pooled[i].first].high.push_back(pooled[i].second);
  }
  for (; i < pooled.size(); ++i)
    parts[pooled[i].first].low.push_back(pooled[i].second);
  for (std::size_t c = 0; c < conversations.size(); ++c) {
    double conv_total = 0.0, conv_high = 0.0;
    for (const ConfidenceAnnotation& a : conversations[c].annotations)
      conv_total += a.segment.interval.duration();
    for (const ConfidenceAnnotation& a : parts[c].high)
      conv_high += a.segment.interval.duration();
    parts[c].achieved_coverage = conv_total > 0.0 ? conv_high / conv_total : 1.0;
  }
  return parts;
}

struct SweepOptions {
  ScoringConfig scoring;
  bool pooled = false;  // rank over the pooled corpus instead of per conversation
};

// cDER-vs-coverage curve: one operating point per grid value, each computed
// by partitioning, scoring the covered region, and aggregating corpus-wide.
inline SweepCurve sweep(const std::vector<EvalConversation>& conversations,
                        const std::vector<double>& coverage_grid,
                        const SweepOptions& options = {}) {
  if (conversations.empty()) throw Error("sweep: empty corpus");
  for (double g : coverage_grid)
    if (!(g > 0.0 && g <= 1.0))
      throw Error("sweep: coverage grid values must lie in (0, 1]");
  for (std::size_t i = 1; i < coverage_grid.size(); ++i)
    if (coverage_grid[i] <= coverage_grid[i - 1])
      throw Error("sweep: coverage grid must be strictly increasing");

  SweepCurve curve;
  curve.method = conversations.front().annotations.empty()
                     ? Method::Cosine
                     : conversations.front().annotations.front().method;
  double corpus_total = 0.0;
  for (const EvalConversation& c : conversations)
    for (const ConfidenceAnnotation& a : c.annotations)
      corpus_total += a.segment.interval.duration();

  for (double target : coverage_grid) {
    std::vector<CoveragePartition> parts;
    if (options.pooled) {
      parts = pooled_partition(conversations, target);
    } else {
      parts.reserve(conversations.size());
      for (const EvalConversation& c : conversations)
        parts.push_back(partition_by_confidence(c.annotations, target));
    }
    std::vector<DerBreakdown> breakdowns;
    double high_duration = 0.0;
    for (std::size_t c = 0; c < conversations.size(); ++c) {
      breakdowns.push_back(compute_cder(conversations[c].reference,
                                        conversations[c].hypothesis, parts[c],
                                        options.scoring));
      for (const ConfidenceAnnotation& a : parts[c].high)
        high_duration += a.segment.interval.duration();
    }
    const DerBreakdown agg = corpus_aggregate(breakdowns);
    SweepPoint p;
    p.coverage_target = target;
    p.achieved_coverage = corpus_total > 0.0 ? high_duration / corpus_total : 1.0;
    p.cder = agg.der();
    curve.points.push_back(p);
  }
  return curve;
}

// A raw-score cutoff chosen on validation data, reusable across
// conversations and datasets.
struct GlobalThreshold {
  Method method = Method::Cosine;
  double threshold = 0.0;
  double validation_coverage = 1.0;
  double validation_cder = 0.0;
};

enum class ThresholdCriterion {
  Ratio,               // minimize cDER / coverage
  CderAtMinCoverage,   // minimize cDER subject to coverage >= floor
};

// High-confidence side = segments with score >= threshold (raw-score
// thresholding, not rank-based).
inline CoveragePartition partition_at_threshold(
    std::vector<ConfidenceAnnotation> annotations, double threshold) {
  CoveragePartition out;
  double total = 0.0, high = 0.0;
  std::stable_sort(annotations.begin(), annotations.end(),
                   detail::score_rank_before);
  for (const ConfidenceAnnotation& a : annotations) {
    const double dur = a.segment.interval.duration();
    total += dur;
    if (a.score >= threshold) {
      out.high.push_back(a);
      high += dur;
    } else {
      out.low.push_back(a);
    }
  }
  out.achieved_coverage = total > 0.0 ? high / total : 1.0;
  return out;
}

inline CoveragePartition apply_threshold(
    const std::vector<ConfidenceAnnotation>& annotations,
    const GlobalThreshold& t) {
  return partition_at_threshold(annotations, t.threshold);
}

struct ThresholdOptions {
  ScoringConfig scoring;
  ThresholdCriterion criterion = ThresholdCriterion::Ratio;
  double coverage_floor = 0.5;  // used by CderAtMinCoverage
};

// Scans every distinct observed confidence value as a candidate cutoff and
// keeps the one minimizing the criterion on the validation corpus; ties go
// to the larger coverage.
inline GlobalThreshold select_global_threshold(
    const std::vector<EvalConversation>& conversations,
    const ThresholdOptions& options = {}) {
  std::set<double> candidate_set;
  Method method = Method::Cosine;
  bool have_any = false;
  for (const EvalConversation& c : conversations) {
    for (const ConfidenceAnnotation& a : c.annotations) {
      candidate_set.insert(a.score);
      method = a.method;
      have_any = true;
    }
  }
  if (!have_any) throw Error("select_global_threshold: empty validation corpus");

  double corpus_total = 0.0;
  for (const EvalConversation& c : conversations)
    for (const ConfidenceAnnotation& a : c.annotations)
      corpus_total += a.segment.interval.duration();

  GlobalThreshold best;
  best.method = method;
  double best_objective = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double t : candidate_set) {
    std::vector<DerBreakdown> breakdowns;
    double high_duration = 0.0;
    std::vector<CoveragePartition> parts;
    for (const EvalConversation& c : conversations) {
      CoveragePartition p = partition_at_threshold(c.annotations, t);
      for (const ConfidenceAnnotation& a : p.high)
        high_duration += a.segment.interval.duration();
      breakdowns.push_back(
          compute_cder(c.reference, c.hypothesis, p, options.scoring));
      parts.push_back(std::move(p));
    }
    const DerBreakdown agg = corpus_aggregate(breakdowns);
    const double coverage = corpus_total > 0.0 ? high_duration / corpus_total : 0.0;
    if (coverage <= 0.0 || !agg.scorable()) continue;
    const double cder = agg.der();
    double objective;
    if (options.criterion == ThresholdCriterion::Ratio) {
      objective = cder / coverage;
    } else {
      if (coverage < options.coverage_floor) continue;
      objective = cder;
    }
    if (!found || objective < best_objective ||
        (objective == best_objective && coverage > best.validation_coverage)) {
      found = true;
      best_objective = objective;
      best.threshold = t;
      best.validation_coverage = coverage;
      best.validation_cder = cder;
    }
  }
  if (!found)
    throw Error("select_global_threshold: no candidate satisfies the criterion");
  return best;
}

// Equal-width histogram over [min_score, max_score] with duration- and
// count-weighted tallies. A degenerate score range collapses to one bin.
struct HistogramBin {
  double bin_low = 0.0;
  double bin_high = 0.0;
  double duration = 0.0;
  std::size_t count = 0;
};

inline std::vector<HistogramBin> histogram(
    const std::vector<ConfidenceAnnotation>& annotations, int bin_count) {
  if (bin_count < 1) throw Error("histogram: bin_count must be >= 1");
  if (annotations.empty()) return {};
  double lo = annotations.front().score, hi = lo;
  for (const ConfidenceAnnotation& a : annotations) {
    lo = std::min(lo, a.score);
    hi = std::max(hi, a.score);
  }
  if (hi <= lo) {
    HistogramBin b{lo, hi, 0.0, 0};
    for (const ConfidenceAnnotation& a : annotations) {
      b.duration += a.segment.interval.duration();
      ++b.count;
    }
    return {b};
  }
  const double width = (hi - lo) / bin_count;
  std::vector<HistogramBin> bins(bin_count);
  for (int k = 0; k < bin_count; ++k) {
    bins[k].bin_low = lo + k * width;
    bins[k].bin_high = k + 1 == bin_count ? hi : lo + (k + 1) * width;
  }
  for (const ConfidenceAnnotation& a : annotations) {
    int k = static_cast<int>((a.score - lo) / width);
    k = std::clamp(k, 0, bin_count - 1);
    bins[k].duration += a.segment.interval.duration();
    ++bins[k].count;
  }
  return bins;
}

// --- CLI-facing serializations ---

inline void write_curve_csv(const SweepCurve& curve, std::ostream& out) {
  out << "method,coverage_target,achieved_coverage,cder\n";
  for (const SweepPoint& p : curve.points) {
    out << to_string(curve.method) << ',' << detail::format_score(p.coverage_target)
        << ',' << detail::format_score(p.achieved_coverage) << ','
        << detail::format_score(p.cder) << '\n';
  }
}

inline void write_histogram_csv(Method method, const std::vector<HistogramBin>& bins,
                                std::ostream& out, bool with_header = true) {
  if (with_header) out << "method,bin_low,bin_high,duration,count\n";
  for (const HistogramBin& b : bins) {
    out << to_string(method) << ',' << detail::format_score(b.bin_low) << ','
        << detail::format_score(b.bin_high) << ','
        << detail::format_score(b.duration) << ',' << b.count << '\n';
  }
}

inline void write_threshold_json(const GlobalThreshold& t, std::ostream& out) {
  nlohmann::json j;
  j["method"] = to_string(t.method);
  j["threshold"] = t.threshold;
  j["validation_coverage"] = t.validation_coverage;
  j["validation_cder"] = t.validation_cder;
  out << j.dump(2) << '\n';
}

inline GlobalThreshold read_threshold_json(std::istream& in) {
  nlohmann::json j;
  in >> j;
  GlobalThreshold t;
  const auto m = method_from_string(j.at("method").get<std::string>());
  if (!m) throw Error("threshold JSON: unknown method");
  t.method = *m;
  t.threshold = j.at("threshold").get<double>();
  t.validation_coverage = j.value("validation_coverage", 1.0);
  t.validation_cder = j.value("validation_cder", 0.0);
  return t;
}

}  // namespace diaconf

#pragma once

#include <algorithm>
#include <initializer_list>
#include <utility>
#include <vector>

#include "diaconf/core.hpp"

namespace diaconf {

// Set of disjoint, sorted, half-open time intervals. Adjacent and overlapping
// intervals are merged at construction, so duration arithmetic is unambiguous.
class Timeline {
 public:
  Timeline() = default;

  explicit Timeline(std::vector<TimeInterval> intervals) {
    std::vector<std::pair<double, double>> raw;
    raw.reserve(intervals.size());
    for (const TimeInterval& iv : intervals) raw.emplace_back(iv.start, iv.end);
    assign_normalized(std::move(raw));
  }

  Timeline(std::initializer_list<TimeInterval> intervals)
      : Timeline(std::vector<TimeInterval>(intervals)) {}

  const std::vector<TimeInterval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }

  double total_duration() const {
    double d = 0.0;
    for (const TimeInterval& iv : intervals_) d += iv.duration();
    return d;
  }

  // Point membership (closed-open).
  bool contains(double t) const {
    auto it = std::upper_bound(
        intervals_.begin(), intervals_.end(), t,
        [](double v, const TimeInterval& iv) { return v < iv.start; });
    if (it == intervals_.begin()) return false;
    --it;
    return t < it->end;
  }

  friend Timeline timeline_union(const Timeline& a, const Timeline& b) {
    std::vector<std::pair<double, double>> raw;
    raw.reserve(a.intervals_.size() + b.intervals_.size());
    for (const TimeInterval& iv : a.intervals_) raw.emplace_back(iv.start, iv.end);
    for (const TimeInterval& iv : b.intervals_) raw.emplace_back(iv.start, iv.end);
    Timeline out;
    out.assign_normalized(std::move(raw));
    return out;
  }

  friend Timeline timeline_intersect(const Timeline& a, const Timeline& b) {
    std::vector<std::pair<double, double>> raw;
    std::size_t i = 0, j = 0;
    while (i < a.intervals_.size() && j < b.intervals_.size()) {
      const TimeInterval& x = a.intervals_[i];
      const TimeInterval& y = b.intervals_[j];
      double lo = std::max(x.start, y.start);
      double hi = std::min(x.end, y.end);
      if (hi - lo > kTimeEps) raw.emplace_back(lo, hi);
      if (x.end < y.end)
        ++i;
      else
        ++j;
    }
    Timeline out;
    out.assign_normalized(std::move(raw));
    return out;
  }

  friend Timeline timeline_subtract(const Timeline& a, const Timeline& b) {
    std::vector<std::pair<double, double>> raw;
    std::size_t j = 0;
    for (const TimeInterval& x : a.intervals_) {
      double cursor = x.start;
      while (j < b.intervals_.size() && b.intervals_[j].end <= x.start) ++j;
      for (std::size_t k = j; k < b.intervals_.size(); ++k) {
        const TimeInterval& y = b.intervals_[k];
        if (y.start >= x.end) break;
        if (y.start - cursor > kTimeEps) raw.emplace_back(cursor, y.start);
        cursor = std::max(cursor, y.end);
        if (cursor >= x.end) break;
      }
      if (x.end - cursor > kTimeEps) raw.emplace_back(cursor, x.end);
    }
    Timeline out;
    out.assign_normalized(std::move(raw));
    return out;
  }

  bool operator==(const Timeline& o) const { return intervals_ == o.intervals_; }

 private:
  void assign_normalized(std::vector<std::pair<double, double>> raw) {
    std::sort(raw.begin(), raw.end());
    intervals_.clear();
    for (const auto& [s, e] : raw) {
      if (e - s <= kTimeEps) continue;
      if (!intervals_.empty() && s <= intervals_.back().end + kTimeEps) {
        if (e > intervals_.back().end) intervals_.back().end = e;
      } else {
        intervals_.emplace_back(s, e);
      }
    }
  }

  std::vector<TimeInterval> intervals_;
};

// Union of all segment intervals of a diarization.
inline Timeline speech_timeline(const Diarization& d) {
  std::vector<TimeInterval> ivs;
  ivs.reserve(d.segments().size());
  for (const Segment& s : d.segments()) ivs.push_back(s.interval);
  return Timeline(std::move(ivs));
}

// Union of the segment intervals of one speaker.
inline Timeline speaker_timeline(const Diarization& d, const std::string& speaker) {
  std::vector<TimeInterval> ivs;
  for (const Segment& s : d.segments())
    if (s.speaker == speaker) ivs.push_back(s.interval);
  return Timeline(std::move(ivs));
}

// Regions where at least two distinct speakers are active.
inline Timeline overlap_timeline(const Diarization& d) {
  std::vector<std::string> speakers = d.speakers();
  std::vector<Timeline> per;
  per.reserve(speakers.size());
  for (const std::string& s : speakers) per.push_back(speaker_timeline(d, s));
  Timeline out;
  for (std::size_t i = 0; i < per.size(); ++i)
    for (std::size_t j = i + 1; j < per.size(); ++j)
      out = timeline_union(out, timeline_intersect(per[i], per[j]));
  return out;
}

// Union of +/- collar windows around every segment boundary (clipped at 0).
inline Timeline collar_timeline(const Diarization& d, double collar) {
  if (collar <= 0.0) return Timeline();
  std::vector<TimeInterval> ivs;
  ivs.reserve(2 * d.segments().size());
  for (const Segment& s : d.segments()) {
    for (double b : {s.interval.start, s.interval.end}) {
      double lo = std::max(0.0, b - collar);
      double hi = b + collar;
      if (hi - lo > kTimeEps) ivs.emplace_back(lo, hi);
    }
  }
  return Timeline(std::move(ivs));
}

}  // namespace diaconf

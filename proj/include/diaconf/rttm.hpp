#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "diaconf/core.hpp"

namespace diaconf {

// One SPEAKER record of an RTTM file.
struct RttmRecord {
  std::string file_id;
  std::string channel;
  double onset = 0.0;
  double duration = 0.0;
  std::string speaker;
};

struct RttmParseResult {
  std::map<std::string, Diarization> diarizations;
  std::vector<std::string> warnings;  // rejected records, each with its line number
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline double parse_double(const std::string& tok, std::size_t line,
                           const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(line, std::string("non-numeric ") + what + " '" + tok + "'");
  }
  if (pos != tok.size())
    throw ParseError(line, std::string("non-numeric ") + what + " '" + tok + "'");
  return v;
}

inline std::string format_seconds(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", t);
  return buf;
}

}  // namespace detail

// Parses RTTM text: `SPEAKER <file> <chan> <tbeg> <tdur> <NA> <NA> <speaker>
// <NA> <NA>`. Lines of other record types are skipped. Malformed SPEAKER
// lines raise ParseError with the line number; non-positive durations are
// rejected with a warning instead of being silently kept.
inline RttmParseResult parse_rttm(std::istream& in) {
  RttmParseResult result;
  std::map<std::string, std::vector<Segment>> segments;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> tok = detail::split_ws(line);
    if (tok.empty() || tok[0] != "SPEAKER") continue;
    if (tok.size() != 9 && tok.size() != 10)
      throw ParseError(line_no, "SPEAKER record has " +
                                    std::to_string(tok.size()) +
                                    " fields, expected 9 or 10");
    RttmRecord rec;
    rec.file_id = tok[1];
    rec.channel = tok[2];
    rec.onset = detail::parse_double(tok[3], line_no, "onset");
    rec.duration = detail::parse_double(tok[4], line_no, "duration");
    rec.speaker = tok[7];
    if (rec.onset < 0.0)
      throw ParseError(line_no, "negative onset");
    if (rec.duration <= 0.0) {
      result.warnings.push_back("line " + std::to_string(line_no) +
                                ": non-positive duration, record ignored");
      continue;
    }
    if (rec.speaker.empty() || rec.speaker == "<NA>")
      throw ParseError(line_no, "missing speaker label");
    segments[rec.file_id].emplace_back(
        rec.file_id, TimeInterval(rec.onset, rec.onset + rec.duration),
        rec.speaker);
  }
  for (auto& [file_id, segs] : segments)
    result.diarizations.emplace(file_id, Diarization(file_id, std::move(segs)));
  return result;
}

// Serializes diarizations as RTTM with millisecond time resolution;
// parse_rttm(write_rttm(d)) reproduces d.
inline void write_rttm(const std::map<std::string, Diarization>& diarizations,
                       std::ostream& out) {
  for (const auto& [file_id, d] : diarizations) {
    for (const Segment& s : d.segments()) {
      out << "SPEAKER " << file_id << " 1 "
          << detail::format_seconds(s.interval.start) << ' '
          << detail::format_seconds(s.interval.duration())
          << " <NA> <NA> " << s.speaker << " <NA> <NA>\n";
    }
  }
}

inline void write_rttm(const Diarization& d, std::ostream& out) {
  write_rttm(std::map<std::string, Diarization>{{d.conversation_id(), d}}, out);
}

}  // namespace diaconf

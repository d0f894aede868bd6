#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "diaconf/confidence.hpp"
#include "diaconf/core.hpp"
#include "diaconf/rttm.hpp"
#include "diaconf/spectral.hpp"

namespace diaconf {

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

// Reads the next line, stripping a trailing CR; returns false at EOF.
inline bool read_line(std::istream& in, std::string& line, std::size_t& line_no) {
  if (!std::getline(in, line)) return false;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

inline std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

inline std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace detail

// --- embedding CSV: conversation_id,start,end,e0,...,e{D-1} ---

inline EmbeddingTrack parse_embeddings_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::read_line(in, line, line_no))
    throw ParseError(1, "missing embedding CSV header");
  const std::vector<std::string> header = detail::split_csv(line);
  if (header.size() < 5 || header[0] != "conversation_id" ||
      header[1] != "start" || header[2] != "end")
    throw ParseError(1, "embedding CSV header must be conversation_id,start,end,e0,...");
  const std::size_t dim = header.size() - 3;

  std::string conversation_id;
  std::vector<Embedding> embeddings;
  while (detail::read_line(in, line, line_no)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = detail::split_csv(line);
    if (f.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                    " fields, got " + std::to_string(f.size()));
    if (conversation_id.empty())
      conversation_id = f[0];
    else if (f[0] != conversation_id)
      throw ParseError(line_no, "conversation_id changes mid-file");
    const double start = detail::parse_double(f[1], line_no, "start");
    const double end = detail::parse_double(f[2], line_no, "end");
    if (end <= start) throw ParseError(line_no, "end <= start");
    std::vector<double> v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      v[k] = detail::parse_double(f[3 + k], line_no, "embedding value");
      if (!std::isfinite(v[k]))
        throw ParseError(line_no, "non-finite embedding value");
    }
    if (norm(v) <= 0.0) throw ParseError(line_no, "zero-norm embedding vector");
    embeddings.emplace_back(std::move(v), TimeInterval(start, end));
  }
  return EmbeddingTrack(conversation_id, std::move(embeddings));
}

inline void write_embeddings_csv(const EmbeddingTrack& track, std::ostream& out) {
  out << "conversation_id,start,end";
  for (std::size_t k = 0; k < track.dim(); ++k) out << ",e" << k;
  out << '\n';
  for (const Embedding& e : track.embeddings()) {
    out << track.conversation_id() << ','
        << detail::format_seconds(e.interval.start) << ','
        << detail::format_seconds(e.interval.end);
    for (double x : e.vector) out << ',' << detail::format_value(x);
    out << '\n';
  }
}

// --- confidence CSV: conversation_id,start,end,speaker,method,score ---

inline std::vector<ConfidenceAnnotation> parse_confidence_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::read_line(in, line, line_no))
    throw ParseError(1, "missing confidence CSV header");
  if (detail::split_csv(line) !=
      std::vector<std::string>{"conversation_id", "start", "end", "speaker",
                               "method", "score"})
    throw ParseError(1,
                     "confidence CSV header must be "
                     "conversation_id,start,end,speaker,method,score");

  std::vector<ConfidenceAnnotation> out;
  std::set<std::tuple<std::string, double, double, std::string, Method>> seen;
  while (detail::read_line(in, line, line_no)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = detail::split_csv(line);
    if (f.size() != 6)
      throw ParseError(line_no, "expected 6 fields, got " + std::to_string(f.size()));
    const double start = detail::parse_double(f[1], line_no, "start");
    const double end = detail::parse_double(f[2], line_no, "end");
    if (end <= start) throw ParseError(line_no, "end <= start");
    const std::optional<Method> method = method_from_string(f[4]);
    if (!method) throw ParseError(line_no, "unknown method '" + f[4] + "'");
    const double score = detail::parse_double(f[5], line_no, "score");
    if (!std::isfinite(score)) throw ParseError(line_no, "non-finite score");
    if (!seen.insert({f[0], start, end, f[3], *method}).second)
      throw ParseError(line_no, "duplicate (conversation, segment, method) row");
    out.push_back(ConfidenceAnnotation{
        Segment(f[0], TimeInterval(start, end), f[3]), *method, score, false});
  }
  return out;
}

inline void write_confidence_csv(const std::vector<ConfidenceAnnotation>& annotations,
                                 std::ostream& out) {
  out << "conversation_id,start,end,speaker,method,score\n";
  for (const ConfidenceAnnotation& a : annotations) {
    out << a.segment.conversation_id << ','
        << detail::format_seconds(a.segment.interval.start) << ','
        << detail::format_seconds(a.segment.interval.end) << ','
        << a.segment.speaker << ',' << to_string(a.method) << ','
        << detail::format_score(a.score) << '\n';
  }
}

// --- spectral basis sidecar CSV: conversation_id,start,end,label,b0,... ---

inline SpectralBasis parse_basis_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!detail::read_line(in, line, line_no))
    throw ParseError(1, "missing basis CSV header");
  const std::vector<std::string> header = detail::split_csv(line);
  if (header.size() < 5 || header[0] != "conversation_id" ||
      header[1] != "start" || header[2] != "end" || header[3] != "label")
    throw ParseError(1, "basis CSV header must be conversation_id,start,end,label,b0,...");
  const int dim = static_cast<int>(header.size()) - 4;

  SpectralBasis basis;
  basis.num_speakers = dim;
  while (detail::read_line(in, line, line_no)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = detail::split_csv(line);
    if (f.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                    " fields, got " + std::to_string(f.size()));
    if (basis.conversation_id.empty())
      basis.conversation_id = f[0];
    else if (f[0] != basis.conversation_id)
      throw ParseError(line_no, "conversation_id changes mid-file");
    const double start = detail::parse_double(f[1], line_no, "start");
    const double end = detail::parse_double(f[2], line_no, "end");
    if (end <= start) throw ParseError(line_no, "end <= start");
    const double label = detail::parse_double(f[3], line_no, "label");
    if (label < 0 || label >= dim || label != std::floor(label))
      throw ParseError(line_no, "label out of range");
    std::vector<double> row(dim);
    for (int k = 0; k < dim; ++k)
      row[k] = detail::parse_double(f[4 + k], line_no, "basis value");
    basis.windows.emplace_back(start, end);
    basis.rows.push_back(std::move(row));
    basis.labels.push_back(static_cast<int>(label));
  }
  return basis;
}

inline void write_basis_csv(const SpectralBasis& basis, std::ostream& out) {
  out << "conversation_id,start,end,label";
  for (int k = 0; k < basis.num_speakers; ++k) out << ",b" << k;
  out << '\n';
  for (std::size_t i = 0; i < basis.rows.size(); ++i) {
    out << basis.conversation_id << ','
        << detail::format_seconds(basis.windows[i].start) << ','
        << detail::format_seconds(basis.windows[i].end) << ','
        << basis.labels[i];
    for (double x : basis.rows[i]) out << ',' << detail::format_value(x);
    out << '\n';
  }
}

}  // namespace diaconf

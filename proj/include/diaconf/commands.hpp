#pragma once

#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "diaconf/csv.hpp"
#include "diaconf/manifest.hpp"
#include "diaconf/metrics.hpp"
#include "diaconf/rttm.hpp"
#include "diaconf/selection.hpp"
#include "diaconf/spectral.hpp"
#include "diaconf/synth.hpp"

namespace diaconf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitWarnings = 1;
inline constexpr int kExitFatal = 2;

namespace detail {

// All output files go through write-temp-then-rename so readers never see a
// partial file.
inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs fn(0..count-1) on up to `jobs` threads. The first exception wins and
// is rethrown on the calling thread after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  const int n = std::min<std::size_t>(jobs, count);
  threads.reserve(n);
  for (int k = 0; k < n; ++k) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline EmbeddingTrack load_embeddings(const CorpusManifest& manifest,
                                      const ManifestEntry& entry) {
  if (entry.embeddings.empty())
    throw Error("conversation '" + entry.id + "': no embeddings path in manifest");
  const std::filesystem::path p = manifest.resolve_path(entry.embeddings);
  std::ifstream in(p);
  if (!in)
    throw Error("conversation '" + entry.id + "': cannot open embeddings file " +
                p.string());
  try {
    return parse_embeddings_csv(in);
  } catch (const Error& e) {
    throw Error("conversation '" + entry.id + "': " + p.string() + ": " + e.what());
  }
}

inline Diarization load_rttm_for(const std::filesystem::path& path,
                                 const std::string& conversation_id) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open RTTM " + path.string());
  RttmParseResult parsed = parse_rttm(in);
  const auto it = parsed.diarizations.find(conversation_id);
  if (it == parsed.diarizations.end())
    throw Error(path.string() + ": no SPEAKER records for conversation '" +
                conversation_id + "'");
  return it->second;
}

inline std::filesystem::path sidecar_path(std::filesystem::path rttm_path) {
  rttm_path.replace_extension(".basis.csv");
  return rttm_path;
}

}  // namespace detail

// --- diarize -------------------------------------------------------------

struct DiarizeOptions {
  std::string manifest_path;
  std::string out_dir;
  int max_speakers = 10;
  std::optional<int> num_speakers;
  int jobs = 1;
};

// Spectral-clusters every conversation in the manifest, writing one RTTM and
// one spectral-basis sidecar per conversation plus a combined all.rttm.
inline int run_diarize(const DiarizeOptions& opt, std::ostream& diag) {
  const CorpusManifest manifest = CorpusManifest::load(opt.manifest_path);
  std::filesystem::create_directories(opt.out_dir);
  if (manifest.conversations().empty()) {
    diag << "warning: empty manifest, nothing to diarize\n";
    detail::write_file_atomic(std::filesystem::path(opt.out_dir) / "all.rttm", "");
    return kExitOk;
  }

  SpectralParams params;
  params.max_speakers_cap = opt.max_speakers;
  params.fixed_num_speakers = opt.num_speakers;

  const std::size_t n = manifest.conversations().size();
  std::vector<Diarization> results(n);
  std::vector<std::string> errors(n);
  detail::parallel_for(n, opt.jobs, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.conversations()[i];
    try {
      const EmbeddingTrack track = detail::load_embeddings(manifest, entry);
      SpectralOutput out = spectral_diarize(track, params);
      const SpectralBasis basis =
          make_spectral_basis(track, out.decomposition, out.assignment);
      std::ostringstream rttm;
      write_rttm(out.diarization, rttm);
      std::ostringstream side;
      write_basis_csv(basis, side);
      const std::filesystem::path base =
          std::filesystem::path(opt.out_dir) / entry.id;
      detail::write_file_atomic(base.string() + ".rttm", rttm.str());
      detail::write_file_atomic(base.string() + ".basis.csv", side.str());
      results[i] = std::move(out.diarization);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  bool fatal = false;
  std::map<std::string, Diarization> combined;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      diag << "error: " << errors[i] << '\n';
      fatal = true;
    } else {
      combined.emplace(results[i].conversation_id(), results[i]);
    }
  }
  std::ostringstream all;
  write_rttm(combined, all);
  detail::write_file_atomic(std::filesystem::path(opt.out_dir) / "all.rttm",
                            all.str());
  return fatal ? kExitFatal : kExitOk;
}

// --- score ---------------------------------------------------------------

struct ScoreOptions {
  std::string manifest_path;
  std::string hypothesis_dir;  // when set, score <dir>/<id>.rttm instead of
                               // the manifest's hypothesis entries
  std::vector<Method> methods = {Method::Cosine, Method::Local,
                                 Method::Silhouette};
  std::string out_path;
  ConfidenceConfig confidence;
  int jobs = 1;
};

// Computes the requested confidence methods for every conversation. The
// spectral method needs the basis sidecar written by `diarize`; when it is
// missing the method is skipped with a warning and the rest are still
// emitted.
inline int run_score(const ScoreOptions& opt, std::ostream& diag) {
  const CorpusManifest manifest = CorpusManifest::load(opt.manifest_path);
  if (opt.methods.empty()) {
    diag << "error: no methods requested\n";
    return kExitFatal;
  }
  const std::size_t n = manifest.conversations().size();
  std::vector<std::vector<ConfidenceAnnotation>> results(n);
  std::vector<std::string> errors(n);
  std::vector<std::vector<std::string>> warnings(n);

  detail::parallel_for(n, opt.jobs, [&](std::size_t i) {
    const ManifestEntry& entry = manifest.conversations()[i];
    try {
      const EmbeddingTrack track = detail::load_embeddings(manifest, entry);
      std::filesystem::path hyp_path;
      if (!opt.hypothesis_dir.empty()) {
        hyp_path = std::filesystem::path(opt.hypothesis_dir) / (entry.id + ".rttm");
      } else {
        if (entry.hypothesis.empty())
          throw Error("conversation '" + entry.id +
                      "': no hypothesis in manifest and no --hypothesis-dir");
        hyp_path = manifest.resolve_path(entry.hypothesis);
      }
      const Diarization hyp = detail::load_rttm_for(hyp_path, entry.id);
      const SegmentEmbeddingMap map = map_embeddings_to_segments(hyp, track);

      for (Method m : opt.methods) {
        switch (m) {
          case Method::Cosine: {
            auto a = cosine_similarity_score(hyp, map, track, opt.confidence);
            results[i].insert(results[i].end(), a.begin(), a.end());
            break;
          }
          case Method::Local: {
            auto a = local_confidence_score(hyp, map, track, opt.confidence);
            results[i].insert(results[i].end(), a.begin(), a.end());
            break;
          }
          case Method::Silhouette: {
            auto a = silhouette_score(hyp, map, track, opt.confidence);
            results[i].insert(results[i].end(), a.begin(), a.end());
            break;
          }
          case Method::Spectral: {
            const std::filesystem::path side = detail::sidecar_path(hyp_path);
            std::ifstream in(side);
            if (!in) {
              warnings[i].push_back(
                  "conversation '" + entry.id +
                  "': spectral method skipped, no basis sidecar at " +
                  side.string());
              break;
            }
            try {
              const SpectralBasis basis = parse_basis_csv(in);
              auto a = spectral_clustering_score(hyp, map, basis, opt.confidence);
              results[i].insert(results[i].end(), a.begin(), a.end());
            } catch (const Error& e) {
              warnings[i].push_back("conversation '" + entry.id +
                                    "': spectral method skipped: " + e.what());
            }
            break;
          }
        }
      }
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  bool fatal = false, warned = false;
  std::vector<ConfidenceAnnotation> all;
  for (std::size_t i = 0; i < n; ++i) {
    for (const std::string& w : warnings[i]) {
      diag << "warning: " << w << '\n';
      warned = true;
    }
    if (!errors[i].empty()) {
      diag << "error: " << errors[i] << '\n';
      fatal = true;
      continue;
    }
    all.insert(all.end(), results[i].begin(), results[i].end());
  }
  std::ostringstream csv;
  write_confidence_csv(all, csv);
  detail::write_file_atomic(opt.out_path, csv.str());
  if (fatal) return kExitFatal;
  return warned ? kExitWarnings : kExitOk;
}

// --- shared evaluation corpus loading -------------------------------------

namespace detail {

struct LoadedCorpus {
  // conversation id -> (method -> annotations); insertion order by manifest
  std::vector<std::string> ids;
  std::map<std::string, Diarization> references;
  std::map<std::string, std::map<Method, std::vector<ConfidenceAnnotation>>> scores;
  std::vector<std::string> skipped;  // conversations without usable inputs
};

inline LoadedCorpus load_eval_corpus(const CorpusManifest& manifest,
                                     const std::filesystem::path& scores_path) {
  LoadedCorpus corpus;
  std::ifstream in(scores_path);
  if (!in) throw Error("cannot open scores CSV " + scores_path.string());
  const std::vector<ConfidenceAnnotation> annotations = parse_confidence_csv(in);
  std::map<std::string, std::map<Method, std::vector<ConfidenceAnnotation>>> by_conv;
  for (const ConfidenceAnnotation& a : annotations)
    by_conv[a.segment.conversation_id][a.method].push_back(a);

  for (const ManifestEntry& entry : manifest.conversations()) {
    if (entry.reference.empty()) {
      corpus.skipped.push_back("conversation '" + entry.id +
                               "': no reference in manifest");
      continue;
    }
    const auto sc = by_conv.find(entry.id);
    if (sc == by_conv.end()) {
      corpus.skipped.push_back("conversation '" + entry.id +
                               "': no rows in scores CSV");
      continue;
    }
    Diarization ref;
    try {
      ref = load_rttm_for(manifest.resolve_path(entry.reference), entry.id);
    } catch (const Error& e) {
      corpus.skipped.push_back(e.what());
      continue;
    }
    corpus.ids.push_back(entry.id);
    corpus.references.emplace(entry.id, std::move(ref));
    corpus.scores.emplace(entry.id, sc->second);
  }
  return corpus;
}

inline std::vector<Method> methods_present(const LoadedCorpus& corpus) {
  std::set<Method> present;
  for (const auto& [_, per_method] : corpus.scores)
    for (const auto& [m, __] : per_method) present.insert(m);
  std::vector<Method> out;
  for (Method m : all_methods())
    if (present.count(m)) out.push_back(m);
  return out;
}

inline std::vector<EvalConversation> eval_conversations(const LoadedCorpus& corpus,
                                                        Method method) {
  std::vector<EvalConversation> out;
  for (const std::string& id : corpus.ids) {
    const auto& per_method = corpus.scores.at(id);
    const auto it = per_method.find(method);
    if (it == per_method.end()) continue;
    EvalConversation c;
    c.reference = corpus.references.at(id);
    c.hypothesis = hypothesis_from_annotations(id, it->second);
    c.annotations = it->second;
    out.push_back(std::move(c));
  }
  return out;
}

inline void append_metrics_row(std::ostream& out, const std::string& conversation,
                               Method method, double coverage_target,
                               double achieved, const DerBreakdown& b) {
  out << conversation << ',' << to_string(method) << ','
      << format_score(coverage_target) << ',' << format_score(achieved) << ','
      << format_score(b.miss) << ',' << format_score(b.false_alarm) << ','
      << format_score(b.speaker_error) << ',' << format_score(b.scored_speech)
      << ',' << format_score(b.der()) << '\n';
}

inline constexpr const char* kMetricsHeader =
    "conversation_id,method,coverage_target,achieved_coverage,miss,false_alarm,"
    "speaker_error,scored_speech,der\n";

}  // namespace detail

// --- evaluate --------------------------------------------------------------

struct EvaluateOptions {
  std::string manifest_path;
  std::string scores_path;
  std::vector<double> coverages = {0.7, 0.9};
  ScoringConfig scoring;
  bool pooled = false;
  std::string out_path;
};

// Coverage/cDER table: per method and coverage target, one row per
// conversation plus an "ALL" corpus aggregate. The coverage 1.0 baseline row
// (plain DER) is always included.
inline int run_evaluate(const EvaluateOptions& opt, std::ostream& diag) {
  const CorpusManifest manifest = CorpusManifest::load(opt.manifest_path);
  const detail::LoadedCorpus corpus =
      detail::load_eval_corpus(manifest, opt.scores_path);
  for (const std::string& s : corpus.skipped) diag << "warning: " << s << '\n';
  if (corpus.ids.empty()) {
    diag << "error: no scorable conversations\n";
    return kExitFatal;
  }

  std::vector<double> coverages = opt.coverages;
  if (std::find(coverages.begin(), coverages.end(), 1.0) == coverages.end())
    coverages.push_back(1.0);
  std::sort(coverages.begin(), coverages.end());

  std::ostringstream out;
  out << detail::kMetricsHeader;
  for (Method method : detail::methods_present(corpus)) {
    const std::vector<EvalConversation> convs =
        detail::eval_conversations(corpus, method);
    for (double target : coverages) {
      std::vector<CoveragePartition> parts;
      if (opt.pooled) {
        parts = pooled_partition(convs, target);
      } else {
        for (const EvalConversation& c : convs)
          parts.push_back(partition_by_confidence(c.annotations, target));
      }
      std::vector<DerBreakdown> breakdowns;
      double high_dur = 0.0, total_dur = 0.0;
      for (std::size_t i = 0; i < convs.size(); ++i) {
        const DerBreakdown b =
            compute_cder(convs[i].reference, convs[i].hypothesis, parts[i],
                         opt.scoring);
        detail::append_metrics_row(out, convs[i].reference.conversation_id(),
                                   method, target, parts[i].achieved_coverage, b);
        breakdowns.push_back(b);
        for (const ConfidenceAnnotation& a : parts[i].high)
          high_dur += a.segment.interval.duration();
        for (const ConfidenceAnnotation& a : convs[i].annotations)
          total_dur += a.segment.interval.duration();
      }
      detail::append_metrics_row(out, "ALL", method, target,
                                 total_dur > 0.0 ? high_dur / total_dur : 1.0,
                                 corpus_aggregate(breakdowns));
    }
  }
  detail::write_file_atomic(opt.out_path, out.str());
  return corpus.skipped.empty() ? kExitOk : kExitWarnings;
}

// --- sweep -----------------------------------------------------------------

struct SweepCmdOptions {
  std::string manifest_path;
  std::string scores_path;
  std::vector<double> grid = default_coverage_grid();
  ScoringConfig scoring;
  bool pooled = false;
  std::string out_path;
};

inline int run_sweep(const SweepCmdOptions& opt, std::ostream& diag) {
  const CorpusManifest manifest = CorpusManifest::load(opt.manifest_path);
  const detail::LoadedCorpus corpus =
      detail::load_eval_corpus(manifest, opt.scores_path);
  for (const std::string& s : corpus.skipped) diag << "warning: " << s << '\n';
  if (corpus.ids.empty()) {
    diag << "error: no scorable conversations\n";
    return kExitFatal;
  }
  std::ostringstream out;
  out << "method,coverage_target,achieved_coverage,cder\n";
  for (Method method : detail::methods_present(corpus)) {
    SweepOptions sweep_options;
    sweep_options.scoring = opt.scoring;
    sweep_options.pooled = opt.pooled;
    const SweepCurve curve =
        sweep(detail::eval_conversations(corpus, method), opt.grid, sweep_options);
    for (const SweepPoint& p : curve.points) {
      out << to_string(method) << ',' << detail::format_score(p.coverage_target)
          << ',' << detail::format_score(p.achieved_coverage) << ','
          << detail::format_score(p.cder) << '\n';
    }
  }
  detail::write_file_atomic(opt.out_path, out.str());
  return corpus.skipped.empty() ? kExitOk : kExitWarnings;
}

// --- threshold ---------------------------------------------------------------

struct ThresholdCmdOptions {
  std::string manifest_path;  // validation split
  std::string scores_path;
  Method method = Method::Silhouette;
  ThresholdCriterion criterion = ThresholdCriterion::Ratio;
  double coverage_floor = 0.5;
  ScoringConfig scoring;
  std::string out_path;  // threshold JSON
  // Optional: apply the chosen threshold to a held-out test split.
  std::string test_manifest_path;
  std::string test_scores_path;
  std::string test_out_path;  // metrics CSV
};

inline int run_threshold(const ThresholdCmdOptions& opt, std::ostream& diag) {
  const CorpusManifest manifest = CorpusManifest::load(opt.manifest_path);
  const detail::LoadedCorpus corpus =
      detail::load_eval_corpus(manifest, opt.scores_path);
  for (const std::string& s : corpus.skipped) diag << "warning: " << s << '\n';
  const std::vector<EvalConversation> convs =
      detail::eval_conversations(corpus, opt.method);
  if (convs.empty()) {
    diag << "error: no validation conversations for method "
         << to_string(opt.method) << '\n';
    return kExitFatal;
  }
  ThresholdOptions options;
  options.scoring = opt.scoring;
  options.criterion = opt.criterion;
  options.coverage_floor = opt.coverage_floor;
  const GlobalThreshold threshold = select_global_threshold(convs, options);
  std::ostringstream json;
  write_threshold_json(threshold, json);
  detail::write_file_atomic(opt.out_path, json.str());

  bool warned = !corpus.skipped.empty();
  if (!opt.test_manifest_path.empty()) {
    const CorpusManifest test_manifest = CorpusManifest::load(opt.test_manifest_path);
    const detail::LoadedCorpus test_corpus =
        detail::load_eval_corpus(test_manifest, opt.test_scores_path);
    for (const std::string& s : test_corpus.skipped) {
      diag << "warning: " << s << '\n';
      warned = true;
    }
    const std::vector<EvalConversation> test_convs =
        detail::eval_conversations(test_corpus, opt.method);
    if (test_convs.empty()) {
      diag << "error: no test conversations for method " << to_string(opt.method)
           << '\n';
      return kExitFatal;
    }
    std::ostringstream out;
    out << detail::kMetricsHeader;
    std::vector<DerBreakdown> breakdowns;
    double high_dur = 0.0, total_dur = 0.0;
    for (const EvalConversation& c : test_convs) {
      const CoveragePartition part = apply_threshold(c.annotations, threshold);
      const DerBreakdown b =
          compute_cder(c.reference, c.hypothesis, part, opt.scoring);
      detail::append_metrics_row(out, c.reference.conversation_id(), opt.method,
                                 part.achieved_coverage, part.achieved_coverage, b);
      breakdowns.push_back(b);
      for (const ConfidenceAnnotation& a : part.high)
        high_dur += a.segment.interval.duration();
      for (const ConfidenceAnnotation& a : c.annotations)
        total_dur += a.segment.interval.duration();
    }
    const double coverage = total_dur > 0.0 ? high_dur / total_dur : 1.0;
    detail::append_metrics_row(out, "ALL", opt.method, coverage, coverage,
                               corpus_aggregate(breakdowns));
    detail::write_file_atomic(opt.test_out_path, out.str());
  }
  return warned ? kExitWarnings : kExitOk;
}

// --- histogram ---------------------------------------------------------------

struct HistogramCmdOptions {
  std::string scores_path;
  int bins = 20;
  std::string out_path;
};

inline int run_histogram(const HistogramCmdOptions& opt, std::ostream& diag) {
  std::ifstream in(opt.scores_path);
  if (!in) {
    diag << "error: cannot open scores CSV " << opt.scores_path << '\n';
    return kExitFatal;
  }
  const std::vector<ConfidenceAnnotation> annotations = parse_confidence_csv(in);
  std::map<Method, std::vector<ConfidenceAnnotation>> by_method;
  for (const ConfidenceAnnotation& a : annotations) by_method[a.method].push_back(a);
  std::ostringstream out;
  out << "method,bin_low,bin_high,duration,count\n";
  for (Method m : all_methods()) {
    const auto it = by_method.find(m);
    if (it == by_method.end()) continue;
    write_histogram_csv(m, histogram(it->second, opt.bins), out, false);
  }
  detail::write_file_atomic(opt.out_path, out.str());
  return kExitOk;
}

// --- synth ---------------------------------------------------------------------

struct SynthCmdOptions {
  std::string out_dir;
  std::uint64_t seed = 1;
  int conversations = 5;
  SynthSpec spec;  // seed and conversation_id are overridden per conversation
};

// Writes a complete synthetic corpus: per conversation an embeddings CSV,
// reference and hypothesis RTTMs, and an error-mask CSV; plus a manifest
// tying them together. Conversation k uses seed (base seed + k).
inline int run_synth(const SynthCmdOptions& opt, std::ostream& diag) {
  if (opt.conversations < 1) {
    diag << "error: need at least one conversation\n";
    return kExitFatal;
  }
  std::filesystem::create_directories(opt.out_dir);
  const std::filesystem::path dir(opt.out_dir);
  std::vector<ManifestEntry> entries;
  for (int k = 0; k < opt.conversations; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "conv%03d", k);
    SynthSpec spec = opt.spec;
    spec.seed = opt.seed + static_cast<std::uint64_t>(k);
    spec.conversation_id = name;
    const SynthResult r = generate(spec);

    std::ostringstream emb, ref, hyp, mask;
    write_embeddings_csv(r.track, emb);
    write_rttm(r.reference, ref);
    write_rttm(r.hypothesis, hyp);
    mask << "conversation_id,start,end,speaker,corrupted\n";
    for (std::size_t i = 0; i < r.hypothesis.segments().size(); ++i) {
      const Segment& s = r.hypothesis.segments()[i];
      mask << s.conversation_id << ',' << detail::format_seconds(s.interval.start)
           << ',' << detail::format_seconds(s.interval.end) << ',' << s.speaker
           << ',' << (r.error_mask[i] ? 1 : 0) << '\n';
    }
    const std::string base = name;
    detail::write_file_atomic(dir / (base + ".embeddings.csv"), emb.str());
    detail::write_file_atomic(dir / (base + ".ref.rttm"), ref.str());
    detail::write_file_atomic(dir / (base + ".hyp.rttm"), hyp.str());
    detail::write_file_atomic(dir / (base + ".mask.csv"), mask.str());

    ManifestEntry e;
    e.id = name;
    e.embeddings = base + ".embeddings.csv";
    e.hypothesis = base + ".hyp.rttm";
    e.reference = base + ".ref.rttm";
    entries.push_back(std::move(e));
  }
  CorpusManifest(entries).save(dir / "manifest.json");
  return kExitOk;
}

}  // namespace diaconf

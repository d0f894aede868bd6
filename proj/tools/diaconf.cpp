// diaconf command-line tool: spectral diarization over precomputed speaker
// embeddings, segment-level confidence scoring, and coverage/cDER evaluation.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "diaconf/diaconf.hpp"

namespace {

std::vector<diaconf::Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<diaconf::Method> methods;
  for (const std::string& n : names) {
    const auto m = diaconf::method_from_string(n);
    if (!m) throw CLI::ValidationError("--methods", "unknown method '" + n + "'");
    methods.push_back(*m);
  }
  return methods;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diarization confidence scoring and coverage/cDER evaluation"};
  app.require_subcommand(1);

  // Shared scoring flags (evaluate / sweep / threshold).
  auto add_scoring_flags = [](CLI::App* cmd, diaconf::ScoringConfig& cfg,
                              bool& include_overlap) {
    cmd->add_option("--collar", cfg.collar,
                    "Collar (s) around reference boundaries excluded from scoring")
        ->capture_default_str();
    cmd->add_flag("--include-overlap", include_overlap,
                  "Score regions where reference speakers overlap (default: excluded)");
  };

  int exit_code = 0;

  // --- diarize ---
  diaconf::DiarizeOptions diarize_opt;
  int fixed_speakers = 0;
  CLI::App* diarize = app.add_subcommand(
      "diarize", "Spectral-cluster embedding tracks into speaker segments");
  diarize->add_option("--manifest", diarize_opt.manifest_path, "Corpus manifest JSON")
      ->required();
  diarize->add_option("--out", diarize_opt.out_dir, "Output directory")->required();
  diarize->add_option("--max-speakers", diarize_opt.max_speakers,
                      "Cap for eigen-gap speaker counting")
      ->capture_default_str();
  CLI::Option* fixed_opt = diarize->add_option(
      "--num-speakers", fixed_speakers, "Fix the speaker count instead of estimating");
  diarize->add_option("--jobs", diarize_opt.jobs, "Parallel conversations")
      ->capture_default_str();
  diarize->callback([&] {
    if (*fixed_opt) diarize_opt.num_speakers = fixed_speakers;
    exit_code = diaconf::run_diarize(diarize_opt, std::cerr);
  });

  // --- score ---
  diaconf::ScoreOptions score_opt;
  std::vector<std::string> method_names = {"cosine", "local", "silhouette"};
  CLI::App* score = app.add_subcommand(
      "score", "Attach per-segment confidence scores to a hypothesis");
  score->add_option("--manifest", score_opt.manifest_path, "Corpus manifest JSON")
      ->required();
  score->add_option("--hypothesis-dir", score_opt.hypothesis_dir,
                    "Directory of <id>.rttm hypotheses (e.g. diarize output); "
                    "default: manifest hypothesis paths");
  score->add_option("--methods", method_names,
                    "Methods: cosine,local,silhouette,spectral")
      ->delimiter(',')
      ->capture_default_str();
  score->add_option("--out", score_opt.out_path, "Confidence CSV path")->required();
  score->add_option("--jobs", score_opt.jobs, "Parallel conversations")
      ->capture_default_str();
  score->callback([&] {
    score_opt.methods = parse_methods(method_names);
    exit_code = diaconf::run_score(score_opt, std::cerr);
  });

  // --- evaluate ---
  diaconf::EvaluateOptions eval_opt;
  bool eval_include_overlap = false;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Coverage/cDER metrics at fixed coverage targets");
  evaluate->add_option("--manifest", eval_opt.manifest_path, "Corpus manifest JSON")
      ->required();
  evaluate->add_option("--scores", eval_opt.scores_path, "Confidence CSV")
      ->required();
  evaluate->add_option("--coverage", eval_opt.coverages,
                       "Coverage targets (1.0 baseline always added)")
      ->delimiter(',')
      ->capture_default_str();
  evaluate->add_flag("--pooled", eval_opt.pooled,
                     "Rank segments over the pooled corpus instead of per conversation");
  add_scoring_flags(evaluate, eval_opt.scoring, eval_include_overlap);
  evaluate->add_option("--out", eval_opt.out_path, "Metrics CSV path")->required();
  evaluate->callback([&] {
    eval_opt.scoring.exclude_overlap = !eval_include_overlap;
    exit_code = diaconf::run_evaluate(eval_opt, std::cerr);
  });

  // --- sweep ---
  diaconf::SweepCmdOptions sweep_opt;
  bool sweep_include_overlap = false;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "cDER-vs-coverage curve over a coverage grid");
  sweep->add_option("--manifest", sweep_opt.manifest_path, "Corpus manifest JSON")
      ->required();
  sweep->add_option("--scores", sweep_opt.scores_path, "Confidence CSV")->required();
  sweep->add_option("--grid", sweep_opt.grid,
                    "Coverage grid (default 0.30..1.00 step 0.05)")
      ->delimiter(',');
  sweep->add_flag("--pooled", sweep_opt.pooled,
                  "Rank segments over the pooled corpus instead of per conversation");
  add_scoring_flags(sweep, sweep_opt.scoring, sweep_include_overlap);
  sweep->add_option("--out", sweep_opt.out_path, "Curve CSV path")->required();
  sweep->callback([&] {
    sweep_opt.scoring.exclude_overlap = !sweep_include_overlap;
    exit_code = diaconf::run_sweep(sweep_opt, std::cerr);
  });

  // --- threshold ---
  diaconf::ThresholdCmdOptions thr_opt;
  bool thr_include_overlap = false;
  std::string thr_method = "silhouette";
  std::string thr_criterion = "ratio";
  CLI::App* threshold = app.add_subcommand(
      "threshold", "Pick a global score threshold on a validation split");
  threshold->add_option("--manifest", thr_opt.manifest_path,
                        "Validation manifest JSON")
      ->required();
  threshold->add_option("--scores", thr_opt.scores_path, "Validation confidence CSV")
      ->required();
  threshold->add_option("--method", thr_method, "Confidence method to threshold")
      ->capture_default_str();
  threshold
      ->add_option("--criterion", thr_criterion,
                   "ratio (min cDER/coverage) or cder_at_min_coverage")
      ->capture_default_str();
  threshold->add_option("--coverage-floor", thr_opt.coverage_floor,
                        "Coverage floor for cder_at_min_coverage")
      ->capture_default_str();
  add_scoring_flags(threshold, thr_opt.scoring, thr_include_overlap);
  threshold->add_option("--out", thr_opt.out_path, "Threshold JSON path")->required();
  threshold->add_option("--test-manifest", thr_opt.test_manifest_path,
                        "Optional held-out test manifest");
  threshold->add_option("--test-scores", thr_opt.test_scores_path,
                        "Confidence CSV for the test split");
  threshold->add_option("--test-out", thr_opt.test_out_path,
                        "Metrics CSV for the test split");
  threshold->callback([&] {
    const auto m = diaconf::method_from_string(thr_method);
    if (!m) throw CLI::ValidationError("--method", "unknown method '" + thr_method + "'");
    thr_opt.method = *m;
    if (thr_criterion == "ratio") {
      thr_opt.criterion = diaconf::ThresholdCriterion::Ratio;
    } else if (thr_criterion == "cder_at_min_coverage") {
      thr_opt.criterion = diaconf::ThresholdCriterion::CderAtMinCoverage;
    } else {
      throw CLI::ValidationError("--criterion",
                                 "unknown criterion '" + thr_criterion + "'");
    }
    thr_opt.scoring.exclude_overlap = !thr_include_overlap;
    exit_code = diaconf::run_threshold(thr_opt, std::cerr);
  });

  // --- histogram ---
  diaconf::HistogramCmdOptions hist_opt;
  CLI::App* hist = app.add_subcommand(
      "histogram", "Duration- and count-weighted confidence histograms");
  hist->add_option("--scores", hist_opt.scores_path, "Confidence CSV")->required();
  hist->add_option("--bins", hist_opt.bins, "Number of bins")->capture_default_str();
  hist->add_option("--out", hist_opt.out_path, "Histogram CSV path")->required();
  hist->callback([&] { exit_code = diaconf::run_histogram(hist_opt, std::cerr); });

  // --- synth ---
  diaconf::SynthCmdOptions synth_opt;
  std::string error_bias = "random";
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a deterministic synthetic corpus");
  synth->add_option("--out", synth_opt.out_dir, "Output directory")->required();
  synth->add_option("--seed", synth_opt.seed, "Base seed (conversation k uses seed+k)")
      ->capture_default_str();
  synth->add_option("--conversations", synth_opt.conversations,
                    "Number of conversations")
      ->capture_default_str();
  synth->add_option("--speakers", synth_opt.spec.num_speakers, "Speakers per conversation")
      ->capture_default_str();
  synth->add_option("--dim", synth_opt.spec.dim, "Embedding dimension")
      ->capture_default_str();
  synth->add_option("--length", synth_opt.spec.conversation_length,
                    "Conversation length (s)")
      ->capture_default_str();
  synth->add_option("--turn-min", synth_opt.spec.turn_min, "Min turn length (s)")
      ->capture_default_str();
  synth->add_option("--turn-max", synth_opt.spec.turn_max, "Max turn length (s)")
      ->capture_default_str();
  synth->add_option("--kappa", synth_opt.spec.concentration,
                    "Within-speaker concentration (larger = tighter)")
      ->capture_default_str();
  synth->add_option("--min-angle", synth_opt.spec.inter_speaker_min_angle,
                    "Minimum pairwise speaker angle (degrees)")
      ->capture_default_str();
  synth->add_option("--error-rate", synth_opt.spec.error_rate,
                    "Fraction of turns to mislabel in the hypothesis")
      ->capture_default_str();
  synth->add_option("--error-bias", error_bias, "random or distance_correlated")
      ->capture_default_str();
  synth->callback([&] {
    if (error_bias == "random") {
      synth_opt.spec.error_bias = diaconf::ErrorBias::Random;
    } else if (error_bias == "distance_correlated") {
      synth_opt.spec.error_bias = diaconf::ErrorBias::DistanceCorrelated;
    } else {
      throw CLI::ValidationError("--error-bias", "unknown bias '" + error_bias + "'");
    }
    exit_code = diaconf::run_synth(synth_opt, std::cerr);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : diaconf::kExitFatal;
  } catch (const diaconf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return diaconf::kExitFatal;
  }
  return exit_code;
}

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mqmeval/backends.hpp"
#include "mqmeval/corpus.hpp"
#include "mqmeval/jsonio.hpp"
#include "mqmeval/metaeval.hpp"
#include "mqmeval/prompting.hpp"
#include "mqmeval/scoring.hpp"
#include "mqmeval/types.hpp"

// Pipeline orchestration shared by the CLI and the test suites: each stage
// reads/writes the documented JSONL artifacts and every run is identified
// by a deterministic run id derived from its config snapshot.
namespace mqmeval::runner {

struct RunConfig {
  std::string units_path;
  prompting::Family prompt = prompting::Family::gemba;
  int shots = 0;
  bool explanations = true;
  bool da = false;
  std::string backend = "oracle";  // live | oracle | sim
  std::string model_id = "default-model";
  std::string endpoint;  // live only
  backends::BiasParams sim;
  std::uint64_t seed = 0;
  scoring::SeverityWeights weights;
  std::string src_lang = "English";
  std::string tgt_lang = "German";
  std::string demo_pool_path;  // gmicl only
  int concurrency = 8;
  double rate_limit = 0.0;  // requests/second, 0 = unlimited
  int max_output_tokens = 0;
  std::string cache_dir;  // live only; default <out_dir>/cache
  std::string out_dir;
};

// Deterministic part of the config (output/cache locations excluded).
jsonio::ordered_json config_snapshot(const RunConfig& cfg,
                                     const std::string& granularity_label);
std::string run_id_for(const jsonio::ordered_json& snapshot);

// Whether responses of this prompt family carry a quality_score field.
bool expects_da(prompting::Family family, bool da);

struct EvalResult {
  std::string run_id;
  jsonio::RunManifest manifest;
  std::vector<jsonio::ResponseRow> responses;
};

// Renders prompts for every unit (one per focus segment for fsp), executes
// them through the selected backend with bounded concurrency, and writes
// responses.jsonl + manifest.json into cfg.out_dir. A custom transport can
// be injected for the live backend; mock backends ignore it.
EvalResult run_eval(const RunConfig& cfg,
                    backends::Transport transport = nullptr);

struct ScoreResult {
  std::vector<scoring::UnitScore> scores;
  std::size_t parse_failed = 0;
  std::size_t dropped_annotations = 0;
};

// Parses responses and produces per-unit scores: one mqm_weighted row per
// unit (focus responses of a unit are folded with aggregate_fsp), plus one
// da row per unit when the run had DA enabled and a score is available.
ScoreResult score_responses(const std::vector<EvalUnit>& units,
                            const std::vector<jsonio::ResponseRow>& rows,
                            prompting::Family family, bool da,
                            const scoring::SeverityWeights& weights);

// File-level stage: reads <run_dir>/responses.jsonl and the units file
// named in its header, writes <run_dir>/scores.jsonl.
ScoreResult score_run(const std::string& run_dir,
                      const std::string& units_override = "");

struct RankResult {
  std::map<std::string, double> metric_scores;
  std::map<std::string, double> gold_scores;
  std::optional<double> pairwise_accuracy;
  std::string accuracy_note;  // set when accuracy is not computable
};

RankResult rank_scores(const std::vector<scoring::UnitScore>& scores,
                       const std::vector<EvalUnit>& units,
                       const scoring::SeverityWeights& weights,
                       scoring::ScoreMethod method,
                       bool gold_critical_as_major = false);

// Reads <run_dir>/scores.jsonl, computes system scores and pairwise
// accuracy against gold, writes <run_dir>/rank.json.
RankResult rank_run(const std::string& run_dir,
                    scoring::ScoreMethod method = scoring::ScoreMethod::mqm_weighted,
                    bool gold_critical_as_major = false,
                    const std::string& units_override = "");

struct SpanF1Result {
  metaeval::PRF micro;
  std::map<std::string, metaeval::PRF> per_system;
  std::size_t units_scored = 0;
};

SpanF1Result span_f1(const std::vector<EvalUnit>& units,
                     const std::vector<jsonio::ResponseRow>& rows,
                     prompting::Family family, bool da);

// Reads responses, localizes predicted spans and writes
// <run_dir>/spanf1.json with micro-averaged character P/R/F1.
SpanF1Result spanf1_run(const std::string& run_dir,
                        const std::string& units_override = "");

struct ReportOptions {
  std::vector<std::string> run_dirs;
  bool compare = false;  // required to mix run ids
  std::string units_override;
  std::string out_dir;  // where report.json / report.csv are written
};

struct Report {
  jsonio::ordered_json json;
  std::string csv;
};

// Builds the cross-run tables: pairwise accuracy, normalized span counts
// per document, response-length distributions with expected lengths from
// segment-level runs, and parse-failure counts.
Report report_runs(const ReportOptions& options);

// Convenience for the build stage: constructs units from a canonical
// segments file and writes units.jsonl with a deterministic run id.
struct BuildResult {
  std::string run_id;
  std::size_t n_units = 0;
  std::vector<std::string> skipped;
  corpus::StatsTable stats;
};

BuildResult build_units_file(const std::string& segments_path,
                             Granularity level, int group_size,
                             std::uint64_t seed, const std::string& joiner,
                             const std::string& out_path);

}  // namespace mqmeval::runner

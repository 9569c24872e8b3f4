#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mqmeval/backends.hpp"
#include "mqmeval/ftexport.hpp"
#include "mqmeval/prompting.hpp"
#include "mqmeval/scoring.hpp"
#include "mqmeval/types.hpp"

// Readers and writers for the pipeline's JSONL artifacts. Every artifact
// starts with a header record {"artifact": ..., "run_id": ...} naming the
// run that produced it; readers verify the artifact kind when asked.
namespace mqmeval::jsonio {

using ordered_json = nlohmann::ordered_json;

struct JsonlFile {
  std::optional<ordered_json> header;
  std::vector<ordered_json> records;
};

JsonlFile read_jsonl(const std::string& path,
                     const std::string& expected_artifact = "");

void write_jsonl(const std::string& path, const ordered_json& header,
                 const std::vector<ordered_json>& records);

ordered_json make_header(const std::string& artifact, const std::string& run_id);

// --- segments (canonical corpus) ---
ordered_json segment_to_json(const Segment& segment);
void write_segments(const std::string& path, const std::string& run_id,
                    const std::vector<Segment>& segments);

// --- units ---
ordered_json unit_to_json(const EvalUnit& unit);
EvalUnit unit_from_json(const ordered_json& record);
void write_units(const std::string& path, const std::string& run_id,
                 const ordered_json& config, const std::vector<EvalUnit>& units);
std::vector<EvalUnit> read_units(const std::string& path,
                                 ordered_json* header = nullptr);

// --- responses ---
struct ResponseRow {
  std::string unit_id;
  int focus_index = -1;  // -1: single-pass response
  backends::BackendResponse response;
};
void write_responses(const std::string& path, const std::string& run_id,
                     const ordered_json& config,
                     const std::vector<ResponseRow>& rows);
std::vector<ResponseRow> read_responses(const std::string& path,
                                        ordered_json* header = nullptr);

// --- scores ---
void write_scores(const std::string& path, const std::string& run_id,
                  const std::vector<scoring::UnitScore>& scores);
std::vector<scoring::UnitScore> read_scores(const std::string& path,
                                            ordered_json* header = nullptr);

// --- fine-tuning data and demo pools ---
void write_ft_examples(const std::string& path,
                       const std::vector<ftexport::FtExample>& examples);
void write_demo_pool(const std::string& path, const std::string& run_id,
                     const std::vector<prompting::Demonstration>& pool);
std::vector<prompting::Demonstration> read_demo_pool(const std::string& path);

// --- run manifest ---
struct RunManifest {
  std::string run_id;
  ordered_json config;  // deterministic snapshot of the effective config
  std::size_t units = 0;
  std::size_t requests = 0;
  std::size_t parse_failed = 0;
  std::size_t dropped_annotations = 0;
  std::size_t skipped_units = 0;
  long long total_spans = 0;
  // Volatile fields, excluded from determinism comparisons.
  long long wall_clock_ms = 0;
  double spans_per_second = 0.0;
};

ordered_json manifest_to_json(const RunManifest& manifest);
void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

// Serializes a manifest with the volatile section removed, for
// byte-comparing runs.
std::string manifest_stable_dump(const RunManifest& manifest);

// --- weights ---
ordered_json weights_to_json(const scoring::SeverityWeights& weights);
scoring::SeverityWeights weights_from_json(const ordered_json& j);

}  // namespace mqmeval::jsonio

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mqmeval/types.hpp"
#include "mqmeval/util.hpp"

namespace mqmeval::corpus {

enum class CorpusFormat { canonical_jsonl, wmt_tagged };

// Loads segment-level data with gold annotations.
//
// canonical_jsonl: one JSON record per line,
//   {doc_id, seg_index, src, systems: {system: {tgt, gold: [...]}}}
// with explicit character offsets in gold spans.
//
// wmt_tagged: tab-separated rows (system, doc, seg_id, source,
// target-with-<v>-markers, category, severity), one error per row; the
// inline <v>...</v> marker is stripped and converted to an offset span.
// Rows whose severity is "no-error" or "neutral" contribute the segment
// but no span.
//
// Both formats are validated against the Segment invariants: contiguous
// seg_index per doc, gold systems present in translations, offsets in
// range. Violations raise MqmError naming the line / doc / unit.
std::vector<Segment> import_corpus(const std::string& path, CorpusFormat format);

// Validates an already-assembled segment list (same checks as import).
void validate_segments(const std::vector<Segment>& segments);

struct GranularityBuild {
  std::vector<EvalUnit> units;
  // Human-readable notes for every (group, system) skipped because a system
  // was missing from some segment of the group.
  std::vector<std::string> skipped;
};

// Constructs evaluation units at the requested granularity.
//   seg:  one unit per (segment, system).
//   doc:  segments of a doc joined in seg_index order with `joiner`.
//   doc5: documents shuffled with `seed`, chunked into consecutive groups
//         of `group_size` (trailing short group dropped), then joined.
// Gold offsets are shifted by the cumulative prefix including joiners.
// Pure function of its arguments; same inputs give identical units.
GranularityBuild build_granularity(const std::vector<Segment>& segments,
                                   Granularity level, int group_size,
                                   std::uint64_t seed,
                                   const std::string& joiner = "\n");

struct GranularityStats {
  std::size_t count = 0;
  std::optional<double> mean_tokens;  // mean of tokens(src) + tokens(tgt)
};

using StatsTable = std::map<Granularity, GranularityStats>;

StatsTable corpus_stats(const std::vector<EvalUnit>& units,
                        const TokenCounter& counter);

// Extracts the focus segment `part_index` of a unit as a seg-granularity
// unit: src/tgt sliced at the recorded offsets, gold spans that fall inside
// the slice rebased to it. The derived unit_id matches the id the seg-level
// build would assign to the same (segment, system), so seeded backends make
// identical per-span decisions either way. A span sitting exactly on a part
// boundary is claimed by the earliest containing part.
EvalUnit focus_subunit(const EvalUnit& unit, std::size_t part_index);

// Unit id helpers (shared by build_granularity and focus_subunit).
std::string seg_unit_id(const std::string& doc_id, int seg_index,
                        const std::string& system_id);

}  // namespace mqmeval::corpus

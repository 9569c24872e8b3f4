#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mqmeval/parsing.hpp"
#include "mqmeval/types.hpp"

namespace mqmeval::metaeval {

// Fraction of unordered system pairs ranked the same way by metric and
// gold. Pairs tied in gold are excluded from the denominator; a metric tie
// on a non-tied gold pair counts as incorrect. Both maps must cover the
// same systems; all-tied gold is an error.
double pairwise_accuracy(const std::map<std::string, double>& metric,
                         const std::map<std::string, double>& gold);

// A predicted span assigned to (or refused) a character location.
struct LocatedSpan {
  bool matched = false;
  std::size_t start = 0;  // valid only when matched
  std::size_t end = 0;
  Severity severity = Severity::minor;
  std::size_t length = 0;  // span length either way, for precision accounting
  std::string span_text;
};

// Greedy location assignment, processing predictions in list order: every
// occurrence of the span text in tgt is considered, occurrences overlapping
// previously assigned characters are discarded, and the survivor with the
// highest gold-character overlap wins (leftmost on ties). Spans with no
// free occurrence stay unmatched, which reduces precision but not recall.
// Zero-width (omission) predictions are skipped entirely.
std::vector<LocatedSpan> localize_spans(
    const std::vector<parsing::ErrorAnnotation>& preds, std::string_view tgt,
    const std::vector<GoldSpan>& gold);

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double credit_p = 0.0;
  double credit_r = 0.0;
  std::size_t pred_chars = 0;
  std::size_t gold_chars = 0;
};

// Character-level precision/recall with 0.5 partial credit for a severity
// mismatch. Predicted characters at matched locations earn 1.0 when a gold
// span of equal severity covers them, 0.5 when covered at a different
// severity; unmatched spans add their length to the precision denominator
// only. Gold characters are credited symmetrically against matched
// predictions. Zero-width gold omissions contribute no characters.
PRF char_prf(const std::vector<LocatedSpan>& located,
             const std::vector<GoldSpan>& gold, std::size_t tgt_len);

// Accumulates char_prf credits over many units into one micro-averaged PRF.
class PrfAccumulator {
 public:
  void add(const PRF& unit);
  PRF total() const;

 private:
  double credit_p_ = 0.0, credit_r_ = 0.0;
  std::size_t pred_chars_ = 0, gold_chars_ = 0;
};

// One observation for the span-count report: the unit's error count plus the
// document-group it belongs to, so counts normalize to a per-original-
// document basis at every granularity.
struct SpanCountRow {
  std::string method;
  Granularity granularity = Granularity::seg;
  std::string system_id;
  std::string doc_key;  // EvalUnit::group_key
  int n_errors = 0;
  int n_source_docs = 1;
};

struct SpanCountCell {
  std::string method;
  Granularity granularity = Granularity::seg;
  double mean_spans_per_doc = 0.0;
  std::size_t n_groups = 0;
};

// Mean error spans per original document per (method, granularity): rows
// are grouped by (system, doc_key), group counts are divided by the group's
// n_source_docs, and the cell value is the mean over groups.
std::vector<SpanCountCell> span_count_report(const std::vector<SpanCountRow>& rows);

struct LengthStats {
  std::size_t count = 0;
  double mean = 0.0;
  std::int64_t p50 = 0;
  std::int64_t p99 = 0;
};

struct LengthCell {
  Granularity granularity = Granularity::seg;
  LengthStats actual;
  std::optional<LengthStats> expected;   // sums of per-segment responses
  std::optional<double> deficit_ratio;   // mean(actual) / mean(expected)
};

// Distribution of response token lengths per granularity, next to the
// expected length obtained by summing each unit's segment-level responses.
// Units whose segment responses are not all available contribute to the
// actual series only.
std::vector<LengthCell> length_report(
    const std::vector<EvalUnit>& units,
    const std::map<std::string, std::int64_t>& unit_response_tokens,
    const std::map<std::tuple<std::string, int, std::string>, std::int64_t>&
        seg_response_tokens);

}  // namespace mqmeval::metaeval

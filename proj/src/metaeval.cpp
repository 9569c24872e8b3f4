#include "mqmeval/metaeval.hpp"

#include <algorithm>
#include <cmath>

namespace mqmeval::metaeval {

double pairwise_accuracy(const std::map<std::string, double>& metric,
                         const std::map<std::string, double>& gold) {
  if (gold.size() < 2) throw MqmError("pairwise accuracy needs >= 2 systems");
  if (metric.size() != gold.size())
    throw MqmError("metric and gold cover different system sets");
  for (const auto& [system, score] : gold)
    if (!metric.count(system))
      throw MqmError("metric is missing system " + system);

  std::vector<std::pair<std::string, double>> systems(gold.begin(), gold.end());
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    for (std::size_t j = i + 1; j < systems.size(); ++j) {
      double gold_diff = systems[i].second - systems[j].second;
      if (gold_diff == 0.0) continue;  // gold ties are excluded
      ++total;
      double metric_diff =
          metric.at(systems[i].first) - metric.at(systems[j].first);
      // A metric tie on a non-tied gold pair counts as incorrect.
      if (metric_diff != 0.0 && (metric_diff > 0) == (gold_diff > 0)) ++correct;
    }
  }
  if (total == 0) throw MqmError("no rankable pairs: all gold scores tied");
  return static_cast<double>(correct) / static_cast<double>(total);
}

namespace {

std::vector<std::size_t> find_occurrences(std::string_view tgt,
                                          std::string_view needle) {
  std::vector<std::size_t> out;
  if (needle.empty()) return out;
  std::size_t pos = tgt.find(needle);
  while (pos != std::string_view::npos) {
    out.push_back(pos);
    pos = tgt.find(needle, pos + 1);  // overlapping occurrences included
  }
  return out;
}

}  // namespace

std::vector<LocatedSpan> localize_spans(
    const std::vector<parsing::ErrorAnnotation>& preds, std::string_view tgt,
    const std::vector<GoldSpan>& gold) {
  std::vector<bool> gold_char(tgt.size(), false);
  for (const GoldSpan& g : gold)
    for (std::size_t c = g.start; c < g.end && c < tgt.size(); ++c)
      gold_char[c] = true;

  std::vector<bool> occupied(tgt.size(), false);
  std::vector<LocatedSpan> out;
  for (const auto& pred : preds) {
    if (pred.span_text.empty()) continue;  // omission-style, no location
    LocatedSpan span;
    span.severity = pred.severity;
    span.span_text = pred.span_text;
    span.length = pred.span_text.size();

    std::size_t best_start = 0;
    std::size_t best_overlap = 0;
    bool found = false;
    for (std::size_t start : find_occurrences(tgt, pred.span_text)) {
      std::size_t end = start + pred.span_text.size();
      bool free = true;
      std::size_t overlap = 0;
      for (std::size_t c = start; c < end; ++c) {
        if (occupied[c]) {
          free = false;
          break;
        }
        if (gold_char[c]) ++overlap;
      }
      if (!free) continue;
      if (!found || overlap > best_overlap) {  // leftmost wins ties
        found = true;
        best_start = start;
        best_overlap = overlap;
      }
    }
    if (found) {
      span.matched = true;
      span.start = best_start;
      span.end = best_start + pred.span_text.size();
      for (std::size_t c = span.start; c < span.end; ++c) occupied[c] = true;
    }
    out.push_back(std::move(span));
  }
  return out;
}

PRF char_prf(const std::vector<LocatedSpan>& located,
             const std::vector<GoldSpan>& gold, std::size_t tgt_len) {
  PRF out;

  // Precision: credit per predicted character at a matched location.
  for (const LocatedSpan& span : located) {
    out.pred_chars += span.length;
    if (!span.matched) continue;
    for (std::size_t c = span.start; c < span.end && c < tgt_len; ++c) {
      double credit = 0.0;
      for (const GoldSpan& g : gold) {
        if (c < g.start || c >= g.end) continue;
        credit = std::max(credit, g.severity == span.severity ? 1.0 : 0.5);
        if (credit == 1.0) break;
      }
      out.credit_p += credit;
    }
  }

  // Recall: credit per gold character, best covering prediction wins.
  for (const GoldSpan& g : gold) {
    out.gold_chars += g.end - g.start;  // zero for omissions
    for (std::size_t c = g.start; c < g.end && c < tgt_len; ++c) {
      double credit = 0.0;
      for (const LocatedSpan& span : located) {
        if (!span.matched || c < span.start || c >= span.end) continue;
        credit = std::max(credit, span.severity == g.severity ? 1.0 : 0.5);
        if (credit == 1.0) break;
      }
      out.credit_r += credit;
    }
  }

  out.precision = out.pred_chars > 0
                      ? out.credit_p / static_cast<double>(out.pred_chars)
                      : 0.0;
  out.recall = out.gold_chars > 0
                   ? out.credit_r / static_cast<double>(out.gold_chars)
                   : 0.0;
  out.f1 = out.precision + out.recall > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

void PrfAccumulator::add(const PRF& unit) {
  credit_p_ += unit.credit_p;
  credit_r_ += unit.credit_r;
  pred_chars_ += unit.pred_chars;
  gold_chars_ += unit.gold_chars;
}

PRF PrfAccumulator::total() const {
  PRF out;
  out.credit_p = credit_p_;
  out.credit_r = credit_r_;
  out.pred_chars = pred_chars_;
  out.gold_chars = gold_chars_;
  out.precision =
      pred_chars_ > 0 ? credit_p_ / static_cast<double>(pred_chars_) : 0.0;
  out.recall =
      gold_chars_ > 0 ? credit_r_ / static_cast<double>(gold_chars_) : 0.0;
  out.f1 = out.precision + out.recall > 0
               ? 2 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

std::vector<SpanCountCell> span_count_report(const std::vector<SpanCountRow>& rows) {
  struct GroupAgg {
    long long n_errors = 0;
    int n_source_docs = 1;
  };
  // (method, granularity) -> (system, doc_key) -> aggregate
  std::map<std::pair<std::string, Granularity>,
           std::map<std::pair<std::string, std::string>, GroupAgg>>
      cells;
  for (const SpanCountRow& row : rows) {
    GroupAgg& agg = cells[{row.method, row.granularity}]
                         [{row.system_id, row.doc_key}];
    agg.n_errors += row.n_errors;
    agg.n_source_docs = std::max(agg.n_source_docs, row.n_source_docs);
  }
  std::vector<SpanCountCell> out;
  for (const auto& [key, groups] : cells) {
    SpanCountCell cell;
    cell.method = key.first;
    cell.granularity = key.second;
    cell.n_groups = groups.size();
    double sum = 0.0;
    for (const auto& [group, agg] : groups)
      sum += static_cast<double>(agg.n_errors) / agg.n_source_docs;
    cell.mean_spans_per_doc = sum / static_cast<double>(groups.size());
    out.push_back(std::move(cell));
  }
  return out;
}

namespace {

LengthStats length_stats(const std::vector<std::int64_t>& lengths) {
  LengthStats out;
  out.count = lengths.size();
  if (lengths.empty()) return out;
  double sum = 0.0;
  for (std::int64_t l : lengths) sum += static_cast<double>(l);
  out.mean = sum / static_cast<double>(lengths.size());
  out.p50 = percentile_nearest_rank(lengths, 50);
  out.p99 = percentile_nearest_rank(lengths, 99);
  return out;
}

}  // namespace

std::vector<LengthCell> length_report(
    const std::vector<EvalUnit>& units,
    const std::map<std::string, std::int64_t>& unit_response_tokens,
    const std::map<std::tuple<std::string, int, std::string>, std::int64_t>&
        seg_response_tokens) {
  std::map<Granularity, std::vector<std::int64_t>> actual;
  std::map<Granularity, std::vector<std::int64_t>> expected;
  for (const EvalUnit& unit : units) {
    auto it = unit_response_tokens.find(unit.unit_id);
    if (it == unit_response_tokens.end()) continue;
    actual[unit.granularity].push_back(it->second);

    std::int64_t sum = 0;
    bool complete = true;
    for (const UnitPart& part : unit.parts) {
      auto seg = seg_response_tokens.find(
          {part.doc_id, part.seg_index, unit.system_id});
      if (seg == seg_response_tokens.end()) {
        complete = false;
        break;
      }
      sum += seg->second;
    }
    if (complete && !unit.parts.empty())
      expected[unit.granularity].push_back(sum);
  }

  std::vector<LengthCell> out;
  for (const auto& [granularity, lengths] : actual) {
    LengthCell cell;
    cell.granularity = granularity;
    cell.actual = length_stats(lengths);
    auto exp = expected.find(granularity);
    if (exp != expected.end() && !exp->second.empty()) {
      cell.expected = length_stats(exp->second);
      if (cell.expected->mean > 0)
        cell.deficit_ratio = cell.actual.mean / cell.expected->mean;
    }
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace mqmeval::metaeval

#include "mqmeval/scoring.hpp"

#include <algorithm>

namespace mqmeval::scoring {

void validate_weights(const SeverityWeights& w) {
  if (!(w.minor > 0 && w.minor <= w.major && w.major <= w.critical))
    throw MqmError("severity weights must satisfy 0 < minor <= major <= critical");
  if (w.per_unit_cap && !(*w.per_unit_cap > 0))
    throw MqmError("per_unit_cap must be positive");
}

double severity_weight(const SeverityWeights& w, Severity s) {
  switch (s) {
    case Severity::minor: return w.minor;
    case Severity::major: return w.major;
    case Severity::critical: return w.critical;
  }
  return w.minor;
}

const char* to_string(ScoreMethod m) {
  return m == ScoreMethod::da ? "da" : "mqm_weighted";
}

std::optional<ScoreMethod> score_method_from_string(std::string_view s) {
  if (s == "mqm_weighted") return ScoreMethod::mqm_weighted;
  if (s == "da") return ScoreMethod::da;
  return std::nullopt;
}

MqmScore unit_mqm_score(const std::vector<parsing::ErrorAnnotation>& errors,
                        const SeverityWeights& w) {
  validate_weights(w);
  double penalty = 0.0;
  for (const auto& e : errors) penalty += severity_weight(w, e.severity);
  if (w.per_unit_cap) penalty = std::min(penalty, *w.per_unit_cap);
  MqmScore out;
  out.score = penalty == 0.0 ? 0.0 : -penalty;  // avoid -0.0 in artifacts
  out.n_errors = static_cast<int>(errors.size());
  return out;
}

FspAggregate aggregate_fsp(const EvalUnit& doc_unit,
                           const std::vector<parsing::ParsedResponse>& per_focus,
                           const SeverityWeights& w) {
  if (per_focus.size() != doc_unit.parts.size())
    throw MqmError("unit " + doc_unit.unit_id + " has " +
                   std::to_string(doc_unit.parts.size()) + " segments but " +
                   std::to_string(per_focus.size()) + " focus responses");
  FspAggregate out;
  double da_sum = 0.0;
  int da_count = 0;
  bool any_failed = false, all_failed = true, any_recovered = false;
  for (const auto& resp : per_focus) {
    if (resp.parse_status == parsing::ParseStatus::failed) {
      any_failed = true;
      continue;
    }
    all_failed = false;
    if (resp.parse_status == parsing::ParseStatus::recovered) any_recovered = true;
    out.errors.insert(out.errors.end(), resp.errors.begin(), resp.errors.end());
    if (resp.quality_score) {
      da_sum += *resp.quality_score;
      ++da_count;
    }
  }
  out.mqm = unit_mqm_score(out.errors, w);
  if (da_count > 0) out.da_score = da_sum / da_count;
  if (all_failed)
    out.parse_status = parsing::ParseStatus::failed;
  else if (any_failed || any_recovered)
    out.parse_status = parsing::ParseStatus::recovered;
  else
    out.parse_status = parsing::ParseStatus::clean;
  return out;
}

SystemScore system_score(const std::vector<UnitScore>& unit_scores,
                         const std::string& system_id) {
  if (unit_scores.empty()) throw MqmError("no unit scores given");
  ScoreMethod method = unit_scores.front().method;
  Granularity granularity = unit_scores.front().granularity;
  for (const UnitScore& u : unit_scores) {
    if (u.method != method)
      throw MqmError("mixed score methods in system_score input");
    if (u.granularity != granularity)
      throw MqmError("mixed granularities in system_score input");
  }
  SystemScore out;
  out.system_id = system_id;
  out.method = method;
  out.granularity = granularity;
  double sum = 0.0;
  for (const UnitScore& u : unit_scores) {
    if (u.system_id != system_id) continue;
    sum += u.score;
    ++out.n_units;
  }
  if (out.n_units == 0)
    throw MqmError("no units for system " + system_id);
  out.score = sum / out.n_units;
  return out;
}

SystemScore da_system_score(
    const std::vector<std::pair<std::string, parsing::ParsedResponse>>& responses,
    const std::string& system_id) {
  SystemScore out;
  out.system_id = system_id;
  out.method = ScoreMethod::da;
  double sum = 0.0;
  for (const auto& [unit_id, resp] : responses) {
    if (resp.parse_status == parsing::ParseStatus::failed || !resp.quality_score) {
      ++out.n_excluded;
      continue;
    }
    sum += *resp.quality_score;
    ++out.n_units;
  }
  if (out.n_units == 0)
    throw MqmError("no scoreable units for system " + system_id);
  out.score = sum / out.n_units;
  return out;
}

std::vector<parsing::ErrorAnnotation> gold_as_annotations(
    const EvalUnit& unit, bool map_critical_to_major) {
  std::vector<parsing::ErrorAnnotation> out;
  out.reserve(unit.gold.size());
  for (const GoldSpan& span : unit.gold) {
    if (span.end > unit.tgt.size() || span.start > span.end)
      throw MqmError("gold span out of range in unit " + unit.unit_id);
    parsing::ErrorAnnotation a;
    a.span_text = unit.tgt.substr(span.start, span.end - span.start);
    a.severity = map_critical_to_major && span.severity == Severity::critical
                     ? Severity::major
                     : span.severity;
    // Gold categories often come as "category/type" (e.g.
    // "accuracy/mistranslation"); split, map the left side onto the closed
    // category set and keep the right side as the free-form type.
    std::string cat = span.category;
    std::string type = span.category;
    auto slash = cat.find('/');
    if (slash != std::string::npos) {
      type = cat.substr(slash + 1);
      cat = cat.substr(0, slash);
    }
    auto mapped = parsing::category_from_string(to_lower(trim(cat)));
    if (!mapped && span.is_omission) mapped = parsing::Category::accuracy;
    a.category = mapped.value_or(parsing::Category::other);
    if (type.empty()) type = span.is_omission ? "omission" : "unspecified";
    a.error_type = type;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace mqmeval::scoring

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mqmeval/parsing.hpp"
#include "mqmeval/types.hpp"

namespace mqmeval::scoring {

// Penalty weights per severity. Higher scores are better; weighted-MQM unit
// scores are -min(total penalty, cap).
struct SeverityWeights {
  double minor = 1.0;
  double major = 5.0;
  double critical = 10.0;
  std::optional<double> per_unit_cap = 25.0;
};

void validate_weights(const SeverityWeights& w);
double severity_weight(const SeverityWeights& w, Severity s);

enum class ScoreMethod { mqm_weighted, da };

const char* to_string(ScoreMethod m);
std::optional<ScoreMethod> score_method_from_string(std::string_view s);

struct UnitScore {
  std::string unit_id;
  std::string system_id;
  Granularity granularity = Granularity::seg;
  double score = 0.0;
  int n_errors = 0;
  ScoreMethod method = ScoreMethod::mqm_weighted;
  parsing::ParseStatus parse_status = parsing::ParseStatus::clean;
};

struct MqmScore {
  double score = 0.0;  // <= 0
  int n_errors = 0;
};

MqmScore unit_mqm_score(const std::vector<parsing::ErrorAnnotation>& errors,
                        const SeverityWeights& w);

// Folds per-focus responses of a document back into one document result:
// error lists are concatenated in focus order (no deduplication), the MQM
// score is computed over the concatenation, and the DA score is the mean of
// per-focus quality scores over foci that did not fail to parse.
struct FspAggregate {
  std::vector<parsing::ErrorAnnotation> errors;
  MqmScore mqm;
  std::optional<double> da_score;
  parsing::ParseStatus parse_status = parsing::ParseStatus::clean;
};

FspAggregate aggregate_fsp(const EvalUnit& doc_unit,
                           const std::vector<parsing::ParsedResponse>& per_focus,
                           const SeverityWeights& w);

struct SystemScore {
  std::string system_id;
  double score = 0.0;
  int n_units = 0;
  int n_excluded = 0;  // DA units without a usable quality_score
  ScoreMethod method = ScoreMethod::mqm_weighted;
  Granularity granularity = Granularity::seg;
};

// Mean of unit scores over units of the given system. All unit scores in
// the input must share method and granularity. Failed-parse units carry
// score 0 with zero errors and are included in the mean.
SystemScore system_score(const std::vector<UnitScore>& unit_scores,
                         const std::string& system_id);

// Direct-assessment system score: mean of per-unit quality scores. Units
// without a usable score (failed parse, or clean parse missing the field)
// are excluded and counted; no scoreable unit at all is an error.
SystemScore da_system_score(
    const std::vector<std::pair<std::string, parsing::ParsedResponse>>& responses,
    const std::string& system_id);

// Gold spans viewed as annotations so metric and human scores share one
// scoring path. When map_critical_to_major is set (for gold schemes without
// a critical level) critical gold spans are weighted as major.
std::vector<parsing::ErrorAnnotation> gold_as_annotations(
    const EvalUnit& unit, bool map_critical_to_major = false);

}  // namespace mqmeval::scoring

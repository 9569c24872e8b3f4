#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mqmeval/types.hpp"

namespace mqmeval::parsing {

enum class Category { accuracy, fluency, style, terminology, other };
enum class ParseStatus { clean, recovered, failed };

const char* to_string(Category c);
const char* to_string(ParseStatus s);
std::optional<Category> category_from_string(std::string_view s);
std::optional<ParseStatus> parse_status_from_string(std::string_view s);

// One predicted error after normalization. span_text is the response's own
// text for the span (empty for omission-style annotations).
struct ErrorAnnotation {
  std::string span_text;
  std::optional<std::string> explanation;
  Category category = Category::other;
  std::string error_type;
  Severity severity = Severity::minor;

  bool operator==(const ErrorAnnotation&) const = default;
};

// Annotation as it appears in the response, before enum mapping.
struct RawAnnotation {
  std::string span_text;
  std::optional<std::string> explanation;
  std::string category;
  std::string error_type;
  std::string severity;
};

struct ParsedResponse {
  std::vector<ErrorAnnotation> errors;
  std::optional<int> quality_score;  // only when the prompt requested DA
  ParseStatus parse_status = ParseStatus::failed;
  std::size_t raw_len_chars = 0;
  int dropped_annotations = 0;  // unmappable severity/category
  bool score_clamped = false;   // quality_score was outside [0, 100]
};

// Parses a model response against the MQM JSON schema. Never throws:
// arbitrary text yields parse_status=failed. A strict whole-text JSON parse
// is tried first; on failure one recovery pass extracts the first balanced
// top-level JSON object (code fences and surrounding prose are skipped) and
// re-parses, yielding parse_status=recovered on success.
ParsedResponse parse_mqm_response(std::string_view text, bool expects_da);

struct NormalizeResult {
  std::vector<ErrorAnnotation> annotations;
  int dropped = 0;
};

// Trims span_text, case-folds severity/category and maps them onto the
// closed enums. Annotations whose severity or category cannot be mapped are
// dropped and counted. Idempotent.
NormalizeResult normalize(const std::vector<RawAnnotation>& raw);

RawAnnotation to_raw(const ErrorAnnotation& a);

// Serializes back to the response JSON shape (pretty, 2-space indent).
// A clean-parsing round trip through parse_mqm_response reproduces the
// annotations and quality_score exactly.
std::string serialize_response(const std::vector<ErrorAnnotation>& errors,
                               std::optional<int> quality_score = std::nullopt);

// Extracts the first balanced top-level JSON object from free text.
// Exposed for tests.
std::optional<std::string> extract_json_object(std::string_view text);

}  // namespace mqmeval::parsing

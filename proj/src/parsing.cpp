#include "mqmeval/parsing.hpp"

#include <cmath>

#include <json.hpp>

namespace mqmeval::parsing {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<RawAnnotation> collect_raw(const json& doc) {
  std::vector<RawAnnotation> raw;
  if (!doc.is_object() || !doc.contains("errors") || !doc["errors"].is_array())
    return raw;
  for (const json& e : doc["errors"]) {
    if (!e.is_object()) continue;
    RawAnnotation a;
    if (e.contains("error_span") && e["error_span"].is_string())
      a.span_text = e["error_span"].get<std::string>();
    if (e.contains("explanation") && e["explanation"].is_string())
      a.explanation = e["explanation"].get<std::string>();
    if (e.contains("error_category") && e["error_category"].is_string())
      a.category = e["error_category"].get<std::string>();
    if (e.contains("error_type") && e["error_type"].is_string())
      a.error_type = e["error_type"].get<std::string>();
    if (e.contains("severity") && e["severity"].is_string())
      a.severity = e["severity"].get<std::string>();
    raw.push_back(std::move(a));
  }
  return raw;
}

std::optional<int> collect_score(const json& doc, bool* clamped) {
  if (!doc.is_object() || !doc.contains("quality_score")) return std::nullopt;
  const json& q = doc["quality_score"];
  double v = 0;
  if (q.is_number()) {
    v = q.get<double>();
  } else if (q.is_string()) {
    try {
      v = std::stod(q.get<std::string>());
    } catch (const std::exception&) {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  int score = static_cast<int>(std::lround(v));
  if (score < 0) {
    score = 0;
    *clamped = true;
  } else if (score > 100) {
    score = 100;
    *clamped = true;
  }
  return score;
}

}  // namespace

const char* to_string(Category c) {
  switch (c) {
    case Category::accuracy: return "accuracy";
    case Category::fluency: return "fluency";
    case Category::style: return "style";
    case Category::terminology: return "terminology";
    case Category::other: return "other";
  }
  return "other";
}

const char* to_string(ParseStatus s) {
  switch (s) {
    case ParseStatus::clean: return "clean";
    case ParseStatus::recovered: return "recovered";
    case ParseStatus::failed: return "failed";
  }
  return "failed";
}

std::optional<Category> category_from_string(std::string_view s) {
  if (s == "accuracy") return Category::accuracy;
  if (s == "fluency") return Category::fluency;
  if (s == "style") return Category::style;
  if (s == "terminology") return Category::terminology;
  if (s == "other") return Category::other;
  return std::nullopt;
}

std::optional<ParseStatus> parse_status_from_string(std::string_view s) {
  if (s == "clean") return ParseStatus::clean;
  if (s == "recovered") return ParseStatus::recovered;
  if (s == "failed") return ParseStatus::failed;
  return std::nullopt;
}

std::optional<std::string> extract_json_object(std::string_view text) {
  std::size_t start = text.find('{');
  while (start != std::string_view::npos) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0)
          return std::string(text.substr(start, i - start + 1));
      }
    }
    // Unbalanced from this brace; try the next one.
    start = text.find('{', start + 1);
  }
  return std::nullopt;
}

NormalizeResult normalize(const std::vector<RawAnnotation>& raw) {
  NormalizeResult out;
  for (const RawAnnotation& r : raw) {
    auto severity = severity_from_string(to_lower(trim(r.severity)));
    auto category = category_from_string(to_lower(trim(r.category)));
    if (!severity || !category) {
      ++out.dropped;
      continue;
    }
    ErrorAnnotation a;
    a.span_text = trim(r.span_text);
    a.explanation = r.explanation;
    a.category = *category;
    a.error_type = r.error_type;
    a.severity = *severity;
    out.annotations.push_back(std::move(a));
  }
  return out;
}

RawAnnotation to_raw(const ErrorAnnotation& a) {
  RawAnnotation r;
  r.span_text = a.span_text;
  r.explanation = a.explanation;
  r.category = to_string(a.category);
  r.error_type = a.error_type;
  r.severity = to_string(a.severity);
  return r;
}

ParsedResponse parse_mqm_response(std::string_view text, bool expects_da) {
  ParsedResponse out;
  out.raw_len_chars = text.size();

  json doc;
  bool strict_ok = false;
  try {
    doc = json::parse(text);
    strict_ok = doc.is_object();
  } catch (const json::exception&) {
    strict_ok = false;
  }

  bool recovered = false;
  if (!strict_ok) {
    auto extracted = extract_json_object(text);
    if (!extracted) return out;  // failed
    try {
      doc = json::parse(*extracted);
    } catch (const json::exception&) {
      return out;  // failed
    }
    if (!doc.is_object()) return out;
    recovered = true;
  }

  NormalizeResult norm = normalize(collect_raw(doc));
  out.errors = std::move(norm.annotations);
  out.dropped_annotations = norm.dropped;
  if (expects_da) out.quality_score = collect_score(doc, &out.score_clamped);
  out.parse_status = recovered ? ParseStatus::recovered : ParseStatus::clean;
  return out;
}

std::string serialize_response(const std::vector<ErrorAnnotation>& errors,
                               std::optional<int> quality_score) {
  ordered_json doc;
  ordered_json arr = ordered_json::array();
  for (const ErrorAnnotation& a : errors) {
    ordered_json e;
    e["error_span"] = a.span_text;
    if (a.explanation) e["explanation"] = *a.explanation;
    e["error_category"] = to_string(a.category);
    e["error_type"] = a.error_type;
    e["severity"] = to_string(a.severity);
    arr.push_back(std::move(e));
  }
  doc["errors"] = std::move(arr);
  if (quality_score) doc["quality_score"] = *quality_score;
  return doc.dump(2);
}

}  // namespace mqmeval::parsing

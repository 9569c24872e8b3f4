#include <doctest.h>

#include "mqmeval/parsing.hpp"
#include "mqmeval/util.hpp"

using namespace mqmeval;
using namespace mqmeval::parsing;

TEST_CASE("clean parse of a schema-shaped response") {
  const char* text =
      R"({"errors":[{"error_span":"involvement","explanation":"The word 'involvement' is mistranslated.","error_category":"accuracy","error_type":"mistranslation","severity":"major"}]})";
  auto parsed = parse_mqm_response(text, false);
  CHECK(parsed.parse_status == ParseStatus::clean);
  REQUIRE(parsed.errors.size() == 1);
  CHECK(parsed.errors[0].span_text == "involvement");
  CHECK(parsed.errors[0].category == Category::accuracy);
  CHECK(parsed.errors[0].error_type == "mistranslation");
  CHECK(parsed.errors[0].severity == Severity::major);
  CHECK(parsed.errors[0].explanation.has_value());
  CHECK(parsed.dropped_annotations == 0);
}

TEST_CASE("recovery extracts the object from fences and prose") {
  std::string text =
      "Here is my assessment:\n```json\n"
      R"({"errors":[{"error_span":"cat","error_category":"fluency","error_type":"grammar","severity":"minor"}]})"
      "\n```\nI hope that helps!";
  auto parsed = parse_mqm_response(text, false);
  CHECK(parsed.parse_status == ParseStatus::recovered);
  REQUIRE(parsed.errors.size() == 1);
  CHECK(parsed.errors[0].span_text == "cat");
}

TEST_CASE("unparseable text fails without raising") {
  auto parsed = parse_mqm_response("not json at all", false);
  CHECK(parsed.parse_status == ParseStatus::failed);
  CHECK(parsed.errors.empty());
  CHECK_FALSE(parsed.quality_score.has_value());
  CHECK(parsed.raw_len_chars == 15);
}

TEST_CASE("missing error_span is kept as an omission-style annotation") {
  const char* text =
      R"({"errors":[{"explanation":"omitted phrase","error_category":"accuracy","error_type":"omission","severity":"major"}]})";
  auto parsed = parse_mqm_response(text, false);
  REQUIRE(parsed.errors.size() == 1);
  CHECK(parsed.errors[0].span_text.empty());
}

TEST_CASE("normalize folds case, trims and drops unmappables") {
  std::vector<RawAnnotation> raw(3);
  raw[0] = {" cat ", std::nullopt, "Accuracy", "mistranslation", "Major"};
  raw[1] = {"dog", std::nullopt, "fluency", "grammar", "catastrophic"};
  raw[2] = {"bird", std::nullopt, "made-up-category", "x", "minor"};
  auto result = normalize(raw);
  REQUIRE(result.annotations.size() == 1);
  CHECK(result.dropped == 2);
  CHECK(result.annotations[0].span_text == "cat");
  CHECK(result.annotations[0].severity == Severity::major);
  CHECK(result.annotations[0].category == Category::accuracy);
}

TEST_CASE("normalize is idempotent") {
  std::vector<RawAnnotation> raw(2);
  raw[0] = {"  spaced  ", "why", "STYLE", "awkward", "CRITICAL"};
  raw[1] = {"plain", std::nullopt, "other", "t", "minor"};
  auto once = normalize(raw);
  std::vector<RawAnnotation> again;
  for (const auto& a : once.annotations) again.push_back(to_raw(a));
  auto twice = normalize(again);
  CHECK(twice.dropped == 0);
  CHECK(twice.annotations == once.annotations);
}

TEST_CASE("parse_mqm_response is total over arbitrary input") {
  SplitMix64 rng(99);
  static const char charset[] = "{}[]\"\\:,abc 123\nxyz";
  for (int i = 0; i < 500; ++i) {
    std::string junk;
    std::size_t len = rng.bounded(200);
    for (std::size_t c = 0; c < len; ++c)
      junk += charset[rng.bounded(sizeof(charset) - 1)];
    auto parsed = parse_mqm_response(junk, true);
    bool valid_status = parsed.parse_status == ParseStatus::clean ||
                        parsed.parse_status == ParseStatus::recovered ||
                        parsed.parse_status == ParseStatus::failed;
    CHECK(valid_status);
    if (parsed.parse_status == ParseStatus::failed) {
      CHECK(parsed.errors.empty());
      CHECK_FALSE(parsed.quality_score.has_value());
    }
  }
}

TEST_CASE("serialize/parse round trip preserves a clean response") {
  std::vector<ErrorAnnotation> errors(2);
  errors[0].span_text = "cat";
  errors[0].explanation = "a \"quoted\" explanation";
  errors[0].category = Category::terminology;
  errors[0].error_type = "inappropriate for context";
  errors[0].severity = Severity::minor;
  errors[1].span_text = "";
  errors[1].category = Category::accuracy;
  errors[1].error_type = "omission";
  errors[1].severity = Severity::critical;

  std::string text = serialize_response(errors, 66);
  auto parsed = parse_mqm_response(text, true);
  CHECK(parsed.parse_status == ParseStatus::clean);
  CHECK(parsed.errors == errors);
  CHECK(parsed.quality_score == 66);

  std::string text2 = serialize_response(parsed.errors, parsed.quality_score);
  CHECK(text2 == text);
}

TEST_CASE("quality_score handling") {
  SUBCASE("clamped above 100 and flagged") {
    auto parsed = parse_mqm_response(R"({"errors":[],"quality_score":101})", true);
    CHECK(parsed.quality_score == 100);
    CHECK(parsed.score_clamped);
  }
  SUBCASE("absent stays absent") {
    auto parsed = parse_mqm_response(R"({"errors":[]})", true);
    CHECK_FALSE(parsed.quality_score.has_value());
    CHECK(parsed.parse_status == ParseStatus::clean);
  }
  SUBCASE("ignored when DA was not requested") {
    auto parsed = parse_mqm_response(R"({"errors":[],"quality_score":80})", false);
    CHECK_FALSE(parsed.quality_score.has_value());
  }
  SUBCASE("numeric strings are accepted") {
    auto parsed = parse_mqm_response(R"({"errors":[],"quality_score":"73"})", true);
    CHECK(parsed.quality_score == 73);
    CHECK_FALSE(parsed.score_clamped);
  }
}

TEST_CASE("extract_json_object balances braces inside strings") {
  auto extracted = extract_json_object(
      R"(noise {"a": "brace } in string", "b": {"c": 1}} trailing)");
  REQUIRE(extracted.has_value());
  CHECK(*extracted == R"({"a": "brace } in string", "b": {"c": 1}})");

  CHECK_FALSE(extract_json_object("no braces here").has_value());
  CHECK_FALSE(extract_json_object("{unbalanced").has_value());
}

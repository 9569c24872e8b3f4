#include "mqmeval/prompting.hpp"

#include <algorithm>

namespace mqmeval::prompting {

namespace {

const char* kInstructionBase =
    "You are an annotator for the quality of machine translation. Your task is "
    "to identify errors and assess the quality of the translation using MQM. "
    "Based on the source text (in <source></source> tags) and machine "
    "translation surrounded (in <translation></translation> tags), identify "
    "error types in the translation and classify them. The categories of "
    "errors are: accuracy (addition, mistranslation, omission, untranslated "
    "text, wrong language), fluency (character encoding, grammar, "
    "inconsistency, punctuation, register, spelling), style (awkward), "
    "terminology (inappropriate for context, inconsistent use), other. Each "
    "error, including omissions or untranslated content, is classified as one "
    "of three categories: critical, major, and minor. Critical errors inhibit "
    "comprehension of the text. Major errors disrupt the flow, but what the "
    "text is trying to say is still understandable. Minor errors are "
    "technically errors, but do not disrupt the flow or hinder comprehension. "
    "The source text muss be fully covered and any omissions should also be "
    "annotated as errors. Please only include errors and no spans that do not "
    "contain errors.";

const char* kFspInstructionTail =
    " You will be given a full document and its translations, but only score "
    "one sentence at a time which is given in <target_segment></target_segment> "
    "tags.";

const char* kQualityScoreDescription =
    "Overall quality score of the translation. After highlighting all errors, "
    "please choose the overall quality score. The quality levels associated "
    "with numerical scores: 0: No meaning preserved: Nearly all information "
    "is lost in the translation. 33: Some meaning preserved: Some of the "
    "meaning is preserved but significant parts are missing. The narrative is "
    "hard to follow due to errors. The text may be phrased in an "
    "unnatural/awkward way. Grammar may be poor. 66: Most meaning preserved "
    "and few grammar mistakes: The translation retains most of the meaning. "
    "It may have some grammar mistakes or minor inconsistencies. 100: Perfect "
    "meaning and grammar: The meaning and grammar of the translation is "
    "completely consistent with the source. The text sounds like native text "
    "in the the target language without any awkward phrases. Use any number "
    "in the range between 0 and 100 for a fine-grained quality score.";

const char* kRespondTail =
    "Please respond in JSON without any introduction or explanation. Only the "
    "JSON response is required.";

const char* kFspRespondTail =
    "Please respond in JSON without any introduction or explanation. Only the "
    "JSON response is required. Use the full document as context while only "
    "scoring the translation segment given in <target_segment></target_segment> "
    "tags.";

const char* kGmiclRespondTail =
    "Please respond only in JSON without any introduction. Only the JSON "
    "response is required. Unlike the examples you will include error span "
    "explanations and a final quality_score.";

std::string input_block(const std::string& src_lang, const std::string& src,
                        const std::string& tgt_lang, const std::string& tgt) {
  return "<input>\n<source_language>" + src_lang +
         "</source_language>\n<source>" + src +
         "</source>\n<target_language>" + tgt_lang +
         "</target_language>\n<translation>" + tgt +
         "</translation>\n</input>";
}

std::string demo_block(const std::string& src_lang, const std::string& src,
                       const std::string& tgt_lang, const std::string& tgt,
                       const std::string& answer) {
  return input_block(src_lang, src, tgt_lang, tgt) + "\n\nMQM:\n" + answer;
}

std::string fixed_demo_block(const FixedDemo& demo, bool with_explanations) {
  std::vector<parsing::ErrorAnnotation> errors = demo.errors;
  if (!with_explanations)
    for (auto& e : errors) e.explanation.reset();
  return demo_block(demo.src_lang, demo.src, demo.tgt_lang, demo.tgt,
                    parsing::serialize_response(errors));
}

std::string join_sections(const std::vector<std::string>& sections) {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += sections[i];
  }
  return out;
}

void validate_common(const EvalUnit& unit, const PromptOptions& opts) {
  if (unit.tgt.empty()) throw MqmError("empty translation in unit " + unit.unit_id);
  if (opts.n_shots != 0 && opts.n_shots != 3 && opts.n_shots != 5)
    throw MqmError("n_shots must be 0, 3 or 5");
}

PromptBundle finish_bundle(std::string prefix, std::string suffix,
                           const EvalUnit& unit, const PromptOptions& opts,
                           const std::string& unit_ref) {
  PromptBundle bundle;
  bundle.shared_prefix = std::move(prefix);
  bundle.suffix = std::move(suffix);
  bundle.decoding.temperature = 0.0;
  bundle.decoding.max_output_tokens = opts.max_output_tokens > 0
                                          ? opts.max_output_tokens
                                          : default_max_output_tokens(unit.granularity);
  bundle.cache_key = fnv1a64_hex(bundle.shared_prefix);
  bundle.unit_ref = unit_ref;
  return bundle;
}

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::gemba: return "gemba";
    case Family::fsp: return "fsp";
    case Family::gmicl: return "gmicl";
  }
  return "gemba";
}

std::optional<Family> family_from_string(std::string_view s) {
  if (s == "gemba") return Family::gemba;
  if (s == "fsp") return Family::fsp;
  if (s == "gmicl") return Family::gmicl;
  return std::nullopt;
}

int default_max_output_tokens(Granularity g) {
  return g == Granularity::doc5 ? 8192 : 4096;
}

std::string render_schema_block(bool with_explanations, bool with_da) {
  std::string s;
  s +=
      "{\n"
      "  \"type\": \"object\",\n"
      "  \"properties\": {\n"
      "    \"errors\": {\n"
      "      \"type\": \"array\",\n"
      "      \"items\": {\n"
      "        \"type\": \"object\",\n"
      "        \"properties\": {\n"
      "          \"error_span\": {\n"
      "            \"type\": \"string\",\n"
      "            \"description\": \"The relevant input span where the error occurred.\"\n"
      "          },\n";
  if (with_explanations)
    s +=
        "          \"explanation\": {\n"
        "            \"type\": \"string\",\n"
        "            \"description\": \"A brief explanation of the error and its impact\"\n"
        "          },\n";
  s +=
      "          \"error_category\": {\n"
      "            \"type\": \"string\",\n"
      "            \"enum\": [\"accuracy\", \"fluency\", \"style\", \"terminology\", \"other\"],\n"
      "            \"description\": \"The main category of the error\"\n"
      "          },\n"
      "          \"error_type\": {\n"
      "            \"type\": \"string\",\n"
      "            \"description\": \"The specific type of error within the category\"\n"
      "          },\n"
      "          \"severity\": {\n"
      "            \"type\": \"string\",\n"
      "            \"enum\": [\"critical\", \"major\", \"minor\"],\n"
      "            \"description\": \"The severity level of the error\"\n"
      // The dangling comma after the severity block is part of the canonical
      // prompt text; do not "fix" it.
      "          },\n"
      "        },\n";
  s += with_explanations
           ? "        \"required\": [\"explanation\", \"error_category\", \"error_type\", \"severity\"]\n"
           : "        \"required\": [\"error_category\", \"error_type\", \"severity\"]\n";
  s +=
      "      }\n"
      "    }";
  if (with_da) {
    s +=
        ",\n"
        "    \"quality_score\": {\n"
        "      \"type\": \"integer\",\n"
        "      \"description\": \"";
    s += kQualityScoreDescription;
    s +=
        "\"\n"
        "    }\n"
        "  },\n"
        "  \"required\": [\"errors\", \"quality_score\"]\n"
        "}";
  } else {
    s +=
        "\n"
        "  },\n"
        "  \"required\": [\"errors\"]\n"
        "}";
  }
  return s;
}

std::string instruction_with_schema(bool with_explanations, bool with_da) {
  return std::string(kInstructionBase) +
         "\n\nPlease respond in JSON following this schema:\n" +
         render_schema_block(with_explanations, with_da);
}

const std::vector<FixedDemo>& fixed_demonstrations() {
  using parsing::Category;
  static const std::vector<FixedDemo> demos = [] {
    std::vector<FixedDemo> d(3);

    d[0].src_lang = "English";
    d[0].src =
        "I do apologise about this, we must gain permission from the account "
        "holder to discuss an order with another person, I apologise if this "
        "was done previously, however, I would not be able to discuss this "
        "with yourself without the account holders permission.";
    d[0].tgt_lang = "German";
    d[0].tgt =
        "Ich entschuldige mich dafür, wir müssen die Erlaubnis einholen, um "
        "eine Bestellung mit einer anderen Person zu besprechen. Ich "
        "entschuldige mich, falls dies zuvor geschehen wäre, aber ohne die "
        "Erlaubnis des Kontoinhabers wäre ich nicht in der Lage, dies mit dir "
        "involvement.";
    d[0].errors = {
        {"involvement",
         "The word 'involvement' is mistranslated and doesn't fit in the "
         "context of the German sentence.",
         Category::accuracy, "mistranslation", Severity::major},
        {"",
         "The phrase 'the account holder' is omitted in the German "
         "translation, losing important information.",
         Category::accuracy, "omission", Severity::major},
        {"wäre",
         "The use of 'wäre' (subjunctive) is grammatically incorrect in this "
         "context. It should be 'bin' (indicative).",
         Category::fluency, "grammar", Severity::minor},
        {"dir",
         "The use of 'dir' (informal 'you') is inappropriate for the register "
         "of this text. It should be 'Ihnen' (formal 'you').",
         Category::fluency, "register", Severity::minor},
    };

    d[1].src_lang = "English";
    d[1].src =
        "Talks have resumed in Vienna to try to revive the nuclear pact, with "
        "both sides trying to gauge the prospects of success after the latest "
        "exchanges in the stop-start negotiations.";
    d[1].tgt_lang = "Czech";
    d[1].tgt =
        "Ve Vídni se ve Vídni obnovily rozhovory o oživení jaderného paktu, "
        "přičemže obě partaje se snaží posoudit vyhlídky na úspěch po "
        "posledních výměnách v jednáních.";
    d[1].errors = {
        {"ve Vídni se ve Vídni",
         "The phrase 've Vídni' (in Vienna) is unnecessarily repeated, adding "
         "redundant information.",
         Category::accuracy, "addition", Severity::major},
        {"",
         "The phrase 'the stop-start' is omitted in the Czech translation, "
         "losing the characterization of the negotiations as intermittent.",
         Category::accuracy, "omission", Severity::major},
        {"partaje",
         "The word 'partaje' (parties) is inappropriate for this context. A "
         "more formal term like 'strany' (sides) would be more suitable.",
         Category::terminology, "inappropriate for context", Severity::minor},
    };

    d[2].src_lang = "Chinese";
    d[2].src =
        "大众点评乌鲁木齐家居商场频道为您提供高铁居然之家地址,电话,营业时间等"
        "最新商户信息, 找装修公司,就上大众点评";
    d[2].tgt_lang = "English";
    d[2].tgt =
        "Urumqi Home Furnishing Store Channel provides you with the latest "
        "business information such as the address, telephone number, business "
        "hours, etc., of high-speed rail, and find a decoration company, and "
        "go to the reviews.";
    d[2].errors = {
        {"of high-speed rail",
         "The phrase 'of high-speed rail' is incorrectly added to the "
         "translation. It's not present in the original Chinese text and "
         "doesn't make sense in this context.",
         Category::accuracy, "addition", Severity::critical},
        {"go to the reviews",
         "The phrase 'go to the reviews' is a mistranslation. The original "
         "Chinese text refers to using Dianping (a review platform), not "
         "simply going to reviews.",
         Category::accuracy, "mistranslation", Severity::major},
        {"etc.,",
         "The use of 'etc.' is inappropriate in this context, as it "
         "introduces vagueness to the translation. The list should be "
         "explicit and complete.",
         Category::style, "awkward", Severity::minor},
    };
    return d;
  }();
  return demos;
}

PromptBundle render_gemba(const EvalUnit& unit, const PromptOptions& opts) {
  if (opts.family != Family::gemba)
    throw MqmError("render_gemba called with family " +
                   std::string(to_string(opts.family)));
  if (opts.n_shots != 0 && opts.n_shots != 3)
    throw MqmError("gemba supports 0 or 3 shots");
  validate_common(unit, opts);

  std::vector<std::string> sections;
  sections.push_back(kInstructionBase);
  sections.push_back("Please respond in JSON following this schema:\n" +
                     render_schema_block(opts.with_explanations, opts.with_da));
  if (opts.n_shots == 3)
    for (const FixedDemo& demo : fixed_demonstrations())
      sections.push_back(fixed_demo_block(demo, opts.with_explanations));

  std::string prefix =
      join_sections(sections) + "\n\nPlease score the following input\n";
  std::string suffix =
      input_block(opts.src_lang, unit.src, opts.tgt_lang, unit.tgt) + "\n\n" +
      kRespondTail + "\n\nMQM:";
  return finish_bundle(std::move(prefix), std::move(suffix), unit, opts,
                       unit.unit_id);
}

PromptBundle render_fsp(const EvalUnit& doc_unit, std::size_t focus_index,
                        const PromptOptions& opts) {
  if (opts.family != Family::fsp)
    throw MqmError("render_fsp called with family " +
                   std::string(to_string(opts.family)));
  if (opts.n_shots != 0 && opts.n_shots != 3)
    throw MqmError("fsp supports 0 or 3 shots");
  validate_common(doc_unit, opts);
  if (focus_index >= doc_unit.parts.size())
    throw MqmError("focus index " + std::to_string(focus_index) +
                   " out of range for unit " + doc_unit.unit_id);
  const UnitPart& part = doc_unit.parts[focus_index];
  if (part.tgt_offset + part.tgt_len > doc_unit.tgt.size())
    throw MqmError("part offsets out of range in unit " + doc_unit.unit_id);
  std::string focus = doc_unit.tgt.substr(part.tgt_offset, part.tgt_len);

  std::vector<std::string> sections;
  sections.push_back(std::string(kInstructionBase) + kFspInstructionTail);
  // The focus-segment schema always carries quality_score.
  sections.push_back("Please respond in JSON following this schema:\n" +
                     render_schema_block(opts.with_explanations, true));
  if (opts.n_shots == 3)
    for (const FixedDemo& demo : fixed_demonstrations())
      sections.push_back(fixed_demo_block(demo, opts.with_explanations));

  std::string prefix = join_sections(sections) +
                       "\n\nPlease score the following input\n"
                       "<input>\n<source_language>" +
                       opts.src_lang + "</source_language>\n<source>" +
                       doc_unit.src + "</source>\n<target_language>" +
                       opts.tgt_lang + "</target_language>\n<translation>" +
                       doc_unit.tgt + "</translation>\n";
  std::string suffix = "<target_segment>" + focus +
                       "</target_segment>\n</input>\n\n" + kFspRespondTail +
                       "\n\nMQM:";
  return finish_bundle(std::move(prefix), std::move(suffix), doc_unit, opts,
                       doc_unit.unit_id + "#" + std::to_string(focus_index));
}

std::vector<Demonstration> select_gm_demos(const std::vector<Demonstration>& pool,
                                           const EvalUnit& unit, std::size_t k,
                                           std::uint64_t seed) {
  std::vector<std::size_t> matching;
  std::size_t n_seg = 0, n_doc = 0, n_doc5 = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    switch (pool[i].granularity) {
      case Granularity::seg: ++n_seg; break;
      case Granularity::doc: ++n_doc; break;
      case Granularity::doc5: ++n_doc5; break;
    }
    if (pool[i].granularity == unit.granularity) matching.push_back(i);
  }
  if (matching.size() < k)
    throw MqmError("insufficient demonstrations for granularity " +
                   std::string(to_string(unit.granularity)) + ": need " +
                   std::to_string(k) + ", pool has seg=" + std::to_string(n_seg) +
                   " doc=" + std::to_string(n_doc) +
                   " doc5=" + std::to_string(n_doc5));

  SplitMix64 rng(seed);
  std::vector<Demonstration> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.bounded(matching.size() - i));
    std::swap(matching[i], matching[j]);
    out.push_back(pool[matching[i]]);
  }
  return out;
}

PromptBundle render_gmicl(const EvalUnit& unit,
                          const std::vector<Demonstration>& demos,
                          const PromptOptions& opts) {
  if (opts.family != Family::gmicl)
    throw MqmError("render_gmicl called with family " +
                   std::string(to_string(opts.family)));
  if (opts.n_shots != 5) throw MqmError("gmicl is 5-shot only");
  if (demos.size() != 5)
    throw MqmError("gmicl requires exactly 5 demonstrations, got " +
                   std::to_string(demos.size()));
  validate_common(unit, opts);
  for (std::size_t i = 0; i < demos.size(); ++i) {
    auto parsed = parsing::parse_mqm_response(demos[i].gold_response, false);
    if (parsed.parse_status != parsing::ParseStatus::clean ||
        parsed.dropped_annotations > 0)
      throw MqmError("demonstration " + std::to_string(i) +
                     " has an invalid gold_response");
  }

  std::vector<std::string> sections;
  sections.push_back(kInstructionBase);
  // Same schema as the focus-segment prompt: explanations and quality_score.
  sections.push_back("Please respond in JSON following this schema:\n" +
                     render_schema_block(true, true));
  sections.push_back("Here are some examples:");
  for (const Demonstration& demo : demos) {
    const std::string& sl = demo.src_lang.empty() ? opts.src_lang : demo.src_lang;
    const std::string& tl = demo.tgt_lang.empty() ? opts.tgt_lang : demo.tgt_lang;
    sections.push_back(demo_block(sl, demo.src, tl, demo.tgt, demo.gold_response));
  }

  std::string prefix =
      join_sections(sections) + "\n\nPlease score the following input\n";
  std::string suffix =
      input_block(opts.src_lang, unit.src, opts.tgt_lang, unit.tgt) + "\n\n" +
      kGmiclRespondTail + "\n\nMQM (with explanation, with quality_score):";
  return finish_bundle(std::move(prefix), std::move(suffix), unit, opts,
                       unit.unit_id);
}

}  // namespace mqmeval::prompting

#include "mqmeval/jsonio.hpp"

#include <fstream>

#include "mqmeval/parsing.hpp"

namespace mqmeval::jsonio {

JsonlFile read_jsonl(const std::string& path, const std::string& expected_artifact) {
  std::ifstream in(path);
  if (!in) throw MqmError("cannot open file: " + path);
  JsonlFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ordered_json rec;
    try {
      rec = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw MqmError(path + ":" + std::to_string(line_no) +
                     ": malformed record: " + e.what());
    }
    if (!out.header && out.records.empty() && rec.is_object() &&
        rec.contains("artifact")) {
      out.header = std::move(rec);
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  if (!expected_artifact.empty()) {
    if (!out.header)
      throw MqmError(path + ": missing artifact header (expected '" +
                     expected_artifact + "')");
    std::string artifact = out.header->value("artifact", std::string());
    if (artifact != expected_artifact)
      throw MqmError(path + ": artifact is '" + artifact + "', expected '" +
                     expected_artifact + "'");
  }
  return out;
}

void write_jsonl(const std::string& path, const ordered_json& header,
                 const std::vector<ordered_json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MqmError("cannot write file: " + path);
  out << header.dump() << "\n";
  for (const ordered_json& rec : records) out << rec.dump() << "\n";
  if (!out) throw MqmError("short write: " + path);
}

ordered_json make_header(const std::string& artifact, const std::string& run_id) {
  ordered_json header;
  header["artifact"] = artifact;
  header["run_id"] = run_id;
  header["schema_version"] = 1;
  return header;
}

// --- segments ---

ordered_json segment_to_json(const Segment& segment) {
  ordered_json rec;
  rec["doc_id"] = segment.doc_id;
  rec["seg_index"] = segment.seg_index;
  rec["src"] = segment.src;
  ordered_json systems = ordered_json::object();
  for (const auto& [system, tgt] : segment.translations) {
    ordered_json entry;
    entry["tgt"] = tgt;
    ordered_json gold = ordered_json::array();
    auto g = segment.gold.find(system);
    if (g != segment.gold.end()) {
      for (const GoldSpan& span : g->second) {
        ordered_json s;
        s["start"] = span.start;
        s["end"] = span.end;
        s["severity"] = to_string(span.severity);
        s["category"] = span.category;
        s["is_omission"] = span.is_omission;
        gold.push_back(std::move(s));
      }
    }
    entry["gold"] = std::move(gold);
    systems[system] = std::move(entry);
  }
  rec["systems"] = std::move(systems);
  return rec;
}

void write_segments(const std::string& path, const std::string& run_id,
                    const std::vector<Segment>& segments) {
  std::vector<ordered_json> records;
  records.reserve(segments.size());
  for (const Segment& seg : segments) records.push_back(segment_to_json(seg));
  write_jsonl(path, make_header("segments", run_id), records);
}

// --- units ---

namespace {

GoldSpan gold_span_from_json(const ordered_json& j) {
  GoldSpan span;
  span.start = j.at("start").get<std::size_t>();
  span.end = j.at("end").get<std::size_t>();
  auto sev = severity_from_string(j.at("severity").get<std::string>());
  if (!sev) throw MqmError("unknown severity in gold span");
  span.severity = *sev;
  span.category = j.value("category", std::string());
  span.is_omission = j.value("is_omission", span.start == span.end);
  return span;
}

ordered_json gold_span_to_json(const GoldSpan& span) {
  ordered_json s;
  s["start"] = span.start;
  s["end"] = span.end;
  s["severity"] = to_string(span.severity);
  s["category"] = span.category;
  s["is_omission"] = span.is_omission;
  return s;
}

}  // namespace

ordered_json unit_to_json(const EvalUnit& unit) {
  ordered_json rec;
  rec["unit_id"] = unit.unit_id;
  rec["granularity"] = to_string(unit.granularity);
  rec["system_id"] = unit.system_id;
  rec["src"] = unit.src;
  rec["tgt"] = unit.tgt;
  ordered_json parts = ordered_json::array();
  for (const UnitPart& part : unit.parts) {
    ordered_json p;
    p["doc_id"] = part.doc_id;
    p["seg_index"] = part.seg_index;
    p["src_offset"] = part.src_offset;
    p["src_len"] = part.src_len;
    p["tgt_offset"] = part.tgt_offset;
    p["tgt_len"] = part.tgt_len;
    parts.push_back(std::move(p));
  }
  rec["parts"] = std::move(parts);
  ordered_json gold = ordered_json::array();
  for (const GoldSpan& span : unit.gold) gold.push_back(gold_span_to_json(span));
  rec["gold"] = std::move(gold);
  rec["n_source_docs"] = unit.n_source_docs;
  rec["group_key"] = unit.group_key;
  return rec;
}

EvalUnit unit_from_json(const ordered_json& record) {
  EvalUnit unit;
  unit.unit_id = record.at("unit_id").get<std::string>();
  auto g = granularity_from_string(record.at("granularity").get<std::string>());
  if (!g) throw MqmError("unknown granularity in unit " + unit.unit_id);
  unit.granularity = *g;
  unit.system_id = record.at("system_id").get<std::string>();
  unit.src = record.at("src").get<std::string>();
  unit.tgt = record.at("tgt").get<std::string>();
  for (const ordered_json& p : record.at("parts")) {
    UnitPart part;
    part.doc_id = p.at("doc_id").get<std::string>();
    part.seg_index = p.at("seg_index").get<int>();
    part.src_offset = p.at("src_offset").get<std::size_t>();
    part.src_len = p.at("src_len").get<std::size_t>();
    part.tgt_offset = p.at("tgt_offset").get<std::size_t>();
    part.tgt_len = p.at("tgt_len").get<std::size_t>();
    unit.parts.push_back(std::move(part));
  }
  for (const ordered_json& s : record.at("gold"))
    unit.gold.push_back(gold_span_from_json(s));
  unit.n_source_docs = record.at("n_source_docs").get<int>();
  unit.group_key = record.value("group_key", std::string());
  return unit;
}

void write_units(const std::string& path, const std::string& run_id,
                 const ordered_json& config, const std::vector<EvalUnit>& units) {
  ordered_json header = make_header("units", run_id);
  header["config"] = config;
  std::vector<ordered_json> records;
  records.reserve(units.size());
  for (const EvalUnit& unit : units) records.push_back(unit_to_json(unit));
  write_jsonl(path, header, records);
}

std::vector<EvalUnit> read_units(const std::string& path, ordered_json* header) {
  JsonlFile file = read_jsonl(path, "units");
  if (header) *header = *file.header;
  std::vector<EvalUnit> units;
  units.reserve(file.records.size());
  for (const ordered_json& rec : file.records)
    units.push_back(unit_from_json(rec));
  return units;
}

// --- responses ---

void write_responses(const std::string& path, const std::string& run_id,
                     const ordered_json& config,
                     const std::vector<ResponseRow>& rows) {
  ordered_json header = make_header("responses", run_id);
  header["config"] = config;
  std::vector<ordered_json> records;
  records.reserve(rows.size());
  for (const ResponseRow& row : rows) {
    ordered_json rec;
    rec["unit_id"] = row.unit_id;
    rec["focus_index"] = row.focus_index;
    rec["text"] = row.response.text;
    rec["input_tokens"] = row.response.input_tokens;
    rec["output_tokens"] = row.response.output_tokens;
    rec["latency_ms"] = row.response.latency_ms;
    rec["from_cache"] = row.response.from_cache;
    rec["model_id"] = row.response.model_id;
    records.push_back(std::move(rec));
  }
  write_jsonl(path, header, records);
}

std::vector<ResponseRow> read_responses(const std::string& path,
                                        ordered_json* header) {
  JsonlFile file = read_jsonl(path, "responses");
  if (header) *header = *file.header;
  std::vector<ResponseRow> rows;
  rows.reserve(file.records.size());
  for (const ordered_json& rec : file.records) {
    ResponseRow row;
    row.unit_id = rec.at("unit_id").get<std::string>();
    row.focus_index = rec.at("focus_index").get<int>();
    row.response.text = rec.at("text").get<std::string>();
    row.response.input_tokens = rec.value("input_tokens", std::int64_t{0});
    row.response.output_tokens = rec.value("output_tokens", std::int64_t{0});
    row.response.latency_ms = rec.value("latency_ms", std::int64_t{0});
    row.response.from_cache = rec.value("from_cache", false);
    row.response.model_id = rec.value("model_id", std::string());
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- scores ---

void write_scores(const std::string& path, const std::string& run_id,
                  const std::vector<scoring::UnitScore>& scores) {
  std::vector<ordered_json> records;
  records.reserve(scores.size());
  for (const scoring::UnitScore& s : scores) {
    ordered_json rec;
    rec["unit_id"] = s.unit_id;
    rec["system_id"] = s.system_id;
    rec["granularity"] = to_string(s.granularity);
    rec["method"] = scoring::to_string(s.method);
    rec["score"] = s.score;
    rec["n_errors"] = s.n_errors;
    rec["parse_status"] = parsing::to_string(s.parse_status);
    records.push_back(std::move(rec));
  }
  write_jsonl(path, make_header("scores", run_id), records);
}

std::vector<scoring::UnitScore> read_scores(const std::string& path,
                                            ordered_json* header) {
  JsonlFile file = read_jsonl(path, "scores");
  if (header) *header = *file.header;
  std::vector<scoring::UnitScore> scores;
  scores.reserve(file.records.size());
  for (const ordered_json& rec : file.records) {
    scoring::UnitScore s;
    s.unit_id = rec.at("unit_id").get<std::string>();
    s.system_id = rec.at("system_id").get<std::string>();
    auto g = granularity_from_string(rec.at("granularity").get<std::string>());
    auto m = scoring::score_method_from_string(rec.at("method").get<std::string>());
    auto p = parsing::parse_status_from_string(
        rec.at("parse_status").get<std::string>());
    if (!g || !m || !p) throw MqmError("bad enum in score row " + s.unit_id);
    s.granularity = *g;
    s.method = *m;
    s.parse_status = *p;
    s.score = rec.at("score").get<double>();
    s.n_errors = rec.at("n_errors").get<int>();
    scores.push_back(std::move(s));
  }
  return scores;
}

// --- fine-tuning data and demo pools ---

void write_ft_examples(const std::string& path,
                       const std::vector<ftexport::FtExample>& examples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MqmError("cannot write file: " + path);
  for (const ftexport::FtExample& example : examples) {
    ordered_json rec;
    ordered_json messages = ordered_json::array();
    for (const ftexport::FtMessage& msg : example.messages) {
      ordered_json m;
      m["role"] = msg.role;
      m["content"] = msg.content;
      messages.push_back(std::move(m));
    }
    rec["messages"] = std::move(messages);
    out << rec.dump() << "\n";
  }
  if (!out) throw MqmError("short write: " + path);
}

void write_demo_pool(const std::string& path, const std::string& run_id,
                     const std::vector<prompting::Demonstration>& pool) {
  std::vector<ordered_json> records;
  records.reserve(pool.size());
  for (const prompting::Demonstration& demo : pool) {
    ordered_json rec;
    rec["granularity"] = to_string(demo.granularity);
    rec["src"] = demo.src;
    rec["tgt"] = demo.tgt;
    rec["gold_response"] = demo.gold_response;
    rec["token_len"] = demo.token_len;
    rec["src_lang"] = demo.src_lang;
    rec["tgt_lang"] = demo.tgt_lang;
    records.push_back(std::move(rec));
  }
  write_jsonl(path, make_header("demo_pool", run_id), records);
}

std::vector<prompting::Demonstration> read_demo_pool(const std::string& path) {
  JsonlFile file = read_jsonl(path, "demo_pool");
  std::vector<prompting::Demonstration> pool;
  pool.reserve(file.records.size());
  for (const ordered_json& rec : file.records) {
    prompting::Demonstration demo;
    auto g = granularity_from_string(rec.at("granularity").get<std::string>());
    if (!g) throw MqmError("unknown granularity in demo pool");
    demo.granularity = *g;
    demo.src = rec.at("src").get<std::string>();
    demo.tgt = rec.at("tgt").get<std::string>();
    demo.gold_response = rec.at("gold_response").get<std::string>();
    demo.token_len = rec.value("token_len", std::int64_t{0});
    demo.src_lang = rec.value("src_lang", std::string());
    demo.tgt_lang = rec.value("tgt_lang", std::string());
    pool.push_back(std::move(demo));
  }
  return pool;
}

// --- manifest ---

ordered_json manifest_to_json(const RunManifest& manifest) {
  ordered_json j;
  j["artifact"] = "manifest";
  j["run_id"] = manifest.run_id;
  j["schema_version"] = 1;
  j["config"] = manifest.config;
  ordered_json counts;
  counts["units"] = manifest.units;
  counts["requests"] = manifest.requests;
  counts["parse_failed"] = manifest.parse_failed;
  counts["dropped_annotations"] = manifest.dropped_annotations;
  counts["skipped_units"] = manifest.skipped_units;
  j["counts"] = std::move(counts);
  ordered_json totals;
  totals["spans"] = manifest.total_spans;
  j["totals"] = std::move(totals);
  // Wall-clock timing varies run to run; comparisons must drop this section.
  ordered_json volatile_section;
  volatile_section["wall_clock_ms"] = manifest.wall_clock_ms;
  volatile_section["spans_per_second"] = manifest.spans_per_second;
  j["volatile"] = std::move(volatile_section);
  return j;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  write_text_file(path, manifest_to_json(manifest).dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw MqmError("malformed manifest " + path + ": " + e.what());
  }
  if (j.value("artifact", std::string()) != "manifest")
    throw MqmError(path + " is not a run manifest");
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.config = j.at("config");
  const ordered_json& counts = j.at("counts");
  m.units = counts.value("units", std::size_t{0});
  m.requests = counts.value("requests", std::size_t{0});
  m.parse_failed = counts.value("parse_failed", std::size_t{0});
  m.dropped_annotations = counts.value("dropped_annotations", std::size_t{0});
  m.skipped_units = counts.value("skipped_units", std::size_t{0});
  m.total_spans = j.at("totals").value("spans", 0LL);
  const ordered_json& vol = j.at("volatile");
  m.wall_clock_ms = vol.value("wall_clock_ms", 0LL);
  m.spans_per_second = vol.value("spans_per_second", 0.0);
  return m;
}

std::string manifest_stable_dump(const RunManifest& manifest) {
  ordered_json j = manifest_to_json(manifest);
  j.erase("volatile");
  return j.dump(2);
}

// --- weights ---

ordered_json weights_to_json(const scoring::SeverityWeights& weights) {
  ordered_json j;
  j["minor"] = weights.minor;
  j["major"] = weights.major;
  j["critical"] = weights.critical;
  if (weights.per_unit_cap)
    j["per_unit_cap"] = *weights.per_unit_cap;
  else
    j["per_unit_cap"] = nullptr;
  return j;
}

scoring::SeverityWeights weights_from_json(const ordered_json& j) {
  scoring::SeverityWeights w;
  w.minor = j.value("minor", 1.0);
  w.major = j.value("major", 5.0);
  w.critical = j.value("critical", 10.0);
  if (j.contains("per_unit_cap") && !j["per_unit_cap"].is_null())
    w.per_unit_cap = j["per_unit_cap"].get<double>();
  else
    w.per_unit_cap.reset();
  scoring::validate_weights(w);
  return w;
}

}  // namespace mqmeval::jsonio

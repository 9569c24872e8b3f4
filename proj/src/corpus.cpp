#include "mqmeval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace mqmeval::corpus {

namespace {

using nlohmann::json;

std::string line_err(const std::string& path, std::size_t line_no,
                     const std::string& msg) {
  std::ostringstream os;
  os << path << ":" << line_no << ": " << msg;
  return os.str();
}

Severity parse_severity_or_throw(const std::string& raw, const std::string& where) {
  auto sev = severity_from_string(to_lower(trim(raw)));
  if (!sev) throw MqmError(where + ": unknown severity '" + raw + "'");
  return *sev;
}

void check_span(const GoldSpan& span, std::size_t tgt_len, const std::string& where) {
  if (span.start > span.end || span.end > tgt_len)
    throw MqmError(where + ": gold span out of range [" +
                   std::to_string(span.start) + "," + std::to_string(span.end) +
                   ") over length " + std::to_string(tgt_len));
  if (span.is_omission != (span.start == span.end))
    throw MqmError(where + ": is_omission inconsistent with span width");
}

std::vector<Segment> import_canonical(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MqmError("cannot open corpus file: " + path);

  std::vector<Segment> segments;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw MqmError(line_err(path, line_no, std::string("malformed record: ") + e.what()));
    }
    // A leading header record (written by our own tools) is skipped.
    if (rec.is_object() && rec.contains("artifact") && !rec.contains("doc_id")) continue;

    try {
      Segment seg;
      seg.doc_id = rec.at("doc_id").get<std::string>();
      seg.seg_index = rec.at("seg_index").get<int>();
      seg.src = rec.at("src").get<std::string>();
      if (seg.seg_index < 0)
        throw MqmError("negative seg_index in doc " + seg.doc_id);
      const json& systems = rec.at("systems");
      for (auto it = systems.begin(); it != systems.end(); ++it) {
        const std::string& system = it.key();
        const json& entry = it.value();
        std::string tgt = entry.at("tgt").get<std::string>();
        std::vector<GoldSpan> spans;
        if (entry.contains("gold")) {
          for (const json& g : entry.at("gold")) {
            GoldSpan span;
            span.start = g.at("start").get<std::size_t>();
            span.end = g.at("end").get<std::size_t>();
            span.severity = parse_severity_or_throw(
                g.at("severity").get<std::string>(),
                seg.doc_id + "#" + std::to_string(seg.seg_index) + "/" + system);
            span.category = g.value("category", std::string());
            span.is_omission = g.value("is_omission", span.start == span.end);
            check_span(span, tgt.size(),
                       seg.doc_id + "#" + std::to_string(seg.seg_index) + "/" + system);
            spans.push_back(std::move(span));
          }
        }
        seg.translations[system] = std::move(tgt);
        if (!spans.empty()) seg.gold[system] = std::move(spans);
      }
      segments.push_back(std::move(seg));
    } catch (const json::exception& e) {
      throw MqmError(line_err(path, line_no, std::string("malformed record: ") + e.what()));
    }
  }
  validate_segments(segments);
  return segments;
}

// Strips one <v>...</v> marker pair from `marked`, returning the clean text
// and the marked range. Returns false when no marker is present.
bool strip_marker(const std::string& marked, std::string* clean,
                  std::size_t* start, std::size_t* end) {
  static const std::string kOpen = "<v>";
  static const std::string kClose = "</v>";
  std::size_t open = marked.find(kOpen);
  if (open == std::string::npos) {
    *clean = marked;
    return false;
  }
  std::size_t close = marked.find(kClose, open + kOpen.size());
  if (close == std::string::npos)
    throw MqmError("unterminated <v> marker");
  if (marked.find(kOpen, open + kOpen.size()) != std::string::npos &&
      marked.find(kOpen, open + kOpen.size()) < close)
    throw MqmError("nested <v> markers");
  if (marked.find(kOpen, close + kClose.size()) != std::string::npos ||
      marked.find(kClose, close + kClose.size()) != std::string::npos)
    throw MqmError("more than one error marker in a row");
  *clean = marked.substr(0, open) +
           marked.substr(open + kOpen.size(), close - open - kOpen.size()) +
           marked.substr(close + kClose.size());
  *start = open;
  *end = close - kOpen.size();
  return true;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t pos = 0;
  for (;;) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      cols.push_back(line.substr(pos));
      break;
    }
    cols.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return cols;
}

bool is_no_error_severity(const std::string& raw) {
  std::string s = to_lower(trim(raw));
  return s == "no-error" || s == "no_error" || s == "neutral";
}

std::vector<Segment> import_wmt_tagged(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MqmError("cannot open corpus file: " + path);

  struct SegAccum {
    std::string src;
    std::map<std::string, std::string> translations;
    std::map<std::string, std::vector<GoldSpan>> gold;
  };
  // doc -> raw seg_id -> accumulated data; doc order preserved.
  std::map<std::string, std::map<int, SegAccum>> docs;
  std::vector<std::string> doc_order;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 7)
      throw MqmError(line_err(path, line_no,
                              "expected 7 tab-separated columns, got " +
                                  std::to_string(cols.size())));
    // Skip a header row if present.
    if (line_no == 1 && to_lower(cols[0]) == "system") continue;
    const std::string& system = cols[0];
    const std::string& doc = cols[1];
    int seg_id = 0;
    try {
      seg_id = std::stoi(cols[2]);
    } catch (const std::exception&) {
      throw MqmError(line_err(path, line_no, "seg_id is not an integer: " + cols[2]));
    }
    const std::string& source = cols[3];
    const std::string& marked = cols[4];
    const std::string& category = cols[5];
    const std::string& severity_raw = cols[6];

    std::string clean;
    std::size_t span_start = 0, span_end = 0;
    bool has_marker = false;
    try {
      has_marker = strip_marker(marked, &clean, &span_start, &span_end);
    } catch (const MqmError& e) {
      throw MqmError(line_err(path, line_no, e.what()));
    }

    if (docs.find(doc) == docs.end()) doc_order.push_back(doc);
    SegAccum& acc = docs[doc][seg_id];
    if (acc.src.empty()) {
      acc.src = source;
    } else if (acc.src != source) {
      throw MqmError(line_err(path, line_no,
                              "source text differs across rows of " + doc + "#" +
                                  std::to_string(seg_id)));
    }
    auto it = acc.translations.find(system);
    if (it == acc.translations.end()) {
      acc.translations[system] = clean;
    } else if (it->second != clean) {
      throw MqmError(line_err(path, line_no,
                              "target text differs across rows of " + doc + "#" +
                                  std::to_string(seg_id) + "/" + system));
    }

    if (is_no_error_severity(severity_raw)) continue;
    if (!has_marker) continue;  // a row without a marker contributes no span
    GoldSpan span;
    span.start = span_start;
    span.end = span_end;
    span.is_omission = span.start == span.end;
    span.category = category;
    try {
      span.severity = parse_severity_or_throw(severity_raw,
                                              doc + "#" + std::to_string(seg_id));
    } catch (const MqmError& e) {
      throw MqmError(line_err(path, line_no, e.what()));
    }
    docs[doc][seg_id].gold[system].push_back(span);
  }

  // Normalize seg ids to a 0-based contiguous range per doc.
  std::vector<Segment> segments;
  for (const std::string& doc : doc_order) {
    const auto& segs = docs[doc];
    int base = segs.begin()->first;
    int expected = base;
    for (const auto& [seg_id, acc] : segs) {
      if (seg_id != expected)
        throw MqmError("non-contiguous seg ids in doc " + doc + " (missing " +
                       std::to_string(expected) + ")");
      ++expected;
      Segment seg;
      seg.doc_id = doc;
      seg.seg_index = seg_id - base;
      seg.src = acc.src;
      seg.translations = acc.translations;
      seg.gold = acc.gold;
      for (const auto& [system, spans] : seg.gold) {
        auto t = seg.translations.find(system);
        std::size_t len = t == seg.translations.end() ? 0 : t->second.size();
        for (const GoldSpan& s : spans)
          check_span(s, len, doc + "#" + std::to_string(seg_id) + "/" + system);
      }
      segments.push_back(std::move(seg));
    }
  }
  validate_segments(segments);
  return segments;
}

}  // namespace

std::vector<Segment> import_corpus(const std::string& path, CorpusFormat format) {
  switch (format) {
    case CorpusFormat::canonical_jsonl: return import_canonical(path);
    case CorpusFormat::wmt_tagged: return import_wmt_tagged(path);
  }
  throw MqmError("unknown corpus format");
}

void validate_segments(const std::vector<Segment>& segments) {
  std::map<std::string, std::set<int>> per_doc;
  for (const Segment& seg : segments) {
    if (!per_doc[seg.doc_id].insert(seg.seg_index).second)
      throw MqmError("duplicate seg_index " + std::to_string(seg.seg_index) +
                     " in doc " + seg.doc_id);
    for (const auto& [system, spans] : seg.gold) {
      auto t = seg.translations.find(system);
      if (t == seg.translations.end())
        throw MqmError("gold for unknown system '" + system + "' in doc " +
                       seg.doc_id + "#" + std::to_string(seg.seg_index));
      for (const GoldSpan& span : spans)
        check_span(span, t->second.size(),
                   seg.doc_id + "#" + std::to_string(seg.seg_index) + "/" + system);
    }
  }
  for (const auto& [doc, indices] : per_doc) {
    int expected = 0;
    for (int i : indices) {
      if (i != expected)
        throw MqmError("non-contiguous seg_index in doc " + doc + " (missing " +
                       std::to_string(expected) + ")");
      ++expected;
    }
  }
}

namespace {

std::string doc_unit_id(const std::string& doc_id, const std::string& system) {
  return "doc:" + doc_id + ":" + system;
}

std::string doc5_unit_id(std::size_t group_index, const std::string& system) {
  std::string n = std::to_string(group_index);
  while (n.size() < 4) n.insert(n.begin(), '0');
  return "doc5:g" + n + ":" + system;
}

// Joins the given segments (already in order) for one system into a unit.
EvalUnit concat_unit(const std::vector<const Segment*>& segs,
                     const std::string& system, const std::string& joiner) {
  EvalUnit unit;
  unit.system_id = system;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& seg = *segs[i];
    const std::string& tgt = seg.translations.at(system);
    if (i > 0) {
      unit.src += joiner;
      unit.tgt += joiner;
    }
    UnitPart part;
    part.doc_id = seg.doc_id;
    part.seg_index = seg.seg_index;
    part.src_offset = unit.src.size();
    part.src_len = seg.src.size();
    part.tgt_offset = unit.tgt.size();
    part.tgt_len = tgt.size();
    unit.src += seg.src;
    unit.tgt += tgt;
    auto g = seg.gold.find(system);
    if (g != seg.gold.end()) {
      for (GoldSpan span : g->second) {
        span.start += part.tgt_offset;
        span.end += part.tgt_offset;
        unit.gold.push_back(span);
      }
    }
    unit.parts.push_back(std::move(part));
  }
  return unit;
}

}  // namespace

GranularityBuild build_granularity(const std::vector<Segment>& segments,
                                   Granularity level, int group_size,
                                   std::uint64_t seed, const std::string& joiner) {
  GranularityBuild out;
  if (segments.empty()) return out;
  validate_segments(segments);

  // Documents in input order, segments sorted by seg_index.
  std::vector<std::string> doc_order;
  std::map<std::string, std::vector<const Segment*>> docs;
  for (const Segment& seg : segments) {
    auto [it, inserted] = docs.try_emplace(seg.doc_id);
    if (inserted) doc_order.push_back(seg.doc_id);
    it->second.push_back(&seg);
  }
  for (auto& [doc, segs] : docs)
    std::sort(segs.begin(), segs.end(), [](const Segment* a, const Segment* b) {
      return a->seg_index < b->seg_index;
    });

  if (level == Granularity::seg) {
    for (const std::string& doc : doc_order) {
      for (const Segment* seg : docs[doc]) {
        for (const auto& [system, tgt] : seg->translations) {
          EvalUnit unit = concat_unit({seg}, system, joiner);
          unit.unit_id = seg_unit_id(seg->doc_id, seg->seg_index, system);
          unit.granularity = Granularity::seg;
          unit.n_source_docs = 1;
          unit.group_key = seg->doc_id;
          out.units.push_back(std::move(unit));
        }
      }
    }
    return out;
  }

  // Groups of documents: singletons for doc, shuffled chunks for doc5.
  std::vector<std::vector<std::string>> groups;
  if (level == Granularity::doc) {
    for (const std::string& doc : doc_order) groups.push_back({doc});
  } else {
    if (group_size < 2)
      throw MqmError("doc5 requires group_size >= 2, got " +
                     std::to_string(group_size));
    std::vector<std::string> shuffled = doc_order;
    seeded_shuffle(shuffled, seed);
    for (std::size_t i = 0; i + static_cast<std::size_t>(group_size) <= shuffled.size();
         i += static_cast<std::size_t>(group_size)) {
      groups.emplace_back(shuffled.begin() + static_cast<std::ptrdiff_t>(i),
                          shuffled.begin() + static_cast<std::ptrdiff_t>(i) +
                              group_size);
    }
  }

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& group = groups[gi];
    std::vector<const Segment*> segs;
    std::set<std::string> systems;
    for (const std::string& doc : group) {
      for (const Segment* seg : docs[doc]) {
        segs.push_back(seg);
        for (const auto& [system, tgt] : seg->translations) systems.insert(system);
      }
    }
    for (const std::string& system : systems) {
      bool complete = true;
      for (const Segment* seg : segs) {
        if (!seg->translations.count(system)) {
          complete = false;
          break;
        }
      }
      std::string group_name = level == Granularity::doc
                                   ? group.front()
                                   : "g" + std::to_string(gi);
      if (!complete) {
        out.skipped.push_back("skipped (" + group_name + ", " + system +
                              "): system missing from some segment");
        continue;
      }
      EvalUnit unit = concat_unit(segs, system, joiner);
      unit.granularity = level;
      unit.n_source_docs = level == Granularity::doc ? 1 : group_size;
      if (level == Granularity::doc) {
        unit.unit_id = doc_unit_id(group.front(), system);
        unit.group_key = group.front();
      } else {
        unit.unit_id = doc5_unit_id(gi, system);
        unit.group_key = "g" + std::to_string(gi);
      }
      out.units.push_back(std::move(unit));
    }
  }
  return out;
}

StatsTable corpus_stats(const std::vector<EvalUnit>& units,
                        const TokenCounter& counter) {
  StatsTable table;
  std::map<Granularity, std::int64_t> token_sums;
  for (const EvalUnit& unit : units) {
    table[unit.granularity].count += 1;
    token_sums[unit.granularity] += counter(unit.src) + counter(unit.tgt);
  }
  for (auto& [g, stats] : table) {
    if (stats.count > 0)
      stats.mean_tokens = static_cast<double>(token_sums[g]) /
                          static_cast<double>(stats.count);
  }
  return table;
}

std::string seg_unit_id(const std::string& doc_id, int seg_index,
                        const std::string& system_id) {
  return "seg:" + doc_id + ":" + std::to_string(seg_index) + ":" + system_id;
}

EvalUnit focus_subunit(const EvalUnit& unit, std::size_t part_index) {
  if (part_index >= unit.parts.size())
    throw MqmError("focus index " + std::to_string(part_index) +
                   " out of range for unit " + unit.unit_id + " with " +
                   std::to_string(unit.parts.size()) + " parts");
  const UnitPart& part = unit.parts[part_index];
  if (part.tgt_offset + part.tgt_len > unit.tgt.size() ||
      part.src_offset + part.src_len > unit.src.size())
    throw MqmError("part offsets out of range in unit " + unit.unit_id);

  EvalUnit sub;
  sub.unit_id = seg_unit_id(part.doc_id, part.seg_index, unit.system_id);
  sub.granularity = Granularity::seg;
  sub.system_id = unit.system_id;
  sub.src = unit.src.substr(part.src_offset, part.src_len);
  sub.tgt = unit.tgt.substr(part.tgt_offset, part.tgt_len);
  UnitPart whole = part;
  whole.src_offset = 0;
  whole.tgt_offset = 0;
  sub.parts.push_back(whole);
  sub.n_source_docs = 1;
  sub.group_key = part.doc_id;

  // A zero-width span on a shared boundary belongs to the earliest
  // containing part, so each merged span is claimed exactly once.
  auto owner_part = [&](const GoldSpan& span) -> std::size_t {
    for (std::size_t i = 0; i < unit.parts.size(); ++i) {
      const UnitPart& p = unit.parts[i];
      if (span.start >= p.tgt_offset && span.end <= p.tgt_offset + p.tgt_len)
        return i;
    }
    return unit.parts.size();
  };
  for (const GoldSpan& span : unit.gold) {
    if (owner_part(span) != part_index) continue;
    GoldSpan rebased = span;
    rebased.start -= part.tgt_offset;
    rebased.end -= part.tgt_offset;
    sub.gold.push_back(rebased);
  }
  return sub;
}

}  // namespace mqmeval::corpus

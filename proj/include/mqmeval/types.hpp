#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mqmeval/util.hpp"

namespace mqmeval {

enum class Severity { minor, major, critical };
enum class Granularity { seg, doc, doc5 };

const char* to_string(Severity s);
const char* to_string(Granularity g);
std::optional<Severity> severity_from_string(std::string_view s);
std::optional<Granularity> granularity_from_string(std::string_view s);

// One annotated error in a translation. Offsets are character (byte)
// positions into the translation string; a zero-width span (start == end)
// marks an omission.
struct GoldSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  Severity severity = Severity::minor;
  std::string category;
  bool is_omission = false;

  bool operator==(const GoldSpan&) const = default;
};

// One shared-task segment: a source sentence (or a few), per-system
// translations and per-system gold annotations.
struct Segment {
  std::string doc_id;
  int seg_index = 0;  // contiguous 0..n-1 within doc_id
  std::string src;
  std::map<std::string, std::string> translations;          // system -> tgt
  std::map<std::string, std::vector<GoldSpan>> gold;        // system -> spans
};

// Slice of an EvalUnit covered by one original segment.
struct UnitPart {
  std::string doc_id;
  int seg_index = 0;
  std::size_t src_offset = 0;
  std::size_t src_len = 0;
  std::size_t tgt_offset = 0;
  std::size_t tgt_len = 0;
};

// One scoreable item at some granularity. src/tgt are the (possibly
// concatenated) texts; parts record where each original segment lives so
// the unit can be sliced back, and gold offsets are rebased into tgt.
struct EvalUnit {
  std::string unit_id;
  Granularity granularity = Granularity::seg;
  std::string system_id;
  std::string src;
  std::string tgt;
  std::vector<UnitPart> parts;
  std::vector<GoldSpan> gold;
  int n_source_docs = 1;  // 1 for seg/doc, group size for doc5
  // Grouping key for per-document reporting: the doc_id for seg/doc units,
  // the group id for doc5 units.
  std::string group_key;
};

}  // namespace mqmeval

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mqmeval/prompting.hpp"
#include "mqmeval/types.hpp"

namespace mqmeval::ftexport {

struct FtMessage {
  std::string role;
  std::string content;
};

// One chat fine-tuning example: system instruction + schema, the rendered
// input block as the user turn, and the serialized gold annotation as the
// assistant turn.
struct FtExample {
  std::array<FtMessage, 3> messages;
  Granularity granularity = Granularity::seg;
};

struct FtStats {
  std::map<Granularity, std::size_t> counts;
  std::size_t skipped = 0;  // units whose gold could not be serialized
  std::string epochs_note;
};

struct FtExport {
  std::vector<FtExample> examples;
  FtStats stats;
};

// Builds fine-tuning data at all three granularities from a training
// corpus: one example per (unit, system) with the gold spans as the
// assistant answer. Assistant answers carry no explanations and no
// quality_score; every answer re-parses cleanly under the response schema.
FtExport export_ft(const std::vector<Segment>& train_segments, int group_size,
                   std::uint64_t seed, const std::string& epochs_note,
                   const std::string& src_lang = "English",
                   const std::string& tgt_lang = "German",
                   const std::string& joiner = "\n");

// Builds a GMICL demonstration pool from the same corpus: pool entries at
// all three granularities with the serialized gold answer and token length.
std::vector<prompting::Demonstration> build_demo_pool(
    const std::vector<Segment>& train_segments, int group_size,
    std::uint64_t seed, const TokenCounter& counter,
    const std::string& src_lang = "English",
    const std::string& tgt_lang = "German", const std::string& joiner = "\n");

}  // namespace mqmeval::ftexport

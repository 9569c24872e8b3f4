#include "mqmeval/ftexport.hpp"

#include "mqmeval/corpus.hpp"
#include "mqmeval/parsing.hpp"
#include "mqmeval/scoring.hpp"

namespace mqmeval::ftexport {

namespace {

std::vector<EvalUnit> all_granularity_units(const std::vector<Segment>& segments,
                                            int group_size, std::uint64_t seed,
                                            const std::string& joiner) {
  std::vector<EvalUnit> units;
  for (Granularity level :
       {Granularity::seg, Granularity::doc, Granularity::doc5}) {
    auto build = corpus::build_granularity(segments, level, group_size, seed, joiner);
    units.insert(units.end(), std::make_move_iterator(build.units.begin()),
                 std::make_move_iterator(build.units.end()));
  }
  return units;
}

std::string user_block(const EvalUnit& unit, const std::string& src_lang,
                       const std::string& tgt_lang) {
  return "Please score the following input\n<input>\n<source_language>" +
         src_lang + "</source_language>\n<source>" + unit.src +
         "</source>\n<target_language>" + tgt_lang +
         "</target_language>\n<translation>" + unit.tgt +
         "</translation>\n</input>\n\n"
         "Please respond in JSON without any introduction or explanation. "
         "Only the JSON response is required.\n\nMQM:";
}

// Gold answer without explanations; the response must re-parse cleanly.
std::string gold_answer(const EvalUnit& unit) {
  auto annotations = scoring::gold_as_annotations(unit);
  for (auto& a : annotations) a.explanation.reset();
  return parsing::serialize_response(annotations);
}

}  // namespace

FtExport export_ft(const std::vector<Segment>& train_segments, int group_size,
                   std::uint64_t seed, const std::string& epochs_note,
                   const std::string& src_lang, const std::string& tgt_lang,
                   const std::string& joiner) {
  FtExport out;
  out.stats.epochs_note = epochs_note;
  out.stats.counts[Granularity::seg] = 0;
  out.stats.counts[Granularity::doc] = 0;
  out.stats.counts[Granularity::doc5] = 0;

  // The instruction and schema match the single-pass evaluation prompt,
  // minus demonstrations. Gold answers carry no explanations even though
  // inference-time prompts request them; the training data simply has none.
  const std::string system_prompt = prompting::instruction_with_schema(true, false);

  for (const EvalUnit& unit :
       all_granularity_units(train_segments, group_size, seed, joiner)) {
    std::string answer;
    try {
      answer = gold_answer(unit);
    } catch (const MqmError&) {
      ++out.stats.skipped;
      continue;
    }
    FtExample example;
    example.granularity = unit.granularity;
    example.messages[0] = {"system", system_prompt};
    example.messages[1] = {"user", user_block(unit, src_lang, tgt_lang)};
    example.messages[2] = {"assistant", std::move(answer)};
    out.stats.counts[unit.granularity] += 1;
    out.examples.push_back(std::move(example));
  }
  return out;
}

std::vector<prompting::Demonstration> build_demo_pool(
    const std::vector<Segment>& train_segments, int group_size,
    std::uint64_t seed, const TokenCounter& counter,
    const std::string& src_lang, const std::string& tgt_lang,
    const std::string& joiner) {
  std::vector<prompting::Demonstration> pool;
  for (const EvalUnit& unit :
       all_granularity_units(train_segments, group_size, seed, joiner)) {
    prompting::Demonstration demo;
    demo.src = unit.src;
    demo.tgt = unit.tgt;
    demo.gold_response = gold_answer(unit);
    demo.granularity = unit.granularity;
    demo.token_len = counter(unit.src) + counter(unit.tgt);
    demo.src_lang = src_lang;
    demo.tgt_lang = tgt_lang;
    pool.push_back(std::move(demo));
  }
  return pool;
}

}  // namespace mqmeval::ftexport

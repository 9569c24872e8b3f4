#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mqmeval/parsing.hpp"
#include "mqmeval/types.hpp"

namespace mqmeval::prompting {

enum class Family { gemba, fsp, gmicl };

const char* to_string(Family f);
std::optional<Family> family_from_string(std::string_view s);

struct PromptOptions {
  Family family = Family::gemba;
  int n_shots = 0;  // 0 or 3 for gemba/fsp; 5 for gmicl
  bool with_explanations = true;
  bool with_da = false;
  std::string src_lang;
  std::string tgt_lang;
  int max_output_tokens = 0;  // 0: 4096 for seg/doc, 8192 for doc5
};

struct Decoding {
  double temperature = 0.0;
  int max_output_tokens = 4096;

  bool operator==(const Decoding&) const = default;
};

// A fully rendered request. The full prompt is shared_prefix + suffix;
// bundles rendered for the same document context share the prefix (and
// therefore the cache_key) so provider-side prompt caching applies.
struct PromptBundle {
  std::string shared_prefix;
  std::string suffix;
  Decoding decoding;
  std::string cache_key;  // stable hash of shared_prefix
  std::string unit_ref;   // unit (and focus) the bundle was rendered for

  std::string full_prompt() const { return shared_prefix + suffix; }
};

// A pool entry for granularity-matched in-context learning. gold_response
// is a serialized MQM JSON answer (no explanations, no quality_score) and
// must parse cleanly. Languages may be empty, in which case the rendering
// options supply them.
struct Demonstration {
  std::string src;
  std::string tgt;
  std::string gold_response;
  Granularity granularity = Granularity::seg;
  std::int64_t token_len = 0;
  std::string src_lang;
  std::string tgt_lang;
};

// Single-pass MQM prompt, optionally with the three fixed demonstrations
// and with explanation / quality_score toggles applied to the schema block
// and demonstration answers.
PromptBundle render_gemba(const EvalUnit& unit, const PromptOptions& opts);

// Focus-segment prompt: the prefix carries the full source and translation
// documents, the suffix carries only the focus segment. All bundles for one
// document share a single cache_key.
PromptBundle render_fsp(const EvalUnit& doc_unit, std::size_t focus_index,
                        const PromptOptions& opts);

// Draws k demonstrations uniformly without replacement (seeded) from the
// pool entries matching the unit's granularity.
std::vector<Demonstration> select_gm_demos(const std::vector<Demonstration>& pool,
                                           const EvalUnit& unit, std::size_t k,
                                           std::uint64_t seed);

// Granularity-matched 5-shot prompt. Demonstration answers carry plain
// error lists while the instruction asks for explanations and a
// quality_score on the scored input.
PromptBundle render_gmicl(const EvalUnit& unit,
                          const std::vector<Demonstration>& demos,
                          const PromptOptions& opts);

// The schema block as rendered into prompts. Exposed for tests.
std::string render_schema_block(bool with_explanations, bool with_da);

// Single-pass instruction followed by the schema section, exactly as
// render_gemba lays them out. Used as the system turn of fine-tuning data.
std::string instruction_with_schema(bool with_explanations, bool with_da);

struct FixedDemo {
  std::string src_lang;
  std::string src;
  std::string tgt_lang;
  std::string tgt;
  std::vector<parsing::ErrorAnnotation> errors;
};

// The three built-in segment-level demonstrations used by 3-shot prompts.
const std::vector<FixedDemo>& fixed_demonstrations();

int default_max_output_tokens(Granularity g);

}  // namespace mqmeval::prompting

#include "goldens.hpp"

#include "mqmeval/parsing.hpp"

namespace mqmeval::testsupport {

namespace {

using prompting::Family;
using prompting::PromptOptions;

PromptOptions sentinel_options(Family family, int shots, bool explanations,
                               bool da) {
  PromptOptions opts;
  opts.family = family;
  opts.n_shots = shots;
  opts.with_explanations = explanations;
  opts.with_da = da;
  opts.src_lang = "{{ src_lang }}";
  opts.tgt_lang = "{{ tgt_lang }}";
  return opts;
}

std::vector<prompting::Demonstration> sentinel_demos() {
  std::vector<prompting::Demonstration> demos;
  for (int i = 1; i <= 5; ++i) {
    prompting::Demonstration demo;
    std::string n = std::to_string(i);
    demo.src = "{{ demo" + n + "_src }}";
    demo.tgt = "{{ demo" + n + "_tgt }}";
    parsing::ErrorAnnotation error;
    error.span_text = "{{ demo" + n + "_error_span }}";
    error.category = parsing::Category::accuracy;
    error.error_type = "mistranslation";
    error.severity = Severity::major;
    demo.gold_response = parsing::serialize_response({error});
    demo.granularity = Granularity::seg;
    demos.push_back(std::move(demo));
  }
  return demos;
}

}  // namespace

EvalUnit sentinel_unit() {
  EvalUnit unit;
  unit.unit_id = "golden:unit";
  unit.granularity = Granularity::seg;
  unit.system_id = "sys";
  unit.src = "{{ src }}";
  unit.tgt = "{{ output_seq }}";
  UnitPart part;
  part.doc_id = "gdoc";
  part.seg_index = 0;
  part.src_offset = 0;
  part.src_len = unit.src.size();
  part.tgt_offset = 0;
  part.tgt_len = unit.tgt.size();
  unit.parts.push_back(part);
  unit.n_source_docs = 1;
  unit.group_key = "gdoc";
  return unit;
}

std::vector<GoldenPrompt> golden_prompts() {
  EvalUnit unit = sentinel_unit();
  std::vector<GoldenPrompt> out;

  out.push_back({"gemba_3shot_explanations.txt",
                 prompting::render_gemba(
                     unit, sentinel_options(Family::gemba, 3, true, false))
                     .full_prompt()});
  out.push_back({"gemba_0shot.txt",
                 prompting::render_gemba(
                     unit, sentinel_options(Family::gemba, 0, true, false))
                     .full_prompt()});
  out.push_back({"gemba_3shot_noexpl.txt",
                 prompting::render_gemba(
                     unit, sentinel_options(Family::gemba, 3, false, false))
                     .full_prompt()});
  out.push_back({"gemba_3shot_da.txt",
                 prompting::render_gemba(
                     unit, sentinel_options(Family::gemba, 3, true, true))
                     .full_prompt()});
  out.push_back({"fsp.txt",
                 prompting::render_fsp(
                     unit, 0, sentinel_options(Family::fsp, 0, true, false))
                     .full_prompt()});
  out.push_back({"gmicl5.txt",
                 prompting::render_gmicl(
                     unit, sentinel_demos(),
                     sentinel_options(Family::gmicl, 5, true, true))
                     .full_prompt()});
  return out;
}

}  // namespace mqmeval::testsupport

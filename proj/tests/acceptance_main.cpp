// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Exit status is the number of failed criteria. Data-gated checks (real
// shared-task corpora) run only when the corresponding environment
// variables point at local data and are reported as skipped otherwise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "mqmeval/corpus.hpp"
#include "mqmeval/ftexport.hpp"
#include "mqmeval/jsonio.hpp"
#include "mqmeval/metaeval.hpp"
#include "mqmeval/runner.hpp"
#include "support/goldens.hpp"
#include "support/handcases.hpp"
#include "support/synthetic.hpp"

using namespace mqmeval;
using namespace mqmeval::testsupport;
namespace fs = std::filesystem;

namespace {

struct Checker {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void require(bool condition, const std::string& message) {
    if (!condition) failures.push_back(message);
  }
  void note(const std::string& message) { notes.push_back(message); }
};

// ---------------------------------------------------------------------------
// Criterion 1: pairwise accuracy equals an independent brute-force
// enumerator on 200 random 6-system instances including forced ties.
// ---------------------------------------------------------------------------

std::optional<double> brute_force_pairwise(
    const std::map<std::string, double>& metric,
    const std::map<std::string, double>& gold) {
  std::vector<std::string> systems;
  for (const auto& [name, score] : gold) systems.push_back(name);
  int correct = 0, total = 0;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    for (std::size_t j = i + 1; j < systems.size(); ++j) {
      double g1 = gold.at(systems[i]), g2 = gold.at(systems[j]);
      if (g1 == g2) continue;
      ++total;
      double m1 = metric.at(systems[i]), m2 = metric.at(systems[j]);
      bool gold_first_better = g1 > g2;
      bool metric_first_better = m1 > m2;
      if (m1 != m2 && gold_first_better == metric_first_better) ++correct;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / total;
}

void criterion_pairwise_oracle(Checker& check) {
  SplitMix64 rng(20240917);
  int compared = 0, errored = 0;
  for (int instance = 0; instance < 200; ++instance) {
    std::map<std::string, double> gold, metric;
    for (int s = 0; s < 6; ++s) {
      std::string name = "sys" + std::to_string(s);
      // Small integer ranges force plenty of ties on both sides.
      gold[name] = -static_cast<double>(rng.bounded(4));
      metric[name] = -static_cast<double>(rng.bounded(8)) / 2.0;
    }
    if (instance == 0) metric = gold;                       // identity
    if (instance == 1)
      for (auto& [name, score] : metric) score = -gold[name];  // reversal
    if (instance == 2)
      for (auto& [name, score] : gold) score = -1.0;        // all tied

    auto expected = brute_force_pairwise(metric, gold);
    if (!expected) {
      bool threw = false;
      try {
        metaeval::pairwise_accuracy(metric, gold);
      } catch (const MqmError&) {
        threw = true;
      }
      check.require(threw, "instance " + std::to_string(instance) +
                               ": expected the all-tied error");
      ++errored;
      continue;
    }
    double actual = metaeval::pairwise_accuracy(metric, gold);
    check.require(actual == *expected,
                  "instance " + std::to_string(instance) + ": got " +
                      std::to_string(actual) + ", brute force says " +
                      std::to_string(*expected));
    ++compared;
  }
  check.note(std::to_string(compared) + " instances compared, " +
             std::to_string(errored) + " all-tied");
}

// ---------------------------------------------------------------------------
// Criterion 2: hand-worked character-PRF suite, exact.
// ---------------------------------------------------------------------------

void criterion_char_f1_handworked(Checker& check) {
  for (const HandCase& hc : hand_cases()) {
    auto located = metaeval::localize_spans(to_annotations(hc.preds), hc.tgt,
                                            hc.gold);
    auto prf = metaeval::char_prf(located, hc.gold, hc.tgt.size());
    auto fail = [&](const std::string& what) {
      check.require(false, hc.name + ": " + what);
    };
    if (prf.credit_p != hc.credit_p) fail("precision credit mismatch");
    if (prf.pred_chars != hc.pred_chars) fail("pred char count mismatch");
    if (prf.credit_r != hc.credit_r) fail("recall credit mismatch");
    if (prf.gold_chars != hc.gold_chars) fail("gold char count mismatch");
    double expected_p =
        hc.pred_chars ? hc.credit_p / static_cast<double>(hc.pred_chars) : 0.0;
    double expected_r =
        hc.gold_chars ? hc.credit_r / static_cast<double>(hc.gold_chars) : 0.0;
    double expected_f1 =
        expected_p + expected_r > 0
            ? 2 * expected_p * expected_r / (expected_p + expected_r)
            : 0.0;
    if (prf.precision != expected_p) fail("precision mismatch");
    if (prf.recall != expected_r) fail("recall mismatch");
    if (prf.f1 != expected_f1) fail("f1 mismatch");
  }
  check.note(std::to_string(hand_cases().size()) + " hand-worked cases");
}

// ---------------------------------------------------------------------------
// Shared pipeline helpers.
// ---------------------------------------------------------------------------

struct PipelineRun {
  std::string dir;
  runner::ScoreResult scored;
  double mean_spans_per_doc = 0.0;
  std::optional<double> accuracy;
};

std::string build_units(const TempDir& tmp, const std::string& segments_path,
                        Granularity level) {
  std::string path = tmp.file("units-" + std::string(to_string(level)) + ".jsonl");
  runner::build_units_file(segments_path, level, 5, 7, "\n", path);
  return path;
}

PipelineRun run_pipeline(const TempDir& tmp, const std::string& units_path,
                         const std::string& tag, prompting::Family family,
                         const std::string& backend,
                         const scoring::SeverityWeights& weights,
                         std::uint64_t seed) {
  runner::RunConfig cfg;
  cfg.units_path = units_path;
  cfg.out_dir = tmp.file("run-" + tag);
  cfg.prompt = family;
  cfg.backend = backend;
  cfg.weights = weights;
  cfg.seed = seed;
  cfg.concurrency = 8;
  runner::run_eval(cfg);

  PipelineRun out;
  out.dir = cfg.out_dir;
  out.scored = runner::score_run(cfg.out_dir);

  auto units = jsonio::read_units(units_path);
  std::map<std::string, const EvalUnit*> by_id;
  for (const EvalUnit& unit : units) by_id[unit.unit_id] = &unit;
  std::vector<metaeval::SpanCountRow> rows;
  for (const auto& s : out.scored.scores) {
    if (s.method != scoring::ScoreMethod::mqm_weighted) continue;
    const EvalUnit* unit = by_id.at(s.unit_id);
    metaeval::SpanCountRow row;
    row.method = tag;
    row.granularity = s.granularity;
    row.system_id = s.system_id;
    row.doc_key = unit->group_key;
    row.n_errors = s.n_errors;
    row.n_source_docs = unit->n_source_docs;
    rows.push_back(std::move(row));
  }
  auto cells = metaeval::span_count_report(rows);
  if (cells.size() == 1) out.mean_spans_per_doc = cells[0].mean_spans_per_doc;

  auto rank = runner::rank_scores(out.scored.scores, units, weights,
                                  scoring::ScoreMethod::mqm_weighted);
  out.accuracy = rank.pairwise_accuracy;
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 3: FSP + oracle is length-invariant and reproduces gold scores.
// ---------------------------------------------------------------------------

void criterion_fsp_oracle_invariance(Checker& check) {
  TempDir tmp("acc-fsp-oracle");
  auto spec = default_spec_3sys();  // 50 docs, 3-8 segments, 3 systems
  std::string segments_path = tmp.file("segments.jsonl");
  jsonio::write_segments(segments_path, "seg-acc", make_synthetic_corpus(spec));

  scoring::SeverityWeights weights;
  std::map<Granularity, double> means;
  for (Granularity level :
       {Granularity::seg, Granularity::doc, Granularity::doc5}) {
    std::string units_path = build_units(tmp, segments_path, level);
    auto run = run_pipeline(tmp, units_path,
                            "fsp-oracle-" + std::string(to_string(level)),
                            prompting::Family::fsp, "oracle", weights, 3);
    means[level] = run.mean_spans_per_doc;

    if (level == Granularity::doc) {
      auto units = jsonio::read_units(units_path);
      std::map<std::string, scoring::UnitScore> rows;
      for (const auto& s : run.scored.scores)
        if (s.method == scoring::ScoreMethod::mqm_weighted) rows[s.unit_id] = s;
      for (const EvalUnit& unit : units) {
        auto gold =
            scoring::unit_mqm_score(scoring::gold_as_annotations(unit), weights);
        const auto& row = rows.at(unit.unit_id);
        check.require(row.score == gold.score && row.n_errors == gold.n_errors,
                      "doc unit " + unit.unit_id +
                          " score differs from its gold-derived score");
      }
    }
  }
  check.require(means[Granularity::seg] == means[Granularity::doc],
                "seg and doc normalized span counts differ");
  check.require(means[Granularity::doc] == means[Granularity::doc5],
                "doc and doc5 normalized span counts differ");
  std::ostringstream note;
  note << "normalized spans per doc: " << means[Granularity::seg] << " at all "
       << "granularities";
  check.note(note.str());
}

// ---------------------------------------------------------------------------
// Criterion 4: the simulator reproduces the length bias and FSP removes it.
// Expected values are pinned in tests/support/lengthbias_expected.json,
// produced by a committed Monte-Carlo oracle run (set
// MQMEVAL_UPDATE_EXPECTED=1 to regenerate after an intentional change).
// ---------------------------------------------------------------------------

void criterion_length_bias(Checker& check) {
  TempDir tmp("acc-length-bias");
  auto spec = benchmark_spec_6sys();
  std::string segments_path = tmp.file("segments.jsonl");
  jsonio::write_segments(segments_path, "seg-bench", make_synthetic_corpus(spec));

  // The per-unit cap is disabled for this benchmark: five-document units
  // carry enough gold spans that a cap would saturate the gold scores and
  // compress the very differences the ranking is measured against.
  scoring::SeverityWeights weights;
  weights.per_unit_cap.reset();
  const std::uint64_t sim_seed = 16;

  std::map<Granularity, std::string> units_paths;
  std::map<Granularity, double> gemba_means, fsp_means, analytic;
  std::map<Granularity, std::optional<double>> gemba_accuracy;
  backends::BiasParams defaults;
  defaults.seed = sim_seed;

  for (Granularity level :
       {Granularity::seg, Granularity::doc, Granularity::doc5}) {
    std::string units_path = build_units(tmp, segments_path, level);
    units_paths[level] = units_path;
    auto gemba = run_pipeline(tmp, units_path,
                              "gemba-sim-" + std::string(to_string(level)),
                              prompting::Family::gemba, "sim", weights, sim_seed);
    gemba_means[level] = gemba.mean_spans_per_doc;
    gemba_accuracy[level] = gemba.accuracy;
    auto fsp = run_pipeline(tmp, units_path,
                            "fsp-sim-" + std::string(to_string(level)),
                            prompting::Family::fsp, "sim", weights, sim_seed);
    fsp_means[level] = fsp.mean_spans_per_doc;
    analytic[level] = expected_mean_spans_per_doc(
        jsonio::read_units(units_path), defaults, whitespace_counter());
  }

  // Qualitative shape: single-pass counts collapse with length, FSP holds.
  check.require(gemba_means[Granularity::seg] > gemba_means[Granularity::doc] &&
                    gemba_means[Granularity::doc] > gemba_means[Granularity::doc5],
                "single-pass span counts are not strictly decreasing");
  double fsp_min = std::min({fsp_means[Granularity::seg],
                             fsp_means[Granularity::doc],
                             fsp_means[Granularity::doc5]});
  double fsp_max = std::max({fsp_means[Granularity::seg],
                             fsp_means[Granularity::doc],
                             fsp_means[Granularity::doc5]});
  check.require(fsp_max <= fsp_min * 1.05,
                "fsp span counts vary by more than 5% across granularities");

  check.require(gemba_accuracy[Granularity::seg].has_value() &&
                    gemba_accuracy[Granularity::doc5].has_value(),
                "pairwise accuracy was not computable");
  if (gemba_accuracy[Granularity::seg] && gemba_accuracy[Granularity::doc5]) {
    double drop = *gemba_accuracy[Granularity::seg] -
                  *gemba_accuracy[Granularity::doc5];
    check.require(drop >= 0.05,
                  "doc5 accuracy dropped by only " + std::to_string(drop));
    std::ostringstream note;
    note << "acc seg=" << *gemba_accuracy[Granularity::seg]
         << " doc5=" << *gemba_accuracy[Granularity::doc5] << "; spans/doc "
         << gemba_means[Granularity::seg] << "/" << gemba_means[Granularity::doc]
         << "/" << gemba_means[Granularity::doc5];
    check.note(note.str());
  }

  // The realized counts must sit near the analytic expectation of the
  // emission model (the Monte-Carlo oracle for this criterion).
  for (Granularity level :
       {Granularity::seg, Granularity::doc, Granularity::doc5}) {
    double rel = std::abs(gemba_means[level] - analytic[level]) /
                 analytic[level];
    check.require(rel < 0.10, "realized counts at " +
                                  std::string(to_string(level)) +
                                  " deviate from the analytic expectation by " +
                                  std::to_string(rel));
  }

  // Pinned values from the committed oracle run (exact: the pipeline is
  // deterministic under fixed seeds).
  fs::path expected_path =
      fs::path(MQMEVAL_REPO_DIR) / "tests" / "support" /
      "lengthbias_expected.json";
  jsonio::ordered_json expected;
  expected["gemba_spans_per_doc"] = {
      {"seg", gemba_means[Granularity::seg]},
      {"doc", gemba_means[Granularity::doc]},
      {"doc5", gemba_means[Granularity::doc5]}};
  expected["fsp_spans_per_doc"] = {{"seg", fsp_means[Granularity::seg]},
                                   {"doc", fsp_means[Granularity::doc]},
                                   {"doc5", fsp_means[Granularity::doc5]}};
  expected["gemba_accuracy"] = {
      {"seg", *gemba_accuracy[Granularity::seg]},
      {"doc5", *gemba_accuracy[Granularity::doc5]}};
  if (std::getenv("MQMEVAL_UPDATE_EXPECTED")) {
    write_text_file(expected_path.string(), expected.dump(2) + "\n");
    check.note("regenerated " + expected_path.string());
    return;
  }
  if (!fs::exists(expected_path)) {
    check.require(false, "missing pinned oracle values at " +
                             expected_path.string());
    return;
  }
  auto pinned = jsonio::ordered_json::parse(read_text_file(expected_path.string()));
  auto close = [](double a, double b) { return std::abs(a - b) < 1e-9; };
  for (const char* level : {"seg", "doc", "doc5"}) {
    check.require(close(pinned["gemba_spans_per_doc"][level].get<double>(),
                        expected["gemba_spans_per_doc"][level].get<double>()),
                  std::string("pinned gemba count mismatch at ") + level);
    check.require(close(pinned["fsp_spans_per_doc"][level].get<double>(),
                        expected["fsp_spans_per_doc"][level].get<double>()),
                  std::string("pinned fsp count mismatch at ") + level);
  }
  for (const char* level : {"seg", "doc5"})
    check.require(close(pinned["gemba_accuracy"][level].get<double>(),
                        expected["gemba_accuracy"][level].get<double>()),
                  std::string("pinned accuracy mismatch at ") + level);
}

// ---------------------------------------------------------------------------
// Criterion 5: gold conservation and byte-exact round-trip slicing.
// ---------------------------------------------------------------------------

void criterion_gold_conservation(Checker& check) {
  auto segments = make_synthetic_corpus(default_spec_3sys());
  std::map<std::pair<std::string, int>, const Segment*> by_key;
  for (const Segment& seg : segments) by_key[{seg.doc_id, seg.seg_index}] = &seg;

  for (Granularity level : {Granularity::doc, Granularity::doc5}) {
    auto build = corpus::build_granularity(segments, level, 5, 7);
    check.require(!build.units.empty(), "no units built");
    for (const EvalUnit& unit : build.units) {
      std::size_t expected_count = 0;
      std::multiset<int> expected_sev, actual_sev;
      for (const UnitPart& part : unit.parts) {
        const Segment* seg = by_key.at({part.doc_id, part.seg_index});
        if (unit.tgt.substr(part.tgt_offset, part.tgt_len) !=
            seg->translations.at(unit.system_id)) {
          check.require(false, "round-trip slice mismatch in " + unit.unit_id);
          continue;
        }
        auto g = seg->gold.find(unit.system_id);
        if (g == seg->gold.end()) continue;
        expected_count += g->second.size();
        for (const GoldSpan& span : g->second)
          expected_sev.insert(static_cast<int>(span.severity));
      }
      for (const GoldSpan& span : unit.gold)
        actual_sev.insert(static_cast<int>(span.severity));
      check.require(unit.gold.size() == expected_count,
                    "gold count not conserved in " + unit.unit_id);
      check.require(actual_sev == expected_sev,
                    "severity multiset not conserved in " + unit.unit_id);
    }
  }
}

// ---------------------------------------------------------------------------
// Criterion 6: byte-identical artifacts across identical mock runs.
// ---------------------------------------------------------------------------

void criterion_determinism(Checker& check) {
  TempDir tmp("acc-determinism");
  std::string segments_path = tmp.file("segments.jsonl");
  jsonio::write_segments(segments_path, "seg-det",
                         make_synthetic_corpus(default_spec_3sys()));
  std::string units_path = build_units(tmp, segments_path, Granularity::doc);

  auto run_once = [&](const std::string& out) {
    runner::RunConfig cfg;
    cfg.units_path = units_path;
    cfg.out_dir = out;
    cfg.prompt = prompting::Family::fsp;
    cfg.backend = "sim";
    cfg.seed = 11;
    cfg.concurrency = 8;
    runner::run_eval(cfg);
    runner::score_run(out);
    runner::ReportOptions opts;
    opts.run_dirs = {out};
    opts.out_dir = out;
    runner::report_runs(opts);
  };
  run_once(tmp.file("r1"));
  run_once(tmp.file("r2"));

  auto same = [&](const std::string& name) {
    return read_text_file(tmp.file("r1/" + name)) ==
           read_text_file(tmp.file("r2/" + name));
  };
  check.require(same("scores.jsonl"), "scores.jsonl differs");
  check.require(same("report.json"), "report.json differs");
  check.require(same("report.csv"), "report.csv differs");
  auto m1 = jsonio::read_manifest(tmp.file("r1/manifest.json"));
  auto m2 = jsonio::read_manifest(tmp.file("r2/manifest.json"));
  check.require(jsonio::manifest_stable_dump(m1) ==
                    jsonio::manifest_stable_dump(m2),
                "manifests differ outside the volatile section");
}

// ---------------------------------------------------------------------------
// Criterion 7: golden prompt files and FSP prefix sharing.
// ---------------------------------------------------------------------------

void criterion_prompt_goldens(Checker& check) {
  fs::path golden_dir = fs::path(MQMEVAL_REPO_DIR) / "prompts" / "golden";
  for (const GoldenPrompt& prompt : golden_prompts()) {
    fs::path path = golden_dir / prompt.name;
    if (!fs::exists(path)) {
      check.require(false, "missing golden file " + path.string());
      continue;
    }
    check.require(read_text_file(path.string()) == prompt.content,
                  prompt.name + " differs from the rendered prompt");
  }

  // One cache key per document across FSP foci.
  auto segments = make_synthetic_corpus(default_spec_3sys());
  auto build = corpus::build_granularity(segments, Granularity::doc, 5, 7);
  prompting::PromptOptions opts;
  opts.family = prompting::Family::fsp;
  opts.src_lang = "English";
  opts.tgt_lang = "German";
  const EvalUnit* multi = nullptr;
  for (const EvalUnit& unit : build.units)
    if (unit.parts.size() >= 3) {
      multi = &unit;
      break;
    }
  check.require(multi != nullptr, "no multi-segment document found");
  if (multi) {
    std::set<std::string> keys;
    for (std::size_t f = 0; f < multi->parts.size(); ++f)
      keys.insert(prompting::render_fsp(*multi, f, opts).cache_key);
    check.require(keys.size() == 1,
                  "fsp bundles of one document produced " +
                      std::to_string(keys.size()) + " cache keys");
  }
}

// ---------------------------------------------------------------------------
// Criterion 8: fine-tuning export round trip (plus gated real-data counts).
// ---------------------------------------------------------------------------

void criterion_ftexport(Checker& check) {
  // Toy corpus arithmetic: 2 docs x 2 segments x 1 system.
  std::vector<Segment> toy;
  for (int d = 0; d < 2; ++d) {
    for (int s = 0; s < 2; ++s) {
      Segment seg;
      seg.doc_id = "doc" + std::to_string(d);
      seg.seg_index = s;
      seg.src = "src " + std::to_string(s);
      seg.translations["sysA"] = "tgt " + std::to_string(s);
      toy.push_back(std::move(seg));
    }
  }
  auto toy_export = ftexport::export_ft(toy, 5, 0, "");
  check.require(toy_export.stats.counts.at(Granularity::seg) == 4,
                "toy seg count is not 4");
  check.require(toy_export.stats.counts.at(Granularity::doc) == 2,
                "toy doc count is not 2");
  check.require(toy_export.stats.counts.at(Granularity::doc5) == 0,
                "toy doc5 count is not 0");

  auto segments = make_synthetic_corpus(default_spec_3sys());
  auto result = ftexport::export_ft(segments, 5, 7, "");
  check.require(!result.examples.empty(), "no examples exported");
  for (const auto& example : result.examples) {
    auto parsed = parsing::parse_mqm_response(example.messages[2].content, false);
    if (parsed.parse_status != parsing::ParseStatus::clean ||
        parsed.dropped_annotations != 0) {
      check.require(false, "an assistant turn did not re-parse cleanly");
      break;
    }
  }

  if (const char* wmt23 = std::getenv("MQMEVAL_WMT23_TSV")) {
    auto wmt = corpus::import_corpus(wmt23, corpus::CorpusFormat::wmt_tagged);
    auto full = ftexport::export_ft(wmt, 5, 7, "");
    check.require(full.stats.counts.at(Granularity::seg) == 35472,
                  "wmt23 seg count mismatch");
    check.require(full.stats.counts.at(Granularity::doc) == 6530,
                  "wmt23 doc count mismatch");
    check.require(full.stats.counts.at(Granularity::doc5) == 1305,
                  "wmt23 doc5 count mismatch");
    check.note("wmt23 corpus verified");
  } else {
    check.note("wmt23 corpus not present (set MQMEVAL_WMT23_TSV); skipped");
  }
}

// ---------------------------------------------------------------------------
// Criterion 9 (data-gated): corpus statistics on the real shared-task data.
// ---------------------------------------------------------------------------

void criterion_corpus_stats(Checker& check) {
  const char* data = std::getenv("MQMEVAL_WMT24_SEGMENTS");
  const char* tokenizer_cmd = std::getenv("MQMEVAL_TOKENIZER_CMD");
  if (!data || !tokenizer_cmd) {
    check.note(
        "wmt24 corpus or tokenizer not present (set MQMEVAL_WMT24_SEGMENTS "
        "and MQMEVAL_TOKENIZER_CMD); skipped");
    return;
  }
  // The tokenizer plugin is an external command reading text on stdin and
  // printing a token count.
  std::string command(tokenizer_cmd);
  TokenCounter counter = [command](std::string_view text) -> std::int64_t {
    TempDir io("tokenizer-io");
    write_text_file(io.file("in.txt"), text);
    std::string cmd = command + " < " + io.file("in.txt") + " > " +
                      io.file("out.txt");
    if (std::system(cmd.c_str()) != 0) throw MqmError("tokenizer failed");
    return std::stoll(read_text_file(io.file("out.txt")));
  };

  auto segments =
      corpus::import_corpus(data, corpus::CorpusFormat::canonical_jsonl);
  std::map<Granularity, double> expected = {{Granularity::seg, 102.5},
                                            {Granularity::doc, 506.9},
                                            {Granularity::doc5, 2712.5}};
  for (const auto& [level, mean] : expected) {
    auto build = corpus::build_granularity(segments, level, 5, 7);
    auto stats = corpus::corpus_stats(build.units, counter);
    double actual = stats.at(level).mean_tokens.value_or(0.0);
    check.require(std::abs(actual - mean) / mean <= 0.01,
                  std::string(to_string(level)) + " mean tokens " +
                      std::to_string(actual) + " not within 1% of " +
                      std::to_string(mean));
  }
}

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<void(Checker&)> fn;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "pairwise-accuracy-oracle-equivalence", 1.0, criterion_pairwise_oracle},
      {2, "char-f1-hand-worked-suite", 1.0, criterion_char_f1_handworked},
      {3, "fsp-oracle-length-invariance", 10.0, criterion_fsp_oracle_invariance},
      {4, "length-bias-reproduction", 60.0, criterion_length_bias},
      {5, "granularity-gold-conservation", 60.0, criterion_gold_conservation},
      {6, "pipeline-determinism", 60.0, criterion_determinism},
      {7, "prompt-golden-files", 10.0, criterion_prompt_goldens},
      {8, "ftexport-round-trip", 60.0, criterion_ftexport},
      {9, "corpus-stats-real-data", 600.0, criterion_corpus_stats},
  };

  int failed = 0;
  for (const Criterion& criterion : criteria) {
    Checker check;
    auto start = std::chrono::steady_clock::now();
    try {
      criterion.fn(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("unexpected exception: ") + e.what());
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed > criterion.time_limit_s)
      check.require(false, "exceeded the " +
                               std::to_string(criterion.time_limit_s) +
                               "s time limit (" + std::to_string(elapsed) + "s)");

    bool pass = check.failures.empty();
    if (!pass) ++failed;
    std::printf("[criterion %d] %-40s %s (%.3fs)", criterion.id,
                criterion.name.c_str(), pass ? "PASS" : "FAIL", elapsed);
    for (const std::string& note : check.notes)
      std::printf("  [%s]", note.c_str());
    std::printf("\n");
    for (const std::string& failure : check.failures)
      std::printf("    failure: %s\n", failure.c_str());
  }
  return failed;
}

#include "mqmeval/runner.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <set>
#include <sstream>

#include "mqmeval/parsing.hpp"

namespace mqmeval::runner {

namespace fs = std::filesystem;
using jsonio::ordered_json;

bool expects_da(prompting::Family family, bool da) {
  // The focus-segment and granularity-matched schemas always request a
  // quality_score; single-pass requests one only with DA enabled.
  return family != prompting::Family::gemba || da;
}

jsonio::ordered_json config_snapshot(const RunConfig& cfg,
                                     const std::string& granularity_label) {
  ordered_json j;
  j["units"] = cfg.units_path;
  j["granularity"] = granularity_label;
  j["prompt"] = prompting::to_string(cfg.prompt);
  j["shots"] = cfg.shots;
  j["explanations"] = cfg.explanations;
  j["da"] = cfg.da;
  j["backend"] = cfg.backend;
  j["model"] = cfg.model_id;
  if (cfg.backend == "sim") {
    ordered_json sim;
    sim["base_recall"] = cfg.sim.base_recall;
    sim["halflife_tokens"] = cfg.sim.halflife_tokens;
    sim["severity_noise"] = cfg.sim.severity_noise;
    j["sim"] = std::move(sim);
  }
  j["seed"] = cfg.seed;
  j["weights"] = jsonio::weights_to_json(cfg.weights);
  j["src_lang"] = cfg.src_lang;
  j["tgt_lang"] = cfg.tgt_lang;
  if (cfg.prompt == prompting::Family::gmicl)
    j["demo_pool"] = cfg.demo_pool_path;
  // Concurrency and rate limits are execution knobs: they never change
  // results, so they stay out of the snapshot and the run id.
  j["max_output_tokens"] = cfg.max_output_tokens;
  return j;
}

std::string run_id_for(const jsonio::ordered_json& snapshot) {
  return "run-" + fnv1a64_hex(snapshot.dump());
}

namespace {

struct RequestSpec {
  std::size_t unit_index = 0;
  int focus_index = -1;
  prompting::PromptBundle bundle;
};

prompting::PromptOptions options_for(const RunConfig& cfg) {
  prompting::PromptOptions opts;
  opts.family = cfg.prompt;
  opts.n_shots = cfg.shots;
  opts.with_explanations = cfg.explanations;
  opts.with_da = cfg.da;
  opts.src_lang = cfg.src_lang;
  opts.tgt_lang = cfg.tgt_lang;
  opts.max_output_tokens = cfg.max_output_tokens;
  return opts;
}

std::string granularity_label(const std::vector<EvalUnit>& units) {
  std::set<std::string> levels;
  for (const EvalUnit& unit : units) levels.insert(to_string(unit.granularity));
  if (levels.empty()) return "empty";
  if (levels.size() == 1) return *levels.begin();
  std::string out;
  for (const std::string& l : levels) {
    if (!out.empty()) out += "+";
    out += l;
  }
  return out;
}

}  // namespace

EvalResult run_eval(const RunConfig& cfg, backends::Transport transport) {
  if (cfg.out_dir.empty()) throw MqmError("eval requires an output directory");
  if (cfg.backend != "live" && cfg.backend != "oracle" && cfg.backend != "sim")
    throw MqmError("unknown backend '" + cfg.backend + "'");
  scoring::validate_weights(cfg.weights);

  ordered_json units_header;
  std::vector<EvalUnit> units = jsonio::read_units(cfg.units_path, &units_header);
  std::string level = granularity_label(units);

  prompting::PromptOptions opts = options_for(cfg);
  if (cfg.prompt == prompting::Family::gmicl && opts.n_shots == 0)
    opts.n_shots = 5;

  std::vector<prompting::Demonstration> pool;
  if (cfg.prompt == prompting::Family::gmicl) {
    if (cfg.demo_pool_path.empty())
      throw MqmError("gmicl prompting requires a demo pool file");
    pool = jsonio::read_demo_pool(cfg.demo_pool_path);
  }

  // Render every request up front; rendering is pure and cheap relative to
  // inference, and the request list fixes the output order.
  std::vector<RequestSpec> requests;
  for (std::size_t ui = 0; ui < units.size(); ++ui) {
    const EvalUnit& unit = units[ui];
    if (cfg.prompt == prompting::Family::fsp) {
      for (std::size_t f = 0; f < unit.parts.size(); ++f) {
        RequestSpec spec;
        spec.unit_index = ui;
        spec.focus_index = static_cast<int>(f);
        spec.bundle = prompting::render_fsp(unit, f, opts);
        requests.push_back(std::move(spec));
      }
    } else {
      RequestSpec spec;
      spec.unit_index = ui;
      if (cfg.prompt == prompting::Family::gmicl) {
        auto demos = prompting::select_gm_demos(
            pool, unit, 5, derive_seed(cfg.seed, "demos:" + unit.unit_id));
        spec.bundle = prompting::render_gmicl(unit, demos, opts);
      } else {
        spec.bundle = prompting::render_gemba(unit, opts);
      }
      requests.push_back(std::move(spec));
    }
  }

  backends::BiasParams sim_params = cfg.sim;
  sim_params.seed = cfg.seed;
  TokenCounter counter = whitespace_counter();

  std::optional<backends::ResponseCache> cache;
  std::optional<backends::LiveBackend> live;
  if (cfg.backend == "live") {
    if (cfg.endpoint.empty())
      throw MqmError("live backend requires an endpoint url");
    std::string cache_dir = cfg.cache_dir.empty()
                                ? (fs::path(cfg.out_dir) / "cache").string()
                                : cfg.cache_dir;
    cache.emplace(cache_dir);
    backends::LiveConfig live_cfg;
    live_cfg.endpoint_url = cfg.endpoint;
    live_cfg.model_id = cfg.model_id;
    const char* key = std::getenv("MQMEVAL_API_KEY");
    live_cfg.api_key = key ? key : "";
    live.emplace(std::move(live_cfg),
                 transport ? std::move(transport) : backends::httplib_transport(),
                 &*cache);
  }

  auto task = [&](std::size_t i) -> backends::BackendResponse {
    const RequestSpec& spec = requests[i];
    const EvalUnit& unit = units[spec.unit_index];
    backends::BackendResponse resp;
    if (cfg.backend == "live") {
      resp = live->complete(spec.bundle);
    } else if (cfg.backend == "oracle") {
      resp = spec.focus_index >= 0
                 ? backends::oracle_complete(
                       unit, static_cast<std::size_t>(spec.focus_index))
                 : backends::oracle_complete(unit);
    } else {
      const EvalUnit scored =
          spec.focus_index >= 0
              ? corpus::focus_subunit(unit,
                                      static_cast<std::size_t>(spec.focus_index))
              : unit;
      resp = backends::biased_complete(scored, sim_params, counter);
    }
    if (resp.input_tokens == 0)
      resp.input_tokens = whitespace_token_count(spec.bundle.full_prompt());
    return resp;
  };

  auto start = std::chrono::steady_clock::now();
  backends::RequestExecutor executor(cfg.concurrency, cfg.rate_limit);
  std::vector<backends::BackendResponse> responses =
      executor.run(requests.size(), task);
  auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::steady_clock::now() - start)
                     .count();

  EvalResult out;
  ordered_json snapshot = config_snapshot(cfg, level);
  out.run_id = run_id_for(snapshot);

  out.responses.reserve(requests.size());
  long long total_spans = 0;
  std::size_t parse_failed = 0, dropped = 0;
  bool da_parse = expects_da(cfg.prompt, cfg.da);
  for (std::size_t i = 0; i < requests.size(); ++i) {
    jsonio::ResponseRow row;
    row.unit_id = units[requests[i].unit_index].unit_id;
    row.focus_index = requests[i].focus_index;
    row.response = responses[i];
    auto parsed = parsing::parse_mqm_response(row.response.text, da_parse);
    if (parsed.parse_status == parsing::ParseStatus::failed) ++parse_failed;
    total_spans += static_cast<long long>(parsed.errors.size());
    dropped += static_cast<std::size_t>(parsed.dropped_annotations);
    out.responses.push_back(std::move(row));
  }

  out.manifest.run_id = out.run_id;
  out.manifest.config = snapshot;
  out.manifest.units = units.size();
  out.manifest.requests = requests.size();
  out.manifest.parse_failed = parse_failed;
  out.manifest.dropped_annotations = dropped;
  out.manifest.skipped_units = 0;
  out.manifest.total_spans = total_spans;
  out.manifest.wall_clock_ms = wall_ms;
  out.manifest.spans_per_second =
      wall_ms > 0 ? static_cast<double>(total_spans) / (static_cast<double>(wall_ms) / 1000.0)
                  : 0.0;

  fs::create_directories(cfg.out_dir);
  jsonio::write_responses((fs::path(cfg.out_dir) / "responses.jsonl").string(),
                          out.run_id, snapshot, out.responses);
  jsonio::write_manifest((fs::path(cfg.out_dir) / "manifest.json").string(),
                         out.manifest);
  return out;
}

ScoreResult score_responses(const std::vector<EvalUnit>& units,
                            const std::vector<jsonio::ResponseRow>& rows,
                            prompting::Family family, bool da,
                            const scoring::SeverityWeights& weights) {
  scoring::validate_weights(weights);
  bool da_parse = expects_da(family, da);

  // unit_id -> focus_index -> response text
  std::map<std::string, std::map<int, const jsonio::ResponseRow*>> by_unit;
  for (const jsonio::ResponseRow& row : rows) {
    auto [it, inserted] = by_unit[row.unit_id].try_emplace(row.focus_index, &row);
    if (!inserted)
      throw MqmError("duplicate response for unit " + row.unit_id + " focus " +
                     std::to_string(row.focus_index));
  }

  ScoreResult out;
  for (const EvalUnit& unit : units) {
    auto it = by_unit.find(unit.unit_id);
    if (it == by_unit.end())
      throw MqmError("no responses for unit " + unit.unit_id +
                     " (incomplete eval run?)");
    const auto& focus_rows = it->second;

    scoring::UnitScore mqm_row;
    mqm_row.unit_id = unit.unit_id;
    mqm_row.system_id = unit.system_id;
    mqm_row.granularity = unit.granularity;
    mqm_row.method = scoring::ScoreMethod::mqm_weighted;

    std::optional<double> da_score;
    if (family == prompting::Family::fsp) {
      std::vector<parsing::ParsedResponse> per_focus;
      per_focus.reserve(unit.parts.size());
      for (std::size_t f = 0; f < unit.parts.size(); ++f) {
        auto fr = focus_rows.find(static_cast<int>(f));
        if (fr == focus_rows.end())
          throw MqmError("missing focus response " + std::to_string(f) +
                         " for unit " + unit.unit_id);
        per_focus.push_back(
            parsing::parse_mqm_response(fr->second->response.text, da_parse));
      }
      for (const auto& resp : per_focus)
        out.dropped_annotations +=
            static_cast<std::size_t>(resp.dropped_annotations);
      auto agg = scoring::aggregate_fsp(unit, per_focus, weights);
      mqm_row.score = agg.mqm.score;
      mqm_row.n_errors = agg.mqm.n_errors;
      mqm_row.parse_status = agg.parse_status;
      da_score = agg.da_score;
    } else {
      auto fr = focus_rows.find(-1);
      if (fr == focus_rows.end())
        throw MqmError("missing response for unit " + unit.unit_id);
      auto parsed =
          parsing::parse_mqm_response(fr->second->response.text, da_parse);
      out.dropped_annotations +=
          static_cast<std::size_t>(parsed.dropped_annotations);
      auto mqm = scoring::unit_mqm_score(parsed.errors, weights);
      mqm_row.score = mqm.score;
      mqm_row.n_errors = mqm.n_errors;
      mqm_row.parse_status = parsed.parse_status;
      if (parsed.quality_score)
        da_score = static_cast<double>(*parsed.quality_score);
    }

    if (mqm_row.parse_status == parsing::ParseStatus::failed) ++out.parse_failed;
    out.scores.push_back(mqm_row);

    if (da && da_score) {
      scoring::UnitScore da_row = mqm_row;
      da_row.method = scoring::ScoreMethod::da;
      da_row.score = *da_score;
      out.scores.push_back(std::move(da_row));
    }
  }
  return out;
}

namespace {

struct LoadedRun {
  std::string dir;
  jsonio::RunManifest manifest;
  std::vector<jsonio::ResponseRow> responses;
  std::vector<EvalUnit> units;
  prompting::Family family = prompting::Family::gemba;
  bool da = false;
  scoring::SeverityWeights weights;
  std::string granularity;
  std::string direction;
  std::string method_label;
};

LoadedRun load_run(const std::string& run_dir, const std::string& units_override) {
  LoadedRun run;
  run.dir = run_dir;
  run.manifest = jsonio::read_manifest(
      (fs::path(run_dir) / "manifest.json").string());
  ordered_json resp_header;
  run.responses = jsonio::read_responses(
      (fs::path(run_dir) / "responses.jsonl").string(), &resp_header);
  if (resp_header.value("run_id", std::string()) != run.manifest.run_id)
    throw MqmError("responses in " + run_dir + " name run_id '" +
                   resp_header.value("run_id", std::string()) +
                   "' but the manifest says '" + run.manifest.run_id + "'");

  const ordered_json& cfg = run.manifest.config;
  std::string units_path =
      units_override.empty() ? cfg.value("units", std::string()) : units_override;
  if (units_path.empty())
    throw MqmError("run " + run_dir + " does not name its units file");
  run.units = jsonio::read_units(units_path);

  auto family = prompting::family_from_string(cfg.value("prompt", "gemba"));
  if (!family) throw MqmError("bad prompt family in manifest of " + run_dir);
  run.family = *family;
  run.da = cfg.value("da", false);
  run.weights = jsonio::weights_from_json(cfg.value("weights", ordered_json::object()));
  run.granularity = cfg.value("granularity", std::string());
  run.direction = cfg.value("src_lang", std::string()) + "-" +
                  cfg.value("tgt_lang", std::string());
  run.method_label = cfg.value("prompt", std::string()) + "/" +
                     cfg.value("backend", std::string()) + "/" +
                     cfg.value("model", std::string());
  return run;
}

}  // namespace

ScoreResult score_run(const std::string& run_dir, const std::string& units_override) {
  LoadedRun run = load_run(run_dir, units_override);
  ScoreResult result = score_responses(run.units, run.responses, run.family,
                                       run.da, run.weights);
  jsonio::write_scores((fs::path(run_dir) / "scores.jsonl").string(),
                       run.manifest.run_id, result.scores);
  return result;
}

RankResult rank_scores(const std::vector<scoring::UnitScore>& scores,
                       const std::vector<EvalUnit>& units,
                       const scoring::SeverityWeights& weights,
                       scoring::ScoreMethod method,
                       bool gold_critical_as_major) {
  std::vector<scoring::UnitScore> method_scores;
  std::set<std::string> systems;
  for (const scoring::UnitScore& s : scores) {
    if (s.method != method) continue;
    method_scores.push_back(s);
    systems.insert(s.system_id);
  }
  if (method_scores.empty())
    throw MqmError("no unit scores with method " +
                   std::string(scoring::to_string(method)));

  RankResult out;
  for (const std::string& system : systems)
    out.metric_scores[system] =
        scoring::system_score(method_scores, system).score;

  // Gold system scores go through the same weighting machinery.
  std::vector<scoring::UnitScore> gold_unit_scores;
  for (const EvalUnit& unit : units) {
    auto annotations =
        scoring::gold_as_annotations(unit, gold_critical_as_major);
    auto mqm = scoring::unit_mqm_score(annotations, weights);
    scoring::UnitScore row;
    row.unit_id = unit.unit_id;
    row.system_id = unit.system_id;
    row.granularity = unit.granularity;
    row.score = mqm.score;
    row.n_errors = mqm.n_errors;
    row.method = scoring::ScoreMethod::mqm_weighted;
    gold_unit_scores.push_back(std::move(row));
  }
  for (const std::string& system : systems)
    out.gold_scores[system] =
        scoring::system_score(gold_unit_scores, system).score;

  try {
    out.pairwise_accuracy =
        metaeval::pairwise_accuracy(out.metric_scores, out.gold_scores);
  } catch (const MqmError& e) {
    out.accuracy_note = e.what();
  }
  return out;
}

RankResult rank_run(const std::string& run_dir, scoring::ScoreMethod method,
                    bool gold_critical_as_major,
                    const std::string& units_override) {
  LoadedRun run = load_run(run_dir, units_override);
  ordered_json scores_header;
  auto scores = jsonio::read_scores(
      (fs::path(run_dir) / "scores.jsonl").string(), &scores_header);
  if (scores_header.value("run_id", std::string()) != run.manifest.run_id)
    throw MqmError("scores in " + run_dir + " belong to a different run");

  RankResult result = rank_scores(scores, run.units, run.weights, method,
                                  gold_critical_as_major);

  ordered_json j;
  j["artifact"] = "rank";
  j["run_id"] = run.manifest.run_id;
  j["method"] = scoring::to_string(method);
  ordered_json systems = ordered_json::object();
  for (const auto& [system, score] : result.metric_scores) {
    ordered_json row;
    row["metric"] = score;
    row["gold"] = result.gold_scores.at(system);
    systems[system] = std::move(row);
  }
  j["systems"] = std::move(systems);
  if (result.pairwise_accuracy)
    j["pairwise_accuracy"] = *result.pairwise_accuracy;
  else
    j["pairwise_accuracy_note"] = result.accuracy_note;
  write_text_file((fs::path(run_dir) / "rank.json").string(), j.dump(2) + "\n");
  return result;
}

SpanF1Result span_f1(const std::vector<EvalUnit>& units,
                     const std::vector<jsonio::ResponseRow>& rows,
                     prompting::Family family, bool da) {
  bool da_parse = expects_da(family, da);
  std::map<std::string, std::map<int, const jsonio::ResponseRow*>> by_unit;
  for (const jsonio::ResponseRow& row : rows)
    by_unit[row.unit_id][row.focus_index] = &row;

  SpanF1Result out;
  std::map<std::string, metaeval::PrfAccumulator> per_system;
  metaeval::PrfAccumulator micro;
  for (const EvalUnit& unit : units) {
    auto it = by_unit.find(unit.unit_id);
    if (it == by_unit.end()) continue;
    // Predictions in response order; for fsp runs the per-focus lists are
    // concatenated in segment order.
    std::vector<parsing::ErrorAnnotation> preds;
    for (const auto& [focus, row] : it->second) {
      auto parsed = parsing::parse_mqm_response(row->response.text, da_parse);
      preds.insert(preds.end(), parsed.errors.begin(), parsed.errors.end());
    }
    auto located = metaeval::localize_spans(preds, unit.tgt, unit.gold);
    auto prf = metaeval::char_prf(located, unit.gold, unit.tgt.size());
    micro.add(prf);
    per_system[unit.system_id].add(prf);
    ++out.units_scored;
  }
  out.micro = micro.total();
  for (const auto& [system, acc] : per_system)
    out.per_system[system] = acc.total();
  return out;
}

SpanF1Result spanf1_run(const std::string& run_dir,
                        const std::string& units_override) {
  LoadedRun run = load_run(run_dir, units_override);
  SpanF1Result result = span_f1(run.units, run.responses, run.family, run.da);

  ordered_json j;
  j["artifact"] = "spanf1";
  j["run_id"] = run.manifest.run_id;
  j["units_scored"] = result.units_scored;
  auto prf_json = [](const metaeval::PRF& prf) {
    ordered_json p;
    p["precision"] = prf.precision;
    p["recall"] = prf.recall;
    p["f1"] = prf.f1;
    p["pred_chars"] = prf.pred_chars;
    p["gold_chars"] = prf.gold_chars;
    return p;
  };
  j["micro"] = prf_json(result.micro);
  ordered_json systems = ordered_json::object();
  for (const auto& [system, prf] : result.per_system)
    systems[system] = prf_json(prf);
  j["per_system"] = std::move(systems);
  write_text_file((fs::path(run_dir) / "spanf1.json").string(), j.dump(2) + "\n");
  return result;
}

Report report_runs(const ReportOptions& options) {
  if (options.run_dirs.empty()) throw MqmError("report needs at least one run");

  std::vector<LoadedRun> runs;
  for (const std::string& dir : options.run_dirs)
    runs.push_back(load_run(dir, options.units_override));

  std::set<std::string> run_ids;
  for (const LoadedRun& run : runs) run_ids.insert(run.manifest.run_id);
  if (run_ids.size() > 1 && !options.compare)
    throw MqmError("refusing to mix " + std::to_string(run_ids.size()) +
                   " run ids in one report; pass --compare to compare runs");

  // Segment-level response token sums per (prompt/backend/model), used as
  // the expected-length baseline for coarser granularities.
  std::map<std::string,
           std::map<std::tuple<std::string, int, std::string>, std::int64_t>>
      seg_tokens_by_method;
  for (const LoadedRun& run : runs) {
    if (run.granularity != "seg") continue;
    std::map<std::string, std::int64_t> unit_tokens;
    for (const auto& row : run.responses)
      unit_tokens[row.unit_id] += row.response.output_tokens;
    auto& table = seg_tokens_by_method[run.method_label];
    for (const EvalUnit& unit : run.units) {
      if (unit.parts.size() != 1) continue;
      auto it = unit_tokens.find(unit.unit_id);
      if (it == unit_tokens.end()) continue;
      table[{unit.parts[0].doc_id, unit.parts[0].seg_index, unit.system_id}] =
          it->second;
    }
  }

  ordered_json report;
  report["artifact"] = "report";
  // Runs are referenced by id; paths would make otherwise identical reports
  // differ between output locations.
  ordered_json run_list = ordered_json::array();
  for (const LoadedRun& run : runs) run_list.push_back(run.manifest.run_id);
  report["runs"] = std::move(run_list);

  ordered_json rows_json = ordered_json::array();
  std::ostringstream csv;
  csv << "run_id,method,granularity,direction,units,pairwise_accuracy,"
         "mean_spans_per_doc,char_f1,mean_len,p50_len,p99_len,"
         "expected_mean_len,deficit_ratio,parse_failed\n";

  for (const LoadedRun& run : runs) {
    ScoreResult scored = score_responses(run.units, run.responses, run.family,
                                         run.da, run.weights);

    std::optional<double> accuracy;
    std::string accuracy_note;
    try {
      auto rank = rank_scores(scored.scores, run.units, run.weights,
                              scoring::ScoreMethod::mqm_weighted, false);
      accuracy = rank.pairwise_accuracy;
      accuracy_note = rank.accuracy_note;
    } catch (const MqmError& e) {
      accuracy_note = e.what();
    }

    std::vector<metaeval::SpanCountRow> span_rows;
    std::map<std::string, const EvalUnit*> unit_by_id;
    for (const EvalUnit& unit : run.units) unit_by_id[unit.unit_id] = &unit;
    for (const scoring::UnitScore& s : scored.scores) {
      if (s.method != scoring::ScoreMethod::mqm_weighted) continue;
      const EvalUnit* unit = unit_by_id.at(s.unit_id);
      metaeval::SpanCountRow row;
      row.method = run.method_label;
      row.granularity = s.granularity;
      row.system_id = s.system_id;
      row.doc_key = unit->group_key;
      row.n_errors = s.n_errors;
      row.n_source_docs = unit->n_source_docs;
      span_rows.push_back(std::move(row));
    }
    auto span_cells = metaeval::span_count_report(span_rows);
    std::optional<double> mean_spans;
    if (span_cells.size() == 1) mean_spans = span_cells[0].mean_spans_per_doc;

    auto f1 = span_f1(run.units, run.responses, run.family, run.da);

    std::map<std::string, std::int64_t> unit_tokens;
    for (const auto& row : run.responses)
      unit_tokens[row.unit_id] += row.response.output_tokens;
    auto seg_table = seg_tokens_by_method.find(run.method_label);
    auto length_cells = metaeval::length_report(
        run.units, unit_tokens,
        seg_table == seg_tokens_by_method.end()
            ? std::map<std::tuple<std::string, int, std::string>, std::int64_t>{}
            : seg_table->second);

    ordered_json row;
    row["run_id"] = run.manifest.run_id;
    row["method"] = run.method_label;
    row["granularity"] = run.granularity;
    row["direction"] = run.direction;
    row["units"] = run.units.size();
    if (accuracy)
      row["pairwise_accuracy"] = *accuracy;
    else
      row["pairwise_accuracy_note"] = accuracy_note;
    if (mean_spans) row["mean_spans_per_doc"] = *mean_spans;
    row["char_f1"] = f1.micro.f1;
    row["parse_failed"] = scored.parse_failed;

    std::optional<metaeval::LengthCell> cell;
    for (const auto& c : length_cells)
      if (to_string(c.granularity) == run.granularity) cell = c;
    if (cell) {
      ordered_json lengths;
      lengths["mean"] = cell->actual.mean;
      lengths["p50"] = cell->actual.p50;
      lengths["p99"] = cell->actual.p99;
      if (cell->expected) {
        lengths["expected_mean"] = cell->expected->mean;
        lengths["expected_p50"] = cell->expected->p50;
        lengths["expected_p99"] = cell->expected->p99;
      }
      if (cell->deficit_ratio) lengths["deficit_ratio"] = *cell->deficit_ratio;
      row["response_tokens"] = std::move(lengths);
    }
    rows_json.push_back(row);

    csv << run.manifest.run_id << "," << run.method_label << ","
        << run.granularity << "," << run.direction << "," << run.units.size()
        << ",";
    if (accuracy) csv << *accuracy;
    csv << ",";
    if (mean_spans) csv << *mean_spans;
    csv << "," << f1.micro.f1 << ",";
    if (cell) {
      csv << cell->actual.mean << "," << cell->actual.p50 << ","
          << cell->actual.p99 << ",";
      if (cell->expected) csv << cell->expected->mean;
      csv << ",";
      if (cell->deficit_ratio) csv << *cell->deficit_ratio;
    } else {
      csv << ",,,,";
    }
    csv << "," << scored.parse_failed << "\n";
  }
  report["rows"] = std::move(rows_json);

  Report out;
  out.json = std::move(report);
  out.csv = csv.str();
  if (!options.out_dir.empty()) {
    fs::create_directories(options.out_dir);
    write_text_file((fs::path(options.out_dir) / "report.json").string(),
                    out.json.dump(2) + "\n");
    write_text_file((fs::path(options.out_dir) / "report.csv").string(), out.csv);
  }
  return out;
}

BuildResult build_units_file(const std::string& segments_path,
                             Granularity level, int group_size,
                             std::uint64_t seed, const std::string& joiner,
                             const std::string& out_path) {
  auto segments =
      corpus::import_corpus(segments_path, corpus::CorpusFormat::canonical_jsonl);
  auto build = corpus::build_granularity(segments, level, group_size, seed, joiner);

  ordered_json config;
  config["segments"] = segments_path;
  config["level"] = to_string(level);
  config["group_size"] = group_size;
  config["seed"] = seed;
  config["joiner"] = joiner;
  config["skipped"] = build.skipped.size();

  BuildResult out;
  out.run_id = "bld-" + fnv1a64_hex(config.dump());
  out.n_units = build.units.size();
  out.skipped = build.skipped;
  out.stats = corpus::corpus_stats(build.units, whitespace_counter());
  jsonio::write_units(out_path, out.run_id, config, build.units);
  return out;
}

}  // namespace mqmeval::runner

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mqmeval/corpus.hpp"
#include "mqmeval/ftexport.hpp"
#include "mqmeval/jsonio.hpp"
#include "mqmeval/runner.hpp"

using namespace mqmeval;
using ordered_json = nlohmann::ordered_json;

namespace {

Granularity parse_level(const std::string& level) {
  auto g = granularity_from_string(level);
  if (!g) throw MqmError("unknown level '" + level + "' (seg|doc|doc5)");
  return *g;
}

bool parse_on_off(const std::string& value, const char* flag) {
  if (value == "on") return true;
  if (value == "off") return false;
  throw MqmError(std::string(flag) + " must be 'on' or 'off'");
}

scoring::SeverityWeights parse_weights(const std::string& spec) {
  std::vector<double> parts;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    std::size_t comma = spec.find(',', pos);
    std::string piece = comma == std::string::npos
                            ? spec.substr(pos)
                            : spec.substr(pos, comma - pos);
    try {
      parts.push_back(std::stod(piece));
    } catch (const std::exception&) {
      throw MqmError("bad --weights value '" + piece + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (parts.size() != 3 && parts.size() != 4)
    throw MqmError("--weights expects minor,major,critical[,cap]");
  scoring::SeverityWeights w;
  w.minor = parts[0];
  w.major = parts[1];
  w.critical = parts[2];
  if (parts.size() == 4)
    w.per_unit_cap = parts[3];
  else
    w.per_unit_cap.reset();
  scoring::validate_weights(w);
  return w;
}

ordered_json stats_json(const corpus::StatsTable& stats) {
  ordered_json j = ordered_json::object();
  for (const auto& [granularity, cell] : stats) {
    ordered_json row;
    row["count"] = cell.count;
    if (cell.mean_tokens)
      row["mean_tokens"] = *cell.mean_tokens;
    else
      row["mean_tokens"] = nullptr;
    j[to_string(granularity)] = std::move(row);
  }
  return j;
}

void load_eval_config(const std::string& path, runner::RunConfig* cfg) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw MqmError("bad config file " + path + ": " + e.what());
  }
  if (j.contains("units")) cfg->units_path = j["units"].get<std::string>();
  if (j.contains("prompt")) {
    auto f = prompting::family_from_string(j["prompt"].get<std::string>());
    if (!f) throw MqmError("bad prompt family in config");
    cfg->prompt = *f;
  }
  if (j.contains("shots")) cfg->shots = j["shots"].get<int>();
  if (j.contains("explanations")) cfg->explanations = j["explanations"].get<bool>();
  if (j.contains("da")) cfg->da = j["da"].get<bool>();
  if (j.contains("backend")) cfg->backend = j["backend"].get<std::string>();
  if (j.contains("model")) cfg->model_id = j["model"].get<std::string>();
  if (j.contains("endpoint")) cfg->endpoint = j["endpoint"].get<std::string>();
  if (j.contains("seed")) cfg->seed = j["seed"].get<std::uint64_t>();
  if (j.contains("weights")) cfg->weights = jsonio::weights_from_json(j["weights"]);
  if (j.contains("src_lang")) cfg->src_lang = j["src_lang"].get<std::string>();
  if (j.contains("tgt_lang")) cfg->tgt_lang = j["tgt_lang"].get<std::string>();
  if (j.contains("demo_pool")) cfg->demo_pool_path = j["demo_pool"].get<std::string>();
  if (j.contains("concurrency")) cfg->concurrency = j["concurrency"].get<int>();
  if (j.contains("rate_limit")) cfg->rate_limit = j["rate_limit"].get<double>();
  if (j.contains("max_output_tokens"))
    cfg->max_output_tokens = j["max_output_tokens"].get<int>();
  if (j.contains("cache_dir")) cfg->cache_dir = j["cache_dir"].get<std::string>();
  if (j.contains("out")) cfg->out_dir = j["out"].get<std::string>();
  if (j.contains("sim")) {
    const ordered_json& sim = j["sim"];
    if (sim.contains("base_recall"))
      cfg->sim.base_recall = sim["base_recall"].get<double>();
    if (sim.contains("halflife_tokens"))
      cfg->sim.halflife_tokens = sim["halflife_tokens"].get<double>();
    if (sim.contains("severity_noise"))
      cfg->sim.severity_noise = sim["severity_noise"].get<double>();
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Reference-free MQM evaluation harness for long-form machine translation"};
  app.require_subcommand(1);

  // --- import ---
  auto* import_cmd =
      app.add_subcommand("import", "Convert a corpus to the canonical format");
  std::string import_data, import_format = "canonical_jsonl", import_out;
  import_cmd->add_option("--data", import_data, "input corpus file")->required();
  import_cmd->add_option("--format", import_format,
                         "canonical_jsonl or wmt_tagged");
  import_cmd->add_option("--out", import_out, "canonical segments.jsonl")
      ->required();

  // --- build ---
  auto* build_cmd =
      app.add_subcommand("build", "Construct evaluation units at a granularity");
  std::string build_data, build_level = "seg", build_joiner = "\n", build_out;
  int build_group_size = 5;
  std::uint64_t build_seed = 0;
  build_cmd->add_option("--data", build_data, "canonical segments.jsonl")
      ->required();
  build_cmd->add_option("--level", build_level, "seg, doc or doc5");
  build_cmd->add_option("--group-size", build_group_size,
                        "documents per doc5 group");
  build_cmd->add_option("--seed", build_seed, "doc5 shuffle seed");
  build_cmd->add_option("--joiner", build_joiner,
                        "text inserted between concatenated segments");
  build_cmd->add_option("--out", build_out, "units.jsonl")->required();

  // --- eval ---
  auto* eval_cmd =
      app.add_subcommand("eval", "Run prompts through a backend");
  runner::RunConfig eval_cfg;
  std::string eval_config_path, eval_data, eval_prompt, eval_explanations,
      eval_da, eval_backend, eval_model, eval_endpoint, eval_weights,
      eval_src_lang, eval_tgt_lang, eval_demo_pool, eval_cache_dir, eval_out;
  int eval_shots = -1, eval_concurrency = -1, eval_max_tokens = -1;
  double eval_rate_limit = -1;
  std::int64_t eval_seed = -1;
  eval_cmd->add_option("--config", eval_config_path,
                       "JSON config file; flags override its values");
  eval_cmd->add_option("--data", eval_data, "units.jsonl");
  eval_cmd->add_option("--prompt", eval_prompt, "gemba, fsp or gmicl");
  eval_cmd->add_option("--shots", eval_shots, "0, 3 or 5");
  eval_cmd->add_option("--explanations", eval_explanations, "on or off");
  eval_cmd->add_option("--da", eval_da, "on or off");
  eval_cmd->add_option("--backend", eval_backend, "live, oracle or sim");
  eval_cmd->add_option("--model", eval_model, "model id for the live backend");
  eval_cmd->add_option("--endpoint", eval_endpoint,
                       "chat-completion endpoint url");
  eval_cmd->add_option("--weights", eval_weights, "minor,major,critical[,cap]");
  eval_cmd->add_option("--seed", eval_seed, "seed for all run randomness");
  eval_cmd->add_option("--src-lang", eval_src_lang, "source language name");
  eval_cmd->add_option("--tgt-lang", eval_tgt_lang, "target language name");
  eval_cmd->add_option("--demo-pool", eval_demo_pool,
                       "demo pool jsonl for gmicl");
  eval_cmd->add_option("--concurrency", eval_concurrency,
                       "max in-flight requests");
  eval_cmd->add_option("--rate-limit", eval_rate_limit,
                       "max requests per second (0 = unlimited)");
  eval_cmd->add_option("--max-output-tokens", eval_max_tokens,
                       "override the per-granularity default");
  eval_cmd->add_option("--cache-dir", eval_cache_dir, "response cache directory");
  eval_cmd->add_option("--out", eval_out, "run output directory");

  // --- score ---
  auto* score_cmd =
      app.add_subcommand("score", "Parse responses and write unit scores");
  std::string score_run_dir, score_units;
  score_cmd->add_option("--run", score_run_dir, "run directory")->required();
  score_cmd->add_option("--units", score_units, "override the units file");

  // --- rank ---
  auto* rank_cmd = app.add_subcommand(
      "rank", "System scores and pairwise accuracy against gold");
  std::string rank_run_dir, rank_method = "mqm_weighted", rank_units;
  bool rank_gold_major = false;
  rank_cmd->add_option("--run", rank_run_dir, "run directory")->required();
  rank_cmd->add_option("--method", rank_method, "mqm_weighted or da");
  rank_cmd->add_flag("--gold-critical-as-major", rank_gold_major,
                     "weight critical gold spans as major");
  rank_cmd->add_option("--units", rank_units, "override the units file");

  // --- spanf1 ---
  auto* spanf1_cmd = app.add_subcommand(
      "spanf1", "Character-level span precision/recall/F1 against gold");
  std::string spanf1_run_dir, spanf1_units;
  spanf1_cmd->add_option("--run", spanf1_run_dir, "run directory")->required();
  spanf1_cmd->add_option("--units", spanf1_units, "override the units file");

  // --- report ---
  auto* report_cmd =
      app.add_subcommand("report", "Cross-run accuracy/span/length tables");
  std::vector<std::string> report_runs;
  std::string report_out, report_units;
  bool report_compare = false;
  report_cmd->add_option("--run", report_runs, "run directory (repeatable)")
      ->required();
  report_cmd->add_flag("--compare", report_compare,
                       "allow mixing different run ids");
  report_cmd->add_option("--units", report_units, "override the units file");
  report_cmd->add_option("--out", report_out, "report output directory")
      ->required();

  // --- export-ft ---
  auto* ft_cmd = app.add_subcommand(
      "export-ft", "Export mixed-granularity fine-tuning data");
  std::string ft_data, ft_out, ft_demo_pool_out, ft_epochs_note,
      ft_src_lang = "English", ft_tgt_lang = "German", ft_joiner = "\n";
  int ft_group_size = 5;
  std::uint64_t ft_seed = 0;
  ft_cmd->add_option("--data", ft_data, "canonical segments.jsonl")->required();
  ft_cmd->add_option("--group-size", ft_group_size, "documents per doc5 group");
  ft_cmd->add_option("--seed", ft_seed, "doc5 shuffle seed");
  ft_cmd->add_option("--out", ft_out, "fine-tuning jsonl")->required();
  ft_cmd->add_option("--demo-pool-out", ft_demo_pool_out,
                     "also write a gmicl demo pool");
  ft_cmd->add_option("--epochs-note", ft_epochs_note,
                     "free-form training note recorded in the stats");
  ft_cmd->add_option("--src-lang", ft_src_lang, "source language name");
  ft_cmd->add_option("--tgt-lang", ft_tgt_lang, "target language name");
  ft_cmd->add_option("--joiner", ft_joiner,
                     "text inserted between concatenated segments");

  CLI11_PARSE(app, argc, argv);

  if (*import_cmd) {
    corpus::CorpusFormat format;
    if (import_format == "canonical_jsonl")
      format = corpus::CorpusFormat::canonical_jsonl;
    else if (import_format == "wmt_tagged")
      format = corpus::CorpusFormat::wmt_tagged;
    else
      throw MqmError("unknown format '" + import_format + "'");
    auto segments = corpus::import_corpus(import_data, format);
    ordered_json header_cfg;
    header_cfg["source"] = import_data;
    header_cfg["format"] = import_format;
    std::string run_id = "imp-" + fnv1a64_hex(header_cfg.dump());
    jsonio::write_segments(import_out, run_id, segments);
    ordered_json out;
    out["run_id"] = run_id;
    out["segments"] = segments.size();
    out["out"] = import_out;
    std::cout << out.dump() << "\n";
    return 0;
  }

  if (*build_cmd) {
    auto result = runner::build_units_file(build_data, parse_level(build_level),
                                           build_group_size, build_seed,
                                           build_joiner, build_out);
    for (const std::string& note : result.skipped)
      std::cerr << "warning: " << note << "\n";
    ordered_json out;
    out["run_id"] = result.run_id;
    out["units"] = result.n_units;
    out["skipped"] = result.skipped.size();
    out["stats"] = stats_json(result.stats);
    out["out"] = build_out;
    std::cout << out.dump() << "\n";
    return 0;
  }

  if (*eval_cmd) {
    if (!eval_config_path.empty()) load_eval_config(eval_config_path, &eval_cfg);
    if (!eval_data.empty()) eval_cfg.units_path = eval_data;
    if (!eval_prompt.empty()) {
      auto f = prompting::family_from_string(eval_prompt);
      if (!f) throw MqmError("unknown prompt family '" + eval_prompt + "'");
      eval_cfg.prompt = *f;
    }
    if (eval_shots >= 0) eval_cfg.shots = eval_shots;
    if (!eval_explanations.empty())
      eval_cfg.explanations = parse_on_off(eval_explanations, "--explanations");
    if (!eval_da.empty()) eval_cfg.da = parse_on_off(eval_da, "--da");
    if (!eval_backend.empty()) eval_cfg.backend = eval_backend;
    if (!eval_model.empty()) eval_cfg.model_id = eval_model;
    if (!eval_endpoint.empty()) eval_cfg.endpoint = eval_endpoint;
    if (!eval_weights.empty()) eval_cfg.weights = parse_weights(eval_weights);
    if (eval_seed >= 0) eval_cfg.seed = static_cast<std::uint64_t>(eval_seed);
    if (!eval_src_lang.empty()) eval_cfg.src_lang = eval_src_lang;
    if (!eval_tgt_lang.empty()) eval_cfg.tgt_lang = eval_tgt_lang;
    if (!eval_demo_pool.empty()) eval_cfg.demo_pool_path = eval_demo_pool;
    if (eval_concurrency >= 0) eval_cfg.concurrency = eval_concurrency;
    if (eval_rate_limit >= 0) eval_cfg.rate_limit = eval_rate_limit;
    if (eval_max_tokens >= 0) eval_cfg.max_output_tokens = eval_max_tokens;
    if (!eval_cache_dir.empty()) eval_cfg.cache_dir = eval_cache_dir;
    if (!eval_out.empty()) eval_cfg.out_dir = eval_out;
    if (eval_cfg.units_path.empty())
      throw MqmError("eval requires --data (or 'units' in the config)");
    if (eval_cfg.out_dir.empty())
      throw MqmError("eval requires --out (or 'out' in the config)");

    auto result = runner::run_eval(eval_cfg);
    ordered_json out;
    out["run_id"] = result.run_id;
    out["units"] = result.manifest.units;
    out["requests"] = result.manifest.requests;
    out["parse_failed"] = result.manifest.parse_failed;
    out["total_spans"] = result.manifest.total_spans;
    out["wall_clock_ms"] = result.manifest.wall_clock_ms;
    out["spans_per_second"] = result.manifest.spans_per_second;
    out["out"] = eval_cfg.out_dir;
    std::cout << out.dump() << "\n";
    return 0;
  }

  if (*score_cmd) {
    auto result = runner::score_run(score_run_dir, score_units);
    ordered_json out;
    out["scores"] = result.scores.size();
    out["parse_failed"] = result.parse_failed;
    out["dropped_annotations"] = result.dropped_annotations;
    std::cout << out.dump() << "\n";
    return 0;
  }

  if (*rank_cmd) {
    auto method = scoring::score_method_from_string(rank_method);
    if (!method) throw MqmError("unknown method '" + rank_method + "'");
    auto result =
        runner::rank_run(rank_run_dir, *method, rank_gold_major, rank_units);
    ordered_json out;
    if (result.pairwise_accuracy)
      out["pairwise_accuracy"] = *result.pairwise_accuracy;
    else
      out["pairwise_accuracy_note"] = result.accuracy_note;
    out["systems"] = result.metric_scores.size();
    std::cout << out.dump() << "\n";
    return 0;
  }

  if (*spanf1_cmd) {
    auto result = runner::spanf1_run(spanf1_run_dir, spanf1_units);
    ordered_json out;
    out["units_scored"] = result.units_scored;
    out["precision"] = result.micro.precision;
    out["recall"] = result.micro.recall;
    out["f1"] = result.micro.f1;
    std::cout << out.dump() << "\n";
    return 0;
  }

  if (*report_cmd) {
    runner::ReportOptions options;
    options.run_dirs = report_runs;
    options.compare = report_compare;
    options.units_override = report_units;
    options.out_dir = report_out;
    auto report = runner::report_runs(options);
    ordered_json out;
    out["rows"] = report.json["rows"].size();
    out["out"] = report_out;
    std::cout << out.dump() << "\n";
    return 0;
  }

  if (*ft_cmd) {
    auto segments =
        corpus::import_corpus(ft_data, corpus::CorpusFormat::canonical_jsonl);
    auto result = ftexport::export_ft(segments, ft_group_size, ft_seed,
                                      ft_epochs_note, ft_src_lang, ft_tgt_lang,
                                      ft_joiner);
    jsonio::write_ft_examples(ft_out, result.examples);
    ordered_json ft_cfg;
    ft_cfg["data"] = ft_data;
    ft_cfg["group_size"] = ft_group_size;
    ft_cfg["seed"] = ft_seed;
    ordered_json stats;
    stats["artifact"] = "ft_stats";
    stats["run_id"] = "ft-" + fnv1a64_hex(ft_cfg.dump());
    ordered_json counts;
    for (const auto& [granularity, count] : result.stats.counts)
      counts[to_string(granularity)] = count;
    stats["counts"] = std::move(counts);
    stats["skipped"] = result.stats.skipped;
    stats["epochs_note"] = result.stats.epochs_note;
    write_text_file(ft_out + ".stats.json", stats.dump(2) + "\n");
    if (!ft_demo_pool_out.empty()) {
      auto pool = ftexport::build_demo_pool(segments, ft_group_size, ft_seed,
                                            whitespace_counter(), ft_src_lang,
                                            ft_tgt_lang, ft_joiner);
      jsonio::write_demo_pool(ft_demo_pool_out,
                              "ftp-" + fnv1a64_hex(ft_data), pool);
    }
    ordered_json out;
    out["examples"] = result.examples.size();
    out["skipped"] = result.stats.skipped;
    out["counts"] = stats["counts"];
    out["out"] = ft_out;
    std::cout << out.dump() << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
}

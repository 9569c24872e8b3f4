#include <doctest.h>

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>

#include "mqmeval/ftexport.hpp"
#include "mqmeval/jsonio.hpp"
#include "mqmeval/runner.hpp"
#include "support/synthetic.hpp"

using namespace mqmeval;
using namespace mqmeval::testsupport;
namespace fs = std::filesystem;

namespace {

// Writes a synthetic corpus and builds units at the given level.
std::string prepare_units(const TempDir& tmp, Granularity level,
                          const SyntheticSpec& spec, const std::string& tag) {
  std::string segments_path = tmp.file("segments-" + tag + ".jsonl");
  std::string units_path =
      tmp.file("units-" + tag + "-" + to_string(level) + ".jsonl");
  if (!fs::exists(segments_path))
    jsonio::write_segments(segments_path, "seg-" + tag,
                           make_synthetic_corpus(spec));
  runner::build_units_file(segments_path, level, 5, 7, "\n", units_path);
  return units_path;
}

runner::RunConfig base_config(const std::string& units_path,
                              const std::string& out_dir) {
  runner::RunConfig cfg;
  cfg.units_path = units_path;
  cfg.out_dir = out_dir;
  cfg.backend = "oracle";
  cfg.prompt = prompting::Family::gemba;
  cfg.seed = 3;
  cfg.concurrency = 4;
  return cfg;
}

std::map<std::string, scoring::UnitScore> by_unit(
    const std::vector<scoring::UnitScore>& scores, scoring::ScoreMethod method) {
  std::map<std::string, scoring::UnitScore> out;
  for (const auto& s : scores)
    if (s.method == method) out[s.unit_id] = s;
  return out;
}

}  // namespace

TEST_CASE("oracle gemba scores equal the gold-derived scores") {
  TempDir tmp("runner-oracle");
  std::string units_path =
      prepare_units(tmp, Granularity::doc, default_spec_3sys(), "a");
  auto cfg = base_config(units_path, tmp.file("run"));
  auto eval = runner::run_eval(cfg);
  auto scored = runner::score_run(cfg.out_dir);

  auto units = jsonio::read_units(units_path);
  auto rows = by_unit(scored.scores, scoring::ScoreMethod::mqm_weighted);
  REQUIRE(rows.size() == units.size());
  for (const EvalUnit& unit : units) {
    auto gold_score =
        scoring::unit_mqm_score(scoring::gold_as_annotations(unit), cfg.weights);
    const auto& row = rows.at(unit.unit_id);
    CHECK(row.score == gold_score.score);
    CHECK(row.n_errors == gold_score.n_errors);
    CHECK(row.parse_status == parsing::ParseStatus::clean);
  }

  auto rank = runner::rank_run(cfg.out_dir);
  REQUIRE(rank.pairwise_accuracy.has_value());
  CHECK(*rank.pairwise_accuracy == doctest::Approx(1.0));
  CHECK(scored.parse_failed == 0);
}

TEST_CASE("fsp with the oracle reproduces document gold scores exactly") {
  TempDir tmp("runner-fsp");
  std::string units_path =
      prepare_units(tmp, Granularity::doc, default_spec_3sys(), "a");
  auto cfg = base_config(units_path, tmp.file("run"));
  cfg.prompt = prompting::Family::fsp;
  runner::run_eval(cfg);
  auto scored = runner::score_run(cfg.out_dir);

  auto units = jsonio::read_units(units_path);
  auto rows = by_unit(scored.scores, scoring::ScoreMethod::mqm_weighted);
  for (const EvalUnit& unit : units) {
    auto gold_score =
        scoring::unit_mqm_score(scoring::gold_as_annotations(unit), cfg.weights);
    CHECK(rows.at(unit.unit_id).score == gold_score.score);
    CHECK(rows.at(unit.unit_id).n_errors == gold_score.n_errors);
  }
}

TEST_CASE("two identical mock runs produce byte-identical artifacts") {
  TempDir tmp("runner-determinism");
  std::string units_path =
      prepare_units(tmp, Granularity::doc, default_spec_3sys(), "a");

  auto run_once = [&](const std::string& out) {
    auto cfg = base_config(units_path, out);
    cfg.backend = "sim";
    cfg.concurrency = 8;
    runner::run_eval(cfg);
    runner::score_run(out);
    runner::ReportOptions opts;
    opts.run_dirs = {out};
    opts.out_dir = out;
    runner::report_runs(opts);
  };
  run_once(tmp.file("run1"));
  run_once(tmp.file("run2"));

  auto bytes = [&](const std::string& run, const std::string& name) {
    return read_text_file(tmp.file(run + "/" + name));
  };
  CHECK(bytes("run1", "scores.jsonl") == bytes("run2", "scores.jsonl"));
  CHECK(bytes("run1", "responses.jsonl") == bytes("run2", "responses.jsonl"));
  CHECK(bytes("run1", "report.json") == bytes("run2", "report.json"));
  CHECK(bytes("run1", "report.csv") == bytes("run2", "report.csv"));

  auto m1 = jsonio::read_manifest(tmp.file("run1/manifest.json"));
  auto m2 = jsonio::read_manifest(tmp.file("run2/manifest.json"));
  CHECK(jsonio::manifest_stable_dump(m1) == jsonio::manifest_stable_dump(m2));
  CHECK(m1.run_id == m2.run_id);
}

TEST_CASE("results do not depend on request completion order") {
  TempDir tmp("runner-order");
  std::string units_path =
      prepare_units(tmp, Granularity::doc, default_spec_3sys(), "a");

  auto cfg1 = base_config(units_path, tmp.file("serial"));
  cfg1.concurrency = 1;
  runner::run_eval(cfg1);
  auto cfg8 = base_config(units_path, tmp.file("parallel"));
  cfg8.concurrency = 8;
  runner::run_eval(cfg8);

  CHECK(read_text_file(tmp.file("serial/responses.jsonl")) ==
        read_text_file(tmp.file("parallel/responses.jsonl")));
}

TEST_CASE("interrupted live runs resume from the response cache") {
  TempDir tmp("runner-resume");
  std::string units_path =
      prepare_units(tmp, Granularity::seg, default_spec_3sys(), "a");

  auto canned_reply = [](int status, const std::string& content) {
    jsonio::ordered_json message;
    message["role"] = "assistant";
    message["content"] = content;
    jsonio::ordered_json choice;
    choice["message"] = message;
    jsonio::ordered_json reply;
    reply["choices"] = jsonio::ordered_json::array({choice});
    backends::HttpResponse resp;
    resp.status = status;
    resp.body = reply.dump();
    return resp;
  };

  auto make_cfg = [&](const std::string& out) {
    auto cfg = base_config(units_path, out);
    cfg.backend = "live";
    cfg.endpoint = "http://example.test/v1/chat/completions";
    cfg.model_id = "fake-model";
    cfg.cache_dir = tmp.file("shared-cache");
    cfg.concurrency = 1;  // deterministic failure point
    return cfg;
  };

  // First attempt: the endpoint dies after 5 requests.
  std::atomic<int> calls{0};
  backends::Transport dying = [&](const backends::HttpRequest&) {
    if (++calls > 5) return backends::HttpResponse{400, "", "endpoint gone"};
    return canned_reply(200, "{\"errors\": []}");
  };
  auto cfg = make_cfg(tmp.file("interrupted"));
  CHECK_THROWS_AS(runner::run_eval(cfg, dying), backends::BackendError);

  // Second attempt with a healthy endpoint completes from the cache.
  std::atomic<int> fresh_calls{0};
  backends::Transport healthy = [&](const backends::HttpRequest&) {
    ++fresh_calls;
    return canned_reply(200, "{\"errors\": []}");
  };
  auto resumed = runner::run_eval(cfg, healthy);

  // A clean never-interrupted run with its own cache gives the same texts.
  auto clean_cfg = make_cfg(tmp.file("clean"));
  clean_cfg.cache_dir = tmp.file("clean-cache");
  auto clean = runner::run_eval(clean_cfg, healthy);

  REQUIRE(resumed.responses.size() == clean.responses.size());
  int cached = 0;
  for (std::size_t i = 0; i < resumed.responses.size(); ++i) {
    CHECK(resumed.responses[i].unit_id == clean.responses[i].unit_id);
    CHECK(resumed.responses[i].response.text == clean.responses[i].response.text);
    if (resumed.responses[i].response.from_cache) ++cached;
  }
  CHECK(cached == 5);  // the requests completed before the interruption
  CHECK(static_cast<std::size_t>(fresh_calls) + 5 >= resumed.responses.size());
}

TEST_CASE("report refuses mixed run ids without --compare") {
  TempDir tmp("runner-mixed");
  std::string units_path =
      prepare_units(tmp, Granularity::doc, default_spec_3sys(), "a");
  auto cfg1 = base_config(units_path, tmp.file("r1"));
  runner::run_eval(cfg1);
  auto cfg2 = base_config(units_path, tmp.file("r2"));
  cfg2.seed = 4;  // different config, different run id
  runner::run_eval(cfg2);

  runner::ReportOptions opts;
  opts.run_dirs = {tmp.file("r1"), tmp.file("r2")};
  opts.out_dir = tmp.file("report");
  CHECK_THROWS_WITH_AS(runner::report_runs(opts), doctest::Contains("--compare"),
                       MqmError);
  opts.compare = true;
  auto report = runner::report_runs(opts);
  CHECK(report.json["rows"].size() == 2);
  CHECK(fs::exists(tmp.file("report/report.json")));
  CHECK(fs::exists(tmp.file("report/report.csv")));
}

TEST_CASE("oracle span counts are identical across granularities") {
  TempDir tmp("runner-invariance");
  auto spec = default_spec_3sys();
  std::vector<std::string> run_dirs;
  for (Granularity level :
       {Granularity::seg, Granularity::doc, Granularity::doc5}) {
    std::string units_path = prepare_units(tmp, level, spec, "a");
    auto cfg = base_config(units_path, tmp.file("run-" + std::string(to_string(level))));
    cfg.prompt = prompting::Family::fsp;
    runner::run_eval(cfg);
    runner::score_run(cfg.out_dir);
    run_dirs.push_back(cfg.out_dir);
  }
  runner::ReportOptions opts;
  opts.run_dirs = run_dirs;
  opts.compare = true;
  opts.out_dir = tmp.file("report");
  auto report = runner::report_runs(opts);
  REQUIRE(report.json["rows"].size() == 3);
  std::map<std::string, double> means;
  for (const auto& row : report.json["rows"])
    means[row["granularity"].get<std::string>()] =
        row["mean_spans_per_doc"].get<double>();
  CHECK(means.at("seg") == doctest::Approx(means.at("doc")).epsilon(1e-12));
  CHECK(means.at("doc") == doctest::Approx(means.at("doc5")).epsilon(1e-12));
}

TEST_CASE("gmicl eval selects demos per unit and matches gold via oracle") {
  TempDir tmp("runner-gmicl");
  std::string units_path =
      prepare_units(tmp, Granularity::doc, default_spec_3sys(), "a");

  // Demo pool from a second synthetic corpus (different seed).
  auto pool_spec = default_spec_3sys();
  pool_spec.seed = 99;
  pool_spec.n_docs = 12;
  auto pool = ftexport::build_demo_pool(make_synthetic_corpus(pool_spec), 5, 7,
                                        whitespace_counter());
  std::string pool_path = tmp.file("demos.jsonl");
  jsonio::write_demo_pool(pool_path, "pool-test", pool);

  auto cfg = base_config(units_path, tmp.file("run"));
  cfg.prompt = prompting::Family::gmicl;
  cfg.shots = 5;
  cfg.demo_pool_path = pool_path;
  auto eval = runner::run_eval(cfg);
  CHECK(eval.manifest.parse_failed == 0);

  auto scored = runner::score_run(cfg.out_dir);
  auto units = jsonio::read_units(units_path);
  auto rows = by_unit(scored.scores, scoring::ScoreMethod::mqm_weighted);
  for (const EvalUnit& unit : units) {
    auto gold =
        scoring::unit_mqm_score(scoring::gold_as_annotations(unit), cfg.weights);
    CHECK(rows.at(unit.unit_id).score == gold.score);
  }

  SUBCASE("prompts embed five pool demonstrations") {
    auto responses = jsonio::read_responses(tmp.file("run/responses.jsonl"));
    CHECK(responses.size() == units.size());
  }
}

TEST_CASE("report derives expected lengths from a segment-level run") {
  TempDir tmp("runner-lengths");
  auto spec = default_spec_3sys();
  std::string seg_units = prepare_units(tmp, Granularity::seg, spec, "a");
  std::string doc_units = prepare_units(tmp, Granularity::doc, spec, "a");

  for (auto [units, name] : {std::pair{seg_units, std::string("seg")},
                             std::pair{doc_units, std::string("doc")}}) {
    auto cfg = base_config(units, tmp.file("run-" + name));
    cfg.backend = "sim";
    runner::run_eval(cfg);
    runner::score_run(cfg.out_dir);
  }
  runner::ReportOptions opts;
  opts.run_dirs = {tmp.file("run-seg"), tmp.file("run-doc")};
  opts.compare = true;
  opts.out_dir = tmp.file("report");
  auto report = runner::report_runs(opts);

  const jsonio::ordered_json* doc_row = nullptr;
  for (const auto& row : report.json["rows"])
    if (row["granularity"] == "doc") doc_row = &row;
  REQUIRE(doc_row != nullptr);
  const auto& lengths = (*doc_row)["response_tokens"];
  REQUIRE(lengths.contains("expected_mean"));
  // The simulator emits fewer spans for longer inputs, so the single-pass
  // document responses fall short of their concatenated expectation.
  CHECK(lengths["deficit_ratio"].get<double>() < 1.0);
  CHECK(lengths["expected_mean"].get<double>() > lengths["mean"].get<double>());
}

TEST_CASE("da scoring flows through to rank") {
  TempDir tmp("runner-da");
  std::string units_path =
      prepare_units(tmp, Granularity::doc, default_spec_3sys(), "a");
  auto cfg = base_config(units_path, tmp.file("run"));
  cfg.prompt = prompting::Family::fsp;
  cfg.da = true;
  runner::run_eval(cfg);
  auto scored = runner::score_run(cfg.out_dir);
  // The oracle never emits quality_score, so no DA rows can exist and DA
  // ranking must fail loudly.
  for (const auto& s : scored.scores)
    CHECK(s.method == scoring::ScoreMethod::mqm_weighted);
  CHECK_THROWS_AS(runner::rank_run(cfg.out_dir, scoring::ScoreMethod::da),
                  MqmError);
}

TEST_CASE("da rows reach rank when the backend emits quality scores") {
  TempDir tmp("runner-da-live");
  std::string units_path =
      prepare_units(tmp, Granularity::doc, default_spec_3sys(), "a");

  // Fake endpoint: fewer errors in the prompt's gold means a higher score.
  // It answers every request with one minor error and a quality score
  // derived from the prompt length so systems differ.
  std::atomic<int> counter{0};
  backends::Transport scored_transport = [&](const backends::HttpRequest& req) {
    int score = 40 + (++counter % 3) * 20;  // 60, 80, 40, 60, ...
    jsonio::ordered_json error;
    error["error_span"] = "line";
    error["error_category"] = "fluency";
    error["error_type"] = "grammar";
    error["severity"] = "minor";
    jsonio::ordered_json content;
    content["errors"] = jsonio::ordered_json::array({error});
    content["quality_score"] = score;
    jsonio::ordered_json message;
    message["role"] = "assistant";
    message["content"] = content.dump();
    jsonio::ordered_json choice;
    choice["message"] = message;
    jsonio::ordered_json reply;
    reply["choices"] = jsonio::ordered_json::array({choice});
    (void)req;
    return backends::HttpResponse{200, reply.dump(), ""};
  };

  auto cfg = base_config(units_path, tmp.file("run"));
  cfg.prompt = prompting::Family::gemba;
  cfg.backend = "live";
  cfg.endpoint = "http://example.test/v1/chat/completions";
  cfg.model_id = "fake";
  cfg.da = true;
  cfg.concurrency = 1;
  runner::run_eval(cfg, scored_transport);
  auto scored = runner::score_run(cfg.out_dir);

  std::size_t da_rows = 0;
  for (const auto& s : scored.scores) {
    if (s.method != scoring::ScoreMethod::da) continue;
    ++da_rows;
    CHECK(s.score >= 0.0);
    CHECK(s.score <= 100.0);
  }
  CHECK(da_rows == jsonio::read_units(units_path).size());

  auto rank = runner::rank_run(cfg.out_dir, scoring::ScoreMethod::da);
  CHECK(rank.metric_scores.size() == 3);
}

#include "mqmeval/backends.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "mqmeval/corpus.hpp"
#include "mqmeval/parsing.hpp"

namespace mqmeval::backends {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<parsing::ErrorAnnotation> gold_response_errors(
    const EvalUnit& unit, const std::vector<GoldSpan>& spans,
    const std::string& tgt, const char* explanation, const char* error_type) {
  std::vector<parsing::ErrorAnnotation> errors;
  errors.reserve(spans.size());
  for (const GoldSpan& span : spans) {
    if (span.end > tgt.size())
      throw MqmError("gold span out of range in unit " + unit.unit_id);
    parsing::ErrorAnnotation a;
    a.span_text = tgt.substr(span.start, span.end - span.start);
    a.explanation = explanation;
    a.category = parsing::Category::accuracy;
    a.error_type = error_type;
    a.severity = span.severity;
    errors.push_back(std::move(a));
  }
  return errors;
}

}  // namespace

BackendResponse oracle_complete(const EvalUnit& unit,
                                std::optional<std::size_t> focus) {
  const EvalUnit* scored = &unit;
  EvalUnit sub;
  if (focus) {
    sub = corpus::focus_subunit(unit, *focus);
    scored = &sub;
  }
  BackendResponse resp;
  resp.text = parsing::serialize_response(
      gold_response_errors(*scored, scored->gold, scored->tgt, "gold", "gold"));
  resp.output_tokens = whitespace_token_count(resp.text);
  resp.model_id = "oracle";
  return resp;
}

double emission_probability(const BiasParams& params, double length_tokens) {
  return params.base_recall *
         std::exp2(-length_tokens / params.halflife_tokens);
}

BackendResponse biased_complete(const EvalUnit& unit, const BiasParams& params,
                                const TokenCounter& counter) {
  if (params.base_recall < 0 || params.base_recall > 1)
    throw MqmError("base_recall must lie in [0, 1]");
  if (!(params.halflife_tokens > 0))
    throw MqmError("halflife_tokens must be positive");
  if (params.severity_noise < 0 || params.severity_noise > 1)
    throw MqmError("severity_noise must lie in [0, 1]");

  double length = static_cast<double>(counter(unit.src) + counter(unit.tgt));
  double p = emission_probability(params, length);

  std::vector<GoldSpan> emitted;
  for (std::size_t i = 0; i < unit.gold.size(); ++i) {
    SplitMix64 rng(derive_seed(params.seed,
                               unit.unit_id + "#span" + std::to_string(i)));
    if (rng.uniform01() >= p) continue;
    GoldSpan span = unit.gold[i];
    if (rng.uniform01() < params.severity_noise) {
      // Resample uniformly from the two other severities.
      static const Severity all[3] = {Severity::minor, Severity::major,
                                      Severity::critical};
      Severity others[2];
      int k = 0;
      for (Severity s : all)
        if (s != span.severity) others[k++] = s;
      span.severity = others[rng.bounded(2)];
    }
    emitted.push_back(span);
  }

  BackendResponse resp;
  resp.text = parsing::serialize_response(gold_response_errors(
      unit, emitted, unit.tgt, "simulated", "simulated"));
  resp.output_tokens = whitespace_token_count(resp.text);
  resp.model_id = "sim";
  return resp;
}

// ---------------------------------------------------------------------------
// ResponseCache
// ---------------------------------------------------------------------------

namespace fs = std::filesystem;

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

std::string ResponseCache::make_key(const std::string& model_id,
                                    const std::string& full_prompt,
                                    const prompting::Decoding& decoding) {
  ordered_json key;
  key["model"] = model_id;
  key["temperature"] = decoding.temperature;
  key["max_tokens"] = decoding.max_output_tokens;
  key["prompt"] = full_prompt;
  return key.dump();
}

fs::path ResponseCache::entry_path(const std::string& key) const {
  std::string hash = fnv1a64_hex(key);
  return dir_ / hash.substr(0, 2) / (hash + ".json");
}

std::optional<BackendResponse> ResponseCache::lookup(const std::string& key) const {
  fs::path path = entry_path(key);
  if (!fs::exists(path)) return std::nullopt;
  json entry;
  try {
    std::ifstream in(path);
    in >> entry;
  } catch (const std::exception& e) {
    throw MqmError("corrupt cache entry " + path.string() + ": " + e.what());
  }
  if (!entry.is_object() || !entry.contains("key") || !entry.contains("response"))
    throw MqmError("corrupt cache entry " + path.string() + ": missing fields");
  if (entry["key"].get<std::string>() != key)
    throw MqmError("cache key collision at " + path.string());
  const json& r = entry["response"];
  BackendResponse resp;
  resp.text = r.at("text").get<std::string>();
  resp.input_tokens = r.value("input_tokens", std::int64_t{0});
  resp.output_tokens = r.value("output_tokens", std::int64_t{0});
  resp.latency_ms = r.value("latency_ms", std::int64_t{0});
  resp.model_id = r.value("model_id", std::string());
  resp.from_cache = true;
  return resp;
}

void ResponseCache::store(const std::string& key, const BackendResponse& response) {
  fs::path path = entry_path(key);
  fs::create_directories(path.parent_path());

  ordered_json entry;
  entry["key"] = key;
  ordered_json r;
  r["text"] = response.text;
  r["input_tokens"] = response.input_tokens;
  r["output_tokens"] = response.output_tokens;
  r["latency_ms"] = response.latency_ms;
  r["model_id"] = response.model_id;
  entry["response"] = std::move(r);

  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw MqmError("cannot write cache entry " + tmp.string());
    out << entry.dump();
  }
  fs::rename(tmp, path);

  std::lock_guard<std::mutex> lock(index_mutex_);
  std::ofstream index(dir_ / "index.jsonl", std::ios::app);
  ordered_json row;
  row["hash"] = fnv1a64_hex(key);
  row["model_id"] = response.model_id;
  row["output_tokens"] = response.output_tokens;
  index << row.dump() << "\n";
}

// ---------------------------------------------------------------------------
// LiveBackend
// ---------------------------------------------------------------------------

LiveBackend::LiveBackend(LiveConfig config, Transport transport,
                         ResponseCache* cache)
    : config_(std::move(config)), transport_(std::move(transport)), cache_(cache) {
  if (!config_.sleep_ms)
    config_.sleep_ms = [](int ms) {
      std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    };
}

BackendResponse LiveBackend::complete(const prompting::PromptBundle& bundle) {
  if (bundle.decoding.temperature != 0.0)
    throw MqmError("decoding temperature must be 0");
  std::string prompt = bundle.full_prompt();
  std::string key =
      ResponseCache::make_key(config_.model_id, prompt, bundle.decoding);
  if (cache_) {
    if (auto hit = cache_->lookup(key)) return *hit;
  }

  ordered_json body;
  body["model"] = config_.model_id;
  body["messages"] = ordered_json::array(
      {ordered_json{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = bundle.decoding.temperature;
  body["max_tokens"] = bundle.decoding.max_output_tokens;

  HttpRequest req;
  req.url = config_.endpoint_url;
  req.headers.emplace_back("Content-Type", "application/json");
  if (!config_.api_key.empty())
    req.headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  req.body = body.dump();

  auto start = std::chrono::steady_clock::now();
  HttpResponse http;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    http = transport_(req);
    if (http.status == 200) break;
    bool transient = http.status == 0 || http.status == 429 || http.status >= 500;
    if (!transient)
      throw BackendError(http.status, bundle.unit_ref,
                         http.error.empty() ? http.body : http.error);
    if (attempt == config_.max_attempts)
      throw BackendError(http.status, bundle.unit_ref,
                         "still failing after " + std::to_string(attempt) +
                             " attempts");
    config_.sleep_ms(config_.backoff_base_ms << (attempt - 1));
  }

  BackendResponse resp;
  try {
    json reply = json::parse(http.body);
    resp.text = reply.at("choices").at(0).at("message").at("content")
                    .get<std::string>();
    if (reply.contains("usage")) {
      resp.input_tokens = reply["usage"].value("prompt_tokens", std::int64_t{0});
      resp.output_tokens =
          reply["usage"].value("completion_tokens", std::int64_t{0});
    }
  } catch (const json::exception& e) {
    throw BackendError(http.status, bundle.unit_ref,
                       std::string("unexpected response body: ") + e.what());
  }
  if (resp.input_tokens == 0) resp.input_tokens = whitespace_token_count(prompt);
  if (resp.output_tokens == 0)
    resp.output_tokens = whitespace_token_count(resp.text);
  resp.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  resp.model_id = config_.model_id;
  if (cache_) cache_->store(key, resp);
  return resp;
}

// ---------------------------------------------------------------------------
// Executor
// ---------------------------------------------------------------------------

TokenBucket::TokenBucket(double requests_per_second)
    : rate_(requests_per_second),
      tokens_(requests_per_second > 0 ? 1.0 : 0.0),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;  // unlimited
  for (;;) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto now = std::chrono::steady_clock::now();
      double elapsed = std::chrono::duration<double>(now - last_).count();
      last_ = now;
      tokens_ = std::min(std::max(rate_, 1.0), tokens_ + elapsed * rate_);
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
}

RequestExecutor::RequestExecutor(int max_in_flight, double requests_per_second)
    : max_in_flight_(max_in_flight < 1 ? 1 : max_in_flight),
      requests_per_second_(requests_per_second) {}

std::vector<BackendResponse> RequestExecutor::run(
    std::size_t n, const std::function<BackendResponse(std::size_t)>& task) {
  std::vector<BackendResponse> results(n);
  if (n == 0) return results;

  TokenBucket bucket(requests_per_second_);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n || stop.load()) return;
      bucket.acquire();
      try {
        results[i] = task(i);
      } catch (...) {
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
        stop.store(true);
        return;
      }
    }
  };

  std::size_t n_threads =
      std::min<std::size_t>(static_cast<std::size_t>(max_in_flight_), n);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace mqmeval::backends

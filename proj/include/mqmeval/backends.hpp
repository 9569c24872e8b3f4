#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mqmeval/prompting.hpp"
#include "mqmeval/types.hpp"
#include "mqmeval/util.hpp"

namespace mqmeval::backends {

struct BackendResponse {
  std::string text;
  std::int64_t input_tokens = 0;   // endpoint-reported, or whitespace-counted
  std::int64_t output_tokens = 0;  // for the deterministic test backends
  std::int64_t latency_ms = 0;
  bool from_cache = false;
  std::string model_id;
};

// Error from the live endpoint after retries were exhausted (or for a
// non-transient status). Carries the HTTP status and the unit the request
// was rendered for.
class BackendError : public MqmError {
 public:
  BackendError(int status, const std::string& unit_ref, const std::string& msg)
      : MqmError("backend error (status " + std::to_string(status) + ", unit " +
                 unit_ref + "): " + msg),
        status_(status),
        unit_ref_(unit_ref) {}

  int status() const { return status_; }
  const std::string& unit_ref() const { return unit_ref_; }

 private:
  int status_;
  std::string unit_ref_;
};

// ---------------------------------------------------------------------------
// Deterministic test backends
// ---------------------------------------------------------------------------

// Answers with exactly the unit's gold annotations, serialized under the
// response schema (category "accuracy", explanation "gold"). With a focus
// index, only the spans of that segment are emitted.
BackendResponse oracle_complete(const EvalUnit& unit,
                                std::optional<std::size_t> focus = std::nullopt);

// Length-bias simulator. Each gold span of a unit with L = tokens(src) +
// tokens(tgt) is emitted independently with probability
//   p(L) = base_recall * 2^(-L / halflife_tokens),
// so longer inputs retain fewer spans. An emitted span's severity is
// resampled uniformly from the other two severities with probability
// severity_noise. Draws are seeded per (unit_id, span index).
struct BiasParams {
  double base_recall = 0.95;
  double halflife_tokens = 1500.0;
  double severity_noise = 0.1;
  std::uint64_t seed = 0;
};

double emission_probability(const BiasParams& params, double length_tokens);

BackendResponse biased_complete(const EvalUnit& unit, const BiasParams& params,
                                const TokenCounter& counter);

// ---------------------------------------------------------------------------
// Response cache
// ---------------------------------------------------------------------------

// One file per response under a content-addressed directory plus an
// append-only index. Survives interrupted runs: entries are written to a
// temp file and renamed into place. An unreadable entry raises, it is never
// treated as a miss.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<BackendResponse> lookup(const std::string& key) const;
  void store(const std::string& key, const BackendResponse& response);

  static std::string make_key(const std::string& model_id,
                              const std::string& full_prompt,
                              const prompting::Decoding& decoding);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path entry_path(const std::string& key) const;

  std::filesystem::path dir_;
  mutable std::mutex index_mutex_;
};

// ---------------------------------------------------------------------------
// Live backend
// ---------------------------------------------------------------------------

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
};

struct HttpResponse {
  int status = 0;  // 0: transport-level failure
  std::string body;
  std::string error;
};

using Transport = std::function<HttpResponse(const HttpRequest&)>;

// Transport backed by cpp-httplib. `url` must be http(s)://host[:port]/path.
Transport httplib_transport();

struct LiveConfig {
  std::string endpoint_url;
  std::string model_id;
  std::string api_key;  // sent as a bearer token when non-empty
  int max_attempts = 5;
  int backoff_base_ms = 250;
  // Injectable for tests; defaults to a real sleep.
  std::function<void(int)> sleep_ms;
};

// Chat-completion client with a persistent response cache and exponential
// backoff on transient failures (transport errors, 429, 5xx). The cache key
// covers model, full prompt text and decoding params.
class LiveBackend {
 public:
  LiveBackend(LiveConfig config, Transport transport, ResponseCache* cache);

  BackendResponse complete(const prompting::PromptBundle& bundle);

 private:
  LiveConfig config_;
  Transport transport_;
  ResponseCache* cache_;  // may be null (caching disabled)
};

// ---------------------------------------------------------------------------
// Bounded-concurrency executor
// ---------------------------------------------------------------------------

// Simple blocking token bucket for per-endpoint rate limiting.
class TokenBucket {
 public:
  explicit TokenBucket(double requests_per_second);
  void acquire();

 private:
  double rate_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

// Runs n index-addressed tasks with at most max_in_flight running at once.
// Results land at their input index, so downstream output is independent of
// completion order. The first task exception cancels the remaining queue
// and is rethrown.
class RequestExecutor {
 public:
  explicit RequestExecutor(int max_in_flight, double requests_per_second = 0.0);

  std::vector<BackendResponse> run(
      std::size_t n, const std::function<BackendResponse(std::size_t)>& task);

 private:
  int max_in_flight_;
  double requests_per_second_;
};

}  // namespace mqmeval::backends

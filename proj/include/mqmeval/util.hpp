#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mqmeval {

// Error type for all precondition/IO failures raised by the library.
class MqmError : public std::runtime_error {
 public:
  explicit MqmError(const std::string& what) : std::runtime_error(what) {}
};

// Counts tokens in a piece of text. The default counter splits on
// whitespace; an exact model-specific counter can be plugged in where
// token-faithful statistics are needed.
using TokenCounter = std::function<std::int64_t(std::string_view)>;

std::int64_t whitespace_token_count(std::string_view text);
TokenCounter whitespace_counter();

// FNV-1a, 64 bit. Stable across platforms and runs; used for cache keys,
// run ids and seed derivation.
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

// SplitMix64: tiny deterministic generator. All randomness in the library
// flows through this so that seeded results are identical on every
// platform (std::shuffle and the std distributions are not portable).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform in [0, 1).
  double uniform01();
  // Uniform in [0, bound), bias-free via rejection.
  std::uint64_t bounded(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// Seed derived from a named context, for per-item deterministic draws.
std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view context);

// In-place Fisher-Yates with a SplitMix64 stream.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(items[i - 1], items[j]);
  }
}

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
bool starts_with(std::string_view text, std::string_view prefix);

// Nearest-rank percentile over a sorted copy of `values`: the p-th
// percentile is the (floor(p*n/100) + 1)-th smallest value, clamped to n.
// p99 of [1..100] is 100 under this rule.
std::int64_t percentile_nearest_rank(std::vector<std::int64_t> values, int p);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace mqmeval

#include "mqmeval/types.hpp"

namespace mqmeval {

const char* to_string(Severity s) {
  switch (s) {
    case Severity::minor: return "minor";
    case Severity::major: return "major";
    case Severity::critical: return "critical";
  }
  return "minor";
}

const char* to_string(Granularity g) {
  switch (g) {
    case Granularity::seg: return "seg";
    case Granularity::doc: return "doc";
    case Granularity::doc5: return "doc5";
  }
  return "seg";
}

std::optional<Severity> severity_from_string(std::string_view s) {
  if (s == "minor") return Severity::minor;
  if (s == "major") return Severity::major;
  if (s == "critical") return Severity::critical;
  return std::nullopt;
}

std::optional<Granularity> granularity_from_string(std::string_view s) {
  if (s == "seg") return Granularity::seg;
  if (s == "doc") return Granularity::doc;
  if (s == "doc5") return Granularity::doc5;
  return std::nullopt;
}

}  // namespace mqmeval

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "mmla/analytics.hpp"
#include "mmla/types.hpp"

namespace mmla {

struct Config {
  std::filesystem::path store_root = "mmla-store";
  int port = 8080;
  std::int64_t window_ms = analytics::kDefaultWindowMs;
  std::int64_t correlation_step_ms = analytics::kDefaultCorrelationStepMs;
  double prominence_frac = analytics::kDefaultProminenceFrac;
  std::map<Modality, ValueRange> ranges;

  ValueRange range_for(Modality m) const;

  /// Defaults, then the JSON file (if given), then MMLA_* environment
  /// variables.
  static Config load(const std::optional<std::filesystem::path>& file);
  static Config from_json_text(std::string_view text);
  void apply_env();
};

}  // namespace mmla

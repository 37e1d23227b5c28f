#include "mmla/config.hpp"

#include <cstdlib>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "mmla/error.hpp"

namespace mmla {

using nlohmann::json;

ValueRange Config::range_for(Modality m) const {
  auto it = ranges.find(m);
  return it == ranges.end() ? default_range(m) : it->second;
}

Config Config::from_json_text(std::string_view text) {
  Config c;
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::BadParams, "config file is not a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "store_root") c.store_root = v.get<std::string>();
      else if (key == "port") c.port = v.get<int>();
      else if (key == "window_ms") c.window_ms = v.get<std::int64_t>();
      else if (key == "correlation_step_ms") c.correlation_step_ms = v.get<std::int64_t>();
      else if (key == "prominence_frac") c.prominence_frac = v.get<double>();
      else if (key == "ranges") {
        for (const auto& [name, r] : v.items()) {
          auto m = parse_modality(name);
          if (!m) throw Error(ErrorCode::BadParams, "config: unknown modality '" + name + "' in ranges");
          ValueRange range = default_range(*m);
          if (r.contains("lo")) range.lo = r["lo"].get<double>();
          if (r.contains("hi")) range.hi = r["hi"].get<double>();
          if (r.contains("lo_exclusive")) range.lo_exclusive = r["lo_exclusive"].get<bool>();
          if (r.contains("hi_exclusive")) range.hi_exclusive = r["hi_exclusive"].get<bool>();
          c.ranges[*m] = range;
        }
      } else {
        throw Error(ErrorCode::BadParams, "config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::BadParams, std::string("config: ") + e.what());
  }
  return c;
}

void Config::apply_env() {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    return v != nullptr && *v != '\0' ? std::optional<std::string>(v) : std::nullopt;
  };
  try {
    if (auto v = env("MMLA_STORE_ROOT")) store_root = *v;
    if (auto v = env("MMLA_PORT")) port = std::stoi(*v);
    if (auto v = env("MMLA_WINDOW_MS")) window_ms = std::stoll(*v);
    if (auto v = env("MMLA_CORRELATION_STEP_MS")) correlation_step_ms = std::stoll(*v);
    if (auto v = env("MMLA_PROMINENCE_FRAC")) prominence_frac = std::stod(*v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadParams, "malformed MMLA_* environment variable");
  }
}

Config Config::load(const std::optional<std::filesystem::path>& file) {
  Config c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::Io, "cannot read config file " + file->string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    c = from_json_text(text);
  }
  c.apply_env();
  return c;
}

}  // namespace mmla

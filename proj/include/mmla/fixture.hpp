#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmla/types.hpp"

namespace mmla::fixture {

/// What the synthetic demo session contains, for tests to check against.
struct DemoInfo {
  std::filesystem::path manifest;
  std::string learner_ref;
  std::size_t stream_count = 0;
  std::size_t activity_count = 0;
  std::size_t media_count = 0;
  std::vector<ActivityInterval> activities;  // master clock
};

/// Writes a deterministic synthetic session (9 signal streams over three
/// devices with different clocks, 5 activities, 4 media assets, pretest
/// 40/100 and posttest 70/100) into `dir`.
DemoInfo write_demo(const std::filesystem::path& dir, std::uint64_t seed = 7,
                    const std::string& learner_ref = "learner-DEMO-0042");

}  // namespace mmla::fixture

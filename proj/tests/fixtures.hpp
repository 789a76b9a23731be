#pragma once

#include <filesystem>
#include <string>

#include "demodrive/expert.hpp"

namespace fixtures {

// The canonical 331-sample scripted-expert set on the default track.
inline demodrive::DemoSet expert_demos(std::size_t samples = 331) {
  demodrive::Environment env(demodrive::default_track(), demodrive::SimConfig{});
  demodrive::ExpertRecordOptions opts;
  opts.samples = samples;
  return demodrive::record_expert(env, demodrive::PurePursuitExpert{}, opts);
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("demodrive_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace fixtures

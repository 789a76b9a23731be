#include "demodrive/demo_store.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "demodrive/errors.hpp"
#include "demodrive/io.hpp"

namespace demodrive {
namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

DemoSample sample_from_json(const nlohmann::json& j) {
  DemoSample s;
  const auto& obs = j.at("obs");
  if (obs.size() != kObservationSize) throw std::invalid_argument("obs must have 10 entries");
  std::array<double, kObservationSize> flat{};
  for (int i = 0; i < kObservationSize; ++i) flat[static_cast<std::size_t>(i)] = obs.at(static_cast<std::size_t>(i)).get<double>();
  s.obs = Observation::from_flat(flat);
  const auto& action = j.at("action");
  if (action.size() != 2) throw std::invalid_argument("action must be [v, w]");
  s.action = {action.at(0).get<double>(), action.at(1).get<double>()};
  s.reward = j.at("reward").get<double>();
  const auto& pose = j.at("pose");
  if (pose.size() != 3) throw std::invalid_argument("pose must be [x, y, h]");
  s.pose = {pose.at(0).get<double>(), pose.at(1).get<double>(), pose.at(2).get<double>()};
  s.t = j.at("t").get<double>();
  return s;
}

}  // namespace

void DemoSample::validate() const {
  if (!std::isfinite(reward) || reward < 0.0 || reward > 1.0) throw ValidationError("sample reward outside [0, 1]");
  if (!action.in_range()) throw ValidationError("sample action outside the command ranges");
  if (!obs.valid()) throw ValidationError("sample observation outside its ranges");
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.heading) ||
      pose.heading <= -std::numbers::pi || pose.heading > std::numbers::pi) {
    throw ValidationError("sample pose is not finite/normalized");
  }
  if (!std::isfinite(t) || t < 0.0) throw ValidationError("sample time must be finite and non-negative");
}

void DemoSet::append(const DemoSample& sample) {
  sample.validate();
  samples_.push_back(sample);
}

void DemoSet::append(const DemoSample& sample, const std::string& track_hash) {
  if (track_hash != meta_.track_hash) {
    throw DatasetError("sample recorded on track " + track_hash + " but set belongs to " + meta_.track_hash);
  }
  append(sample);
}

std::vector<double> DemoSet::rewards() const {
  std::vector<double> r;
  r.reserve(samples_.size());
  for (const auto& s : samples_) r.push_back(s.reward);
  return r;
}

DemoMeta make_meta(const Track& track, std::string recorder, nlohmann::json config) {
  return {track.hash(), std::move(recorder), utc_timestamp(), std::move(config)};
}

std::pair<DemoSet, DemoSet> split(const DemoSet& set, double train_fraction, std::uint64_t seed) {
  const std::size_t n = set.size();
  if (n < 10) throw DatasetError("need at least 10 samples to split, have " + std::to_string(n));
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw DatasetError("train fraction must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  // The epsilon keeps 0.1 * N from landing just under a .5 boundary after
  // 1 - 0.9 rounds to 0.09999...
  const auto n_test = static_cast<std::size_t>(std::floor((1.0 - train_fraction) * static_cast<double>(n) + 0.5 + 1e-9));
  DemoSet train(set.meta());
  DemoSet test(set.meta());
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_test ? test : train).append(set.samples()[order[i]]);
  }
  return {std::move(train), std::move(test)};
}

nlohmann::json sample_to_json(const DemoSample& s) {
  const auto flat = s.obs.flat();
  return {{"t", s.t},
          {"obs", std::vector<double>(flat.begin(), flat.end())},
          {"action", {s.action.speed, s.action.steer}},
          {"reward", s.reward},
          {"pose", {s.pose.x, s.pose.y, s.pose.heading}}};
}

std::string serialize(const DemoSet& set) {
  std::ostringstream out;
  const DemoMeta& m = set.meta();
  nlohmann::json header = {{"format_version", kDemoFormatVersion},
                           {"meta",
                            {{"track_hash", m.track_hash},
                             {"recorder", m.recorder},
                             {"created_at", m.created_at},
                             {"config", m.config}}}};
  out << header.dump() << '\n';
  for (const auto& s : set.samples()) out << sample_to_json(s).dump() << '\n';
  return out.str();
}

void save(const DemoSet& set, const std::string& path) { write_file_atomic(path, serialize(set)); }

DemoSet parse_demos(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "missing header line");
  ++line_no;
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object()) throw ParseError(line_no, "header is not a JSON object");
  if (!header.contains("format_version") || !header["format_version"].is_number_integer()) {
    throw ParseError(line_no, "header has no integer format_version");
  }
  if (header["format_version"].get<int>() != kDemoFormatVersion) {
    throw VersionError("unsupported demo format_version " + header["format_version"].dump());
  }
  DemoMeta meta;
  try {
    const auto& m = header.at("meta");
    meta.track_hash = m.at("track_hash").get<std::string>();
    meta.recorder = m.at("recorder").get<std::string>();
    meta.created_at = m.at("created_at").get<std::string>();
    meta.config = m.value("config", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_no, std::string("bad meta: ") + e.what());
  }
  if (meta.recorder != "human" && meta.recorder != "scripted") {
    throw ValidationError("line 1: recorder must be 'human' or 'scripted'");
  }
  DemoSet set(std::move(meta));
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(line_no, "not valid JSON");
    DemoSample s;
    try {
      s = sample_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    try {
      set.append(s);
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return set;
}

DemoSet load_demos(const std::string& path) { return parse_demos(read_file(path)); }

DemoSet load_demos(const std::string& path, const Track& track) {
  DemoSet set = load_demos(path);
  if (set.meta().track_hash != track.hash()) {
    throw DatasetError("demo file " + path + " was recorded on track " + set.meta().track_hash +
                       ", current track is " + track.hash());
  }
  return set;
}

double recorded_ideal_speed(const DemoSet& set, const RewardParams& fallback) {
  const auto& cfg = set.meta().config;
  if (cfg.contains("reward") && cfg["reward"].contains("ideal_speed") && cfg["reward"]["ideal_speed"].is_number()) {
    return cfg["reward"]["ideal_speed"].get<double>();
  }
  return fallback.ideal_speed;
}

DemoSet relabel_rewards(const DemoSet& set, Environment& env) {
  if (set.meta().track_hash != env.track().hash()) {
    throw DatasetError("demo set belongs to track " + set.meta().track_hash + ", not " + env.track().hash());
  }
  const double ideal_speed = recorded_ideal_speed(set, env.reward_params());
  DemoMeta meta = set.meta();
  meta.config["reward"] = env.reward_params();
  DemoSet out(meta);
  for (DemoSample s : set.samples()) {
    env.reposition(s.pose, s.obs.speed_norm * ideal_speed);
    s.reward = env.step(s.action).reward;
    out.append(s);
  }
  return out;
}

}  // namespace demodrive

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "demodrive/compare.hpp"
#include "demodrive/ddpg.hpp"
#include "demodrive/deploy.hpp"
#include "demodrive/errors.hpp"
#include "demodrive/evaluate.hpp"
#include "demodrive/expert.hpp"
#include "demodrive/imitation.hpp"
#include "demodrive/policy.hpp"
#include "demodrive/reward.hpp"

namespace py = pybind11;
using namespace demodrive;

namespace {

// Configs cross the boundary as plain dicts, using the same keys as the
// JSON config file.
template <typename T>
T from_dict(const py::dict& d) {
  T value{};
  if (d.size()) {
    auto json_mod = py::module_::import("json");
    from_json(nlohmann::json::parse(py::str(json_mod.attr("dumps")(d)).cast<std::string>()), value);
  }
  return value;
}

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_demodrive, m) {
  m.doc() = "Deterministic 2D driving sim with demonstration-bootstrapped DDPG";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<TrainingError>(m, "TrainingError", base.ptr());
  py::register_exception<DatasetError>(m, "DatasetError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<VersionError>(m, "VersionError", base.ptr());
  py::register_exception<CorruptError>(m, "CorruptError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());

  py::class_<RewardParams>(m, "RewardParams")
      .def(py::init<>())
      .def_readwrite("ideal_distance", &RewardParams::ideal_distance)
      .def_readwrite("ideal_speed", &RewardParams::ideal_speed)
      .def_readwrite("distance_weight", &RewardParams::distance_weight)
      .def_readwrite("speed_weight", &RewardParams::speed_weight)
      .def_readwrite("cutoff", &RewardParams::cutoff)
      .def_readwrite("event_threshold", &RewardParams::event_threshold)
      .def("validate", &RewardParams::validate);

  m.def("compute_reward", &compute_reward, py::arg("distance_to_edge"), py::arg("speed"),
        py::arg("params") = RewardParams{});
  m.def("is_reward_event", &is_reward_event, py::arg("reward"), py::arg("params") = RewardParams{});
  m.def(
      "count_events", [](const std::vector<double>& r, const RewardParams& p) { return count_events(r, p); },
      py::arg("rewards"), py::arg("params") = RewardParams{});
  m.def("autonomy", &autonomy, py::arg("interventions"), py::arg("testing_time"),
        py::arg("penalty") = kInterventionPenaltySeconds);

  py::class_<Vec2>(m, "Vec2")
      .def(py::init<double, double>())
      .def_readwrite("x", &Vec2::x)
      .def_readwrite("y", &Vec2::y)
      .def("__repr__", [](const Vec2& v) { return "Vec2(" + std::to_string(v.x) + ", " + std::to_string(v.y) + ")"; });

  py::class_<TrackQuery>(m, "TrackQuery")
      .def_readonly("nearest_point", &TrackQuery::nearest_point)
      .def_readonly("arc_position", &TrackQuery::arc_position)
      .def_readonly("lateral_offset", &TrackQuery::lateral_offset)
      .def_readonly("dist_to_edge", &TrackQuery::dist_to_edge);

  py::class_<Track>(m, "Track")
      .def(py::init<std::vector<Vec2>, double, Vec2>(), py::arg("centerline"), py::arg("lane_half_width"),
           py::arg("bounds"))
      .def_property_readonly("centerline", &Track::centerline)
      .def_property_readonly("lane_half_width", &Track::lane_half_width)
      .def_property_readonly("total_length", &Track::total_length)
      .def("query", [](const Track& t, double x, double y) { return t.query({x, y}); })
      .def("hash", &Track::hash)
      .def("to_dict", [](const Track& t) { return to_py(t.to_json()); })
      .def_static("load", &Track::load)
      .def("save", &Track::save);
  m.def("default_track", &default_track);

  py::class_<Pose>(m, "Pose")
      .def(py::init<double, double, double>(), py::arg("x") = 0.0, py::arg("y") = 0.0, py::arg("heading") = 0.0)
      .def_readwrite("x", &Pose::x)
      .def_readwrite("y", &Pose::y)
      .def_readwrite("heading", &Pose::heading);

  py::class_<Action>(m, "Action")
      .def(py::init<double, double>(), py::arg("speed") = 0.0, py::arg("steer") = 0.0)
      .def_readwrite("speed", &Action::speed)
      .def_readwrite("steer", &Action::steer)
      .def("__eq__", [](const Action& a, const Action& b) { return a == b; });

  py::class_<Observation>(m, "Observation")
      .def_readonly("rays", &Observation::rays)
      .def_readonly("speed_norm", &Observation::speed_norm)
      .def("flat", &Observation::flat);

  py::class_<StepResult>(m, "StepResult")
      .def_readonly("obs", &StepResult::obs)
      .def_readonly("reward", &StepResult::reward)
      .def_readonly("reward_event", &StepResult::reward_event)
      .def_readonly("off_track", &StepResult::off_track)
      .def_readonly("truncated", &StepResult::truncated)
      .def_readonly("pose", &StepResult::pose)
      .def_readonly("speed", &StepResult::speed)
      .def_readonly("dist_to_edge", &StepResult::dist_to_edge)
      .def_readonly("progress", &StepResult::progress)
      .def_property_readonly("done", &StepResult::done);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SimConfig::dt)
      .def_readwrite("max_episode_steps", &SimConfig::max_episode_steps)
      .def_readwrite("rng_seed", &SimConfig::rng_seed)
      .def_readwrite("vehicle_half_size", &SimConfig::vehicle_half_size);

  py::class_<Environment>(m, "Environment")
      .def(py::init<Track, SimConfig, RewardParams>(), py::arg("track") = default_track(),
           py::arg("config") = SimConfig{}, py::arg("reward") = RewardParams{})
      .def("reset", &Environment::reset, py::arg("spawn") = py::none())
      .def("step", &Environment::step)
      .def("reposition", &Environment::reposition)
      .def_property_readonly("pose", &Environment::pose)
      .def_property_readonly("speed", &Environment::speed)
      .def_property_readonly("running", &Environment::running)
      .def_property_readonly("steps", &Environment::steps)
      .def("observation", &Environment::observation);

  py::class_<DemoSet>(m, "DemoSet")
      .def("__len__", &DemoSet::size)
      .def("rewards", &DemoSet::rewards)
      .def_property_readonly("track_hash", [](const DemoSet& s) { return s.meta().track_hash; })
      .def_property_readonly("recorder", [](const DemoSet& s) { return s.meta().recorder; })
      .def("save", [](const DemoSet& s, const std::string& path) { save(s, path); });
  m.def("load_demos", py::overload_cast<const std::string&>(&load_demos));
  m.def(
      "split", [](const DemoSet& s, double f, std::uint64_t seed) { return split(s, f, seed); }, py::arg("demos"),
      py::arg("train_fraction") = 0.9, py::arg("seed") = 0);
  m.def(
      "record_expert",
      [](Environment& env, std::size_t samples, int stride, double spawn_arc) {
        return record_expert(env, PurePursuitExpert{}, {samples, stride, spawn_arc});
      },
      py::arg("env"), py::arg("samples") = 331, py::arg("stride") = 0, py::arg("spawn_arc") = 0.0);

  // Networks stay opaque; they round-trip through the model file format.
  py::class_<nn::NetworkParams>(m, "Network")
      .def_property_readonly("parameter_count", &nn::NetworkParams::parameter_count)
      .def("save", [](const nn::NetworkParams& p, const std::string& path) { nn::save(p, path); })
      .def("to_dict", [](const nn::NetworkParams& p) { return to_py(nn::to_json(p)); })
      .def("__eq__", [](const nn::NetworkParams& a, const nn::NetworkParams& b) { return a == b; });
  m.def("load_network", &nn::load);
  m.def("predict", &predict, py::arg("policy"), py::arg("obs"));

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("epoch", &EpochStats::epoch)
      .def_readonly("train_mse", &EpochStats::train_mse)
      .def_readonly("test_mse", &EpochStats::test_mse);
  py::class_<BcResult>(m, "BcResult")
      .def_readonly("policy", &BcResult::policy)
      .def_readonly("report", &BcResult::report)
      .def_readonly("best_epoch", &BcResult::best_epoch);
  m.def(
      "train_bc", [](const DemoSet& demos, const py::dict& config) { return train_bc(demos, from_dict<BcConfig>(config)); },
      py::arg("demos"), py::arg("config") = py::dict());

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("actor", &TrainResult::actor)
      .def_readonly("critic", &TrainResult::critic)
      .def_property_readonly("log_csv", [](const TrainResult& r) { return training_log_csv(r.log); })
      .def_property_readonly("demo_reward_events", [](const TrainResult& r) { return r.log.demo_reward_events; });
  m.def(
      "train_ddpg",
      [](Environment& env, long budget, std::optional<DemoSet> demos, const py::dict& ddpg, const py::dict& bc) {
        const DdpgConfig dc = from_dict<DdpgConfig>(ddpg);
        const BcConfig bcc = from_dict<BcConfig>(bc);
        py::gil_scoped_release release;
        return train_ddpg(env, dc, demos, budget, bcc);
      },
      py::arg("env"), py::arg("budget"), py::arg("demos") = py::none(), py::arg("ddpg") = py::dict(),
      py::arg("bc") = py::dict());

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("autonomy_value", &EvalReport::autonomy_value)
      .def_readonly("interventions", &EvalReport::interventions)
      .def_readonly("testing_time", &EvalReport::testing_time)
      .def_readonly("reward_events", &EvalReport::reward_events)
      .def_readonly("mean_reward", &EvalReport::mean_reward)
      .def_readonly("laps_completed", &EvalReport::laps_completed);
  m.def(
      "evaluate",
      [](const nn::NetworkParams& policy, Environment& env, double duration, bool intervene, const py::dict& gains,
         std::optional<double> spawn) {
        const DriveGains g = from_dict<DriveGains>(gains);
        env.reset(spawn);
        const DriveTrace trace = drive(env, network_policy(policy), g, duration, intervene);
        return summarize(trace, env.reward_params());
      },
      py::arg("policy"), py::arg("env"), py::arg("duration") = 600.0, py::arg("intervene") = true,
      py::arg("gains") = py::dict(), py::arg("spawn") = py::none());

  py::class_<ComparisonTable>(m, "ComparisonTable")
      .def_readonly("budget", &ComparisonTable::budget)
      .def_readonly("seeds", &ComparisonTable::seeds)
      .def("csv", &comparison_csv)
      .def("plot_data_csv", &plot_data_csv)
      .def("median_eval_laps",
           [](const ComparisonTable& t, const std::string& m) {
             for (Method method : {Method::PureIl, Method::PureRl, Method::Combined}) {
               if (to_string(method) == m) return median_eval_laps(t, method);
             }
             throw ArgumentError("unknown method '" + m + "'");
           })
      .def("write", &write_comparison);
  m.def(
      "compare",
      [](const DemoSet& demos, long budget, std::vector<std::uint64_t> seeds, double eval_duration,
         const py::dict& ddpg, const py::dict& bc) {
        CompareOptions opts;
        opts.budget = budget;
        opts.seeds = std::move(seeds);
        opts.eval_duration = eval_duration;
        const DdpgConfig dc = from_dict<DdpgConfig>(ddpg);
        const BcConfig bcc = from_dict<BcConfig>(bc);
        py::gil_scoped_release release;
        return compare(default_track(), SimConfig{}, RewardParams{}, demos, dc, bcc, opts);
      },
      py::arg("demos"), py::arg("budget") = 50'000, py::arg("seeds") = std::vector<std::uint64_t>{1, 2, 3},
      py::arg("eval_duration") = 600.0, py::arg("ddpg") = py::dict(), py::arg("bc") = py::dict());
}

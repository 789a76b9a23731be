import math

import pytest

import demodrive as dd


def test_reward_and_autonomy_anchors():
    assert dd.compute_reward(0.10, 0.10) == pytest.approx(1.0, abs=1e-12)
    assert dd.compute_reward(0.005, 0.10) == 0.0
    assert dd.compute_reward(0.05, 0.02) == pytest.approx(0.35, abs=1e-12)
    assert dd.autonomy(95, 600) == 5.0
    assert dd.autonomy(0, 600) == 100.0
    with pytest.raises(dd.ArgumentError):
        dd.autonomy(1, 0)


def test_track_and_env():
    track = dd.default_track()
    assert len(track.centerline) == 133
    assert track.total_length == pytest.approx(6.79651, abs=1e-5)
    env = dd.Environment(track)
    obs = env.reset()
    assert len(obs.rays) == 9
    r = env.step(dd.Action(0.1, 0.0))
    assert not r.done
    assert r.reward_event
    with pytest.raises(dd.RangeError):
        env.reset(100.0)


def test_expert_bc_and_eval(tmp_path):
    env = dd.Environment()
    demos = dd.record_expert(env)
    assert len(demos) == 331
    assert dd.count_events(demos.rewards()) == 331
    path = str(tmp_path / "d.demos.jsonl")
    demos.save(path)
    assert len(dd.load_demos(path)) == 331

    bc = dd.train_bc(demos, {"epochs": 20})
    assert len(bc.report) == 20
    report = dd.evaluate(bc.policy, dd.Environment(), duration=60.0)
    assert report.testing_time == pytest.approx(60.0)
    assert 0.0 <= report.autonomy_value <= 100.0

    model = str(tmp_path / "actor.json")
    bc.policy.save(model)
    assert dd.load_network(model) == bc.policy


def test_ddpg_is_deterministic():
    def run():
        env = dd.Environment()
        return dd.train_ddpg(env, 400, ddpg={"warmup_steps": 200, "checkpoint_interval": 100}).log_csv

    a, b = run(), run()
    assert a == b
    assert a.splitlines()[0] == "step,cum_reward_events,episodes,laps,mean_return,critic_loss,actor_obj"
    assert len(a.splitlines()) == 5


def test_bad_config_key_raises():
    with pytest.raises(dd.ValidationError):
        dd.train_bc(dd.record_expert(dd.Environment()), {"epoch": 3})

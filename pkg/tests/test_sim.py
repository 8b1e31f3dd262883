import numpy as np
import pytest

from mapfluct import errors, fluctuation as fl, zoo
from mapfluct.sim import SimConfig, sim_lattice, sim_mmbm, uniforms

from conftest import solved


def test_uniforms_are_counter_based():
    a = uniforms(1, np.arange(10, dtype=np.uint64), np.zeros(10, dtype=np.uint64), 0)
    b = uniforms(1, np.arange(10, dtype=np.uint64), np.zeros(10, dtype=np.uint64), 0)
    c = uniforms(2, np.arange(10, dtype=np.uint64), np.zeros(10, dtype=np.uint64), 0)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert np.all((a > 0) & (a < 1))


def test_uniform_moments():
    u = uniforms(5, np.arange(200_000, dtype=np.uint64), np.zeros(200_000, dtype=np.uint64), 3)
    assert abs(u.mean() - 0.5) < 0.005 and abs(u.var() - 1 / 12) < 0.002


def test_same_seed_same_estimate(bd12_killed):
    cfg = SimConfig(n_paths=5000, seed=11)
    e1 = sim_lattice(bd12_killed, "exit", {"a": 2, "b": 3}, cfg)
    e2 = sim_lattice(bd12_killed, "exit", {"a": 2, "b": 3}, cfg)
    assert np.array_equal(e1.mean, e2.mean)


@pytest.mark.parametrize("shards", [2, 7])
def test_shard_invariance(shards):
    model = zoo.mc_models()["three_phase_killed"]
    base = sim_lattice(model, "occupation", {"k": 0, "l": 2, "m": 2}, SimConfig(n_paths=3000))
    split = sim_lattice(model, "occupation", {"k": 0, "l": 2, "m": 2},
                        SimConfig(n_paths=3000, shards=shards))
    assert np.array_equal(base.mean, split.mean)
    m = zoo.mmbm_two_phase()
    base = sim_mmbm(m, "exit", {"a": 0.5, "b": 0.5}, SimConfig(n_paths=400, euler_dt=1e-2))
    split = sim_mmbm(m, "exit", {"a": 0.5, "b": 0.5},
                     SimConfig(n_paths=400, euler_dt=1e-2, shards=shards))
    assert np.array_equal(base.mean, split.mean)


def test_bd12_first_passage_is_certain(bd12):
    est = sim_lattice(bd12, "first_passage", {"k": 1}, SimConfig(n_paths=20_000, level_cap=200))
    assert est.mean[0, 0] == 1.0 and est.stderr[0, 0] == 0.0


def test_bd21_first_passage():
    est = sim_lattice(zoo.bd(2.0, 1.0), "first_passage", {"k": 1},
                      SimConfig(n_paths=100_000, level_cap=60))
    assert abs(est.mean[0, 0] - 0.5) < 4 * est.stderr[0, 0]


def test_bd12_exit(bd12):
    est = sim_lattice(bd12, "exit", {"a": 2, "b": 3}, SimConfig(n_paths=100_000))
    assert abs(est.mean[0, 0] - 28 / 31) < 4 * est.stderr[0, 0]


def test_holding_time():
    model = zoo.mc_models()["two_phase_down"]
    est = sim_lattice(model, "holding_time", {}, SimConfig(n_paths=40_000))
    exact = 1.0 / model.delta_A
    assert np.all(np.abs(np.diag(est.mean) - exact) < 4 * np.diag(est.stderr))


def test_occupation_matches_analytic():
    model = zoo.mc_models()["two_phase_up"]
    fund, tables = solved(model, 10)
    exact = fl.strip_occupation(model, fund, tables, 0, 2, 2)
    est = sim_lattice(model, "occupation", {"k": 0, "l": 2, "m": 2}, SimConfig(n_paths=60_000))
    assert np.all(np.abs(est.mean - exact) < 4.5 * est.stderr)


def test_mmbm_exit_scalar():
    est = sim_mmbm(zoo.mmbm_scalar(-1.0, 2.0, 0.0), "exit", {"a": 1.0, "b": 1.0},
                   SimConfig(n_paths=4000, euler_dt=1e-3))
    exact = (1 - np.exp(-1.0)) / (1 - np.exp(-2.0))
    assert abs(est.mean[0, 0] - exact) < 4 * est.stderr[0, 0] + 0.02


def test_errors():
    with pytest.raises(errors.ValidationError):
        SimConfig(shards=0)
    with pytest.raises(errors.ValidationError):
        sim_lattice(zoo.bd(1.0, 2.0), "nonsense", {}, SimConfig(n_paths=10))
    with pytest.raises(errors.ValidationError):
        sim_lattice(zoo.bd(1.0, 2.0), "extrema_max", {"cells": [(0, 0)]}, SimConfig(n_paths=10))
    with pytest.raises(errors.ValidationError):
        sim_mmbm(zoo.bd(1.0, 2.0), "exit", {"a": 1, "b": 1}, SimConfig(n_paths=10))


def test_to_dict(bd12):
    d = sim_lattice(bd12, "exit", {"a": 1, "b": 1}, SimConfig(n_paths=100)).to_dict()
    assert d["n"] == 100 and d["target"] == "exit" and d["params"] == {"a": 1, "b": 1}

"""Seeded Monte Carlo for lattice MAPs and Markov-modulated Brownian motion.

Every random number is a pure function of ``(seed, path, step, slot)``
computed with a splitmix64 hash, so a path's trajectory does not depend on
how paths are batched or sharded.  Estimates reduce the per-path values in
path-index order, which makes the pooled result identical for any sharding.

Lattice paths are simulated event by event with exact exponential holding
times; killing competes with the ordinary transitions.  MMBM paths use
Euler steps inside each phase sojourn (exact exponential sojourns), so
barrier crossings are only detected on the time grid.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded, ValidationError
from .model import LatticeModel, MmbmModel

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _splitmix(x):
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def uniforms(seed, path, step, slot):
    """Uniforms in (0, 1) keyed by counters; ``path`` and ``step`` may be arrays."""
    path = np.asarray(path, dtype=np.uint64)
    step = np.asarray(step, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _splitmix(np.uint64(seed) ^ _splitmix(path))
        h = _splitmix(h + step * np.uint64(8) + np.uint64(slot))
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 100_000
    seed: int = 42
    level_cap: int = 10_000
    time_cap: float = float("inf")
    euler_dt: float = 1e-3
    shards: int = 1
    max_steps: int = 50_000_000

    def __post_init__(self):
        if int(self.n_paths) < 1:
            raise ValidationError("n_paths must be at least 1")
        if not self.euler_dt > 0:
            raise ValidationError("euler_dt must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")
        if int(self.shards) < 1:
            raise ValidationError("shards must be at least 1")


@dataclass(frozen=True, eq=False)
class SimEstimate:
    mean: np.ndarray
    stderr: np.ndarray
    n: int
    seed: int
    target: str = ""
    params: dict = field(default_factory=dict)
    escaped: int = 0

    def to_dict(self):
        return {"target": self.target, "params": self.params, "mean": self.mean,
                "stderr": self.stderr, "n": self.n, "seed": self.seed,
                "escaped": self.escaped}


def _split(n_paths, n_start):
    """Paths per starting phase (first phases take the remainder)."""
    base, extra = divmod(int(n_paths), n_start)
    return [base + (i < extra) for i in range(n_start)]


def _estimate(values, starts, n_phases, n_per, seed, target, params, escaped):
    """Row ``i`` of the estimate averages the per-path vectors started in phase ``i``."""
    mean = np.zeros((n_phases, values.shape[1]))
    se = np.zeros_like(mean)
    for i in range(n_phases):
        v = values[starts == i]
        if v.shape[0] == 0:
            continue
        mean[i] = v.mean(axis=0)
        if v.shape[0] > 1:
            se[i] = v.std(axis=0, ddof=1) / np.sqrt(v.shape[0])
    return SimEstimate(mean, se, int(sum(n_per)), int(np.uint64(seed)), target, params,
                       int(escaped))


# ------------------------------------------------------------ lattice

class _LatticeEvents:
    """Per-phase cumulative event tables: (level change, new phase) plus a kill event."""

    def __init__(self, model):
        n, M = model.n_phases, model.max_jump
        rate = model.delta_A
        moves, probs = [], []
        for m in range(-1, M + 1):
            A = model.A(m)
            for j in range(n):
                p = A[:, j].copy()
                if m == 0:
                    p[j] = 0.0
                moves.append((m, j))
                probs.append(p)
        moves.append((0, -1))
        probs.append(model.kill_rates)
        P = np.array(probs).T / rate[:, None]
        self.cum = np.cumsum(P, axis=1)
        self.cum[:, -1] = 1.0 + 1e-12
        self.jump = np.array([m for m, _ in moves])
        self.dest = np.array([j for _, j in moves])
        self.rate = rate

    def draw(self, phase, u):
        idx = np.sum(self.cum[phase] < u[:, None], axis=1)
        return self.jump[idx], self.dest[idx]


def _run_lattice(model, config, rule, n_out, n_start=None):
    """Simulate until each path stops.

    ``rule(level, phase, hold, event_jump, event_dest, killed, state)`` is a
    small object with ``start``, ``step`` methods; see the targets below.
    Returns per-path output vectors, their start phases and the number of
    paths that hit the level cap.
    """
    n = model.n_phases
    n_per = _split(config.n_paths, n if n_start is None else n_start)
    starts = np.concatenate([np.full(k, i) for i, k in enumerate(n_per)])
    total = starts.size
    bounds = np.linspace(0, total, config.shards + 1).astype(int)
    outs, escaped = [], 0
    ev = _LatticeEvents(model)
    for s0, s1 in zip(bounds[:-1], bounds[1:]):
        ids = np.arange(s0, s1, dtype=np.uint64)
        out, esc = _lattice_shard(ev, config, rule, n_out, ids, starts[s0:s1])
        outs.append(out)
        escaped += esc
    return np.concatenate(outs), starts, n_per, escaped


def _lattice_shard(ev, config, rule, n_out, ids, start_phase):
    size = ids.size
    out = np.zeros((size, n_out))
    level = np.zeros(size, dtype=np.int64)
    phase = start_phase.astype(np.int64).copy()
    clock = np.zeros(size)
    aux = rule.init(size)
    active = np.arange(size)
    escaped = 0
    step = 0
    while active.size:
        if step >= config.max_steps:
            raise CapExceeded("step cap reached", active=int(active.size))
        pid = ids[active]
        ph = phase[active]
        hold = -np.log(uniforms(config.seed, pid, step, 0)) / ev.rate[ph]
        jump, dest = ev.draw(ph, uniforms(config.seed, pid, step, 1))
        killed = dest < 0
        done = rule.step(out, aux, active, level[active], ph, hold, jump, dest, killed)
        clock[active] += hold
        level[active] += np.where(killed, 0, jump)
        phase[active] = np.where(killed, ph, dest)
        over = np.abs(level[active]) > config.level_cap
        escaped += int(np.sum(over & ~done))
        if np.any(~done & (clock[active] > config.time_cap)):
            raise CapExceeded("time cap reached by an unfinished path",
                              censored=int(np.sum(~done & (clock[active] > config.time_cap))))
        active = active[~(done | over)]
        step += 1
    return out, escaped


class _FirstPassageDown:
    """Phase at the first visit to ``-k``."""

    def __init__(self, n, k):
        self.n, self.k = n, k

    def init(self, size):
        return None

    def step(self, out, aux, idx, level, ph, hold, jump, dest, killed):
        new = level + jump
        hit = ~killed & (new == -self.k)
        out[idx[hit], dest[hit]] = 1.0
        return killed | hit


class _Exit:
    """Phase at ``-a`` if it is reached before ``b`` or above."""

    def __init__(self, n, a, b):
        self.a, self.b = a, b

    def init(self, size):
        return None

    def step(self, out, aux, idx, level, ph, hold, jump, dest, killed):
        if self.a == 0:
            out[idx, ph] = 1.0
            return np.ones(idx.size, bool)
        new = level + jump
        down = ~killed & (new == -self.a)
        out[idx[down], dest[down]] = 1.0
        return killed | down | (~killed & (new >= self.b))


class _StripOccupation:
    """Time at ``(k, j)`` before leaving ``(-l, m)``."""

    def __init__(self, n, k, l, m):
        self.k, self.l, self.m = k, l, m

    def init(self, size):
        return None

    def step(self, out, aux, idx, level, ph, hold, jump, dest, killed):
        here = level == self.k
        np.add.at(out, (idx[here], ph[here]), hold[here])
        new = level + jump
        return killed | (new <= -self.l) | (new >= self.m)


class _Creeping:
    """Phase at ``m`` when level ``m`` is entered exactly at the first passage to ``>= m``.

    Paths that fall to ``floor`` are stopped and count as not creeping; the
    resulting bias is at most the chance of climbing from ``floor`` to ``m``.
    """

    def __init__(self, n, m, floor):
        self.m, self.floor = m, floor

    def init(self, size):
        return None

    def step(self, out, aux, idx, level, ph, hold, jump, dest, killed):
        new = level + jump
        up = ~killed & (new >= self.m)
        exact = up & (new == self.m)
        out[idx[exact], dest[exact]] = 1.0
        return killed | up | (new <= self.floor)


class _Extrema:
    """Joint cell indicators of (extreme, pre-kill level, pre-kill phase)."""

    def __init__(self, n, cells, direction):
        self.n, self.cells, self.sign = n, list(cells), 1 if direction == "max" else -1

    def init(self, size):
        return np.zeros(size, dtype=np.int64)  # running extreme (sign-adjusted)

    def step(self, out, aux, idx, level, ph, hold, jump, dest, killed):
        ext = aux[idx]
        for c, (m, l) in enumerate(self.cells):
            # max: X_max = m, X_zeta = m - l ; min: X_min = -m, X_zeta = -m + l
            hit = killed & (ext == m) & (self.sign * level == m - l)
            out[idx[hit], c * self.n + ph[hit]] = 1.0
        new = self.sign * (level + jump)
        aux[idx] = np.where(killed, ext, np.maximum(ext, new))
        return killed


class _Holding:
    def __init__(self, n):
        self.n = n

    def init(self, size):
        return None

    def step(self, out, aux, idx, level, ph, hold, jump, dest, killed):
        out[idx, ph] = hold
        return np.ones(idx.size, bool)


LATTICE_TARGETS = ("first_passage", "exit", "occupation", "creeping",
                   "extrema_max", "extrema_min", "holding_time")


def sim_lattice(model, target, params, config):
    """Monte Carlo estimate of a lattice quantity.

    Targets and parameters:

    ``first_passage`` (k)   phase law at the first visit to ``-k`` (G^k),
    ``exit`` (a, b)         two-sided exit law D_{a,b},
    ``occupation`` (k, l, m) expected time at level k before leaving (-l, m),
    ``creeping`` (m, floor) first passage to ``>= m`` lands exactly on m
                            (paths reaching ``floor`` give up),
    ``extrema_max`` / ``extrema_min`` (cells) joint cells at killing; the
    estimate has one N x N block per cell, stacked horizontally,
    ``holding_time``        first holding time per phase (diagonal).
    """
    if not isinstance(model, LatticeModel):
        raise ValidationError("sim_lattice needs a lattice model")
    n = model.n_phases
    params = dict(params or {})
    if target == "first_passage":
        rule, width = _FirstPassageDown(n, int(params.get("k", 1))), n
    elif target == "exit":
        rule, width = _Exit(n, int(params["a"]), int(params["b"])), n
    elif target == "occupation":
        rule, width = _StripOccupation(n, int(params["k"]), int(params["l"]), int(params["m"])), n
    elif target == "creeping":
        floor = int(params.get("floor", -config.level_cap))
        rule, width = _Creeping(n, int(params["m"]), floor), n
    elif target in ("extrema_max", "extrema_min"):
        if not model.is_defective:
            raise ValidationError("extrema at killing need a defective model")
        cells = [tuple(int(v) for v in c) for c in params["cells"]]
        params["cells"] = cells
        rule, width = _Extrema(n, cells, target.split("_")[1]), n * len(cells)
    elif target == "holding_time":
        rule, width = _Holding(n), n
    else:
        raise ValidationError(f"unknown lattice target {target!r}; choose from {LATTICE_TARGETS}")
    values, starts, n_per, escaped = _run_lattice(model, config, rule, width)
    return _estimate(values, starts, n, n_per, config.seed, target, params, escaped)


# ------------------------------------------------------------ MMBM

def _normals(seed, pid, step):
    u1 = uniforms(seed, pid, step, 0)
    u2 = uniforms(seed, pid, step, 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


MMBM_TARGETS = ("exit", "hitting", "first_passage")


def sim_mmbm(model, target, params, config):
    """Euler Monte Carlo for MMBM.

    ``exit`` (a, b): phase at ``-a`` if reached before ``b``;
    ``hitting`` (x): phase at the first passage above ``x``;
    ``first_passage`` (x): phase at the first passage below ``-x``.
    Crossings are detected at the end of each Euler step.
    """
    if not isinstance(model, MmbmModel):
        raise ValidationError("sim_mmbm needs an MMBM model")
    params = {k: float(v) for k, v in (params or {}).items()}
    if target == "exit":
        lo, hi, record = -params["a"], params["b"], "low"
    elif target == "hitting":
        lo, hi, record = -float(config.level_cap), params["x"], "high"
    elif target == "first_passage":
        lo, hi, record = -params["x"], float(config.level_cap), "low"
    else:
        raise ValidationError(f"unknown MMBM target {target!r}; choose from {MMBM_TARGETS}")
    n = model.n_phases
    n_per = _split(config.n_paths, n)
    starts = np.concatenate([np.full(k, i) for i, k in enumerate(n_per)])
    bounds = np.linspace(0, starts.size, config.shards + 1).astype(int)
    outs, escaped = [], 0
    for s0, s1 in zip(bounds[:-1], bounds[1:]):
        ids = np.arange(s0, s1, dtype=np.uint64)
        o, e = _mmbm_shard(model, config, ids, starts[s0:s1], lo, hi, record)
        outs.append(o)
        escaped += e
    return _estimate(np.concatenate(outs), starts, n, n_per, config.seed, target, params,
                     escaped)


def _mmbm_switch_table(model):
    rate = np.maximum(-np.diag(model.Q), 0.0)
    P = np.where(np.eye(model.n_phases, dtype=bool), 0.0, model.Q)
    P = np.hstack([P, model.kill_rates[:, None]])
    with np.errstate(invalid="ignore", divide="ignore"):
        P = np.where(rate[:, None] > 0, P / rate[:, None], 0.0)
    cum = np.cumsum(P, axis=1)
    cum[:, -1] = 1.0 + 1e-12
    return rate, cum


def _mmbm_shard(model, config, ids, start_phase, lo, hi, record):
    size = ids.size
    n = model.n_phases
    out = np.zeros((size, n))
    if lo >= 0 or hi <= 0:
        # already at a barrier
        rows = np.arange(size)
        if (record == "low" and lo >= 0) or (record == "high" and hi <= 0):
            out[rows, start_phase] = 1.0
        return out, 0
    rate, cum = _mmbm_switch_table(model)
    sd = np.sqrt(model.variance)
    dt = config.euler_dt
    x = np.zeros(size)
    phase = start_phase.astype(np.int64).copy()
    clock = np.zeros(size)
    # Exact exponential sojourns; "event" steps use their own counter slots.
    counter = np.zeros(size, dtype=np.uint64)
    with np.errstate(divide="ignore"):
        sojourn = -np.log(uniforms(config.seed, ids, counter, 2)) / rate[phase]
    active = np.arange(size)
    escaped = 0
    step = 0
    while active.size:
        if step >= config.max_steps:
            raise CapExceeded("step cap reached", active=int(active.size))
        pid = ids[active]
        ph = phase[active]
        cnt = counter[active]
        h = np.minimum(dt, sojourn[active])
        z = _normals(config.seed, pid, cnt)
        xa = x[active] + model.drift[ph] * h + sd[ph] * np.sqrt(h) * z
        x[active] = xa
        clock[active] += h
        sojourn[active] -= h
        counter[active] = cnt + np.uint64(1)
        down = xa <= lo
        up = xa >= hi
        if record == "low":
            out[active[down], ph[down]] = 1.0
        else:
            out[active[up], ph[up]] = 1.0
        done = down | up
        switch = ~done & (sojourn[active] <= 0)
        killed = np.zeros(active.size, bool)
        if np.any(switch):
            sw = active[switch]
            u = uniforms(config.seed, ids[sw], counter[sw], 3)
            idx = np.sum(cum[phase[sw]] < u[:, None], axis=1)
            killed_sw = idx == n
            newph = np.where(killed_sw, phase[sw], idx)
            phase[sw] = newph
            with np.errstate(divide="ignore"):
                sojourn[sw] = -np.log(uniforms(config.seed, ids[sw], counter[sw], 2)) / rate[newph]
            killed[switch] = killed_sw
        done |= killed
        if np.any(~done & (clock[active] > config.time_cap)):
            raise CapExceeded("time cap reached by an unfinished path")
        active = active[~done]
        step += 1
    return out, escaped

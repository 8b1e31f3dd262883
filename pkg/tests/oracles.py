"""Independent reference values.

The strip oracle builds the level-phase generator restricted to a finite
window of levels and solves the absorbing chain directly, so it shares no
code with the G/R/H or taboo machinery.
"""

import numpy as np


class StripChain:
    """States ``(x, j)`` for ``lo <= x <= hi``; leaving the window absorbs."""

    def __init__(self, model, lo, hi):
        self.model, self.lo, self.hi = model, lo, hi
        n = model.n_phases
        self.n = n
        levels = hi - lo + 1
        size = levels * n
        T = np.zeros((size, size))
        exits = {}  # (level, phase) outside window -> column of rates
        for x in range(lo, hi + 1):
            r = (x - lo) * n
            for m in range(-1, model.max_jump + 1):
                A = model.A(m)
                y = x + m
                if lo <= y <= hi:
                    c = (y - lo) * n
                    T[r:r + n, c:c + n] += A
                else:
                    for j in range(n):
                        col = exits.setdefault((y, j), np.zeros(size))
                        col[r:r + n] += A[:, j]
        self.T = T
        self.exits = exits
        self.green = np.linalg.inv(-T)

    def idx(self, x):
        r = (x - self.lo) * self.n
        return slice(r, r + self.n)

    def occupation(self, start, level):
        """Expected time at ``(level, j)`` from ``(start, i)``."""
        return self.green[self.idx(start), self.idx(level)]

    def absorb(self, start, level):
        """Probability of leaving the window by entering ``(level, j)``."""
        out = np.zeros((self.n, self.n))
        for j in range(self.n):
            col = self.exits.get((level, j))
            if col is not None:
                out[:, j] = (self.green @ col)[self.idx(start)]
        return out

    def killed_at(self, start, level):
        """Probability of being killed at ``(level, j)``."""
        if not self.lo <= level <= self.hi:
            return np.zeros((self.n, self.n))
        return self.occupation(start, level) * self.model.kill_rates[None, :]


def exit_law(model, a, b):
    return StripChain(model, -a + 1, b - 1).absorb(0, -a)


def strip_occupation(model, k, l, m):
    return StripChain(model, -l + 1, m - 1).occupation(0, k)


def first_passage(model, k=1, upper=200):
    return StripChain(model, -k + 1, upper).absorb(0, -k)


def creeping(model, m, lower=200):
    return StripChain(model, -lower, m - 1).absorb(0, m)


def max_cell(model, m, l, lower=150):
    """``P[max = m, X_zeta = m - l, J_zeta]`` by differencing ``max <= m`` and ``max <= m-1``."""
    top = StripChain(model, -lower, m).killed_at(0, m - l)
    if m == 0:
        return top
    return top - StripChain(model, -lower, m - 1).killed_at(0, m - l)


def min_cell(model, m, l, upper=150):
    """``P[min = -m, X_zeta = -m + l, J_zeta]``."""
    top = StripChain(model, -m, upper).killed_at(0, -m + l)
    if m == 0:
        return top
    return top - StripChain(model, -m + 1, upper).killed_at(0, -m + l)


def gamblers_ruin(up, down, a, b):
    """Scalar birth-death: P[hit -a before b] from 0."""
    r = up / down
    if r == 1:
        return b / (a + b)
    return (1 - r ** b) / (1 - r ** (a + b))


def bd_scale(up, down, k):
    """Scale sequence of BD(up, down): coefficients of z / (down (1 - z)(1 - z up/down))."""
    rho = down / up
    if rho == 1:
        return k / down
    return (rho ** -k - 1) / (up * (1 - rho))


def brownian_scale(drift, variance, kill, x):
    """Scalar MMBM: (e^{t1 x} - e^{t2 x}) / (variance/2 (t1 - t2)), t roots of
    variance/2 t^2 - drift t - kill."""
    t1, t2 = sorted(np.roots([0.5 * variance, -drift, -kill]).real, reverse=True)
    return (np.exp(t1 * x) - np.exp(t2 * x)) / (0.5 * variance * (t1 - t2))


def brownian_exit(drift, variance, a, b):
    """Scalar Brownian motion without killing: P[hit -a before b]."""
    c = -2.0 * drift / variance
    if c == 0:
        return b / (a + b)
    return (1 - np.exp(-c * b)) / (1 - np.exp(-c * (a + b)))

"""Continuous reduced central-potential dynamics and reference integrators.

The adaptive solver is an embedded Dormand-Prince 5(4) pair that lands
exactly on requested output times; in between it interpolates with cubic
Hermite polynomials built from the accepted steps.
"""

from dataclasses import dataclass

import numpy as np


class StepUnderflow(RuntimeError):
    """The adaptive step size fell below the floating-point resolution of ``t``."""


@dataclass(frozen=True)
class ContinuousReducedSystem:
    """Radial motion in a central potential at fixed angular momentum ``mu``."""

    m: float
    V: object
    dV: object
    mu: float

    def _check(self, r):
        if not r > 0:
            raise ValueError(f"radius must be positive, got {r!r}")


def reduced_rhs(sysc, r, rdot):
    """``(rdot, rddot)`` with ``rddot = mu^2 / (m^2 r^3) - V'(r) / m``."""
    sysc._check(r)
    m = sysc.m
    return rdot, sysc.mu ** 2 / (m * m * r ** 3) - sysc.dV(r) / m


def rhs(sysc):
    """State-vector form ``y = (r, rdot)`` for the generic integrators."""

    def f(t, y):
        a, b = reduced_rhs(sysc, y[0], y[1])
        return np.array([a, b])

    return f


def routhian_energy(sysc, r, rdot):
    """``m/2 rdot^2 + V(r) + mu^2 / (2 m r^2)``, conserved by the exact flow."""
    sysc._check(r)
    m = sysc.m
    return m / 2 * rdot * rdot + sysc.V(r) + sysc.mu ** 2 / (2 * m * r * r)


# -- classical RK4 -------------------------------------------------------------

def rk4_step(f, t, y, h):
    y = np.asarray(y, dtype=float)
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_solve(f, y0, h, n_steps, t0=0.0):
    """``n_steps`` fixed steps; returns the ``(n_steps + 1, dim)`` state array."""
    out = np.empty((n_steps + 1, len(y0)))
    out[0] = y0
    for k in range(n_steps):
        out[k + 1] = rk4_step(f, t0 + k * h, out[k], h)
    return out


# -- Dormand-Prince 5(4) ---------------------------------------------------------

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp_step(f, t, y, h, k1):
    K = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], K))
        K.append(f(t + _C[i] * h, yi))
    K = np.array(K)
    y_new = y + h * (_B5 @ K)
    err = h * (_E @ K)
    return y_new, err, K[6]


@dataclass
class DenseSolution:
    """Accepted step values with derivatives; evaluates by cubic Hermite."""

    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    n_rejected: int = 0

    def __call__(self, tq):
        tq = np.atleast_1d(np.asarray(tq, dtype=float))
        i = np.clip(np.searchsorted(self.t, tq, side="right") - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[i], self.t[i + 1]
        h = (t1 - t0)[:, None]
        s = ((tq - t0) / (t1 - t0))[:, None]
        h00 = 2 * s ** 3 - 3 * s ** 2 + 1
        h10 = s ** 3 - 2 * s ** 2 + s
        h01 = -2 * s ** 3 + 3 * s ** 2
        h11 = s ** 3 - s ** 2
        return (h00 * self.y[i] + h10 * h * self.dy[i] + h01 * self.y[i + 1]
                + h11 * h * self.dy[i + 1])


def adaptive_solve(f, y0, t_span, tol=1e-12, t_eval=None, h0=None, max_steps=10_000_000):
    """Integrate ``y' = f(t, y)`` with error per step below ``tol`` (mixed abs/rel).

    Every time in ``t_eval`` is hit exactly by an accepted step, so values
    there carry only the integration error.
    """
    t0, t1 = map(float, t_span)
    y = np.asarray(y0, dtype=float)
    stops = [] if t_eval is None else sorted(float(s) for s in t_eval if t0 < s < t1)
    stops.append(t1)
    ts, ys, dys = [t0], [y.copy()], []
    k1 = f(t0, y)
    dys.append(k1)
    h = h0 or min(1e-3, (t1 - t0) / 10 if t1 > t0 else 1.0)
    t = t0
    rejected = 0
    target = 0
    steps = 0
    while t < t1 and steps < max_steps:
        steps += 1
        stop = stops[target]
        h_try = h
        hit = False
        if t + h >= stop:
            h = stop - t
            hit = True
        if h <= 4 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StepUnderflow(f"step size {h:.3e} underflows at t = {t!r}")
        y_new, err, k7 = _dp_step(f, t, y, h, k1)
        scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
        e = float(np.sqrt(np.mean((err / scale) ** 2)))
        if e <= 1.0:
            t = stop if hit else t + h
            y = y_new
            k1 = k7
            ts.append(t)
            ys.append(y.copy())
            dys.append(k1)
            if hit:
                target += 1
            fac = 5.0 if e == 0 else min(5.0, 0.9 * e ** -0.2)
            if hit:
                h = max(h, h_try / fac)
        else:
            rejected += 1
            fac = max(0.2, 0.9 * e ** -0.2)
        h = h * fac
    if t < t1:
        raise StepUnderflow(f"step budget exhausted at t = {t!r}")
    return DenseSolution(np.array(ts), np.array(ys), np.array(dys), rejected)


def sample(sol, times):
    """Values at ``times``; exact step values where ``times`` were ``t_eval`` stops."""
    times = np.asarray(times, dtype=float)
    out = sol(times)
    idx = np.searchsorted(sol.t, times)
    for j, (i, tq) in enumerate(zip(idx, times)):
        if i < len(sol.t) and sol.t[i] == tq:
            out[j] = sol.y[i]
    return out

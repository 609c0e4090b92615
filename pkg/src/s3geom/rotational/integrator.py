"""Dormand-Prince 5(4) with dense output, terminal events and an invariant monitor.

Besides the embedded error estimate a step is rejected whenever a supplied
first integral drifts by more than ``invariant_tol * |h|`` (plus a few ulps
of roundoff), so the total drift over an arc of length ``L`` stays near
``invariant_tol * L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
ERR = B5 - B4
# Shampine's quartic interpolant for this pair
P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


class DomainExit(ArithmeticError):
    """Raised by a right-hand side evaluated outside its domain; the step is retried smaller."""


@dataclass(frozen=True)
class Event:
    """Terminal event ``g(t, y) = 0``."""

    name: str
    g: Callable[[float, np.ndarray], float]


@dataclass(frozen=True)
class Segment:
    t0: float
    t1: float
    y0: np.ndarray
    Q: np.ndarray  # (n, 4)

    def __call__(self, t):
        h = self.t1 - self.t0
        x = (np.asarray(t, dtype=float) - self.t0) / h
        powers = np.stack([x, x**2, x**3, x**4], axis=0)
        return self.y0[:, None] + h * (self.Q @ powers.reshape(4, -1))


@dataclass
class Trajectory:
    ts: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    segments: list = field(default_factory=list)
    event: str | None = None
    status: str = "running"
    rejected: int = 0
    max_invariant_step: float = 0.0

    @property
    def t_end(self) -> float:
        return self.ts[-1]

    @property
    def y_end(self) -> np.ndarray:
        return self.ys[-1]

    def __call__(self, t) -> np.ndarray:
        """Dense evaluation at times inside the integrated range; shape (n, len(t))."""
        return evaluate_segments(self.segments, t)


def evaluate_segments(segments, t) -> np.ndarray:
    """Evaluate a chain of segments covering an interval, in either time direction."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    order = sorted(segments, key=lambda seg: min(seg.t0, seg.t1))
    lows = np.array([min(seg.t0, seg.t1) for seg in order])
    out = np.empty((order[0].y0.size, t.size))
    idx = np.clip(np.searchsorted(lows, t, side="right") - 1, 0, len(order) - 1)
    for k in np.unique(idx):
        sel = idx == k
        out[:, sel] = order[k](t[sel])
    return out


def _stages(f, t, y, h, k1):
    K = np.empty((7, y.size))
    K[0] = k1
    for s in range(1, 7):
        dy = h * (np.asarray(A[s]) @ K[:s])
        K[s] = f(t + C[s] * h, y + dy)
    y_new = y + h * (B5[:6] @ K[:6])
    err = h * (ERR @ K)
    return y_new, err, K


def integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_end: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    invariant: Callable[[np.ndarray], float] | None = None,
    invariant_tol: float = 1e-10,
    events: Sequence[Event] = (),
    h0: float | None = None,
    max_steps: int = 200_000,
) -> Trajectory:
    """Integrate ``y' = f(t, y)`` from ``t0`` towards ``t_end`` (either direction)."""
    y = np.array(y0, dtype=float)
    t = float(t0)
    direction = 1.0 if t_end >= t0 else -1.0
    span = abs(t_end - t0)
    traj = Trajectory(ts=[t], ys=[y.copy()])
    if span == 0:
        traj.status = "done"
        return traj
    k1 = f(t, y)
    h = direction * min(h0 or 1e-3 * max(span, 1e-3), span)
    inv0 = invariant(y) if invariant is not None else 0.0
    g_prev = [ev.g(t, y) for ev in events]
    # events already satisfied at the start are armed only after their sign settles
    armed = [abs(g) > 1e-13 for g in g_prev]

    for _ in range(max_steps):
        remaining = abs(t_end - t)
        if remaining <= 1e-15 * max(1.0, abs(t_end)):
            traj.status = "done"
            return traj
        if abs(h) > remaining:
            h = direction * remaining
        if abs(h) < 1e-14 * max(1.0, abs(t)):
            traj.status = "step_underflow"
            return traj
        try:
            y_new, err, K = _stages(f, t, y, h, k1)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
            inv_new = invariant(y_new) if invariant is not None else 0.0
        except DomainExit:
            traj.rejected += 1
            h *= 0.25
            continue
        drift = abs(inv_new - inv0)
        # a few ulps of the invariant itself are roundoff, not drift
        floor = 16 * np.finfo(float).eps * (1.0 + abs(inv0))
        if not np.isfinite(err_norm) or err_norm > 1.0 or drift > invariant_tol * abs(h) + floor:
            traj.rejected += 1
            if np.isfinite(err_norm) and err_norm > 1.0:
                h *= max(0.2, 0.9 * err_norm ** -0.2)
            else:
                h *= 0.5
            continue

        seg = Segment(t, t + h, y.copy(), K.T @ P)
        g_new = [ev.g(t + h, y_new) for ev in events]
        hit = None
        for i, ev in enumerate(events):
            if not armed[i]:
                if abs(g_new[i]) > 1e-13:
                    armed[i] = True
                continue
            if g_prev[i] == 0.0 or g_prev[i] * g_new[i] <= 0.0:
                def along(tt, i=i):
                    return events[i].g(tt, seg(tt)[:, 0])
                lo, hi = t, t + h
                try:
                    t_root = brentq(along, lo, hi, xtol=1e-15, rtol=8.9e-16) if along(lo) * along(hi) < 0 else hi
                except ValueError:
                    t_root = hi
                if hit is None or direction * (t_root - hit[1]) < 0:
                    hit = (ev.name, t_root)
        if hit is not None:
            name, t_root = hit
            h_ev = t_root - t
            if abs(h_ev) > 0:
                y_ev, _, K_ev = _stages(f, t, y, h_ev, k1)
                seg = Segment(t, t_root, y.copy(), K_ev.T @ P)
            else:
                y_ev = y.copy()
            traj.segments.append(seg)
            traj.ts.append(t_root)
            traj.ys.append(y_ev)
            if invariant is not None:
                traj.max_invariant_step = max(traj.max_invariant_step, abs(invariant(y_ev) - inv0))
            traj.event = name
            traj.status = "event"
            return traj

        traj.segments.append(seg)
        t, y, k1 = t + h, y_new, K[6]
        inv0 = inv_new
        traj.ts.append(t)
        traj.ys.append(y.copy())
        traj.max_invariant_step = max(traj.max_invariant_step, drift)
        g_prev = g_new
        factor = 5.0 if err_norm == 0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
        h *= factor
    traj.status = "max_steps"
    return traj

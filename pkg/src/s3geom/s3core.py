"""Quaternion algebra on the unit 3-sphere.

Points are stored as 4-vectors ``(x1, y1, x2, y2)`` standing for the
quaternion ``x1 + i y1 + j x2 + k y2``.  Every function accepts arrays of
shape ``(..., 4)`` and broadcasts over the leading axes, so a whole grid of
points can be processed in one call.

The right-invariant frame is ``V = i.p``, ``E1 = j.p``, ``E2 = k.p``; the
horizontal plane at ``p`` is spanned by ``E1`` and ``E2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12
TANGENT_TOL = 1e-10
# 1 - <p, pole> below this counts as the pole itself (distance ~ 4.5e-7)
POLE_TOL = 1e-13

NORTH_POLE = np.array([0.0, 0.0, 0.0, 1.0])
IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])
QUAT_I = np.array([0.0, 1.0, 0.0, 0.0])
QUAT_J = np.array([0.0, 0.0, 1.0, 0.0])
QUAT_K = np.array([0.0, 0.0, 0.0, 1.0])


class PoleError(ValueError):
    """Stereographic projection evaluated at its own pole."""


def _vec(x) -> np.ndarray:
    if isinstance(x, (S3Point, TangentVector)):
        return x.array
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != 4:
        raise ValueError(f"expected trailing dimension 4, got shape {arr.shape}")
    return arr


def inner(a, b) -> np.ndarray:
    """Euclidean inner product over the trailing axis."""
    return np.einsum("...k,...k->...", _vec(a), _vec(b))


def norm(a) -> np.ndarray:
    return np.sqrt(inner(a, a))


def normalize(p) -> np.ndarray:
    p = _vec(p)
    return p / norm(p)[..., None]


def quat_mul(p, q) -> np.ndarray:
    """Hamilton product ``p . q``."""
    p, q = np.broadcast_arrays(_vec(p), _vec(q))
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack(
        [
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ],
        axis=-1,
    )


def quat_conj(p) -> np.ndarray:
    p = _vec(p)
    return p * np.array([1.0, -1.0, -1.0, -1.0])


# Left multiplication by the imaginary units, written out so that no
# product table is consulted in hot loops.

def left_i(x) -> np.ndarray:
    x = _vec(x)
    x1, y1, x2, y2 = np.moveaxis(x, -1, 0)
    return np.stack([-y1, x1, -y2, x2], axis=-1)


def left_j(x) -> np.ndarray:
    x = _vec(x)
    x1, y1, x2, y2 = np.moveaxis(x, -1, 0)
    return np.stack([-x2, y2, x1, -y1], axis=-1)


def left_k(x) -> np.ndarray:
    x = _vec(x)
    x1, y1, x2, y2 = np.moveaxis(x, -1, 0)
    return np.stack([-y2, -x2, y1, x1], axis=-1)


def vertical(p) -> np.ndarray:
    """The Hopf field ``V(p) = i.p``."""
    return left_i(p)


def e1_field(p) -> np.ndarray:
    return left_j(p)


def e2_field(p) -> np.ndarray:
    return left_k(p)


def exp_i(t, x) -> np.ndarray:
    """``exp(i t) . x``, the flow of ``V`` for time ``t``."""
    t = np.asarray(t, dtype=float)[..., None]
    x = _vec(x)
    return np.cos(t) * x + np.sin(t) * left_i(x)


def apply_J(X, base) -> np.ndarray:
    """Tangential part of ``i.X``; kills ``V`` and rotates the horizontal plane."""
    X, base = _vec(X), _vec(base)
    return left_i(X) + inner(X, vertical(base))[..., None] * base


def horizontal_part(X, base) -> np.ndarray:
    X, base = _vec(X), _vec(base)
    V = vertical(base)
    return X - inner(X, V)[..., None] * V


def tangent_part(X, base) -> np.ndarray:
    X, base = _vec(X), _vec(base)
    return X - inner(X, base)[..., None] * base


def hopf(p) -> np.ndarray:
    """Hopf submersion onto the unit 2-sphere (coordinates y1, x2, y2)."""
    p = _vec(p)
    x1, y1, x2, y2 = np.moveaxis(p, -1, 0)
    return np.stack(
        [
            x1**2 + y1**2 - x2**2 - y2**2,
            2.0 * (x2 * y1 - x1 * y2),
            2.0 * (x1 * x2 + y1 * y2),
        ],
        axis=-1,
    )


def right_translate(q, p) -> np.ndarray:
    """``R_q(p) = p . q``.  Isometry preserving the horizontal distribution,
    since the frame is right-invariant."""
    return quat_mul(p, q)


def rotate_theta(theta, p) -> np.ndarray:
    """Rotate the ``(x2, y2)`` plane by ``theta``, fixing ``(x1, y1)``."""
    p = _vec(p)
    c = np.cos(theta)
    s = np.sin(theta)
    out = np.array(p, copy=True)
    out[..., 2] = c * p[..., 2] - s * p[..., 3]
    out[..., 3] = s * p[..., 2] + c * p[..., 3]
    return out


def _complement_basis(pole: np.ndarray) -> np.ndarray:
    """Orthonormal 3x4 basis of ``pole``'s orthogonal complement.

    For a coordinate pole the remaining axes are used in their natural order,
    which makes the default projection read off ``(x1, y1, x2)`` directly.
    """
    axis = np.flatnonzero(np.abs(np.abs(pole) - 1.0) < 1e-15)
    if axis.size == 1:
        return np.delete(np.eye(4), axis[0], axis=0)
    rows = []
    for e in np.eye(4):
        w = e - np.dot(e, pole) * pole
        for r in rows:
            w -= np.dot(w, r) * r
        n = np.linalg.norm(w)
        if n > 1e-8:
            rows.append(w / n)
        if len(rows) == 3:
            break
    return np.array(rows)


def stereographic(p, pole=NORTH_POLE) -> np.ndarray:
    """Stereographic projection from ``pole`` onto the hyperplane ``pole``-perp.

    The great 2-sphere orthogonal to ``pole`` maps onto the unit sphere of
    R^3; ``-pole`` maps to the origin.
    """
    p = _vec(p)
    pole = normalize(_vec(pole))
    c = inner(p, pole)
    if np.any(np.abs(c - 1.0) < POLE_TOL):
        raise PoleError("stereographic projection is undefined at the pole")
    q = (p - c[..., None] * pole) / (1.0 - c)[..., None]
    return q @ _complement_basis(pole).T


def lie_bracket_fd(field_a, field_b, p, h: float = 1e-5) -> np.ndarray:
    """Finite-difference Lie bracket ``[A, B](p) = dB(A) - dA(B)``.

    ``field_a`` and ``field_b`` map ambient 4-vectors to 4-vectors; the
    directional derivatives are taken in R^4 with central differences.
    """
    p = _vec(p)
    a = field_a(p)
    b = field_b(p)
    db_a = (field_b(p + h * a) - field_b(p - h * a)) / (2 * h)
    da_b = (field_a(p + h * b) - field_a(p - h * b)) / (2 * h)
    return db_a - da_b


def random_points(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform random points of the 3-sphere."""
    return normalize(rng.standard_normal((n, 4)))


def random_horizontal(rng: np.random.Generator, p) -> np.ndarray:
    """Uniform random unit horizontal vectors at ``p``."""
    p = _vec(p)
    theta = rng.uniform(0, 2 * np.pi, size=p.shape[:-1])[..., None]
    return np.cos(theta) * e1_field(p) + np.sin(theta) * e2_field(p)


# --- light typed wrappers -------------------------------------------------


@dataclass(frozen=True)
class S3Point:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        n = float(np.sqrt(self.x1**2 + self.y1**2 + self.x2**2 + self.y2**2))
        if abs(n - 1.0) > UNIT_TOL:
            raise ValueError(f"S3Point norm {n!r} differs from 1 by more than {UNIT_TOL}")

    @classmethod
    def from_array(cls, arr, renormalize: bool = False) -> "S3Point":
        arr = np.asarray(arr, dtype=float)
        if renormalize:
            arr = arr / np.linalg.norm(arr)
        return cls(*map(float, arr))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x1, self.y1, self.x2, self.y2])


@dataclass(frozen=True)
class TangentVector:
    base: S3Point
    vx1: float
    vy1: float
    vx2: float
    vy2: float

    def __post_init__(self):
        d = float(np.dot(self.base.array, self.array))
        if abs(d) > TANGENT_TOL:
            raise ValueError(f"vector is not tangent: <v, base> = {d!r}")

    @classmethod
    def from_arrays(cls, base, v) -> "TangentVector":
        if not isinstance(base, S3Point):
            base = S3Point.from_array(base)
        return cls(base, *map(float, np.asarray(v, dtype=float)))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.vx1, self.vy1, self.vx2, self.vy2])

    def J(self) -> "TangentVector":
        return TangentVector.from_arrays(self.base, apply_J(self.array, self.base.array))

    def horizontal(self) -> "TangentVector":
        return TangentVector.from_arrays(self.base, horizontal_part(self.array, self.base.array))


@dataclass(frozen=True)
class FrameAt:
    E1: TangentVector
    E2: TangentVector
    V: TangentVector


def frame_at(p) -> FrameAt:
    """Right-invariant orthonormal frame ``(E1, E2, V)`` at ``p``."""
    base = p if isinstance(p, S3Point) else S3Point.from_array(p)
    arr = base.array
    return FrameAt(
        E1=TangentVector.from_arrays(base, e1_field(arr)),
        E2=TangentVector.from_arrays(base, e2_field(arr)),
        V=TangentVector.from_arrays(base, vertical(arr)),
    )

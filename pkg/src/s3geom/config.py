"""Single source for tolerances and the rationality policy."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path


@dataclass(frozen=True)
class RationalityPolicy:
    """Decides when a float counts as rational.

    A value is accepted when its best rational approximation with
    denominator at most ``max_denominator`` lies within ``tol``.
    """

    tol: float = 1e-9
    max_denominator: int = 64

    def __post_init__(self):
        if self.max_denominator < 1:
            raise ValueError("max_denominator must be >= 1")
        if not self.tol > 0:
            raise ValueError("rationality tolerance must be positive")

    def approximate(self, x: float) -> Fraction | None:
        frac = Fraction(x).limit_denominator(self.max_denominator)
        if abs(float(frac) - x) <= self.tol:
            return frac
        return None


@dataclass(frozen=True)
class Tolerances:
    unit: float = 1e-12
    tangent: float = 1e-10
    finite_difference: float = 1e-5
    singular: float = 1e-6
    conditioning: float = 1e-3
    ode_rtol: float = 1e-10
    energy_drift: float = 1e-10
    omega_min: float = 1e-8
    closure: float = 1e-9
    closure_length_cap_over_pi: float = 512.0
    pole_drop: float = 1e-6

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ValueError(f"tolerance {f.name} must be positive")


@dataclass(frozen=True)
class Config:
    tolerances: Tolerances = Tolerances()
    rationality: RationalityPolicy = RationalityPolicy()

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        unknown = set(data) - {"tolerances", "rationality"}
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        return cls(
            tolerances=Tolerances(**data.get("tolerances", {})),
            rationality=RationalityPolicy(**data.get("rationality", {})),
        )

    @classmethod
    def load(cls, path: str | Path) -> "Config":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def with_overrides(self, tolerances: dict | None = None, rationality: dict | None = None) -> "Config":
        tol = replace(self.tolerances, **(tolerances or {}))
        rat = replace(self.rationality, **(rationality or {}))
        return Config(tolerances=tol, rationality=rat)


DEFAULT = Config()

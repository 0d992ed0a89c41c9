"""Minkowski geometry with c = 1 (time in hours, distance in light-hours).

Signature convention: ``interval2 = dt**2 - |dx|**2``, so timelike separations
are positive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tolerances as tol
from .errors import DimensionError


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(c) for c in np.atleast_1d(self.x))
        if not 1 <= len(x) <= 3:
            raise DimensionError(f"1 to 3 spatial coordinates expected, got {len(x)}")
        t = float(self.t)
        if not (math.isfinite(t) and all(math.isfinite(c) for c in x)):
            raise ValueError(f"non-finite coordinates in ({t}, {x})")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "x", x)

    @property
    def spatial_dim(self) -> int:
        return len(self.x)


class CausalRelation(enum.Enum):
    """Position of a point ``q`` relative to an apex ``p``."""

    TIMELIKE_PAST = "timelike_past"
    LIGHTLIKE_PAST = "lightlike_past"
    SPACELIKE = "spacelike"
    LIGHTLIKE_FUTURE = "lightlike_future"
    TIMELIKE_FUTURE = "timelike_future"
    COINCIDENT = "coincident"

    def mirrored(self) -> CausalRelation:
        return _MIRROR[self]


_MIRROR = {
    CausalRelation.TIMELIKE_PAST: CausalRelation.TIMELIKE_FUTURE,
    CausalRelation.LIGHTLIKE_PAST: CausalRelation.LIGHTLIKE_FUTURE,
    CausalRelation.TIMELIKE_FUTURE: CausalRelation.TIMELIKE_PAST,
    CausalRelation.LIGHTLIKE_FUTURE: CausalRelation.LIGHTLIKE_PAST,
    CausalRelation.SPACELIKE: CausalRelation.SPACELIKE,
    CausalRelation.COINCIDENT: CausalRelation.COINCIDENT,
}

PAST_CONE = frozenset(
    {CausalRelation.TIMELIKE_PAST, CausalRelation.LIGHTLIKE_PAST, CausalRelation.COINCIDENT}
)


@dataclass(frozen=True)
class Boost:
    """Pure Lorentz boost to a frame moving with velocity ``v``."""

    v: tuple[float, ...]

    def __post_init__(self):
        v = tuple(float(c) for c in np.atleast_1d(self.v))
        if not all(math.isfinite(c) for c in v):
            raise ValueError("boost velocity must be finite")
        if math.hypot(*v) >= 1.0:
            raise ValueError(f"boost speed {math.hypot(*v)} must be < 1")
        object.__setattr__(self, "v", v)

    @property
    def speed(self) -> float:
        return math.hypot(*self.v)

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.speed**2)

    def inverse(self) -> Boost:
        return Boost(tuple(-c for c in self.v))


def _same_dim(p: SpacetimePoint, q: SpacetimePoint) -> None:
    if p.spatial_dim != q.spatial_dim:
        raise DimensionError(f"spatial dimensions differ: {p.spatial_dim} vs {q.spatial_dim}")


def interval2(p: SpacetimePoint, q: SpacetimePoint) -> float:
    _same_dim(p, q)
    dx2 = sum((a - b) ** 2 for a, b in zip(p.x, q.x))
    return (p.t - q.t) ** 2 - dx2


def causal_relation(apex: SpacetimePoint, q: SpacetimePoint) -> CausalRelation:
    s2 = interval2(apex, q)
    dt = q.t - apex.t
    if abs(dt) <= tol.COINCIDENCE and all(abs(a - b) <= tol.COINCIDENCE for a, b in zip(apex.x, q.x)):
        return CausalRelation.COINCIDENT
    if abs(s2) < tol.LIGHTLIKE_BAND:
        return CausalRelation.LIGHTLIKE_PAST if dt < 0 else CausalRelation.LIGHTLIKE_FUTURE
    if s2 > 0:
        return CausalRelation.TIMELIKE_PAST if dt < 0 else CausalRelation.TIMELIKE_FUTURE
    return CausalRelation.SPACELIKE


def in_past_cone(apex: SpacetimePoint, q: SpacetimePoint) -> bool:
    """Closed past light cone membership: the lightlike boundary and the apex count."""
    return causal_relation(apex, q) in PAST_CONE


def boost(p: SpacetimePoint, b: Boost) -> SpacetimePoint:
    if len(b.v) != p.spatial_dim:
        raise DimensionError(f"boost has {len(b.v)} components, point has {p.spatial_dim}")
    v = np.array(b.v)
    x = np.array(p.x)
    v2 = float(v @ v)
    if v2 == 0.0:
        return p
    g = b.gamma
    vx = float(v @ x)
    t_new = g * (p.t - vx)
    x_new = x + ((g - 1.0) * vx / v2 - g * p.t) * v
    return SpacetimePoint(t_new, tuple(x_new))


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.dist(a, b)

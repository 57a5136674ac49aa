"""Domain types for the planar two-zone piecewise linear system.

The state space is split by a switching set into a left and a right zone,
each governed by a fixed 2x2 matrix.  The switching set is the negative
y-axis together with the curve x = h(y) for y > 0, where h is a C1
function with h(0) = 0.  Everything in this module is immutable and the
operations are pure, so concurrent reads are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np


class PWLError(Exception):
    """Base class for errors raised by this package."""


class EvaluationError(PWLError):
    """A boundary or field evaluation produced a non-finite value."""


class DomainError(PWLError):
    """An argument lies outside the mathematical domain of an operation."""


class ParameterError(PWLError):
    """A constructor received parameters outside its validity range."""


class HypothesisError(PWLError):
    """A required non-sliding/amplitude condition fails.

    Carries the offending report (when one was computed) so callers can
    inspect which inequality broke and where.
    """

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class IntegrationError(PWLError):
    """Numerical integration failed to produce the requested event."""


class TangencyError(IntegrationError):
    """The start point sits on the stop section with tangent velocity."""


class Zone(str, Enum):
    """Which linear zone a point or flow belongs to."""

    LEFT = "left"
    RIGHT = "right"

    @property
    def sign(self) -> float:
        """Sign of the diagonal rate: +1 for the right zone, -1 for the left."""
        return 1.0 if self is Zone.RIGHT else -1.0


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class SystemParams:
    """Single dimensionless rate gamma > 0.

    gamma is simultaneously the contraction rate of the left zone and the
    expansion rate of the right zone; the rotation rate of both zones is 1.
    """

    gamma: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise ParameterError(f"gamma must be a finite positive real, got {self.gamma!r}")


@dataclass(frozen=True)
class ZoneMatrices:
    """Entries of the two zone matrices [[+-2*gamma, -1], [gamma^2+1, 0]].

    Both matrices have determinant gamma^2 + 1 and trace +-2*gamma, hence
    complex eigenvalues +-gamma +- i: each zone is a focus, expanding on
    the right and contracting on the left.
    """

    g11_plus: float
    g12_plus: float
    g21_plus: float
    g22_plus: float
    g11_minus: float
    g12_minus: float
    g21_minus: float
    g22_minus: float

    @classmethod
    def from_params(cls, params: SystemParams) -> "ZoneMatrices":
        g = params.gamma
        return cls(
            g11_plus=2.0 * g, g12_plus=-1.0, g21_plus=g * g + 1.0, g22_plus=0.0,
            g11_minus=-2.0 * g, g12_minus=-1.0, g21_minus=g * g + 1.0, g22_minus=0.0,
        )

    @property
    def plus(self) -> np.ndarray:
        return np.array([[self.g11_plus, self.g12_plus],
                         [self.g21_plus, self.g22_plus]])

    @property
    def minus(self) -> np.ndarray:
        return np.array([[self.g11_minus, self.g12_minus],
                         [self.g21_minus, self.g22_minus]])

    def trace(self, zone: Zone) -> float:
        return self.g11_plus + self.g22_plus if zone is Zone.RIGHT else self.g11_minus + self.g22_minus

    def det(self, zone: Zone) -> float:
        if zone is Zone.RIGHT:
            return self.g11_plus * self.g22_plus - self.g12_plus * self.g21_plus
        return self.g11_minus * self.g22_minus - self.g12_minus * self.g21_minus

    def discriminant(self, zone: Zone) -> float:
        t = self.trace(zone)
        return t * t - 4.0 * self.det(zone)


def zone_matrix(params: SystemParams, zone: Zone) -> np.ndarray:
    """2x2 matrix of the requested zone as a fresh ndarray."""
    g = params.gamma
    return np.array([[zone.sign * 2.0 * g, -1.0], [g * g + 1.0, 0.0]])


@dataclass(frozen=True)
class Boundary:
    """Switching curve offset h(y) for y >= 0, with its exact derivative.

    ``evaluate`` and ``derivative`` must accept a float or a 1-d ndarray
    and return the matching shape; h(0) = 0 is required so the switching
    set is continuous at the origin.  The derivative is carried explicitly
    (not differenced) because the stability classification and the
    transversality margins need it exactly; a finite-difference
    consistency check in the test suite guards against mismatched pairs.

    ``descriptor`` is a JSON-ready tag ({"family": ..., "params": ...})
    used for serialization; it is the only place family identity lives.
    """

    evaluate: Callable[[float], float]
    derivative: Callable[[float], float]
    descriptor: dict = field(default_factory=lambda: {"family": "custom", "params": {}})


@dataclass(frozen=True)
class PWLSystem:
    """A rate gamma plus a switching boundary: the full two-zone system."""

    params: SystemParams
    boundary: Boundary

    @property
    def gamma(self) -> float:
        return self.params.gamma

    @property
    def matrices(self) -> ZoneMatrices:
        return ZoneMatrices.from_params(self.params)


def manifold_value(system: PWLSystem, p: Point) -> float:
    """Signed switching function: x for y <= 0, x - h(y) for y > 0.

    Its sign selects the zone; its zero set is the switching manifold.
    Continuous across y = 0 because h(0) = 0.
    """
    x, y = p
    if not (math.isfinite(x) and math.isfinite(y)):
        raise EvaluationError(f"non-finite point {p!r}")
    if y <= 0.0:
        return float(x)
    h = float(system.boundary.evaluate(y))
    if not math.isfinite(h):
        raise EvaluationError(f"boundary value not finite at y={y!r}")
    return float(x) - h


def manifold_values(system: PWLSystem, points: np.ndarray) -> np.ndarray:
    """Vectorized ``manifold_value`` over an (m, 2) array of points."""
    xs = points[:, 0]
    ys = points[:, 1]
    out = xs.astype(float).copy()
    mask = ys > 0.0
    if np.any(mask):
        hv = np.asarray(system.boundary.evaluate(ys[mask]), dtype=float)
        if not np.all(np.isfinite(hv)):
            bad = ys[mask][~np.isfinite(hv)][0]
            raise EvaluationError(f"boundary value not finite at y={bad!r}")
        out[mask] = xs[mask] - hv
    return out


def vector_field(system: PWLSystem, p: Point) -> Point:
    """Velocity of the discontinuous field at p.

    Uses the right-zone matrix when the switching function is >= 0 and the
    left-zone matrix otherwise.  The tie at exactly zero goes to the right
    zone by convention; nothing downstream depends on it because every
    boundary point of interest is a transversal crossing.
    """
    g = system.gamma
    s = 1.0 if manifold_value(system, p) >= 0.0 else -1.0
    x, y = p
    return Point(s * 2.0 * g * x - y, (g * g + 1.0) * x)


def system_descriptor(system: PWLSystem) -> dict:
    """JSON-ready descriptor: {"gamma": ..., "boundary": {...}}."""
    return {"gamma": system.gamma, "boundary": dict(system.boundary.descriptor)}

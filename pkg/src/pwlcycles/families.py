"""Constructors for switching-boundary families with exact derivatives.

Four built-in families plus tabulated user data:

    zero         h(y) = 0; straight switching line, the system degenerates
                 to a continuous field with a global center.
    sine         h(y) = (2*gamma/((gamma^2+1)*pi)) * sin(pi*y) on
                 [0, (2n+1)/2], frozen at its endpoint value beyond;
                 n zeros at y = 1..n, so exactly n limit cycles with
                 alternating stability (even crossings stable).
                 Requires 0 < gamma < sqrt(3/5).
    oscillatory  h(y) = alpha*y^2*sin(1/y), zeros at 1/(k*pi) accumulating
                 at 0, giving infinitely many nested cycles.  Requires
                 0 < alpha < (sqrt(3)-1)/2 and is only certified for
                 gamma = 1.
    cosine       h(y) = (2*gamma/((gamma^2+1)*pi)) * (1 - cos(pi*y)) on
                 [0, 2n+1], frozen beyond; non-negative with tangential
                 zeros at y = 2..2n step 2, producing n semi-stable
                 cycles.  Requires 0 < gamma < sqrt(3/13).
    table        monotone C1 cubic through user samples (y, h, h').

Every evaluate/derivative pair accepts floats or 1-d arrays.  Parameter
ranges are enforced strictly at construction: each family's cycle
inventory is only guaranteed inside its stated range.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .core import Boundary, ParameterError, PWLSystem, SystemParams

SINE_GAMMA_LIMIT = math.sqrt(3.0 / 5.0)
COSINE_GAMMA_LIMIT = math.sqrt(3.0 / 13.0)
OSCILLATORY_ALPHA_LIMIT = (math.sqrt(3.0) - 1.0) / 2.0

FAMILIES = ("zero", "sine", "oscillatory", "cosine", "table")


def _check_count(n) -> int:
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ParameterError(f"n must be a positive integer, got {n!r}")
    return n


def make_zero() -> Boundary:
    """Straight-line boundary h = 0; the two zones join into a continuous field."""

    def evaluate(y):
        return np.zeros_like(np.asarray(y, dtype=float)) if np.ndim(y) else 0.0

    return Boundary(evaluate=evaluate, derivative=evaluate,
                    descriptor={"family": "zero", "params": {}})


def make_sine(params: SystemParams, n: int) -> Boundary:
    """Sine boundary with n zeros at the integers 1..n.

    The window edge (2n+1)/2 falls on an extremum of sin(pi*y), so the
    constant tail joins with matching value and zero slope (C1).
    """
    n = _check_count(n)
    g = params.gamma
    if not (0.0 < g < SINE_GAMMA_LIMIT):
        raise ParameterError(
            f"sine family requires 0 < gamma < sqrt(3/5) ~= {SINE_GAMMA_LIMIT:.6f}, got {g!r}"
        )
    amp = 2.0 * g / ((g * g + 1.0) * math.pi)
    slope = 2.0 * g / (g * g + 1.0)
    window = (2.0 * n + 1.0) / 2.0
    tail = amp * (-1.0) ** n

    def evaluate(y):
        arr = np.asarray(y, dtype=float)
        if arr.ndim == 0:
            return amp * math.sin(math.pi * float(arr)) if float(arr) <= window else tail
        return np.where(arr <= window, amp * np.sin(np.pi * arr), tail)

    def derivative(y):
        arr = np.asarray(y, dtype=float)
        if arr.ndim == 0:
            return slope * math.cos(math.pi * float(arr)) if float(arr) <= window else 0.0
        return np.where(arr <= window, slope * np.cos(np.pi * arr), 0.0)

    return Boundary(evaluate=evaluate, derivative=derivative,
                    descriptor={"family": "sine", "params": {"n": n}})


def make_oscillatory(alpha: float) -> Boundary:
    """Boundary alpha*y^2*sin(1/y) whose zeros 1/(k*pi) accumulate at the origin.

    Certified only with gamma = 1 (enforced when built through a system
    descriptor; the boundary itself is gamma-free).  The derivative at 0
    is the limit value 0.
    """
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < OSCILLATORY_ALPHA_LIMIT):
        raise ParameterError(
            f"oscillatory family requires 0 < alpha < (sqrt(3)-1)/2 ~= {OSCILLATORY_ALPHA_LIMIT:.6f}, got {alpha!r}"
        )
    a = float(alpha)

    def evaluate(y):
        arr = np.asarray(y, dtype=float)
        if arr.ndim == 0:
            yv = float(arr)
            return a * yv * yv * math.sin(1.0 / yv) if yv > 0.0 else 0.0
        out = np.zeros_like(arr)
        m = arr > 0.0
        ym = arr[m]
        out[m] = a * ym * ym * np.sin(1.0 / ym)
        return out

    def derivative(y):
        arr = np.asarray(y, dtype=float)
        if arr.ndim == 0:
            yv = float(arr)
            if yv <= 0.0:
                return 0.0
            return 2.0 * a * yv * math.sin(1.0 / yv) - a * math.cos(1.0 / yv)
        out = np.zeros_like(arr)
        m = arr > 0.0
        ym = arr[m]
        out[m] = 2.0 * a * ym * np.sin(1.0 / ym) - a * np.cos(1.0 / ym)
        return out

    return Boundary(evaluate=evaluate, derivative=derivative,
                    descriptor={"family": "oscillatory", "params": {"alpha": a}})


def oscillatory_root(k: int) -> float:
    """Exact k-th zero 1/(k*pi) of the oscillatory boundary, outermost first.

    Scan-based root finding cannot enumerate the accumulating tail, so
    cycle searches on this family go through these exact values.
    """
    k = _check_count(k)
    return 1.0 / (k * math.pi)


def make_cosine(params: SystemParams, n: int) -> Boundary:
    """Non-negative cosine boundary with tangential zeros at 2, 4, ..., 2n.

    1 - cos(pi*y) touches zero without sign change, so every cycle it
    produces is non-hyperbolic (h' = 0 there) and semi-stable.  The tail
    beyond y = 2n+1 is the constant maximum value, joined C1.
    """
    n = _check_count(n)
    g = params.gamma
    if not (0.0 < g < COSINE_GAMMA_LIMIT):
        raise ParameterError(
            f"cosine family requires 0 < gamma < sqrt(3/13) ~= {COSINE_GAMMA_LIMIT:.6f}, got {g!r}"
        )
    amp = 2.0 * g / ((g * g + 1.0) * math.pi)
    slope = 2.0 * g / (g * g + 1.0)
    window = 2.0 * n + 1.0
    tail = 2.0 * amp

    def evaluate(y):
        arr = np.asarray(y, dtype=float)
        if arr.ndim == 0:
            return amp * (1.0 - math.cos(math.pi * float(arr))) if float(arr) <= window else tail
        return np.where(arr <= window, amp * (1.0 - np.cos(np.pi * arr)), tail)

    def derivative(y):
        arr = np.asarray(y, dtype=float)
        if arr.ndim == 0:
            return slope * math.sin(math.pi * float(arr)) if float(arr) <= window else 0.0
        return np.where(arr <= window, slope * np.sin(np.pi * arr), 0.0)

    return Boundary(evaluate=evaluate, derivative=derivative,
                    descriptor={"family": "cosine", "params": {"n": n}})


def make_table(samples: Sequence[tuple]) -> Boundary:
    """C1 cubic boundary through (y, h, h') samples, starting at (0, 0, .).

    Slopes given as None are filled from a shape-preserving (pchip) fit;
    provided slopes are honored exactly, so the stored derivative is the
    analytic derivative of the interpolant.  The cubic extrapolates
    beyond the last sample; the working range is the caller's business.
    """
    if len(samples) < 2:
        raise ParameterError("table boundary needs at least 2 samples")
    ys = np.array([float(s[0]) for s in samples])
    hs = np.array([float(s[1]) for s in samples])
    slopes = [s[2] if len(s) > 2 else None for s in samples]
    if ys[0] != 0.0 or hs[0] != 0.0:
        raise ParameterError("first sample must be (0, 0, .)")
    if np.any(np.diff(ys) <= 0.0):
        raise ParameterError("sample ordinates must be strictly increasing")
    if not (np.all(np.isfinite(ys)) and np.all(np.isfinite(hs))):
        raise ParameterError("samples must be finite")

    ds = np.empty_like(ys)
    missing = [i for i, s in enumerate(slopes) if s is None]
    if missing:
        fill = PchipInterpolator(ys, hs).derivative()(ys[missing])
        ds[missing] = fill
    for i, s in enumerate(slopes):
        if s is not None:
            ds[i] = float(s)
    if not np.all(np.isfinite(ds)):
        raise ParameterError("sample slopes must be finite")

    spline = CubicHermiteSpline(ys, hs, ds)
    dspline = spline.derivative()

    def evaluate(y):
        out = spline(y)
        return float(out) if np.ndim(y) == 0 else out

    def derivative(y):
        out = dspline(y)
        return float(out) if np.ndim(y) == 0 else out

    stored = [[float(a), float(b), float(c)] for a, b, c in zip(ys, hs, ds)]
    return Boundary(evaluate=evaluate, derivative=derivative,
                    descriptor={"family": "table", "params": {"samples": stored}})


def boundary_from_descriptor(descriptor: dict, params: SystemParams) -> Boundary:
    """Rebuild a boundary from its JSON descriptor."""
    family = descriptor.get("family")
    fp = descriptor.get("params", {}) or {}
    if family == "zero":
        return make_zero()
    if family == "sine":
        return make_sine(params, fp.get("n"))
    if family == "oscillatory":
        if params.gamma != 1.0:
            raise ParameterError(
                f"oscillatory family is only certified with gamma = 1, got {params.gamma!r}"
            )
        return make_oscillatory(fp.get("alpha"))
    if family == "cosine":
        return make_cosine(params, fp.get("n"))
    if family == "table":
        return make_table([tuple(s) for s in fp.get("samples", [])])
    raise ParameterError(f"unknown boundary family {family!r}")


def system_from_descriptor(descriptor: dict) -> PWLSystem:
    """Build the full system from {"gamma": ..., "boundary": {...}}."""
    if "gamma" not in descriptor:
        raise ParameterError("system descriptor needs a 'gamma' entry")
    if "boundary" not in descriptor:
        raise ParameterError("system descriptor needs a 'boundary' entry")
    gamma = descriptor["gamma"]
    if not isinstance(gamma, (int, float)) or isinstance(gamma, bool):
        raise ParameterError(f"gamma must be a number, got {gamma!r}")
    params = SystemParams(float(gamma))
    boundary = boundary_from_descriptor(descriptor["boundary"], params)
    return PWLSystem(params=params, boundary=boundary)

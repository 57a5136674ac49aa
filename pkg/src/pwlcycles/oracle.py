"""Independent numerical ground truth for the analytic results.

Everything here works only with the discontinuous vector field itself:
fixed-step 4th-order (Runge-Kutta) integration inside one zone at a
time, with boundary and section crossings bracketed between steps and
localized by bisection.  No crossing-time or displacement formula enters
any code path, so agreement with the closed forms is meaningful
cross-validation.

Implementation note: on a linear system the classic RK4 step is exactly
multiplication by the degree-4 Taylor polynomial of exp(step*A).  The
stepper therefore propagates whole blocks of steps through the (complex)
eigenpair of that one-step matrix, which reproduces the RK4 iterates to
roundoff at a fraction of the cost; truncation error and convergence
order are those of RK4 by construction.

Backward integration is forward integration of the negated field; event
logic is unchanged.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    DomainError,
    IntegrationError,
    Point,
    PWLSystem,
    TangencyError,
    Zone,
    manifold_value,
    manifold_values,
    zone_matrix,
)
from .cycles import StabilityClass

# Longest uninterrupted stretch propagated per block, in time units.
# Any half-turn of these systems takes at most 3*pi/2 < 8.
_BLOCK_TIME = 8.0
_MAX_BISECT = 200

# Smallest meaningful radius drift per return-map pass; drifts inside this
# band are treated as numerical noise when resolving stability.
DRIFT_FLOOR = 1e-9


class TerminalEvent(str, Enum):
    BOUNDARY_CROSS = "boundary_cross"
    AXIS_CROSS = "axis_cross"
    TIME_OUT = "time_out"


class Direction(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class EventSpec:
    """Stop condition: a zero crossing of one scalar event function.

    kind 'axis' watches the x coordinate, 'manifold' the switching
    function.  direction +1 fires on ascending crossings, -1 on
    descending ones.  require_negative_y restricts to the lower section.
    """

    kind: str
    direction: int
    require_negative_y: bool = False


LOWER_AXIS_ASCENDING = EventSpec("axis", +1, True)
LOWER_AXIS_DESCENDING = EventSpec("axis", -1, True)
MANIFOLD_DESCENDING = EventSpec("manifold", -1, False)


@dataclass(frozen=True)
class IntegrationOptions:
    step: float = 1e-4
    event_tol: float = 1e-12
    max_time: float = 100.0

    def __post_init__(self):
        if not (self.step > 0.0 and math.isfinite(self.step)):
            raise DomainError(f"step must be positive, got {self.step!r}")
        if not (0.0 < self.event_tol < self.step):
            raise DomainError("event_tol must be positive and below step")
        if not (self.max_time > 0.0):
            raise DomainError("max_time must be positive")


@dataclass
class TrajectorySegment:
    """One in-zone orbit piece: sampled states plus the stopping event.

    times/points include the start and the localized terminal state;
    interior samples are thinned by the caller's record stride.  The
    crossing counters cover the whole segment regardless of thinning.
    """

    zone: Zone
    times: np.ndarray
    points: np.ndarray
    terminal_event: TerminalEvent
    sigma_crossings: int = 0
    section_returns: int = 0

    @property
    def states(self) -> list[tuple[float, Point]]:
        return [(float(t), Point(float(p[0]), float(p[1])))
                for t, p in zip(self.times, self.points)]

    @property
    def terminal_time(self) -> float:
        return float(self.times[-1])

    @property
    def terminal_point(self) -> Point:
        return Point(float(self.points[-1, 0]), float(self.points[-1, 1]))


def segments_to_csv(segments) -> str:
    """CSV export (t, x, y, zone) of one or more trajectory segments."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("t", "x", "y", "zone"))
    for seg in segments:
        for t, p in zip(seg.times, seg.points):
            w.writerow((f"{t:.12g}", f"{p[0]:.12g}", f"{p[1]:.12g}", seg.zone.value))
    return buf.getvalue()


@dataclass(frozen=True)
class ReturnMapResult:
    """One full turn of the lower-section Poincare map.

    A valid turn crosses the switching curve exactly once and returns to
    {x=0, y<0} exactly once; the counters let callers verify that.
    """

    y_in: float
    y_out: float
    flight_time: float
    sigma_crossings: int
    section_returns: int


def _step_transfer(matrix: np.ndarray, step: float) -> np.ndarray:
    """One-step map of fixed-step RK4 on x' = matrix @ x."""
    m = matrix * step
    t = np.eye(2)
    acc = np.eye(2)
    for k in (1.0, 2.0, 3.0, 4.0):
        acc = acc @ m / k
        t = t + acc
    return t


def _propagate_states(transfer: np.ndarray, x0: np.ndarray, n: int) -> np.ndarray:
    """States x_k = transfer^k @ x0 for k = 0..n, shape (n+1, 2).

    Uses the complex eigenpair of the 2x2 transfer (always a conjugate
    pair here since both zones are foci); falls back to plain stepping
    for a degenerate spectrum.
    """
    tr = transfer[0, 0] + transfer[1, 1]
    # (t00 - t11)^2 + 4*t01*t10 equals tr^2 - 4*det without the subtractive
    # cancellation that would otherwise poison the rotation angle per step.
    diag = transfer[0, 0] - transfer[1, 1]
    disc = diag * diag + 4.0 * transfer[0, 1] * transfer[1, 0]
    if disc >= 0.0 or abs(transfer[0, 1]) < 1e-300:
        out = np.empty((n + 1, 2))
        out[0] = x0
        for k in range(n):
            out[k + 1] = transfer @ out[k]
        return out
    lam = complex(0.5 * tr, 0.5 * math.sqrt(-disc))
    v = np.array([transfer[0, 1], lam - transfer[0, 0]], dtype=complex)
    vc = np.conj(v)
    den = v[0] * vc[1] - v[1] * vc[0]
    a = (x0[0] * vc[1] - x0[1] * vc[0]) / den
    powers = np.exp(np.arange(n + 1) * np.log(lam))
    out = 2.0 * np.real(np.outer(a * powers, v))
    out[0] = x0
    return out


def _event_values(system: PWLSystem, kind: str, states: np.ndarray) -> np.ndarray:
    if kind == "axis":
        return states[:, 0].copy()
    return manifold_values(system, states)


def _event_value_scalar(system: PWLSystem, kind: str, x: np.ndarray) -> float:
    if kind == "axis":
        return float(x[0])
    return manifold_value(system, Point(float(x[0]), float(x[1])))


def _crossing_pairs(g: np.ndarray, direction: int) -> np.ndarray:
    """Indices k where g crosses zero with the requested direction between k and k+1."""
    if direction > 0:
        return np.flatnonzero((g[:-1] < 0.0) & (g[1:] >= 0.0) & (g[1:] - g[:-1] > 0.0))
    return np.flatnonzero((g[:-1] > 0.0) & (g[1:] <= 0.0) & (g[1:] - g[:-1] < 0.0))


def _count_descending_sigma(system: PWLSystem, states: np.ndarray, g_man: np.ndarray,
                            first_block: bool, event_tol: float) -> int:
    """Descending switching-curve crossings with y > 0, skipping a start residue."""
    ks = _crossing_pairs(g_man, -1)
    count = 0
    for k in ks:
        if first_block and k == 0 and abs(g_man[0]) <= event_tol:
            continue
        if states[k, 1] > 0.0 and states[k + 1, 1] > 0.0:
            count += 1
    return count


def _count_ascending_axis(states: np.ndarray, g_axis: np.ndarray,
                          first_block: bool, event_tol: float) -> int:
    ks = _crossing_pairs(g_axis, +1)
    count = 0
    for k in ks:
        if first_block and k == 0 and abs(g_axis[0]) <= event_tol:
            continue
        if states[k, 1] < 0.0 and states[k + 1, 1] < 0.0:
            count += 1
    return count


def _localize(system: PWLSystem, matrix: np.ndarray, x_from: np.ndarray, step: float,
              g_from: float, kind: str, event_tol: float) -> tuple[float, np.ndarray, float]:
    """Bisect the substep tau in (0, step] where the event function vanishes."""
    lo, hi = 0.0, step
    g_lo = g_from
    tau = step
    x_t = _step_transfer(matrix, tau) @ x_from
    g_t = _event_value_scalar(system, kind, x_t)
    for _ in range(_MAX_BISECT):
        if abs(g_t) <= event_tol:
            break
        if (g_t < 0.0) == (g_lo < 0.0):
            lo, g_lo = tau, g_t
        else:
            hi = tau
        tau = 0.5 * (lo + hi)
        x_t = _step_transfer(matrix, tau) @ x_from
        g_t = _event_value_scalar(system, kind, x_t)
    return tau, x_t, g_t


def integrate_in_zone(system: PWLSystem, zone: Zone, start: Point,
                      direction: Direction = Direction.FORWARD,
                      stop: EventSpec = LOWER_AXIS_ASCENDING,
                      opts: IntegrationOptions | None = None,
                      record_stride: int = 1,
                      t0: float = 0.0) -> TrajectorySegment:
    """Integrate one zone's linear field until the stop event or max_time.

    The start may sit on the stop section provided the velocity carries it
    off (a residual event value within event_tol at the start is ignored
    for the first step).  record_stride thins interior samples; 0 keeps
    only the endpoints.  Times are t0 plus elapsed integration time and
    increase regardless of direction.
    """
    opts = opts or IntegrationOptions()
    if isinstance(direction, str):
        direction = Direction(direction)
    if isinstance(zone, str):
        zone = Zone(zone)
    x = np.array([start[0], start[1]], dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"non-finite start point {start!r}")

    matrix = zone_matrix(system.params, zone)
    if direction is Direction.BACKWARD:
        matrix = -matrix
    transfer = _step_transfer(matrix, opts.step)

    g0 = _event_value_scalar(system, stop.kind, x)
    if abs(g0) <= opts.event_tol:
        speed = float(np.hypot(*(matrix @ x)))
        if speed > 1e-14:
            if stop.kind == "axis":
                dgdt = float((matrix @ x)[0])
            else:
                y = float(x[1])
                hp = float(system.boundary.derivative(y)) if y > 0.0 else 0.0
                vel = matrix @ x
                dgdt = float(vel[0] - hp * vel[1])
            if abs(dgdt) <= 1e-12 * speed:
                raise TangencyError(
                    f"start {start!r} sits on the stop section with tangent velocity"
                )

    stride = max(0, int(record_stride))
    rec_t: list[np.ndarray] = []
    rec_p: list[np.ndarray] = []
    sigma_count = 0
    section_count = 0
    elapsed = 0.0
    first_block = True

    while True:
        remaining = opts.max_time - elapsed
        if remaining <= 0.5 * opts.step:
            break
        n = int(min(math.ceil(remaining / opts.step),
                    math.ceil(_BLOCK_TIME / opts.step)))
        states = _propagate_states(transfer, x, n)
        g_axis = states[:, 0]
        g_man = manifold_values(system, states)
        g_stop = g_axis if stop.kind == "axis" else g_man

        candidates = _crossing_pairs(g_stop, stop.direction)
        hit = None
        for k in candidates:
            if first_block and k == 0 and abs(g_stop[0]) <= opts.event_tol:
                continue
            if stop.require_negative_y and not (states[k, 1] < 0.0 and states[k + 1, 1] < 0.0):
                continue
            hit = int(k)
            break

        upto = hit if hit is not None else n
        # Crossing diagnostics over the part of the block actually consumed.
        sigma_count += _count_descending_sigma(system, states[:upto + 1], g_man[:upto + 1],
                                               first_block, opts.event_tol)
        section_count += _count_ascending_axis(states[:upto + 1], g_axis[:upto + 1],
                                               first_block, opts.event_tol)

        if hit is not None:
            if g_stop[hit + 1] == 0.0:
                tau, x_t = opts.step, states[hit + 1]
            else:
                tau, x_t, _ = _localize(system, matrix, states[hit], opts.step,
                                        float(g_stop[hit]), stop.kind, opts.event_tol)
            if stride > 0:
                idx = np.arange(0, hit + 1, stride)
                rec_t.append(elapsed + idx * opts.step)
                rec_p.append(states[idx])
            else:
                rec_t.append(np.array([elapsed]))
                rec_p.append(states[:1])
            rec_t.append(np.array([elapsed + hit * opts.step + tau]))
            rec_p.append(x_t[None, :])
            terminal = (TerminalEvent.AXIS_CROSS if stop.kind == "axis"
                        else TerminalEvent.BOUNDARY_CROSS)
            if stop.kind == "manifold":
                sigma_count += 1
            else:
                section_count += 1
            times = np.concatenate(rec_t) + t0
            points = np.concatenate(rec_p)
            return TrajectorySegment(zone=zone, times=times, points=points,
                                     terminal_event=terminal,
                                     sigma_crossings=sigma_count,
                                     section_returns=section_count)

        if stride > 0:
            idx = np.arange(0, n, stride)
            rec_t.append(elapsed + idx * opts.step)
            rec_p.append(states[idx])
        elif first_block:
            rec_t.append(np.array([elapsed]))
            rec_p.append(states[:1])
        x = states[-1]
        elapsed += n * opts.step
        first_block = False

    rec_t.append(np.array([elapsed]))
    rec_p.append(x[None, :])
    times = np.concatenate(rec_t) + t0
    points = np.concatenate(rec_p)
    return TrajectorySegment(zone=zone, times=times, points=points,
                             terminal_event=TerminalEvent.TIME_OUT,
                             sigma_crossings=sigma_count,
                             section_returns=section_count)


def propagate_fixed(system: PWLSystem, zone: Zone, start: Point, duration: float,
                    direction: Direction = Direction.FORWARD,
                    step: float = 1e-4) -> Point:
    """Plain fixed-step RK4 propagation for a set time, no event handling.

    Used to cross-check the closed-form zone flow at arbitrary times.
    """
    if duration < 0.0:
        raise DomainError("duration must be non-negative")
    matrix = zone_matrix(system.params, zone)
    if isinstance(direction, str):
        direction = Direction(direction)
    if direction is Direction.BACKWARD:
        matrix = -matrix
    n_full = int(duration / step)
    remainder = duration - n_full * step
    x = np.array([start[0], start[1]], dtype=float)
    if n_full:
        transfer = _step_transfer(matrix, step)
        x = _propagate_states(transfer, x, n_full)[-1]
    if remainder > 1e-16:
        x = _step_transfer(matrix, remainder) @ x
    return Point(float(x[0]), float(x[1]))


def numeric_displacement(system: PWLSystem, y: float,
                         opts: IntegrationOptions | None = None) -> float:
    """Displacement at y measured purely by integration.

    Forward through the left zone from (h(y), y) to the lower section,
    backward through the right zone from the same point, difference of
    landing ordinates.
    """
    opts = opts or IntegrationOptions()
    if not (math.isfinite(y) and y > 0.0):
        raise DomainError(f"y must be a positive real, got {y!r}")
    h = float(system.boundary.evaluate(y))
    start = Point(h, y)
    fwd = integrate_in_zone(system, Zone.LEFT, start, Direction.FORWARD,
                            LOWER_AXIS_ASCENDING, opts, record_stride=0)
    if fwd.terminal_event is TerminalEvent.TIME_OUT:
        raise IntegrationError(f"forward half-turn from y={y!r} timed out")
    bwd = integrate_in_zone(system, Zone.RIGHT, start, Direction.BACKWARD,
                            LOWER_AXIS_DESCENDING, opts, record_stride=0)
    if bwd.terminal_event is TerminalEvent.TIME_OUT:
        raise IntegrationError(f"backward half-turn from y={y!r} timed out")
    return fwd.terminal_point.y - bwd.terminal_point.y


def return_map(system: PWLSystem, y_in: float,
               opts: IntegrationOptions | None = None) -> ReturnMapResult:
    """One forward turn of the Poincare map on the lower section {x=0, y<0}."""
    opts = opts or IntegrationOptions()
    if not (math.isfinite(y_in) and y_in < 0.0):
        raise DomainError(f"y_in must be negative, got {y_in!r}")
    leg1 = integrate_in_zone(system, Zone.RIGHT, Point(0.0, y_in), Direction.FORWARD,
                             MANIFOLD_DESCENDING, opts, record_stride=0)
    if leg1.terminal_event is TerminalEvent.TIME_OUT:
        raise IntegrationError(f"no switching-curve crossing from y_in={y_in!r} "
                               f"within max_time={opts.max_time!r}")
    leg2 = integrate_in_zone(system, Zone.LEFT, leg1.terminal_point, Direction.FORWARD,
                             LOWER_AXIS_ASCENDING, opts, record_stride=0)
    if leg2.terminal_event is TerminalEvent.TIME_OUT:
        raise IntegrationError(f"no section return from y_in={y_in!r} "
                               f"within max_time={opts.max_time!r}")
    return ReturnMapResult(
        y_in=y_in,
        y_out=leg2.terminal_point.y,
        flight_time=leg1.terminal_time + leg2.terminal_time,
        sigma_crossings=leg1.sigma_crossings + leg2.sigma_crossings,
        section_returns=leg1.section_returns + leg2.section_returns,
    )


def upper_to_lower(system: PWLSystem, y0: float,
                   opts: IntegrationOptions | None = None) -> float:
    """Lower-section ordinate of the forward orbit through (0, y0), y0 > 0.

    Depending on the sign of h(y0) the start lies in the left zone
    directly or must first cross the switching curve from the right zone.
    """
    opts = opts or IntegrationOptions()
    if not (math.isfinite(y0) and y0 > 0.0):
        raise DomainError(f"y0 must be positive, got {y0!r}")
    p = Point(0.0, y0)
    hv = manifold_value(system, p)
    if hv > opts.event_tol:
        leg = integrate_in_zone(system, Zone.RIGHT, p, Direction.FORWARD,
                                MANIFOLD_DESCENDING, opts, record_stride=0)
        if leg.terminal_event is TerminalEvent.TIME_OUT:
            raise IntegrationError(f"no switching-curve crossing from (0, {y0!r})")
        p = leg.terminal_point
    leg = integrate_in_zone(system, Zone.LEFT, p, Direction.FORWARD,
                            LOWER_AXIS_ASCENDING, opts, record_stride=0)
    if leg.terminal_event is TerminalEvent.TIME_OUT:
        raise IntegrationError(f"no section return from (0, {y0!r})")
    return leg.terminal_point.y


def probe_eps(y_star: float, neighbors=(), frac_gap: float = 0.25,
              frac_radius: float = 0.05) -> float:
    """Perturbation size that stays between a cycle and its neighbors.

    Uses a fraction of the gap to the nearest other root (the origin
    counts as a neighbor at 0) capped by a fraction of the radius itself.
    """
    gaps = [abs(y_star - float(n)) for n in neighbors if float(n) != y_star]
    gaps.append(y_star)
    return min(frac_radius * y_star, frac_gap * min(gaps))


def _side_trend(drifts: list[float], floor: float) -> str | None:
    """'approach' or 'retreat' of |distance to the fixed radius|, else None."""
    start, end = abs(drifts[0]), abs(drifts[-1])
    steps = np.diff(np.abs(drifts))
    if end < floor:
        return "approach"
    total = end - start
    if abs(total) < floor:
        return None
    moving = steps[np.abs(steps) > 0.0]
    if moving.size == 0:
        return None
    frac = float(np.mean(np.sign(moving) == np.sign(total)))
    if frac < 0.7:
        return None
    return "approach" if total < 0.0 else "retreat"


def resolve_stability(system: PWLSystem, y_star: float,
                      eps: float | None = None, iters: int = 30,
                      opts: IntegrationOptions | None = None) -> StabilityClass:
    """Empirical stability: iterate the return map from both sides of the cycle.

    Starts orbits at the upper crossings y* -+ eps, follows the lower
    section radius over ``iters`` turns, and classifies each side by
    whether the distance to the cycle's radius shrinks or grows
    monotonically.  Ambiguous drifts (below the noise floor or
    non-monotone) give UNDETERMINED.
    """
    opts = opts or IntegrationOptions()
    if not (math.isfinite(y_star) and y_star > 0.0):
        raise DomainError(f"y_star must be positive, got {y_star!r}")
    eps = eps if eps is not None else 0.02 * y_star
    if not (0.0 < eps < y_star):
        raise DomainError(f"eps must lie in (0, y_star), got {eps!r}")
    r_star = math.exp(-system.gamma * math.pi) * y_star

    verdicts: dict[float, str | None] = {}
    for side in (-1.0, +1.0):
        y_in = upper_to_lower(system, y_star + side * eps, opts)
        drifts = [(-y_in) - r_star]
        for _ in range(iters):
            y_in = return_map(system, y_in, opts).y_out
            drifts.append((-y_in) - r_star)
        verdicts[side] = _side_trend(drifts, DRIFT_FLOOR)

    interior, exterior = verdicts[-1.0], verdicts[+1.0]
    if interior is None or exterior is None:
        return StabilityClass.UNDETERMINED
    if interior == "approach" and exterior == "approach":
        return StabilityClass.STABLE
    if interior == "retreat" and exterior == "retreat":
        return StabilityClass.UNSTABLE
    if exterior == "approach":
        return StabilityClass.SEMI_STABLE_OUTER_STABLE
    return StabilityClass.SEMI_STABLE_INNER_STABLE

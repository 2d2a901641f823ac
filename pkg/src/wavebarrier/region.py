"""Uniform streams of the physical problem and the (r, F) parameter region.

All quantities are the non-dimensional ones with mass flux and gravity
scaled to 1.  A uniform stream of depth d has total head
r(d) = 1/(2 d^2) + d and momentum flux S(d) = 1/d + d^2/2; the classical
Benjamin-Lighthill region at head r is bounded below and above by S
evaluated at the two conjugate depths, and the parabola F = r^2/2 is a
sharper lower barrier for genuinely wavy (non-laminar) solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

#: Head and flow force shared by both conjugate depths at the cusp d = 1.
CUSP_R = 1.5
CUSP_FLOW_FORCE = 1.5

#: Head where the barrier r^2/2 crosses the lower region boundary;
#: the stream there has Froude number exactly 2.
BARRIER_CROSSING_R = 3.0 * 2.0 ** (-2.0 / 3.0)

_ROOT_TOL = 1e-12


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


def head_of_depth(d: float) -> float:
    """Total head r(d) = 1/(2 d^2) + d of the uniform stream of depth d."""
    return 0.5 / (d * d) + d


def flow_force_of_depth(d: float) -> float:
    """Momentum flux S(d) = 1/d + d^2/2 of the uniform stream of depth d.

    This algebraically simplified form avoids the cancellation that the
    expanded expression 1/(2d) - d^2/2 + r d suffers at large head.
    """
    return 1.0 / d + 0.5 * d * d


def froude_of_depth(d: float) -> float:
    """Froude number d^(-3/2); supercritical iff > 1 iff d < 1."""
    return d ** -1.5


@dataclass(frozen=True)
class StreamFlow:
    """A uniform (laminar) stream of the physical problem."""

    depth: float
    bernoulli: float
    flow_force: float
    froude: float


@dataclass(frozen=True)
class ConjugateDepths:
    """The supercritical/subcritical depth pair sharing one head value."""

    r: float
    d_minus: float
    d_plus: float


class Classification(str, Enum):
    BELOW_LOWER = "below_lower"
    ON_LOWER = "on_lower"
    INTERIOR_BELOW_BARRIER = "interior_below_barrier"
    ON_BARRIER = "on_barrier"
    INTERIOR_ABOVE_BARRIER = "interior_above_barrier"
    ON_UPPER = "on_upper"
    ABOVE_UPPER = "above_upper"


@dataclass(frozen=True)
class RegionPoint:
    """A point of the (r, F) plane with its position in the region."""

    r: float
    F: float
    classification: Classification


def stream_from_depth(d: float) -> StreamFlow:
    """Uniform stream of depth ``d`` with its head, momentum flux, Froude number."""
    d = _require_finite("depth", d)
    if d <= 0.0:
        raise DomainError(f"depth must be positive, got {d}")
    return StreamFlow(
        depth=d,
        bernoulli=head_of_depth(d),
        flow_force=flow_force_of_depth(d),
        froude=froude_of_depth(d),
    )


def _depth_root(r: float, lo: float, hi: float) -> float:
    """Root of r(d) - r on (lo, hi) by bisection, polished with Newton.

    The bracket is analytically certain: r(d) - r changes sign exactly
    once on each side of the critical depth 1 when r > 3/2.
    """

    def f(d: float) -> float:
        return 0.5 / (d * d) + d - r

    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0.0:
        raise DomainError(f"no depth root bracketed in ({lo}, {hi}) for r={r}")
    a, b = lo, hi
    fa = flo
    for _ in range(80):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fa * fm <= 0.0:
            b = mid
        else:
            a, fa = mid, fm
        if b - a <= 1e-14 * max(1.0, b):
            break
    d = 0.5 * (a + b)
    for _ in range(6):
        fd = f(d)
        dfd = 1.0 - 1.0 / (d * d * d)
        if dfd == 0.0:
            break
        step = fd / dfd
        d_new = d - step
        if not (a <= d_new <= b):
            break
        d = d_new
        if abs(step) <= 1e-16 * d:
            break
    if abs(f(d)) > _ROOT_TOL * max(1.0, abs(r)):
        raise DomainError(f"conjugate depth root did not meet tolerance at r={r}")
    return d


def conjugate_depths(r: float, allow_degenerate: bool = False) -> ConjugateDepths:
    """Both depths solving 1/(2 d^2) + d = r, bracketing the critical depth 1.

    Requires r > 3/2.  At the cusp r = 3/2 the two depths coalesce at 1;
    that degenerate pair is returned only when ``allow_degenerate`` is set,
    because silently passing it on corrupts region classification.
    """
    r = _require_finite("head", r)
    if abs(r - CUSP_R) <= 1e-12:
        if allow_degenerate:
            return ConjugateDepths(r=r, d_minus=1.0, d_plus=1.0)
        raise DomainError("r = 3/2 is the cusp; pass allow_degenerate=True for the double depth")
    if r < CUSP_R:
        raise DomainError(f"no conjugate depths exist for r < 3/2, got r={r}")
    d_minus = _depth_root(r, 1e-9, 1.0)
    d_plus = _depth_root(r, 1.0, max(2.0, r))
    return ConjugateDepths(r=r, d_minus=d_minus, d_plus=d_plus)


def bl_boundaries(r: float, allow_degenerate: bool = True) -> tuple[float, float]:
    """Lower and upper Benjamin-Lighthill boundaries (F_minus, F_plus) at head r."""
    r = _require_finite("head", r)
    if r < CUSP_R - 1e-12:
        raise DomainError(f"region boundaries require r >= 3/2, got r={r}")
    if abs(r - CUSP_R) <= 1e-12:
        return (CUSP_FLOW_FORCE, CUSP_FLOW_FORCE)
    pair = conjugate_depths(r, allow_degenerate=allow_degenerate)
    return (flow_force_of_depth(pair.d_minus), flow_force_of_depth(pair.d_plus))


def barrier(r: float) -> float:
    """The lower barrier r^2/2 for non-laminar solutions."""
    r = _require_finite("head", r)
    return 0.5 * r * r


def barrier_lower_intersection() -> tuple[float, float]:
    """The single point where the barrier meets the lower boundary.

    Closed form: r* = 3 * 2^(-2/3), F* = r*^2 / 2.  The stream depth there
    is 2^(-2/3), whose Froude number is exactly 2.
    """
    r_star = BARRIER_CROSSING_R
    return (r_star, 0.5 * r_star * r_star)


def asymptotic_gap(r: float) -> float:
    """F_plus(r) - r^2/2 - 1/(2r), the remainder of the large-head expansion.

    Restricted to r >= 3 where the expansion regime applies.  Positive for
    all such r and bounded by r^(-2); the observed decay is steeper.
    """
    r = _require_finite("head", r)
    if r < 3.0:
        raise DomainError(f"asymptotic gap is defined for r >= 3, got r={r}")
    _, f_plus = bl_boundaries(r)
    return f_plus - 0.5 * r * r - 0.5 / r


def classify_point(r: float, F: float, tol: float = 1e-9) -> RegionPoint:
    """Locate (r, F) relative to the two boundaries and the barrier.

    Ties within ``tol`` (absolute) are resolved to the "on_*" labels in the
    order lower boundary, upper boundary, barrier; solver-produced inputs
    carry discretization error, which is why ties need a tolerance at all.
    """
    r = _require_finite("head", r)
    F = _require_finite("flow force", F)
    f_minus, f_plus = bl_boundaries(r)
    f_barrier = barrier(r)
    if abs(F - f_minus) <= tol:
        cls = Classification.ON_LOWER
    elif abs(F - f_plus) <= tol:
        cls = Classification.ON_UPPER
    elif abs(F - f_barrier) <= tol:
        cls = Classification.ON_BARRIER
    elif F < f_minus:
        cls = Classification.BELOW_LOWER
    elif F > f_plus:
        cls = Classification.ABOVE_UPPER
    elif F < f_barrier:
        cls = Classification.INTERIOR_BELOW_BARRIER
    else:
        cls = Classification.INTERIOR_ABOVE_BARRIER
    return RegionPoint(r=r, F=F, classification=cls)


def region_samples(r_min: float, r_max: float, samples: int):
    """Rows (r, F_minus, barrier, F_plus) on a uniform head grid.

    This is the CSV payload of the ``region`` command; formatting to
    15 significant digits happens at the I/O layer.
    """
    import numpy as np

    if not (CUSP_R - 1e-12 <= r_min < r_max):
        raise DomainError(f"need 3/2 <= r_min < r_max, got [{r_min}, {r_max}]")
    if samples < 2:
        raise DomainError("need at least 2 samples")
    rows = []
    for r in np.linspace(r_min, r_max, samples):
        f_minus, f_plus = bl_boundaries(float(r))
        rows.append((float(r), f_minus, barrier(float(r)), f_plus))
    return rows

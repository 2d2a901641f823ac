"""Partial hodograph transform between sigma-grid fields and height functions.

The transform trades the vertical coordinate for the monotone field value
(scaled flow-force function, or stream function): q = X and p = Fbar(X, Y),
with the unknown becoming the height h(q, p) of the level set {Fbar = p}
over the fixed strip 0 <= p <= 1.  Stream solutions have the closed-form
height profile H(p; d) = sqrt(2) (sqrt(C) - sqrt(C - p)) with
C = (1/d + d/2)^2 / 2, which both directions of the transform must
reproduce exactly up to interpolation error.

Column inversion interpolates along the physical height axis, where the
data is mild (for streams it is exactly quadratic, so the cubic
interpolant is exact), and extracts roots in increasing order so the
resulting height samples are strictly increasing whenever the source
column is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, StagnationError
from .flowforce import D0, SigmaField, scaled_bernoulli

#: Problem tags carried by height fields.
TAG_SCALED = "flow_force_scaled"
TAG_PSI = "irrotational_psi"

#: Vertical-gradient floor below which a column counts as stagnant.
STAGNATION_FLOOR = 1e-10


@dataclass(frozen=True)
class StreamHeight:
    """Closed-form height function H(p; d) of a scaled stream."""

    depth: float

    def __post_init__(self):
        d = self.depth
        if not math.isfinite(d) or not (0.0 < d < D0):
            raise DomainError(
                f"stream height requires depth in (0, sqrt(2)), got {d}; "
                "at the limit the surface gradient degenerates"
            )

    @property
    def C(self) -> float:
        """Integration constant (1/d + d/2)^2 / 2 of the height ODE."""
        a = 1.0 / self.depth + 0.5 * self.depth
        return 0.5 * a * a

    def H(self, p):
        p = np.asarray(p, dtype=float)
        C = self.C
        return math.sqrt(2.0) * (math.sqrt(C) - np.sqrt(C - p))

    def H_p(self, p):
        p = np.asarray(p, dtype=float)
        return 1.0 / np.sqrt(2.0 * (self.C - p))

    def H_pp(self, p):
        return self.H_p(p) ** 3

    @property
    def head(self) -> float:
        """1/(2 H_p(1)) + d, which equals the scaled stream head R(d)."""
        return float(0.5 / self.H_p(1.0) + self.depth)


def stream_height(d: float) -> StreamHeight:
    """Height function of the scaled stream of depth d, with its constants."""
    sh = StreamHeight(depth=float(d))
    # Cross-check the boundary identities once at construction.
    if abs(float(sh.H(0.0))) > 1e-12 or abs(float(sh.H(1.0)) - sh.depth) > 1e-12:
        raise DomainError(f"height closed form failed its endpoint identities at d={d}")
    if abs(sh.head - scaled_bernoulli(sh.depth)) > 1e-12:
        raise DomainError(f"height closed form disagrees with the stream head at d={d}")
    return sh


@dataclass(frozen=True)
class HeightField:
    """Height samples h(q, p) on one period of the strip, p in [0, 1].

    ``problem`` tags which formulation the field belongs to
    (``flow_force_scaled`` or ``irrotational_psi``); ``head`` is the
    corresponding constant (R or r).
    """

    q: np.ndarray
    p: np.ndarray
    h: np.ndarray
    problem: str
    head: float
    period: float

    def __post_init__(self):
        if self.problem not in (TAG_SCALED, TAG_PSI):
            raise DomainError(f"unknown problem tag {self.problem!r}")
        if self.h.shape != (self.q.size, self.p.size):
            raise DomainError(
                f"h shape {self.h.shape} does not match grid ({self.q.size}, {self.p.size})"
            )
        if not np.all(np.isfinite(self.h)):
            raise DomainError("height field contains non-finite samples")

    @property
    def zeta(self) -> np.ndarray:
        """Surface profile h(q, 1)."""
        return self.h[:, -1]

    @property
    def dq(self) -> float:
        return self.period / self.q.size

    @property
    def dp(self) -> float:
        return 1.0 / (self.p.size - 1)

    @property
    def n_p(self) -> int:
        return self.p.size - 1

    def hp_min(self) -> float:
        """Smallest vertical gradient over interior and boundary stencils."""
        h, dp = self.h, self.dp
        interior = (h[:, 2:] - h[:, :-2]) / (2.0 * dp)
        bottom = (-3.0 * h[:, 0] + 4.0 * h[:, 1] - h[:, 2]) / (2.0 * dp)
        top = (3.0 * h[:, -1] - 4.0 * h[:, -2] + h[:, -3]) / (2.0 * dp)
        return float(min(interior.min(), bottom.min(), top.min()))

    def amplitude(self) -> float:
        """(max zeta - min zeta) / 2 over grid nodes."""
        z = self.zeta
        return 0.5 * float(z.max() - z.min())


def _increasing_roots(spline: CubicSpline, targets: np.ndarray,
                      lo: float, hi: float) -> np.ndarray:
    """Roots of spline(Y) = t for ascending targets, forced increasing.

    Each root is bracketed below by its predecessor, so the output is
    strictly increasing whenever the data is, even if the interpolant
    wiggles within one interval.
    """
    out = np.empty(targets.size)
    cursor = lo
    span = hi - lo
    for idx, t in enumerate(targets):
        roots = spline.solve(t, extrapolate=False)
        roots = roots[(roots >= cursor - 1e-12 * span) & (roots <= hi + 1e-12 * span)]
        if roots.size == 0:
            # Interpolant dipped below an already-passed level; fall back to
            # the secant bracket between the nearest data ordinates.
            from scipy.optimize import brentq

            root = brentq(lambda y, tt=t: float(spline(y)) - tt, cursor, hi)
        else:
            root = float(roots.min())
        out[idx] = root
        cursor = root
    return out


def _check_column_monotone(column_values: np.ndarray, heights: np.ndarray,
                           column: int):
    dv = np.diff(column_values)
    dy = np.diff(heights)
    if np.any(dv <= STAGNATION_FLOOR * np.maximum(dy, 1e-300)):
        raise StagnationError(
            f"column {column}: vertical gradient at or below {STAGNATION_FLOOR}; "
            "the hodograph transform is undefined at stagnation",
            column=column,
        )


def dj_forward(scaled: SigmaField, n_p: int | None = None, problem: str = TAG_SCALED) -> HeightField:
    """Height function h(q, p) from a sigma-grid field with positive vertical gradient.

    Per column, a cubic interpolant of the samples over physical height is
    solved for each p level; bottom and surface rows are set exactly from
    the boundary data.
    """
    if n_p is None:
        n_p = scaled.sigma.size - 1
    p = np.linspace(0.0, 1.0, n_p + 1)
    n_q = scaled.x.size
    h = np.empty((n_q, n_p + 1))
    for i in range(n_q):
        Y = scaled.sigma * scaled.surface[i]
        vals = scaled.values[i]
        _check_column_monotone(vals, Y, i)
        spline = CubicSpline(Y, vals)
        h[i, 0] = 0.0
        h[i, -1] = scaled.surface[i]
        h[i, 1:-1] = _increasing_roots(spline, p[1:-1], 0.0, scaled.surface[i])
    return HeightField(
        q=scaled.x.copy(), p=p, h=h, problem=problem,
        head=scaled.head, period=scaled.period,
    )


def dj_inverse(field: HeightField, n_sigma: int | None = None) -> SigmaField:
    """Reconstruct the sigma-grid field whose level heights are ``field``.

    Per column, the level value is interpolated as a function of physical
    height (exact for streams, where that function is quadratic) and
    evaluated on the sigma grid below the surface zeta(q) = h(q, 1).
    """
    if n_sigma is None:
        n_sigma = field.p.size
    sigma = np.linspace(0.0, 1.0, n_sigma)
    n_q = field.q.size
    values = np.empty((n_q, n_sigma))
    zeta = field.zeta.copy()
    for i in range(n_q):
        heights = field.h[i]
        dh = np.diff(heights)
        if np.any(dh <= STAGNATION_FLOOR):
            raise StagnationError(
                f"column {i}: height samples are not strictly increasing "
                "(h_p <= 0); stagnation", column=i,
            )
        spline = CubicSpline(heights, field.p)
        values[i] = spline(sigma * zeta[i])
        values[i, 0] = 0.0
        values[i, -1] = 1.0
    return SigmaField(
        x=field.q.copy(), sigma=sigma, values=values, surface=zeta,
        head=field.head, period=field.period,
    )

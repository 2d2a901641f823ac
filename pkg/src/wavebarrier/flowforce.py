"""Flow-force integrals on gridded stream-function fields and the unit-flux rescaling.

Fields live on a surface-fitted grid: the vertical coordinate is
sigma = y / eta(x) with sigma uniform on [0, 1], so the free surface is a
grid line.  Physical derivatives are recovered by the chain rule through
that mapping.  The flow-force function F(x, y) is the running integral of
the momentum-flux density from the bottom; its surface value is the flow
force constant, and dividing by it rescales the problem to unit flux.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InconsistentFieldError

#: Largest depth of a unidirectional scaled stream.
D0 = math.sqrt(2.0)
#: Scaled head of the limiting stream, R(D0).
R0 = math.sqrt(2.0)
#: Depth minimizing the scaled head.
DC = math.sqrt(2.0 / 3.0)
#: Global minimum of the scaled head, R(DC).
RC = math.sqrt(1.5)


@dataclass(frozen=True)
class CriticalConstants:
    d0: float = D0
    R0: float = R0
    d_c: float = DC
    R_c: float = RC


def scaled_bernoulli(d: float, allow_beyond_limit: bool = False) -> float:
    """Scaled head R(d) = 1/(2d) + 3d/4 of the scaled stream of depth d.

    Unidirectional streams require 0 < d < sqrt(2); evaluation beyond that
    limit is permitted only with ``allow_beyond_limit``.
    """
    d = float(d)
    if not math.isfinite(d) or d <= 0.0:
        raise DomainError(f"scaled depth must be positive and finite, got {d!r}")
    if d >= D0 and not allow_beyond_limit:
        raise DomainError(
            f"scaled stream of depth {d} is not unidirectional (limit sqrt(2)); "
            "pass allow_beyond_limit=True to evaluate anyway"
        )
    return 0.5 / d + 0.75 * d


def scaled_conjugate_depths(R: float, allow_degenerate: bool = False) -> tuple[float, float]:
    """The two scaled depths solving R(d) = R, i.e. 3d^2 - 4Rd + 2 = 0.

    Defined for R strictly inside (R_c, R0).  With ``allow_degenerate`` the
    endpoints are admitted too: R = R_c returns the double root d_c and
    R = R0 returns (sqrt(2)/3, sqrt(2)).
    """
    R = float(R)
    if not math.isfinite(R):
        raise DomainError(f"scaled head must be finite, got {R!r}")
    lo_ok = R > RC + 1e-15 or (allow_degenerate and R >= RC - 1e-15)
    hi_ok = R < R0 - 1e-15 or (allow_degenerate and R <= R0 + 1e-15)
    if not (lo_ok and hi_ok):
        raise DomainError(
            f"scaled head {R} outside ({RC}, {R0}); "
            "endpoints require allow_degenerate=True"
        )
    disc = max(4.0 * R * R - 6.0, 0.0)
    root = math.sqrt(disc)
    d_plus = (2.0 * R + root) / 3.0
    d_minus = 2.0 / (3.0 * d_plus)
    return (d_minus, d_plus)


@dataclass(frozen=True)
class ScaledStream:
    """Laminar solution of the unit-flux problem: U(Y; d), zeta = d."""

    depth: float

    def __post_init__(self):
        d = self.depth
        if not (0.0 < d < D0) or not math.isfinite(d):
            raise DomainError(f"scaled stream depth must lie in (0, sqrt(2)), got {d}")

    @property
    def head(self) -> float:
        return scaled_bernoulli(self.depth)

    def profile(self, Y):
        """U(Y; d) = -Y^2/2 + (1/d + d/2) Y."""
        Y = np.asarray(Y, dtype=float)
        a = 1.0 / self.depth + 0.5 * self.depth
        return -0.5 * Y * Y + a * Y

    def profile_gradient(self, Y):
        Y = np.asarray(Y, dtype=float)
        return -Y + 1.0 / self.depth + 0.5 * self.depth

    def field(self, n_x: int = 64, n_sigma: int = 129, period: float = 2.0 * math.pi) -> "SigmaField":
        """Sample the stream on a sigma grid, as dj_forward input."""
        x = np.linspace(0.0, period, n_x, endpoint=False)
        sigma = np.linspace(0.0, 1.0, n_sigma)
        Y = sigma * self.depth
        values = np.tile(self.profile(Y), (n_x, 1))
        surface = np.full(n_x, self.depth)
        return SigmaField(
            x=x, sigma=sigma, values=values, surface=surface,
            head=self.head, period=period,
        )


@dataclass(frozen=True)
class WaveField:
    """Stream-function samples psi on the sigma grid over one period.

    ``psi`` has shape (n_x, n_sigma); row i is the column above x[i],
    sampled at y = sigma * eta[i].  ``r`` is the total head.
    """

    x: np.ndarray
    sigma: np.ndarray
    psi: np.ndarray
    eta: np.ndarray
    r: float
    period: float

    def __post_init__(self):
        if self.psi.shape != (self.x.size, self.sigma.size):
            raise DomainError(
                f"psi shape {self.psi.shape} does not match grid "
                f"({self.x.size}, {self.sigma.size})"
            )
        if self.eta.shape != self.x.shape:
            raise DomainError("eta must have one value per x node")
        if not np.all(np.isfinite(self.psi)) or not np.all(np.isfinite(self.eta)):
            raise DomainError("field contains non-finite samples")
        if np.any(self.eta <= 0.0):
            raise DomainError("surface elevation must stay positive")

    @property
    def dx(self) -> float:
        return self.period / self.x.size

    @property
    def dsigma(self) -> float:
        return 1.0 / (self.sigma.size - 1)

    @classmethod
    def uniform_stream(cls, d: float, n_x: int = 64, n_sigma: int = 129,
                       period: float = 2.0 * math.pi) -> "WaveField":
        """The exact laminar field psi = y/d with flat surface eta = d."""
        if d <= 0.0 or not math.isfinite(d):
            raise DomainError(f"depth must be positive, got {d}")
        x = np.linspace(0.0, period, n_x, endpoint=False)
        sigma = np.linspace(0.0, 1.0, n_sigma)
        psi = np.tile(sigma, (n_x, 1))
        eta = np.full(n_x, float(d))
        r = 0.5 / (d * d) + d
        return cls(x=x, sigma=sigma, psi=psi, eta=eta, r=r, period=period)


@dataclass(frozen=True)
class FlowForceField:
    """A WaveField together with its flow-force function samples."""

    field: WaveField
    F: np.ndarray
    FF: float


@dataclass(frozen=True)
class SigmaField:
    """Samples of the hodograph vertical coordinate on the sigma grid.

    ``values`` holds the scaled flow-force function for the unit-flux
    problem, or the stream function for the irrotational one; either way
    the samples run from 0 at the bottom to 1 at ``surface``.
    """

    x: np.ndarray
    sigma: np.ndarray
    values: np.ndarray
    surface: np.ndarray
    head: float
    period: float

    @property
    def dx(self) -> float:
        return self.period / self.x.size

    @property
    def dsigma(self) -> float:
        return 1.0 / (self.sigma.size - 1)


def _d_dsigma(g: np.ndarray, ds: float) -> np.ndarray:
    """Second-order sigma derivative along axis 1, one-sided at the ends."""
    out = np.empty_like(g)
    out[:, 1:-1] = (g[:, 2:] - g[:, :-2]) / (2.0 * ds)
    out[:, 0] = (-3.0 * g[:, 0] + 4.0 * g[:, 1] - g[:, 2]) / (2.0 * ds)
    out[:, -1] = (3.0 * g[:, -1] - 4.0 * g[:, -2] + g[:, -3]) / (2.0 * ds)
    return out


def _d_dx_periodic(g: np.ndarray, dx: float) -> np.ndarray:
    """Central x-derivative along axis 0 with periodic wrap."""
    return (np.roll(g, -1, axis=0) - np.roll(g, 1, axis=0)) / (2.0 * dx)


def grid_derivatives(values: np.ndarray, eta: np.ndarray, sigma: np.ndarray,
                     dx: float, ds: float) -> tuple[np.ndarray, np.ndarray]:
    """Physical (d/dx, d/dy) of sigma-grid samples via the chain rule.

    y = sigma * eta(x), so d/dy = (1/eta) d/dsigma and the x-derivative at
    fixed y picks up -sigma * eta'/eta times the sigma derivative.
    """
    g_s = _d_dsigma(values, ds)
    g_x = _d_dx_periodic(values, dx)
    eta_x = (np.roll(eta, -1) - np.roll(eta, 1)) / (2.0 * dx)
    col = eta[:, None]
    d_dy = g_s / col
    d_dx = g_x - sigma[None, :] * (eta_x[:, None] / col) * g_s
    return d_dx, d_dy


def psi_derivatives(field: WaveField) -> tuple[np.ndarray, np.ndarray]:
    return grid_derivatives(field.psi, field.eta, field.sigma, field.dx, field.dsigma)


def _cumulative_quadratic(values: np.ndarray, dx: float) -> np.ndarray:
    """Cumulative integral along axis 1 by sliding three-point quadratics.

    Each step integrates the parabola through the three nearest samples,
    so the rule reproduces quadratic integrands exactly and the final
    entry serves as the composite quadrature of the whole column.
    """
    n = values.shape[1]
    if n < 3:
        raise DomainError("quadrature needs at least 3 vertical samples")
    out = np.empty_like(values)
    out[:, 0] = 0.0
    f0, f1, f2 = values[:, 0], values[:, 1], values[:, 2]
    out[:, 1] = out[:, 0] + dx * (5.0 * f0 + 8.0 * f1 - f2) / 12.0
    fa = values[:, :-2]
    fb = values[:, 1:-1]
    fc = values[:, 2:]
    steps = dx * (-fa + 8.0 * fb + 5.0 * fc) / 12.0
    out[:, 2:] = out[:, 1][:, None] + np.cumsum(steps, axis=1)
    return out


def _flow_force_integrand(field: WaveField) -> np.ndarray:
    psi_x, psi_y = psi_derivatives(field)
    y = field.sigma[None, :] * field.eta[:, None]
    return 0.5 * (psi_y**2 - psi_x**2) - y + field.r


def flow_force_profile(field: WaveField) -> np.ndarray:
    """Per-column flow force values; constant in x for genuine solutions."""
    integrand = _flow_force_integrand(field)
    cum = _cumulative_quadratic(integrand, field.dsigma)
    return field.eta * cum[:, -1]


def flow_force(field: WaveField, quad_tol: float = 1e-8) -> float:
    """The flow force constant, from per-column quadrature.

    Columns must agree to within 100x ``quad_tol``; a larger spread means
    the input is not a solution and raises ``InconsistentFieldError``.
    """
    per_column = flow_force_profile(field)
    spread = float(per_column.max() - per_column.min())
    if spread > 100.0 * quad_tol:
        raise InconsistentFieldError(
            f"per-column flow force spread {spread:.3e} exceeds "
            f"{100.0 * quad_tol:.3e}; field is not a solution"
        )
    return float(per_column.mean())


def flow_force_function(field: WaveField, quad_tol: float = 1e-8) -> FlowForceField:
    """Cumulative flow-force function F(x, y) on the sigma grid."""
    integrand = _flow_force_integrand(field)
    cum = field.eta[:, None] * _cumulative_quadratic(integrand, field.dsigma)
    per_column = cum[:, -1]
    spread = float(per_column.max() - per_column.min())
    if spread > 100.0 * quad_tol:
        raise InconsistentFieldError(
            f"per-column flow force spread {spread:.3e} exceeds "
            f"{100.0 * quad_tol:.3e}; field is not a solution"
        )
    return FlowForceField(field=field, F=cum, FF=float(per_column.mean()))


def superharmonic_check(field: WaveField) -> float:
    """max over the grid of Phi - r with Phi = |grad psi|^2 / 2 + y.

    Genuine solutions keep Phi <= r everywhere with equality on the
    surface, so anything meaningfully positive flags an invalid field.
    """
    psi_x, psi_y = psi_derivatives(field)
    y = field.sigma[None, :] * field.eta[:, None]
    phi = 0.5 * (psi_x**2 + psi_y**2) + y
    return float((phi - field.r).max())


def rescale(fff: FlowForceField) -> SigmaField:
    """Rescale to unit flux: X = x/sqrt(FF), zeta = eta/sqrt(FF), Fbar = F/FF.

    Each column is normalized by its own surface value so the boundary
    values 0 and 1 hold exactly by construction; the scaled head is
    R = r / sqrt(FF).
    """
    if fff.FF <= 0.0:
        raise DomainError(f"flow force must be positive to rescale, got {fff.FF}")
    scale = math.sqrt(fff.FF)
    field = fff.field
    values = fff.F / fff.F[:, -1][:, None]
    return SigmaField(
        x=field.x / scale,
        sigma=field.sigma,
        values=values,
        surface=field.eta / scale,
        head=field.r / scale,
        period=field.period / scale,
    )


def poisson_defect(scaled: SigmaField) -> float:
    """max |Laplacian(Fbar) + 1| over interior nodes of a scaled field.

    The scaled flow-force function satisfies the unit-source Poisson
    equation; the defect measures how far the samples are from that.
    """
    g = scaled.values
    zeta = scaled.surface
    sigma = scaled.sigma
    dx, ds = scaled.dx, scaled.dsigma

    g_s = _d_dsigma(g, ds)
    g_ss = np.empty_like(g)
    g_ss[:, 1:-1] = (g[:, 2:] - 2.0 * g[:, 1:-1] + g[:, :-2]) / (ds * ds)
    g_ss[:, 0] = g_ss[:, 1]
    g_ss[:, -1] = g_ss[:, -2]
    g_x = _d_dx_periodic(g, dx)
    g_xx = (np.roll(g, -1, axis=0) - 2.0 * g + np.roll(g, 1, axis=0)) / (dx * dx)
    g_sx = _d_dx_periodic(g_s, dx)

    zeta_x = (np.roll(zeta, -1) - np.roll(zeta, 1)) / (2.0 * dx)
    c = (zeta_x / zeta)[:, None]
    zeta_xx = (np.roll(zeta, -1) - 2.0 * zeta + np.roll(zeta, 1)) / (dx * dx)
    c_x = (zeta_xx / zeta - (zeta_x / zeta) ** 2)[:, None]
    s = sigma[None, :]

    lap = (
        g_xx
        - 2.0 * s * c * g_sx
        - s * (c_x - c * c) * g_s
        + (s * c) ** 2 * g_ss
        + g_ss / (zeta[:, None] ** 2)
    )
    return float(np.abs(lap[:, 1:-1] + 1.0).max())

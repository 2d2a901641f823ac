"""Newton/continuation solver for the quasilinear strip systems.

Two instances of the same discrete machinery are admitted: the scaled
flow-force formulation (interior source 1, surface exponent 1) and the
classical irrotational stream-function formulation (source 0, exponent 2).
Either way the unknown is the height h(q, p) on one period of the strip,
discretized with second-order central differences (one-sided at the
surface), and nontrivial waves are reached by bifurcation from the
laminar stream followed by pseudo-arclength continuation in (h, head).

Wave solutions are computed on the symmetric half period: the residual is
even under q -> -q, so folding the grid pins the translation phase and
keeps the Newton matrices comfortably nonsingular along the branch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.integrate import simpson
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from . import kernels
from .errors import (
    ConvergenceError,
    DomainError,
    InconsistentFieldError,
    SingularJacobianError,
    StagnationError,
)
from .flowforce import D0, scaled_bernoulli
from .hodograph import TAG_PSI, TAG_SCALED, HeightField, StreamHeight
from .region import head_of_depth

#: Vertical-gradient floor rejected during Newton line searches.
HP_FLOOR = 1e-8
#: Branch truncation threshold on min h_p (near-stagnation flag).
HP_BRANCH_FLOOR = 1e-3


class Instance(Enum):
    """Admitted (interior source, surface exponent) pairs."""

    FLOW_FORCE_SCALED = (TAG_SCALED, 1, 1)
    IRROTATIONAL_PSI = (TAG_PSI, 0, 2)

    @property
    def tag(self) -> str:
        return self.value[0]

    @property
    def interior_source(self) -> int:
        return self.value[1]

    @property
    def boundary_exponent(self) -> int:
        return self.value[2]

    def validate_depth(self, d: float) -> float:
        d = float(d)
        if not math.isfinite(d) or d <= 0.0:
            raise DomainError(f"stream depth must be positive, got {d!r}")
        if self is Instance.FLOW_FORCE_SCALED and d >= D0:
            raise DomainError(
                f"scaled streams are unidirectional only for d < sqrt(2), got {d}"
            )
        return d

    def stream_head(self, d: float) -> float:
        d = self.validate_depth(d)
        if self is Instance.FLOW_FORCE_SCALED:
            return scaled_bernoulli(d)
        return head_of_depth(d)

    def stream_profile(self, p: np.ndarray, d: float) -> np.ndarray:
        d = self.validate_depth(d)
        if self is Instance.FLOW_FORCE_SCALED:
            return StreamHeight(d).H(p)
        return np.asarray(p, dtype=float) * d

    def stream_gradient(self, p: np.ndarray, d: float) -> np.ndarray:
        d = self.validate_depth(d)
        if self is Instance.FLOW_FORCE_SCALED:
            return StreamHeight(d).H_p(p)
        return np.full_like(np.asarray(p, dtype=float), d)


def instance_from_tag(tag: str) -> Instance:
    for inst in Instance:
        if inst.tag == tag:
            return inst
    raise DomainError(f"unknown problem tag {tag!r}")


@dataclass(frozen=True)
class DJProblem:
    """One strip problem: instance, head constant, and period."""

    instance: Instance
    head: float
    period: float

    def __post_init__(self):
        if not isinstance(self.instance, Instance):
            raise DomainError("instance must be one of the two admitted formulations")
        if not math.isfinite(self.head):
            raise DomainError(f"head must be finite, got {self.head!r}")
        if not (math.isfinite(self.period) and self.period > 0.0):
            raise DomainError(f"period must be positive, got {self.period!r}")

    @classmethod
    def flow_force_scaled(cls, head: float, period: float) -> "DJProblem":
        return cls(Instance.FLOW_FORCE_SCALED, head, period)

    @classmethod
    def irrotational(cls, head: float, period: float) -> "DJProblem":
        return cls(Instance.IRROTATIONAL_PSI, head, period)

    @property
    def tag(self) -> str:
        return self.instance.tag

    def with_head(self, head: float) -> "DJProblem":
        return DJProblem(self.instance, head, self.period)


@dataclass(frozen=True)
class WaveSolution:
    """A converged solution with its diagnostics."""

    field: HeightField
    head: float
    amplitude: float
    residual_norm: float
    flow_force: float | None
    iterations: int
    min_hp: float
    history: tuple


@dataclass(frozen=True)
class Branch:
    """An amplitude-ordered family of solutions from one bifurcation point.

    ``stream_head`` is the analytic head of the bifurcating stream;
    ``bifurcation_head`` is the zero-amplitude head of this grid's own
    branch (Richardson-extrapolated from the two smallest-amplitude
    solves), which the first point approaches quadratically.  The two
    differ by the discretization bias, which vanishes at second order.
    """

    points: tuple[WaveSolution, ...]
    depth: float
    wavenumber: float
    instance: str
    stream_head: float
    bifurcation_head: float
    history: tuple
    truncation: str


def _as_instance(prob) -> Instance:
    if isinstance(prob, DJProblem):
        return prob.instance
    if isinstance(prob, Instance):
        return prob
    if isinstance(prob, str):
        return instance_from_tag(prob)
    raise DomainError(f"cannot interpret {prob!r} as a problem instance")


def _check_admissible(h: np.ndarray, dp: float):
    if not np.all(np.isfinite(h)):
        raise DomainError("height field contains non-finite entries")
    if _min_hp(h, dp) <= 0.0:
        raise StagnationError("h_p <= 0 somewhere; the height system is undefined")


def _min_hp(h: np.ndarray, dp: float) -> float:
    interior = (h[:, 2:] - h[:, :-2]) / (2.0 * dp)
    bottom = (-3.0 * h[:, 0] + 4.0 * h[:, 1] - h[:, 2]) / (2.0 * dp)
    top = (3.0 * h[:, -1] - 4.0 * h[:, -2] + h[:, -3]) / (2.0 * dp)
    return float(min(interior.min(), bottom.min(), top.min()))


def residual(field: HeightField, prob: DJProblem) -> np.ndarray:
    """Per-node residual of the discrete system; shape (n_q, n_p + 1)."""
    if field.problem != prob.tag:
        raise DomainError(
            f"field is tagged {field.problem!r} but the problem is {prob.tag!r}"
        )
    h = np.ascontiguousarray(field.h, dtype=float)
    _check_admissible(h, field.dp)
    return kernels.residual_field(
        h, field.dq, field.dp,
        prob.instance.interior_source, prob.instance.boundary_exponent, prob.head,
    )


def residual_norm(field: HeightField, prob: DJProblem) -> float:
    """Root-mean-square of the per-node residual."""
    r = residual(field, prob)
    return float(np.sqrt(np.mean(r * r)))


def jacobian(field: HeightField, prob: DJProblem) -> sp.csr_matrix:
    """Assembled sparse Jacobian of the full periodic system."""
    h = np.ascontiguousarray(field.h, dtype=float)
    _check_admissible(h, field.dp)
    n_q, npp = h.shape
    vals = kernels.jacobian_values(
        h, field.dq, field.dp,
        prob.instance.interior_source, prob.instance.boundary_exponent,
    )
    rows, cols = kernels.jacobian_structure(n_q, npp - 1)
    n = n_q * npp
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def stream_field(instance, d: float, n_q: int = 64, n_p: int = 32,
                 period: float = 2.0 * math.pi) -> HeightField:
    """Stream height samples as a HeightField (exact laminar solution)."""
    inst = _as_instance(instance)
    d = inst.validate_depth(d)
    q = np.linspace(0.0, period, n_q, endpoint=False)
    p = np.linspace(0.0, 1.0, n_p + 1)
    h = np.tile(inst.stream_profile(p, d), (n_q, 1))
    return HeightField(q=q, p=p, h=h, problem=inst.tag,
                       head=inst.stream_head(d), period=period)


# ---------------------------------------------------------------------------
# Linearization about the stream: shooting for the bifurcation wavenumber.


def _gradient_squared_coeff(inst: Instance, d: float):
    """p -> h_p(p; d)^2 of the stream, as a plain-float callable."""
    if inst is Instance.FLOW_FORCE_SCALED:
        C = StreamHeight(d).C
        return lambda p: 1.0 / (2.0 * (C - p))
    dd = d * d
    return lambda p: dd


def _shoot(inst: Instance, d: float, k: float) -> tuple[float, float]:
    """Integrate the stream linearization phi'' = 3*beta*b^2 phi' + k^2 b^2 phi.

    Starts from phi(0) = 0, phi'(0) = 1; fixed-step RK4 with periodic
    renormalization so large k cannot overflow.  Returns (phi(1), phi'(1))
    up to one common positive factor.
    """
    beta = float(inst.interior_source)
    bsq = _gradient_squared_coeff(inst, d)
    n_steps = max(256, int(16.0 * k))
    hstep = 1.0 / n_steps
    phi, dphi = 0.0, 1.0
    k2 = k * k

    def rhs(p, y0, y1):
        b2 = bsq(p)
        return y1, 3.0 * beta * b2 * y1 + k2 * b2 * y0

    p = 0.0
    for step in range(n_steps):
        a1, b1 = rhs(p, phi, dphi)
        a2, b2 = rhs(p + 0.5 * hstep, phi + 0.5 * hstep * a1, dphi + 0.5 * hstep * b1)
        a3, b3 = rhs(p + 0.5 * hstep, phi + 0.5 * hstep * a2, dphi + 0.5 * hstep * b2)
        a4, b4 = rhs(p + hstep, phi + hstep * a3, dphi + hstep * b3)
        phi += hstep * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
        dphi += hstep * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
        p += hstep
        if step % 32 == 31:
            scale = max(abs(phi), abs(dphi))
            if scale > 1e100:
                phi /= scale
                dphi /= scale
    return phi, dphi


def _surface_defect(inst: Instance, d: float, k: float) -> float:
    """Linearized surface condition at p = 1; zero at bifurcation wavenumbers.

    Strictly decreasing in k, so its first sign change is the only one.
    """
    phi, dphi = _shoot(inst, d, k)
    hp1 = float(inst.stream_gradient(np.array(1.0), d))
    m = inst.boundary_exponent
    c = m / (2.0 * hp1 ** (m + 1))
    return phi - c * dphi


def bifurcation_wavenumber(d: float, prob, k_min: float = 1e-3,
                           k_cap: float = 1e5) -> float | None:
    """Smallest wavenumber where the stream linearization is singular.

    Returns None when no positive root exists (already decided by the sign
    of the surface defect at ``k_min``, since the defect decreases in k).
    """
    inst = _as_instance(prob)
    d = inst.validate_depth(d)
    if _surface_defect(inst, d, k_min) <= 0.0:
        return None
    k_lo, k_hi = k_min, 2.0 * k_min
    while _surface_defect(inst, d, k_hi) > 0.0:
        k_lo = k_hi
        k_hi *= 2.0
        if k_hi > k_cap:
            raise ConvergenceError(
                f"no sign change of the surface defect below k = {k_cap}"
            )
    return float(brentq(lambda k: _surface_defect(inst, d, k), k_lo, k_hi,
                        xtol=1e-12, rtol=1e-12))


def _null_profile(inst: Instance, d: float, k: float, p: np.ndarray) -> np.ndarray:
    """Shooting eigenfunction sampled on the p grid, normalized to 1 at the surface."""
    beta = float(inst.interior_source)
    bsq = _gradient_squared_coeff(inst, d)
    n_p = p.size - 1
    sub = max(1, int(math.ceil(512.0 / n_p)), int(math.ceil(16.0 * k / n_p)))
    hstep = (p[1] - p[0]) / sub
    k2 = k * k

    def rhs(pp, y0, y1):
        b2 = bsq(pp)
        return y1, 3.0 * beta * b2 * y1 + k2 * b2 * y0

    phi = np.empty(p.size)
    phi[0] = 0.0
    y0, y1 = 0.0, 1.0
    pp = 0.0
    for j in range(n_p):
        for _ in range(sub):
            a1, b1 = rhs(pp, y0, y1)
            a2, b2 = rhs(pp + 0.5 * hstep, y0 + 0.5 * hstep * a1, y1 + 0.5 * hstep * b1)
            a3, b3 = rhs(pp + 0.5 * hstep, y0 + 0.5 * hstep * a2, y1 + 0.5 * hstep * b2)
            a4, b4 = rhs(pp + hstep, y0 + hstep * a3, y1 + hstep * b3)
            y0 += hstep * (a1 + 2.0 * a2 + 2.0 * a3 + a4) / 6.0
            y1 += hstep * (b1 + 2.0 * b2 + 2.0 * b3 + b4) / 6.0
            pp += hstep
        phi[j + 1] = y0
    return phi / phi[-1]


def small_amplitude_guess(d: float, k: float, eps: float, instance,
                          n_q: int = 64, n_p: int = 32,
                          check_wavenumber: bool = True) -> HeightField:
    """Stream plus eps * phi(p) cos(k q) on one period 2*pi/k.

    ``phi`` is the shooting null profile with phi(1) = 1, so the guessed
    surface is d + eps*cos(kq) to first order.  A diagnostic warning is
    emitted when k is not close to a bifurcation wavenumber of the stream.
    """
    inst = _as_instance(instance)
    d = inst.validate_depth(d)
    if not (0.0 <= eps <= 0.05):
        raise DomainError(f"guess amplitude must lie in [0, 0.05], got {eps}")
    if k <= 0.0 or not math.isfinite(k):
        raise DomainError(f"wavenumber must be positive, got {k!r}")
    if check_wavenumber:
        k_star = bifurcation_wavenumber(d, inst)
        if k_star is None or abs(k - k_star) > 0.05 * k_star:
            warnings.warn(
                f"k={k} is not near a bifurcation wavenumber of the stream "
                f"(found {k_star}); the guess will not be near-null",
                stacklevel=2,
            )
    period = 2.0 * math.pi / k
    q = np.linspace(0.0, period, n_q, endpoint=False)
    p = np.linspace(0.0, 1.0, n_p + 1)
    h = np.tile(inst.stream_profile(p, d), (n_q, 1))
    if eps > 0.0:
        phi = _null_profile(inst, d, k, p)
        h = h + eps * np.cos(k * q)[:, None] * phi[None, :]
    return HeightField(q=q, p=p, h=h, problem=inst.tag,
                       head=inst.stream_head(d), period=period)


# ---------------------------------------------------------------------------
# Newton iteration (optionally bordered by one constraint equation).


class _Reduction:
    """Half-period symmetry folding for even n_q grids."""

    def __init__(self, n_q: int, n_p: int):
        if n_q % 2 != 0 or n_q < 4:
            raise DomainError("symmetric solves need an even n_q >= 4")
        self.n_q = n_q
        self.n_p = n_p
        self.M = n_q // 2
        npp = n_p + 1
        i = np.arange(n_q)
        fold = np.minimum(i, n_q - i)
        self.expand_rows = fold  # h[i] = u[fold[i]]
        rows, cols = kernels.jacobian_structure(n_q, n_p)
        keep = (rows // npp) <= self.M
        self.keep = keep
        self.red_rows = (rows[keep] // npp) * npp + rows[keep] % npp
        self.red_cols = fold[cols[keep] // npp] * npp + cols[keep] % npp
        self.n_red = (self.M + 1) * npp

    def expand(self, u: np.ndarray) -> np.ndarray:
        return u[self.expand_rows]

    def reduce_field(self, h: np.ndarray) -> np.ndarray:
        return h[: self.M + 1].copy()

    def matrix(self, vals: np.ndarray) -> sp.csc_matrix:
        return sp.coo_matrix(
            (vals[self.keep], (self.red_rows, self.red_cols)),
            shape=(self.n_red, self.n_red),
        ).tocsc()


def _full_matrix(vals: np.ndarray, n_q: int, n_p: int) -> sp.csc_matrix:
    rows, cols = kernels.jacobian_structure(n_q, n_p)
    n = n_q * (n_p + 1)
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsc()


def _dhead_column(n_rows: int, n_p: int) -> np.ndarray:
    """d(residual)/d(head): -1 on surface equations, 0 elsewhere."""
    col = np.zeros(n_rows)
    col[n_p::n_p + 1] = -1.0
    return col


def _newton_driver(h0: np.ndarray, prob: DJProblem, *, constraint, symmetric: bool,
                   tol: float, max_iter: int):
    """Shared Newton loop on raw arrays.

    ``constraint`` is None (fixed head), ("amplitude", target) or
    ("arclength", t_u, t_head, u_prev, head_prev, ds); with a constraint the
    head joins the unknowns through a bordered linear system.
    """
    n_q, npp = h0.shape
    n_p = npp - 1
    dq = prob.period / n_q
    dp = 1.0 / n_p
    beta = prob.instance.interior_source
    m = prob.instance.boundary_exponent

    red = _Reduction(n_q, n_p) if symmetric else None
    if red is not None:
        u = red.reduce_field(h0)
    else:
        u = h0.copy()
    head = prob.head
    bordered = constraint is not None

    idx_crest = 0 * npp + n_p
    trough_row = red.M if red is not None else n_q // 2
    idx_trough = trough_row * npp + n_p

    def full_field(uu):
        return red.expand(uu) if red is not None else uu

    def res_vec(uu, hd):
        h = full_field(uu)
        F = kernels.residual_field(np.ascontiguousarray(h), dq, dp, beta, m, hd)
        F = F[: uu.shape[0]].ravel()
        if not bordered:
            return F
        if constraint[0] == "amplitude":
            c = 0.5 * (uu.ravel()[idx_crest] - uu.ravel()[idx_trough]) - constraint[1]
        else:
            _, t_u, t_head, u_prev, head_prev, ds = constraint
            c = (np.mean(t_u * (uu.ravel() - u_prev)) + t_head * (hd - head_prev) - ds)
        return np.concatenate([F, [c]])

    def jac_matrix(uu, hd):
        h = full_field(uu)
        vals = kernels.jacobian_values(np.ascontiguousarray(h), dq, dp, beta, m)
        A = red.matrix(vals) if red is not None else _full_matrix(vals, n_q, n_p)
        if not bordered:
            return A
        n = A.shape[0]
        col = sp.csr_matrix(_dhead_column(n, n_p)[:, None])
        if constraint[0] == "amplitude":
            row = np.zeros(n)
            row[idx_crest] = 0.5
            row[idx_trough] = -0.5
            corner = 0.0
        else:
            _, t_u, t_head, _, _, _ = constraint
            row = t_u / t_u.size
            corner = t_head
        return sp.bmat(
            [[A, col], [sp.csr_matrix(row[None, :]), sp.csr_matrix([[corner]])]],
            format="csc",
        )

    history = []
    F = res_vec(u, head)
    rms = float(np.sqrt(np.mean(F * F)))
    iters = 0
    for it in range(1, max_iter + 1):
        if rms <= tol:
            break
        try:
            lu = splu(jac_matrix(u, head))
        except RuntimeError as exc:
            raise SingularJacobianError(
                f"Newton matrix is singular at iteration {it}: {exc}", history
            ) from exc
        delta = lu.solve(-F)
        if not np.all(np.isfinite(delta)):
            raise SingularJacobianError(
                f"Newton solve produced non-finite step at iteration {it}", history
            )
        du = delta[: u.size].reshape(u.shape)
        dhead = float(delta[u.size]) if bordered else 0.0

        lam = 1.0
        accepted = False
        for _ in range(9):
            u_try = u + lam * du
            head_try = head + lam * dhead
            h_try = full_field(u_try)
            if _min_hp(h_try, dp) > HP_FLOOR and np.all(np.isfinite(h_try)):
                F_try = res_vec(u_try, head_try)
                rms_try = float(np.sqrt(np.mean(F_try * F_try)))
                if rms_try <= (1.0 - 1e-4 * lam) * rms or rms_try <= tol:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            raise ConvergenceError(
                f"line search failed at iteration {it} (residual {rms:.3e})",
                history,
            )
        step_rms = lam * float(np.sqrt(np.mean(delta * delta)))
        u, head, F, rms = u_try, head_try, F_try, rms_try
        iters = it
        history.append({
            "iteration": it,
            "residual": rms,
            "step": step_rms,
            "min_hp": _min_hp(full_field(u), dp),
            "backtracks": int(round(-math.log2(lam))) if lam < 1.0 else 0,
        })
        if step_rms <= 1e-12:
            break
    else:
        raise ConvergenceError(
            f"no convergence in {max_iter} iterations (residual {rms:.3e})",
            history,
        )
    if rms > tol and (not history or history[-1]["step"] > 1e-12):
        raise ConvergenceError(
            f"stalled at residual {rms:.3e} > tol {tol:.1e}", history
        )
    return full_field(u), head, iters, tuple(history)


def newton_solve(h0: HeightField, prob: DJProblem, amplitude: float | None = None,
                 *, symmetric: bool = True, tol: float = 1e-10,
                 max_iter: int = 40) -> WaveSolution:
    """Newton iteration from ``h0``; with ``amplitude`` the head is freed.

    The amplitude constraint pins (zeta(0) - zeta(L/2))/2, i.e. the
    crest-trough gap of the cosine-initialized symmetric wave.
    """
    if h0.problem != prob.tag:
        raise DomainError(
            f"initial field tagged {h0.problem!r} but problem is {prob.tag!r}"
        )
    h = np.ascontiguousarray(h0.h, dtype=float)
    _check_admissible(h, h0.dp)
    constraint = None if amplitude is None else ("amplitude", float(amplitude))
    h_final, head, iters, history = _newton_driver(
        h, prob.with_head(prob.head), constraint=constraint, symmetric=symmetric,
        tol=tol, max_iter=max_iter,
    )
    field = HeightField(q=h0.q.copy(), p=h0.p.copy(), h=h_final,
                        problem=prob.tag, head=head, period=prob.period)
    final_prob = prob.with_head(head)
    r = residual(field, final_prob)
    ff = flow_force_dj(field) if prob.instance is Instance.IRROTATIONAL_PSI else None
    return WaveSolution(
        field=field,
        head=head,
        amplitude=field.amplitude(),
        residual_norm=float(np.sqrt(np.mean(r * r))),
        flow_force=ff,
        iterations=iters,
        min_hp=_min_hp(h_final, field.dp),
        history=history,
    )


def _tangent(u: np.ndarray, head: float, prob: DJProblem, red: _Reduction,
             prev: tuple[np.ndarray, float] | None):
    """Unit tangent of the solution curve in (u, head) at a converged point."""
    n_q, npp = red.n_q, red.n_p + 1
    dq = prob.period / n_q
    dp = 1.0 / red.n_p
    h = red.expand(u)
    vals = kernels.jacobian_values(np.ascontiguousarray(h), dq, dp,
                                   prob.instance.interior_source,
                                   prob.instance.boundary_exponent)
    A = red.matrix(vals)
    col = _dhead_column(A.shape[0], red.n_p)
    try:
        du = splu(A).solve(-col)
    except RuntimeError as exc:
        raise SingularJacobianError(f"tangent solve hit a singular matrix: {exc}") from exc
    norm = math.sqrt(float(np.mean(du * du)) + 1.0)
    t_u, t_head = du / norm, 1.0 / norm
    if prev is not None:
        dot = float(np.mean(t_u * prev[0])) + t_head * prev[1]
        if dot < 0.0:
            t_u, t_head = -t_u, -t_head
    return t_u, t_head


def continue_branch(d: float, instance, a_max: float, steps: int = 60,
                    n_q: int = 256, n_p: int = 64, *, eps0: float = 1e-3,
                    tol: float = 1e-10, max_amp_step: float = 1e-2) -> Branch:
    """Pseudo-arclength continuation from the bifurcation point at depth d.

    Starts at amplitude ``eps0``, follows the branch with a tangent
    predictor and arclength-constrained Newton corrector, and stops at
    ``a_max``, after three consecutive step failures, near stagnation, or
    when the step budget runs out.
    """
    inst = _as_instance(instance)
    d = inst.validate_depth(d)
    if a_max <= eps0:
        raise DomainError(f"a_max = {a_max} must exceed the starting amplitude {eps0}")
    k = bifurcation_wavenumber(d, inst)
    if k is None:
        raise DomainError(f"no bifurcation wavenumber exists at depth {d}")
    period = 2.0 * math.pi / k
    stream_head = inst.stream_head(d)
    prob = DJProblem(inst, stream_head, period)

    guess = small_amplitude_guess(d, k, eps0, inst, n_q=n_q, n_p=n_p,
                                  check_wavenumber=False)
    first = newton_solve(guess, prob, amplitude=eps0, tol=tol)
    half = small_amplitude_guess(d, k, 0.5 * eps0, inst, n_q=n_q, n_p=n_p,
                                 check_wavenumber=False)
    half_sol = newton_solve(half, prob, amplitude=0.5 * eps0, tol=tol)
    bifurcation_head = (4.0 * half_sol.head - first.head) / 3.0
    points = [first]
    events = [{"step": 0, "amplitude": first.amplitude, "head": first.head,
               "ds": eps0, "iterations": first.iterations}]

    red = _Reduction(n_q, n_p)
    u = red.reduce_field(first.field.h)
    head = first.head
    tangent_prev = None
    target_da = eps0
    failures = 0
    truncation = "max_steps"

    for step in range(1, steps + 1):
        if points[-1].amplitude >= a_max:
            truncation = "reached_amplitude"
            break
        try:
            t_u, t_head = _tangent(u, head, prob.with_head(head), red, tangent_prev)
        except SingularJacobianError:
            truncation = "singular_tangent"
            break
        npp = red.n_p + 1
        da = 0.5 * (t_u[0 * npp + red.n_p] - t_u[red.M * npp + red.n_p])
        if tangent_prev is None and da < 0.0:
            # Orient the first tangent toward growing amplitude.
            t_u, t_head, da = -t_u, -t_head, -da
        # Arclength step sized to the requested amplitude increment.
        ds = target_da / max(abs(da), 1e-9)

        constraint = ("arclength", t_u, t_head, u.ravel().copy(), head, ds)
        u_pred = u + ds * t_u.reshape(u.shape)
        head_pred = head + ds * t_head
        try:
            h_new, head_new, iters, _ = _newton_driver(
                red.expand(u_pred), prob.with_head(head_pred),
                constraint=constraint, symmetric=True, tol=tol, max_iter=25,
            )
        except (ConvergenceError, StagnationError) as exc:
            failures += 1
            events.append({"step": step, "failed": str(exc), "ds": ds})
            target_da *= 0.5
            if failures >= 3:
                truncation = "step_failures"
                break
            continue
        failures = 0
        field = HeightField(q=first.field.q.copy(), p=first.field.p.copy(),
                            h=h_new, problem=inst.tag, head=head_new, period=period)
        r = residual(field, prob.with_head(head_new))
        ff = flow_force_dj(field) if inst is Instance.IRROTATIONAL_PSI else None
        sol = WaveSolution(
            field=field, head=head_new, amplitude=field.amplitude(),
            residual_norm=float(np.sqrt(np.mean(r * r))), flow_force=ff,
            iterations=iters, min_hp=_min_hp(h_new, field.dp), history=(),
        )
        if sol.amplitude <= points[-1].amplitude:
            failures += 1
            events.append({"step": step, "failed": "amplitude did not increase",
                           "ds": ds})
            target_da *= 0.5
            if failures >= 3:
                truncation = "step_failures"
                break
            continue
        points.append(sol)
        events.append({"step": step, "amplitude": sol.amplitude, "head": sol.head,
                       "ds": ds, "iterations": iters})
        u = red.reduce_field(h_new)
        head = head_new
        tangent_prev = (t_u, t_head)
        if sol.min_hp < HP_BRANCH_FLOOR:
            truncation = "near_stagnation"
            break
        if sol.amplitude >= a_max:
            truncation = "reached_amplitude"
            break
        if iters <= 3:
            target_da = min(target_da * 1.3, max_amp_step)
        elif iters >= 8:
            target_da *= 0.7
    return Branch(points=tuple(points), depth=d, wavenumber=k, instance=inst.tag,
                  stream_head=stream_head, bifurcation_head=bifurcation_head,
                  history=tuple(events), truncation=truncation)


def flow_force_dj(field: HeightField, r: float | None = None,
                  spread_tol: float = 1e-3) -> float:
    """Flow force of an irrotational-instance height field, by p-quadrature.

    Change of variables of the momentum-flux integral: with psi_y = 1/h_p
    and psi_x = -h_q/h_p the column integrand is
    (1 - h_q^2)/(2 h_p) + (r - h) h_p.  Column values of genuine solutions
    agree; a spread beyond ``spread_tol`` raises.
    """
    if field.problem != TAG_PSI:
        raise DomainError("flow force quadrature applies to the irrotational instance")
    if r is None:
        r = field.head
    h = field.h
    dq, dp = field.dq, field.dp
    if _min_hp(h, dp) <= 0.0:
        raise StagnationError("h_p <= 0; flow force quadrature undefined")
    h_q = (np.roll(h, -1, axis=0) - np.roll(h, 1, axis=0)) / (2.0 * dq)
    h_p = np.empty_like(h)
    h_p[:, 1:-1] = (h[:, 2:] - h[:, :-2]) / (2.0 * dp)
    h_p[:, 0] = (-3.0 * h[:, 0] + 4.0 * h[:, 1] - h[:, 2]) / (2.0 * dp)
    h_p[:, -1] = (3.0 * h[:, -1] - 4.0 * h[:, -2] + h[:, -3]) / (2.0 * dp)
    integrand = (1.0 - h_q * h_q) / (2.0 * h_p) + (r - h) * h_p
    per_column = simpson(integrand, dx=dp, axis=1)
    spread = float(per_column.max() - per_column.min())
    if spread > spread_tol:
        raise InconsistentFieldError(
            f"per-column flow force spread {spread:.3e} exceeds {spread_tol:.1e}; "
            "the field does not represent one solution"
        )
    return float(per_column.mean())

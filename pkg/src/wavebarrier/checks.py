"""Verification suite: inequality and identity checks on computed solutions.

Each check returns a ``CheckEntry`` with a pass/fail/skip status, the
measured margin, and the threshold it was held to.  Laminar inputs
(amplitude at or below ``LAMINAR_AMPLITUDE``) are exempt from the two
head/flow-force inequalities, which hold only for genuinely wavy
solutions; exempt entries are reported as skips, never as failures.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .flowforce import (
    R0,
    RC,
    FlowForceField,
    grid_derivatives,
    psi_derivatives,
    scaled_bernoulli,
)
from .hodograph import TAG_SCALED, HeightField, StreamHeight
from .region import CUSP_R, bl_boundaries
from .solver import DJProblem, WaveSolution, instance_from_tag, residual

#: Amplitude at or below which an input counts as laminar (a stream).
LAMINAR_AMPLITUDE = 1e-7

#: Default absolute tolerance for inequality margins on closed-form inputs.
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class CheckEntry:
    name: str
    status: str  # "pass" | "fail" | "skip"
    measured: float | None
    threshold: float | None
    claim: str
    note: str = ""


@dataclass(frozen=True)
class CheckReport:
    entries: tuple[CheckEntry, ...]
    provenance: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        ok = all(e.status != "fail" for e in self.entries)
        return "pass" if ok else "fail"

    def to_json(self) -> str:
        payload = {
            "verdict": self.verdict,
            "entries": [
                {
                    "name": e.name,
                    "status": e.status,
                    "measured": e.measured,
                    "threshold": e.threshold,
                    "claim": e.claim,
                    "note": e.note,
                }
                for e in self.entries
            ],
            "provenance": self.provenance,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_table(self) -> str:
        lines = [f"{'check':34s} {'status':6s} {'measured':>13s} {'threshold':>13s}"]
        for e in self.entries:
            meas = "-" if e.measured is None else f"{e.measured:.6g}"
            thr = "-" if e.threshold is None else f"{e.threshold:.6g}"
            lines.append(f"{e.name:34s} {e.status:6s} {meas:>13s} {thr:>13s}")
            if e.note:
                lines.append(f"    {e.note}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines) + "\n"


def solution_tolerance(sol: WaveSolution, floor: float = 1e-12) -> float:
    """Margin tolerance for solver-produced inputs: 10x the residual norm."""
    return max(floor, 10.0 * sol.residual_norm)


def check_flow_force_barrier(r: float, flow_force: float, amplitude: float,
                             tol: float = DEFAULT_TOL,
                             amp_tol: float = LAMINAR_AMPLITUDE) -> CheckEntry:
    """Flow force must exceed half the squared head for non-laminar solutions.

    Laminar inputs are exempt: they pass when they satisfy the weak bound
    and are skipped (never failed) when they violate it, since the
    inequality claims nothing about streams.
    """
    margin = flow_force - 0.5 * r * r
    claim = "flow force exceeds r^2/2 for non-laminar solutions"
    if amplitude <= amp_tol:
        if margin > -tol:
            return CheckEntry("flow_force_barrier", "pass", margin, 0.0, claim,
                              note="laminar input; weak bound satisfied")
        return CheckEntry("flow_force_barrier", "skip", margin, 0.0, claim,
                          note="laminar-exempt: streams are outside the claim")
    status = "pass" if margin > 0.0 else "fail"
    return CheckEntry("flow_force_barrier", status, margin, 0.0, claim)


def check_scaled_head_window(R: float, amplitude: float,
                             tol: float = DEFAULT_TOL,
                             amp_tol: float = LAMINAR_AMPLITUDE) -> CheckEntry:
    """Scaled head of a non-laminar solution lies strictly in (R_c, R0)."""
    lower = R - RC
    upper = R0 - R
    margin = min(lower, upper)
    claim = "scaled head lies strictly between sqrt(3/2) and sqrt(2)"
    if amplitude <= amp_tol:
        if margin > -tol:
            return CheckEntry("scaled_head_window", "pass", margin, tol, claim,
                              note="laminar input; bounds satisfied weakly")
        return CheckEntry("scaled_head_window", "skip", margin, tol, claim,
                          note="laminar-exempt: streams are outside the claim")
    status = "pass" if (lower > tol and upper > tol) else "fail"
    return CheckEntry("scaled_head_window", status, margin, tol, claim)


def check_benjamin_lighthill(r: float, flow_force: float,
                             tol: float = DEFAULT_TOL) -> CheckEntry:
    """Classical region bounds F_minus(r) <= FF <= F_plus(r)."""
    claim = "flow force lies between the conjugate-stream values"
    if r < CUSP_R - 1e-12:
        return CheckEntry("benjamin_lighthill", "skip", None, tol, claim,
                          note=f"no region exists for r={r} < 3/2")
    f_minus, f_plus = bl_boundaries(r)
    margin = min(flow_force - f_minus, f_plus - flow_force)
    status = "pass" if margin >= -tol else "fail"
    return CheckEntry("benjamin_lighthill", status, margin, tol, claim)


def check_unidirectional(fff: FlowForceField, tol: float = DEFAULT_TOL) -> CheckEntry:
    """F_y >= psi_y^2 > 0 throughout the fluid domain."""
    f = fff.field
    _, F_y = grid_derivatives(fff.F, f.eta, f.sigma, f.dx, f.dsigma)
    _, psi_y = psi_derivatives(f)
    margin = float((F_y - psi_y**2).min())
    min_psi_y = float(psi_y.min())
    claim = "vertical flow-force gradient dominates psi_y^2, which is positive"
    status = "pass" if (margin >= -tol and min_psi_y > 0.0) else "fail"
    return CheckEntry("unidirectional_flow", status, margin, tol, claim,
                      note=f"min psi_y = {min_psi_y:.6g}")


def check_surface_extrema_heads(sol: WaveSolution, tol: float | None = None) -> CheckEntry:
    """R <= R(sup zeta) and R >= R(inf zeta) for scaled-instance solutions.

    These are the endpoint inequalities that bound the head by the stream
    heads of the surface extrema; streams satisfy both with equality.
    """
    if sol.field.problem != TAG_SCALED:
        raise DomainError("surface-extrema head bounds apply to the scaled instance")
    if tol is None:
        tol = solution_tolerance(sol)
    z = sol.field.zeta
    sup_z, inf_z = float(z.max()), float(z.min())
    upper_margin = scaled_bernoulli(sup_z) - sol.head
    lower_margin = sol.head - scaled_bernoulli(inf_z)
    margin = min(upper_margin, lower_margin)
    claim = "head is bounded by the stream heads of the surface extrema"
    status = "pass" if margin >= -tol else "fail"
    return CheckEntry("surface_extrema_heads", status, margin, tol, claim,
                      note=f"sup zeta = {sup_z:.9g}, inf zeta = {inf_z:.9g}")


@dataclass(frozen=True)
class ComparisonField:
    """Difference w = h - H(.; d) and the defect of its elliptic equation."""

    d: float
    w: np.ndarray
    defect: np.ndarray
    defect_norm: float


def comparison_defect(sol_field: HeightField, d: float) -> ComparisonField:
    """Evaluate the homogeneous comparison equation for w = h - H(.; d).

    h-derivatives use the solver's finite-difference stencils; the stream
    height derivatives are analytic, under which the equation reduces
    algebraically to the interior residual divided by h_p^2.  The defect
    of a converged solution is therefore bounded by a small multiple of
    its residual norm, for every admissible reference depth.
    """
    sh = StreamHeight(float(d))
    h = sol_field.h
    dq, dp = sol_field.dq, sol_field.dp
    p = sol_field.p

    hE, hW = np.roll(h, -1, axis=0), np.roll(h, 1, axis=0)
    h_q = (hE - hW) / (2.0 * dq)
    h_qq = (hE - 2.0 * h + hW) / (dq * dq)
    h_p = np.zeros_like(h)
    h_pp = np.zeros_like(h)
    h_p[:, 1:-1] = (h[:, 2:] - h[:, :-2]) / (2.0 * dp)
    h_pp[:, 1:-1] = (h[:, 2:] - 2.0 * h[:, 1:-1] + h[:, :-2]) / (dp * dp)
    h_qp = (np.roll(h_p, -1, axis=0) - np.roll(h_p, 1, axis=0)) / (2.0 * dq)

    H = sh.H(p)[None, :]
    Hp = sh.H_p(p)[None, :]
    Hpp = sh.H_pp(p)[None, :]

    w = h - H
    w_q, w_qq, w_qp = h_q, h_qq, h_qp
    w_p = h_p - Hp
    w_pp = h_pp - Hpp

    inner = slice(1, -1)
    lhs = np.zeros_like(h)
    lhs[:, inner] = (
        (1.0 + h_q[:, inner] ** 2) / h_p[:, inner] ** 2 * w_pp[:, inner]
        - 2.0 * h_q[:, inner] / h_p[:, inner] * w_qp[:, inner]
        + w_qq[:, inner]
        - w_p[:, inner]
        + w_q[:, inner] ** 2 * Hpp[:, inner] / h_p[:, inner] ** 2
        - w_p[:, inner] * (h_p[:, inner] + Hp[:, inner]) * Hpp[:, inner]
        / (h_p[:, inner] ** 2 * Hp[:, inner] ** 2)
    )
    norm = float(np.sqrt(np.mean(lhs[:, inner] ** 2)))
    return ComparisonField(d=float(d), w=w, defect=lhs, defect_norm=norm)


def check_comparison_defect(sol: WaveSolution, d: float | None = None,
                            factor: float = 10.0) -> CheckEntry:
    """Comparison-equation defect stays within ``factor`` x solution residual."""
    if sol.field.problem != TAG_SCALED:
        raise DomainError("the comparison equation applies to the scaled instance")
    if d is None:
        d = float(np.clip(sol.field.zeta.mean(), 0.05, math.sqrt(2.0) - 0.01))
    cf = comparison_defect(sol.field, d)
    threshold = factor * max(sol.residual_norm, 1e-14)
    status = "pass" if cf.defect_norm <= threshold else "fail"
    claim = "h - H(.;d) satisfies its homogeneous elliptic equation"
    return CheckEntry("comparison_equation", status, cf.defect_norm, threshold, claim,
                      note=f"reference depth d = {d:.9g}")


def check_height_monotonic(field: HeightField) -> CheckEntry:
    """h_p > 0 at every node: no stagnation inside the field."""
    margin = field.hp_min()
    claim = "height increases strictly with the hodograph vertical coordinate"
    status = "pass" if margin > 0.0 else "fail"
    return CheckEntry("positive_height_gradient", status, margin, 0.0, claim)


def check_bottom_value(field: HeightField, tol: float = DEFAULT_TOL) -> CheckEntry:
    """h(q, 0) = 0: the bottom is a grid line."""
    margin = float(np.abs(field.h[:, 0]).max())
    claim = "height vanishes on the bottom boundary"
    status = "pass" if margin <= tol else "fail"
    return CheckEntry("bottom_boundary", status, margin, tol, claim)


def check_residual(sol: WaveSolution, prob: DJProblem,
                   factor: float = 2.0) -> CheckEntry:
    """Recomputed residual agrees with the stored solution diagnostics."""
    r = residual(sol.field, prob)
    rms = float(np.sqrt(np.mean(r * r)))
    threshold = factor * max(sol.residual_norm, 1e-13)
    status = "pass" if rms <= threshold else "fail"
    claim = "stored field reproduces its converged residual"
    return CheckEntry("residual_consistency", status, rms, threshold, claim)


def solution_report(sol: WaveSolution, provenance: dict | None = None,
                    reference_depth: float | None = None) -> CheckReport:
    """Run every applicable check on a solution, in a fixed order."""
    inst = instance_from_tag(sol.field.problem)
    prob = DJProblem(inst, sol.head, sol.field.period)
    tol = solution_tolerance(sol)
    entries = [
        check_residual(sol, prob),
        check_height_monotonic(sol.field),
        check_bottom_value(sol.field, tol=max(DEFAULT_TOL, tol)),
    ]
    if sol.field.problem == TAG_SCALED:
        entries.append(check_scaled_head_window(sol.head, sol.amplitude, tol=tol))
        entries.append(check_surface_extrema_heads(sol, tol=tol))
        entries.append(check_comparison_defect(sol, d=reference_depth))
    else:
        ff = sol.flow_force
        if ff is None:
            from .solver import flow_force_dj

            ff = flow_force_dj(sol.field)
        entries.append(check_flow_force_barrier(sol.head, ff, sol.amplitude, tol=tol))
        entries.append(check_benjamin_lighthill(sol.head, ff, tol=tol))
        # The rescaled head window is algebraically equivalent to the
        # barrier inequality on the upper side; checked for consistency.
        if ff > 0.0:
            entries.append(
                check_scaled_head_window(sol.head / math.sqrt(ff), sol.amplitude,
                                         tol=tol)
            )
    return CheckReport(entries=tuple(entries), provenance=provenance or {})


def wave_field_report(fff: FlowForceField, provenance: dict | None = None,
                      tol: float = DEFAULT_TOL) -> CheckReport:
    """Checks applicable to a physical-variables field with its flow force."""
    from .flowforce import superharmonic_check

    f = fff.field
    amplitude = 0.5 * float(f.eta.max() - f.eta.min())
    entries = [
        check_flow_force_barrier(f.r, fff.FF, amplitude, tol=tol),
        check_benjamin_lighthill(f.r, fff.FF, tol=tol),
        check_unidirectional(fff, tol=tol),
    ]
    sup = superharmonic_check(f)
    entries.append(CheckEntry(
        "superharmonic_bound",
        "pass" if sup <= tol else "fail",
        sup, tol,
        "kinetic-plus-height function stays below the head",
    ))
    return CheckReport(entries=tuple(entries), provenance=provenance or {})


def file_hashes(paths) -> dict:
    """sha256 of each file, keyed by its name, for report provenance."""
    out = {}
    for path in paths:
        digest = hashlib.sha256()
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(65536), b""):
                digest.update(chunk)
        out[str(path.name if hasattr(path, "name") else path)] = digest.hexdigest()
    return out

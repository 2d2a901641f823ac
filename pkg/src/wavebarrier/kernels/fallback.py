"""Pure-NumPy implementations of the hot strip-system kernels.

Same contracts and value ordering as the compiled module; selected at
import time when the extension is unavailable or explicitly disabled.
"""

from __future__ import annotations

import numpy as np


def residual_field(h: np.ndarray, dq: float, dp: float, beta: int, m: int,
                   head: float) -> np.ndarray:
    """Finite-difference residual of the strip system on the full grid.

    Interior rows carry the quasilinear operator
    (1 + h_q^2) h_pp - 2 h_q h_p h_qp + h_p^2 h_qq - beta h_p^3,
    the top row the surface condition (1 + h_q^2) / (2 h_p^m) + h - head
    with a one-sided second-order h_p, the bottom row the Dirichlet value.
    """
    out = np.empty_like(h)
    out[:, 0] = h[:, 0]

    hE = np.roll(h, -1, axis=0)
    hW = np.roll(h, 1, axis=0)

    C = h[:, 1:-1]
    E = hE[:, 1:-1]
    W = hW[:, 1:-1]
    N = h[:, 2:]
    S = h[:, :-2]
    NE = hE[:, 2:]
    NW = hW[:, 2:]
    SE = hE[:, :-2]
    SW = hW[:, :-2]

    a = (E - W) / (2.0 * dq)
    b = (N - S) / (2.0 * dp)
    c = (E - 2.0 * C + W) / (dq * dq)
    e = (N - 2.0 * C + S) / (dp * dp)
    f = (NE - NW - SE + SW) / (4.0 * dq * dp)
    out[:, 1:-1] = (1.0 + a * a) * e - 2.0 * a * b * f + b * b * c - beta * (b * b * b)

    aT = (hE[:, -1] - hW[:, -1]) / (2.0 * dq)
    b1 = (3.0 * h[:, -1] - 4.0 * h[:, -2] + h[:, -3]) / (2.0 * dp)
    bm = b1 if m == 1 else b1 * b1
    out[:, -1] = (1.0 + aT * aT) / (2.0 * bm) + h[:, -1] - head
    return out


def jacobian_values(h: np.ndarray, dq: float, dp: float, beta: int, m: int) -> np.ndarray:
    """Jacobian entries in the ordering of ``structure.jacobian_structure``."""
    n_q, npp = h.shape
    n_p = npp - 1

    hE = np.roll(h, -1, axis=0)
    hW = np.roll(h, 1, axis=0)

    C = h[:, 1:-1]
    E = hE[:, 1:-1]
    W = hW[:, 1:-1]
    N = h[:, 2:]
    S = h[:, :-2]
    NE = hE[:, 2:]
    NW = hW[:, 2:]
    SE = hE[:, :-2]
    SW = hW[:, :-2]

    a = (E - W) / (2.0 * dq)
    b = (N - S) / (2.0 * dp)
    c = (E - 2.0 * C + W) / (dq * dq)
    e = (N - 2.0 * C + S) / (dp * dp)
    f = (NE - NW - SE + SW) / (4.0 * dq * dp)

    dN_da = 2.0 * a * e - 2.0 * b * f
    dN_db = -2.0 * a * f + 2.0 * b * c - 3.0 * beta * b * b
    dN_dc = b * b
    dN_de = 1.0 + a * a
    dN_df = -2.0 * a * b

    inv2dq = 1.0 / (2.0 * dq)
    inv2dp = 1.0 / (2.0 * dp)
    invdq2 = 1.0 / (dq * dq)
    invdp2 = 1.0 / (dp * dp)
    inv4 = 1.0 / (4.0 * dq * dp)

    J_C = -2.0 * dN_dc * invdq2 - 2.0 * dN_de * invdp2
    J_E = dN_da * inv2dq + dN_dc * invdq2
    J_W = -dN_da * inv2dq + dN_dc * invdq2
    J_N = dN_db * inv2dp + dN_de * invdp2
    J_S = -dN_db * inv2dp + dN_de * invdp2
    J_NE = dN_df * inv4
    J_NW = -dN_df * inv4
    J_SE = -dN_df * inv4
    J_SW = dN_df * inv4

    aT = (hE[:, -1] - hW[:, -1]) * inv2dq
    b1 = (3.0 * h[:, -1] - 4.0 * h[:, -2] + h[:, -3]) * inv2dp
    bm = b1 if m == 1 else b1 * b1
    dG_da = aT / bm
    dG_db1 = -m * (1.0 + aT * aT) / (2.0 * bm * b1)
    T_C = 1.0 + dG_db1 * 3.0 * inv2dp
    T_E = dG_da * inv2dq
    T_W = -dG_da * inv2dq
    T_S1 = dG_db1 * (-4.0 * inv2dp)
    T_S2 = dG_db1 * inv2dp

    return np.concatenate([
        np.ones(n_q),
        J_C.ravel(), J_E.ravel(), J_W.ravel(), J_N.ravel(), J_S.ravel(),
        J_NE.ravel(), J_NW.ravel(), J_SE.ravel(), J_SW.ravel(),
        T_C, T_E, T_W, T_S1, T_S2,
    ])

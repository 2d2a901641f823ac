"""Sparsity structure of the strip-system Jacobian.

The value kernels (compiled or NumPy) fill a flat array whose entries
correspond, position by position, to the (row, col) pairs built here.
Layout, for a grid of n_q periodic columns and p levels 0..n_p:

* one Dirichlet entry per bottom node,
* nine interior blocks (kinds C, E, W, N, S, NE, NW, SE, SW), each of
  n_q * (n_p - 1) entries in row-major (i, j) order,
* five surface blocks (kinds C, E, W, S1, S2) of n_q entries each.

Rows and columns are flat node indices i * (n_p + 1) + j.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def values_length(n_q: int, n_p: int) -> int:
    return n_q + 9 * n_q * (n_p - 1) + 5 * n_q


@lru_cache(maxsize=32)
def jacobian_structure(n_q: int, n_p: int) -> tuple[np.ndarray, np.ndarray]:
    """(rows, cols) arrays matching the kernel value ordering."""
    npp = n_p + 1
    i = np.arange(n_q)
    ip = (i + 1) % n_q
    im = (i - 1) % n_q

    rows = [i * npp]
    cols = [i * npp]

    j = np.arange(1, n_p)
    II, JJ = np.meshgrid(i, j, indexing="ij")
    IIp, _ = np.meshgrid(ip, j, indexing="ij")
    IIm, _ = np.meshgrid(im, j, indexing="ij")
    r_int = (II * npp + JJ).ravel()
    interior_cols = (
        II * npp + JJ,          # C
        IIp * npp + JJ,         # E
        IIm * npp + JJ,         # W
        II * npp + JJ + 1,      # N
        II * npp + JJ - 1,      # S
        IIp * npp + JJ + 1,     # NE
        IIm * npp + JJ + 1,     # NW
        IIp * npp + JJ - 1,     # SE
        IIm * npp + JJ - 1,     # SW
    )
    for block in interior_cols:
        rows.append(r_int)
        cols.append(block.ravel())

    r_top = i * npp + n_p
    top_cols = (
        i * npp + n_p,          # C
        ip * npp + n_p,         # E
        im * npp + n_p,         # W
        i * npp + n_p - 1,      # S1
        i * npp + n_p - 2,      # S2
    )
    for block in top_cols:
        rows.append(r_top)
        cols.append(block)

    rows_arr = np.concatenate(rows).astype(np.int64)
    cols_arr = np.concatenate(cols).astype(np.int64)
    rows_arr.setflags(write=False)
    cols_arr.setflags(write=False)
    return rows_arr, cols_arr

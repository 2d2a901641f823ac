"""Hot finite-difference kernels: compiled core with a NumPy fallback.

The compiled extension is preferred when present; setting the environment
variable ``WAVEBARRIER_FORCE_FALLBACK=1`` before import pins the NumPy
path (useful for benchmarking and debugging).  Both implementations share
the sparsity layout from ``structure`` and produce identical values up to
floating-point rounding.
"""

import os

from . import fallback as _fallback
from .structure import jacobian_structure, values_length

if os.environ.get("WAVEBARRIER_FORCE_FALLBACK", "") not in ("", "0"):
    _impl = _fallback
    COMPILED = False
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        COMPILED = True
    except ImportError:
        _impl = _fallback
        COMPILED = False

residual_field = _impl.residual_field
jacobian_values = _impl.jacobian_values
IMPLEMENTATION = "compiled" if COMPILED else "numpy"

__all__ = [
    "COMPILED",
    "IMPLEMENTATION",
    "jacobian_structure",
    "jacobian_values",
    "residual_field",
    "values_length",
]

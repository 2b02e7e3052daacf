"""Backend selection for the hot loops of the coding simulations.

The compiled extension is used when it was built; otherwise, or when
``RDEQ_PURE_PYTHON=1`` is set, the numpy version is used.
"""
import os

import numpy as np

from . import _kernels_py

_compiled = None
if os.environ.get("RDEQ_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "numpy"


def _prepare(a_seqs, group, ptr, members, codebook, lo, hi):
    return (
        np.ascontiguousarray(a_seqs, dtype=np.int32),
        np.ascontiguousarray(group, dtype=np.int64),
        np.ascontiguousarray(ptr, dtype=np.int64),
        np.ascontiguousarray(members, dtype=np.int64),
        np.ascontiguousarray(codebook, dtype=np.int32),
        np.ascontiguousarray(lo, dtype=np.int32),
        np.ascontiguousarray(hi, dtype=np.int32),
    )


def first_typical(a_seqs, group, ptr, members, codebook, lo, hi, n_code_symbols, stop_at=1,
                  backend=None):
    """Lowest-listed typical codeword per row plus a capped count of typical codewords."""
    args = _prepare(a_seqs, group, ptr, members, codebook, lo, hi)
    return _pick(backend).first_typical(*args, int(n_code_symbols), int(stop_at))


def _pick(backend):
    use = BACKEND if backend is None else backend
    if use == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    if use != "numpy":
        raise ValueError(f"unknown backend {use!r}")
    return _kernels_py


def expand_completions(ydig, counts, ccount, ctable, ys, probs, nx, backend=None):
    """Enumerate x completions of y rows: returns x, y, prob, parent row, x code."""
    return _pick(backend).expand_completions(
        np.ascontiguousarray(ydig, dtype=np.int32),
        np.ascontiguousarray(counts, dtype=np.int64),
        np.ascontiguousarray(ccount, dtype=np.int64),
        np.ascontiguousarray(ctable, dtype=np.int32),
        np.ascontiguousarray(ys, dtype=np.int32),
        np.ascontiguousarray(probs, dtype=np.float64),
        int(nx),
    )


def row_distortion(x, xhat, row, table, backend=None):
    """Average per-symbol distortion between each row of x and its matched row of xhat."""
    return _pick(backend).row_distortion(
        np.ascontiguousarray(x, dtype=np.int32),
        np.ascontiguousarray(xhat, dtype=np.int32),
        np.ascontiguousarray(row, dtype=np.int64),
        np.ascontiguousarray(table, dtype=np.float64),
    )


def compiled_available() -> bool:
    return _compiled is not None

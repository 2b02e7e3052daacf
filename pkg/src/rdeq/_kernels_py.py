"""Numpy versions of the compiled loops, used when the extension is unavailable."""
import numpy as np


def first_typical(a_seqs, group, ptr, members, codebook, lo, hi, n_code_symbols, stop_at):
    """For each row of ``a_seqs``, scan the codewords listed for its group in order.

    A codeword is typical with the row when the per-cell counts of
    ``a * n_code_symbols + c`` lie within ``[lo, hi]``. Returns the first
    typical codeword (or -1) and how many were found, counting up to
    ``stop_at``.
    """
    a_seqs = np.asarray(a_seqs)
    m, n = a_seqs.shape
    n_cells = len(lo)
    first = np.full(m, -1, dtype=np.int64)
    count = np.zeros(m, dtype=np.int8)
    if m == 0:
        return first, count
    start = ptr[group]
    size = ptr[group + 1] - start
    base = a_seqs.astype(np.int64) * n_code_symbols
    active = np.flatnonzero(size > 0)
    k = 0
    while active.size:
        rows = members[start[active] + k]
        cells = base[active] + codebook[rows]
        flat = cells + (np.arange(active.size, dtype=np.int64) * n_cells)[:, None]
        counts = np.bincount(flat.ravel(), minlength=active.size * n_cells).reshape(active.size, n_cells)
        ok = np.all((counts >= lo) & (counts <= hi), axis=1)
        hit = active[ok]
        fresh = hit[count[hit] == 0]
        first[fresh] = rows[ok][count[hit] == 0]
        count[hit] += 1
        k += 1
        keep = (count[active] < stop_at) & (size[active] > k)
        active = active[keep]
    return first, count


def expand_completions(ydig, counts, ccount, ctable, ys, probs, nx):
    """Every x completion of each y row, with joint probabilities and x codes."""
    B, n = ydig.shape
    total = int(counts.sum())
    rep = np.repeat(np.arange(B, dtype=np.int64), counts)
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1])).astype(np.int64)
    within = np.arange(total, dtype=np.int64) - offsets[rep]
    cols = np.ascontiguousarray(ydig.T)
    x = np.empty((total, n), dtype=np.int32)
    y = np.empty((total, n), dtype=np.int32)
    prob = np.ones(total)
    xcode = np.zeros(total, dtype=np.int64)
    for i in range(n):
        d = cols[i][rep]
        base = ccount[d]
        xi = ctable[d, within % base]
        within //= base
        yi = ys[d]
        x[:, i] = xi
        y[:, i] = yi
        prob *= probs[xi, yi]
        xcode = xcode * nx + xi
    return x, y, prob, rep, xcode


def row_distortion(x, xhat, row, table):
    """Per-row mean of table[x[t, i], xhat[row[t], i]]."""
    return table[x, xhat[row]].mean(axis=1)

"""NumPy fallback for the exact greedy split scan.

Accumulation runs in the same element order as the Cython kernel
(np.cumsum is a sequential accumulate), so both backends produce
bitwise-identical gains and pick identical splits.
"""
import numpy as np


def best_split_node(indptr, rows, vals, in_node, g, h, g_node, h_node, n_node, lam, mcw):
    """Best (feature, gain, threshold) over all columns for one tree node.

    ``indptr/rows/vals`` are CSC arrays with entries value-sorted within each
    column; ``in_node`` flags the rows belonging to the node. Rows missing
    from a column sit in an implicit zero-valued group. Returns feature -1
    when no split has positive gain.
    """
    parent = g_node * g_node / (h_node + lam)
    best_feat = -1
    best_gain = 0.0
    best_thr = 0.0
    n_cols = len(indptr) - 1
    mask = in_node != 0
    for j in range(n_cols):
        a, b = indptr[j], indptr[j + 1]
        if a == b:
            continue  # only the zero group: nothing to split on
        rj = rows[a:b]
        sel = mask[rj]
        vj = vals[a:b][sel]
        k = len(vj)
        if k == 0:
            continue
        gj = g[rj[sel]]
        hj = h[rj[sel]]
        gcum = np.cumsum(gj)
        hcum = np.cumsum(hj)
        n0 = n_node - k
        if n0 > 0:
            p = int(np.searchsorted(vj, 0.0, side="left"))
            vj = np.insert(vj, p, 0.0)
            gj = np.insert(gj, p, g_node - gcum[-1])
            hj = np.insert(hj, p, h_node - hcum[-1])
            gcum = np.cumsum(gj)
            hcum = np.cumsum(hj)
        boundaries = np.nonzero(vj[:-1] != vj[1:])[0]
        if len(boundaries) == 0:
            continue
        gl = gcum[boundaries]
        hl = hcum[boundaries]
        gr = g_node - gl
        hr = h_node - hl
        denl = hl + lam
        denr = hr + lam
        valid = (hl >= mcw) & (hr >= mcw) & (denl > 0.0) & (denr > 0.0)
        if not valid.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            gain = 0.5 * (gl * gl / denl + gr * gr / denr - parent)
        gain[~valid] = -np.inf
        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            best_gain = float(gain[i])
            best_feat = j
            best_thr = float(0.5 * (vj[boundaries[i]] + vj[boundaries[i] + 1]))
    return best_feat, best_gain, best_thr

# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled exact greedy split scan.

Element order, accumulation order and the gain expression mirror
``_split_py`` exactly so both backends return bitwise-identical results.
No fast-math: IEEE semantics are part of the contract.
"""
import numpy as np

cimport numpy as cnp


def best_split_node(cnp.int64_t[::1] indptr, cnp.int64_t[::1] rows, double[::1] vals,
                    cnp.uint8_t[::1] in_node, double[::1] g, double[::1] h,
                    double g_node, double h_node, long long n_node,
                    double lam, double mcw):
    """See ``_split_py.best_split_node`` for the contract."""
    cdef double parent = g_node * g_node / (h_node + lam)
    cdef Py_ssize_t n_cols = indptr.shape[0] - 1
    cdef Py_ssize_t n_rows = g.shape[0]
    cdef cnp.ndarray[double, ndim=1] vbuf_a = np.empty(n_rows, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] gbuf_a = np.empty(n_rows, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] hbuf_a = np.empty(n_rows, dtype=np.float64)
    cdef double[::1] vbuf = vbuf_a
    cdef double[::1] gbuf = gbuf_a
    cdef double[::1] hbuf = hbuf_a

    cdef long long best_feat = -1
    cdef double best_gain = 0.0
    cdef double best_thr = 0.0

    cdef Py_ssize_t j, a, b, i, k, p, m, idx, r
    cdef long long n0
    cdef double sg, sh, g0, h0, gl, hl, gr, hr, denl, denr, gain
    cdef double vcur, vnext, gcur, hcur

    for j in range(n_cols):
        a = indptr[j]
        b = indptr[j + 1]
        if a == b:
            continue
        k = 0
        for i in range(a, b):
            r = <Py_ssize_t> rows[i]
            if in_node[r]:
                vbuf[k] = vals[i]
                gbuf[k] = g[r]
                hbuf[k] = h[r]
                k += 1
        if k == 0:
            continue
        sg = 0.0
        sh = 0.0
        for i in range(k):
            sg += gbuf[i]
            sh += hbuf[i]
        n0 = n_node - k
        p = 0
        while p < k and vbuf[p] < 0.0:
            p += 1
        if n0 > 0:
            m = k + 1
            g0 = g_node - sg
            h0 = h_node - sh
        else:
            m = k
        gl = 0.0
        hl = 0.0
        for idx in range(m - 1):
            if n0 > 0:
                if idx < p:
                    vcur = vbuf[idx]
                    gcur = gbuf[idx]
                    hcur = hbuf[idx]
                elif idx == p:
                    vcur = 0.0
                    gcur = g0
                    hcur = h0
                else:
                    vcur = vbuf[idx - 1]
                    gcur = gbuf[idx - 1]
                    hcur = hbuf[idx - 1]
                if idx + 1 < p:
                    vnext = vbuf[idx + 1]
                elif idx + 1 == p:
                    vnext = 0.0
                else:
                    vnext = vbuf[idx]
            else:
                vcur = vbuf[idx]
                gcur = gbuf[idx]
                hcur = hbuf[idx]
                vnext = vbuf[idx + 1]
            gl += gcur
            hl += hcur
            if vcur != vnext:
                hr = h_node - hl
                if hl >= mcw and hr >= mcw:
                    denl = hl + lam
                    denr = hr + lam
                    if denl > 0.0 and denr > 0.0:
                        gr = g_node - gl
                        gain = 0.5 * (gl * gl / denl + gr * gr / denr - parent)
                        if gain > best_gain:
                            best_gain = gain
                            best_feat = j
                            best_thr = 0.5 * (vcur + vnext)
    return int(best_feat), best_gain, best_thr

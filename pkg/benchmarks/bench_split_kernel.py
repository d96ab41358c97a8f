#!/usr/bin/env python3
"""Benchmark: compiled split-scan kernel vs the NumPy fallback.

Two workloads:
  * micro  -- the per-node best-split scan on synthetic CSC columns of
              TF-IDF-like sparsity, the boosted-tree trainer's hot loop;
  * macro  -- a full GBDT fit on a planted-signal text corpus, timed once
              per backend (OFFLANG_KERNEL is read at import, so each
              backend runs in a subprocess).

Usage: python benchmarks/bench_split_kernel.py [--rows 4000] [--cols 3000]
"""
import argparse
import json
import subprocess
import sys
import time

import numpy as np


def make_problem(rng, n_rows, n_cols, nnz_per_col):
    rows_l, vals_l, indptr = [], [], [0]
    for _ in range(n_cols):
        k = max(1, int(rng.normal(nnz_per_col, nnz_per_col * 0.3)))
        k = min(k, n_rows)
        rsel = np.sort(rng.choice(n_rows, size=k, replace=False))
        v = np.abs(rng.normal(0.3, 0.2, size=k)) + 1e-3
        order = np.argsort(v, kind="stable")
        rows_l.extend(rsel[order])
        vals_l.extend(v[order])
        indptr.append(len(rows_l))
    return (
        np.array(indptr, dtype=np.int64),
        np.array(rows_l, dtype=np.int64),
        np.array(vals_l, dtype=np.float64),
    )


def bench_micro(n_rows, n_cols, repeats):
    from offlang._kernels import _split_py

    try:
        from offlang._kernels import _split_cy
    except ImportError:
        _split_cy = None

    rng = np.random.default_rng(0)
    csc = make_problem(rng, n_rows, n_cols, nnz_per_col=max(4, n_rows // 50))
    g = rng.normal(size=n_rows)
    h = rng.uniform(0.05, 0.25, size=n_rows)
    in_node = (rng.random(n_rows) < 0.6).astype(np.uint8)
    sel = in_node.astype(bool)
    args = (
        csc[0], csc[1], csc[2], in_node, g, h,
        float(g[sel].sum()), float(h[sel].sum()), int(in_node.sum()), 1.0, 1.0,
    )

    results = {}
    for name, impl in (("python", _split_py), ("cython", _split_cy)):
        if impl is None:
            results[name] = None
            continue
        impl.best_split_node(*args)  # warm up
        t0 = time.perf_counter()
        for _ in range(repeats):
            out = impl.best_split_node(*args)
        dt = (time.perf_counter() - t0) / repeats
        results[name] = dt
        print("  micro %-7s %8.2f ms/scan   best=(feat=%d gain=%.4f)" % (name, dt * 1e3, out[0], out[1]))
    if results.get("cython") and results.get("python"):
        print("  micro speedup: %.1fx" % (results["python"] / results["cython"]))


MACRO_SNIPPET = r"""
import os, sys, time, json
os.environ["OFFLANG_KERNEL"] = sys.argv[1]
import numpy as np
from offlang._kernels import BACKEND
from offlang.synth import SynthSpec, generate
from offlang.resources import load_default_resources
from offlang.features import BaselineFeaturizer
from offlang.gbdt import GbdtParams, train_gbdt, predict_gbdt

n = int(sys.argv[2])
d = generate(SynthSpec(n_samples=n, positive_ratio=0.25, noise_rate=0.1, seed=3))
res = load_default_resources()
texts = [s.text for s in d.samples]
feat = BaselineFeaturizer(res.emoji_table, res.seg_lexicon, res.pos_lexicon, res.sent_lexicon).fit(texts)
x = feat.transform(texts)
y = np.array(d.labels(), dtype=float)
t0 = time.perf_counter()
model = train_gbdt(x, y, GbdtParams(n_rounds=60, max_depth=4))
dt = time.perf_counter() - t0
acc = float(((predict_gbdt(model, x) >= 0.5) == y).mean())
print(json.dumps({"backend": BACKEND, "fit_seconds": dt, "train_acc": acc, "cols": x.n_cols}))
"""


def bench_macro(n_samples):
    for backend in ("python", "cython"):
        proc = subprocess.run(
            [sys.executable, "-c", MACRO_SNIPPET, backend, str(n_samples)],
            capture_output=True, text=True,
        )
        if proc.returncode != 0:
            print("  macro %-7s failed:\n%s" % (backend, proc.stderr.strip()))
            continue
        rec = json.loads(proc.stdout.strip().splitlines()[-1])
        print(
            "  macro %-7s (ran as %-7s) %7.2f s fit   %d cols, train acc %.3f"
            % (backend, rec["backend"], rec["fit_seconds"], rec["cols"], rec["train_acc"])
        )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=4000)
    ap.add_argument("--cols", type=int, default=3000)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--macro-samples", type=int, default=1500)
    args = ap.parse_args()

    from offlang._kernels import BACKEND

    print("active backend: %s (set OFFLANG_KERNEL=python|cython to force)" % BACKEND)
    print("micro: single-node split scan over %d cols x %d rows" % (args.cols, args.rows))
    bench_micro(args.rows, args.cols, args.repeats)
    print("macro: full GBDT fit on %d synthetic samples" % args.macro_samples)
    bench_macro(args.macro_samples)


if __name__ == "__main__":
    main()

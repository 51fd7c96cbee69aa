#!/usr/bin/env python3
"""Compare the compiled (numba) and pure-numpy kernel backends.

Kernel dispatch reads ``INDISTINGUO_BACKEND`` on every call, so a single
process can time both variants by toggling the variable between phases.
Each numba phase runs one untimed warmup call first, which keeps JIT
compilation out of the timings.

Benchmarks:

* ``permanent``      - Gray-code subset-sum permanent of a random unitary
* ``distribution``   - full output distribution of n photons in n modes
* ``ensemble``       - ideal-path random-device sweep (closed forms; the
                       kernels only compute the scenario permanent once,
                       so both backends should be near-identical here)

Usage::

    python3 benchmarks/benchmark_kernels.py
    python3 benchmarks/benchmark_kernels.py --permanent-sizes 12,16 --repeats 5
    python3 benchmarks/benchmark_kernels.py --json results.json
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from indistinguo._backend import numba_available
from indistinguo.interference import output_distribution
from indistinguo.matrices import haar_random_unitary, permanent
from indistinguo.montecarlo import run_haar_ensemble
from indistinguo.states import gram_from_overlaps

_ENV = "INDISTINGUO_BACKEND"


def _time_best(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _parse_int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_cases(args) -> list[tuple[str, object]]:
    """Return (label, zero-argument callable) pairs."""
    cases: list[tuple[str, object]] = []

    for n in args.permanent_sizes:
        u = haar_random_unitary(n, seed=n)
        cases.append((f"permanent n={n}", lambda u=u: permanent(u)))

    gram = gram_from_overlaps(0.875, 0.874, 0.848)
    for n in args.distribution_photons:
        u = haar_random_unitary(n, seed=100 + n)
        rng = np.random.default_rng(n)
        vecs = rng.normal(size=(n, n + 1)) + 1j * rng.normal(size=(n, n + 1))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        s = vecs @ vecs.conj().T
        modes = tuple(range(n))
        cases.append(
            (
                f"distribution n={n}",
                lambda u=u, s=s, modes=modes: output_distribution(u, s, modes),
            )
        )

    cases.append(
        (
            f"ensemble draws={args.draws}",
            lambda g=gram, d=args.draws: run_haar_ensemble(3, g, draws=d, seed=0),
        )
    )
    return cases


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--permanent-sizes",
        type=_parse_int_list,
        default=[10, 12, 14],
        metavar="N,N,...",
        help="matrix sizes for the permanent benchmark (default 10,12,14)",
    )
    parser.add_argument(
        "--distribution-photons",
        type=_parse_int_list,
        default=[4, 5],
        metavar="N,N,...",
        help="photon numbers for the distribution benchmark (default 4,5)",
    )
    parser.add_argument(
        "--draws",
        type=int,
        default=5000,
        help="random devices in the ensemble benchmark (default 5000)",
    )
    parser.add_argument(
        "--repeats",
        type=int,
        default=3,
        help="timed repetitions per case; best time is reported (default 3)",
    )
    parser.add_argument(
        "--json",
        metavar="PATH",
        help="also write the results as a JSON array to PATH",
    )
    args = parser.parse_args(argv)

    backends = ["numpy"]
    if numba_available():
        backends.insert(0, "numba")
    else:
        print("numba is not importable; timing the numpy backend only.")

    cases = build_cases(args)
    rows = []
    previous = os.environ.get(_ENV)
    try:
        for label, fn in cases:
            row = {"case": label}
            for backend in backends:
                os.environ[_ENV] = backend
                fn()  # warmup: JIT compile (numba) / allocate (numpy)
                row[backend] = _time_best(fn, args.repeats)
            rows.append(row)
    finally:
        if previous is None:
            os.environ.pop(_ENV, None)
        else:
            os.environ[_ENV] = previous

    width = max(len(r["case"]) for r in rows)
    header = f"{'case':<{width}}"
    for backend in backends:
        header += f"  {backend + ' [s]':>12}"
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for row in rows:
        line = f"{row['case']:<{width}}"
        for backend in backends:
            line += f"  {row[backend]:>12.6f}"
        if len(backends) == 2:
            speedup = row["numpy"] / row["numba"] if row["numba"] > 0 else float("inf")
            row["speedup"] = speedup
            line += f"  {speedup:>7.1f}x"
        print(line)

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"\nwrote {args.json}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

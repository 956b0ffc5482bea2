"""Residual of plain matching pursuit against pre-orthogonal AFD on shared inputs.

Usage: python scripts/mp_vs_afd.py [--terms 10] [--inputs 3]
"""
from __future__ import annotations

import argparse

import numpy as np

from tubeafd.afd import SearchConfig, afd_run, mp_run, synthesize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=10)
    ap.add_argument("--inputs", type=int, default=3)
    args = ap.parse_args()

    cfg = SearchConfig(x_range=(-4.0, 4.0), y_range=(0.05, 8.0), x_points=32, y_points=16)
    for k in range(args.inputs):
        mags = np.random.default_rng(100 + k).uniform(0.2, 1.0, size=6)
        F = synthesize(mags, 1, seed=100 + k)
        a = afd_run(F, args.terms, 0.0, cfg).residual_history
        m = mp_run(F, args.terms, cfg, alpha_cap=0).residual_history
        print(f"# input {k}, ||F|| = {a[0]:.4g}")
        print("m,afd,mp,mp/afd")
        for i in range(1, min(len(a), len(m))):
            ratio = m[i] / a[i] if a[i] > 0 else float("inf")
            print(f"{i},{a[i]:.4e},{m[i]:.4e},{ratio:.3g}")


if __name__ == "__main__":
    main()

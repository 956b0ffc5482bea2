"""Normalized correlation along the three first-octant paths for several apertures.

Usage: python scripts/bvc_paths.py [--steps 12] [--p 2]
"""
from __future__ import annotations

import argparse

from tubeafd.cones import BvcPath, Cone2D, bvc_diagnostic, default_test_function


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=12)
    ap.add_argument("--p", type=float, default=2.0)
    args = ap.parse_args()

    for kappa in (1.0, 2.0, 4.0):
        cone = Cone2D(kappa)
        F = default_test_function(cone)
        print(f"# kappa={kappa}")
        print("path,final/initial,min,max")
        for kind in ("boundary", "scale", "xinf"):
            rows = bvc_diagnostic(F, BvcPath(kind, kappa=kappa, steps=args.steps, p=args.p), cone)
            r = [row.ratio for row in rows]
            print(f"{kind},{r[-1] / r[0]:.4g},{min(r):.4g},{max(r):.4g}")


if __name__ == "__main__":
    main()

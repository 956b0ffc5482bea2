"""Poisson L^p norm on the first octant against two candidate constants.

For each p the script prints ||P_y||_p / K^{1-1/p} together with the constants
2^{-n/p} and 4^{n(1-1/p)}. The second is attained as p -> inf.

Usage: python scripts/poisson_constants.py
"""
from __future__ import annotations

import math

import numpy as np

from tubeafd.cones import Cone2D, cone_szego_diag, poisson_lp_bound_check


def main() -> None:
    cone = Cone2D(1.0)
    z = np.array([0.3 + 0.7j, -0.2 + 1.4j])
    K = cone_szego_diag(cone, z.imag)
    n = 2
    print("p,ratio,printed_constant,sharp_constant,printed_ok,sharp_ok")
    for p in (1.25, 1.5, 2.0, 3.0, 5.0, 10.0, 50.0, math.inf):
        printed = poisson_lp_bound_check(cone, z, p, constant="printed")
        sharp = poisson_lp_bound_check(cone, z, p, constant="sharp")
        e = 1.0 if math.isinf(p) else 1.0 - 1.0 / p
        ratio = printed.lhs / K**e
        c_print = 1.0 if math.isinf(p) else 2.0 ** (-n / p)
        c_sharp = 4.0 ** (n * e)
        print(f"{p},{ratio:.6g},{c_print:.6g},{c_sharp:.6g},{printed.ok},{sharp.ok}")


if __name__ == "__main__":
    main()

"""Hardy split of a Lorentzian: witness error against grid extent and size.

The second error column splits the periodized Lorentzian and compares with its
exact analytic part. This removes the truncation error, so what is left comes
from sampling alone.

Usage: python scripts/split_demo.py
"""
from __future__ import annotations

import numpy as np

from tubeafd.hardy_signal import BoundarySamples, OctantSignature, boundary_values, hardy_project
from tubeafd.numerics import Grid


def periodized_lorentzian(x, period):
    a = 2 * np.pi / period
    return a * np.sinh(a) / (np.cosh(a) - np.cos(a * x))


def periodized_witness(x, period):
    a = np.pi / period
    return 1j * a / np.tan(a * (x + 1j))


def plus_part(g, values):
    return boundary_values(hardy_project(BoundarySamples(g, values + 0j), OctantSignature((1,))))


def main() -> None:
    print("half_width,n,max|F+ - i/(x+i)|,max|F+ - periodized|")
    for half in (16.0, 64.0, 256.0, 1024.0):
        for n in (1024, 4096, 16384):
            g = Grid.symmetric(half, n)
            x = g.axes()[0]
            e_line = np.max(np.abs(plus_part(g, 2 / (1 + x**2)) - 1j / (x + 1j)))
            P = 2 * half
            e_per = np.max(np.abs(plus_part(g, periodized_lorentzian(x, P)) - periodized_witness(x, P)))
            print(f"{half:g},{n},{e_line:.3e},{e_per:.3e}")


if __name__ == "__main__":
    main()

"""Acceptance criteria, one PASS/FAIL line each.

Every criterion is evaluated from the rows of the matching validation suite at
the stated tolerance. Two sub-criteria are known to fail (see README):
the finite-grid Hardy witness at 1e-4 and the Poisson L^p bound with the
constant 2^{-n/p}. They are kept as failures rather than loosened.

Run directly with ``python tests/test_acceptance.py`` for the summary alone.
"""
from __future__ import annotations

import functools

import pytest

from tubeafd.validation import SUITES, Row


@functools.lru_cache(maxsize=None)
def suite_rows(name: str) -> tuple[Row, ...]:
    return tuple(SUITES[name][1]())


CRITERIA: list[tuple[str, str, str, object]] = [
    ("1", "norms", "kernel norm vs quadrature and uncorrected-formula ratio", None),
    ("2", "inner", "inner products vs quadrature", None),
    ("3", "interp", "interpolation at nodes", None),
    ("4", "energy", "energy identity at every iteration", None),
    ("5", "recovery", "single-atom recovery", None),
    ("6", "rate", "M/sqrt(m) rate bound", None),
    ("7", "bvc", "normalized correlation decay on three paths", None),
    ("8a", "split", "split/reconstruct roundtrip n=1,2", "roundtrip"),
    ("8b", "split", "analytic witness within 1e-4 on the finite grid", "witness"),
    ("9", "escalation", "order escalation vs brute Gram-Schmidt", None),
    ("10a", "cones", "cone kernel closed form vs quadrature", "K closed"),
    ("10b", "cones", "dual-cone involution", "dual involution"),
    ("10c", "cones", "Poisson L^p bound with constant 2^{-n/p}", "Poisson"),
    ("11", "mp", "MP bookkeeping and AFD <= MP", None),
]


def evaluate(crit: str) -> tuple[bool, str]:
    _, suite, label, prefix = next(c for c in CRITERIA if c[0] == crit)
    rows = [r for r in suite_rows(suite) if prefix is None or r.case.startswith(prefix)]
    assert rows, f"no rows for criterion {crit}"
    bad = [r for r in rows if not r.passed]
    ok = not bad
    worst = max(rows, key=lambda r: r.measured / r.bound if r.bound else r.measured)
    detail = f"{len(rows) - len(bad)}/{len(rows)} rows, worst {worst.measured:.3g} vs {worst.bound:.3g}"
    line = f"{'PASS' if ok else 'FAIL'} criterion {crit:>3s} [{suite}] {label}: {detail}"
    return ok, line


@pytest.mark.parametrize("crit", [c[0] for c in CRITERIA])
def test_criterion(crit, capsys):
    ok, line = evaluate(crit)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    for c in CRITERIA:
        print(evaluate(c[0])[1], flush=True)

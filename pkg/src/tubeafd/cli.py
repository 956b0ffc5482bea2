"""Command-line entry point: ``tubeafd <command> [flags]``.

Commands
--------
split     split boundary samples into the ``2^n`` octant components
approx    greedy rational approximation of a component (or a model file)
eval      evaluate one or more model files on a boundary grid
validate  run the numerical acceptance suites
rate      convergence-rate table on a seeded synthetic input
bvc       boundary-vanishing table along a path of a planar cone
synth     write a seeded kernel combination as a model (and optional samples)

Exit codes are 0 on success, 1 when a check or the optimizer fails and 2 on
usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .afd import (
    Approximant,
    DegenerateElement,
    DictionaryExhausted,
    SearchConfig,
    afd_run,
    conjugate_model,
    rate_harness,
    synthesize,
)
from .cones import BvcPath, Cone2D, bvc_diagnostic, default_test_function
from .hardy_signal import (
    BoundarySamples,
    OctantSignature,
    SpectralRep,
    conjugate_component,
    hardy_project,
    load_component,
    read_samples,
    reconstruct,
    save_component,
    split_all,
    write_csv,
)
from .numerics import Grid, QuadratureError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# evaluation grids beyond these sizes are accepted with a warning
EVAL_MAX_COUNT = 4096
EVAL_MAX_HALF_WIDTH = 1.0e6


class UsageError(Exception):
    """Bad flags or unreadable input (exit code 2)."""


def _fmt(v: float) -> str:
    return f"{v:.17g}"


@dataclass
class RunConfig:
    """Validated flags shared by the commands."""

    command: str
    input: list[Path]
    output: Path | None = None
    dim: int | None = None
    terms: int = 10
    tol: float = 0.0
    lattice_x: int | None = None
    lattice_y: int | None = None
    alpha_cap: int | None = None
    seed: int = 0
    kappa: float = 1.0
    path: str = "boundary"
    real: bool = False
    sigma: str | None = None
    steps: int = 12
    p: float = 2.0
    atoms: int = 10

    def __post_init__(self):
        for f in self.input:
            if not f.exists():
                raise UsageError(f"input file {f} does not exist")
        if self.dim is not None and self.dim not in (1, 2):
            raise UsageError("--dim must be 1 or 2")
        if self.terms < 0:
            raise UsageError("--terms must be non-negative")
        if not self.tol >= 0:
            raise UsageError("--tol must be non-negative")
        for name in ("lattice_x", "lattice_y"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be at least 1")
        if self.alpha_cap is not None and self.alpha_cap < 0:
            raise UsageError("--alpha-cap must be non-negative")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise UsageError("--kappa must be positive and finite")
        if not 1 < self.p < math.inf:
            raise UsageError("--p must lie in (1, inf)")
        if self.steps < 1 or self.atoms < 1:
            raise UsageError("--steps and --atoms must be positive")

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        inp = getattr(ns, "input", None)
        inputs = [Path(p) for p in (inp if isinstance(inp, list) else [inp] if inp else [])]
        kw = {k: getattr(ns, k) for k in cls.__dataclass_fields__ if k not in ("command", "input") and hasattr(ns, k)}
        if kw.get("output") is not None:
            kw["output"] = Path(kw["output"])
        return cls(ns.command, inputs, **{k: v for k, v in kw.items() if v is not None})

    def search_config(self, grid: Grid | None) -> SearchConfig:
        over = {}
        if self.lattice_x is not None:
            over["x_points"] = self.lattice_x
        if self.lattice_y is not None:
            over["y_points"] = self.lattice_y
        if self.alpha_cap is not None:
            over["alpha_cap"] = self.alpha_cap
        if grid is not None:
            return SearchConfig.for_grid(grid, **over)
        return SearchConfig(**over)


def _open_out(path: Path | None):
    if path is None:
        return _Stdout()
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _read_samples(cfg: RunConfig) -> BoundarySamples:
    try:
        return read_samples(cfg.input[0], cfg.dim, cfg.real)
    except (OSError, ValueError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot parse {cfg.input[0]}: {exc}") from exc


def _one_input(cfg: RunConfig) -> Path:
    if len(cfg.input) != 1:
        raise UsageError(f"{cfg.command} takes exactly one --input")
    return cfg.input[0]


# -- commands ------------------------------------------------------------------


def cmd_split(cfg: RunConfig) -> int:
    _one_input(cfg)
    if cfg.output is None:
        raise UsageError("split needs --output DIR")
    samples = _read_samples(cfg)
    if cfg.dim is not None and samples.grid.dim != cfg.dim:
        raise UsageError(f"--dim {cfg.dim} but the input is {samples.grid.dim}-dimensional")
    try:
        comps = split_all(samples)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = cfg.output
    out.mkdir(parents=True, exist_ok=True)
    total = samples.l2_norm() ** 2
    entries = []
    for rep in comps:
        name = f"component_{str(rep.sigma).replace('+', 'p').replace('-', 'm')}.npz"
        save_component(out / name, rep)
        energy = rep.norm() ** 2
        entries.append({"sigma": str(rep.sigma), "file": name, "energy": energy, "energy_fraction": energy / total if total else 0.0})
    back = reconstruct(comps, samples.declared_real)
    err = float(np.linalg.norm(back.values - samples.values) / max(np.linalg.norm(samples.values), 1e-300))
    manifest = {
        "dim": samples.grid.dim,
        "grid": {"counts": list(samples.grid.counts), "lower": list(samples.grid.lower), "spacing": list(samples.grid.spacing)},
        "declared_real": samples.declared_real,
        "reconstruction_error": err,
        "components": entries,
    }
    print(f"reconstruction_error,{_fmt(err)}")
    for e in entries:
        print(f"energy_fraction[{e['sigma']}],{_fmt(e['energy_fraction'])}")
    if cfg.real:
        pairs = []
        by_sigma = {rep.sigma: rep for rep in comps}
        for rep in comps:
            mir = rep.sigma.mirrored()
            if str(rep.sigma) < str(mir):
                continue
            expect = conjugate_component(rep).density
            got = by_sigma[mir].density
            scale = max(float(np.max(np.abs(got))), 1e-300)
            dev = float(np.max(np.abs(got - expect))) / scale
            pairs.append({"sigma": str(rep.sigma), "mirror": str(mir), "max_relative_deviation": dev})
            print(f"conjugate_pair[{rep.sigma},{mir}],{_fmt(dev)}")
        manifest["conjugate_pairs"] = pairs
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return EXIT_OK


def _load_target(cfg: RunConfig):
    """A component file, a model file (closed-form target) or raw samples."""
    path = _one_input(cfg)
    grid = None
    if path.suffix == ".npz":
        try:
            rep = load_component(path)
        except (OSError, KeyError, ValueError) as exc:
            raise UsageError(f"cannot read component {path}: {exc}") from exc
        return rep, rep.grid
    if path.suffix == ".json":
        try:
            return Approximant.load(path), None
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    samples = _read_samples(cfg)
    grid = samples.grid
    try:
        sigma = OctantSignature.parse(cfg.sigma) if cfg.sigma else OctantSignature((1,) * grid.dim)
        if sigma.dim != grid.dim:
            raise ValueError(f"--sigma has {sigma.dim} signs for a {grid.dim}-D input")
        return hardy_project(samples, sigma), grid
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_approx(cfg: RunConfig) -> int:
    if cfg.output is None:
        raise UsageError("approx needs --output MODEL.json")
    target, grid = _load_target(cfg)
    search = cfg.search_config(grid)
    try:
        model = afd_run(target, cfg.terms, cfg.tol, search)
    except (DictionaryExhausted, DegenerateElement, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    model.save(cfg.output)
    if cfg.real:
        conjugate_model(model).save(cfg.output.with_name(cfg.output.stem + "_conj.json"))
    hist = model.residual_history
    norm = hist[0]
    res_path = cfg.output.with_suffix(".residuals.csv")
    with open(res_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "residual", "energy_captured"])
        rows = range(1, len(hist)) if len(hist) > 1 else [0]
        for m in rows:
            frac = 1.0 - (hist[m] / norm) ** 2 if norm > 0 else 0.0
            w.writerow([m, _fmt(hist[m]), _fmt(frac)])
    print(f"terms,{model.size}")
    print(f"residual,{_fmt(hist[-1])}")
    return EXIT_OK


def _eval_grid(ns: argparse.Namespace, dim: int) -> Grid:
    n, half = ns.grid_n, ns.grid_half_width
    if n < 8 or not half > 0:
        raise UsageError("--grid-n must be at least 8 and --grid-half-width positive")
    if n > EVAL_MAX_COUNT or half > EVAL_MAX_HALF_WIDTH:
        warnings.warn(
            f"evaluation grid ({n} points, half width {half}) exceeds the documented extent "
            f"({EVAL_MAX_COUNT} points, half width {EVAL_MAX_HALF_WIDTH:g})",
            stacklevel=2,
        )
    return Grid.symmetric(half, n, dim)


def cmd_eval(cfg: RunConfig, ns: argparse.Namespace) -> int:
    if not cfg.input:
        raise UsageError("eval needs at least one --input MODEL.json")
    models = []
    for p in cfg.input:
        try:
            models.append(Approximant.load(p))
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    dims = {m.dim for m in models}
    if len(dims) != 1:
        raise UsageError("models disagree in dimension")
    dim = dims.pop()
    grid = _eval_grid(ns, dim)
    pts = np.stack([m.ravel() for m in grid.mesh()], axis=-1).astype(complex)
    vals = sum(m.evaluate(pts) for m in models)
    samples = BoundarySamples(grid, np.asarray(vals).reshape(grid.shape))
    if cfg.output is None:
        _write_samples_stdout(samples)
    else:
        write_csv(cfg.output, samples)
    return EXIT_OK


def _write_samples_stdout(samples: BoundarySamples) -> None:
    w = csv.writer(sys.stdout)
    w.writerow([f"x{j + 1}" for j in range(samples.grid.dim)] + ["re", "im"])
    mesh = samples.grid.mesh()
    for idx in np.ndindex(*samples.grid.shape):
        v = samples.values[idx]
        w.writerow([_fmt(m[idx]) for m in mesh] + [_fmt(v.real), _fmt(v.imag)])


def cmd_validate(ns: argparse.Namespace) -> int:
    from .validation import SUITES, run_suite

    if ns.suite != "all" and ns.suite not in SUITES:
        print(f"error: unknown suite {ns.suite!r}; choose from all, {', '.join(SUITES)}", file=sys.stderr)
        return EXIT_USAGE
    rows = run_suite(ns.suite)
    print("suite,case,measured,bound,pass")
    for r in rows:
        print(r.csv())
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def cmd_rate(cfg: RunConfig) -> int:
    dim = cfg.dim or 1
    rng = np.random.default_rng(cfg.seed)
    mags = rng.uniform(0.1, 1.0, size=cfg.atoms)
    search = None
    if cfg.lattice_x or cfg.lattice_y:
        search = SearchConfig(
            x_range=(-4.0, 4.0),
            y_range=(0.05, 8.0),
            x_points=cfg.lattice_x or 32,
            y_points=cfg.lattice_y or 16,
        )
    terms = cfg.terms if cfg.terms else 20
    report = rate_harness(cfg.atoms, list(mags), terms, search, seed=cfg.seed, dim=dim)
    with _open_out(cfg.output) as fh:
        w = csv.writer(fh)
        w.writerow(["m", "residual", "bound"])
        for m, r, b in report.rows:
            w.writerow([m, _fmt(r), _fmt(b)])
    if report.violations:
        print(f"error: residual exceeds M/sqrt(m) at m = {report.violations}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_bvc(cfg: RunConfig) -> int:
    cone = Cone2D(cfg.kappa)
    path = BvcPath(cfg.path, cfg.kappa, cfg.steps, cfg.p)
    rows = bvc_diagnostic(default_test_function(cone), path, cone)
    with _open_out(cfg.output) as fh:
        w = csv.writer(fh)
        w.writerow(["step", "parameter", "ratio", "K_diag"])
        for r in rows:
            w.writerow([r.step, _fmt(r.parameter), _fmt(r.ratio), _fmt(r.k_diag)])
    return EXIT_OK


def cmd_synth(cfg: RunConfig, ns: argparse.Namespace) -> int:
    if cfg.output is None:
        raise UsageError("synth needs --output MODEL.json")
    dim = cfg.dim or 1
    rng = np.random.default_rng(cfg.seed)
    mags = rng.uniform(0.1, 1.0, size=cfg.atoms) if cfg.atoms > 1 else np.ones(1)
    model = synthesize(mags, dim, cfg.seed)
    model.save(cfg.output)
    if ns.samples:
        grid = _eval_grid(ns, dim)
        pts = np.stack([m.ravel() for m in grid.mesh()], axis=-1).astype(complex)
        write_csv(ns.samples, BoundarySamples(grid, model.evaluate(pts).reshape(grid.shape)))
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tubeafd", description="Rational approximation on tubes over the first octant.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, inputs="one"):
        if inputs == "one":
            p.add_argument("--input", required=True, help="input file")
        elif inputs == "many":
            p.add_argument("--input", nargs="+", required=True, help="input file(s)")
        p.add_argument("--output", help="output path (stdout for tables when omitted)")
        p.add_argument("--dim", type=int, choices=(1, 2))

    def grid_flags(p):
        p.add_argument("--grid-n", type=int, default=64, help="points per axis")
        p.add_argument("--grid-half-width", type=float, default=8.0, help="grid covers [-L, L) per axis")

    p = sub.add_parser("split", help="octant Hardy split of boundary samples")
    common(p)
    p.add_argument("--real", action="store_true", help="input is real valued")

    p = sub.add_parser("approx", help="greedy approximation of one component")
    common(p)
    p.add_argument("--terms", type=int, default=10)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--lattice-x", type=int)
    p.add_argument("--lattice-y", type=int)
    p.add_argument("--alpha-cap", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", help="octant signature such as +- when the input is raw samples")
    p.add_argument("--real", action="store_true", help="also write the mirrored model")

    p = sub.add_parser("eval", help="evaluate models on a boundary grid")
    common(p, "many")
    grid_flags(p)

    p = sub.add_parser("validate", help="run acceptance suites")
    p.add_argument("--suite", default="all")

    p = sub.add_parser("rate", help="convergence-rate table")
    p.add_argument("--output")
    p.add_argument("--dim", type=int, choices=(1, 2))
    p.add_argument("--atoms", type=int, default=10)
    p.add_argument("--terms", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lattice-x", type=int)
    p.add_argument("--lattice-y", type=int)

    p = sub.add_parser("bvc", help="boundary-vanishing table on a planar cone")
    p.add_argument("--output")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--path", choices=("boundary", "scale", "xinf"), default="boundary")
    p.add_argument("--steps", type=int, default=12)
    p.add_argument("--p", type=float, default=2.0)

    p = sub.add_parser("synth", help="seeded synthetic kernel combination")
    p.add_argument("--output", required=True)
    p.add_argument("--dim", type=int, choices=(1, 2))
    p.add_argument("--atoms", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", help="also write boundary samples to this CSV")
    grid_flags(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command == "validate":
            return cmd_validate(ns)
        cfg = RunConfig.from_args(ns)
        if ns.command == "split":
            return cmd_split(cfg)
        if ns.command == "approx":
            return cmd_approx(cfg)
        if ns.command == "eval":
            return cmd_eval(cfg, ns)
        if ns.command == "rate":
            return cmd_rate(cfg)
        if ns.command == "bvc":
            return cmd_bvc(cfg)
        if ns.command == "synth":
            return cmd_synth(cfg, ns)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

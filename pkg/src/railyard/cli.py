"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 numerical contract failure, 4 I/O.
``RAILYARD_THREADS`` caps the worker processes used for grid evaluations.
"""

from __future__ import annotations

import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import asymptotics as asy
from . import presets
from .contour import ContourError, finite_covariance_11, finite_moment_k1
from .ensemble import (
    EnsembleError,
    enumerate_coverings,
    gamma_oracle,
    sample_exact_many,
    sample_mcmc,
)
from .fock import partition_function_braket, partition_function_closed, tail_bound
from .graph import DimerCovering, RailYardSpec, SpecError, height_at, validate_spec
from .io import (
    Heatmap,
    OutputError,
    Polyline,
    RunManifest,
    export_table,
    load_spec,
    read_csv,
    table_csv,
    write_svg,
)
from .partitions import format_rational, gamma_k, partition_to_json

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _threads() -> int:
    raw = os.environ.get("RAILYARD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise click.BadParameter(f"RAILYARD_THREADS must be an integer, got {raw!r}")


def _finite(path: str) -> RailYardSpec:
    spec = load_spec(path)
    if not isinstance(spec, RailYardSpec):
        raise click.BadParameter(f"{path} holds an asymptotic spec; this command needs a finite one")
    return spec


def _limit(path: str) -> asy.AsymptoticSpec:
    spec = load_spec(path)
    if not isinstance(spec, asy.AsymptoticSpec):
        raise click.BadParameter(f"{path} holds a finite spec; this command needs an asymptotic one")
    return spec


def _emit(header, rows, out: str | None, manifest: RunManifest) -> None:
    if out:
        export_table(header, rows, out, manifest, fmt="json" if out.endswith(".json") else "csv")
    else:
        click.echo(table_csv(header, rows), nl=False)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


@click.group()
@click.version_option(package_name="artifact")
def cli() -> None:
    """Rail-yard dimer models: exact computations, sampling and limit shapes."""


@cli.command()
@click.argument("spec_path")
def validate(spec_path: str) -> None:
    """Check a finite spec for convergence (exit 2 on violations)."""
    spec = _finite(spec_path)
    report = validate_spec(spec)
    if report.ok:
        click.echo("ok")
        return
    for (i, j), p in zip(report.violations, report.products):
        click.echo(f"pair ({i},{j}): x_i x_j = {format_rational(p)} >= 1")
    raise SystemExit(EXIT_INVALID)


@cli.command()
@click.argument("spec_path")
@click.option("--N", "N", default=30, show_default=True, help="Truncation level.")
def zfunction(spec_path: str, N: int) -> None:
    """Partition function: truncated braket, closed product and tail bound."""
    spec = _finite(spec_path)
    closed = partition_function_closed(spec)
    braket = partition_function_braket(spec, N)
    bound = tail_bound(spec, N)
    click.echo(json.dumps({
        "N": N,
        "braket": format_rational(braket),
        "closed": format_rational(closed),
        "braket_float": float(braket),
        "closed_float": float(closed),
        "gap": float(closed - braket),
        "tail_bound": float(bound),
    }, indent=1))


@cli.command("enumerate")
@click.argument("spec_path")
@click.option("--budget", default=6, show_default=True, help="Maximum partition size.")
@click.option("--out", default=None, help="CSV or JSON output path.")
def enumerate_cmd(spec_path: str, budget: int, out: str | None) -> None:
    """List every covering within the size budget with its exact weight."""
    spec = _finite(spec_path)
    man = RunManifest.start("enumerate", spec)
    ens = enumerate_coverings(spec, budget)
    rows = [(json.dumps([partition_to_json(p) for p in c.partitions]), format_rational(w)) for c, w in ens.entries]
    _emit(["partitions", "weight"], rows, out, man)


@cli.command()
@click.argument("spec_path")
@click.option("--exact/--mcmc", default=True, help="Sampler kind.")
@click.option("--count", default=10, show_default=True)
@click.option("--steps", default=10_000, show_default=True, help="MCMC steps per sample.")
@click.option("--seed", default=0, show_default=True)
@click.option("--budget", default=20, show_default=True)
@click.option("--out", default=None)
def sample(spec_path: str, exact: bool, count: int, steps: int, seed: int, budget: int, out: str | None) -> None:
    """Draw coverings; output is one JSON list of partitions per line."""
    spec = _finite(spec_path)
    man = RunManifest.start("sample " + ("exact" if exact else "mcmc"), spec, seed)
    if exact:
        covers = sample_exact_many(spec, budget, count, seed)
    else:
        covers = [sample_mcmc(spec, steps, seed + k, budget=budget) for k in range(count)]
    rows = [(k, json.dumps([partition_to_json(p) for p in c.partitions])) for k, c in enumerate(covers)]
    _emit(["sample", "partitions"], rows, out, man)


@cli.command()
@click.argument("spec_path")
@click.argument("covering_path")
@click.option("--ylo", default=-10.0, show_default=True)
@click.option("--yhi", default=10.0, show_default=True)
@click.option("--out", default=None)
def height(spec_path: str, covering_path: str, ylo: float, yhi: float, out: str | None) -> None:
    """Lattice height of a covering at every partition and integer ordinate."""
    spec = _finite(spec_path)
    try:
        cover = DimerCovering.from_json(json.loads(Path(covering_path).read_text()))
    except OSError as exc:
        raise OutputError(str(exc)) from exc
    except (KeyError, TypeError) as exc:
        raise click.BadParameter(f"{covering_path} is not a covering: {exc}")
    if len(cover.partitions) != spec.n_columns + 1:
        raise click.BadParameter(f"covering has {len(cover.partitions)} partitions, spec needs {spec.n_columns + 1}")
    man = RunManifest.start("height", spec)
    rows = []
    for m in range(spec.l, spec.r + 2):
        for y in range(math.ceil(ylo), math.floor(yhi) + 1):
            rows.append((m, y, height_at(spec, cover, m, y)))
    _emit(["partition", "y", "height"], rows, out, man)


@cli.command()
@click.argument("spec_path")
@click.option("--t", "ts", default="0.5", show_default=True, help="Comma-separated t values.")
@click.option("--k", "ks", default="1", show_default=True, help="Only k = 1 has a contour formula here.")
@click.option("--columns", default=None, help="Comma-separated partition indices (L columns).")
@click.option("--budget", default=10, show_default=True, help="Starting enumeration budget for the oracle column (grows by up to 16).")
@click.option("--oracle-tol", default=1e-11, show_default=True, help="The budget grows until oracle values settle to this.")
@click.option("--covariance/--no-covariance", default=False, help="Also report (1,1) covariances.")
@click.option("--out", default=None)
def moments(spec_path: str, ts: str, ks: str, columns: str | None, budget: int, oracle_tol: float, covariance: bool, out: str | None) -> None:
    """Contour moments of gamma_1 against enumeration."""
    spec = _finite(spec_path)
    if any(k != 1 for k in _ints(ks)):
        raise click.BadParameter("only k = 1 is supported")
    cols = _ints(columns) if columns else [i for i in spec.columns if spec.a[i - spec.l] == "L"]
    man = RunManifest.start("moments", spec)
    rows = []
    for t in _floats(ts):
        oracle = gamma_oracle(spec, cols, t, start=budget, max_budget=budget + 16, tol=oracle_tol, cap=100_000, strict=False)
        if not oracle.last_change < oracle_tol:
            click.echo(f"warning: t={t}: oracle at budget {oracle.budget} still moved by {oracle.last_change:.2e}", err=True)
        for i in cols:
            val = finite_moment_k1(spec, i, t)
            ref = oracle.means[i]
            rows.append((i, 1, t, val, ref, abs(val - ref)))
        if covariance:
            for a in cols:
                for b in cols:
                    if b < a:
                        continue
                    val = finite_covariance_11(spec, a, b, t)
                    ref = oracle.covariances[(a, b)]
                    rows.append((f"{a}:{b}", "1:1", t, val, ref, abs(val - ref)))
    _emit(["column", "k", "t", "contour_value", "oracle_value", "abs_err"], rows, out, man)


def chi_grid(spec: asy.AsymptoticSpec, count: int) -> list[float]:
    """Evenly spaced interior chi values, nudged off the breakpoints."""
    V = spec.V
    gap = 1e-6 * min(V[i + 1] - V[i] for i in range(len(V) - 1))
    out = []
    for c in np.linspace(V[0], V[-1], count + 2)[1:-1]:
        c = float(c)
        for v in V:
            if abs(c - v) < gap:
                c = v + gap
        out.append(c)
    return out


def _shape_column(args):
    spec, chi, kappas = args
    rows = []
    for k in kappas:
        cls = asy.solve_roots(spec, chi, k)
        d = asy.density(spec, chi, k)
        rows.append((chi, float(k), d, cls.region))
    return rows


@cli.command("limit-shape")
@click.argument("spec_path")
@click.option("--grid", default=40, show_default=True, help="Points per axis.")
@click.option("--kappa-min", default=-2.5, show_default=True)
@click.option("--kappa-max", default=2.5, show_default=True)
@click.option("--out", default=None)
def limit_shape(spec_path: str, grid: int, kappa_min: float, kappa_max: float, out: str | None) -> None:
    """Density and region on a (chi, kappa) grid."""
    spec = _limit(spec_path)
    man = RunManifest.start("limit-shape", spec)
    kappas = np.linspace(kappa_min, kappa_max, grid)
    jobs = [(spec, chi, kappas) for chi in chi_grid(spec, grid)]
    workers = _threads()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_shape_column, jobs))
    else:
        parts = [_shape_column(j) for j in jobs]
    rows = [r for part in parts for r in part]
    _emit(["chi", "kappa", "density", "region"], rows, out, man)


@cli.command("frozen-boundary")
@click.argument("spec_path")
@click.option("--u-grid", default=60, show_default=True, help="Points per interval between singular values.")
@click.option("--tol", default=1e-8, show_default=True, help="Residual tolerance.")
@click.option("--out", default=None)
def frozen_boundary(spec_path: str, u_grid: int, tol: float, out: str | None) -> None:
    """Frozen boundary from the double-root parametrization."""
    spec = _limit(spec_path)
    man = RunManifest.start("frozen-boundary", spec)
    res = asy.frozen_boundary(spec, asy.default_u_grid(spec, u_grid), tol)
    for u, why in res.skipped:
        click.echo(f"skipped u={u:.6g}: {why}", err=True)
    rows = [(p.u, p.chi, p.kappa, p.residuals[0], p.residuals[1]) for p in res.points]
    _emit(["u", "chi", "kappa", "res1", "res2"], rows, out, man)


@cli.command("gff-cov")
@click.argument("spec_path")
@click.option("--chis", default=None, help="Comma-separated chi values (default: 5 interior points).")
@click.option("--k", "kk", default="1,1", show_default=True, help="k_d,k_h.")
@click.option("--out", default=None)
def gff_cov(spec_path: str, chis: str | None, kk: str, out: str | None) -> None:
    """Limiting covariance for every pair of the given chi values."""
    spec = _limit(spec_path)
    k_d, k_h = _ints(kk)
    xs = _floats(chis) if chis else chi_grid(spec, 5)
    man = RunManifest.start("gff-cov", spec)
    rows = []
    for a in xs:
        for b in xs:
            rows.append((a, b, k_d, k_h, asy.gff_covariance(spec, a, b, k_d, k_h)))
    _emit(["chi_d", "chi_h", "k_d", "k_h", "covariance"], rows, out, man)


@cli.command()
@click.argument("name", type=click.Choice(["pyramid", "pyramid-limit", "steep", "aztec"]))
@click.option("--size", default=3, show_default=True, help="s for pyramid/steep, n for aztec.")
@click.option("--x", "x", default="1/3", show_default=True, help="Weight for every column.")
@click.option("--word", default="LR", show_default=True, help="LR word for steep.")
@click.option("--signs", default=None, help="Sign word for steep (default + then -).")
@click.option("--tau", default="1,1", show_default=True, help="tau_1,tau_2 for pyramid-limit.")
@click.option("--v2", default=1.0, show_default=True, help="V_2 for pyramid-limit.")
def preset(name: str, size: int, x: str, word: str, signs: str | None, tau: str, v2: float) -> None:
    """Print a preset spec as JSON."""
    w = Fraction(x)
    if name == "pyramid":
        spec = presets.pyramid(size, w)
    elif name == "steep":
        spec = presets.steep(word, size, signs, w)
    elif name == "aztec":
        spec = presets.aztec(size, w)
    else:
        spec = presets.pyramid_limit(tuple(_floats(tau)), v2)
    click.echo(json.dumps(spec.to_json(), indent=1))


@cli.command()
@click.argument("csv_paths", nargs=-1, required=True)
@click.option("--out", required=True, help="SVG output path.")
@click.option("--kappa-axis", type=click.Choice(["tanh", "linear"]), default="tanh", show_default=True,
              help="tanh keeps branches that run to infinite kappa on the page.")
@click.option("--kappa-window", default=3.0, show_default=True, help="Clip |kappa| when the axis is linear.")
def render(csv_paths: tuple[str, ...], out: str, kappa_axis: str, kappa_window: float) -> None:
    """Draw limit-shape heatmaps and frozen-boundary curves (later files on top)."""
    linear = kappa_axis == "linear"
    layers = []
    for path in csv_paths:
        header, rows = read_csv(path)
        if header[:4] == ["chi", "kappa", "density", "region"]:
            chis = sorted({float(r[0]) for r in rows})
            kappas = sorted({float(r[1]) for r in rows})
            ci = {c: i for i, c in enumerate(chis)}
            ki = {k: j for j, k in enumerate(kappas)}
            vals = [[0.0] * len(kappas) for _ in chis]
            for r in rows:
                vals[ci[float(r[0])]][ki[float(r[1])]] = float(r[2])
            layers.append(Heatmap(chis, kappas, vals))
        elif header[:3] == ["u", "chi", "kappa"]:
            pts = sorted((float(r[0]), float(r[1]), float(r[2])) for r in rows)
            seg_x, seg_y = [], []
            for _, c, k in pts:
                if not linear or abs(k) <= kappa_window:
                    seg_x.append(c)
                    seg_y.append(k)
                elif seg_x:
                    layers.append(Polyline(seg_x, seg_y))
                    seg_x, seg_y = [], []
            if seg_x:
                layers.append(Polyline(seg_x, seg_y, closed=not linear))
        else:
            raise click.BadParameter(f"{path}: unrecognised table header {header}")
    if not layers:
        raise click.BadParameter("no drawable data")
    if linear:
        write_svg(layers, out)
    else:
        write_svg(layers, out, ytransform=math.tanh, ylabel="tanh(kappa)")
    click.echo(out)


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="railyard", standalone_mode=False)
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return EXIT_INVALID
    except (SpecError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_INVALID
    except (asy.AsymptoticError, ContourError, EnsembleError, ArithmeticError) as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return EXIT_NUMERIC
    except OSError as exc:
        click.echo(f"io error: {exc}", err=True)
        return EXIT_IO
    except SystemExit as exc:
        return int(exc.code or 0)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Every subcommand writes its tables into ``--out`` (default ``.``) and a short
summary to stdout. Exit status: 0 on success, 1 on a domain error (infeasible
densities, non-convergence, poles, exhausted budgets), 2 on usage or
model-file errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from ._search import BudgetExceeded
from .gauge import (
    BoundaryDensityError,
    ConvergenceError,
    InfeasibleDensityError,
    SolverOptions,
    solve_critical_gauge,
)
from .homology import check_integer_feasibility_small, check_real_feasibility, homology_report, interior_margin
from .io import ModelError, ModelFile, Query, bundled_models, format_number, load_model_file, write_csv, write_pgm
from .model import DUMMY_VERTEX, TileSystem
from .oracle import DEFAULT_BUDGET, count_labelled_tilings, enumerate_tile_count_vectors, tiling_weight
from .response import coulomb_energy, tile_covariance, tiling_laplacian
from .spectral import (
    LaurentPolynomial,
    NonSimpleRootsError,
    PoleError,
    SpectralModel,
    asymptotic_covariance,
    covariance_dft,
    covariance_heatmap,
    find_torus_roots,
    variance_log_estimate,
)

log = logging.getLogger("multitile")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
DOMAIN_ERRORS = (
    InfeasibleDensityError,
    BoundaryDensityError,
    ConvergenceError,
    PoleError,
    NonSimpleRootsError,
    BudgetExceeded,
)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- argument parsing


def _number(text: str):
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    try:
        return int(text)
    except ValueError:
        return float(text)


def _split(text: str) -> list[str]:
    return [p for p in text.replace(";", " ").replace(",", " ").split() if p]


def tile_label(system: TileSystem, k: int) -> str:
    return "+".join(f"{v}^{m}" if m > 1 else v for v, m in system.tiles[k].items())


def _densities(system: TileSystem, text: str | None, fallback) -> np.ndarray | list:
    """Parse --alpha: one value per vertex, or one value broadcast.

    A broadcast value skips a trailing dummy vertex, which takes up the
    remaining density so that the total is the tile size.
    """
    if text is None:
        if fallback is None:
            raise UsageError("no densities: pass --alpha or add query.alpha to the model")
        return list(fallback)
    vals = [_number(v) for v in _split(text)]
    n = system.n_vertices
    if len(vals) == 1:
        if system.vertices[-1] == DUMMY_VERTEX:
            a = vals[0]
            return [a] * (n - 1) + [system.delta - (n - 1) * a]
        return vals * n
    if len(vals) != n:
        raise UsageError(f"--alpha has {len(vals)} values; the model has {n} vertices")
    return vals


def _multiplicities(system: TileSystem, text: str | None, fallback) -> list[int]:
    if text is None:
        if fallback is None:
            raise UsageError("no multiplicities: pass --multiplicity or add query.multiplicity to the model")
        return [int(a) for a in fallback]
    vals = [int(v) for v in _split(text)]
    if len(vals) == 1:
        return vals * system.n_vertices
    if len(vals) != system.n_vertices:
        raise UsageError(f"--multiplicity has {len(vals)} values; the model has {system.n_vertices} vertices")
    return vals


def _charges(system: TileSystem, text: str | None, fallback) -> np.ndarray:
    q = np.zeros(system.n_vertices)
    if text is None:
        if fallback is None:
            raise UsageError("no charges: pass --charges v=q,... or add query.charges to the model")
        items = list(fallback)
    else:
        items = []
        for part in text.split():
            for entry in part.split(";") if ";" in text else part.split(","):
                if "=" not in entry:
                    raise UsageError(f"charge {entry!r} is not of the form vertex=value")
                v, val = entry.rsplit("=", 1)
                items.append((v, float(_number(val))))
    for v, val in items:
        if v not in system.index:
            raise UsageError(f"charge on unknown vertex {v!r}")
        q[system.index[v]] += val
    return q


def _offsets(text: str | None, d: int, fallback) -> list[tuple[int, ...]]:
    if text is None:
        if fallback is not None:
            return [tuple(o) for o in fallback]
        if d == 1:
            return [(s,) for s in range(0, 11)]
        return [(s, t) for t in range(-3, 4) for s in range(-3, 4)]
    out = []
    for chunk in text.replace(";", " ").split():
        parts = [int(p) for p in chunk.split(",")]
        if d == 1:
            out.extend((p,) for p in parts)
        elif len(parts) == 2:
            out.append(tuple(parts))
        else:
            raise UsageError(f"offset {chunk!r} needs two coordinates")
    return out


def _prototile(text: str) -> LaurentPolynomial:
    """``"e:c e:c ..."`` with e an integer or a comma pair, c a number."""
    terms: dict = {}
    for entry in text.split():
        if ":" not in entry:
            raise UsageError(f"prototile term {entry!r} is not exponent:coefficient")
        e, c = entry.rsplit(":", 1)
        parts = tuple(int(p) for p in e.split(","))
        key = parts[0] if len(parts) == 1 else parts
        terms[key] = terms.get(key, 0) + float(_number(c))
    try:
        return LaurentPolynomial(terms)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- model loading


def _load(args):
    if getattr(args, "prototile", None):
        if args.model:
            raise UsageError("give either --model or --prototile")
        p = _prototile(args.prototile)
        eps = args.eps[0] if args.eps else 1e-3
        return ModelFile(SpectralModel.single(p, args.n or 256, eps), Query())
    if not args.model:
        raise UsageError("--model is required")
    return load_model_file(args.model)


def _graph(args):
    mf = _load(args)
    if not isinstance(mf.model, TileSystem):
        raise UsageError(f"{args.command} needs a graph model, got a torus model")
    return mf.model, mf.query


def _torus(args):
    mf = _load(args)
    if not isinstance(mf.model, SpectralModel):
        raise UsageError(f"{args.command} needs a torus model, got a graph model")
    model = mf.model
    if args.n:
        model = SpectralModel(args.n, model.prototiles, model.w0)
    return model, mf.query


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _solver_options(args) -> SolverOptions:
    return SolverOptions(tol=args.tol) if args.tol else SolverOptions()


# ---------------------------------------------------------------- subcommands


def cmd_enumerate(args) -> int:
    system, query = _graph(args)
    N = _multiplicities(system, args.multiplicity, query.multiplicity)
    vecs = enumerate_tile_count_vectors(system, N, budget=args.budget or DEFAULT_BUDGET)
    rows = [(*K, count_labelled_tilings(system, N, K) * tiling_weight(system, K)) for K in vecs]
    total = sum(r[-1] for r in rows)
    header = [f"K[{tile_label(system, k)}]" for k in range(system.n_tiles)] + ["weight"]
    path = write_csv(_out(args) / "distribution.csv", header, rows)
    print(f"{len(rows)} tile-count vectors, partition function {total}")
    print(f"wrote {path}")
    return EXIT_OK if rows else EXIT_DOMAIN


def cmd_feasible(args) -> int:
    system, query = _graph(args)
    rep = homology_report(system)
    rows = [("homology", "", rep.describe()), ("invariant_factors", "", " ".join(map(str, rep.invariant_factors)))]
    print(f"H(D) = {rep.describe()}; real rank {rep.real_rank}, colorings {rep.dim_h1_real}")
    ok = True
    if args.alpha is not None or query.alpha is not None:
        alpha = _densities(system, args.alpha, query.alpha)
        feas = check_real_feasibility(system, alpha)
        ok &= feas.feasible
        rows.append(("real_feasible", "", feas.feasible))
        if feas.feasible:
            margin = interior_margin(system, [float(a) for a in alpha])
            rows.append(("interior_margin", "", margin))
            print(f"alpha feasible ({'exact' if feas.exact else 'floating point'}); interior margin {margin:.6g}")
        else:
            cert = ", ".join(f"{v}={format_number(c)}" for v, c in zip(system.vertices, feas.certificate))
            rows += [("certificate", v, c) for v, c in zip(system.vertices, feas.certificate)]
            print(f"alpha infeasible; separating functional {cert}")
    if args.multiplicity is not None or query.multiplicity is not None:
        N = _multiplicities(system, args.multiplicity, query.multiplicity)
        res = check_integer_feasibility_small(system, N, budget=args.budget or 1_000_000)
        rows.append(("integer_feasible", "", res.verdict))
        if res.witness is not None:
            rows += [("witness", tile_label(system, k), c) for k, c in enumerate(res.witness)]
        print(f"multiplicity {N}: {res.verdict}")
        ok &= res.verdict != "INFEASIBLE"
    path = write_csv(_out(args) / "feasibility.csv", ["quantity", "item", "value"], rows)
    print(f"wrote {path}")
    return EXIT_OK if ok else EXIT_DOMAIN


def _solve(args, system, query):
    alpha = _densities(system, args.alpha, query.alpha)
    return solve_critical_gauge(system, [float(a) for a in alpha], _solver_options(args))


def cmd_solve(args) -> int:
    system, query = _graph(args)
    sol = _solve(args, system, query)
    rows = [("sigma", "", sol.sigma), ("residual", "", sol.residual), ("iterations", "", sol.iterations)]
    rows += [("x", v, x) for v, x in zip(system.vertices, sol.x)]
    rows += [("probability", tile_label(system, k), p) for k, p in enumerate(sol.critical_weights)]
    path = write_csv(_out(args) / "solution.csv", ["quantity", "item", "value"], rows)
    print(f"sigma = {sol.sigma:.12g} after {sol.iterations} iterations (residual {sol.residual:.2e})")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_cov(args) -> int:
    system, query = _graph(args)
    sol = _solve(args, system, query)
    K = args.K if args.K is not None else 1.0
    cov = tile_covariance(system, sol, K)
    labels = [tile_label(system, k) for k in range(system.n_tiles)]
    rows = [(labels[i], *cov.matrix[i]) for i in range(system.n_tiles)]
    path = write_csv(_out(args) / "covariance.csv", ["tile", *labels], rows)
    print(f"tile-count covariance for K = {format_number(K)}; trace {np.trace(cov.matrix):.6g}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_coulomb(args) -> int:
    system, query = _graph(args)
    sol = _solve(args, system, query)
    q = _charges(system, args.charges, query.charges)
    N = 1.0
    if args.multiplicity is not None:
        vals = _split(args.multiplicity)
        if len(vals) != 1:
            raise UsageError("coulomb takes a single scalar --multiplicity")
        N = float(_number(vals[0]))
    L = tiling_laplacian(system, sol)
    E = coulomb_energy(L, q, multiplicity=N)
    rows = [("energy", "", E), ("multiplicity", "", N), ("sigma", "", sol.sigma)]
    rows += [("charge", v, c) for v, c in zip(system.vertices, q) if c]
    path = write_csv(_out(args) / "coulomb.csv", ["quantity", "item", "value"], rows)
    print(f"Coulomb energy {E:.12g} (multiplicity {format_number(N)})")
    print(f"wrote {path}")
    return EXIT_OK


def _eps_list(args, query, model: SpectralModel) -> list[float]:
    if args.eps:
        return list(args.eps)
    if query.eps:
        return list(query.eps)
    return [model.eps]


def _write_heatmap(args, model: SpectralModel, out: Path, stem: str) -> None:
    hm = covariance_heatmap(model, args.window, zero_modes=args.zero_modes, workers=args.threads)
    note = f"window {args.window}, n {model.n}, eps {format_number(model.eps)}, normalisation Cov/({hm.normalisation})"
    pgm, scale = write_pgm(out / f"{stem}.pgm", hm.values, note=note)
    h = hm.half
    rows = []
    for i in range(hm.values.shape[0]):
        for j in range(hm.values.shape[1]):
            rows.append(((j - h,) if model.d == 1 else (j - h, i - h)) + (hm.values[i, j],))
    header = ["s", "value"] if model.d == 1 else ["s", "t", "value"]
    write_csv(out / f"{stem}.csv", header, rows)
    print(f"wrote {pgm} and {scale}")


def cmd_spectral(args) -> int:
    model, query = _torus(args)
    out = _out(args)
    p = model.polynomial
    report = find_torus_roots(p)
    write_csv(
        out / "roots.csv",
        ["kind", "margin", "residual", *(f"angle{k}" for k in range(p.d))],
        [(r.kind, r.margin, r.residual, *r.angles) for r in report.roots]
        + [("CURVE", "", "", *([""] * p.d))] * len(report.curves),
    )
    print(report.summary())
    if args.asymptotic and not report.all_simple:
        raise NonSimpleRootsError(report)
    offsets = _offsets(args.offsets, model.d, query.offsets)
    rows = []
    for eps in _eps_list(args, query, model):
        m = SpectralModel.single(p, model.n, eps)
        for off in offsets:
            val = covariance_dft(m, off[0] if m.d == 1 else off, zero_modes=args.zero_modes)
            asym = ""
            if report.all_simple and eps > 0 and any(off):
                asym = asymptotic_covariance(p, eps, off[0] if m.d == 1 else off, report=report)
            rows.append((eps, *off, val, asym))
        if report.all_simple and m.d == 2 and 0 < eps < 0.1:
            est = variance_log_estimate(p, eps, report=report)
            const = "" if est.constant is None else f" + {est.constant:.4g}"
            print(f"eps {format_number(eps)}: variance {covariance_dft(m, (0, 0)):.6g}, "
                  f"leading term {est.coefficient:.6g} (log 1/eps{const}) = {est.value:.6g}")
    header = ["eps", *(["s"] if model.d == 1 else ["s", "t"]), "covariance", "asymptotic"]
    path = write_csv(out / "covariance.csv", header, rows)
    print(f"wrote {path}")
    if args.window:
        m = SpectralModel.single(p, model.n, _eps_list(args, query, model)[0])
        _write_heatmap(args, m, out, "heatmap")
    return EXIT_OK


def cmd_heatmap(args) -> int:
    model, query = _torus(args)
    eps = _eps_list(args, query, model)
    if len(model.prototiles) == 1:
        model = SpectralModel.single(model.polynomial, model.n, eps[0], model.prototiles[0][1])
    _write_heatmap(args, model, _out(args), "heatmap")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(args.only or None)
    return EXIT_OK if all(r.passed for r in results) else EXIT_DOMAIN


def cmd_models(args) -> int:
    for name in bundled_models():
        print(name)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model file path or bundled fixture name")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--tol", type=float, help="gauge solver tolerance (default 1e-10)")
    common.add_argument("--budget", type=int, help="search-node budget for exhaustive enumeration")
    common.add_argument("-v", "--verbose", action="store_true")

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--alpha", help="densities: one value, or one per vertex (comma separated, p/q allowed)")
    graph.add_argument("--multiplicity", help="vertex multiplicities N: one integer, or one per vertex")

    torus = argparse.ArgumentParser(add_help=False)
    torus.add_argument("--prototile", help='prototile as "e:c ..." with e an integer or "i,j" (instead of --model)')
    torus.add_argument("--n", type=int, help="torus side (overrides the model)")
    torus.add_argument("--eps", type=float, action="append", help="singleton weight ratio; repeat for a list")
    torus.add_argument("--threads", type=int, help="FFT worker threads")
    torus.add_argument("--zero-modes", choices=("error", "project"), default="error",
                       help="eps = 0 with characters where p vanishes: fail, or keep only those modes")

    parser = argparse.ArgumentParser(prog="multitile", description="Multinomial tilings: counts, gauges, covariances.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("enumerate", parents=[common, graph], help="exact distribution of tile counts")
    sub.add_parser("feasible", parents=[common, graph], help="homology and feasibility of densities/multiplicities")
    sub.add_parser("solve", parents=[common, graph], help="critical gauge and growth rate")
    p = sub.add_parser("cov", parents=[common, graph], help="Gaussian tile-count covariance")
    p.add_argument("--K", type=float, help="number of tiles (default 1: the normalised covariance)")
    p = sub.add_parser("coulomb", parents=[common, graph], help="Coulomb energy of a charge configuration")
    p.add_argument("--charges", help='charges as "v=q,v=q" (commas inside names need ";")')
    p = sub.add_parser("spectral", parents=[common, torus], help="torus covariance, roots and asymptotics")
    p.add_argument("--offsets", help='offsets, e.g. "0,0;1,0;2,-1" (d = 2) or "0,1,2" (d = 1)')
    p.add_argument("--asymptotic", action="store_true", help="fail unless all torus roots are simple")
    p.add_argument("--window", type=int, default=0, help="also write a heatmap of this width (odd, up to 101)")
    p = sub.add_parser("heatmap", parents=[common, torus], help="PGM heatmap of the torus covariance")
    p.add_argument("--window", type=int, default=61, help="window width (odd, up to 101; default 61)")
    p = sub.add_parser("selftest", help="run the built-in acceptance checks")
    p.add_argument("only", nargs="*", help="run only checks whose name contains one of these")
    sub.add_parser("models", help="list bundled model fixtures")
    return parser


COMMANDS = {
    "enumerate": cmd_enumerate,
    "feasible": cmd_feasible,
    "solve": cmd_solve,
    "cov": cmd_cov,
    "coulomb": cmd_coulomb,
    "spectral": cmd_spectral,
    "heatmap": cmd_heatmap,
    "selftest": cmd_selftest,
    "models": cmd_models,
}


def run_subcommand(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ModelError, FileNotFoundError) as exc:
        print(f"multitile {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DOMAIN_ERRORS as exc:
        print(f"multitile {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        # library precondition failures on user input (wrong lengths, bad windows)
        print(f"multitile {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_subcommand())


if __name__ == "__main__":
    main()

"""Command-line front end.

    lrbounds fx       --x-min 1 --x-max 50 --n 500
    lrbounds simulate --L 4 10
    lrbounds gamma    --L-min 2 --L-max 12
    lrbounds compare  --config cfg.json
    lrbounds count    --d-max 6 --k-extra 6

Every command writes UTF-8 CSV files (plus a JSON validity report for
``compare``) into ``--out`` (default ``$OUTPUT_DIR`` or the working directory).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    BoundInputs,
    BoundKind,
    build_curves,
    correction_factor,
    h_lambda_norm,
    z_opt,
)
from .config import ConfigError, ExperimentConfig, load_config
from .counting import BudgetExceeded, CountingProblem, count_bound, count_exact, literature_counts
from .dynamics import (
    NetworkHamiltonian,
    NumericError,
    TimeSeries,
    build_xy_chain,
    commutator_norm_series,
    default_time_grid,
    validity_windows,
    windows_as_times,
)
from .graph import SpinGraph, set_distance
from .operators import PAULI, LocalTerm, gamma_d, local_operator

log = logging.getLogger("lrbounds")

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_ERROR = 1

# curves whose failure to bound the simulation is a hard error
HARD_CURVES = {
    BoundKind.PERT_UPPER,
    BoundKind.PERT_LOWER,
    BoundKind.TRIVIAL,
    BoundKind.POLY_PLAIN,
    BoundKind.POLY_WITH_F,
    BoundKind.ORIGINAL_LAMBDA,
}

COMPARE_COLUMNS = {
    BoundKind.PERT_UPPER: "pert_upper",
    BoundKind.PERT_UPPER_NAIVE: "pert_upper_naive",
    BoundKind.PERT_LOWER: "pert_lower",
    BoundKind.PERT_LOWER_SIMPLIFIED: "pert_lower_simplified",
    BoundKind.POLY_WITH_F: "poly_with_F",
    BoundKind.POLY_PLAIN: "poly_plain",
    BoundKind.ORIGINAL_LAMBDA: "original_lambda0",
    BoundKind.TRIVIAL: "trivial",
}


# -- output helpers ------------------------------------------------------------

def fmt(value) -> str:
    """Locale-independent shortest round-trip float text."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    text = repr(v)
    return text if float(text) == v else f"{v:.17g}"


def _digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], digest: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# lrbounds {__version__} config_sha256={digest}", ",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    """Parse a file written by :func:`write_csv` (comment line skipped)."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


# -- models ----------------------------------------------------------------

def build_model(cfg: ExperimentConfig, L: int):
    """Hamiltonian, observables ``A``, ``B`` and graph for one system size."""
    obs_a = cfg.observables.get("A", {})
    obs_b = cfg.observables.get("B", {})
    site_a = obs_a.get("site", 1)
    site_b = obs_b.get("site", L)
    if cfg.model == "xy_chain":
        H = build_xy_chain(L, cfg.J)
    else:
        if cfg.local_dim != 2:
            raise ConfigError("Pauli-string terms need local_dim 2")
        g = SpinGraph.from_edge_list(L, cfg.edges) if cfg.edges is not None else SpinGraph.path(L)
        merged: dict[tuple[int, ...], np.ndarray] = {}
        for entry in cfg.terms:
            sites = list(entry["sites"])
            labels = entry["paulis"]
            if len(labels) != len(sites) or len(set(sites)) != len(sites):
                raise ConfigError(f"term {entry}: need one Pauli per distinct site")
            order = sorted(range(len(sites)), key=sites.__getitem__)
            support = tuple(sites[i] for i in order)
            term = LocalTerm.from_paulis(support, "".join(labels[i] for i in order), entry.get("coeff", 1.0))
            m = term.matrix.matrix
            merged[support] = merged[support] + m if support in merged else m
        terms = tuple(LocalTerm(s, m) for s, m in sorted(merged.items()))
        try:
            H = NetworkHamiltonian(L, terms, graph=g)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    for site in (site_a, site_b):
        if not 1 <= site <= L:
            raise ConfigError(f"observable site {site} outside 1..{L}")
    A = local_operator(PAULI[obs_a.get("op", "z")], site_a, L)
    B = local_operator(PAULI[obs_b.get("op", "z")], site_b, L)
    return H, A, B, (site_a, site_b)


def _order(H: NetworkHamiltonian, sites: tuple[int, int]) -> tuple[float, int]:
    dist = set_distance(H.graph, [sites[0]], [sites[1]])
    if not 0 < dist < math.inf:
        raise ConfigError(f"observables on sites {sites} must be distinct and connected")
    return dist, math.ceil(dist / H.d_bar)


def _time_grid(cfg: ExperimentConfig, H: NetworkHamiltonian, d: int) -> np.ndarray:
    if cfg.t_max is None:
        return default_time_grid(d, H.h_norm, cfg.n_points)
    return np.linspace(0.0, cfg.t_max, cfg.n_points)


# -- commands --------------------------------------------------------------

def cmd_fx(x_min: float = 1.0, x_max: float = 50.0, n: int = 500, out: Path = Path(".")) -> Path:
    if x_min < 1:
        raise ValueError("x_min must be >= 1")
    if n < 2 or x_max <= x_min:
        raise ValueError("need n >= 2 and x_max > x_min")
    rows = []
    for x in np.linspace(x_min, x_max, n):
        try:
            rows.append((x, z_opt(x), correction_factor(x)))
        except ValueError as exc:
            raise ValueError(f"x = {x!r}: {exc}") from None
    digest = _digest({"cmd": "fx", "x_min": x_min, "x_max": x_max, "n": n})
    return write_csv(Path(out) / "fx.csv", ["x", "z_opt", "F"], rows, digest)


def _simulate_one(cfg: ExperimentConfig, L: int):
    H, A, B, sites = build_model(cfg, L)
    _, d = _order(H, sites)
    times = _time_grid(cfg, H, d)
    try:
        sim = commutator_norm_series(H, A, B, times)
    except NumericError as exc:
        raise NumericError(f"L = {L}: {exc}") from exc
    return H, A, B, sites, sim


def cmd_simulate(cfg: ExperimentConfig) -> tuple[int, list[Path]]:
    out = Path(cfg.output_dir)
    paths, violations = [], []
    for L in cfg.L:
        _, _, _, _, sim = _simulate_one(cfg, L)
        bad = np.flatnonzero(sim.values > 2.0 + 1e-9)
        if bad.size:
            violations.append({"L": L, "curve": "trivial", "t": sim.times[bad].tolist()})
        paths.append(write_csv(out / f"simulate_L{L}.csv", ["t", "sim_norm"],
                               zip(sim.times, sim.values), cfg.digest()))
        log.info("L=%d: wrote %s", L, paths[-1])
    if violations:
        _report_violations(out / "violations_simulate.json", violations)
        return EXIT_VIOLATION, paths
    return EXIT_OK, paths


def cmd_gamma(L_min: int = 2, L_max: int = 12, J: float = 1.0, out: Path = Path(".")) -> Path:
    if not 2 <= L_min <= L_max <= 12:
        raise ValueError("need 2 <= L_min <= L_max <= 12")
    rows = []
    for L in range(L_min, L_max + 1):
        H = build_xy_chain(L, J)
        A = local_operator(PAULI["z"], 1, L)
        B = local_operator(PAULI["z"], L, L)
        rows.append((L, L - 1, gamma_d(H.terms, A, B, L - 1)))
        log.info("L=%d gamma=%s", L, rows[-1][2])
    digest = _digest({"cmd": "gamma", "L_min": L_min, "L_max": L_max, "J": J})
    return write_csv(Path(out) / "gamma.csv", ["L", "d", "gamma_d"], rows, digest)


def compare_one(cfg: ExperimentConfig, L: int):
    """Simulation, bound curves and validity windows for one size."""
    H, A, B, sites, sim = _simulate_one(cfg, L)
    dist, d = _order(H, sites)
    terms = list(H.terms)
    zeta = h_lambda_norm(terms, H.graph, 0.0)
    inp = BoundInputs(dist=dist, d_bar=H.d_bar, zeta=zeta, h_norm=H.h_norm,
                      gamma_d=gamma_d(terms, A, B, d))
    kinds = [BoundKind(k) for k in cfg.bounds_requested]
    curves = build_curves(kinds, inp, d=d, H_norm=H.norm, lam=0.0, h_lambda=zeta)
    return sim, curves, validity_windows(sim, curves), inp


def cmd_compare(cfg: ExperimentConfig) -> tuple[int, list[Path]]:
    out = Path(cfg.output_dir)
    paths, violations = [], []
    for L in cfg.L:
        sim, curves, windows, inp = compare_one(cfg, L)
        header = ["t", "sim"] + [COMPARE_COLUMNS[c.kind] for c in curves]
        columns = [sim.times, sim.values] + [c(sim.times) for c in curves]
        paths.append(write_csv(out / f"compare_L{L}.csv", header, zip(*columns), cfg.digest()))
        report = windows_as_times(sim, windows)
        report_path = out / f"validity_L{L}.json"
        report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        paths.append(report_path)
        full = [(0, len(sim) - 1)]
        for c in curves:
            if c.kind in HARD_CURVES and windows[c.kind.value] != full:
                violations.append({"L": L, "curve": c.kind.value, "valid_on": report[c.kind.value]})
        log.info("L=%d gamma_d=%s: wrote %s", L, inp.gamma_d, paths[-2])
    if violations:
        _report_violations(out / "violations_compare.json", violations)
        return EXIT_VIOLATION, paths
    return EXIT_OK, paths


def cmd_count(d_max: int = 6, k_extra: int = 6, out: Path = Path("."), delta: int = 1,
              coordination: int = 2, cap: int = 10**7) -> Path:
    rows = []
    for d in range(1, d_max + 1):
        for k in range(d, d + k_extra + 1):
            bound = count_bound(k, d)
            try:
                exact = count_exact(CountingProblem(d, k, cap))
            except BudgetExceeded:
                exact = "bound-only"
            n1, n2 = literature_counts(k, delta, coordination)
            rows.append((d, k, exact, bound, n1, n2))
    digest = _digest({"cmd": "count", "d_max": d_max, "k_extra": k_extra, "delta": delta,
                      "C": coordination, "cap": cap})
    return write_csv(Path(out) / "count.csv", ["d", "k", "n_exact", "n_bound", "N1", "N2"], rows, digest)


def _report_violations(path: Path, violations: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"violations": violations}, indent=2) + "\n", encoding="utf-8")
    print(json.dumps({"violations": violations}), file=sys.stderr)


# -- argument parsing ------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default $OUTPUT_DIR or .)")
    common.add_argument("--quiet", action="store_true")

    exp = argparse.ArgumentParser(add_help=False)
    exp.add_argument("--config", help="JSON experiment config")
    exp.add_argument("--L", type=int, nargs="+", help="chain length(s)")
    exp.add_argument("--J", type=float, help="coupling")
    exp.add_argument("--tmax", type=float, help="end of the time grid")
    exp.add_argument("--points", type=int, help="number of grid points")

    p = argparse.ArgumentParser(prog="lrbounds", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"lrbounds {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    fx = sub.add_parser("fx", parents=[common], help="tabulate z_opt(x) and F(x)")
    fx.add_argument("--x-min", type=float, default=1.0)
    fx.add_argument("--x-max", type=float, default=50.0)
    fx.add_argument("--n", type=int, default=500)

    sub.add_parser("simulate", parents=[common, exp], help="exact ||[A(t),B]|| per chain length")
    sub.add_parser("compare", parents=[common, exp], help="simulation against every bound")

    gm = sub.add_parser("gamma", parents=[common], help="Gamma_d for XY chains, d = L - 1")
    gm.add_argument("--L-min", type=int, default=2)
    gm.add_argument("--L-max", type=int, default=12)
    gm.add_argument("--J", type=float, default=1.0)

    ct = sub.add_parser("count", parents=[common], help="admissible sequence counts")
    ct.add_argument("--d-max", type=int, default=6)
    ct.add_argument("--k-extra", type=int, default=6)
    ct.add_argument("--delta", type=int, default=1)
    ct.add_argument("--coordination", type=int, default=2)
    ct.add_argument("--cap", type=int, default=10**7)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s")
    out = Path(args.out or os.environ.get("OUTPUT_DIR", "."))
    try:
        if args.command == "fx":
            print(cmd_fx(args.x_min, args.x_max, args.n, out))
            return EXIT_OK
        if args.command == "gamma":
            print(cmd_gamma(args.L_min, args.L_max, args.J, out))
            return EXIT_OK
        if args.command == "count":
            print(cmd_count(args.d_max, args.k_extra, out, args.delta, args.coordination, args.cap))
            return EXIT_OK
        overrides = {"L": args.L, "J": args.J, "t_max": args.tmax, "n_points": args.points}
        if args.out is not None or args.config is None:
            overrides["output_dir"] = str(out)
        cfg = load_config(args.config, overrides)
        run = cmd_simulate if args.command == "simulate" else cmd_compare
        code, paths = run(cfg)
        for path in paths:
            print(path)
        return code
    except (ConfigError, ValueError, NumericError, OSError) as exc:
        print(f"lrbounds {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

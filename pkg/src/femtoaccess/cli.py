"""Command-line front end: parameter sweeps to CSV, single CDFs, eta, validation.

Exit codes: 0 success, 1 a validation check failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Iterable

import numpy as np
from scipy import integrate, special

from . import sir as sir_module
from .geometry import Zone, ZoneUndefinedError
from .montecarlo import McConfig, ecdf, simulate_cases, sup_distance
from .params import DEFAULT_CONFIG, ConfigError, SystemParams, derive_constants, load_params
from .shared import grid_search_eta, optimal_eta
from .sir import SirCdf, closed_form_available, zone_cdf
from .specfun import expint_ei, hyp2f1_neg
from .throughput import (network_throughput, rho_b_closed, rho_b_open, rho_i, rho_o,
                         slot_fractions_from_counts, throughput_gap_identity,
                         tier_throughput_closed, tier_throughput_open, zone_throughputs)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 20240101
SWEEP_VARS = {"D": None, "N_f": "num_femtocells", "U_c": "num_cellular_users",
              "epsilon": "qos_epsilon"}
OUTPUTS = ("zone-cdf", "zone-throughput", "tier-throughput", "network-throughput",
           "shared-access", "validate")
CDF_CASES = (("Fa", None), ("Fb", None), ("Fi", None), ("Fo", "closed"), ("Fo", "open"))


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return format(float(x), ".12g")


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------
def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_overrides(items: Iterable[str]) -> dict[str, Any]:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"override must look like key=value, got {item!r}")
        out[key.strip()] = _parse_value(value.strip())
    return out


def load_document(config: str | None, overrides: dict[str, Any]) -> dict[str, Any]:
    if config is None:
        doc = dict(DEFAULT_CONFIG)
    else:
        try:
            with open(config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {config} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    doc.update(overrides)
    load_params(doc)
    return doc


def parse_range(text: str) -> tuple[float, float, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError("--range needs start,stop,count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad --range {text!r}") from exc
    if count < 2:
        raise UsageError("--range count must be >= 2")
    return start, stop, count


def _metadata_row(doc: dict[str, Any], seed: int, **extra: Any) -> str:
    meta = {"config": doc, "seed": seed, **extra}
    return "# " + json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n"


def _write_csv(path: Path | None, meta: str, header: list[str], rows: list[list[str]]) -> None:
    buf = io.StringIO()
    buf.write(meta)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# Sweep outputs: each returns rows of (series_label, value, units)
# ---------------------------------------------------------------------------
def _zone_series(p: SystemParams, D: float) -> list[tuple[str, float, str]]:
    zt = zone_throughputs(p, D)
    out = []
    for label in ("T_a", "T_b", "T_i", "T_o_CA", "T_o_OA"):
        v = getattr(zt, label)
        if v is not None:
            out.append((label, v, "bps/Hz"))
    return out


def _tier_series(p: SystemParams, D: float) -> list[tuple[str, float, str]]:
    zt = zone_throughputs(p, D)
    out = []
    for tag, t in (("CA", tier_throughput_closed(p, D, zt)), ("OA", tier_throughput_open(p, D, zt))):
        out.append((f"T_h_{tag}", t.T_h, "bps/Hz"))
        if t.T_c is not None:
            out.append((f"T_c_{tag}", t.T_c, "bps/Hz"))
        if t.T_c_per_user is not None:
            out.append((f"T_c_{tag}_per_user", t.T_c_per_user, "bps/Hz"))
        for name, v in sorted(t.rho.items()):
            out.append((f"{name}_{tag}", v, "1"))
    return out


def _network_series(p: SystemParams, D: float) -> list[tuple[str, float, str]]:
    zt = zone_throughputs(p, D)
    net = network_throughput(p, D, zt)
    sa = optimal_eta(p, D, zt)
    out = [("T_CA", net["closed"], "bps/Hz"), ("T_OA", net["open"], "bps/Hz")]
    if sa.feasible:
        out.append(("T_SA", sa.T_network, "bps/Hz"))
    return out


def _shared_series(p: SystemParams, D: float) -> list[tuple[str, float, str]]:
    sa = optimal_eta(p, D)
    out = [("eta_star", sa.eta_star, "1"), ("feasible", float(sa.feasible), "1"),
           ("T_SA", sa.T_network, "bps/Hz")]
    if sa.Tbar_h is not None:
        out.append(("Tbar_h", sa.Tbar_h, "bps/Hz"))
    if sa.Tbar_c is not None and math.isfinite(sa.Tbar_c):
        out.append(("Tbar_c", sa.Tbar_c, "bps/Hz"))
    return out


SERIES: dict[str, Callable[[SystemParams, float], list[tuple[str, float, str]]]] = {
    "zone-throughput": _zone_series,
    "tier-throughput": _tier_series,
    "network-throughput": _network_series,
    "shared-access": _shared_series,
}


def _cdf_rows(p: SystemParams, D: float, gamma_db: np.ndarray) -> list[list[str]]:
    rows = []
    g = 10.0 ** (gamma_db / 10.0)
    for zone, access in CDF_CASES:
        try:
            vals = zone_cdf(p, D, zone, access)(g)
        except ZoneUndefinedError:
            continue
        acc = access or "na"
        rows.extend([fmt(gd), fmt(v), zone, acc, fmt(D)] for gd, v in zip(gamma_db, vals))
    return rows


def run_sweep(doc: dict[str, Any], var: str, rng: tuple[float, float, int], outputs: list[str],
              out_dir: Path | None, seed: int, distance: float, jobs: int = 1,
              mc: McConfig | None = None) -> int:
    start, stop, count = rng
    xs = np.linspace(start, stop, count)
    base = load_params(doc)
    if var == "D" and not (0 < start <= base.R_c and 0 < stop <= base.R_c):
        raise UsageError(f"D range must lie in (0, {base.R_c:g}]")
    if var != "D" and not 0 < distance <= base.R_c:
        raise UsageError(f"--distance must lie in (0, {base.R_c:g}]")

    def point(x: float) -> tuple[SystemParams, float]:
        if var == "D":
            return base, float(x)
        d = dict(doc)
        d[SWEEP_VARS[var]] = float(x)
        return load_params(d), distance

    x_col = "D_m" if var == "D" else var
    status = EXIT_OK
    for output in outputs:
        meta = _metadata_row(doc, seed, output=output, sweep={"var": var, "range": [start, stop, count],
                                                               "distance_m": distance})
        target = None if out_dir is None else out_dir / f"{output}.csv"
        if output == "validate":
            report = validate(load_params(doc), seed, mc or McConfig(seed=seed))
            _emit_report(report, None if out_dir is None else out_dir / "validate.json")
            status = max(status, EXIT_OK if report["passed"] else EXIT_FAIL)
            continue
        if output == "zone-cdf":
            gamma_db = sir_module.gamma_grid_db()

            def cdf_work(x: float) -> list[list[str]]:
                p, D = point(x)
                return [r + ([fmt(x)] if var != "D" else []) for r in _cdf_rows(p, D, gamma_db)]

            header = ["gamma_db", "cdf", "zone", "access", "D_m"] + ([var] if var != "D" else [])
            with ThreadPoolExecutor(jobs) as pool:
                chunks = list(pool.map(cdf_work, xs))
            _write_csv(target, meta, header, [r for c in chunks for r in c])
            continue
        fn = SERIES[output]

        def work(x: float) -> list[list[str]]:
            p, D = point(x)
            return [[fmt(x), fmt(v), label, units] for label, v, units in fn(p, D)]

        with ThreadPoolExecutor(jobs) as pool:
            chunks = list(pool.map(work, xs))
        _write_csv(target, meta, [x_col, "value", "series_label", "units"],
                   [r for c in chunks for r in c])
    return status


# ---------------------------------------------------------------------------
# Validation suite
# ---------------------------------------------------------------------------
def _check(name: str, measured: float, tolerance: float, **detail: Any) -> dict[str, Any]:
    ok = bool(math.isfinite(measured) and measured <= tolerance)
    return {"name": name, "passed": ok, "measured": float(measured),
            "tolerance": tolerance, **detail}


def _backend_equivalence(p: SystemParams, rng: np.random.Generator, n: int) -> list[dict]:
    checks = []
    d_th = derive_constants(p).D_th
    for zone, access in CDF_CASES:
        z = Zone(zone)
        acc = sir_module.normalize_access(z, access)
        if not closed_form_available(p, z, acc):
            continue
        worst = 0.0
        for _ in range(n):
            if z in (Zone.A, Zone.B):
                D = float(rng.uniform(0.05, 1.0) * d_th)
            else:
                D = float(rng.uniform(d_th * 1.001, p.R_c))
            g = 10.0 ** (rng.uniform(-40.0, 60.0) / 10.0)
            a = SirCdf(p, D, z, acc, "closed")(g)
            b = SirCdf(p, D, z, acc, "quadrature")(g)
            worst = max(worst, abs(a - b))
        checks.append(_check(f"backend_equivalence/{zone}/{acc.value}", worst, 1e-8))
    return checks


def _special_functions(rng: np.random.Generator, n: int) -> list[dict]:
    worst_h = 0.0
    for _ in range(n):
        s = float(rng.uniform(2.5, 6.0))
        x = float(10.0 ** rng.uniform(-3.0, 3.0))
        ref, _ = integrate.quad(lambda v: 1.0 / (1.0 + x * v ** (s / 2.0)), 0.0, 1.0,
                                epsabs=0.0, epsrel=1e-13, limit=200)
        worst_h = max(worst_h, abs(hyp2f1_neg(s, x) - ref) / ref)
    worst_e = 0.0
    for _ in range(n):
        x = float(rng.uniform(-30.0, 30.0))
        if abs(x) < 1e-3:
            continue
        ref = special.expi(x)
        worst_e = max(worst_e, abs(expint_ei(x).real - ref) / abs(ref))
    return [
        _check("special/hyp2f1_neg", worst_h, 1e-9),
        _check("special/expint_ei_real", worst_e, 1e-9),
        _check("special/expint_ei_at_1", abs(expint_ei(1.0).real - 1.8951178163559368), 1e-9),
    ]


def _mc_oracle(p: SystemParams, mc: McConfig) -> list[dict]:
    d_th = derive_constants(p).D_th
    distances = [d for d in (100.0, 300.0, 450.0) if d <= p.R_c]
    cases = []
    for D in distances:
        for zone, access in CDF_CASES:
            inner = Zone(zone) in (Zone.A, Zone.B)
            if inner == (D <= d_th):
                cases.append((zone, access, D))
    samples = simulate_cases(p, mc, cases)
    out = []
    for (zone, access, D), s in zip(cases, samples):
        analytic = zone_cdf(p, D, zone, access)(mc.gamma_grid)
        dist = sup_distance(ecdf(s.sir, mc.gamma_grid), analytic)
        out.append(_check(f"mc_oracle/{zone}/{access or 'na'}/D={D:g}", dist, 0.02))
    return out


def _eta_vs_grid(p: SystemParams, rng: np.random.Generator, n: int) -> list[dict]:
    d_th = derive_constants(p).D_th
    worst = 0.0
    for _ in range(n):
        D = float(rng.uniform(d_th * 1.001, p.R_c))
        a, b = optimal_eta(p, D), grid_search_eta(p, D, 1e-3)
        if a.feasible != b.feasible:
            worst = math.inf
        elif a.feasible:
            worst = max(worst, abs(a.eta_star - b.eta_star))
    return [_check("shared/eta_vs_grid", worst, 1e-3)]


def _slot_fractions(p: SystemParams, rng: np.random.Generator, n: int) -> list[dict]:
    d_th = derive_constants(p).D_th
    worst = 0.0
    for _ in range(n):
        D = float(rng.uniform(1.0, p.R_c))
        ref = slot_fractions_from_counts(p, D)
        if D <= d_th:
            pairs = [(rho_b_closed(p, D), ref["rho_b_closed"]), (rho_b_open(p, D), ref["rho_b_open"])]
        else:
            pairs = [(rho_o(p, D), ref["rho_o"]), (rho_i(p, D), ref["rho_i"])]
        worst = max([worst] + [abs(a - b) for a, b in pairs])
    gap = 0.0
    for D in np.linspace(d_th * 1.01, p.R_c, 5):
        lhs, rhs = throughput_gap_identity(p, float(D))
        gap = max(gap, abs(lhs - rhs))
    return [_check("throughput/slot_fractions", worst, 1e-12),
            _check("throughput/gap_identity", gap, 1e-12)]


def validate(p: SystemParams, seed: int, mc: McConfig, n_random: int = 40) -> dict[str, Any]:
    """Run every oracle check and return a JSON-serialisable report."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(7,)))
    checks = []
    checks += _special_functions(rng, n_random)
    checks += _backend_equivalence(p, rng, n_random)
    checks += _slot_fractions(p, rng, n_random)
    checks += _eta_vs_grid(p, rng, n_random)
    checks += _mc_oracle(p, mc)
    return {"passed": all(c["passed"] for c in checks), "seed": seed,
            "config": p.to_config(), "mc": {"n_drops": mc.n_drops, "n_fading": mc.n_fading,
                                            "window_radius": mc.window(p)},
            "checks": checks}


def _emit_report(report: dict[str, Any], path: Path | None) -> None:
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


@contextlib.contextmanager
def injected_fault(name: str | None):
    """Test hook: swap a special function used by the closed forms for a wrong one."""
    if not name:
        yield
        return
    if name != "hyp2f1":
        raise UsageError(f"unknown fault {name!r}")
    original = sir_module.hyp2f1_neg
    sir_module.hyp2f1_neg = lambda s, x: original(s, x) * (1.0 + 1e-3)
    try:
        yield
    finally:
        sir_module.hyp2f1_neg = original


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------
def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="JSON config file (default: reference parameters)")
    sp.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                    help="override one config key; repeatable")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="RNG seed for Monte Carlo")
    sp.add_argument("--out", help="output path (directory for sweep); default stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="femtoaccess",
                                 description="Femtocell access-control throughput models.")
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="sweep one variable and write CSV datasets")
    _common(sw)
    sw.add_argument("--var", choices=list(SWEEP_VARS), default="D")
    sw.add_argument("--range", required=True, help="start,stop,count (inclusive linspace)")
    sw.add_argument("--outputs", default="tier-throughput",
                    help="comma-separated subset of: " + ", ".join(OUTPUTS))
    sw.add_argument("--distance", type=float, default=300.0,
                    help="FAP-MBS distance in m when --var is not D")
    sw.add_argument("--jobs", type=int, default=1, help="worker threads for sweep points")
    sw.add_argument("--mc-drops", type=int, default=100_000)

    cd = sub.add_parser("cdf", help="SIR CDF of one zone on a dB grid")
    _common(cd)
    cd.add_argument("--zone", required=True, choices=["Fa", "Fb", "Fi", "Fo"])
    cd.add_argument("--access", choices=["closed", "open"])
    cd.add_argument("--distance", type=float, required=True, help="FAP-MBS distance in m")
    cd.add_argument("--gamma-range", default="-40,60,201", help="start_db,stop_db,count")
    cd.add_argument("--backend", choices=["auto", "closed", "quadrature"], default="auto")
    cd.add_argument("--source", choices=["analytic", "mc"], default="analytic")
    cd.add_argument("--mc-drops", type=int, default=100_000)

    et = sub.add_parser("eta", help="optimal shared-access slot fraction at one distance")
    _common(et)
    et.add_argument("--distance", type=float, required=True)
    et.add_argument("--grid", type=float, help="also run a grid search at this resolution")

    va = sub.add_parser("validate", help="run the oracle checks; exit 1 on any failure")
    _common(va)
    va.add_argument("--mc-drops", type=int, default=100_000)
    va.add_argument("--n-random", type=int, default=40, help="random draws per analytic check")
    va.add_argument("--inject-fault", help=argparse.SUPPRESS)
    return ap


def _cmd_cdf(args, doc: dict[str, Any]) -> int:
    p = load_params(doc)
    start, stop, count = parse_range(args.gamma_range)
    gamma_db = np.linspace(start, stop, count)
    g = 10.0 ** (gamma_db / 10.0)
    zone = Zone(args.zone)
    access = sir_module.normalize_access(zone, args.access)
    if args.source == "analytic":
        vals = SirCdf(p, args.distance, zone, access, args.backend)(g)
    else:
        mc = McConfig(seed=args.seed, n_drops=args.mc_drops, gamma_grid=g)
        vals = ecdf(simulate_cases(p, mc, [(zone, access, args.distance)])[0].sir, g)
    meta = _metadata_row(doc, args.seed, output="zone-cdf", source=args.source,
                         distance_m=args.distance)
    rows = [[fmt(d), fmt(v), zone.value, access.value] for d, v in zip(gamma_db, vals)]
    _write_csv(Path(args.out) if args.out else None, meta, ["gamma_db", "cdf", "zone", "access"], rows)
    return EXIT_OK


def _cmd_eta(args, doc: dict[str, Any]) -> int:
    p = load_params(doc)
    if not 0 < args.distance <= p.R_c:
        raise UsageError(f"--distance must lie in (0, {p.R_c:g}]")
    res = {"optimal": optimal_eta(p, args.distance).__dict__}
    if args.grid:
        res["grid"] = grid_search_eta(p, args.distance, args.grid).__dict__
    res["distance_m"] = args.distance
    res["config"] = doc
    text = json.dumps(res, sort_keys=True, indent=2, default=str) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        doc = load_document(args.config, parse_overrides(args.override))
        if args.command == "sweep":
            outputs = [o.strip() for o in args.outputs.split(",") if o.strip()]
            bad = [o for o in outputs if o not in OUTPUTS]
            if bad or not outputs:
                raise UsageError(f"unknown outputs: {', '.join(bad) or '(none)'}")
            if args.jobs < 1:
                raise UsageError("--jobs must be >= 1")
            mc = McConfig(seed=args.seed, n_drops=args.mc_drops)
            return run_sweep(doc, args.var, parse_range(args.range), outputs,
                             Path(args.out) if args.out else None, args.seed,
                             args.distance, args.jobs, mc)
        if args.command == "cdf":
            return _cmd_cdf(args, doc)
        if args.command == "eta":
            return _cmd_eta(args, doc)
        mc = McConfig(seed=args.seed, n_drops=args.mc_drops)
        with injected_fault(args.inject_fault):
            report = validate(load_params(doc), args.seed, mc, args.n_random)
        _emit_report(report, Path(args.out) if args.out else None)
        return EXIT_OK if report["passed"] else EXIT_FAIL
    except (UsageError, ConfigError, ZoneUndefinedError, ValueError) as exc:
        print(f"femtoaccess: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

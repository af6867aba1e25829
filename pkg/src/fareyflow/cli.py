"""fareyflow command line.

Data goes to the output file; stdout gets one summary line.  Exit status is
0 on success, 2 on invalid input and 3 when orbits exhaust the step budget.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import est as est_mod
from . import section, stats
from .congruence import CosetSubset, SubsetError, parse_subset
from .farey import DomainError, as_fraction
from .stats import fmt
from .stream import as_interval, collect_gaps

DEFAULT_SEED = 20_240_601
COMMANDS = ("gaps", "repulsion", "hspacing", "numerators", "equidist",
            "section-mc", "est", "density")


class UsageError(ValueError):
    pass


def resolve_seed(flag: int | None) -> int:
    """--seed wins, then FAREY_SEED, then the built-in constant."""
    if flag is not None:
        return flag
    env = os.environ.get("FAREY_SEED")
    if env:
        try:
            return int(env, 0)
        except ValueError as exc:
            raise UsageError(f"FAREY_SEED={env!r} is not an integer") from exc
    return DEFAULT_SEED


def _interval(text: str):
    try:
        lo, hi = text.split(",")
        return as_interval((lo, hi))
    except ValueError as exc:
        raise UsageError(f"--I expects 'lo,hi', got {text!r}: {exc}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma separated integers, got {text!r}") from exc


def _subset(args, m: int | None = None) -> CosetSubset:
    m = args.m if m is None else m
    return parse_subset(args.subset, int(m) if m is not None else None)


def _out(args, suffix: str = "") -> Path:
    if args.output:
        p = Path(args.output)
        return p.with_name(p.stem + suffix + p.suffix) if suffix else p
    return Path(f"{args.command}{suffix}.{args.format}")


def _grid(lo: float, hi: float, points: int) -> np.ndarray:
    return np.linspace(lo, hi, points)


# ---------------------------------------------------------------- commands


def cmd_gaps(args) -> str:
    M = _subset(args)
    g = collect_gaps(args.Q, args.I, M, args.threads)
    cdf = stats.revised_gap_cdf(g, args.Q)
    grid = _grid(0.0, cdf.quantile(0.99), args.points)
    path = _out(args)
    if args.format == "csv":
        stats.write_cdf_csv(path, cdf, grid)
    else:
        stats.write_json(path, {"Q": args.Q, "m": M.m, "subset": args.subset,
                                "N": cdf.n, "min_gap": cdf.min,
                                "cdf": cdf.table(grid).tolist()})
    return f"gaps Q={args.Q} m={M.m} subset={args.subset} N={cdf.n} min_gap={fmt(cdf.min)} -> {path}"


def _repulsion_payload(args, M, g) -> dict:
    rep = stats.repulsion_estimate(g, args.Q, M)
    N = len(g) - 1
    unrev = rep.min_revised_gap * stats.unrevised_scale(N, g.span, args.Q)
    dev = abs(unrev / rep.predicted - 1.0) if rep.predicted else None
    return {"Q": args.Q, "m": M.m, "subset": args.subset, "N": N,
            "min_gap": rep.min_revised_gap, "min_unrevised_gap": unrev,
            "predicted_repulsion": rep.predicted, "deviation": dev}


def cmd_repulsion(args) -> str:
    M = _subset(args)
    g = collect_gaps(args.Q, args.I, M, args.threads)
    payload = _repulsion_payload(args, M, g)
    path = _out(args)
    if args.format == "json":
        stats.write_json(path, payload)
    else:
        _write_rows(path, list(payload), [list(payload.values())])
    pred = payload["predicted_repulsion"]
    return (f"repulsion Q={args.Q} m={M.m} min_revised={fmt(payload['min_gap'])} "
            f"min_unrevised={fmt(payload['min_unrevised_gap'])} "
            f"predicted={fmt(pred) if pred is not None else 'n/a'} -> {path}")


def cmd_hspacing(args) -> str:
    M = _subset(args)
    g = collect_gaps(args.Q, args.I, M, args.threads)
    V = stats.h_spacing_matrix(g, args.h)
    if V.shape[0] == 0:
        raise UsageError("too few fractions for the requested h")
    top = float(np.quantile(V.max(axis=1), 0.99))
    grid = _grid(0.0, top, args.points)
    vals = [stats.joint_cdf(V, [c] * args.h) for c in grid]
    path = _out(args)
    if args.format == "csv":
        _write_rows(path, ["c", "joint_cdf"], [[fmt(c), fmt(v)] for c, v in zip(grid, vals)])
    else:
        stats.write_json(path, {"Q": args.Q, "m": M.m, "subset": args.subset, "h": args.h,
                                "windows": int(V.shape[0]),
                                "joint_cdf": [[c, v] for c, v in zip(grid, vals)]})
    return f"hspacing Q={args.Q} m={M.m} h={args.h} windows={V.shape[0]} -> {path}"


def cmd_numerators(args) -> str:
    M = _subset(args)
    g = collect_gaps(args.Q, args.I, M, args.threads)
    hist = stats.numerator_histogram(g)
    path = _out(args)
    if args.format == "csv":
        _write_rows(path, ["c3", "frequency", "frequency_float"],
                    [[k, str(v), fmt(float(v))] for k, v in hist.items()])
    else:
        stats.write_json(path, {"Q": args.Q, "m": M.m, "subset": args.subset,
                                "N": len(g) - 1, "frequencies": hist})
    return f"numerators Q={args.Q} m={M.m} distinct={len(hist)} max_c3={max(hist)} -> {path}"


def cmd_equidist(args) -> str:
    M = _subset(args)
    rep = stats.equidistribution_report(args.Q, M, args.bins)
    path = _out(args)
    edges = [Fraction(k, args.bins) for k in range(args.bins + 1)]
    if args.format == "csv":
        _write_rows(path, ["bin_lo", "bin_hi", "count"],
                    [[str(lo), str(hi), c] for lo, hi, c in zip(edges, edges[1:], rep.counts)])
    else:
        stats.write_json(path, {"Q": args.Q, "m": M.m, "subset": args.subset,
                                "N": sum(rep.counts), "counts": list(rep.counts),
                                "deviation": rep.deviation})
    return f"equidist Q={args.Q} m={M.m} bins={args.bins} deviation={fmt(rep.deviation)} -> {path}"


def cmd_section_mc(args) -> str:
    M = _subset(args)
    rng = np.random.default_rng(args.seed)
    res = section.mc_return_times(M, args.samples, rng, args.max_steps, args.threads)
    cdf = stats.EmpiricalCDF(res.times)
    thr = cdf.quantile(1e-4)
    grid = _grid(0.0, args.c_max, args.points)
    path = _out(args)
    if args.format == "csv":
        stats.write_cdf_csv(path, cdf, grid)
    else:
        stats.write_json(path, {"m": M.m, "subset": args.subset, "samples": args.samples,
                                "truncated": res.truncated, "cdf": cdf.table(grid).tolist(),
                                "support_threshold": thr})
    return (f"section-mc m={M.m} subset={args.subset} samples={args.samples} "
            f"truncated={res.truncated} support_threshold={fmt(thr)} -> {path}")


def cmd_est(args) -> str:
    M = _subset(args)
    alpha, c = as_fraction(args.alpha), as_fraction(args.c)
    grid = _int_list(args.n)
    conv = est_mod.est_convergence(alpha, c, M, args.I, grid)
    K = est_mod.detect_overlap_depth(alpha, c, M, grid[-1])
    K_used = K if args.K is None else args.K
    mc = err = None
    if args.samples > 0:
        rng = np.random.default_rng(args.seed)
        mc, err = est_mod.est_limit_section_mc(alpha, c, M, K_used, args.samples, rng,
                                               args.max_steps, args.threads)
    path = _out(args)
    rows, prev = [], None
    for n, lam in conv.table:
        rows.append([n, lam, None if prev is None else lam - prev])
        prev = lam
    if args.format == "csv":
        _write_rows(path, ["n", "lambda", "delta"],
                    [[n, fmt(float(l)), "" if d is None else fmt(float(d))] for n, l, d in rows])
    else:
        stats.write_json(path, {
            "alpha": str(alpha), "c": str(c), "m": M.m, "subset": args.subset,
            "I": [str(x) for x in args.I],
            "table": [[n, float(l), None if d is None else float(d)] for n, l, d in rows],
            "limit_estimate": float(conv.limit), "K_detected": K, "K_used": K_used,
            "section_mc_estimate": mc, "mc_stderr": err})
    tail = f" section_mc={fmt(mc)}±{fmt(err)}" if mc is not None else ""
    return f"est alpha={alpha} c={c} m={M.m} limit={fmt(float(conv.limit))} K={K}{tail} -> {path}"


def cmd_density(args) -> str:
    ms = _int_list(str(args.m))
    written, masses = [], []
    tables = {}
    for m in ms:
        M = _subset(args, m)
        g = collect_gaps(args.Q, args.I, M, args.threads)
        v = stats.revised_values(g, args.Q)
        hist = stats.default_histogram(v, args.bins)
        masses.append(float(np.mean(v <= 0.95)))
        if args.format == "csv":
            path = _out(args, f"_m{m}" if len(ms) > 1 else "")
            stats.write_density_csv(path, hist)
            written.append(str(path))
        else:
            tables[str(m)] = {"N": int(v.size), "coverage": hist.coverage,
                              "bins": [[lo, hi, d] for lo, hi, d in
                                       zip(hist.edges[:-1], hist.edges[1:], hist.values())]}
    if args.format == "json":
        path = _out(args)
        stats.write_json(path, {"Q": args.Q, "subset": args.subset, "densities": tables})
        written.append(str(path))
    mass = " ".join(f"m{m}:{fmt(x)}" for m, x in zip(ms, masses))
    return f"density Q={args.Q} mass_below_0.95 {mass} -> {', '.join(written)}"


def _write_rows(path, header, rows) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(["" if x is None else (fmt(x) if isinstance(x, float) else x) for x in r])


HANDLERS = {
    "gaps": cmd_gaps, "repulsion": cmd_repulsion, "hspacing": cmd_hspacing,
    "numerators": cmd_numerators, "equidist": cmd_equidist,
    "section-mc": cmd_section_mc, "est": cmd_est, "density": cmd_density,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fareyflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, m_type=int):
        sp.add_argument("--m", type=m_type, default=1, help="modulus")
        sp.add_argument("--subset", default="all",
                        help="den≡r, num≢r, all, m:n1,n2;..., or a matrix file")
        sp.add_argument("--I", type=_interval, default=(Fraction(0), Fraction(1)),
                        help="closed interval 'lo,hi' inside [0,1]")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--output", "-o")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--seed", type=int)

    for name in ("gaps", "repulsion", "hspacing", "numerators", "equidist", "density"):
        sp = sub.add_parser(name)
        common(sp, str if name == "density" else int)
        sp.add_argument("--Q", type=int, required=True)
        if name in ("gaps", "hspacing"):
            sp.add_argument("--points", type=int, default=200, help="CDF grid size")
        if name == "hspacing":
            sp.add_argument("--h", type=int, default=2)
        if name in ("equidist", "density"):
            sp.add_argument("--bins", type=int, default=10 if name == "equidist" else 200)

    sp = sub.add_parser("section-mc")
    common(sp)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--max-steps", type=int, default=section.DEFAULT_MAX_STEPS)
    sp.add_argument("--c-max", type=float, default=20.0)
    sp.add_argument("--points", type=int, default=200)

    sp = sub.add_parser("est")
    common(sp)
    sp.add_argument("--n", required=True, help="increasing n grid, e.g. 500,1000,2000")
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--c", required=True)
    sp.add_argument("--K", type=int, help="override the detected overlap depth")
    sp.add_argument("--samples", type=int, default=0, help="section MC samples (0 skips)")
    sp.add_argument("--max-steps", type=int, default=section.DEFAULT_MAX_STEPS)
    return p


def _validate(args) -> None:
    if getattr(args, "Q", 1) < 1:
        raise UsageError("--Q must be >= 1")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    for name in ("samples", "bins", "h", "points"):
        v = getattr(args, name, None)
        if v is not None and v < (0 if name == "samples" else 1):
            raise UsageError(f"--{name} must be positive")
    if args.command == "section-mc" and args.samples < 1:
        raise UsageError("--samples must be >= 1")


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports bad flags with status 2
        return int(exc.code or 0)
    try:
        args.seed = resolve_seed(args.seed)
        _validate(args)
        line = HANDLERS[args.command](args)
    except section.TruncationError as exc:
        print(f"error: TruncationError: {exc}", file=sys.stderr)
        return 3
    except (SubsetError, DomainError, UsageError, ValueError, OSError, OverflowError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    print(line)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

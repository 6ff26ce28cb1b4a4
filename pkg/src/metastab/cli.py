"""Command-line interface.

Exit codes: 0 success, 2 input or validation error, 3 internal error,
4 critical time scale, 5 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from .asymptotics import Relation, compare_scale, make
from .chain_model import ChainSpec, TimeScale, load, repair_constant, repair_zero_rates, validate
from .errors import (
    ChainValidationError,
    CriticalTimeScale,
    LadderRangeError,
    MetastabError,
    NonFinite,
    NonPositiveCoefficient,
    ParseError,
)
from .hierarchy import build_hierarchy, hierarchy_report
from .metastable import metastable_all, metastable_report
from .verify import TransientSolverConfig, check_ladder, compare

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3
EXIT_CRITICAL = 4
EXIT_VERIFY = 5


class InputError(Exception):
    pass


def parse_chain_file(path) -> ChainSpec:
    """Read a chain file; structural problems raise :class:`ParseError`.

    Bad coefficients raise :class:`ChainValidationError`.  Zero rates and
    duplicate labels are checked later so that ``--repair`` can act first.
    """
    try:
        return load(path)
    except (NonPositiveCoefficient, NonFinite) as exc:
        raise ChainValidationError([exc]) from None
    except FileNotFoundError:
        raise ParseError(str(path), "no such file") from None
    except UnicodeDecodeError as exc:
        raise ParseError(str(path), f"not valid UTF-8 ({exc.reason})") from None


def _load_spec(args, err) -> ChainSpec:
    spec = parse_chain_file(args.spec)
    args.repair_gamma = None
    if args.repair:
        n_zero = len(list(_zero_pairs(spec)))
        if n_zero:
            args.repair_gamma = repair_constant(spec)
            spec = repair_zero_rates(spec)
            print(
                f"repair: replaced {n_zero} zero rate(s) by exp(-{args.repair_gamma:g}/eps)",
                file=err,
            )
    problems = validate(spec)
    if problems:
        raise ChainValidationError(problems)
    return spec


def _zero_pairs(spec):
    for i in range(spec.N):
        for j in range(spec.N):
            if i != j and spec.rates[i][j].is_zero:
                yield i, j


def _time(args, spec, err) -> TimeScale:
    try:
        ts = TimeScale.parse(args.time)
    except (ValueError, MetastabError) as exc:
        raise InputError(f"--time: {exc}") from None
    gamma = args.repair_gamma
    if gamma is not None:
        rel = compare_scale(ts.order, make(1.0, 0.0, -gamma)).relation
        if rel is not Relation.MUCH_SMALLER:
            print(
                f"warning: time scale {ts} is not negligible against exp({gamma:g}/eps); "
                "repaired rates may matter",
                file=err,
            )
    return ts


def _starts(args, spec) -> list:
    if args.start in (None, "all"):
        return list(range(spec.N))
    try:
        return [spec.index(args.start)]
    except KeyError as exc:
        raise InputError(str(exc)) from None


def _fmt(p: float) -> str:
    return f"{p:.12g}"


def _write(args, text: str, out) -> None:
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def _hierarchy_text(h) -> str:
    lines = [f"states: {' '.join(h.spec.state_labels)}", f"rho = {h.rho}; n = {list(h.sizes)}"]
    for lv in h.levels:
        lines.append(f"rank {lv.rank}:")
        for k in range(lv.n):
            T = "inf" if lv.T is None else str(lv.T[k])
            lines.append(f"  cluster {k} {{{', '.join(h.labels(lv.rank, k))}}}  T = {T}")
        for k, m in sorted(lv.mu.items()):
            lim = ", ".join(f"{i}: {_fmt(v)}" for i, (_, v) in sorted(m.items()))
            lines.append(f"  mu[{k}] limits: {lim}")
    return "\n".join(lines) + "\n"


def _nu_text(spec, starts, rows, ts) -> str:
    lines = [f"time scale t(eps) = {ts}", "from \\ to: " + " ".join(spec.state_labels)]
    for i, row in zip(starts, rows):
        lines.append(f"{spec.state_labels[i]}: " + " ".join(_fmt(p) for p in row))
    return "\n".join(lines) + "\n"


def cmd_hierarchy(args, out, err) -> int:
    spec = _load_spec(args, err)
    h = build_hierarchy(spec)
    if args.format == "text":
        _write(args, _hierarchy_text(h), out)
    else:
        _write(args, json.dumps(hierarchy_report(h), indent=2) + "\n", out)
    return EXIT_OK


def cmd_metastable(args, out, err) -> int:
    spec = _load_spec(args, err)
    ts = _time(args, spec, err)
    starts = _starts(args, spec)
    h = build_hierarchy(spec)
    md = metastable_all(h, ts)
    if args.format == "text":
        _write(args, _nu_text(spec, starts, md.nu[starts], ts), out)
    else:
        _write(args, json.dumps(metastable_report(h, md, starts), indent=2) + "\n", out)
    return EXIT_OK


def cmd_verify(args, out, err) -> int:
    spec = _load_spec(args, err)
    ts = _time(args, spec, err)
    starts = _starts(args, spec)
    try:
        ladder = tuple(float(e) for e in args.eps.split(","))
        cfg = TransientSolverConfig(
            ladder, method=args.method, paths=args.paths, jump_cap=args.jump_cap, rng_seed=args.seed
        )
    except ValueError as exc:
        raise InputError(f"--eps: {exc}") from None
    check_ladder(spec, ts, cfg.eps_ladder)
    h = build_hierarchy(spec)
    md = metastable_all(h, ts)
    report = compare(h, ts, md, cfg, starts)
    labels = spec.state_labels
    if args.format == "csv":
        _write(args, report.to_csv(labels), out)
    elif args.format == "text":
        lines = [f"time scale t(eps) = {ts}; method {cfg.method}"]
        for e, errv in zip(report.eps, report.errors):
            lines.append(f"eps={e:g}  max error {errv:.3e}")
        lines.append(f"monotone: {report.monotone}; final error {report.final_error:.3e} (tol {args.tol:g})")
        _write(args, "\n".join(lines) + "\n", out)
    else:
        doc = report.to_dict(labels)
        doc["tol"] = args.tol
        doc["passed"] = report.final_error <= args.tol and report.monotone
        _write(args, json.dumps(doc, indent=2) + "\n", out)
    if report.final_error <= args.tol and report.monotone:
        return EXIT_OK
    return EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="metastab", description="Metastable distributions of chains with rare transitions")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, formats):
        p.add_argument("spec", help="chain file (JSON)")
        p.add_argument("--repair", action="store_true", help="replace zero rates by negligible ones")
        p.add_argument("--format", choices=formats, default="json")
        p.add_argument("--output", help="write to this path instead of stdout")

    p = sub.add_parser("hierarchy", help="build and print the hierarchy")
    common(p, ["json", "text"])
    p.set_defaults(func=cmd_hierarchy)

    p = sub.add_parser("metastable", help="metastable distribution at a time scale")
    common(p, ["json", "text"])
    p.add_argument("--time", required=True, metavar="C,B,LAMBDA", help="t(eps) = C eps^B exp(LAMBDA/eps)")
    p.add_argument("--from", dest="start", default="all", help="start state label or 'all'")
    p.set_defaults(func=cmd_metastable)

    p = sub.add_parser("verify", help="check predictions against numerics at concrete eps")
    common(p, ["json", "text", "csv"])
    p.add_argument("--time", required=True, metavar="C,B,LAMBDA")
    p.add_argument("--eps", required=True, help="decreasing comma-separated eps ladder")
    p.add_argument("--from", dest="start", default="all")
    p.add_argument("--method", choices=["expm", "mc"], default="expm")
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--jump-cap", type=int, default=10_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=0.05)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args, out, err)
    except CriticalTimeScale as exc:
        print("critical time scale; commensurate inverse transition rates:", file=err)
        for r, k, T in exc.entries:
            print(f"  rank {r} cluster {k}: T = {T}", file=err)
        return EXIT_CRITICAL
    except (ParseError, ChainValidationError, LadderRangeError, InputError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT
    except (AssertionError, MetastabError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=err)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

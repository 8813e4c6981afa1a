"""Command-line workbench: validate, traj, verify, table, cycles, identities, graph.

Outputs go to stdout (or --out PATH) and are deterministic for a fixed
command line; worker count and wall time never change report bytes, so a
human-readable run header goes to stderr instead.  Numeric bounds accept
scientific notation parsed to exact integers (1e7 -> 10000000).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from decimal import Decimal, InvalidOperation

from gcollatz import __version__
from gcollatz.core import DomainError, Triplet, validate_triplet
from gcollatz.dynamics import (
    DEFAULT_BLOCK,
    DEFAULT_BUDGET,
    find_cycles_in_range,
    max_stopping_scan,
    trajectory,
    verify_range,
)
from gcollatz.family import (
    attractor_minima,
    identify_pq,
    make_pq,
    registry_diagnostics,
)
from gcollatz.identities import PreconditionError, check_identity
from gcollatz.invgraph import build_inverse_graph, export_dot, export_json

WORKERS_ENV = "GCOLLATZ_WORKERS"

# Reference maxima for the comparison column of the table command, indexed
# by p (bundled from prior published runs at n_max = 1e7).
REFERENCE_MAX_SIGMA = {
    0: 246, 1: 213, 2: 268, 3: 374, 4: 349, 5: 731, 6: 737, 7: 818,
    8: 1444, 9: 3152, 10: 3638, 11: 3639, 12: 4108, 13: 8205, 14: 16398,
    15: 32783, 16: 65552, 17: 131089, 18: 262162, 19: 131091, 20: 1048596,
    21: 2097173, 22: 4194326, 23: 8388631, 24: 16777240, 25: 33554457,
}


def exact_int(text: str) -> int:
    """Parse '123', '1e7', '6.5e9' to an exact int; reject inexact values."""
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value != value.to_integral_value():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def int_set(text: str) -> frozenset[int]:
    return frozenset(exact_int(part) for part in text.split(",") if part.strip())


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


class SystemExit2(SystemExit):
    """Usage error: print the message and exit with status 2."""

    def __init__(self, message: str):
        print(f"error: {message}", file=sys.stderr)
        super().__init__(2)


def _add_triplet_args(sp):
    sp.add_argument("--p", type=int, help="family exponent p (use with --q)")
    sp.add_argument("--q", type=int, help="family exponent q (use with --p)")
    sp.add_argument("--d", type=exact_int, help="modulus d of an explicit triplet")
    sp.add_argument("--alpha", type=exact_int, help="multiplier alpha")
    sp.add_argument("--beta", type=exact_int, help="offset beta (may be negative)")
    sp.add_argument("--kappa", type=int, default=1, choices=(1, -1), help="residue sign kappa0")


def _resolve_triplet(args) -> Triplet:
    family = args.p is not None or args.q is not None
    explicit = args.d is not None or args.alpha is not None or args.beta is not None
    if family == explicit:
        raise SystemExit2("choose exactly one triplet selector: --p/--q or --d/--alpha/--beta")
    if family:
        if args.p is None or args.q is None:
            raise SystemExit2("family selector needs both --p and --q")
        return make_pq(args.p, args.q)
    if args.d is None or args.alpha is None or args.beta is None:
        raise SystemExit2("explicit selector needs --d, --alpha and --beta")
    return validate_triplet(args.d, args.alpha, args.beta, args.kappa)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(doc: dict, out: str | None) -> None:
    doc["artifact_version"] = __version__
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", out)


def _header(line: str) -> None:
    print(f"# {line}", file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    params = {"p": args.p, "q": args.q, "d": args.d, "alpha": args.alpha,
              "beta": args.beta, "kappa0": args.kappa}
    try:
        t = _resolve_triplet(args)
    except DomainError as err:
        _dump(
            {
                "schema": "gcollatz.validate/1",
                "valid": False,
                "error": {"code": err.code, "message": str(err)},
                "params": {k: v for k, v in params.items() if v is not None},
            },
            args.out,
        )
        return 1
    pq = identify_pq(t)
    doc = {
        "schema": "gcollatz.validate/1",
        "valid": True,
        "triplet": t.as_dict(),
        "label": t.label,
        "decomposition": None
        if t.decomposition is None
        else {"lambda0": t.decomposition.lambda0, "nu0": t.decomposition.nu0},
        "family": None if pq is None else {"p": pq[0], "q": pq[1]},
    }
    if pq is not None:
        doc["attractor_minima"] = sorted(attractor_minima(*pq))
        notes = [s for s in registry_diagnostics() if f"(p={pq[0]},q={pq[1]})" in s]
        if notes:
            doc["diagnostics"] = notes
    _dump(doc, args.out)
    return 0


def cmd_traj(args) -> int:
    t = _resolve_triplet(args)
    if args.descend:
        stop = "descent"
    elif args.stop is not None:
        stop = args.stop
    else:
        pq = identify_pq(t)
        stop = attractor_minima(*pq) if pq is not None else None
    tr = trajectory(t, args.n, stop=stop, budget=args.budget)
    _header(f"triplet={t.label} n={args.n} budget={args.budget}")
    if args.format == "json":
        _dump(
            {
                "schema": "gcollatz.trajectory/1",
                "triplet": t.as_dict(),
                "label": t.label,
                "start": tr.start,
                "stop": sorted(stop) if isinstance(stop, frozenset) else stop,
                "values": list(tr.values),
                "terminal": tr.terminal,
                "stopped_at": tr.stopped_at,
            },
            args.out,
        )
    else:
        body = "\n".join(str(v) for v in tr.values)
        _emit(body + f"\n# terminal={tr.terminal} steps={len(tr.values) - 1}\n", args.out)
    return 0


def cmd_verify(args) -> int:
    t = _resolve_triplet(args)
    minima = args.minima
    if minima is None:
        pq = identify_pq(t)
        if pq is not None:
            minima = attractor_minima(*pq)
        elif args.mode == "attractor":
            raise SystemExit2("attractor mode needs --minima for a non-family triplet")
    _header(
        f"triplet={t.label} range=[{args.start},{args.to}] mode={args.mode} "
        f"budget={args.budget} block={args.block_size} workers={args.workers}"
    )
    rep = verify_range(
        t,
        args.start,
        args.to,
        mode=args.mode,
        minima=minima,
        budget=args.budget,
        workers=args.workers,
        checkpoint=args.checkpoint,
        block_size=args.block_size,
        sieve=args.sieve,
    )
    if args.format == "csv":
        cols = [
            "label", "n_start", "n_end", "mode", "verified", "failures",
            "max_sigma_n", "max_sigma_steps", "pass",
        ]
        row = [
            rep.triplet.label, rep.n_start, rep.n_end, rep.mode, rep.verified,
            ";".join(map(str, rep.failures)),
            rep.max_sigma[0] if rep.max_sigma else "",
            rep.max_sigma[1] if rep.max_sigma else "",
            rep.passed,
        ]
        _emit(",".join(cols) + "\n" + ",".join(map(str, row)) + "\n", args.out)
    else:
        doc = rep.to_dict(include_timing=args.timing)
        _dump(doc, args.out)
    return 0 if rep.passed else 1


def cmd_table(args) -> int:
    if args.p_max < 0 or args.n_max < 1:
        raise SystemExit2("need --p-max >= 0 and --n-max >= 1")
    _header(
        f"table p<= {args.p_max} n_max={args.n_max} budget={args.budget} workers={args.workers}"
    )
    rows = []
    for p in range(args.p_max + 1):
        scan = max_stopping_scan(p, args.n_max, budget=args.budget, workers=args.workers)
        ref = REFERENCE_MAX_SIGMA.get(p)
        rows.append(
            {
                "p": p,
                "max_sigma": scan.max_sigma,
                "q_at_max": scan.q_at_max,
                "n_at_max": scan.n_at_max,
                "max_sigma_trivial": scan.max_sigma_trivial,
                "q_at_max_trivial": scan.q_at_max_trivial,
                "n_at_max_trivial": scan.n_at_max_trivial,
                "unknown": scan.unknown,
                "reference": ref,
                "matches_reference": None if ref is None else scan.max_sigma == ref,
            }
        )
    if args.format == "json":
        _dump({"schema": "gcollatz.table/1", "n_max": args.n_max,
               "budget": args.budget, "rows": rows}, args.out)
    else:
        cols = list(rows[0].keys())
        lines = [",".join(cols)]
        for r in rows:
            lines.append(",".join("" if r[c] is None else str(r[c]) for c in cols))
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_cycles(args) -> int:
    t = _resolve_triplet(args)
    _header(f"triplet={t.label} n<= {args.to} budget={args.budget}")
    scan = find_cycles_in_range(t, args.to, budget=args.budget)
    _dump(
        {
            "schema": "gcollatz.cycles/1",
            "triplet": t.as_dict(),
            "label": t.label,
            "n_max": args.to,
            "budget": args.budget,
            "cycles": [
                {"omega": c.omega, "length": c.length, "members": list(c.members)}
                for c in scan.cycles
            ],
            "exhausted": list(scan.exhausted),
        },
        args.out,
    )
    return 0


def cmd_identities(args) -> int:
    t = _resolve_triplet(args)
    try:
        rep = check_identity(args.theorem, t, trials=args.trials, seed=args.seed)
    except PreconditionError as err:
        _dump(
            {
                "schema": "gcollatz.identity_report/1",
                "theorem": args.theorem,
                "triplet": t.as_dict(),
                "label": t.label,
                "error": {"code": err.code, "message": str(err)},
                "pass": False,
            },
            args.out,
        )
        return 1
    _dump(rep.to_dict(), args.out)
    return 0 if rep.passed else 1


def cmd_graph(args) -> int:
    t = _resolve_triplet(args)
    g = build_inverse_graph(t, set(args.root), args.depth, max_nodes=args.max_nodes)
    _emit(export_dot(g) if args.format == "dot" else export_json(g), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gcollatz",
        description="Workbench for generalized Collatz triplet maps.",
    )
    ap.add_argument("--version", action="version", version=f"gcollatz {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, triplet=True):
        if triplet:
            _add_triplet_args(sp)
        sp.add_argument("--out", help="write output to PATH instead of stdout")

    sp = sub.add_parser("validate", help="validate a triplet and identify its family")
    common(sp)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("traj", help="print one trajectory")
    common(sp)
    sp.add_argument("--n", type=exact_int, required=True)
    sp.add_argument("--stop", type=int_set, help="comma-separated attractor minima")
    sp.add_argument("--descend", action="store_true", help="stop at the first value below n")
    sp.add_argument("--budget", type=exact_int, default=DEFAULT_BUDGET)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(fn=cmd_traj)

    sp = sub.add_parser("verify", help="certify every seed in a range")
    common(sp)
    sp.add_argument("--from", dest="start", type=exact_int, default=1)
    sp.add_argument("--to", type=exact_int, required=True)
    sp.add_argument("--mode", choices=("descent", "attractor"), default="descent")
    sp.add_argument("--minima", type=int_set, help="override the attractor minima")
    sp.add_argument("--budget", type=exact_int, default=DEFAULT_BUDGET)
    sp.add_argument("--block-size", type=exact_int, default=DEFAULT_BLOCK)
    sp.add_argument("--workers", type=int, default=default_workers())
    sp.add_argument("--checkpoint", help="line-delimited JSON journal for resume")
    sp.add_argument("--sieve", action="store_true",
                    help="certify closed-form residue classes without iterating (descent mode)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--timing", action="store_true", help="include wall_time in the report")
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("table", help="stopping-time records per p with reference comparison")
    sp.add_argument("--p-max", type=int, required=True)
    sp.add_argument("--n-max", type=exact_int, required=True)
    sp.add_argument("--budget", type=exact_int, default=DEFAULT_BUDGET)
    sp.add_argument("--workers", type=int, default=default_workers())
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--out", help="write output to PATH instead of stdout")
    sp.set_defaults(fn=cmd_table)

    sp = sub.add_parser("cycles", help="discover cycles from every seed up to a bound")
    common(sp)
    sp.add_argument("--to", type=exact_int, required=True)
    sp.add_argument("--budget", type=exact_int, default=DEFAULT_BUDGET)
    sp.set_defaults(fn=cmd_cycles)

    sp = sub.add_parser("identities", help="sample a closed-form identity against iteration")
    common(sp)
    sp.add_argument("--theorem", choices=("31", "32", "33"), required=True)
    sp.add_argument("--trials", type=exact_int, default=10**4)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_identities)

    sp = sub.add_parser("graph", help="bounded inverse-orbit graph as DOT or JSON")
    common(sp)
    sp.add_argument("--root", type=exact_int, action="append", required=True)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--max-nodes", type=exact_int, default=10**6)
    sp.add_argument("--format", choices=("dot", "json"), default="dot")
    sp.set_defaults(fn=cmd_graph)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DomainError as err:
        print(f"error [{err.code}]: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

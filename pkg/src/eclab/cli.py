"""Command line front end.

Subcommands: census, pomerance, verify-classes, order-stats, sieve-report.
Exit codes: 0 success, 1 violated invariant (a mathematical identity the
run must satisfy), 2 usage error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .census import (
    decompose_pseudoprimes,
    run_census,
    summarize,
    write_records_csv,
    write_summary_json,
)
from .curves import SingularCurveError, get_curve
from .gl2 import (
    ENUMERATION_CAP,
    class_count_table,
    gl2_order,
    predicted_class_count,
)
from .pseudoprimes import (
    nord_bound,
    order_census,
    order_level_report,
    product_tail_sum,
    tail_sum,
)
from .sieve import build_sieve_report, preset_params

CLASSES_HEADER = "n,r,count,formula_count,match"
ORDERS_HEADER = "m,count,bound,ok"


class UsageError(Exception):
    """Bad arguments detected after argparse (unknown label, y >= z, ...)."""


class InvariantError(Exception):
    """A mathematical identity the run is required to satisfy failed."""


def _add_curve_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--curve", default="37a", help="curve label (default 37a)")
    sub.add_argument(
        "--curve-file",
        default=None,
        help="file of curve lines 'label:a1,a2,a3,a4,a6[,cm=..][,serre=..]' "
        "(default: builtin registry)",
    )
    sub.add_argument("--base", type=int, default=2, help="Fermat base (default 2)")
    sub.add_argument(
        "--strict-fermat",
        action="store_true",
        help="use the b^(n-1) = 1 test instead of b^n = b",
    )


def _add_common_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out", default=".", help="output directory (default .)")
    sub.add_argument(
        "--format",
        choices=("csv", "json"),
        default="csv",
        help="stdout format: csv prints key,value lines; json prints the report",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eclab",
        description="census and verification tools for elliptic-curve "
        "group orders and their Fermat classifications",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("census", help="count points at all p <= x and classify")
    _add_curve_args(p)
    p.add_argument("--x", type=int, required=True, help="census cutoff (primes p <= x)")
    p.add_argument(
        "--threads", type=int, default=None, help="worker processes (default $ECLAB_THREADS or 1)"
    )
    _add_common_args(p)
    p.set_defaults(func=_cmd_census, pomerance=False)

    p = subs.add_parser(
        "pomerance", help="census plus the pseudoprime decomposition report"
    )
    _add_curve_args(p)
    p.add_argument("--x", type=int, required=True, help="census cutoff (primes p <= x)")
    p.add_argument(
        "--threads", type=int, default=None, help="worker processes (default $ECLAB_THREADS or 1)"
    )
    _add_common_args(p)
    p.set_defaults(func=_cmd_census, pomerance=True)

    p = subs.add_parser(
        "verify-classes",
        help="enumerate trace classes of 2x2 matrix groups and check the "
        "closed-form and lifted counts",
    )
    p.add_argument(
        "--cap", type=int, default=ENUMERATION_CAP, help="largest modulus (default 64)"
    )
    _add_common_args(p)
    p.set_defaults(func=_cmd_verify_classes)

    p = subs.add_parser(
        "order-stats", help="multiplicative order statistics of a Fermat base"
    )
    p.add_argument("--base", type=int, default=2, help="Fermat base (default 2)")
    p.add_argument("--t", type=int, default=10_000, help="prime cutoff (default 10000)")
    p.add_argument(
        "--cap", type=int, default=100_000, help="tail-sum cutoff (default 100000)"
    )
    _add_common_args(p)
    p.set_defaults(func=_cmd_order_stats)

    p = subs.add_parser(
        "sieve-report", help="sifting densities, envelopes, and empirical counts"
    )
    _add_curve_args(p)
    p.add_argument("--x", type=int, required=True, help="census cutoff (primes p <= x)")
    p.add_argument(
        "--preset",
        choices=("unconditional", "grh"),
        default="unconditional",
        help="named (y, z) parameter choice (default unconditional)",
    )
    p.add_argument("--y", type=float, default=None, help="sifting floor (overrides preset)")
    p.add_argument("--z", type=float, default=None, help="sifting ceiling (overrides preset)")
    p.add_argument("--s", type=float, default=2.0, help="argument of F(s) (default 2)")
    _add_common_args(p)
    p.set_defaults(func=_cmd_sieve_report)

    return parser


def _load_curve(args):
    if args.base < 2:
        raise UsageError(f"--base must be at least 2, got {args.base}")
    try:
        return get_curve(args.curve, args.curve_file)
    except KeyError as exc:
        raise UsageError(exc.args[0])


def _print_kv(pairs) -> None:
    print("key,value")
    for k, v in pairs:
        print(f"{k},{v}")


def _ensure_out(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _census_invariant_failures(summary) -> list[str]:
    failures = []
    if not summary.meta["partition_ok"]:
        failures.append(
            "partition failed: Q != fermat-passing primes + pseudoprimes + units"
        )
    if not summary.meta["strict_fermat"] and not summary.meta["twin_le_Q"]:
        failures.append("ordering failed: twin exceeds Q under the b^n = b test")
    if summary.s_classes["unclassified"]:
        failures.append(
            f"{summary.s_classes['unclassified']} pseudoprime record(s) "
            "escaped the decomposition"
        )
    if not summary.meta["multiplicity_ceiling_ok"]:
        failures.append("a group-order multiplicity exceeded its prime-window ceiling")
    return failures


def _cmd_census(args) -> int:
    if args.x < 2:
        raise UsageError(f"--x must be at least 2, got {args.x}")
    curve = _load_curve(args)
    out = _ensure_out(args.out)
    result = run_census(
        curve, args.x, base=args.base, strict=args.strict_fermat, threads=args.threads
    )
    extra = None
    decomposition = decompose_pseudoprimes(result)
    if args.pomerance:
        extra = {"pomerance": decomposition.to_dict()}
    summary = summarize(result, decomposition, extra_meta=extra)
    write_records_csv(result, os.path.join(out, "records.csv"))
    write_summary_json(summary, os.path.join(out, "summary.json"))
    if args.format == "json":
        print(json.dumps(summary.to_dict(), indent=2))
    else:
        pairs = [
            ("curve", summary.curve_label),
            ("base", summary.base_b),
            ("x", summary.x),
            ("good_count", summary.meta["good_count"]),
            ("bad_count", len(summary.skipped_bad)),
            ("twin", summary.twin),
            ("pseu", summary.pseu),
            ("Q", summary.Q),
            ("unit_count", summary.unit_count),
            ("second_moment", summary.second_moment),
        ]
        pairs.extend(summary.s_classes.items())
        if args.pomerance:
            dec = decomposition
            pairs.append(("L", dec.L))
            pairs.append(("L_clamped", int(dec.L == 1.0)))
            for i, row in enumerate(dec.overlap):
                pairs.append((f"overlap_s{i + 1}", " ".join(map(str, row))))
            pairs.append(("s4_smooth_heavy", dec.s4_smooth_heavy))
            pairs.append(("s4_rest", dec.s4_rest))
            pairs.append(("s4_window_hit", dec.s4_window_hit))
        _print_kv(pairs)
    print(f"wrote {out}/records.csv {out}/summary.json", file=sys.stderr)
    failures = _census_invariant_failures(summary)
    if failures:
        for msg in failures:
            print(f"invariant violated: {msg}", file=sys.stderr)
        return 1
    return 0


def _cmd_verify_classes(args) -> int:
    if not 2 <= args.cap <= ENUMERATION_CAP:
        raise UsageError(f"--cap must be in [2, {ENUMERATION_CAP}], got {args.cap}")
    out = _ensure_out(args.out)
    lines = [CLASSES_HEADER]
    bad_partitions = []
    bad_matches = []
    for n in range(2, args.cap + 1):
        table = class_count_table(n)
        if table.group_order != gl2_order(n):
            bad_partitions.append(n)
        for r, count in enumerate(table.counts):
            predicted = predicted_class_count(n, r)
            if predicted is None:
                lines.append(f"{n},{r},{count},,")
            else:
                match = int(count == predicted)
                if not match:
                    bad_matches.append((n, r))
                lines.append(f"{n},{r},{count},{predicted},{match}")
    path = os.path.join(out, "classes.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    ok = not bad_partitions and not bad_matches
    if args.format == "json":
        print(
            json.dumps(
                {
                    "cap": args.cap,
                    "rows": len(lines) - 1,
                    "partitions_ok": not bad_partitions,
                    "matches_ok": not bad_matches,
                },
                indent=2,
            )
        )
    else:
        _print_kv(
            [
                ("cap", args.cap),
                ("rows", len(lines) - 1),
                ("partitions_ok", int(not bad_partitions)),
                ("matches_ok", int(not bad_matches)),
            ]
        )
    print(f"wrote {path}", file=sys.stderr)
    if not ok:
        if bad_partitions:
            print(f"invariant violated: partition failed at n={bad_partitions}", file=sys.stderr)
        if bad_matches:
            print(f"invariant violated: count mismatches at {bad_matches}", file=sys.stderr)
        return 1
    return 0


def _cmd_order_stats(args) -> int:
    if args.base < 2:
        raise UsageError(f"--base must be at least 2, got {args.base}")
    if args.t < 2 or args.cap < args.t:
        raise UsageError("need 2 <= t <= cap")
    out = _ensure_out(args.out)
    levels = order_census(args.base, args.t)
    rows = []
    violations = []
    for m, count in levels.items():
        bound = nord_bound(args.base, m)
        ok = count <= bound
        if not ok:
            violations.append((m, count, bound))
        rows.append(f"{m},{count},{bound:.6g},{int(ok)}")
    path = os.path.join(out, "orders.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ORDERS_HEADER + "\n")
        fh.write("\n".join(rows) + ("\n" if rows else ""))
    tails = {
        "tail_sum": tail_sum(args.base, args.t, args.cap),
        "product_tail_sum": product_tail_sum(args.base, args.t, args.cap),
    }
    report = order_level_report(args.base, min(args.t, 10_000))
    if args.format == "json":
        print(
            json.dumps(
                {
                    "base": args.base,
                    "t": args.t,
                    "cap": args.cap,
                    "distinct_orders": len(levels),
                    "bound_ok": not violations,
                    "tail_sums": tails,
                    "level_threshold": report.threshold,
                    "flagged_levels": {str(m): c for m, c in report.flagged.items()},
                },
                indent=2,
            )
        )
    else:
        pairs = [
            ("base", args.base),
            ("t", args.t),
            ("cap", args.cap),
            ("distinct_orders", len(levels)),
            ("bound_ok", int(not violations)),
            ("tail_sum", tails["tail_sum"]),
            ("product_tail_sum", tails["product_tail_sum"]),
            ("level_threshold", report.threshold),
            ("flagged_levels", len(report.flagged)),
        ]
        pairs.extend((f"flagged_m_{m}", c) for m, c in report.flagged.items())
        _print_kv(pairs)
    print(f"wrote {path}", file=sys.stderr)
    if violations:
        for m, count, bound in violations:
            print(
                f"invariant violated: {count} primes at order {m} "
                f"exceeds bound {bound:.6g}",
                file=sys.stderr,
            )
        return 1
    return 0


def _cmd_sieve_report(args) -> int:
    if args.x < 2:
        raise UsageError(f"--x must be at least 2, got {args.x}")
    if (args.y is None) != (args.z is None):
        raise UsageError("give both --y and --z or neither")
    curve = _load_curve(args)
    out = _ensure_out(args.out)
    if args.y is not None:
        if args.y >= args.z:
            raise UsageError(f"need y < z, got y={args.y} z={args.z}")
        y, z = args.y, args.z
        preset_meta = {"preset": None}
    else:
        params = preset_params(args.x, args.preset)
        y, z = params.y, params.z
        preset_meta = {
            "preset": args.preset,
            "raw_y": params.raw_y,
            "raw_z": params.raw_z,
        }
    result = run_census(curve, args.x, base=args.base, strict=args.strict_fermat)
    pi_x = len(result.records) + len(result.skipped_bad)
    preset_meta["curve"] = curve.label
    report = build_sieve_report(
        result.records,
        args.base,
        float(args.x),
        y,
        z,
        pi_x,
        s=args.s,
        strict=args.strict_fermat,
        extra_meta=preset_meta,
    )
    path = os.path.join(out, "sieve.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        _print_kv(
            [
                ("curve", curve.label),
                ("base", args.base),
                ("x", args.x),
                ("y", report.y),
                ("z", report.z),
                ("V_y_z", report.V_y_z),
                ("F_s", report.F_s),
                ("envelope_uncond", report.envelope_uncond),
                ("envelope_uncond_vacuous", int(report.meta["envelope_uncond_vacuous"])),
                ("envelope_grh", report.envelope_grh),
                ("envelope_grh_vacuous", int(report.meta["envelope_grh_vacuous"])),
                ("empirical_S", report.empirical_S),
                ("empirical_T", report.empirical_T),
                ("empirical_Q", report.empirical_Q),
            ]
        )
    print(f"wrote {path}", file=sys.stderr)
    if report.empirical_Q > report.empirical_S + report.empirical_T:
        print("invariant violated: Q exceeds S + T", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SingularCurveError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1
    except InvariantError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1
    except ArithmeticError as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

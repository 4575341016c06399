"""Command-line front end: ``point``, ``sweep``, ``compare`` and ``verify``.

Exit codes: 0 success, 1 invariant failure, 2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, RunConfig, load_config
from .decoy import InvalidIntensityError
from .key_rate import evaluate_scheme
from .optimizer import SweepRow, sweep_distance
from .verify import all_ok, format_table, run_checks

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

SWEEP_COLUMNS = ("L_km", "scheme", "mu_prime_opt", "mu", "R_t", "R_both", "R_final", "nontriggered_active")
COMPARE_COLUMNS = ("L_km", "scheme_a", "scheme_b", "R_final_a", "R_final_b", "ratio")


class OutputError(OSError):
    pass


def _rate(x: Optional[float]) -> str:
    return "" if x is None else f"{max(0.0, x):.9e}"


def _num(x: float) -> str:
    return f"{x:.10g}"


def sweep_records(rows: Sequence[SweepRow]) -> list[dict]:
    return [
        {
            "L_km": _num(r.L_km),
            "scheme": r.scheme,
            "mu_prime_opt": _num(r.mu_prime_opt),
            "mu": _num(r.mu),
            "R_t": _rate(r.R_t),
            "R_both": _rate(r.R_both),
            "R_final": _rate(r.R_final),
            "nontriggered_active": "true" if r.nontriggered_active else "false",
        }
        for r in rows
    ]


def to_csv(records: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    writer.writerows(records)
    return buf.getvalue()


def compare_records(rows: Sequence[SweepRow], scheme_a: str, scheme_b: str) -> list[dict]:
    by_a = {r.L_km: r for r in rows if r.scheme == scheme_a}
    by_b = {r.L_km: r for r in rows if r.scheme == scheme_b}
    out = []
    for L in sorted(by_a):
        ra, rb = by_a[L].R_final, by_b[L].R_final
        ratio = "undefined" if not (ra > 0 and rb > 0) else f"{ra / rb:.9e}"
        out.append(
            {
                "L_km": _num(L),
                "scheme_a": scheme_a,
                "scheme_b": scheme_b,
                "R_final_a": _rate(ra),
                "R_final_b": _rate(rb),
                "ratio": ratio,
            }
        )
    return out


def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _render(records: list[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    return to_csv(records, columns)


def _output_format(config: RunConfig, path: Optional[str]) -> str:
    if path is not None and path.endswith(".json"):
        return "json"
    if path is not None and path.endswith(".csv"):
        return "csv"
    return config.output.format


def point_report(config: RunConfig, L: float, mu_prime: float, scheme: str) -> dict:
    spec = config.scheme(scheme)
    res = evaluate_scheme(spec, config.params, L, mu_prime, config.nontriggered_yield_convention)
    report = {
        "scheme": spec.name,
        "kind": spec.kind,
        "L_km": L,
        "mu": res.intensities.mu,
        "mu_prime": res.intensities.mu_prime,
        "observables": res.observables.to_dict(),
        "estimates": None if res.estimates is None else res.estimates.to_dict(),
        "raw": {"R_t": res.R_t, "R_both": res.R_both, "R_final": res.R_final},
        "nontriggered_active": res.nontriggered_active,
    }
    report.update(res.reported())
    return report


def cmd_point(config: RunConfig, args: argparse.Namespace) -> int:
    try:
        report = point_report(config, args.distance, args.mu_prime, args.scheme)
    except InvalidIntensityError as exc:
        raise ConfigError("--mu-prime", str(exc)) from None
    _emit(json.dumps(report, indent=2) + "\n", args.out or config.output.path)
    return EXIT_OK


def _sweep_rows(config: RunConfig, names: Optional[Sequence[str]] = None):
    specs = config.resolved_schemes() if not names else [config.scheme(n) for n in names]
    return sweep_distance(
        specs,
        config.params,
        config.distance_grid.values(),
        config.search,
        config.nontriggered_yield_convention,
    )


def cmd_sweep(config: RunConfig, args: argparse.Namespace) -> int:
    rows = _sweep_rows(config, args.scheme)
    path = args.out or config.output.path
    _emit(_render(sweep_records(rows), SWEEP_COLUMNS, _output_format(config, path)), path)
    return EXIT_OK


def cmd_compare(config: RunConfig, args: argparse.Namespace) -> int:
    a, b = config.scheme(args.scheme_a), config.scheme(args.scheme_b)
    rows = _sweep_rows(config, [a.name] if a.name == b.name else [a.name, b.name])
    path = args.out or config.output.path
    records = compare_records(rows, a.name, b.name)
    _emit(_render(records, COMPARE_COLUMNS, _output_format(config, path)), path)
    return EXIT_OK


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    results = run_checks(config)
    path = args.out or config.output.path
    if path is not None and _output_format(config, path) == "json":
        text = json.dumps([r.__dict__ for r in results], indent=2) + "\n"
    else:
        text = format_table(results)
    _emit(text, path)
    return EXIT_OK if all_ok(results) else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (defaults: GYS parameters)")
    common.add_argument("--out", help="output path; stdout when omitted")
    common.add_argument("--policy", choices=("strict", "limit"), help="coupling policy for coupled schemes")

    p = argparse.ArgumentParser(prog="pdc-decoy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    pt = sub.add_parser("point", parents=[common], help="full pipeline dump at one (L, mu') point")
    pt.add_argument("--distance", type=float, default=50.0, help="fiber length in km")
    pt.add_argument("--mu-prime", type=float, default=0.255, help="signal intensity")
    pt.add_argument("--scheme", default="new_both", help="scheme name or kind")
    pt.set_defaults(func=cmd_point)

    sw = sub.add_parser("sweep", parents=[common], help="optimised rate vs distance for each scheme")
    sw.add_argument("--scheme", action="append", help="restrict to this scheme (repeatable)")
    sw.set_defaults(func=cmd_sweep)

    cp = sub.add_parser("compare", parents=[common], help="ratio of optimised rates of two schemes")
    cp.add_argument("--scheme-a", default="new_both")
    cp.add_argument("--scheme-b", default="previous")
    cp.set_defaults(func=cmd_compare)

    vf = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    vf.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.policy is not None:
            config = config.with_policy(args.policy)
        return args.func(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line interface.

Exit codes: 0 on success, 1 when ``verify`` finds a failing property,
2 for invalid input, 3 when a numerical procedure fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

from . import fisher, verify
from .errors import DegenerateCut, DeltaTooLarge, InputError, NumericalError
from .fidelity import truncated_pair_fidelity
from .states import instance_to_dict, load_instance, random_family, save_instance, truncate_pair

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

SWEEP_M_HEADER = ("m", "tqfi_closed", "tqfi_tsld", "tqfi_fd", "qfi", "gap", "degenerate")
SWEEP_DELTA_HEADER = ("delta", "fstar", "eight_one_minus_f_over_d2", "bures_sq")


def fmt(x) -> str:
    """17 significant digits; ``None`` becomes an empty field."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return "%.17g" % x


@dataclass(frozen=True)
class SweepRow:
    m: int
    tqfi_closed: float | None
    tqfi_tsld: float | None
    tqfi_fd: float | None
    qfi: float
    gap: float
    degenerate: bool

    def fields(self) -> list[str]:
        return [fmt(getattr(self, name)) for name in SWEEP_M_HEADER]


def sweep_m(family, theta: float = 0.0) -> list[SweepRow]:
    full = fisher.qfi(family, theta).value
    rows = []
    for m in range(1, family.dim + 1):
        strict = m < family.rank
        closed = fisher.tqfi_closed(family, m).value if strict else None
        via_tsld = fisher.tqfi_tsld(family, theta, m).value if strict else None
        try:
            fd = fisher.tqfi_fd(family, theta, m, fisher.guarded_deltas(family, m)).value
        except NumericalError as exc:
            print(f"m={m}: finite-difference route failed: {exc}", file=sys.stderr)
            fd = None
        value = fisher.tqfi(family, theta, m)
        rows.append(SweepRow(m, closed, via_tsld, fd, full, full - value.value, value.degenerate_flag))
    return rows


def sweep_delta(family, theta: float, m: int, deltas) -> list[tuple[float, float, float, float]]:
    limit = fisher.guard_limit(family, m)
    rows = []
    for d in sorted({abs(float(x)) for x in deltas}):
        if d == 0.0:
            raise InputError("delta must be nonzero")
        if d > limit * (1 + 1e-12):
            raise DeltaTooLarge(
                f"delta={d:g} violates the trace guard; largest admissible step is {limit:.3e}"
            )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateCut)
            f = truncated_pair_fidelity(truncate_pair(family, theta, d, m))
        rows.append((d, f, 8.0 * (1.0 - f) / d**2, 2.0 * (1.0 - f)))
    return rows


def _write_csv(header, rows, out):
    def emit(handle):
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)

    if out is None:
        emit(sys.stdout)
    else:
        with open(out, "w", newline="") as handle:
            emit(handle)


def _write_text(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise InputError(f"--{name.replace('_', '-')} is required for {args.command}")
    return value


def _load(args):
    try:
        return load_instance(_need(args, "instance"))
    except OSError as exc:
        raise InputError(f"cannot read instance: {exc}") from exc


# -- commands ----------------------------------------------------------------


def cmd_compute(args) -> int:
    family, theta = _load(args)
    method, m = args.method, args.m
    deltas = tuple(args.delta) if args.delta else None
    if m is not None and not 1 <= m <= family.dim:
        raise InputError(f"--m must lie in [1, {family.dim}]")
    if method is None:
        result = fisher.tqfi(family, theta, m) if m is not None else fisher.qfi(family, theta)
    elif method in ("eigenbasis", "sld"):
        if m is not None:
            raise InputError(f"--method {method} computes the full QFI and takes no --m")
        result = fisher.qfi(family, theta, method)
    elif method == "fd":
        if m is None:
            result = fisher.qfi(family, theta, "finite_difference", deltas or fisher.DEFAULT_DELTAS)
        else:
            result = fisher.tqfi_fd(family, theta, m, deltas or fisher.guarded_deltas(family, m))
    else:
        if m is None:
            raise InputError(f"--method {method} needs --m")
        result = fisher.tqfi_closed(family, m) if method == "closed" else fisher.tqfi_tsld(family, theta, m)
    _write_text(json.dumps(result.to_dict()) + "\n", args.out)
    return EXIT_OK


def cmd_sweep_m(args) -> int:
    family, theta = _load(args)
    _write_csv(SWEEP_M_HEADER, [row.fields() for row in sweep_m(family, theta)], args.out)
    return EXIT_OK


def cmd_sweep_delta(args) -> int:
    family, theta = _load(args)
    m = _need(args, "m")
    if not 1 <= m <= family.dim:
        raise InputError(f"--m must lie in [1, {family.dim}]")
    if args.delta:
        deltas = args.delta
    else:
        top = fisher.guarded_deltas(family, m)[0]
        deltas = [top / 2**k for k in range(6)]
    rows = sweep_delta(family, theta, m, deltas)
    _write_csv(SWEEP_DELTA_HEADER, [[fmt(x) for x in row] for row in rows], args.out)
    return EXIT_OK


def cmd_random(args) -> int:
    d = _need(args, "d")
    rank = args.rank if args.rank is not None else d
    if d < 1 or not 1 <= rank <= d:
        raise InputError(f"need 1 <= rank <= d, got d={d}, rank={rank}")
    family = random_family(d, rank, args.seed)
    if args.out is None:
        sys.stdout.write(json.dumps(instance_to_dict(family), indent=1) + "\n")
    else:
        save_instance(args.out, family)
    return EXIT_OK


def load_config(path) -> verify.SuiteConfig:
    if path is None:
        return verify.SuiteConfig()
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    try:
        return verify.SuiteConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid config: {exc}") from exc


def cmd_verify(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.seed = args.seed
    reports = verify.run_suite(config)
    text = json.dumps([r.to_dict() for r in reports], indent=1) + "\n"
    _write_text(text, args.out)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"{status} {r.property_id}: {r.failures}/{r.trials} failed,"
            f" worst slack {r.worst_slack:.3e}, {r.degenerate_excluded} excluded",
            file=sys.stderr,
        )
    return EXIT_OK if verify.all_passed(reports) else EXIT_VERIFY_FAILED


COMMANDS = {
    "compute": cmd_compute,
    "sweep-m": cmd_sweep_m,
    "sweep-delta": cmd_sweep_delta,
    "random": cmd_random,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tqfi", description="Truncated quantum Fisher information")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *flags):
        if "instance" in flags:
            p.add_argument("--instance", metavar="PATH", help="instance JSON file")
        if "m" in flags:
            p.add_argument("--m", type=int, help="truncation rank")
        if "delta" in flags:
            p.add_argument("--delta", type=float, action="append", help="finite-difference step (repeatable)")
        p.add_argument("--out", metavar="PATH", help="output file (default: standard output)")

    p = sub.add_parser("compute", help="QFI or TQFI of one instance")
    common(p, "instance", "m", "delta")
    p.add_argument("--method", choices=["closed", "tsld", "fd", "eigenbasis", "sld"])
    p = sub.add_parser("sweep-m", help="every route for m = 1..d, as CSV")
    common(p, "instance")
    p = sub.add_parser("sweep-delta", help="curvature quotient along a step grid, as CSV")
    common(p, "instance", "m", "delta")
    p = sub.add_parser("random", help="write a random instance")
    common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("verify", help="run the property suite")
    common(p)
    p.add_argument("--config", metavar="PATH", help="suite config JSON")
    p.add_argument("--seed", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

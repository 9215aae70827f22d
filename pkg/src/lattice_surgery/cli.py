"""Command-line entry point.

Subcommands: ``bell``, ``teleport``, ``run`` (any protocol), ``code-info`` and
``verify``.  Experiment settings come from an optional JSON config file; any
flag given on the command line overrides the matching config value.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .codes import CodeError, code_by_name
from .experiment import ConfigError, ExperimentConfig, emit, run
from .surgery import PROTOCOLS
from .tableau import ImpossibleOutcomeError
from .verification import SUITES, run_suites

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_IO = 4


class _CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="input logical labels, e.g. 00, ++, +i, 0+")
    p.add_argument("--shots", type=int, help="shots per readout setting")
    p.add_argument("--seed", type=int, help="64-bit seed")
    p.add_argument("--config", type=Path, help="JSON config file (flags override it)")
    p.add_argument("--out", type=Path, help="JSON result path (default: standard output)")
    p.add_argument("--csv", type=Path, help="CSV table path")
    p.add_argument("--records", type=Path, help="per-shot JSONL records path")
    p.add_argument("--ancilla-policy", help="keep_all, force:BITS or postselect:BITS ('-' = free bit)")
    p.add_argument("--detection", choices=("none", "basis_stabilizer_checks"), help="detection policy")
    p.add_argument("--joint-correction", choices=("auto", "on", "off"))
    p.add_argument("--noisy-encoding", action="store_true", default=None, help="route encoding through noisy extraction")
    for name in ("p1", "p2", "p-meas", "p-prep"):
        p.add_argument(f"--{name}", type=float, help=f"noise probability {name.replace('-', '_')}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattice-surgery", description="Lattice-surgery stabilizer simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    bell = sub.add_parser("bell", help="logical Bell pair by rough or smooth lattice surgery")
    bell.add_argument("--boundary", choices=("rough", "smooth"))
    _add_experiment_flags(bell)

    tele = sub.add_parser("teleport", help="logical state teleportation A -> B")
    _add_experiment_flags(tele)

    gen = sub.add_parser("run", help="any protocol")
    gen.add_argument("--protocol", choices=sorted(PROTOCOLS))
    _add_experiment_flags(gen)

    info = sub.add_parser("code-info", help="print a code's generators, logicals and distance")
    info.add_argument("--code", required=True, help="sc2x2A, sc2x2B, scRxC, rep3, merged-rough, merged-smooth")

    ver = sub.add_parser("verify", help="oracle equivalence and branch-table suites")
    ver.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    ver.add_argument("--seed", type=int, default=0)
    return parser


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise _CliError(f"cannot read config {path}: {exc.strerror or exc}", EXIT_IO) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _CliError(f"config {path} is not valid JSON: {exc}", EXIT_CONFIG) from None
    if not isinstance(doc, dict):
        raise _CliError(f"config {path} must be a JSON object", EXIT_CONFIG)
    return doc


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the config file with command-line flags (flags win)."""
    doc = _load_config(args.config)
    if args.command == "bell":
        if args.boundary:
            doc["protocol"] = f"bell_{args.boundary}"
        doc.setdefault("protocol", "bell_rough")
        if not str(doc["protocol"]).startswith("bell_"):
            raise _CliError(f"bell cannot run protocol {doc['protocol']!r}", EXIT_CONFIG)
    elif args.command == "teleport":
        if doc.get("protocol", "teleport") != "teleport":
            raise _CliError(f"teleport cannot run protocol {doc['protocol']!r}", EXIT_CONFIG)
        doc["protocol"] = "teleport"
    elif args.protocol:
        doc["protocol"] = args.protocol
    overrides = {
        "inputs": args.input,
        "shots": args.shots,
        "seed": args.seed,
        "ancilla_policy": args.ancilla_policy,
        "detection_policy": args.detection,
        "joint_correction": args.joint_correction,
        "noisy_encoding": args.noisy_encoding,
    }
    for key, value in overrides.items():
        if value is not None:
            doc[key] = value
    noise = dict(doc.get("noise") or {})
    for key in ("p1", "p2", "p_meas", "p_prep"):
        value = getattr(args, key)
        if value is not None:
            noise[key] = value
    if noise:
        doc["noise"] = noise
    if args.records is not None:
        doc["record_shots"] = True
    try:
        return ExperimentConfig.from_dict(doc)
    except (ConfigError, TypeError, ValueError) as exc:
        raise _CliError(f"invalid configuration: {exc}", EXIT_CONFIG) from None


def _experiment(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    try:
        result = run(cfg)
    except ImpossibleOutcomeError as exc:
        raise _CliError(f"impossible forced outcome: {exc}", EXIT_CONFIG) from None
    try:
        emit(result, args.out, args.csv, args.records)
    except OSError as exc:
        raise _CliError(str(exc), EXIT_IO) from None
    if args.out is None:
        sys.stdout.write(result.to_json())
    return EXIT_OK


def _code_info(args: argparse.Namespace) -> int:
    try:
        code = code_by_name(args.code)
    except CodeError as exc:
        raise _CliError(str(exc), EXIT_CONFIG) from None
    sys.stdout.write(json.dumps(code.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _verify(args: argparse.Namespace) -> int:
    results = run_suites(args.suite, seed=args.seed)
    for r in results:
        print(r.summary())
    failed = [r for r in results if not r.ok]
    if failed:
        print(f"verification failed: {failed[0].name}: {failed[0].failures[0]}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"all {len(results)} suites passed")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "bell": _experiment,
        "teleport": _experiment,
        "run": _experiment,
        "code-info": _code_info,
        "verify": _verify,
    }
    try:
        return handlers[args.command](args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

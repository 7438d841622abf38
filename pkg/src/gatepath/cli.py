"""Command-line entry point: ``gatepath <command> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import jsonschema

from .errors import ConfigError, NumericalError, StructuralError
from .harness.config import load_config, make_config
from .harness.instance import instance_from_config
from .harness.report import dumps, emit_report, validate_report
from .harness.runner import run
from .harness.validation import run_validation

EXIT_OK, EXIT_INVALID, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
RUN_COMMANDS = ("determine-state", "pathway", "full")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gatepath",
        description="Target-parameter determination and pathway recovery for simulated parameterized circuits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "determine-state": "fit chi and compute the target parameters theta*",
        "pathway": "recover the computational pathway by kernel-PCA pre-image",
        "full": "run both stages",
        "validate": "run the invariant suite and print a pass/fail table",
        "gen-instance": "write the generated graph and circuit as JSON",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", type=Path, help="JSON config file (a previous report.json also works)")
        p.add_argument("--out", type=Path, help="output directory (default: output.dir from the config)")
        p.add_argument("--format", choices=("json", "csv", "both"), help="report format (default: output.format)")
        p.add_argument("--seed", type=int, help="override every seed in the config")
        p.add_argument("-q", "--quiet", action="store_true", help="print nothing on success")
    return parser


def _config(args) -> dict:
    if args.config is not None:
        return load_config(args.config, seed=args.seed)
    return make_config(seed=args.seed)


def _summary(report: dict) -> str:
    lines = [f"status: {report['status']}"]
    state = report.get("state")
    if state is not None:
        lines.append(f"f0 = {state['f0']:.6g}, f* = {state['f_star']:.6g}, "
                     f"f_sim(theta*) = {state['f_sim']:.6g}, gap = {state['gap']:.3e}")
        lines.append(f"ratio test max/min of gap/step^2: {report['ratio_test']['max_over_min']}")
    pathway = report.get("pathway")
    if pathway is not None:
        pre = pathway["preimage"]
        lines.append(f"pre-image: {pre['iterations_used']} iterations, converged={pre['converged']}, "
                     f"restarts={pre['restarts']}")
        if pathway.get("decoded") is not None:
            lines.append(f"decoded C* = {pathway['decoded']['total']:.6g}, "
                         f"max |omega* - omega_sim| = {pathway['max_abs_deviation']:.3e}")
        else:
            lines.append(f"decode failed: {pathway.get('decode_error')}")
    return "\n".join(lines)


def _run(args, cfg: dict) -> int:
    report, ctx = run(cfg, args.command)
    try:
        validate_report(report)
    except jsonschema.ValidationError as exc:
        print(f"report failed schema validation: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    out = args.out or Path(cfg["output"]["dir"])
    fmt = args.format or cfg["output"]["format"]
    written = emit_report(report, out, fmt, timings=ctx.timings)
    if not args.quiet:
        print(_summary(report))
        for path in written:
            print(f"wrote {path}")
    return EXIT_OK if report["status"] == "ok" else EXIT_NUMERICAL


def _validate(args, cfg: dict) -> int:
    result = run_validation(cfg)
    if not args.quiet or not result.passed:
        sys.stdout.write(result.transcript())
    return EXIT_OK if result.passed else EXIT_INVALID


def _gen_instance(args, cfg: dict) -> int:
    doc = {"schema": cfg["schema"], **instance_from_config(cfg).to_dict()}
    text = json.dumps(doc, indent=2) + "\n"
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "instance.json").write_text(text)
        (args.out / "graph.json").write_text(dumps(doc["graph"]))
        if not args.quiet:
            print(f"wrote {args.out / 'instance.json'}")
    elif not args.quiet:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        if args.command in RUN_COMMANDS:
            return _run(args, cfg)
        if args.command == "validate":
            return _validate(args, cfg)
        return _gen_instance(args, cfg)
    except (ConfigError, StructuralError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Report serialization: one JSON document plus plot-ready CSV traces."""

from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

import jsonschema

REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"


def _num(x) -> str:
    return format(x, ".17g") if isinstance(x, float) else str(x)


def report_schema() -> dict:
    return json.loads(resources.files("gatepath.schemas").joinpath("report.schema.json").read_text())


def validate_report(report: dict) -> None:
    jsonschema.validate(report, report_schema())


def dumps(report: dict) -> str:
    # repr-based float output round-trips every double exactly
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_num(v) for v in row])


def emit_report(report: dict, out_dir, fmt: str = "json", timings: dict | None = None) -> list[Path]:
    """Write the report as ``json``, ``csv`` or ``both`` into ``out_dir``.

    Timings go to a separate file so ``report.json`` stays byte-identical
    across repeated runs of the same config.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if fmt in ("json", "both"):
        path = out / REPORT_FILE
        path.write_text(dumps(report))
        written.append(path)
    if fmt in ("csv", "both"):
        written.extend(_emit_csv(report, out))
    if timings is not None:
        path = out / TIMINGS_FILE
        path.write_text(json.dumps(timings, indent=2) + "\n")
        written.append(path)
    return written


def _emit_csv(report: dict, out: Path) -> list[Path]:
    written = []
    ratio = report.get("ratio_test")
    if ratio is not None:
        path = out / "ratio_test.csv"
        keys = ["step", "f_sim", "gap", "gap_over_step", "gap_over_step_sq"]
        _write_csv(path, keys, ([r[k] for k in keys] for r in ratio["rows"]))
        written.append(path)
    pathway = report.get("pathway")
    if pathway is not None:
        pre = pathway["preimage"]
        path = out / "preimage_trace.csv"
        rows = zip(range(1, pre["iterations_used"] + 1), pre["distance_trace"],
                   pre["step_trace"], pre["denominator_trace"])
        _write_csv(path, ["iteration", "distance", "step_norm", "denominator"], rows)
        written.append(path)
        decoded = pathway.get("decoded")
        if decoded is not None:
            path = out / "edge_comparison.csv"
            sim = pathway["omega_sim"]
            rows = (
                (e, i, j, om, sim[e], dev)
                for e, (i, j), om, dev in zip(decoded["edge_indices"], decoded["edges"], decoded["omega"],
                                              pathway["edge_deviation"])
            )
            _write_csv(path, ["edge", "i", "j", "omega_decoded", "omega_sim", "deviation"], rows)
            written.append(path)
    return written

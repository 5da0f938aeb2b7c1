"""Result documents, CSV rows and the reference comparison table."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

from .config import RunConfig
from .flight import FlightLeg
from .loop import SLAB_NAMES, ComparisonReport, LoopResult, PathTrace, SlabEvent

SCHEMA_VERSION = "1.0"

# Scalar diagnostics, in output order.
SCALAR_DIAGNOSTICS = (
    "theta_B_deg",
    "T_seconds",
    "dky_per_leg_rel",
    "acceptance_margin",
    "dkx_rel",
    "defocus_rel_t3",
    "defocus_rel_t4",
    "time_mismatch_seconds",
    "closure_rel",
    "closure_kx_rel",
    "fall_distance_m",
)
CSV_COLUMNS = SCALAR_DIAGNOSTICS + tuple(f"acceptance_margin_{name}" for name in SLAB_NAMES)

# Display-only reference values; never used in any computation.
PAPER_QUOTES = {
    "theta_B_deg": "30°",
    "T_seconds": "28 ms (units typo; 28 µs)",
    "dky_per_leg_rel": "2.7e-7",
    "acceptance_margin": "≈0.054 (2.7e-7 / 5e-6)",
    "dkx_rel": "1.8e-7",
    "defocus_rel_t3": "+1.8e-7",
    "defocus_rel_t4": "-1.8e-7",
    "closure_rel": "9.5e-14",
}
TABLE_ROWS = (
    ("theta_B_deg", "θ_B [deg]"),
    ("T_seconds", "T [s]"),
    ("dky_per_leg_rel", "δk_y/k_y"),
    ("acceptance_margin", "acceptance margin"),
    ("dkx_rel", "δk_x/k_x"),
    ("defocus_rel_t3", "(T3-T)/T"),
    ("defocus_rel_t4", "(T4-T)/T"),
    ("closure_rel", "(k_y3-k_y4)/k_y"),
)


def _clean(x: float) -> float:
    # fold -0.0 into 0.0 so equal results print identically
    return x + 0.0


def diagnostics(result: LoopResult) -> dict:
    return {
        "theta_B_deg": _clean(math.degrees(result.theta_B)),
        "T_seconds": _clean(result.flight_time),
        "dky_per_leg_rel": _clean(result.dky_per_leg_rel),
        "acceptance_margin": _clean(result.acceptance_margin),
        "acceptance_margins": [_clean(m) for m in result.acceptance_margins],
        "dkx_rel": _clean(result.dkx_rel),
        "defocus_rel_t3": _clean(result.defocus_t3_rel),
        "defocus_rel_t4": _clean(result.defocus_t4_rel),
        "t3_path": result.t3_path,
        "time_mismatch_seconds": _clean(result.time_mismatch),
        "closure_rel": _clean(result.closure_rel),
        "closure_kx_rel": _clean(result.closure_kx_rel),
        "fall_distance_m": _clean(result.fall_distance),
    }


def csv_row(result: LoopResult) -> list[float]:
    diag = diagnostics(result)
    margins = dict(zip(SLAB_NAMES, diag["acceptance_margins"]))
    return [diag[name] for name in SCALAR_DIAGNOSTICS] + [margins.get(n, 0.0) for n in SLAB_NAMES]


def _vec(k) -> list[float]:
    return [_clean(k.kx), _clean(k.ky)]


def trace_dump(path: PathTrace) -> dict:
    events = []
    for event in path.events:
        if isinstance(event, SlabEvent):
            events.append(
                {
                    "type": "slab",
                    "element": event.element,
                    "action": event.action,
                    "k_in": _vec(event.k_in),
                    "k_out": _vec(event.k_out),
                    "delta_kx": _clean(event.delta_kx),
                    "bragg_deviation": _clean(event.bragg_deviation),
                    "margin": None if event.margin is None else _clean(event.margin),
                }
            )
        else:
            assert isinstance(event, FlightLeg)
            events.append(
                {
                    "type": "leg",
                    "k_in": _vec(event.k_in),
                    "k_out": _vec(event.k_out),
                    "span_x": _clean(event.span_x),
                    "time": _clean(event.time),
                    "dky_gravity": _clean(event.dky_gravity),
                    "dy": _clean(event.dy),
                }
            )
    return {"events": events, "k_final": _vec(path.k_final), "k_other": _vec(path.k_other)}


def loop_document(command: str, config: RunConfig, result: LoopResult, trace: bool = False) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config_echo": config.echo(),
        "diagnostics": diagnostics(result),
        "paper_quotes": dict(PAPER_QUOTES),
    }
    if trace:
        doc["traces"] = {p.name: trace_dump(p) for p in result.paths}
    return doc


def comparison_document(config: RunConfig, report: ComparisonReport, trace: bool = False) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": "compare",
        "config_echo": config.echo(),
        "diagnostics": {
            "first_order_equivalent": report.first_order_equivalent,
            "neutron": diagnostics(report.neutron),
            "neutron_first_order": diagnostics(report.neutron_first_order),
            "atom": diagnostics(report.atom),
            "residuals": {
                "neutron": {k: _clean(v) for k, v in report.neutron_residuals.items()},
                "atom": {k: _clean(v) for k, v in report.atom_residuals.items()},
            },
        },
    }
    if trace:
        doc["traces"] = {
            name: {p.name: trace_dump(p) for p in result.paths}
            for name, result in (
                ("neutron", report.neutron),
                ("neutron_first_order", report.neutron_first_order),
                ("atom", report.atom),
            )
        }
    return doc


def dumps(doc: dict) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats, no NaN/Inf."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False, ensure_ascii=False) + "\n"


def format_table(result: LoopResult) -> str:
    diag = diagnostics(result)
    lines = [f"{'quantity':<18} {'computed':>14}   reference", "-" * 60]
    for key, label in TABLE_ROWS:
        value = diag[key]
        shown = f"{value:.4f}" if key == "theta_B_deg" else f"{value:.4g}"
        lines.append(f"{label:<18} {shown:>14}   {PAPER_QUOTES[key]}")
    return "\n".join(lines) + "\n"


def sweep_csv(key: str, points: list[float], results: list[LoopResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((key,) + CSV_COLUMNS)
    for x, result in zip(points, results):
        writer.writerow([repr(float(v)) for v in [x] + csv_row(result)])
    return buf.getvalue()


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file and rename; no partial files."""
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise

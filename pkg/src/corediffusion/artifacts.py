"""On-disk formats: trace CSV, run summary JSON, per-node tables."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

from .engine import RunSummary, TraceRecord, classify
from .errors import InvalidParameter

TRACE_COLUMNS = TraceRecord.FIELDS


def parse_eps(text, n: int) -> float:
    """Resolve a threshold spec: a number, or ``k/n`` relative to the graph size."""
    if isinstance(text, (int, float)):
        value = float(text)
    else:
        s = str(text).strip().replace(" ", "")
        try:
            if s.endswith("/n"):
                value = float(s[:-2]) / n
            else:
                value = float(s)
        except ValueError:
            raise InvalidParameter(f"cannot parse threshold {text!r}") from None
    if not (value > 0 and math.isfinite(value)):
        raise InvalidParameter(f"threshold {text!r} must resolve to a positive number")
    return value


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def write_trace(trace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for rec in trace:
            w.writerow([repr(v) if isinstance(v, float) else v for v in rec.as_row()])


def read_trace(path) -> list[TraceRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        out.append(TraceRecord(
            t=int(r["t"]),
            total_charge=float(r["total_charge"]),
            l1_delta=float(r["l1_delta"]),
            core_size=int(r["core_size"]),
            periphery_size=int(r["periphery_size"]),
            untouched_size=int(r["untouched_size"]),
            max_edge_delta=float(r["max_edge_delta"]),
        ))
    return out


def summary_dict(summary: RunSummary, config: dict) -> dict:
    x = summary.final_state.x
    return {
        "status": summary.status.value,
        "iterations": summary.iterations,
        "core": sorted(summary.core),
        "periphery": sorted(summary.periphery),
        "saturated": summary.saturated,
        "warnings": list(summary.warnings),
        "initial_total": summary.initial_total,
        "final_total": math.fsum(x),
        "config": config,
        "config_hash": config_hash(config),
    }


def write_summary(summary: RunSummary, config: dict, path) -> dict:
    data = summary_dict(summary, config)
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return data


def write_state(summary: RunSummary, path) -> None:
    state = summary.final_state
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "charge", "threshold", "class"])
        for i, (xi, ei, c) in enumerate(zip(state.x.tolist(), state.eps.tolist(), classify(state))):
            w.writerow([i, repr(xi), repr(ei), c.value])


def write_run(out_dir, trace, summary: RunSummary, config: dict) -> dict:
    """Write ``trace.csv``, ``summary.json`` and ``state.csv`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "trace": out / "trace.csv",
        "summary": out / "summary.json",
        "state": out / "state.csv",
    }
    write_trace(trace, paths["trace"])
    write_summary(summary, config, paths["summary"])
    write_state(summary, paths["state"])
    return paths


def read_node_table(path, columns: tuple[str, ...], n: int) -> dict[str, list[float]]:
    """Read a CSV keyed by a ``node`` column; every node 0..n-1 must appear once."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"node", *columns} - set(reader.fieldnames or ())
        if missing:
            raise InvalidParameter(f"{path}: missing columns {sorted(missing)}")
        table = {c: [math.nan] * n for c in columns}
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            try:
                node = int(row["node"])
                vals = {c: float(row[c]) for c in columns}
            except ValueError:
                raise InvalidParameter(f"{path}:{lineno}: malformed row") from None
            if not 0 <= node < n or node in seen:
                raise InvalidParameter(f"{path}:{lineno}: bad or repeated node {node}")
            seen.add(node)
            for c in columns:
                table[c][node] = vals[c]
    if len(seen) != n:
        raise InvalidParameter(f"{path}: expected rows for all {n} nodes, got {len(seen)}")
    return table


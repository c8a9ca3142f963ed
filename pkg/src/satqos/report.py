"""Report bundle aggregation and canonical JSON / CSV emission.

Output directory layout::

    report.json            full bundle (plan echo, runs, topology, cluster, meta)
    throughput.csv         node, bandwidth_mbps, throughput_mbps
    packet_drop_rate.csv   node, bandwidth_mbps, packet_drop_rate, loss_fraction
    topology_degrees.csv   t_s, node, degree
    skips.csv              run_id, src, dst, bandwidth_mbps, reason
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import AggregationError
from .qos import QoSReport
from .testplan import TestPlan, expand_matrix

OUTPUT_FILES = (
    "report.json",
    "throughput.csv",
    "packet_drop_rate.csv",
    "topology_degrees.csv",
    "skips.csv",
)


@dataclass(frozen=True)
class SkipRecord:
    run_id: str
    src: str
    dst: str
    bandwidth_hz: float
    reason: str


@dataclass(frozen=True)
class ReportBundle:
    plan: dict
    runs: tuple = ()
    topology: dict = field(default_factory=dict)
    cluster: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def results(self) -> list[QoSReport]:
        return [r for r in self.runs if isinstance(r, QoSReport)]

    @property
    def skips(self) -> list[SkipRecord]:
        return [r for r in self.runs if isinstance(r, SkipRecord)]

    def to_dict(self) -> dict:
        runs = []
        for r in self.runs:
            if isinstance(r, QoSReport):
                runs.append({"run_id": r.run_id, "status": "ok", "result": r.to_dict()})
            else:
                runs.append({"run_id": r.run_id, "status": "skipped", "skip": asdict(r)})
        return {
            "plan": self.plan,
            "runs": runs,
            "topology": self.topology,
            "cluster": self.cluster,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReportBundle":
        runs = []
        for entry in data["runs"]:
            if entry["status"] == "ok":
                runs.append(QoSReport.from_dict(entry["result"]))
            else:
                runs.append(SkipRecord(**entry["skip"]))
        return cls(
            plan=data["plan"],
            runs=tuple(runs),
            topology=data.get("topology", {}),
            cluster=data.get("cluster", {}),
            meta=data.get("meta", {}),
        )


def aggregate(plan: TestPlan, results, *, topology=None, cluster=None, meta=None) -> ReportBundle:
    """Put per-run outcomes into canonical expansion order, whatever order they arrived in."""
    expected = [run.run_id for run in expand_matrix(plan)]
    results = list(results)
    counts = Counter(r.run_id for r in results)
    dupes = sorted(k for k, v in counts.items() if v > 1)
    missing = [k for k in expected if k not in counts]
    unknown = sorted(set(counts) - set(expected))
    if dupes or missing or unknown:
        parts = []
        if missing:
            parts.append(f"missing runs {missing}")
        if dupes:
            parts.append(f"duplicate runs {dupes}")
        if unknown:
            parts.append(f"unknown runs {unknown}")
        raise AggregationError("; ".join(parts), missing + dupes + unknown)
    by_id = {r.run_id: r for r in results}
    return ReportBundle(
        plan=plan.model_dump(mode="json"),
        runs=tuple(by_id[k] for k in expected),
        topology=dict(topology or {}),
        cluster=dict(cluster or {}),
        meta=dict(meta or {}),
    )


def _float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _encode(value, indent: int) -> str:
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(value[k], indent + 2)}" for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [inner + _encode(v, indent + 2) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if value is None or isinstance(value, (bool, str)):
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _float(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def canonical_json(value) -> bytes:
    """Sorted keys, two-space indent, floats at 17 significant digits."""
    return (_encode(value, 0) + "\n").encode()


def emit_json(bundle: ReportBundle) -> bytes:
    return canonical_json(bundle.to_dict())


def parse_bundle(data: bytes | str) -> ReportBundle:
    return ReportBundle.from_dict(json.loads(data))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_plot_data(bundle: ReportBundle) -> dict[str, str]:
    """Per-node, per-bandwidth tables: throughput, drop rate, and skipped runs."""
    results = sorted(bundle.results, key=lambda r: (r.dst, r.bandwidth_hz, r.run_id))
    throughput = _csv(
        ("node", "bandwidth_mbps", "throughput_mbps"),
        [(r.dst, f"{r.bandwidth_hz / 1e6:.6f}", f"{r.throughput_bps / 1e6:.6f}") for r in results],
    )
    pdr = _csv(
        ("node", "bandwidth_mbps", "packet_drop_rate", "loss_fraction"),
        [
            (r.dst, f"{r.bandwidth_hz / 1e6:.6f}", f"{r.packet_drop_rate:.6f}", f"{r.loss_fraction:.6f}")
            for r in results
        ],
    )
    skips = _csv(
        ("run_id", "src", "dst", "bandwidth_mbps", "reason"),
        [(s.run_id, s.src, s.dst, f"{s.bandwidth_hz / 1e6:.6f}", s.reason) for s in bundle.skips],
    )
    return {"throughput.csv": throughput, "packet_drop_rate.csv": pdr, "skips.csv": skips}


def emit_topology_degrees(bundle: ReportBundle) -> str:
    node = bundle.topology.get("node", "")
    rows = [(f"{t:.6f}", node, deg) for t, deg in bundle.topology.get("degrees", [])]
    return _csv(("t_s", "node", "degree"), rows)


def write_outputs(bundle: ReportBundle, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"report.json": emit_json(bundle)}
    files.update({k: v.encode() for k, v in emit_plot_data(bundle).items()})
    files["topology_degrees.csv"] = emit_topology_degrees(bundle).encode()
    written = []
    for name in OUTPUT_FILES:
        path = out / name
        path.write_bytes(files[name])
        written.append(path)
    return written

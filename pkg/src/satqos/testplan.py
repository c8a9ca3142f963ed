"""Experiment plan schema, strict parsing, and expansion into scenario runs.

The canonical plan file is JSON. Unknown keys are rejected, and every error
names the offending key as a JSON pointer (for example ``/flows/0/src``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal

import pydantic
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import PlanValidationError
from .link import LinkBudgetParams, LinkSettings
from .orbit import EARTH_RADIUS_KM, ConstellationConfig, generate_constellation
from .qos import FlowSpec, LossModelParams
from .seeding import derive_run_seed
from .topology import VisibilityParams

_STRICT = ConfigDict(extra="forbid", frozen=True)


class TimeWindow(BaseModel):
    model_config = _STRICT

    t0_s: float = Field(default=0.0, ge=0)
    t1_s: float

    @model_validator(mode="after")
    def _ordered(self) -> "TimeWindow":
        if not self.t1_s > self.t0_s:
            raise ValueError("t1_s must be greater than t0_s")
        return self


class FlowTemplate(BaseModel):
    """A probe flow. ``offered_rate_bps`` null means "offer the cell bandwidth"."""

    model_config = _STRICT

    src: str
    dst: str
    packet_size_bits: float = Field(default=12000.0, gt=0)
    offered_rate_bps: float | None = Field(default=None, gt=0)
    duration_s: float | None = Field(default=None, gt=0)
    start_s: float | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _distinct(self) -> "FlowTemplate":
        if self.src == self.dst:
            raise ValueError("src and dst must differ")
        return self


class ClusterNode(BaseModel):
    model_config = _STRICT

    id: str
    kind: Literal["physical", "virtual"] = "physical"
    role: Literal["master", "worker"] = "worker"


class TestPlan(BaseModel):
    model_config = _STRICT
    __test__ = False

    constellation: ConstellationConfig
    window: TimeWindow
    step_s: float = Field(gt=0)
    visibility: VisibilityParams = VisibilityParams()
    link: LinkSettings = LinkSettings()
    bandwidths_hz: list[float] = Field(min_length=1)
    flows: list[FlowTemplate] = Field(min_length=1)
    loss: LossModelParams = LossModelParams()
    cluster_nodes: list[ClusterNode] = Field(min_length=1)
    seed: int = Field(ge=0, lt=2**64)
    topology_node: str | None = None

    @property
    def master(self) -> str:
        return next(n.id for n in self.cluster_nodes if n.role == "master")

    @property
    def degree_node(self) -> str:
        return self.topology_node or self.master


@dataclass(frozen=True)
class ScenarioRun:
    run_id: str
    flow: FlowSpec
    bandwidth_hz: float
    link: LinkBudgetParams
    loss: LossModelParams
    seed_derived: int

    @property
    def pair(self) -> tuple[str, str]:
        return (self.flow.src, self.flow.dst)


def _pointer(loc) -> str:
    return "/" + "/".join(str(p) for p in loc)


def _semantic_errors(plan: TestPlan) -> list[tuple[str, str]]:
    errors = []
    for i, bw in enumerate(plan.bandwidths_hz):
        if not bw > 0 or not math.isfinite(bw):
            errors.append((f"/bandwidths_hz/{i}", "bandwidth must be a positive finite number"))
    if len(set(plan.bandwidths_hz)) != len(plan.bandwidths_hz):
        errors.append(("/bandwidths_hz", "duplicate bandwidths"))
    if plan.window.t1_s - plan.window.t0_s < plan.step_s:
        errors.append(("/step_s", "step_s is longer than the time window"))

    sat_ids = {s.id for s in generate_constellation(plan.constellation)}
    masters = [i for i, n in enumerate(plan.cluster_nodes) if n.role == "master"]
    if len(masters) != 1:
        errors.append(("/cluster_nodes", f"exactly one master required, found {len(masters)}"))
    seen: set[str] = set()
    for i, node in enumerate(plan.cluster_nodes):
        if node.id not in sat_ids:
            errors.append((f"/cluster_nodes/{i}/id", f"unknown satellite id {node.id!r}"))
        if node.id in seen:
            errors.append((f"/cluster_nodes/{i}/id", f"duplicate node id {node.id!r}"))
        seen.add(node.id)
    pairs: set[tuple[str, str]] = set()
    for i, flow in enumerate(plan.flows):
        for key in ("src", "dst"):
            if getattr(flow, key) not in sat_ids:
                errors.append((f"/flows/{i}/{key}", f"unknown satellite id {getattr(flow, key)!r}"))
        if (flow.src, flow.dst) in pairs:
            errors.append((f"/flows/{i}", "duplicate flow pair"))
        pairs.add((flow.src, flow.dst))
    if plan.topology_node is not None and plan.topology_node not in sat_ids:
        errors.append(("/topology_node", f"unknown satellite id {plan.topology_node!r}"))
    return errors


def parse_plan(document: str | bytes | dict) -> TestPlan:
    """Parse and validate a plan, applying defaults; raises ``PlanValidationError``."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise PlanValidationError(f"plan is not valid JSON: {exc}", ["/"]) from exc
    try:
        plan = TestPlan.model_validate(document)
    except pydantic.ValidationError as exc:
        lines, paths = [], []
        for err in exc.errors():
            path = _pointer(err["loc"])
            paths.append(path)
            kind = "unknown key" if err["type"] == "extra_forbidden" else err["msg"]
            lines.append(f"{path}: {kind}")
        raise PlanValidationError("invalid plan:\n  " + "\n  ".join(lines), paths) from None
    errors = _semantic_errors(plan)
    if errors:
        lines = [f"{p}: {m}" for p, m in errors]
        raise PlanValidationError("invalid plan:\n  " + "\n  ".join(lines), [p for p, _ in errors])
    return plan


def load_plan(path) -> TestPlan:
    with open(path, "rb") as fh:
        return parse_plan(fh.read())


def emit_plan(plan: TestPlan) -> str:
    """Canonical JSON form; ``parse_plan(emit_plan(p)) == p``."""
    return json.dumps(plan.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def with_seed(plan: TestPlan, seed: int) -> TestPlan:
    return parse_plan({**plan.model_dump(mode="json"), "seed": seed})


def run_id_for(src: str, dst: str, bandwidth_hz: float) -> str:
    return f"{src}>{dst}@{bandwidth_hz:.17g}Hz"


def resolve_flow(plan: TestPlan, template: FlowTemplate, bandwidth_hz: float) -> FlowSpec:
    start = plan.window.t0_s if template.start_s is None else template.start_s
    duration = template.duration_s or (plan.window.t1_s - start)
    return FlowSpec(
        src=template.src,
        dst=template.dst,
        packet_size_bits=template.packet_size_bits,
        offered_rate_bps=template.offered_rate_bps or bandwidth_hz,
        duration_s=duration,
        start_s=start,
    )


def expand_matrix(plan: TestPlan) -> list[ScenarioRun]:
    """Flows x bandwidths, flows outer; each run's seed depends only on (seed, pair, bandwidth)."""
    runs = []
    for template in plan.flows:
        for bw in plan.bandwidths_hz:
            runs.append(
                ScenarioRun(
                    run_id=run_id_for(template.src, template.dst, bw),
                    flow=resolve_flow(plan, template, bw),
                    bandwidth_hz=bw,
                    link=plan.link.with_bandwidth(bw),
                    loss=plan.loss,
                    seed_derived=derive_run_seed(plan.seed, template.src, template.dst, bw),
                )
            )
    return runs


def validate_compat(plan: TestPlan) -> list[str]:
    """Non-fatal advisories about plans that will likely produce degenerate results."""
    warnings = []
    cfg = plan.constellation
    a = EARTH_RADIUS_KM + cfg.altitude_km
    grazing = 2.0 * math.sqrt(a * a - (EARTH_RADIUS_KM + plan.visibility.occlusion_margin_km) ** 2)
    nearest = 2.0 * a * math.sin(math.pi / cfg.sats_per_plane) if cfg.sats_per_plane > 1 else grazing
    if plan.visibility.max_range_km < min(nearest, grazing):
        warnings.append(
            f"topology likely empty: max_range_km={plan.visibility.max_range_km:g} is below the "
            f"nearest in-plane neighbour distance {nearest:.1f} km"
        )
    if cfg.sats_per_plane > 1 and nearest >= grazing:
        warnings.append(
            f"in-plane neighbours ({nearest:.1f} km apart) are occluded by the Earth"
            f" (grazing limit {grazing:.1f} km)"
        )
    for template in plan.flows:
        if template.offered_rate_bps is None:
            continue
        for bw in plan.bandwidths_hz:
            if template.offered_rate_bps > bw:
                warnings.append(
                    f"utilization > 1 for {template.src}->{template.dst} at {bw:g} Hz: offered "
                    f"{template.offered_rate_bps:g} bps exceeds the bandwidth"
                )
    return warnings

"""Packet-level transfer sessions and the throughput / packet-drop-rate metrics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import DomainError, NoContactError
from .link import LinkBudget, LinkBudgetParams, transmission_delay
from .seeding import packet_stream
from .topology import ContactWindow

_CHUNK = 1 << 20


@dataclass(frozen=True)
class FlowSpec:
    src: str
    dst: str
    packet_size_bits: float
    offered_rate_bps: float
    duration_s: float
    start_s: float = 0.0

    def __post_init__(self) -> None:
        if self.src == self.dst:
            raise ValueError(f"flow src and dst are both {self.src!r}")
        if not self.packet_size_bits > 0:
            raise ValueError("packet_size_bits must be > 0")
        if not self.offered_rate_bps > 0:
            raise ValueError("offered_rate_bps must be > 0")
        if not self.duration_s > 0:
            raise ValueError("duration_s must be > 0")

    @property
    def flow_id(self) -> str:
        return f"{self.src}->{self.dst}"


class LossModelParams(BaseModel):
    """Per-packet Bernoulli loss, ``p = clamp(base + load_coefficient * utilization, 0, max)``."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    base_loss_prob: float = Field(default=0.001, ge=0, le=1)
    load_coefficient: float = Field(default=0.02, ge=0)
    max_loss_prob: float = Field(default=0.5, ge=0, le=1)

    @model_validator(mode="after")
    def _base_below_cap(self) -> "LossModelParams":
        if self.base_loss_prob > self.max_loss_prob:
            raise ValueError("base_loss_prob must be <= max_loss_prob")
        return self

    def probability(self, utilization: float) -> float:
        p = self.base_loss_prob + self.load_coefficient * utilization
        return min(self.max_loss_prob, max(0.0, p))


@dataclass(frozen=True)
class TransferResult:
    flow: FlowSpec
    packets_delivered: int
    packets_lost: int
    window_metrics: tuple[tuple[float, float], ...]

    @property
    def packets_attempted(self) -> int:
        return self.packets_delivered + self.packets_lost


@dataclass(frozen=True)
class QoSReport:
    run_id: str
    src: str
    dst: str
    bandwidth_hz: float
    throughput_bps: float
    packet_drop_rate: float
    loss_fraction: float
    goodput_bps: float
    packets_delivered: int
    packets_lost: int
    windows_used: int
    connected_time_s: float
    seed: int
    link: dict
    loss: dict

    @property
    def pair(self) -> tuple[str, str]:
        return (self.src, self.dst)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "QoSReport":
        return cls(**data)


def throughput(window_metrics, bandwidth_hz: float) -> float:
    """``B * sum(t_connect) / sum(t_connect + t_trans)`` over contact windows."""
    metrics = list(window_metrics)
    if not metrics:
        raise DomainError("throughput needs at least one contact window")
    if any(tc < 0 or tt < 0 for tc, tt in metrics):
        raise DomainError("window durations must be >= 0")
    connected = math.fsum(tc for tc, _ in metrics)
    total = math.fsum(tc + tt for tc, tt in metrics)
    if connected <= 0 or total <= 0:
        raise DomainError("throughput undefined: no connected time")
    return bandwidth_hz * connected / total


def packet_drop_rate(result: TransferResult) -> float:
    """Lost packets divided by delivered packets (not by attempts)."""
    if result.packets_delivered <= 0:
        raise DomainError("PDR undefined: zero packets delivered")
    return result.packets_lost / result.packets_delivered


def _count_losses(rng, n: int, p: float) -> int:
    lost = 0
    while n > 0:
        k = min(n, _CHUNK)
        lost += int((rng.random(k) < p).sum())
        n -= k
    return lost


def simulate_transfer(
    flow: FlowSpec,
    windows: list[ContactWindow],
    budgets: list[LinkBudget],
    loss: LossModelParams,
    seed: int,
) -> TransferResult:
    """Emit packets at the offered rate inside each window and drop each independently.

    Windows are clipped to the flow's active interval. Only whole packets fit
    in a window. Utilization in a window is ``offered_rate / capacity``.
    """
    if len(windows) != len(budgets):
        raise ValueError("need exactly one link budget per contact window")
    order = sorted(range(len(windows)), key=lambda i: windows[i].start_s)
    for i, j in zip(order, order[1:]):
        if windows[j].start_s < windows[i].end_s:
            raise ValueError("contact windows overlap")

    rng = packet_stream(seed, flow.flow_id)
    flow_end = flow.start_s + flow.duration_s
    delivered = lost = 0
    metrics = []
    for i in order:
        w, budget = windows[i], budgets[i]
        dur = min(w.end_s, flow_end) - max(w.start_s, flow.start_s)
        if dur <= 0:
            continue
        n = math.floor(flow.offered_rate_bps * dur / flow.packet_size_bits + 1e-9)
        p = loss.probability(flow.offered_rate_bps / budget.capacity_bps)
        k = _count_losses(rng, n, p)
        lost += k
        delivered += n - k
        metrics.append((dur, budget.t_trans_s))
    return TransferResult(flow, delivered, lost, tuple(metrics))


def run_qos_session(
    flow: FlowSpec,
    params: LinkBudgetParams,
    loss: LossModelParams,
    windows: list[ContactWindow],
    distances_km: list[float],
    seed: int,
    run_id: str = "",
) -> QoSReport:
    """One (pair, bandwidth) cell: budgets per window, transfer, then TP and PDR.

    ``distances_km[i]`` is the link distance used for the budget of ``windows[i]``.
    """
    tag = f"{flow.src}->{flow.dst}"
    if not windows:
        raise NoContactError(f"{tag}: no contact windows")
    try:
        budgets = [transmission_delay(flow.packet_size_bits, params, d) for d in distances_km]
        result = simulate_transfer(flow, windows, budgets, loss, seed)
        if not result.window_metrics:
            raise NoContactError(f"{tag}: no contact windows inside the flow interval")
        tp = throughput(result.window_metrics, params.bandwidth_hz)
        pdr = packet_drop_rate(result)
    except DomainError as exc:
        raise type(exc)(f"{tag}: {exc}") from exc
    connected = math.fsum(tc for tc, _ in result.window_metrics)
    return QoSReport(
        run_id=run_id,
        src=flow.src,
        dst=flow.dst,
        bandwidth_hz=params.bandwidth_hz,
        throughput_bps=tp,
        packet_drop_rate=pdr,
        loss_fraction=result.packets_lost / result.packets_attempted,
        goodput_bps=result.packets_delivered * flow.packet_size_bits / connected,
        packets_delivered=result.packets_delivered,
        packets_lost=result.packets_lost,
        windows_used=len(result.window_metrics),
        connected_time_s=connected,
        seed=seed,
        link=params.echo(),
        loss=loss.model_dump(),
    )

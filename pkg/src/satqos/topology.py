"""Inter-satellite link topology over a time grid.

A link exists when two satellites are within ``max_range_km`` and the straight
segment between them clears the Earth (plus an optional margin). Snapshots are
diffed into link/node events, and per-pair runs of presence become contact
windows.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from pydantic import BaseModel, ConfigDict, Field

from .orbit import EARTH_RADIUS_KM, SatelliteSpec, StateVector, propagate_all

Pair = tuple[str, str]
Edge = tuple[str, str, float]


class VisibilityParams(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_range_km: float = Field(default=5500.0, gt=0)
    occlusion_margin_km: float = Field(default=0.0, ge=0)


def make_pair(a: str, b: str) -> Pair:
    if a == b:
        raise ValueError(f"self pair {a!r}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class TopologySnapshot:
    t: float
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]

    @property
    def pairs(self) -> frozenset[Pair]:
        return frozenset((a, b) for a, b, _ in self.edges)

    def distance(self, pair: Pair) -> float | None:
        for a, b, d in self.edges:
            if (a, b) == pair:
                return d
        return None

    def degree(self, node: str) -> int:
        return sum(1 for a, b, _ in self.edges if node in (a, b))

    def neighbors(self, node: str) -> list[str]:
        out = []
        for a, b, _ in self.edges:
            if a == node:
                out.append(b)
            elif b == node:
                out.append(a)
        return sorted(out)

    def adjacency(self) -> "Adjacency":
        return Adjacency(frozenset(self.nodes), self.pairs)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "nodes": list(self.nodes),
            "edges": [{"a": a, "b": b, "distance_km": d} for a, b, d in self.edges],
        }


@dataclass(frozen=True)
class Adjacency:
    """Node set plus unordered link set, without distances."""

    nodes: frozenset[str]
    pairs: frozenset[Pair]


@dataclass(frozen=True)
class ContactWindow:
    pair: Pair
    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if not self.end_s > self.start_s:
            raise ValueError(f"empty contact window {self.start_s}..{self.end_s}")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class TopologyEvents:
    t: float
    links_up: tuple[Pair, ...] = ()
    links_down: tuple[Pair, ...] = ()
    nodes_joined: tuple[str, ...] = ()
    nodes_left: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        both = set(self.links_up) & set(self.links_down)
        if both:
            raise ValueError(f"pairs both up and down in one batch: {sorted(both)}")

    @property
    def is_empty(self) -> bool:
        return not (self.links_up or self.links_down or self.nodes_joined or self.nodes_left)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "links_up": [list(p) for p in self.links_up],
            "links_down": [list(p) for p in self.links_down],
            "nodes_joined": list(self.nodes_joined),
            "nodes_left": list(self.nodes_left),
        }


def _norm(v: tuple[float, float, float]) -> float:
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def segment_clearance_km(pa, pb) -> float:
    """Smallest distance from Earth's center to the segment pa-pb."""
    dx = (pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2])
    dd = dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]
    if dd == 0.0:
        return _norm(pa)
    s = -(pa[0] * dx[0] + pa[1] * dx[1] + pa[2] * dx[2]) / dd
    s = min(1.0, max(0.0, s))
    return _norm((pa[0] + s * dx[0], pa[1] + s * dx[1], pa[2] + s * dx[2]))


def visible(a: StateVector, b: StateVector, params: VisibilityParams) -> bool:
    if a.t != b.t:
        raise ValueError(f"state timestamps differ: {a.t} != {b.t}")
    # fixed endpoint order keeps the float path identical for (a, b) and (b, a)
    if (b.sat_id, b.position_km) < (a.sat_id, a.position_km):
        a, b = b, a
    pa, pb = a.position_km, b.position_km
    d = _norm((pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]))
    if d > params.max_range_km:
        return False
    return segment_clearance_km(pa, pb) > EARTH_RADIUS_KM + params.occlusion_margin_km


def snapshot(states: list[StateVector], params: VisibilityParams, t: float) -> TopologySnapshot:
    seen: set[str] = set()
    for s in states:
        if s.t != t:
            raise ValueError(f"state {s.sat_id} at t={s.t}, expected t={t}")
        if s.sat_id in seen:
            raise ValueError(f"duplicate sat_id {s.sat_id!r}")
        seen.add(s.sat_id)
    ordered = sorted(states, key=lambda s: s.sat_id)
    edges = []
    for i, a in enumerate(ordered):
        pa = a.position_km
        for b in ordered[i + 1:]:
            if visible(a, b, params):
                pb = b.position_km
                d = _norm((pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]))
                edges.append((a.sat_id, b.sat_id, d))
    return TopologySnapshot(t=t, nodes=tuple(s.sat_id for s in ordered), edges=tuple(edges))


def time_grid(t0: float, t1: float, step_s: float) -> list[float]:
    """Grid points ``t0 + k*step`` strictly before ``t1``."""
    if not t1 > t0 or not step_s > 0:
        raise ValueError("need t1 > t0 and step_s > 0")
    n = math.ceil((t1 - t0) / step_s - 1e-9)
    return [t0 + k * step_s for k in range(n)]


def compute_snapshots(
    specs: list[SatelliteSpec], params: VisibilityParams, times: list[float]
) -> list[TopologySnapshot]:
    return [snapshot(propagate_all(specs, t), params, t) for t in times]


def _grid_step(snapshots: list[TopologySnapshot], step_s: float | None) -> float:
    if not snapshots:
        raise ValueError("empty snapshot list")
    if len(snapshots) == 1:
        if step_s is None:
            raise ValueError("step_s required for a single snapshot")
        return step_s
    step = snapshots[1].t - snapshots[0].t
    if step_s is not None:
        step = step_s
    for prev, nxt in zip(snapshots, snapshots[1:]):
        gap = nxt.t - prev.t
        if gap <= 0:
            raise ValueError("snapshots must be strictly increasing in t")
        if not math.isclose(gap, step, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"non-uniform grid: gap {gap} vs step {step}")
    return step


def _runs_to_windows(pair: Pair, indices: list[int], snapshots, step: float) -> list[ContactWindow]:
    windows = []
    start = prev = None
    for i in indices:
        if start is None:
            start = prev = i
        elif i == prev + 1:
            prev = i
        else:
            windows.append(ContactWindow(pair, snapshots[start].t, snapshots[prev].t + step))
            start = prev = i
    if start is not None:
        windows.append(ContactWindow(pair, snapshots[start].t, snapshots[prev].t + step))
    return windows


def contact_windows(
    snapshots: list[TopologySnapshot], pair: Pair, step_s: float | None = None
) -> list[ContactWindow]:
    """Maximal runs of consecutive snapshots that contain ``pair``.

    A run covering grid points ``t_i..t_j`` becomes ``[t_i, t_j + step)``.
    """
    step = _grid_step(snapshots, step_s)
    pair = make_pair(*pair)
    present = [i for i, snap in enumerate(snapshots) if pair in snap.pairs]
    return _runs_to_windows(pair, present, snapshots, step)


def all_contact_windows(
    snapshots: list[TopologySnapshot], step_s: float | None = None
) -> dict[Pair, list[ContactWindow]]:
    step = _grid_step(snapshots, step_s)
    presence: dict[Pair, list[int]] = {}
    for i, snap in enumerate(snapshots):
        for a, b, _ in snap.edges:
            presence.setdefault((a, b), []).append(i)
    return {
        pair: _runs_to_windows(pair, idx, snapshots, step)
        for pair, idx in sorted(presence.items())
    }


def diff(prev: TopologySnapshot, nxt: TopologySnapshot) -> TopologyEvents:
    if not prev.t < nxt.t:
        raise ValueError(f"diff needs prev.t < next.t, got {prev.t} >= {nxt.t}")
    p_nodes, n_nodes = set(prev.nodes), set(nxt.nodes)
    p_pairs, n_pairs = prev.pairs, nxt.pairs
    return TopologyEvents(
        t=nxt.t,
        links_up=tuple(sorted(n_pairs - p_pairs)),
        links_down=tuple(sorted(p_pairs - n_pairs)),
        nodes_joined=tuple(sorted(n_nodes - p_nodes)),
        nodes_left=tuple(sorted(p_nodes - n_nodes)),
    )


def apply_events(adj: Adjacency, events: TopologyEvents) -> Adjacency:
    """Replay one event batch onto an adjacency."""
    nodes = (adj.nodes - set(events.nodes_left)) | set(events.nodes_joined)
    pairs = (adj.pairs - set(events.links_down)) | set(events.links_up)
    return Adjacency(frozenset(nodes), frozenset(pairs))


def restrict_to_component(snap: TopologySnapshot, root: str) -> TopologySnapshot:
    """Sub-snapshot holding only the connected component that contains ``root``."""
    if root not in snap.nodes:
        return TopologySnapshot(snap.t, (), ())
    adjacency: dict[str, list[str]] = {}
    for a, b, _ in snap.edges:
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)
    reached = {root}
    queue = deque([root])
    while queue:
        for nb in adjacency.get(queue.popleft(), ()):
            if nb not in reached:
                reached.add(nb)
                queue.append(nb)
    return TopologySnapshot(
        t=snap.t,
        nodes=tuple(n for n in snap.nodes if n in reached),
        edges=tuple(e for e in snap.edges if e[0] in reached),
    )


def degree_series(snapshots: list[TopologySnapshot], node: str) -> list[tuple[float, int]]:
    return [(s.t, s.degree(node)) for s in snapshots]

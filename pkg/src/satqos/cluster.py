"""Master-worker test cluster driven by topology events.

States are immutable; every operation returns a new ``ClusterState`` and
appends the action to ``event_log`` when it changed something. ``replay`` folds
a log back into the state it produced.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Literal

from .errors import ClusterError, SchedulingError
from .topology import TopologyEvents

Role = Literal["master", "worker"]
Kind = Literal["physical", "virtual"]


@dataclass(frozen=True)
class NodeRecord:
    id: str
    role: Role
    kind: Kind
    status: Literal["live", "removed"] = "live"

    @property
    def is_live_worker(self) -> bool:
        return self.role == "worker" and self.status == "live"


@dataclass(frozen=True)
class Deployment:
    id: str
    tool: str
    namespace: str
    node: str
    status: Literal["pending", "running", "failed"] = "running"


@dataclass(frozen=True)
class ClusterState:
    nodes: tuple[NodeRecord, ...]
    deployments: tuple[Deployment, ...] = ()
    event_log: tuple[tuple, ...] = ()
    next_deployment: int = 0

    @property
    def master(self) -> NodeRecord:
        return next(n for n in self.nodes if n.role == "master")

    def node(self, node_id: str) -> NodeRecord | None:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None

    def live_workers(self) -> list[str]:
        return [n.id for n in self.nodes if n.is_live_worker]

    def load(self, node_id: str) -> int:
        return sum(1 for d in self.deployments if d.node == node_id and d.status == "running")

    def to_dict(self) -> dict:
        return {
            "nodes": [vars(n).copy() for n in self.nodes],
            "deployments": [vars(d).copy() for d in self.deployments],
            "events_applied": len(self.event_log),
        }


def _with_nodes(state: ClusterState, nodes: dict[str, NodeRecord]) -> ClusterState:
    return replace(state, nodes=tuple(nodes[k] for k in sorted(nodes)))


def _log(before: ClusterState, after: ClusterState, action: tuple) -> ClusterState:
    if (after.nodes, after.deployments) == (before.nodes, before.deployments):
        return before
    return replace(after, event_log=before.event_log + (action,))


def _place_failed(state: ClusterState, exclude: str | None = None) -> ClusterState:
    """Move failed deployments, in id order, onto the least-loaded live worker (ties: lowest id)."""
    deps = list(state.deployments)
    targets = [w for w in state.live_workers() if w != exclude]
    if not targets:
        return state
    load = {w: 0 for w in targets}
    for d in deps:
        if d.status == "running" and d.node in load:
            load[d.node] += 1
    for i, d in enumerate(deps):
        if d.status != "failed":
            continue
        target = min(targets, key=lambda w: (load[w], w))
        deps[i] = replace(d, node=target, status="running")
        load[target] += 1
    return replace(state, deployments=tuple(deps))


def _fail_on(state: ClusterState, node_id: str) -> ClusterState:
    deps = tuple(
        replace(d, status="failed") if d.node == node_id and d.status == "running" else d
        for d in state.deployments
    )
    return replace(state, deployments=deps)


def _bootstrap(master_id: str, workers) -> ClusterState:
    ids = [master_id] + [w for w, _ in workers]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    if dupes:
        raise ClusterError(f"duplicate node ids: {dupes}")
    nodes = {master_id: NodeRecord(master_id, "master", "physical")}
    for wid, kind in workers:
        if kind not in ("physical", "virtual"):
            raise ClusterError(f"node {wid!r}: unknown kind {kind!r}")
        nodes[wid] = NodeRecord(wid, "worker", kind)
    return _with_nodes(ClusterState(nodes=()), nodes)


def _apply_events(state: ClusterState, events: TopologyEvents) -> ClusterState:
    master = state.master.id
    if master in events.nodes_left:
        raise ClusterError(f"refusing to remove master node {master!r}")
    nodes = {n.id: n for n in state.nodes}
    for nid in events.nodes_left:
        rec = nodes.get(nid)
        if rec is not None and rec.status == "live":
            nodes[nid] = replace(rec, status="removed")
            state = _fail_on(state, nid)
    for nid in events.nodes_joined:
        rec = nodes.get(nid)
        if rec is None:
            nodes[nid] = NodeRecord(nid, "worker", "virtual")
        elif rec.status == "removed":
            nodes[nid] = replace(rec, status="live")
    return _place_failed(_with_nodes(state, nodes))


def _schedule(state: ClusterState, tool: str, namespace: str) -> ClusterState:
    workers = state.live_workers()
    if not workers:
        raise SchedulingError("no live workers to schedule on")
    existing = {(d.tool, d.namespace, d.node) for d in state.deployments}
    deps = list(state.deployments)
    counter = state.next_deployment
    for w in workers:
        if (tool, namespace, w) in existing:
            continue
        deps.append(Deployment(f"dep-{counter:05d}", tool, namespace, w))
        counter += 1
    return replace(state, deployments=tuple(deps), next_deployment=counter)


def _reschedule(state: ClusterState, failed_node: str) -> ClusterState:
    rec = state.node(failed_node)
    if rec is None:
        raise ClusterError(f"unknown node {failed_node!r}")
    if rec.role == "worker":
        nodes = {n.id: n for n in state.nodes}
        nodes[failed_node] = replace(rec, status="removed")
        state = _with_nodes(state, nodes)
    return _place_failed(_fail_on(state, failed_node), exclude=failed_node)


def bootstrap(master_id: str, initial_workers=()) -> ClusterState:
    """Create a cluster; ``initial_workers`` is a sequence of ``(id, kind)``."""
    workers = tuple((w, k) for w, k in initial_workers)
    state = _bootstrap(master_id, workers)
    return replace(state, event_log=(("bootstrap", master_id, workers),))


def apply_topology_events(state: ClusterState, events: TopologyEvents) -> ClusterState:
    """Join/remove workers, fail deployments on removed nodes and re-place them."""
    return _log(state, _apply_events(state, events), ("topology", events))


def schedule_deployment(state: ClusterState, tool: str, namespace: str) -> ClusterState:
    """One running deployment of ``tool`` per live worker, all in ``namespace``; idempotent."""
    return _log(state, _schedule(state, tool, namespace), ("schedule", tool, namespace))


def reschedule_on_failure(state: ClusterState, failed_node: str) -> ClusterState:
    """Take a failed worker out of service and move its deployments elsewhere."""
    return _log(state, _reschedule(state, failed_node), ("fail", failed_node))


def replay(event_log) -> ClusterState:
    log = list(event_log)
    if not log or log[0][0] != "bootstrap":
        raise ClusterError("event log must start with a bootstrap entry")
    state = bootstrap(log[0][1], log[0][2])
    for action in log[1:]:
        kind = action[0]
        if kind == "topology":
            state = apply_topology_events(state, action[1])
        elif kind == "schedule":
            state = schedule_deployment(state, action[1], action[2])
        elif kind == "fail":
            state = reschedule_on_failure(state, action[1])
        else:
            raise ClusterError(f"unknown log entry {kind!r}")
    return state


def check_invariants(state: ClusterState) -> list[str]:
    """Return human-readable violations (empty when the state is safe)."""
    problems = []
    masters = [n for n in state.nodes if n.role == "master"]
    if len(masters) != 1:
        problems.append(f"expected one master, found {len(masters)}")
    elif masters[0].status != "live":
        problems.append("master is not live")
    live = {n.id for n in state.nodes if n.status == "live"}
    for d in state.deployments:
        if d.status == "running" and d.node not in live:
            problems.append(f"{d.id} running on non-live node {d.node}")
    return problems

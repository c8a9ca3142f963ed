"""End-to-end plan execution: constellation -> topology -> cluster -> QoS -> bundle."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

from . import __version__
from .cluster import ClusterState, apply_topology_events, bootstrap, schedule_deployment
from .errors import DomainError, NoContactError
from .orbit import SatelliteSpec, generate_constellation
from .qos import QoSReport, run_qos_session
from .report import ReportBundle, SkipRecord, aggregate
from .testplan import ScenarioRun, TestPlan, expand_matrix
from .topology import (
    ContactWindow,
    Pair,
    TopologyEvents,
    TopologySnapshot,
    all_contact_windows,
    compute_snapshots,
    degree_series,
    diff,
    make_pair,
    restrict_to_component,
    time_grid,
)

log = logging.getLogger(__name__)

PROBE_TOOL = "qos-probe"
PROBE_NAMESPACE = "satqos-test"


@dataclass
class PlanContext:
    plan: TestPlan
    specs: list[SatelliteSpec]
    snapshots: list[TopologySnapshot]
    windows: dict[Pair, list[ContactWindow]]
    distances: dict[Pair, dict[int, float]]

    def window_distances(self, pair: Pair) -> list[float]:
        """Mean link distance over the grid points each contact window covers."""
        step = self.plan.step_s
        t0 = self.snapshots[0].t
        by_index = self.distances.get(pair, {})
        out = []
        for w in self.windows.get(pair, []):
            first = round((w.start_s - t0) / step)
            last = round((w.end_s - t0) / step)
            ds = [by_index[i] for i in range(first, last)]
            out.append(sum(ds) / len(ds))
        return out


def prepare(plan: TestPlan) -> PlanContext:
    specs = generate_constellation(plan.constellation)
    times = time_grid(plan.window.t0_s, plan.window.t1_s, plan.step_s)
    snapshots = compute_snapshots(specs, plan.visibility, times)
    distances: dict[Pair, dict[int, float]] = {}
    for i, snap in enumerate(snapshots):
        for a, b, d in snap.edges:
            distances.setdefault((a, b), {})[i] = d
    windows = all_contact_windows(snapshots, plan.step_s)
    return PlanContext(plan, specs, snapshots, windows, distances)


def execute_run(run: ScenarioRun, ctx: PlanContext) -> QoSReport | SkipRecord:
    pair = make_pair(*run.pair)
    try:
        return run_qos_session(
            run.flow,
            run.link,
            run.loss,
            ctx.windows.get(pair, []),
            ctx.window_distances(pair),
            run.seed_derived,
            run_id=run.run_id,
        )
    except (NoContactError, DomainError) as exc:
        return SkipRecord(run.run_id, run.flow.src, run.flow.dst, run.bandwidth_hz, str(exc))


def drive_cluster(plan: TestPlan, snapshots: list[TopologySnapshot]) -> ClusterState:
    """Cluster scope follows the master's connected component over time."""
    master = plan.master
    workers = [(n.id, n.kind) for n in plan.cluster_nodes if n.role == "worker"]
    state = bootstrap(master, workers)
    scopes = [restrict_to_component(s, master) for s in snapshots]
    registered = {w for w, _ in workers}
    first = set(scopes[0].nodes) - {master}
    state = apply_topology_events(
        state,
        TopologyEvents(
            t=scopes[0].t,
            nodes_joined=tuple(sorted(first - registered)),
            nodes_left=tuple(sorted(registered - first)),
        ),
    )
    if state.live_workers():
        state = schedule_deployment(state, PROBE_TOOL, PROBE_NAMESPACE)
    for prev, nxt in zip(scopes, scopes[1:]):
        events = diff(prev, nxt)
        if not events.is_empty:
            state = apply_topology_events(state, events)
    return state


def default_jobs(n_runs: int) -> int:
    return max(1, min(n_runs, os.cpu_count() or 1))


def run_plan(plan: TestPlan, jobs: int | None = None, progress=None) -> ReportBundle:
    """Execute every scenario run of ``plan``; results do not depend on ``jobs``."""
    ctx = prepare(plan)
    runs = expand_matrix(plan)
    jobs = jobs or default_jobs(len(runs))
    log.info("plan: %d satellites, %d snapshots, %d runs, jobs=%d",
             len(ctx.specs), len(ctx.snapshots), len(runs), jobs)

    outcomes = []

    def record(outcome):
        outcomes.append(outcome)
        if progress is not None:
            status = "ok" if isinstance(outcome, QoSReport) else "skipped"
            progress(f"run_id={outcome.run_id} status={status}")

    if jobs == 1:
        for run in runs:
            record(execute_run(run, ctx))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(execute_run, run, ctx) for run in runs]
            for fut in as_completed(futures):
                record(fut.result())

    cluster = drive_cluster(plan, ctx.snapshots)
    node = plan.degree_node
    return aggregate(
        plan,
        outcomes,
        topology={"node": node, "degrees": [[t, d] for t, d in degree_series(ctx.snapshots, node)]},
        cluster=cluster.to_dict(),
        meta={"tool_version": __version__, "seed": plan.seed},
    )

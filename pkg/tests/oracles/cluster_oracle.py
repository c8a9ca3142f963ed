"""Mutable, step-by-step re-statement of the cluster placement rules.

Used only as an oracle against ``satqos.cluster``; shares no code with it.
"""


class ReplayOracle:
    def __init__(self, master, workers):
        self.nodes = {master: {"role": "master", "kind": "physical", "status": "live"}}
        for wid, kind in workers:
            self.nodes[wid] = {"role": "worker", "kind": kind, "status": "live"}
        self.deps = []  # dicts, in creation order
        self.counter = 0

    def _live_workers(self, exclude=None):
        return sorted(
            n for n, r in self.nodes.items()
            if r["role"] == "worker" and r["status"] == "live" and n != exclude
        )

    def _place_failed(self, exclude=None):
        targets = self._live_workers(exclude)
        if not targets:
            return
        for dep in sorted(self.deps, key=lambda d: d["id"]):
            if dep["status"] != "failed":
                continue
            loads = {
                w: len([d for d in self.deps if d["node"] == w and d["status"] == "running"])
                for w in targets
            }
            best = sorted(targets, key=lambda w: (loads[w], w))[0]
            dep["node"], dep["status"] = best, "running"

    def _fail(self, node):
        for dep in self.deps:
            if dep["node"] == node and dep["status"] == "running":
                dep["status"] = "failed"

    def events(self, joined, left):
        master = next(n for n, r in self.nodes.items() if r["role"] == "master")
        if master in left:
            return False
        for n in left:
            if n in self.nodes and self.nodes[n]["status"] == "live":
                self.nodes[n]["status"] = "removed"
                self._fail(n)
        for n in joined:
            if n not in self.nodes:
                self.nodes[n] = {"role": "worker", "kind": "virtual", "status": "live"}
            else:
                self.nodes[n]["status"] = "live"
        self._place_failed()
        return True

    def schedule(self, tool, ns):
        workers = self._live_workers()
        if not workers:
            return False
        for w in workers:
            if any(d["tool"] == tool and d["namespace"] == ns and d["node"] == w for d in self.deps):
                continue
            self.deps.append(
                {"id": "dep-%05d" % self.counter, "tool": tool, "namespace": ns, "node": w, "status": "running"}
            )
            self.counter += 1
        return True

    def fail(self, node):
        if node not in self.nodes:
            return False
        if self.nodes[node]["role"] == "worker":
            self.nodes[node]["status"] = "removed"
        self._fail(node)
        self._place_failed(exclude=node)
        return True

    def export(self):
        return {
            "nodes": [{"id": n, **self.nodes[n]} for n in sorted(self.nodes)],
            "deployments": [dict(d) for d in sorted(self.deps, key=lambda d: d["id"])],
        }

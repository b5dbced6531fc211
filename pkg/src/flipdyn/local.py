"""One round of the cluster-flip chain as a synchronous LOCAL protocol.

Every vertex runs the same program and talks only to its neighbours.
Phases, each a fixed number of message rounds:

1. discovery (6 rounds): full-information relay, after which each vertex
   knows its radius-6 ball and hence every cluster it belongs to;
2. activation (5 rounds): the pres of each cluster draws the activation
   coin and floods the news along the cluster's own edges;
3. announce (1 round): each vertex tells its neighbours which active
   clusters contain it;
4. deactivation (5 rounds): a member that sees an overlap or a conflict
   floods a deactivation notice back to the pres;
5. commit (5 rounds): the pres draws the flip coin and floods the commit.

A cluster has at most 6 vertices, so its diameter is at most 5 and every
flood finishes in time. The schedule does not depend on the instance.
Coins come from the same keyed stream as :func:`distributed_round`, so
the two produce identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from flipdyn.clusters import Cluster, color_pair, component
from flipdyn.coloring import Coloring, is_proper
from flipdyn.dynamics import RoundParams, RoundTrace, cluster_word
from flipdyn.graph import Graph
from flipdyn.rng import STREAM_ACTIVATE, STREAM_FLIP, keyed_uniform

DISCOVERY_ROUNDS = 6
FLOOD_ROUNDS = 5  # diameter of a 6-vertex cluster
ROUND_BUDGET = DISCOVERY_ROUNDS + FLOOD_ROUNDS + 1 + FLOOD_ROUNDS + FLOOD_ROUNDS

Key = tuple[int, tuple[int, ...]]  # (pres, color pair)


@dataclass(frozen=True)
class Message:
    src: int
    dst: int
    round: int
    kind: str  # discovery | activation | announce | deactivation | flip-commit
    payload: Any

    def to_json(self) -> dict:
        if self.kind == "discovery":
            body = {str(v): [c, list(nb)] for v, (c, nb) in sorted(self.payload.items())}
        elif self.kind == "announce":
            body = [[p, list(cs)] for p, cs in sorted(self.payload)]
        elif self.kind == "deactivation":
            (p, cs), reason = self.payload
            body = {"cluster": [p, list(cs)], "reason": reason}
        else:
            p, cs = self.payload
            body = [p, list(cs)]
        return {"src": self.src, "dst": self.dst, "round": self.round, "kind": self.kind, "payload": body}


@dataclass(frozen=True)
class Decision:
    """A coin drawn by ``vertex`` on behalf of ``cluster``."""

    vertex: int
    cluster: Key
    kind: str  # activate | flip
    outcome: bool


@dataclass
class ProtocolRun:
    rounds_used: int
    messages: list[list[Message]]
    result: Coloring
    trace: RoundTrace
    decisions: list[Decision] = field(default_factory=list)

    def message_count(self) -> int:
        return sum(len(r) for r in self.messages)

    def to_jsonl(self) -> str:
        import json

        return "".join(json.dumps(m.to_json()) + "\n" for rnd in self.messages for m in rnd)


class _Vertex:
    def __init__(self, v: int, color: int, nbrs: tuple[int, ...]):
        self.v = v
        self.known: dict[int, tuple[int, tuple[int, ...]]] = {v: (color, nbrs)}
        self.fresh = dict(self.known)
        self.nbrs = nbrs
        self.clusters: list[Cluster] = []
        self.active: set[Key] = set()
        self.new_active: set[Key] = set()
        self.dead: dict[Key, set[str]] = {}
        self.new_dead: set[tuple[Key, str]] = set()
        self.heard: dict[int, list[Key]] = {}
        self.commits: set[Key] = set()
        self.new_commits: set[Key] = set()

    def learn_clusters(self, n: int, k: int) -> None:
        adj: list[tuple[int, ...]] = [()] * n
        col = [0] * n
        for u, (c, nb) in self.known.items():
            adj[u], col[u] = nb, c
        own = col[self.v]
        for c in range(1, k + 1):
            comp = component(adj, col, self.v, c, cap=6)
            if comp is not None:
                self.clusters.append(Cluster(comp, color_pair(own, c)))


def _flood(nodes: list[_Vertex], log: list[list[Message]], kind: str, attr: str,
           members: dict[Key, frozenset[int]], rnd0: int) -> int:
    """Relay the keys in ``node.<attr>`` (plus fresh ones) along cluster edges for FLOOD_ROUNDS."""
    rnd = rnd0
    new_attr = "new_" + attr
    for _ in range(FLOOD_ROUNDS):
        out: list[Message] = []
        for node in nodes:
            for item in sorted(getattr(node, new_attr)):
                key = item[0] if kind == "deactivation" else item
                for w in node.nbrs:
                    if w in members[key]:
                        out.append(Message(node.v, w, rnd, kind, item))
            setattr(node, new_attr, set())
        for m in out:
            node = nodes[m.dst]
            if kind == "deactivation":
                key, reason = m.payload
                if reason not in node.dead.setdefault(key, set()):
                    node.dead[key].add(reason)
                    node.new_dead.add(m.payload)
            else:
                have = getattr(node, attr)
                if m.payload not in have:
                    have.add(m.payload)
                    getattr(node, new_attr).add(m.payload)
        log.append(out)
        rnd += 1
    return rnd


def run_local_round(g: Graph, sigma: Coloring, params: RoundParams) -> ProtocolRun:
    """Execute one round by synchronous message passing."""
    if not is_proper(g, sigma):
        raise ValueError("the protocol requires a proper coloring")
    n, k = g.n, sigma.k
    nodes = [_Vertex(v, sigma[v], tuple(g.adjacency[v])) for v in range(n)]
    log: list[list[Message]] = []
    decisions: list[Decision] = []
    rnd = 0

    # 1. discovery
    for _ in range(DISCOVERY_ROUNDS):
        out = [Message(node.v, w, rnd, "discovery", node.fresh) for node in nodes if node.fresh for w in node.nbrs]
        for node in nodes:
            node.fresh = {}
        for m in out:
            node = nodes[m.dst]
            for u, rec in m.payload.items():
                if u not in node.known:
                    node.known[u] = rec
                    node.fresh[u] = rec
        log.append(out)
        rnd += 1
    for node in nodes:
        node.learn_clusters(n, k)

    # 2. pres draws activation coins
    col = sigma.colors
    alpha = params.alpha_float
    members: dict[Key, frozenset[int]] = {}
    led: dict[int, list[Cluster]] = {}
    for node in nodes:
        for cl in node.clusters:
            members[cl.key] = frozenset(cl.vertices)
            if cl.pres == node.v:
                led.setdefault(node.v, []).append(cl)
                u = keyed_uniform(params.seed, params.round_index, cluster_word(cl, col, params.keying, STREAM_ACTIVATE))
                on = alpha > 0 and u < alpha
                decisions.append(Decision(node.v, cl.key, "activate", on))
                if on:
                    node.active.add(cl.key)
                    node.new_active.add(cl.key)
    rnd = _flood(nodes, log, "activation", "active", members, rnd)

    # 3. announce
    out = []
    for node in nodes:
        if node.active:
            mine = tuple(sorted(node.active))
            out.extend(Message(node.v, w, rnd, "announce", mine) for w in node.nbrs)
    for m in out:
        nodes[m.dst].heard[m.src] = list(m.payload)
    log.append(out)
    rnd += 1

    # 4. local detection, then deactivation flood towards pres
    for node in nodes:
        if len(node.active) > 1:
            for key in node.active:
                node.dead.setdefault(key, set()).add("overlap")
                node.new_dead.add((key, "overlap"))
        for key in node.active:
            pair = set(key[1])
            for w, keys in node.heard.items():
                if any(other != key and not pair.isdisjoint(other[1]) for other in keys):
                    node.dead.setdefault(key, set()).add("conflict")
                    node.new_dead.add((key, "conflict"))
                    break
    rnd = _flood(nodes, log, "deactivation", "dead", members, rnd)

    # 5. pres draws flip coins and floods commits
    active, over, confl, flipped = [], [], [], []
    for v, cls in led.items():
        node = nodes[v]
        for cl in cls:
            if cl.key not in node.active:
                continue
            active.append(cl)
            reasons = node.dead.get(cl.key, set())
            if "overlap" in reasons:
                over.append(cl)
                continue
            if "conflict" in reasons:
                confl.append(cl)
                continue
            p = float(params.schedule[cl.size])
            u = keyed_uniform(params.seed, params.round_index, cluster_word(cl, col, params.keying, STREAM_FLIP))
            hit = u < p
            decisions.append(Decision(v, cl.key, "flip", hit))
            if hit:
                flipped.append(cl)
                node.commits.add(cl.key)
                node.new_commits.add(cl.key)
    rnd = _flood(nodes, log, "flip-commit", "commits", members, rnd)

    new = list(col)
    for node in nodes:
        for _, cs in node.commits:
            if len(cs) == 2:
                a, b = cs
                new[node.v] = b if col[node.v] == a else a
    result = Coloring(tuple(new), k) if flipped else sigma
    trace = RoundTrace(tuple(sorted(active)), tuple(sorted(over)), tuple(sorted(confl)), tuple(sorted(flipped)))
    return ProtocolRun(rnd, log, result, trace, decisions)


@dataclass
class AuditReport:
    locality: list[Message] = field(default_factory=list)
    budget: list[str] = field(default_factory=list)
    responsibility: list[Decision] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.locality or self.budget or self.responsibility)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "locality": [m.to_json() for m in self.locality],
            "budget": self.budget,
            "responsibility": [{"vertex": d.vertex, "cluster": [d.cluster[0], list(d.cluster[1])],
                                "kind": d.kind} for d in self.responsibility],
        }


def audit_protocol(run: ProtocolRun, g: Graph) -> AuditReport:
    """Check locality, the round budget, and that only pres vertices draw coins."""
    rep = AuditReport()
    edges = {(u, w) for u in range(g.n) for w in g.adjacency[u]}
    for rnd in run.messages:
        rep.locality.extend(m for m in rnd if (m.src, m.dst) not in edges)
    if run.rounds_used > ROUND_BUDGET:
        rep.budget.append(f"rounds_used={run.rounds_used} exceeds {ROUND_BUDGET}")
    if len(run.messages) != run.rounds_used:
        rep.budget.append(f"log has {len(run.messages)} rounds, run claims {run.rounds_used}")
    rep.responsibility.extend(d for d in run.decisions if d.vertex != d.cluster[0])
    return rep

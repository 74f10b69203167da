"""Reference solvers used to validate the auction.

Two independent routes: exhaustive enumeration (tiny instances) and a
successive-shortest-path min-cost-flow solve of the supernode network.
Neither shares code with :mod:`mmauction.auction`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from mmauction.problem import Assignment, InfeasibleInstanceError, Instance, SizeGuardError

BRUTE_FORCE_LIMIT = 10**7
_CHUNK = 1 << 16


def brute_force_optimum(instance: Instance, limit: int = BRUTE_FORCE_LIMIT) -> tuple[Assignment, int]:
    """Enumerate every client -> AP map; keep those leaving no AP empty.

    The search space is the product of ``|B(j)|`` (at most ``m**n``).  Maps are
    visited in lexicographic order, so ties resolve to the lexicographically
    smallest assignment.
    """
    m, n = instance.m, instance.n
    sizes = [len(bj) for bj in instance.adjacency_B]
    total = math.prod(sizes)
    if total > limit:
        raise SizeGuardError(f"{total} candidate maps exceed the brute-force limit of {limit}")

    choices = [np.asarray(bj, dtype=np.int64) for bj in instance.adjacency_B]
    strides = [math.prod(sizes[j + 1 :]) for j in range(n)]
    benefit = instance.benefit
    cols = np.arange(n)

    best_value = -1
    best_index = -1
    for start in range(0, total, _CHUNK):
        k = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        aps = np.empty((k.size, n), dtype=np.int64)
        for j in range(n):
            aps[:, j] = choices[j][(k // strides[j]) % sizes[j]]
        values = benefit[aps, cols].sum(axis=1)
        covered = np.zeros((k.size, m), dtype=bool)
        covered[np.arange(k.size)[:, None], aps] = True
        values = np.where(covered.all(axis=1), values, -1)
        idx = int(np.argmax(values))
        if values[idx] > best_value:
            best_value = int(values[idx])
            best_index = int(k[idx])

    if best_value < 0:
        raise InfeasibleInstanceError("no client -> AP map covers every AP")
    owner = tuple(
        int(instance.adjacency_B[j][(best_index // strides[j]) % sizes[j]]) for j in range(n)
    )
    return Assignment(owner, m), best_value


@dataclass
class Arc:
    tail: int
    head: int
    capacity: int
    cost: int
    flow: int = 0


@dataclass
class FlowNetwork:
    """Supernode network: node 0 is the supernode, then APs, clients, sink.

    Supplies: supernode ``n - m``, each AP ``1``, sink ``-n``.
    """

    m: int
    n: int
    arcs: list[Arc] = field(default_factory=list)
    supply: list[int] = field(default_factory=list)

    @property
    def supernode(self) -> int:
        return 0

    def ap_node(self, i: int) -> int:
        return 1 + i

    def client_node(self, j: int) -> int:
        return 1 + self.m + j

    @property
    def sink(self) -> int:
        return 1 + self.m + self.n

    @property
    def num_nodes(self) -> int:
        return self.m + self.n + 2

    @classmethod
    def from_instance(cls, instance: Instance) -> "FlowNetwork":
        m, n = instance.m, instance.n
        net = cls(m, n)
        net.supply = [0] * net.num_nodes
        net.supply[net.supernode] = n - m
        for i in range(m):
            net.supply[net.ap_node(i)] = 1
        net.supply[net.sink] = -n
        for i in range(m):
            net.arcs.append(Arc(net.supernode, net.ap_node(i), n - m, 0))
        for i, j in instance.pairs():
            net.arcs.append(Arc(net.ap_node(i), net.client_node(j), 1, -int(instance.benefit[i, j])))
        for j in range(n):
            net.arcs.append(Arc(net.client_node(j), net.sink, 1, 0))
        return net

    def total_cost(self) -> int:
        return sum(a.cost * a.flow for a in self.arcs)

    def imbalance(self) -> list[int]:
        """supply + inflow - outflow per node; all zero for a feasible flow."""
        out = list(self.supply)
        for a in self.arcs:
            out[a.tail] -= a.flow
            out[a.head] += a.flow
        return out

    def solve(self) -> None:
        """Successive shortest paths from an auxiliary root through the supply nodes."""
        root = self.num_nodes
        N = root + 1
        # residual graph as parallel arrays; edge e and e ^ 1 are partners
        to: list[int] = []
        cap: list[int] = []
        cost: list[int] = []
        adj: list[list[int]] = [[] for _ in range(N)]

        def add(u: int, v: int, c: int, w: int) -> int:
            adj[u].append(len(to))
            to.append(v), cap.append(c), cost.append(w)
            adj[v].append(len(to))
            to.append(u), cap.append(0), cost.append(-w)
            return len(to) - 2

        arc_edges = [add(a.tail, a.head, a.capacity, a.cost) for a in self.arcs]
        need = 0
        for v, s in enumerate(self.supply):
            if s > 0:
                add(root, v, s, 0)
                need += s

        # initial potentials by Bellman-Ford (no negative cycles: the network is acyclic)
        INF = math.inf
        h = [INF] * N
        h[root] = 0
        for _ in range(N):
            changed = False
            for u in range(N):
                if h[u] == INF:
                    continue
                for e in adj[u]:
                    if cap[e] > 0 and h[u] + cost[e] < h[to[e]]:
                        h[to[e]] = h[u] + cost[e]
                        changed = True
            if not changed:
                break
        h = [0 if x == INF else x for x in h]

        sink = self.sink
        sent = 0
        while sent < need:
            dist = [INF] * N
            prev_edge = [-1] * N
            dist[root] = 0
            pq = [(0, root)]
            while pq:
                d, u = heapq.heappop(pq)
                if d > dist[u]:
                    continue
                for e in adj[u]:
                    if cap[e] <= 0:
                        continue
                    v = to[e]
                    nd = d + cost[e] + h[u] - h[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        prev_edge[v] = e
                        heapq.heappush(pq, (nd, v))
            if dist[sink] == INF:
                break
            for v in range(N):
                if dist[v] < INF:
                    h[v] += dist[v]
            push = need - sent
            v = sink
            while v != root:
                e = prev_edge[v]
                push = min(push, cap[e])
                v = to[e ^ 1]
            v = sink
            while v != root:
                e = prev_edge[v]
                cap[e] -= push
                cap[e ^ 1] += push
                v = to[e ^ 1]
            sent += push

        for a, e in zip(self.arcs, arc_edges):
            a.flow = cap[e ^ 1]
        if sent < need:
            raise InfeasibleInstanceError(f"network carries only {sent} of {need} flow units")

    def decode(self) -> Assignment:
        owner: list[int | None] = [None] * self.n
        for a in self.arcs:
            if a.flow and 1 <= a.tail <= self.m and a.head < self.sink:
                owner[a.head - 1 - self.m] = a.tail - 1
        return Assignment(tuple(owner), self.m)


def min_cost_flow_optimum(instance: Instance) -> tuple[Assignment, int]:
    net = FlowNetwork.from_instance(instance)
    net.solve()
    assignment = net.decode()
    return assignment, -net.total_cost()

"""Louvain modularity maximisation, used to pick the number of clusters."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class Partition:
    community_of: tuple[int, ...]
    k: int
    modularity: float
    trace: tuple[float, ...] = ()

    def write_tsv(self, fh, node_labels=None) -> None:
        for node, com in enumerate(self.community_of):
            label = node_labels[node] if node_labels is not None else node
            fh.write(f"{label}\t{com}\n")


def modularity(g: Graph, community_of) -> float:
    """Newman-Girvan modularity (resolution 1) of an undirected partition."""
    und = g.to_undirected()
    m = und.e
    if m == 0:
        raise ValueError("modularity is undefined for a graph without edges")
    deg = np.zeros(und.n)
    inside = defaultdict(float)
    for i, j in und.edges:
        deg[i] += 1
        deg[j] += 1
        if community_of[i] == community_of[j]:
            inside[community_of[i]] += 1
    tot = defaultdict(float)
    for node, com in enumerate(community_of):
        tot[com] += deg[node]
    return sum(inside[c] / m - (tot[c] / (2.0 * m)) ** 2 for c in tot)


def _weighted_modularity(adj, com, m2):
    inside = defaultdict(float)
    tot = defaultdict(float)
    for u, nbrs in enumerate(adj):
        for v, w in nbrs.items():
            tot[com[u]] += w
            if com[u] == com[v]:
                inside[com[u]] += w
    return sum(inside[c] / m2 - (tot[c] / m2) ** 2 for c in tot)


def _one_level(adj, rng):
    """Local moving phase. Returns the community of each node."""
    n = len(adj)
    degree = np.array([sum(nbrs.values()) for nbrs in adj])
    m2 = degree.sum()
    com = list(range(n))
    tot = degree.astype(float).copy()
    order = rng.permutation(n)
    moved = True
    while moved:
        moved = False
        for u in order:
            u = int(u)
            old = com[u]
            links = defaultdict(float)
            for v, w in adj[u].items():
                if v != u:
                    links[com[v]] += w
            tot[old] -= degree[u]
            best, best_gain = old, links.get(old, 0.0) - tot[old] * degree[u] / m2
            for c in sorted(links):
                gain = links[c] - tot[c] * degree[u] / m2
                if gain > best_gain or (gain == best_gain and c < best):
                    best, best_gain = c, gain
            tot[best] += degree[u]
            if best != old:
                com[u] = best
                moved = True
    return com


def louvain_auto_k(g: Graph, seed: int = 0) -> Partition:
    """Two-phase Louvain partition of ``g`` (directed input is symmetrised).

    Node visit order in each local-moving phase is shuffled under ``seed``.
    The returned ``trace`` holds the modularity after every aggregation level.
    """
    und = g.to_undirected()
    if und.e == 0:
        raise ValueError("cannot partition a graph without edges")
    rng = np.random.default_rng(seed)
    adj: list[dict[int, float]] = [defaultdict(float) for _ in range(und.n)]
    for i, j in und.edges:
        adj[i][j] += 1.0
        adj[j][i] += 1.0
    m2 = 2.0 * und.e
    membership = list(range(und.n))
    trace = [_weighted_modularity(adj, list(range(und.n)), m2)]
    while True:
        com = _one_level(adj, rng)
        labels = {c: k for k, c in enumerate(dict.fromkeys(com))}
        com = [labels[c] for c in com]
        if len(labels) == len(adj):
            break
        membership = [com[c] for c in membership]
        agg: list[dict[int, float]] = [defaultdict(float) for _ in range(len(labels))]
        for u, nbrs in enumerate(adj):
            for v, w in nbrs.items():
                agg[com[u]][com[v]] += w
        adj = agg
        trace.append(_weighted_modularity(adj, list(range(len(adj))), m2))
    # dense ids in order of first appearance by node index
    relabel = {c: k for k, c in enumerate(dict.fromkeys(membership))}
    membership = tuple(relabel[c] for c in membership)
    return Partition(membership, len(relabel), modularity(und, membership), tuple(trace))

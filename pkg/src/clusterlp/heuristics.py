"""Neighbourhood heuristics (Jaccard, Adamic-Adar, preferential attachment)."""

import csv
import math

from .graph import Graph

METHODS = ("jc", "aa", "pa")


def heuristic_scores(g: Graph, pairs, method: str) -> list[float]:
    """Score each ``(i, j)`` pair of an undirected graph with one heuristic."""
    if g.directed:
        raise ValueError("heuristic scores are defined for undirected graphs only")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    nbrs = g.neighbors()
    scores = []
    for p in pairs:
        i, j = p[0], p[1]
        if not (0 <= i < g.n and 0 <= j < g.n):
            raise IndexError(f"pair ({i}, {j}) out of range")
        a, b = nbrs[i], nbrs[j]
        if method == "jc":
            union = len(a | b)
            scores.append(len(a & b) / union if union else 0.0)
        elif method == "pa":
            scores.append(float(len(a) * len(b)))
        else:
            # degree-1 common neighbours would divide by ln 1 = 0
            scores.append(sum(1.0 / math.log(len(nbrs[z])) for z in a & b if len(nbrs[z]) > 1))
    return scores


def write_scores_csv(fh, pairs, method, scores, node_labels=None) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["src", "dst", "method", "score"])
    for p, s in zip(pairs, scores):
        i, j = p[0], p[1]
        if node_labels is not None:
            i, j = node_labels[i], node_labels[j]
        w.writerow([i, j, method, repr(float(s))])

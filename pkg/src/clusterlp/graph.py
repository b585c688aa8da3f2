"""Graph data model, edge-list ingestion and train/test split generation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, TextIO

import numpy as np

logger = logging.getLogger(__name__)

OBSERVED_EDGE = "observed_edge"
SAMPLED_NEGATIVE = "sampled_negative"
REMOVED_EDGE = "removed_edge"
REVERSED_DIRECTION = "reversed_direction"
PROVENANCE_TAGS = (OBSERVED_EDGE, SAMPLED_NEGATIVE, REMOVED_EDGE, REVERSED_DIRECTION)


class GraphFormatError(ValueError):
    """Raised when an edge list cannot be parsed."""


class SplitError(ValueError):
    """Raised when a requested split cannot be generated from a graph."""


@dataclass(frozen=True)
class Graph:
    """Unweighted graph over dense node indices ``0..n-1``.

    Undirected edges are stored once as ``(i, j)`` with ``i < j``.
    """

    directed: bool
    node_labels: tuple[str, ...]
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        n = len(self.node_labels)
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for {n} nodes")
            if not self.directed and i > j:
                raise ValueError(f"undirected edge ({i}, {j}) not in canonical order")

    @property
    def n(self) -> int:
        return len(self.node_labels)

    @property
    def e(self) -> int:
        return len(self.edges)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], n: int | None = None,
                   directed: bool = False, node_labels=None) -> "Graph":
        """Build a graph from index pairs, dropping self-loops and duplicates."""
        canon = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j:
                continue
            if not directed and i > j:
                i, j = j, i
            canon.add((i, j))
        if node_labels is None:
            if n is None:
                n = 1 + max((max(p) for p in canon), default=-1)
            node_labels = [str(k) for k in range(n)]
        return cls(directed, tuple(node_labels), frozenset(canon))

    def has_edge(self, i: int, j: int) -> bool:
        if not self.directed and i > j:
            i, j = j, i
        return (i, j) in self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def reciprocal_pairs(self) -> list[tuple[int, int]]:
        """Directed pairs ``(i, j)`` with ``i < j`` present in both directions."""
        return sorted((i, j) for i, j in self.edges if i < j and (j, i) in self.edges)

    def unidirectional_edges(self) -> list[tuple[int, int]]:
        return sorted((i, j) for i, j in self.edges if (j, i) not in self.edges)

    def neighbors(self) -> list[set[int]]:
        """Undirected neighbour sets (direction ignored)."""
        nbrs: list[set[int]] = [set() for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return nbrs

    def to_undirected(self) -> "Graph":
        if not self.directed:
            return self
        return Graph.from_edges(self.edges, directed=False, node_labels=self.node_labels)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        for i, j in self.edges:
            a[i, j] = 1.0
            if not self.directed:
                a[j, i] = 1.0
        return a


def load_edge_list(source: TextIO, directed: bool = False) -> Graph:
    """Read a whitespace-separated edge list.

    Lines that are blank or start with ``#`` are ignored. Labels are mapped to
    indices in order of first appearance. Self-loops and duplicate edges are
    dropped (and counted in the log).
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    edges: set[tuple[int, int]] = set()
    n_loops = n_dups = 0
    for lineno, line in enumerate(source, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise GraphFormatError(f"line {lineno}: expected 2 tokens, got {len(tokens)}")
        ids = []
        for tok in tokens:
            if tok not in index:
                index[tok] = len(labels)
                labels.append(tok)
            ids.append(index[tok])
        i, j = ids
        if i == j:
            n_loops += 1
            continue
        if not directed and i > j:
            i, j = j, i
        if (i, j) in edges:
            n_dups += 1
            continue
        edges.add((i, j))
    if not edges:
        raise GraphFormatError("edge list contains no edges")
    if n_loops or n_dups:
        logger.info("dropped %d self-loops and %d duplicate edges", n_loops, n_dups)
    return Graph(directed, tuple(labels), frozenset(edges))


def read_edge_list(path, directed: bool = False) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, directed=directed)


class LabeledPair(NamedTuple):
    src: int
    dst: int
    label: int
    provenance: str


@dataclass(frozen=True)
class LinkSplit:
    """Disjoint labelled train and test pair sets."""

    train: tuple[LabeledPair, ...]
    test: tuple[LabeledPair, ...]

    @property
    def train_pairs(self) -> list[tuple[int, int, int]]:
        return [(p.src, p.dst, p.label) for p in self.train]

    @property
    def test_pairs(self) -> list[tuple[int, int, int]]:
        return [(p.src, p.dst, p.label) for p in self.test]

    @staticmethod
    def arrays(pairs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(src, dst, label)`` integer arrays for a pair sequence."""
        if len(pairs) == 0:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty.copy(), empty.copy()
        a = np.asarray([(p[0], p[1], p[2]) for p in pairs], dtype=np.int64)
        return a[:, 0], a[:, 1], a[:, 2]

    def write_tsv(self, fh: TextIO, node_labels=None) -> None:
        """Write ``src<TAB>dst<TAB>label<TAB>provenance`` rows, train first."""
        for part in (self.train, self.test):
            for p in part:
                s, d = (node_labels[p.src], node_labels[p.dst]) if node_labels else (p.src, p.dst)
                fh.write(f"{s}\t{d}\t{p.label}\t{p.provenance}\n")


def _non_edge_pool_size(g: Graph) -> int:
    n = g.n
    total = n * (n - 1) if g.directed else n * (n - 1) // 2
    return total - g.e


def _sample_non_edges(g: Graph, count: int, rng: np.random.Generator,
                      exclude: set[tuple[int, int]]) -> list[tuple[int, int]]:
    """Rejection-sample ``count`` distinct non-edges not in ``exclude``."""
    available = _non_edge_pool_size(g) - sum(1 for p in exclude if not g.has_edge(*p))
    if count > available:
        raise SplitError(
            f"non-edge pool exhausted: need {count} negatives, only {available} available "
            f"(shortfall {count - available})")
    taken: set[tuple[int, int]] = set()
    out: list[tuple[int, int]] = []
    n = g.n
    while len(out) < count:
        batch = max(64, 2 * (count - len(out)))
        cand = rng.integers(0, n, size=(batch, 2))
        for i, j in cand.tolist():
            if i == j:
                continue
            if not g.directed and i > j:
                i, j = j, i
            p = (i, j)
            if p in g.edges or p in exclude or p in taken:
                continue
            taken.add(p)
            out.append(p)
            if len(out) == count:
                break
    return out


def split_undirected(g: Graph, train_frac: float = 0.9, neg_train_ratio: float = 4.0,
                     seed: int = 0) -> LinkSplit:
    """Random edge split with uniformly sampled negatives.

    ``floor(train_frac * E)`` edges plus ``floor(neg_train_ratio * that)``
    non-edges form the training set; the held-out edges plus the same number
    of fresh non-edges form the test set.
    """
    if g.directed:
        raise SplitError("split_undirected requires an undirected graph")
    if not 0.0 < train_frac < 1.0:
        raise SplitError(f"train_frac must lie in (0, 1), got {train_frac}")
    rng = np.random.default_rng(seed)
    edges = g.sorted_edges()
    n_train = math.floor(train_frac * len(edges))
    n_test = len(edges) - n_train
    if n_test == 0:
        raise SplitError(f"train_frac={train_frac} leaves no test edges out of {len(edges)}")
    order = rng.permutation(len(edges))
    train_pos = [edges[k] for k in order[:n_train]]
    test_pos = [edges[k] for k in order[n_train:]]
    n_neg_train = math.floor(neg_train_ratio * n_train)
    negs = _sample_non_edges(g, n_neg_train + n_test, rng, set())
    train = [LabeledPair(i, j, 1, OBSERVED_EDGE) for i, j in train_pos]
    train += [LabeledPair(i, j, 0, SAMPLED_NEGATIVE) for i, j in negs[:n_neg_train]]
    test = [LabeledPair(i, j, 1, REMOVED_EDGE) for i, j in test_pos]
    test += [LabeledPair(i, j, 0, SAMPLED_NEGATIVE) for i, j in negs[n_neg_train:]]
    return LinkSplit(tuple(train), tuple(test))


def _directed_training(g: Graph, train_pos, test, neg_train_ratio, rng) -> LinkSplit:
    """Training set for directed splits.

    Negatives are the reverses of training edges that are not edges themselves
    (the only direct signal about link direction) plus uniformly sampled
    ordered non-edges. Test pairs are never reused.
    """
    exclude = {(p.src, p.dst) for p in test}
    reversed_negs = [(j, i) for i, j in train_pos
                     if (j, i) not in g.edges and (j, i) not in exclude]
    exclude.update(reversed_negs)
    n_neg = math.floor(neg_train_ratio * len(train_pos))
    negs = _sample_non_edges(g, n_neg, rng, exclude)
    train = [LabeledPair(i, j, 1, OBSERVED_EDGE) for i, j in train_pos]
    train += [LabeledPair(i, j, 0, REVERSED_DIRECTION) for i, j in reversed_negs]
    train += [LabeledPair(i, j, 0, SAMPLED_NEGATIVE) for i, j in negs]
    return LinkSplit(tuple(train), tuple(test))


def _log_isolated(g: Graph, train_pos) -> None:
    touched = np.zeros(g.n, dtype=bool)
    for i, j in train_pos:
        touched[i] = touched[j] = True
    lost = int(g.n - touched.sum())
    if lost:
        logger.warning("%d nodes have no incident training edge after the split", lost)


def split_bns(g: Graph, remove_frac: float = 0.1, seed: int = 0,
              neg_train_ratio: float = 4.0) -> LinkSplit:
    """Biased-negative-samples split for directed graphs.

    ``floor(remove_frac * E)`` unidirectional edges are held out. Each removed
    ``(i, j)`` contributes ``(i, j)`` as a positive and ``(j, i)`` as a negative
    test pair.
    """
    if not g.directed:
        raise SplitError("split_bns requires a directed graph")
    rng = np.random.default_rng(seed)
    uni = g.unidirectional_edges()
    if not uni:
        raise SplitError("graph has no unidirectional edge to remove")
    n_remove = math.floor(remove_frac * g.e)
    if n_remove < 1:
        raise SplitError(f"remove_frac={remove_frac} removes no edge out of {g.e}")
    if n_remove > len(uni):
        raise SplitError(f"cannot remove {n_remove} unidirectional edges, only {len(uni)} exist")
    picked = sorted(rng.choice(len(uni), size=n_remove, replace=False).tolist())
    removed = [uni[k] for k in picked]
    removed_set = set(removed)
    train_pos = [p for p in g.sorted_edges() if p not in removed_set]
    _log_isolated(g, train_pos)
    test = []
    for i, j in removed:
        test.append(LabeledPair(i, j, 1, REMOVED_EDGE))
        test.append(LabeledPair(j, i, 0, REVERSED_DIRECTION))
    return _directed_training(g, train_pos, test, neg_train_ratio, rng)


def split_bidirectional(g: Graph, seed: int = 0, neg_train_ratio: float = 4.0) -> LinkSplit:
    """Bidirectionality split for directed graphs.

    One direction of every reciprocal pair is removed; the removed directions
    are the test positives and reverses of true unidirectional edges are the
    test negatives.
    """
    if not g.directed:
        raise SplitError("split_bidirectional requires a directed graph")
    rng = np.random.default_rng(seed)
    recip = g.reciprocal_pairs()
    if not recip:
        raise SplitError("graph has no reciprocal edge pair")
    uni = g.unidirectional_edges()
    if not uni:
        raise SplitError("graph has no unidirectional edge to reverse")
    flip = rng.random(len(recip)) < 0.5
    removed = [(j, i) if f else (i, j) for (i, j), f in zip(recip, flip)]
    removed_set = set(removed)
    n_neg = len(removed)
    if n_neg > len(uni):
        logger.warning("only %d unidirectional edges for %d removed directions; "
                       "reducing negatives to match", len(uni), n_neg)
        n_neg = len(uni)
    picked = sorted(rng.choice(len(uni), size=n_neg, replace=False).tolist())
    train_pos = [p for p in g.sorted_edges() if p not in removed_set]
    test = [LabeledPair(i, j, 1, REMOVED_EDGE) for i, j in removed]
    test += [LabeledPair(uni[k][1], uni[k][0], 0, REVERSED_DIRECTION) for k in picked]
    return _directed_training(g, train_pos, test, neg_train_ratio, rng)


def reconstruction_pairs(g: Graph) -> list[tuple[int, int, int]]:
    """Every non-diagonal pair labelled by edge presence (unordered if undirected)."""
    n = g.n
    out = []
    for i in range(n):
        for j in range(i + 1 if not g.directed else 0, n):
            if i != j:
                out.append((i, j, int(g.has_edge(i, j))))
    return out

"""Cluster-aware link formation probability model and its alternating trainer.

Each node ``i`` has an embedding ``H[i]`` and each cluster ``k`` a centroid
``U[k]``. A pair's link probability combines the max-normalised Euclidean
distance ``D`` between the two embeddings with the cluster-level proximity
``C`` of their cluster tendencies::

    P = exp(-beta * D / C)

Undirected graphs use Student-t style tendencies, normalised to a soft
assignment and compared by cosine similarity. Directed graphs use shifted
tendencies in ``(1, alpha + 1]`` compared by a source-normalised inner
product, so ``C[i, j] != C[j, i]`` in general.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import asdict, dataclass, field, fields
from typing import NamedTuple, Sequence

import numpy as np
from scipy import sparse
from scipy.spatial.distance import pdist, squareform

from .graph import LinkSplit
from .kmeans import kmeans_init

logger = logging.getLogger(__name__)

UPDATE_H = "update_H"
UPDATE_U = "update_U"
STAGES = (UPDATE_H, UPDATE_U)


class DegenerateEmbeddingError(ValueError):
    """All embedding rows coincide, so distances cannot be normalised."""


class TrainingDivergence(RuntimeError):
    def __init__(self, stage, eta, outer_loop, epoch):
        super().__init__(
            f"non-finite loss in stage {stage} (outer loop {outer_loop}, epoch {epoch}) "
            f"with learning rate eta={eta}; try a smaller eta")
        self.stage = stage
        self.eta = eta


@dataclass(frozen=True)
class HyperParams:
    K: int = 12
    d: int = 8
    alpha: float = 5.0
    beta: float = 4.5
    eta: float = 0.1
    delta: float = 0.9
    epochs_per_stage: int = 200
    outer_loops: int = 10
    seed: int = 0
    directed: bool = False
    threshold: float = 0.5
    tol: float = 1e-6
    distance_power: int = 1

    def __post_init__(self):
        if self.K < 1 or self.d < 1:
            raise ValueError("K and d must be positive")
        if not self.alpha > 0 or not self.beta > 0:
            raise ValueError("alpha and beta must be positive")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not 0 <= self.delta < 1:
            raise ValueError("delta must lie in [0, 1)")
        if not 0 <= self.threshold <= 1:
            raise ValueError("threshold must lie in [0, 1]")
        if self.epochs_per_stage < 1 or self.outer_loops < 1:
            raise ValueError("epochs_per_stage and outer_loops must be positive")
        if self.distance_power not in (1, 2):
            raise ValueError("distance_power must be 1 (Euclidean) or 2 (squared)")

    @classmethod
    def field_types(cls) -> dict[str, type]:
        return {f.name: type(f.default) for f in fields(cls)}


class LossRecord(NamedTuple):
    outer_loop: int
    stage: str
    epoch: int
    loss: float


@dataclass(frozen=True)
class TrainedModel:
    embeddings: np.ndarray
    centroids: np.ndarray
    hyperparams: HyperParams
    loss_trace: tuple[LossRecord, ...] = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return self.embeddings.shape[0]

    @property
    def final_loss(self) -> float:
        return self.loss_trace[-1].loss if self.loss_trace else math.nan


# ---------------------------------------------------------------------------
# forward building blocks
# ---------------------------------------------------------------------------

def init_embeddings(n: int, d: int, seed: int = 0) -> np.ndarray:
    """Uniform ``[0, 1)`` initial embeddings."""
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    return np.random.default_rng(seed).random((n, d))


def max_pair_distance(H: np.ndarray, power: int = 1) -> float:
    """Largest Euclidean distance (raised to ``power``) between two rows of ``H``."""
    if H.shape[0] < 2:
        raise DegenerateEmbeddingError("need at least two nodes")
    m = float(pdist(H).max()) ** power
    if m <= 0.0:
        raise DegenerateEmbeddingError("all embedding rows are identical")
    return m


def first_order_proximity(H: np.ndarray, power: int = 1) -> np.ndarray:
    """Pairwise Euclidean distances divided by their off-diagonal maximum.

    ``power=2`` uses squared distances instead.
    """
    H = np.asarray(H, dtype=float)
    return squareform(pdist(H)) ** power / max_pair_distance(H, power)


def _sq_dist(H, U):
    H = np.asarray(H, dtype=float)
    U = np.asarray(U, dtype=float)
    return ((H[..., None, :] - U) ** 2).sum(axis=-1)


def tendency_undirected(H, U, alpha: float) -> np.ndarray:
    """``(1 + |U_k - H_i|^2 / alpha)^-1``; works on a single row or a matrix."""
    return 1.0 / (1.0 + _sq_dist(H, U) / alpha)


def tendency_directed(H, U, alpha: float) -> np.ndarray:
    """``alpha / (1 + |U_k - H_i|^2) + 1``, bounded in ``(1, alpha + 1]``."""
    return alpha / (1.0 + _sq_dist(H, U)) + 1.0


def soft_assignment(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    s = t.sum(axis=-1, keepdims=True)
    if np.any(s == 0):
        raise ValueError("tendency vector sums to zero")
    return t / s


def _check_rows(T):
    T = np.asarray(T, dtype=float)
    if np.any(np.all(T == 0, axis=-1)):
        raise ValueError("cluster tendency matrix has a zero row")
    return T


def cluster_proximity_undirected(T) -> np.ndarray:
    """Cosine similarity between every pair of assignment rows."""
    T = _check_rows(T)
    unit = T / np.linalg.norm(T, axis=1, keepdims=True)
    return unit @ unit.T


def cluster_proximity_directed(T) -> np.ndarray:
    """``C[i, j] = T_i . T_j / |T_i|^2`` (normalised by the source row)."""
    T = _check_rows(T)
    return (T @ T.T) / (T * T).sum(axis=1)[:, None]


def link_probability(D, C, beta: float) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    if np.any(C <= 0):
        raise ValueError("cluster-level proximity must be strictly positive")
    return np.exp(-beta * np.asarray(D, dtype=float) / C)


def mse_loss(P, pairs) -> float:
    """Mean squared error of ``P[i, j]`` against the labels of ``pairs``."""
    if len(pairs) == 0:
        raise ValueError("empty pair list")
    src, dst, y = LinkSplit.arrays(pairs)
    P = np.asarray(P, dtype=float)
    return float(np.mean((P[src, dst] - y) ** 2))


def probability_matrix(H, U, alpha: float, beta: float, directed: bool,
                       distance_power: int = 1) -> np.ndarray:
    """Full ``N x N`` link probability matrix (diagonal set to 1)."""
    D = first_order_proximity(H, distance_power)
    if directed:
        C = cluster_proximity_directed(tendency_directed(H, U, alpha))
    else:
        C = cluster_proximity_undirected(soft_assignment(tendency_undirected(H, U, alpha)))
    P = link_probability(D, C, beta)
    np.fill_diagonal(P, 1.0)
    return P


# ---------------------------------------------------------------------------
# pairwise forward / backward used during training
# ---------------------------------------------------------------------------

class _Cache(NamedTuple):
    diff: np.ndarray
    r: np.ndarray
    D: np.ndarray
    q: np.ndarray
    t: np.ndarray
    rows: np.ndarray  # soft assignment (undirected) or raw tendency (directed)
    C: np.ndarray
    P: np.ndarray


def _forward(H, U, src, dst, alpha, beta, directed, dmax, power=1) -> _Cache:
    diff = H[src] - H[dst]
    r2 = (diff * diff).sum(axis=1)
    r = np.sqrt(r2)
    D = (r if power == 1 else r2) / dmax
    q = _sq_dist(H, U)
    if directed:
        t = alpha / (1.0 + q) + 1.0
        rows = t
        a, b = rows[src], rows[dst]
        C = (a * b).sum(axis=1) / (a * a).sum(axis=1)
    else:
        t = 1.0 / (1.0 + q / alpha)
        rows = t / t.sum(axis=1, keepdims=True)
        a, b = rows[src], rows[dst]
        C = (a * b).sum(axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
    P = np.exp(-beta * D / C)
    return _Cache(diff, r, D, q, t, rows, C, P)


def _scatter(n, idx, vals):
    """Row-wise sum of ``vals`` into an ``n``-row matrix at positions ``idx``."""
    m = len(idx)
    incidence = sparse.csr_matrix((np.ones(m), (idx, np.arange(m))), shape=(n, m))
    return np.asarray(incidence @ vals)


def _backward(H, U, src, dst, y, alpha, beta, directed, dmax, c: _Cache, stage, power=1):
    n = H.shape[0]
    gP = 2.0 * (c.P - y) / len(y)
    gD = gP * c.P * (-beta / c.C)
    gC = gP * c.P * (beta * c.D / c.C ** 2)

    a, b = c.rows[src], c.rows[dst]
    if directed:
        den = (a * a).sum(axis=1)[:, None]
        g_src = gC[:, None] * (b / den - 2.0 * c.C[:, None] * a / den)
        g_dst = gC[:, None] * (a / den)
    else:
        na = np.linalg.norm(a, axis=1)[:, None]
        nb = np.linalg.norm(b, axis=1)[:, None]
        cc = c.C[:, None]
        g_src = gC[:, None] * (b / (na * nb) - cc * a / na ** 2)
        g_dst = gC[:, None] * (a / (na * nb) - cc * b / nb ** 2)
    g_rows = _scatter(n, src, g_src) + _scatter(n, dst, g_dst)

    if directed:
        g_t = g_rows
        dt_dq = -alpha / (1.0 + c.q) ** 2
    else:
        # back through the row normalisation s = t / sum(t)
        tsum = c.t.sum(axis=1, keepdims=True)
        g_t = (g_rows - (g_rows * c.rows).sum(axis=1, keepdims=True)) / tsum
        dt_dq = -(c.t ** 2) / alpha
    g_q = g_t * dt_dq

    if stage == UPDATE_U:
        return 2.0 * (g_q.sum(axis=0)[:, None] * U - g_q.T @ H)

    grad = 2.0 * (g_q.sum(axis=1)[:, None] * H - g_q @ U)
    if power == 2:
        coef = (2.0 * gD / dmax)[:, None]
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(c.r > 0, gD / (dmax * c.r), 0.0)[:, None]
    grad += _scatter(n, src, coef * c.diff) - _scatter(n, dst, coef * c.diff)
    return grad


def _pair_arrays(pairs):
    if isinstance(pairs, LinkSplit):
        pairs = pairs.train_pairs
    src, dst, y = LinkSplit.arrays(pairs)
    if len(y) == 0:
        raise ValueError("empty pair list")
    return src, dst, y.astype(float)


def pair_loss(H, U, pairs, hp: HyperParams, dmax: float | None = None) -> float:
    """Training loss on ``pairs``; ``dmax`` fixes the distance normaliser."""
    src, dst, y = _pair_arrays(pairs)
    H = np.asarray(H, dtype=float)
    if dmax is None:
        dmax = max_pair_distance(H, hp.distance_power)
    c = _forward(H, np.asarray(U, dtype=float), src, dst, hp.alpha, hp.beta, hp.directed, dmax,
                 hp.distance_power)
    return float(np.mean((c.P - y) ** 2))


def loss_gradients(H, U, pairs, hp: HyperParams, stage: str) -> np.ndarray:
    """Exact gradient of the pair MSE w.r.t. ``H`` or ``U``.

    The distance normaliser (maximum pairwise distance) is held constant.
    """
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    src, dst, y = _pair_arrays(pairs)
    H = np.asarray(H, dtype=float)
    U = np.asarray(U, dtype=float)
    dmax = max_pair_distance(H, hp.distance_power)
    c = _forward(H, U, src, dst, hp.alpha, hp.beta, hp.directed, dmax, hp.distance_power)
    return _backward(H, U, src, dst, y, hp.alpha, hp.beta, hp.directed, dmax, c, stage,
                     hp.distance_power)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def _loss_and_grad(H, U, src, dst, y, hp, stage):
    dmax = max_pair_distance(H, hp.distance_power)
    c = _forward(H, U, src, dst, hp.alpha, hp.beta, hp.directed, dmax, hp.distance_power)
    loss = float(np.mean((c.P - y) ** 2))
    if not math.isfinite(loss):
        return loss, None
    return loss, _backward(H, U, src, dst, y, hp.alpha, hp.beta, hp.directed, dmax, c, stage,
                           hp.distance_power)


def train(split, n: int, hp: HyperParams) -> TrainedModel:
    """Fit embeddings and centroids by alternating momentum gradient descent.

    ``split`` is a :class:`LinkSplit` (its training pairs are used) or a
    sequence of ``(i, j, label)`` triples. Each outer loop runs
    ``epochs_per_stage`` full-batch steps on ``H`` with ``U`` frozen, then the
    same on ``U`` with ``H`` frozen. Training stops early once a full outer
    loop changes the loss by less than ``hp.tol``.

    ``hp.eta`` is a per-pair rate: a step moves the parameters as one pass of
    per-pair SGD would, i.e. by ``eta`` times the gradient of the summed
    squared error. The recorded loss is the mean.
    """
    src, dst, y = _pair_arrays(split)
    if src.max() >= n or dst.max() >= n or src.min() < 0 or dst.min() < 0:
        raise ValueError("pair index out of range")
    if hp.K > n:
        raise ValueError(f"K={hp.K} exceeds node count {n}")
    H = init_embeddings(n, hp.d, hp.seed)
    U = kmeans_init(H, hp.K, hp.seed)
    params = {UPDATE_H: H, UPDATE_U: U}
    step = hp.eta * len(y)
    trace: list[LossRecord] = []
    prev_loop_loss = None
    for loop in range(hp.outer_loops):
        for stage in STAGES:
            x = params[stage]
            velocity = np.zeros_like(x)
            for epoch in range(hp.epochs_per_stage + 1):
                loss, grad = _loss_and_grad(params[UPDATE_H], params[UPDATE_U],
                                            src, dst, y, hp, stage)
                if grad is None:
                    raise TrainingDivergence(stage, hp.eta, loop, epoch)
                trace.append(LossRecord(loop, stage, epoch, loss))
                if epoch == hp.epochs_per_stage:
                    break
                velocity = hp.delta * velocity - step * grad
                x += velocity
        loop_loss = trace[-1].loss
        logger.debug("outer loop %d: loss %.6g", loop, loop_loss)
        if prev_loop_loss is not None and abs(prev_loop_loss - loop_loss) < hp.tol:
            break
        prev_loop_loss = loop_loss
    return TrainedModel(params[UPDATE_H].copy(), params[UPDATE_U].copy(), hp, tuple(trace))


def predict(model: TrainedModel, pairs: Sequence) -> np.ndarray:
    """Link probabilities for ordered pairs ``(i, j)`` (extra columns ignored)."""
    if len(pairs) == 0:
        return np.zeros(0)
    idx = np.asarray([(p[0], p[1]) for p in pairs], dtype=np.int64)
    if idx.min() < 0 or idx.max() >= model.n:
        raise IndexError("pair index out of range")
    hp = model.hyperparams
    H, U = model.embeddings, model.centroids
    c = _forward(H, U, idx[:, 0], idx[:, 1], hp.alpha, hp.beta, hp.directed,
                 max_pair_distance(H, hp.distance_power), hp.distance_power)
    scores = c.P.copy()
    scores[idx[:, 0] == idx[:, 1]] = 1.0
    return scores


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def write_matrix_tsv(fh, matrix, labels=None) -> None:
    """One row per line: label then the row values."""
    for k, row in enumerate(np.asarray(matrix)):
        label = labels[k] if labels is not None else str(k)
        fh.write(label + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def read_matrix_tsv(fh) -> tuple[list[str], np.ndarray]:
    labels, rows = [], []
    for line in fh:
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        labels.append(parts[0])
        rows.append([float(v) for v in parts[1:]])
    return labels, np.asarray(rows, dtype=float)


def write_loss_trace(fh, trace) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["outer_loop", "stage", "epoch", "loss"])
    for rec in trace:
        w.writerow([rec.outer_loop, rec.stage, rec.epoch, repr(rec.loss)])


def save_model(model: TrainedModel, directory, node_labels=None) -> None:
    """Write embeddings, centroids, hyperparameters and loss trace."""
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "embeddings.tsv"), "w", encoding="utf-8") as fh:
        write_matrix_tsv(fh, model.embeddings, node_labels)
    with open(os.path.join(directory, "centroids.tsv"), "w", encoding="utf-8") as fh:
        write_matrix_tsv(fh, model.centroids)
    with open(os.path.join(directory, "hyperparams.cfg"), "w", encoding="utf-8") as fh:
        for key, value in asdict(model.hyperparams).items():
            fh.write(f"{key}={value}\n")
    with open(os.path.join(directory, "loss_trace.csv"), "w", encoding="utf-8") as fh:
        write_loss_trace(fh, model.loss_trace)


def _parse_value(raw: str, kind: type):
    if kind is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return kind(raw.strip())


def load_model(directory) -> tuple[TrainedModel, list[str]]:
    """Inverse of :func:`save_model`; returns the model and node labels."""
    with open(os.path.join(directory, "embeddings.tsv"), encoding="utf-8") as fh:
        labels, H = read_matrix_tsv(fh)
    with open(os.path.join(directory, "centroids.tsv"), encoding="utf-8") as fh:
        _, U = read_matrix_tsv(fh)
    types = HyperParams.field_types()
    kwargs = {}
    with open(os.path.join(directory, "hyperparams.cfg"), encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                key, raw = line.split("=", 1)
                kwargs[key.strip()] = _parse_value(raw, types[key.strip()])
    return TrainedModel(H, U, HyperParams(**kwargs)), labels

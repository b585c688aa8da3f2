"""Lloyd's K-means used to place the initial cluster centroids."""

import numpy as np


def _plus_plus_seeds(x, k, rng):
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers.append(x[idx])
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return np.array(centers, dtype=float)


def kmeans(x, k, seed=0, max_iter=300):
    """Cluster the rows of ``x`` into ``k`` groups.

    Seeding is k-means++ under ``seed``. Iterates until the assignment stops
    changing or ``max_iter`` is reached. A cluster that empties is re-seeded
    with the point farthest from its current centroid.

    Returns
    -------
    centers : ndarray, shape (k, d)
    labels : ndarray, shape (n,)
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points n={n}")
    rng = np.random.default_rng(seed)
    centers = _plus_plus_seeds(x, k, rng)
    labels = None
    for _ in range(max_iter):
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        counts = np.bincount(new_labels, minlength=k)
        while (counts == 0).any():
            c = int(np.flatnonzero(counts == 0)[0])
            # only donors from clusters that keep at least one member
            spread = np.where(counts[new_labels] > 1, d2[np.arange(n), new_labels], -1.0)
            far = int(spread.argmax())
            new_labels[far] = c
            centers[c] = x[far]
            d2[:, c] = ((x - centers[c]) ** 2).sum(axis=1)
            counts = np.bincount(new_labels, minlength=k)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            centers[c] = x[labels == c].mean(axis=0)
    return centers, labels


def kmeans_init(H, k, seed=0):
    """Initial centroid matrix ``U`` (k x d) from K-means on the embeddings."""
    centers, _ = kmeans(H, k, seed=seed)
    return centers

import numpy as np
import pytest

from clusterlp.kmeans import kmeans, kmeans_init


def test_single_cluster_is_mean():
    x = np.random.default_rng(0).random((20, 3))
    assert np.allclose(kmeans_init(x, 1), x.mean(axis=0))


def test_k_equals_n_recovers_rows():
    x = np.random.default_rng(1).random((9, 2))
    c = kmeans_init(x, 9, seed=3)
    assert sorted(map(tuple, c)) == sorted(map(tuple, x))


def test_two_blobs():
    rng = np.random.default_rng(2)
    a = rng.normal(0.0, 0.1, size=(50, 2))
    b = rng.normal(10.0, 0.1, size=(50, 2))
    c = kmeans_init(np.vstack([a, b]), 2, seed=0)
    c = c[np.argsort(c[:, 0])]
    assert np.abs(c[0] - a.mean(axis=0)).max() < 0.1
    assert np.abs(c[1] - b.mean(axis=0)).max() < 0.1


def test_no_empty_clusters_with_duplicates():
    x = np.vstack([np.zeros((6, 2)), np.ones((2, 2))])
    centers, labels = kmeans(x, 4, seed=0)
    assert len(np.unique(labels)) == 4


def test_deterministic():
    x = np.random.default_rng(5).random((40, 4))
    assert np.array_equal(kmeans_init(x, 5, seed=9), kmeans_init(x, 5, seed=9))


@pytest.mark.parametrize("k", [0, 11])
def test_bad_k(k):
    with pytest.raises(ValueError):
        kmeans(np.zeros((10, 2)), k)

import numpy as np
import pytest
from sklearn.metrics import average_precision_score, roc_auc_score

from clusterlp.metrics import (average_precision, classification_report, evaluate,
                               full_matrix_report, roc_auc, roc_auc_trapezoid)


def test_auc_examples():
    assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0]) == 0.0
    assert roc_auc([0.8, 0.6, 0.4], [1, 0, 1]) == 0.5
    assert roc_auc([0.5, 0.5], [1, 0]) == 0.5


def test_auc_single_class():
    with pytest.raises(ValueError):
        roc_auc([0.1, 0.2], [1, 1])
    with pytest.raises(ValueError):
        roc_auc_trapezoid([0.1, 0.2], [0, 0])


def test_ap_examples():
    assert average_precision([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0
    assert average_precision([0.9, 0.1], [0, 1]) == 0.5
    assert average_precision([0.3, 0.2], [1, 1]) == 1.0
    with pytest.raises(ValueError):
        average_precision([0.3, 0.2], [0, 0])


def test_ap_ties_follow_input_order():
    assert average_precision([0.5, 0.5], [0, 1]) == 0.5
    assert average_precision([0.5, 0.5], [1, 0]) == 1.0


@pytest.mark.parametrize("seed", range(25))
def test_auc_cross_checks(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 200))
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    s = np.round(rng.random(n), 2)  # rounding forces ties
    auc = roc_auc(s, y)
    assert abs(auc - roc_auc_trapezoid(s, y)) < 1e-10
    assert auc == pytest.approx(roc_auc_score(y, s), abs=1e-12)
    assert roc_auc(-s, y) == pytest.approx(1 - auc, abs=1e-12)
    for f in (np.exp, lambda v: 3 * v + 7):
        assert roc_auc(f(s), y) == pytest.approx(auc, abs=1e-12)
        assert average_precision(f(s), y) == pytest.approx(average_precision(s, y), abs=1e-12)
    distinct = rng.random(n)
    assert average_precision(distinct, y) == pytest.approx(average_precision_score(y, distinct))


def test_classification_report():
    r = classification_report([1, 0, 1, 0], [1, 0, 1, 0])
    assert r.accuracy == 1.0 and r.f1 == 1.0 and r.predicted_link_count == 2
    r = classification_report([1, 1, 0, 0], [1, 0, 1, 0])
    assert (r.accuracy, r.precision, r.recall, r.f1) == (0.5, 0.5, 0.5, 0.5)


def test_degenerate_flag():
    r = classification_report([0.1, 0.2], [1, 0])
    assert r.degenerate and r.precision == 0 and r.f1 == 0


def test_threshold_inclusive():
    assert classification_report([0.5], [1], threshold=0.5).predicted_link_count == 1


def test_report_serialisation():
    r = evaluate([0.9, 0.2, 0.7, 0.4], [1, 0, 1, 0])
    head, row = r.csv_row(header=True).splitlines()
    assert head.split(",")[:2] == ["accuracy", "precision"]
    assert len(row.split(",")) == len(head.split(","))
    text = r.text().splitlines()
    assert any(line.startswith("auc") and line.endswith("1.0000") for line in text)


def test_full_matrix_macro():
    # 34-node confusion counts TP=138, FP=20, FN=18, TN=980 over the ordered matrix
    n = 34
    A = np.zeros((n, n))
    P = np.zeros((n, n))
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    for k, (i, j) in enumerate(off[:156]):
        A[i, j] = 1
        if k < 138:
            P[i, j] = 1
    for i, j in off[156:176]:
        P[i, j] = 1
    r = full_matrix_report(P, A)
    assert r.accuracy == pytest.approx(0.9671, abs=1e-4)
    assert r.precision == pytest.approx(0.9277, abs=1e-4)
    assert r.recall == pytest.approx(0.9323, abs=1e-4)

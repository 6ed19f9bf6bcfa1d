import json

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import assume, given, strategies as st
from hypothesis.extra import numpy as hnp

from trendwatch.errors import (
    DegenerateData,
    DimensionMismatch,
    EmptyInput,
    LengthMismatch,
    SchemaError,
    TooFewSamples,
)
from trendwatch.ml import (
    Dataset,
    LogRegConfig,
    LogRegModel,
    TreeConfig,
    evaluate,
    load_model,
    logistic_loss_grad,
    metrics_from_confusion,
    predict_proba,
    save_model,
    train_logreg,
    train_test_split,
    train_tree,
)


def numeric_grad(w, b, X, y, l2, h=1e-6):
    g = np.zeros_like(w)
    for j in range(w.size):
        e = np.zeros_like(w)
        e[j] = h
        g[j] = (logistic_loss_grad(w + e, b, X, y, l2)[0] - logistic_loss_grad(w - e, b, X, y, l2)[0]) / (2 * h)
    gb = (logistic_loss_grad(w, b + h, X, y, l2)[0] - logistic_loss_grad(w, b - h, X, y, l2)[0]) / (2 * h)
    return g, gb


class TestSplit:
    def test_sizes(self):
        ds = Dataset(np.arange(10.0), [0] * 5 + [1] * 5)
        tr, te = train_test_split(ds, 0.7, seed=1)
        assert (len(tr), len(te)) == (7, 3)

    def test_stratified(self):
        ds = Dataset(np.arange(10.0), [0] * 5 + [1] * 5)
        tr, te = train_test_split(ds, 0.6, seed=3)
        assert sorted(np.bincount(tr.y)) == [3, 3]

    def test_deterministic(self):
        ds = Dataset(np.arange(50.0), [i % 3 == 0 for i in range(50)])
        a, _ = train_test_split(ds, 0.7, seed=9)
        b, _ = train_test_split(ds, 0.7, seed=9)
        assert np.array_equal(a.X, b.X)

    def test_partition(self):
        ds = Dataset(np.arange(20.0), [i % 2 for i in range(20)])
        tr, te = train_test_split(ds, 0.7, seed=0)
        assert sorted(np.concatenate([tr.X.ravel(), te.X.ravel()])) == list(np.arange(20.0))

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            train_test_split(Dataset([[1.0]], [0]), 0.7)


class TestLogReg:
    def test_separable_1d(self):
        ds = Dataset([[0.0], [1.0], [2.0], [8.0], [9.0], [10.0]], [0, 0, 0, 1, 1, 1])
        m = train_logreg(ds)
        assert list(m.predict(ds.X)) == [0, 0, 0, 1, 1, 1]
        assert m.weights[0] > 0

    def test_zero_model_is_half(self):
        m = LogRegModel.zeros(["a", "b"])
        assert predict_proba(m, [3.0, -4.0]) == 0.5

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            predict_proba(LogRegModel.zeros(["a", "b"]), [1.0])

    def test_one_class_rejected(self):
        with pytest.raises(DegenerateData):
            train_logreg(Dataset([[0.0], [1.0]], [1, 1]))

    def test_sigmoid_reflection(self):
        m = LogRegModel(np.array([1.5, -2.0]), 0.0, ["a", "b"])
        x = np.array([0.3, 0.7])
        assert predict_proba(m, x) + predict_proba(m, -x) == pytest.approx(1.0, abs=1e-12)

    def test_gradient_matches_finite_difference(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(20, 4))
        y = rng.integers(0, 2, 20)
        w, b = rng.normal(size=4), 0.3
        _, gw, gb = logistic_loss_grad(w, b, X, y, 0.01)
        nw, nb = numeric_grad(w, b, X, y, 0.01)
        assert np.allclose(gw, nw, rtol=1e-5, atol=1e-8) and gb == pytest.approx(nb, rel=1e-5)

    def test_sparse_and_dense_agree(self):
        X = np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [0.0, 0.2]])
        y = [1, 0, 1, 1]
        cfg = LogRegConfig(epochs=50, scale=False)
        a = train_logreg(Dataset(X, y), cfg)
        b = train_logreg(Dataset(sp.csr_matrix(X), y), cfg)
        assert np.allclose(a.weights, b.weights)

    def test_persistence(self, tmp_path):
        ds = Dataset([[0.0, 2.0], [1.0, 3.0], [5.0, 1.0]], [0, 0, 1])
        m = train_logreg(ds, LogRegConfig(epochs=20))
        save_model(m, tmp_path / "m.json")
        back = load_model(tmp_path / "m.json")
        assert np.array_equal(back.predict_proba(ds.X), m.predict_proba(ds.X))

    def test_schema_checked(self, tmp_path):
        obj = LogRegModel.zeros(["a"]).to_dict()
        obj["schema_version"] = 99
        (tmp_path / "m.json").write_text(json.dumps(obj))
        with pytest.raises(SchemaError):
            load_model(tmp_path / "m.json")


class TestTree:
    def test_pure_input_is_leaf(self):
        t = train_tree(Dataset([[1.0], [2.0]], [1, 1]), n_classes=2)
        assert len(t.nodes) == 1 and t.depth() == 0
        assert list(t.predict([[9.0]])) == [1]

    def test_threshold_split(self):
        X = [[0.0, 5.0], [1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]
        t = train_tree(Dataset(X, [0, 0, 1, 1]))
        assert t.depth() == 1 and t.nodes[0]["feature"] == 0
        assert t.nodes[0]["threshold"] == 1.5

    def test_conflicting_duplicates_majority(self):
        t = train_tree(Dataset([[1.0]] * 3, [1, 0, 1]))
        assert list(t.predict([[1.0]])) == [1]

    def test_conflicting_tie_lowest_class(self):
        t = train_tree(Dataset([[1.0]] * 2, [1, 0]))
        assert list(t.predict([[1.0]])) == [0]

    def test_max_depth(self):
        X = np.arange(16.0).reshape(-1, 1)
        y = [i % 2 for i in range(16)]
        assert train_tree(Dataset(X, y), TreeConfig(max_depth=2)).depth() <= 2

    def test_persistence(self, tmp_path):
        X = np.arange(8.0).reshape(-1, 1)
        t = train_tree(Dataset(X, [0, 1, 1, 0, 0, 1, 1, 0]))
        save_model(t, tmp_path / "t.json")
        assert np.array_equal(load_model(tmp_path / "t.json").predict(X), t.predict(X))


class TestMetrics:
    def test_balanced(self):
        truth = [1] * 10 + [0] * 10
        pred = [1] * 9 + [0] + [1] + [0] * 9
        m = evaluate(pred, truth)
        assert m.precision[1] == m.recall[1] == m.f1[1] == m.accuracy == 0.9

    def test_never_predicted_class(self):
        m = evaluate([0, 0, 0], [0, 1, 0], labels=[0, 1])
        assert m.precision[1] == 0.0 and m.recall[1] == 0.0 and m.f1[1] == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            evaluate([0, 1], [0])

    def test_empty(self):
        with pytest.raises(EmptyInput):
            evaluate([], [])


# ---------------------------------------------------------------- invariants

FEATS = hnp.arrays(float, st.tuples(st.integers(2, 12), st.integers(1, 4)),
                   elements=st.floats(-10, 10, allow_nan=False, width=32))


@pytest.mark.invariant
@given(FEATS, st.data())
def test_gradient_check(X, data):
    n, d = X.shape
    y = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    w = np.array(data.draw(st.lists(st.floats(-2, 2), min_size=d, max_size=d)))
    b = data.draw(st.floats(-2, 2))
    l2 = data.draw(st.sampled_from([0.0, 1e-4, 0.1]))
    _, gw, gb = logistic_loss_grad(w, b, X, y, l2)
    nw, nb = numeric_grad(w, b, X, y, l2)
    assert np.allclose(gw, nw, rtol=1e-4, atol=1e-6)
    assert abs(gb - nb) <= 1e-4 * max(1.0, abs(nb))


def _labelled(X, data):
    y = data.draw(st.lists(st.integers(0, 1), min_size=X.shape[0], max_size=X.shape[0]))
    assume(0 < sum(y) < len(y))
    return Dataset(X, y)


@pytest.mark.invariant
@given(FEATS, st.data())
def test_duplicated_samples_same_decisions(X, data):
    ds = _labelled(X, data)
    cfg = LogRegConfig(epochs=30)
    a = train_logreg(ds, cfg)
    b = train_logreg(Dataset(np.vstack([ds.X, ds.X]), np.concatenate([ds.y, ds.y])), cfg)
    pa, pb = a.predict_proba(ds.X), b.predict_proba(ds.X)
    assert np.allclose(pa, pb, atol=1e-9)
    clear = np.abs(pa - 0.5) > 1e-9
    assert np.array_equal((pa >= 0.5)[clear], (pb >= 0.5)[clear])


@pytest.mark.invariant
@given(FEATS, st.data())
def test_training_is_bitwise_deterministic(X, data):
    ds = _labelled(X, data)
    cfg = LogRegConfig(epochs=20)
    a, b = train_logreg(ds, cfg), train_logreg(ds, cfg)
    assert a.to_dict() == b.to_dict()
    assert train_tree(ds).to_dict() == train_tree(ds).to_dict()


@pytest.mark.invariant
@given(FEATS, st.data())
def test_unlimited_tree_fits_training_set(X, data):
    n = X.shape[0]
    y = np.array(data.draw(st.lists(st.integers(0, 2), min_size=n, max_size=n)))
    # only rows with distinct features can be separated
    keys = [tuple(r) for r in X]
    assume(len(set(keys)) == n)
    t = train_tree(Dataset(X, y))
    assert np.array_equal(t.predict(X), y)


@pytest.mark.invariant
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=40))
def test_metrics_roundtrip_through_confusion(pairs):
    pred, truth = zip(*pairs)
    m = evaluate(pred, truth, labels=[0, 1, 2])
    again = metrics_from_confusion(m.labels, m.confusion)
    assert again.to_dict() == m.to_dict()
    assert sum(map(sum, m.confusion)) == len(pairs)
    assert all(0.0 <= v <= 1.0 for v in m.f1.values())


@pytest.mark.invariant
@given(FEATS, st.data())
def test_model_json_roundtrip(X, data):
    ds = _labelled(X, data)
    m = train_logreg(ds, LogRegConfig(epochs=5))
    back = LogRegModel.from_dict(json.loads(json.dumps(m.to_dict())))
    assert np.array_equal(back.predict_proba(ds.X), m.predict_proba(ds.X))

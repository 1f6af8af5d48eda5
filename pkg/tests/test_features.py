import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from botgan import features
from botgan.dataio import Dataset
from botgan.errors import DomainError

from _oracles import brute_force_ig, entropy_bits


def _ds(cols, labels):
    x = np.column_stack(cols).astype(float)
    return Dataset(x, np.asarray(labels), tuple(f"c{i}" for i in range(x.shape[1])))


def test_perfect_boolean_feature_is_one_bit():
    r = features.information_gain(_ds([[1, 1, 0, 0]], [1, 1, 0, 0]))
    assert r.scores[0] == 1.0


def test_independent_boolean_feature_is_zero():
    r = features.information_gain(_ds([[1, 1, 0, 0]], [1, 0, 1, 0]))
    assert r.scores[0] == 0.0


def test_unlabeled_rows_ignored():
    r = features.information_gain(_ds([[1, 1, 0, 0, 1, 0]], [1, 1, 0, 0, 255, 255]))
    assert r.scores[0] == 1.0


def test_single_class_rejected():
    with pytest.raises(DomainError):
        features.information_gain(_ds([[0.1, 0.2, 0.3]], [1, 1, 1]))


def test_equal_width_binning_of_numeric_feature():
    # 0.05 and 0.09 share bin 0; 0.95 is in bin 9
    x = [0.05, 0.09, 0.95, 0.95]
    r = features.information_gain(_ds([x], [0, 1, 1, 1]))
    expected = brute_force_ig([0, 0, 9, 9], [0, 1, 1, 1])
    assert abs(r.scores[0] - expected) < 1e-12


def test_tie_break_lower_index_first():
    col = [1, 1, 0, 0]
    r = features.information_gain(_ds([[0, 1, 0, 1], col, col], [1, 1, 0, 0]))
    assert r.order.tolist() == [1, 2, 0]


def _random_table(rng):
    n = int(rng.integers(2, 1001))
    n_values = int(rng.integers(2, 17))
    d = int(rng.integers(1, 4))
    values = rng.integers(0, n_values, size=(n, d))
    labels = rng.integers(0, 2, size=n)
    labels[0], labels[1] = 0, 1
    return values, labels, n_values


def test_matches_brute_force_oracle_on_random_tables():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        values, labels, k = _random_table(rng)
        # bin centres on a 16-bin grid are exact in binary floating point
        x = (values + 0.5) / 16.0
        r = features.information_gain(_ds(list(x.T), labels), bins=16)
        for j in range(values.shape[1]):
            assert abs(r.scores[j] - brute_force_ig(values[:, j].tolist(), labels)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_ig_bounded_by_label_entropy(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 200))
    labels = rng.integers(0, 2, n)
    labels[:2] = [0, 1]
    x = rng.random((n, 5))
    x[:, 0] = rng.integers(0, 2, n)
    r = features.information_gain(_ds(list(x.T), labels))
    h = entropy_bits(np.bincount(labels, minlength=2).tolist())
    assert np.all(r.scores >= 0) and np.all(r.scores <= h + 1e-15)
    assert sorted(r.order.tolist()) == list(range(5))
    assert np.all(np.diff(r.scores[r.order]) <= 0)


def test_ranking_invariant_under_bin_preserving_rescale():
    rng = np.random.default_rng(1)
    n = 300
    labels = rng.integers(0, 2, n)
    codes = rng.integers(0, 10, (n, 4))
    x = (codes + 0.5) / 10
    # squeeze every value towards its bin centre: same bins, different values
    y = (codes + 0.5 + 0.3 * (x - (codes + 0.5) / 10)) / 10
    a = features.information_gain(_ds(list(x.T), labels))
    b = features.information_gain(_ds(list(y.T), labels))
    np.testing.assert_array_equal(a.order, b.order)
    np.testing.assert_array_equal(a.scores, b.scores)


def test_select_top_k_reorders_and_remaps_created():
    x = [[0, 1, 0, 1], [1, 1, 0, 0], [0.1, 0.2, 0.3, 0.4]]
    ds = _ds(x, [1, 1, 0, 0])
    ds = Dataset(ds.features, ds.labels, ds.feature_names, created_at_index=2)
    r = features.information_gain(ds)
    full = features.select_top_k(ds, r, 3)
    assert full.feature_names[0] == "c1"
    assert set(full.feature_names) == {"c0", "c1", "c2"}
    assert full.feature_names[full.created_at_index] == "c2"
    top1 = None
    with pytest.warns(UserWarning, match="creation-time"):
        top1 = features.select_top_k(ds, r, 1)
    assert top1.created_at_index is None and top1.n_features == 1
    with pytest.raises(DomainError):
        features.select_top_k(ds, r, 0)
    with pytest.raises(DomainError):
        features.select_top_k(ds, r, 4)


def test_ranking_csv(tmp_path):
    r = features.information_gain(_ds([[0, 1, 0, 1], [1, 1, 0, 0]], [1, 1, 0, 0]))
    p = tmp_path / "rank.csv"
    features.write_ranking_csv(r, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "feature_index,feature_name,information_gain,rank"
    assert lines[1] == "1,c1,1.000000,1"

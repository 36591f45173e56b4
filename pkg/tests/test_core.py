import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ngfix import DistanceCounter, Metric, VectorStore, distance, medoid

finite = st.floats(-100, 100, allow_nan=False, width=32)


def test_distance_examples():
    assert distance([0, 0], [3, 4], "l2") == 25
    assert distance([1, 2, 3], [1, 2, 3], "l2") == 0
    assert distance([1, 2, 3], [1, 2, 3], "cosine") == pytest.approx(0, abs=1e-12)
    assert distance([1, 0], [0, 1], "cosine") == pytest.approx(1)
    assert distance([1, 2], [3, 4], "ip") == -11


def test_distance_errors():
    with pytest.raises(ValueError):
        distance([1, 2], [1, 2, 3])
    with pytest.raises(ValueError):
        distance([0, 0], [1, 0], "cosine")
    with pytest.raises(ValueError):
        Metric.parse("manhattan")


def test_counter_counts_every_call():
    c = DistanceCounter()
    pts = np.random.default_rng(0).normal(size=(37, 4))
    for p in pts:
        distance(p, pts[0], "l2", c)
    assert c.ndc == 37
    c.reset()
    assert c.ndc == 0


@settings(max_examples=200)
@given(arrays(np.float32, 5, elements=finite), arrays(np.float32, 5, elements=finite))
def test_distance_symmetric(a, b):
    assert distance(a, b, "l2") == distance(b, a, "l2")
    if np.any(a) and np.any(b):
        assert distance(a, b, "cosine") == pytest.approx(distance(b, a, "cosine"), abs=1e-9)


def test_store_validation():
    with pytest.raises(ValueError):
        VectorStore([[1.0, np.nan]])
    with pytest.raises(ValueError):
        VectorStore([[0.0, 0.0]], "cosine")
    s = VectorStore([[3.0, 4.0]], "cosine")
    assert np.allclose(s.data, [[0.6, 0.8]])


def test_store_append_keeps_ids():
    s = VectorStore(np.arange(6, dtype=np.float32).reshape(3, 2))
    ids = s.append(np.ones((40, 2)))
    assert ids[0] == 3 and ids[-1] == 42
    assert s.count == 43
    assert np.array_equal(s.data[:3], np.arange(6).reshape(3, 2))
    with pytest.raises(ValueError):
        s.append(np.ones((1, 3)))


def test_medoid_examples():
    assert medoid(VectorStore([[7.0]])) == 0
    assert medoid(VectorStore([[0.0], [1.0], [2.0], [10.0], [11.0]])) == 2
    assert medoid(VectorStore([[-1.0], [1.0]])) == 0
    with pytest.raises(ValueError):
        medoid(VectorStore(np.empty((0, 2))))


def test_medoid_matches_brute_force():
    rng = np.random.default_rng(3)
    data = rng.normal(size=(300, 6)).astype(np.float32)
    mean = data.astype(np.float64).mean(axis=0).astype(np.float32)
    ref = min(range(300), key=lambda i: (distance(data[i], mean), i))
    assert medoid(VectorStore(data)) == ref


def test_medoid_respects_live_mask():
    s = VectorStore([[0.0], [1.0], [2.0], [10.0], [11.0]])
    live = np.array([True, True, False, True, True])
    # mean of {0,1,10,11} is 5.5: 1 is 4.5 away, 10 is 4.5 away -> id 1
    assert medoid(s, live) == 1

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ngfix import VecsFormatError, load_vectors, read_id_lists, read_vecs, write_id_lists, write_vecs


def _record(dim, payload):
    return np.int32(dim).tobytes() + np.asarray(payload, dtype="<f4").tobytes()


def test_single_record(tmp_path):
    p = tmp_path / "one.fvecs"
    p.write_bytes(_record(2, [1.0, 2.0]))
    store = load_vectors(p)
    assert store.count == 1
    assert np.array_equal(store.data, [[1.0, 2.0]])


def test_inconsistent_dim_names_offset(tmp_path):
    p = tmp_path / "bad.fvecs"
    p.write_bytes(_record(2, [1, 2]) + _record(3, [1, 2, 3]))
    with pytest.raises(VecsFormatError, match="offset 12"):
        read_vecs(p)


def test_truncated_and_non_finite(tmp_path):
    p = tmp_path / "trunc.fvecs"
    p.write_bytes(_record(2, [1, 2]) + _record(2, [1, 2])[:-3])
    with pytest.raises(VecsFormatError, match="offset 12"):
        read_vecs(p)
    p.write_bytes(_record(2, [1, 2]) + _record(2, [np.inf, 2]))
    with pytest.raises(VecsFormatError, match="non-finite"):
        read_vecs(p)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float32, st.tuples(st.integers(1, 20), st.integers(1, 9)),
              elements=st.floats(-1e6, 1e6, width=32)))
def test_fvecs_round_trip_is_byte_identical(tmp_path_factory, arr):
    d = tmp_path_factory.mktemp("rt")
    a, b = d / "a.fvecs", d / "b.fvecs"
    write_vecs(a, arr)
    back = read_vecs(a)
    assert np.array_equal(back, arr)
    write_vecs(b, back)
    assert a.read_bytes() == b.read_bytes()


def test_ivecs_and_bvecs_round_trip(tmp_path):
    ids = np.random.default_rng(0).integers(0, 1 << 30, size=(7, 5)).astype(np.int32)
    write_vecs(tmp_path / "g.ivecs", ids)
    assert np.array_equal(read_vecs(tmp_path / "g.ivecs"), ids)
    u8 = np.arange(12, dtype=np.uint8).reshape(3, 4)
    write_vecs(tmp_path / "b.bvecs", u8)
    raw = (tmp_path / "b.bvecs").read_bytes()
    assert len(raw) == 3 * (4 + 4)
    assert np.array_equal(read_vecs(tmp_path / "b.bvecs"), u8)


def test_ragged_id_lists(tmp_path):
    lists = [np.array([3, 1, 4]), np.array([], dtype=np.int64), np.array([9])]
    write_id_lists(tmp_path / "r.ivecs", lists)
    back = read_id_lists(tmp_path / "r.ivecs")
    assert [x.tolist() for x in back] == [[3, 1, 4], [], [9]]

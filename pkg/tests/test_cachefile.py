import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from legisrgcn.cachefile import (
    CacheFormatError,
    read_cache,
    read_tensors,
    write_cache,
    write_tensors,
)


class TestEmbeddingCache:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        vectors = {f"B{i:03d}": rng.standard_normal(128).astype(np.float32) for i in range(5)}
        path = tmp_path / "bills.lgrc"
        write_cache(path, vectors, 128)
        dim, loaded = read_cache(path)
        assert dim == 128
        assert set(loaded) == set(vectors)
        for key in vectors:
            np.testing.assert_array_equal(loaded[key], vectors[key])

    def test_empty_cache(self, tmp_path):
        path = tmp_path / "empty.lgrc"
        write_cache(path, {}, 16)
        dim, loaded = read_cache(path)
        assert dim == 16 and loaded == {}

    def test_wrong_shape_rejected(self, tmp_path):
        with pytest.raises(CacheFormatError):
            write_cache(tmp_path / "x.lgrc", {"k": np.zeros(4)}, 8)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.lgrc"
        path.write_bytes(b"XXXX" + b"\x00" * 8)
        with pytest.raises(CacheFormatError):
            read_cache(path)

    def test_unicode_keys(self, tmp_path):
        path = tmp_path / "u.lgrc"
        write_cache(path, {"clé-é": np.ones(3, dtype=np.float32)}, 3)
        _, loaded = read_cache(path)
        assert "clé-é" in loaded

    @given(
        keys=st.lists(
            st.text(min_size=1, max_size=20).filter(lambda s: s.strip()),
            min_size=1, max_size=8, unique=True,
        ),
        dim=st.integers(min_value=1, max_value=32),
    )
    @settings(
        max_examples=20,
        deadline=None,
        suppress_health_check=[HealthCheck.function_scoped_fixture],
    )
    def test_round_trip_property(self, tmp_path, keys, dim):
        rng = np.random.default_rng(1)
        vectors = {k: rng.standard_normal(dim).astype(np.float32) for k in keys}
        path = tmp_path / "prop.lgrc"
        write_cache(path, vectors, dim)
        got_dim, loaded = read_cache(path)
        assert got_dim == dim
        for key in vectors:
            np.testing.assert_array_equal(loaded[key], vectors[key])


class TestTensorFile:
    def test_round_trip_mixed_ranks(self, tmp_path):
        rng = np.random.default_rng(2)
        tensors = {
            "layer1.W": rng.standard_normal((7, 3)).astype(np.float32),
            "layer1.bias": rng.standard_normal(7).astype(np.float32),
            "scalar": np.float32(3.5),
            "cube": rng.standard_normal((2, 3, 4)).astype(np.float32),
        }
        path = tmp_path / "ckpt.lgrc"
        write_tensors(path, tensors)
        loaded = read_tensors(path)
        assert set(loaded) == set(tensors)
        for key, value in tensors.items():
            np.testing.assert_array_equal(loaded[key], np.asarray(value))
            assert loaded[key].shape == np.asarray(value).shape

    def test_cache_file_is_not_tensor_file(self, tmp_path):
        path = tmp_path / "cache.lgrc"
        write_cache(path, {"k": np.zeros(4, dtype=np.float32)}, 4)
        with pytest.raises(CacheFormatError):
            read_tensors(path)

    def test_bit_identical_bytes_on_rewrite(self, tmp_path):
        tensors = {"a": np.arange(6, dtype=np.float32).reshape(2, 3)}
        p1, p2 = tmp_path / "one.lgrc", tmp_path / "two.lgrc"
        write_tensors(p1, tensors)
        write_tensors(p2, tensors)
        assert p1.read_bytes() == p2.read_bytes()

import numpy as np
import pytest

from hyponorm.rng import ASCENT, GEN, Stream, stream_id


def test_same_key_same_words():
    a = Stream(7, stream_id(GEN, 3)).words(16)
    b = Stream(7, stream_id(GEN, 3)).words(16)
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    a = Stream(7, stream_id(GEN, 0)).words(8)
    assert not np.array_equal(a, Stream(7, stream_id(GEN, 1)).words(8))
    assert not np.array_equal(a, Stream(7, stream_id(ASCENT, 0)).words(8))
    assert not np.array_equal(a, Stream(8, stream_id(GEN, 0)).words(8))


def test_documented_transforms():
    w = Stream(11, 5).words(4)
    u = Stream(11, 5).uniform(4)
    assert np.array_equal(u, (w >> np.uint64(11)).astype(float) * 2.0**-53)
    z = Stream(11, 5).normal(2)
    u0 = float(w[0] >> np.uint64(11)) * 2.0**-53
    u1 = (float(w[1] >> np.uint64(11)) + 1.0) * 2.0**-53
    r = np.sqrt(-2 * np.log(u1))
    assert z[0] == r * np.cos(2 * np.pi * u0)
    assert z[1] == r * np.sin(2 * np.pi * u0)


def test_distribution_sanity():
    z = Stream(0, 1).normal(200_000)
    assert abs(z.mean()) < 0.01 and abs(z.std() - 1) < 0.01
    u = Stream(0, 2).uniform(100_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    ints = Stream(0, 3).integers(2, 5, 10_000)
    assert set(np.unique(ints)) == {2, 3, 4}
    c = Stream(0, 4).field_normal((50_000,), "complex")
    assert abs(np.mean(np.abs(c) ** 2) - 1) < 0.02


def test_permutation_is_permutation():
    p = Stream(3, 9).permutation(10)
    assert sorted(p.tolist()) == list(range(10))


def test_validation():
    with pytest.raises(ValueError):
        Stream(-1)
    with pytest.raises(ValueError):
        stream_id(GEN, 1 << 32)
    with pytest.raises(ValueError):
        Stream(0).integers(3, 3, 1)

import numpy as np
import pytest

from amc_mimo.streams import stream, tag_code


def test_same_key_same_numbers():
    a = stream(7, "noise", 3, 1).standard_normal(5)
    b = stream(7, "noise", 3, 1).standard_normal(5)
    np.testing.assert_array_equal(a, b)


def test_keys_are_independent():
    base = stream(7, "noise", 3).standard_normal(5)
    for other in (stream(8, "noise", 3), stream(7, "bits", 3), stream(7, "noise", 4)):
        assert not np.array_equal(base, other.standard_normal(5))


def test_tag_code_is_stable():
    # crc32, not Python's salted hash
    assert tag_code("channel") == 0xA2F98E47


def test_negative_seed_rejected():
    with pytest.raises(ValueError):
        stream(-1, "x")

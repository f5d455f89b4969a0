import numpy as np
import pytest
from hypothesis import given, strategies as st

from sketchcodec import pack, packed_size, unpack
from sketchcodec.bitpack import pack_rows, unpack_rows
from sketchcodec.errors import PackError, PadBitsError
from oracles import ref_pack


@pytest.mark.parametrize(
    "codes, b, expected",
    [
        ([0x1, 0x2], 4, bytes([0x21])),
        ([1, 0, 0, 0, 0, 0, 0, 0, 1], 1, bytes([0x01, 0x01])),
        ([7, 7, 7], 3, bytes([0xFF, 0x01])),
        ([0xAB, 0xCD], 8, bytes([0xAB, 0xCD])),
        ([0x1234], 16, bytes([0x34, 0x12])),
    ],
)
def test_golden_bytes(codes, b, expected):
    assert pack(codes, b) == expected
    assert ref_pack(codes, b) == expected
    assert list(unpack(expected, len(codes), b)) == codes


def test_zero_bytes():
    assert list(unpack(bytes(6), 12, 4)) == [0] * 12


@st.composite
def code_vectors(draw):
    b = draw(st.integers(1, 16))
    m = draw(st.integers(1, 1024))
    codes = draw(st.lists(st.integers(0, 2**b - 1), min_size=m, max_size=m))
    return codes, b


@given(code_vectors())
def test_roundtrip_against_reference(case):
    codes, b = case
    data = pack(codes, b)
    assert len(data) == packed_size(len(codes), b)
    assert data == ref_pack(codes, b)
    assert list(unpack(data, len(codes), b)) == codes


def test_rows_match_single():
    rng = np.random.default_rng(3)
    codes = rng.integers(0, 2**5, size=(20, 37))
    rows = pack_rows(codes, 5)
    for k in range(20):
        assert rows[k].tobytes() == pack(codes[k], 5)
    assert np.array_equal(unpack_rows(rows, 37, 5), codes)


def test_rejects_out_of_range_codes():
    with pytest.raises(PackError):
        pack([16], 4)
    with pytest.raises(PackError):
        pack([-1], 4)
    with pytest.raises(PackError):
        pack([0], 0)
    with pytest.raises(PackError):
        pack([0], 17)


def test_length_mismatch():
    with pytest.raises(PackError):
        unpack(bytes(3), 2, 4)


def test_pad_bits_strict():
    with pytest.raises(PadBitsError):
        unpack(bytes([0xFF, 0x03]), 3, 3)
    assert list(unpack(bytes([0xFF, 0x03]), 3, 3, strict=False)) == [7, 7, 7]

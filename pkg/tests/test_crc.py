import numpy as np
import pytest
from hypothesis import given, strategies as st

from cbcstream.codes.crc import (
    CCITT, PRINTED, CrcSpec, crc_append, crc_check, crc_check_rows, crc_word,
)
from cbcstream.errors import EmptyPayload, FrameTooShort


def long_division_crc(bits, poly=CCITT) -> int:
    """Remainder of message(x) * x^16 mod (x^16 + poly(x)), by plain integer division."""
    msg = 0
    for b in bits:
        msg = (msg << 1) | int(b)
    msg <<= 16
    divisor = (1 << 16) | poly
    while msg.bit_length() > 16:
        msg ^= divisor << (msg.bit_length() - 17)
    return msg


def ascii_bits(text: str) -> np.ndarray:
    return np.unpackbits(np.frombuffer(text.encode(), dtype=np.uint8))


def test_oracle_check_value():
    assert long_division_crc(ascii_bits("123456789")) == 0x31C3


def test_check_value_123456789():
    assert crc_word(ascii_bits("123456789")) == 0x31C3


def test_zero_payload_has_zero_crc():
    assert crc_word(np.zeros(100, dtype=np.uint8)) == 0


@given(st.lists(st.integers(0, 1), min_size=1, max_size=300))
def test_matches_long_division(bits):
    assert crc_word(np.array(bits, dtype=np.uint8)) == long_division_crc(bits)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=300))
def test_round_trip(bits):
    frame = crc_append(np.array(bits, dtype=np.uint8))
    assert frame.size == len(bits) + 16
    assert crc_check(frame)


@pytest.mark.parametrize("spec", [CrcSpec(), CrcSpec(init=0xFFFF), CrcSpec(bit_order="lsb"),
                                  CrcSpec(poly=PRINTED)])
def test_round_trip_all_conventions(spec, rng):
    for _ in range(50):
        x = rng.integers(0, 2, int(rng.integers(1, 200)), dtype=np.uint8)
        assert crc_check(crc_append(x, spec), spec)


@given(st.integers(1, 200), st.data())
def test_linearity(n, data):
    a = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    b = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    assert crc_word(a ^ b) == crc_word(a) ^ crc_word(b)


def test_single_bit_flips_detected(rng):
    frame = crc_append(rng.integers(0, 2, 120, dtype=np.uint8))
    for i in range(frame.size):
        bad = frame.copy()
        bad[i] ^= 1
        assert not crc_check(bad)


def test_unmodified_frame_passes(rng):
    assert crc_check(crc_append(rng.integers(0, 2, 50, dtype=np.uint8)))


def test_all_bursts_up_to_16_detected():
    frame = crc_append(np.random.default_rng(3).integers(0, 2, 48, dtype=np.uint8))
    n = frame.size
    rows = []
    for length in range(1, 17):
        inner = length - 2
        # exhaustive interiors up to length 12, sampled beyond
        if inner <= 10:
            interiors = range(1 << max(inner, 0))
        else:
            interiors = np.random.default_rng(length).integers(0, 1 << inner, 300).tolist()
        for interior in interiors:
            pattern = 1 if length == 1 else (1 << (length - 1)) | (interior << 1) | 1
            bits = [(pattern >> (length - 1 - i)) & 1 for i in range(length)]
            for start in range(0, n - length + 1, 7):
                e = np.zeros(n, dtype=np.uint8)
                e[start:start + length] = bits
                rows.append(frame ^ e)
    assert not crc_check_rows(np.array(rows)).any()


def test_printed_polynomial_misses_a_16_bit_burst():
    # x^16+x^12+x^5+x spans only 16 bit positions (x^1..x^16), so that burst is a codeword
    spec = CrcSpec(poly=PRINTED)
    frame = crc_append(np.zeros(40, dtype=np.uint8), spec)
    e = np.zeros(frame.size, dtype=np.uint8)
    for deg in (16, 12, 5, 1):
        e[frame.size - 1 - deg] = 1
    assert crc_check(frame ^ e, spec)
    assert not crc_check(crc_append(np.zeros(40, dtype=np.uint8)) ^ e)


def test_rows_agree_with_scalar(rng):
    frames = rng.integers(0, 2, (200, 40), dtype=np.uint8)
    frames[:100] = [crc_append(f[:-16]) for f in frames[:100]]
    expected = [crc_check(f) for f in frames]
    np.testing.assert_array_equal(crc_check_rows(frames), expected)
    lsb = CrcSpec(bit_order="lsb")
    np.testing.assert_array_equal(crc_check_rows(frames, lsb), [crc_check(f, lsb) for f in frames])


def test_errors():
    with pytest.raises(EmptyPayload):
        crc_append(np.zeros(0, dtype=np.uint8))
    with pytest.raises(FrameTooShort):
        crc_check(np.zeros(16, dtype=np.uint8))
    with pytest.raises(ValueError):
        CrcSpec(poly=1 << 16)

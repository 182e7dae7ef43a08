"""Bitwise 16-bit CRC over bit arrays.

Bits are uint8 arrays of 0/1. The register is shifted MSB-first by default;
``bit_order="lsb"`` runs the reflected form of the same polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from ..errors import EmptyPayload, FrameTooShort, InputError

WIDTH = 16
CCITT = 0x1021  # x^16 + x^12 + x^5 + 1
PRINTED = 0x1022  # x^16 + x^12 + x^5 + x, no constant term


@dataclass(frozen=True)
class CrcSpec:
    poly: int = CCITT
    init: int = 0x0000
    bit_order: str = "msb"

    def __post_init__(self):
        if not 0 <= self.poly < (1 << WIDTH):
            raise InputError("poly must be a 16-bit word (leading x^16 implicit)")
        if not 0 <= self.init < (1 << WIDTH):
            raise InputError("init must be a 16-bit word")
        if self.bit_order not in ("msb", "lsb"):
            raise InputError("bit_order must be 'msb' or 'lsb'")

    @property
    def width(self) -> int:
        return WIDTH


DEFAULT_CRC = CrcSpec()


def _reflect(value: int, width: int = WIDTH) -> int:
    out = 0
    for _ in range(width):
        out = (out << 1) | (value & 1)
        value >>= 1
    return out


@numba.njit(cache=True, nogil=True)
def _crc_msb(bits, poly, init):
    reg = init
    for b in bits:
        top = ((reg >> 15) & 1) ^ b
        reg = (reg << 1) & 0xFFFF
        if top:
            reg ^= poly
    return reg


@numba.njit(cache=True, nogil=True)
def _crc_lsb(bits, rpoly, init):
    reg = init
    for b in bits:
        low = (reg & 1) ^ b
        reg >>= 1
        if low:
            reg ^= rpoly
    return reg


@numba.njit(cache=True, nogil=True)
def _crc_rows_msb(frames, poly, init):
    out = np.empty(frames.shape[0], dtype=np.int64)
    for r in range(frames.shape[0]):
        out[r] = _crc_msb(frames[r], poly, init)
    return out


def _word_to_bits(word: int, spec: CrcSpec) -> np.ndarray:
    if spec.bit_order == "msb":
        shifts = np.arange(WIDTH - 1, -1, -1)
    else:
        shifts = np.arange(WIDTH)
    return ((word >> shifts) & 1).astype(np.uint8)


def _bits_to_word(bits: np.ndarray, spec: CrcSpec) -> int:
    if spec.bit_order == "msb":
        shifts = np.arange(WIDTH - 1, -1, -1)
    else:
        shifts = np.arange(WIDTH)
    return int(np.sum(bits.astype(np.int64) << shifts))


def crc_word(bits, spec: CrcSpec = DEFAULT_CRC) -> int:
    """16-bit CRC register after shifting ``bits`` through it."""
    bits = np.ascontiguousarray(bits, dtype=np.uint8)
    if spec.bit_order == "msb":
        return int(_crc_msb(bits, spec.poly, spec.init))
    return int(_crc_lsb(bits, _reflect(spec.poly), _reflect(spec.init)))


def crc_append(payload, spec: CrcSpec = DEFAULT_CRC) -> np.ndarray:
    """Return ``payload || crc(payload)`` as a new bit array."""
    payload = np.ascontiguousarray(payload, dtype=np.uint8)
    if payload.size == 0:
        raise EmptyPayload("cannot protect an empty payload")
    return np.concatenate([payload, _word_to_bits(crc_word(payload, spec), spec)])


def crc_check(frame, spec: CrcSpec = DEFAULT_CRC) -> bool:
    """True iff the trailing 16 bits equal the CRC of the bits before them."""
    frame = np.ascontiguousarray(frame, dtype=np.uint8)
    if frame.size <= WIDTH:
        raise FrameTooShort(f"frame of {frame.size} bits has no payload")
    return crc_word(frame[:-WIDTH], spec) == _bits_to_word(frame[-WIDTH:], spec)


def crc_check_rows(frames, spec: CrcSpec = DEFAULT_CRC) -> np.ndarray:
    """Vectorised ``crc_check`` over the rows of a 2-D bit array."""
    frames = np.ascontiguousarray(frames, dtype=np.uint8)
    if frames.ndim != 2 or frames.shape[1] <= WIDTH:
        raise FrameTooShort("expected 2-D frames longer than 16 bits")
    if spec.bit_order == "msb":
        words = _crc_rows_msb(frames[:, :-WIDTH], spec.poly, spec.init)
    else:
        rpoly, rinit = _reflect(spec.poly), _reflect(spec.init)
        words = np.array([_crc_lsb(row, rpoly, rinit) for row in frames[:, :-WIDTH]], dtype=np.int64)
    shifts = np.arange(WIDTH - 1, -1, -1) if spec.bit_order == "msb" else np.arange(WIDTH)
    stored = (frames[:, -WIDTH:].astype(np.int64) << shifts).sum(axis=1)
    return words == stored

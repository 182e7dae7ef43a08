"""Zero-tail feedforward convolutional codes, puncturing and hard-decision Viterbi."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numba
import numpy as np

from ..errors import EmptyPayload, InputError, LengthMismatch

ERASED = -1


@dataclass(frozen=True)
class ConvCodeSpec:
    """A punctured feedforward convolutional code terminated with ``memory`` zero bits.

    ``generators`` are integers whose most significant of ``memory + 1`` bits taps
    the current input (the usual octal convention, e.g. ``0o133``).
    ``puncture`` has one row per generator and one column per period step;
    a 1 keeps that output bit. ``None`` means no puncturing.
    """

    memory: int
    generators: tuple[int, ...]
    puncture: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.memory < 1:
            raise InputError("memory must be >= 1")
        gens = tuple(int(g) for g in self.generators)
        if not gens or any(g <= 0 or g >= (1 << (self.memory + 1)) for g in gens):
            raise InputError(f"generators must be non-zero {self.memory + 1}-bit words")
        object.__setattr__(self, "generators", gens)
        if self.puncture is not None:
            pat = tuple(tuple(int(v) for v in row) for row in self.puncture)
            if len(pat) != len(gens) or len({len(r) for r in pat}) != 1:
                raise InputError("puncture matrix needs one equal-length row per generator")
            if any(v not in (0, 1) for r in pat for v in r) or not any(v for r in pat for v in r):
                raise InputError("puncture matrix must be 0/1 with at least one kept bit")
            object.__setattr__(self, "puncture", pat)

    @property
    def n_outputs(self) -> int:
        return len(self.generators)

    @property
    def tail_bits(self) -> int:
        return self.memory

    @cached_property
    def mask(self) -> np.ndarray:
        """Keep-mask of shape (period, n_outputs)."""
        if self.puncture is None:
            return np.ones((1, self.n_outputs), dtype=bool)
        return np.array(self.puncture, dtype=bool).T.copy()

    @property
    def period(self) -> int:
        return self.mask.shape[0]

    @property
    def rate(self) -> Fraction:
        return Fraction(self.period, int(self.mask.sum()))

    @cached_property
    def _taps(self) -> np.ndarray:
        m = self.memory
        return np.array([[(g >> (m - i)) & 1 for i in range(m + 1)] for g in self.generators],
                        dtype=np.uint8)

    @cached_property
    def _branch_outputs(self) -> np.ndarray:
        """out[state, input, j]: output j when ``input`` enters a register in ``state``."""
        m, n_states = self.memory, 1 << self.memory
        out = np.empty((n_states, 2, self.n_outputs), dtype=np.int8)
        for s in range(n_states):
            for u in (0, 1):
                reg = (u << m) | s
                for j, g in enumerate(self.generators):
                    out[s, u, j] = bin(reg & g).count("1") & 1
        return out

    @cached_property
    def _branch_labels(self) -> np.ndarray:
        """Branch outputs packed as integers, bit j = output j."""
        weights = (1 << np.arange(self.n_outputs)).astype(np.int64)
        return (self._branch_outputs.astype(np.int64) * weights).sum(axis=2)

    def steps(self, payload_len: int) -> int:
        return payload_len + self.memory

    def encoded_length(self, payload_len: int) -> int:
        """Number of transmitted bits for a payload of ``payload_len`` bits (tail included)."""
        t = self.steps(payload_len)
        per_period = self.mask.sum(axis=1)
        full, rem = divmod(t, self.period)
        return int(full * per_period.sum() + per_period[:rem].sum())

    def payload_length(self, encoded_len: int) -> int:
        """Inverse of :meth:`encoded_length`; raises if no payload length fits."""
        lo = max(1, int(encoded_len * self.rate) - self.memory - self.period - 1)
        for k in range(lo, lo + 2 * self.period + self.memory + 4):
            n = self.encoded_length(k)
            if n == encoded_len:
                return k
            if n > encoded_len:
                break
        raise LengthMismatch(f"no payload length encodes to {encoded_len} bits")


def encoder_states(payload, spec: ConvCodeSpec) -> np.ndarray:
    """Register state after each step of encoding ``payload`` plus its tail."""
    u = np.concatenate([np.asarray(payload, dtype=np.int64), np.zeros(spec.memory, dtype=np.int64)])
    m = spec.memory
    states = np.empty(u.size, dtype=np.int64)
    s = 0
    for t, b in enumerate(u):
        s = (int(b) << (m - 1)) | (s >> 1)
        states[t] = s
    return states


def conv_encode(payload, spec: ConvCodeSpec) -> np.ndarray:
    """Append the zero tail, encode from the all-zero state, then puncture."""
    u = np.asarray(payload, dtype=np.uint8).ravel()
    if u.size == 0:
        raise EmptyPayload("nothing to encode")
    u = np.concatenate([u, np.zeros(spec.memory, dtype=np.uint8)])
    t = u.size
    coded = np.empty((t, spec.n_outputs), dtype=np.uint8)
    for j, taps in enumerate(spec._taps):
        coded[:, j] = np.convolve(u, taps)[:t] & 1
    keep = np.resize(spec.mask, (t, spec.n_outputs))
    return coded[keep]


def depuncture(received, spec: ConvCodeSpec, payload_len: int) -> np.ndarray:
    """(steps, n_outputs) int8 array with punctured positions set to ``ERASED``."""
    received = np.asarray(received, dtype=np.int8).ravel()
    t = spec.steps(payload_len)
    keep = np.resize(spec.mask, (t, spec.n_outputs))
    if received.size != int(keep.sum()):
        raise LengthMismatch(
            f"expected {int(keep.sum())} coded bits for a {payload_len}-bit payload, got {received.size}")
    full = np.full((t, spec.n_outputs), ERASED, dtype=np.int8)
    full[keep] = received
    return full


@numba.njit(cache=True, nogil=True)
def _viterbi(rx, branch_label, memory):
    n_steps, n_out = rx.shape
    n_states = 1 << memory
    n_labels = 1 << n_out
    big = np.int64(1) << 40
    metric = np.full(n_states, big, dtype=np.int64)
    metric[0] = 0
    new = np.empty(n_states, dtype=np.int64)
    label_metric = np.empty(n_labels, dtype=np.int64)
    decision = np.empty((n_steps, n_states), dtype=np.uint8)
    low_mask = n_states - 1
    for t in range(n_steps):
        for lab in range(n_labels):
            d = 0
            for j in range(n_out):
                r = rx[t, j]
                if r >= 0 and ((lab >> j) & 1) != r:
                    d += 1
            label_metric[lab] = d
        for s in range(n_states):
            u = s >> (memory - 1)
            p0 = (s << 1) & low_mask
            p1 = p0 | 1
            m0 = metric[p0] + label_metric[branch_label[p0, u]]
            m1 = metric[p1] + label_metric[branch_label[p1, u]]
            # ties keep the predecessor whose departing register bit is 0
            if m1 < m0:
                new[s] = m1
                decision[t, s] = 1
            else:
                new[s] = m0
                decision[t, s] = 0
        for s in range(n_states):
            metric[s] = new[s]
    bits = np.empty(n_steps, dtype=np.uint8)
    s = 0
    for t in range(n_steps - 1, -1, -1):
        bits[t] = s >> (memory - 1)
        s = ((s << 1) & low_mask) | decision[t, s]
    return bits, metric[0]


def viterbi_decode(received, spec: ConvCodeSpec, payload_len: int) -> np.ndarray:
    """Maximum-likelihood (Hamming metric) payload for a zero-terminated codeword.

    Punctured positions are erasures and add nothing to any branch metric.
    """
    rx = depuncture(received, spec, payload_len)
    bits, _ = _viterbi(rx, spec._branch_labels, spec.memory)
    return bits[:payload_len]


def rcpc_family(memory: int = 6, generators=(0o133, 0o171, 0o165, 0o117), period: int = 8):
    """Rate-compatible punctured family from a rate-1/len(generators) mother code.

    Rates run ``period/(period+l)`` for ``l = 1 .. (n-1)*period``. Each rate keeps a
    prefix of one fixed priority order over the puncturing matrix, so every
    higher-rate code's kept bits are a subset of every lower-rate code's. The
    first generator's row is always kept in full, which makes every member
    injective on zero-tail inputs.
    """
    n = len(generators)
    # bit-reversal spread of period positions, so partially kept rows are even
    width = max(1, (period - 1).bit_length())
    order_t = sorted(range(period), key=lambda t: (int(f"{t:0{width}b}"[::-1], 2), t))
    priority = [(0, t) for t in range(period)]
    for j in range(1, n):
        priority += [(j, t) for t in order_t]
    family = {}
    for extra in range(1, (n - 1) * period + 1):
        pat = [[0] * period for _ in range(n)]
        for j, t in priority[: period + extra]:
            pat[j][t] = 1
        spec = ConvCodeSpec(memory, tuple(generators), tuple(tuple(r) for r in pat))
        family[spec.rate] = spec
    return family

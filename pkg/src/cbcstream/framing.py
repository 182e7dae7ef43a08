"""Chunked concatenated block coding of an embedded bitstream.

Stage ``l`` payload is the previous codeword followed by the ``m_l`` chunks of
block ``l``; payloads of stages >= 2 are interleaved before encoding. Each
chunk is ``k`` source bits plus a CRC over those bits, ``upsilon`` bits total.
Decoding peels the stages off in reverse and keeps only the chunks before the
first CRC failure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Sequence

import numpy as np

from .codes.codeset import CodeSet, decode, encode, format_rate, parse_rate
from .codes.crc import DEFAULT_CRC, CrcSpec, crc_append, crc_check
from .errors import Infeasible, InputError, LengthMismatch, SourceTooShort

BudgetMode = Literal["idealized", "exact"]


@dataclass(frozen=True)
class ChunkPlan:
    m: tuple[int, ...]
    upsilon: int
    n_r: int
    n_s: int
    tail_bits: tuple[int, ...] | None = None

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        object.__setattr__(self, "m", m)
        if not m or any(v < 1 for v in m):
            raise InputError("need at least one stage and m_i >= 1")
        if self.upsilon - self.n_r < 1 or self.n_r < 0:
            raise InputError(f"chunk of {self.upsilon} bits leaves no room for {self.n_r} detection bits")
        if self.n_s < 1:
            raise InputError("n_s must be >= 1")
        tail = (0,) * len(m) if self.tail_bits is None else tuple(int(t) for t in self.tail_bits)
        if len(tail) != len(m) or any(t < 0 for t in tail):
            raise InputError("tail_bits needs one non-negative entry per stage")
        object.__setattr__(self, "tail_bits", tail)

    @property
    def n_stages(self) -> int:
        return len(self.m)

    M = n_stages

    @property
    def k(self) -> int:
        return self.upsilon - self.n_r

    @property
    def total_chunks(self) -> int:
        return sum(self.m)

    @property
    def levels(self) -> int:
        """Number of distinct reconstructions at the receiver."""
        return self.total_chunks + 1

    @property
    def source_bits(self) -> int:
        return self.k * self.total_chunks

    def stage_of_chunk(self) -> np.ndarray:
        """0-based stage index of every chunk in transmission order."""
        return np.repeat(np.arange(self.n_stages), self.m)


@dataclass(frozen=True)
class Policy:
    plan: ChunkPlan
    codes: tuple[Fraction, ...]
    interleaver_seed: int = 0
    budget_mode: BudgetMode = "exact"

    def __post_init__(self):
        codes = tuple(parse_rate(c) for c in self.codes)
        object.__setattr__(self, "codes", codes)
        if len(codes) != self.plan.n_stages:
            raise InputError(f"{len(codes)} codes for {self.plan.n_stages} stages")
        if self.budget_mode not in ("idealized", "exact"):
            raise InputError(f"unknown budget mode {self.budget_mode!r}")

    def check_codes(self, code_set: CodeSet) -> None:
        for c in self.codes:
            code_set[c]

    def sort_key(self):
        p = self.plan
        return (p.n_stages, p.upsilon, self.codes, p.m)

    def to_json(self) -> dict:
        p = self.plan
        return {
            "M": p.n_stages,
            "m": list(p.m),
            "upsilon": p.upsilon,
            "N_r": p.n_r,
            "N_s": p.n_s,
            "tail_bits": list(p.tail_bits),
            "codes": [format_rate(c) for c in self.codes],
            "interleaver_seed": self.interleaver_seed,
            "budget_mode": self.budget_mode,
        }

    @classmethod
    def from_json(cls, d: dict, code_set: CodeSet | None = None) -> "Policy":
        try:
            m = tuple(d["m"])
            if "M" in d and int(d["M"]) != len(m):
                raise InputError(f"M={d['M']} but m has {len(m)} entries")
            codes = tuple(parse_rate(c) for c in d["codes"])
            tail = d.get("tail_bits")
            if tail is None and code_set is not None:
                tail = [code_set[c].tail_bits for c in codes]
            plan = ChunkPlan(m, int(d["upsilon"]), int(d["N_r"]), int(d["N_s"]), tail)
            return cls(plan, codes, int(d.get("interleaver_seed", 0)), d.get("budget_mode", "exact"))
        except KeyError as exc:
            raise InputError(f"policy is missing field {exc.args[0]!r}") from None


# -- budget ---------------------------------------------------------------

def idealized_bits(m: Sequence[int], upsilon: int, codes: Sequence) -> Fraction:
    """Outermost codeword length without tail bits: sum_i m_i*upsilon / prod_{j>=i} r_j."""
    codes = [parse_rate(c) for c in codes]
    total = Fraction(0)
    for i, mi in enumerate(m):
        denom = Fraction(1)
        for r in codes[i:]:
            denom *= r
        total += Fraction(mi * upsilon) / denom
    return total


def exact_bits(m: Sequence[int], upsilon: int, codes: Sequence, code_set: CodeSet) -> int:
    """Realized |c_M| in bits: tails charged per stage, puncturing and filler counted."""
    length = 0
    for mi, c in zip(m, codes):
        length = code_set[c].encoded_length(length + mi * upsilon)
    return length


def transmission_rate(policy: Policy, code_set: CodeSet | None = None,
                      budget_mode: BudgetMode | None = None) -> Fraction:
    """r_tr in channel bits per source sample, as an exact fraction."""
    mode = budget_mode or policy.budget_mode
    p = policy.plan
    if mode == "idealized":
        bits = idealized_bits(p.m, p.upsilon, policy.codes)
    else:
        if code_set is None:
            raise InputError("exact budget mode needs the code set")
        bits = Fraction(exact_bits(p.m, p.upsilon, policy.codes, code_set))
    return bits / p.n_s


def plan_from_budget(n_stages: int, upsilon: int, n_r: int, n_s: int, codes: Sequence, budget: float,
                     budget_mode: BudgetMode = "idealized", code_set: CodeSet | None = None,
                     max_total_chunks: int | None = None) -> list[ChunkPlan]:
    """Every chunk-count vector (m_1..m_M), m_i >= 1, whose r_tr fits ``budget``.

    Vectors come out in lexicographic order. The comparison is done in exact
    rational arithmetic against the binary value of ``budget``.
    """
    codes = tuple(parse_rate(c) for c in codes)
    if len(codes) != n_stages or n_stages < 1:
        raise InputError("need one code per stage")
    if upsilon <= n_r:
        raise InputError("upsilon must exceed n_r")
    if budget <= 0:
        raise InputError("budget must be positive")
    cap_bits = Fraction(budget) * n_s
    if budget_mode == "idealized":
        def bits(m):
            return idealized_bits(m, upsilon, codes)
        tail = (0,) * n_stages if code_set is None else tuple(code_set[c].tail_bits for c in codes)
    elif budget_mode == "exact":
        if code_set is None:
            raise InputError("exact budget mode needs the code set")
        def bits(m):
            return exact_bits(m, upsilon, codes, code_set)
        tail = tuple(code_set[c].tail_bits for c in codes)
    else:
        raise InputError(f"unknown budget mode {budget_mode!r}")

    out: list[ChunkPlan] = []
    m = [1] * n_stages

    def fill(i: int, used: int):
        while True:
            if bits(m) > cap_bits:
                break
            if max_total_chunks is not None and used + m[i] + (n_stages - i - 1) > max_total_chunks:
                break
            if i == n_stages - 1:
                out.append(ChunkPlan(tuple(m), upsilon, n_r, n_s, tail))
            else:
                fill(i + 1, used + m[i])
            m[i] += 1
        m[i] = 1

    fill(0, 0)
    if not out:
        raise Infeasible(
            f"even m=(1,...,1) needs r_tr={float(bits([1] * n_stages)) / n_s:.6g} > B={budget}")
    return out


# -- chunks and interleaving ----------------------------------------------

def chunkize(source_bits, plan: ChunkPlan, crc: CrcSpec = DEFAULT_CRC) -> list[np.ndarray]:
    """Split the first ``k * sum(m)`` source bits into CRC-protected chunks."""
    if plan.n_r != crc.width:
        raise InputError(f"CRC framing needs n_r == {crc.width}, plan has {plan.n_r}")
    source_bits = np.asarray(source_bits, dtype=np.uint8).ravel()
    need = plan.source_bits
    if source_bits.size < need:
        raise SourceTooShort(f"plan needs {need} source bits, got {source_bits.size}")
    k = plan.k
    return [crc_append(source_bits[i * k:(i + 1) * k], crc) for i in range(plan.total_chunks)]


def permutation(seed: int, stage: int, length: int) -> np.ndarray:
    ss = np.random.SeedSequence([int(seed), int(stage), int(length)])
    return np.random.Generator(np.random.PCG64(ss)).permutation(length)


def interleave(bits, seed: int, stage: int) -> np.ndarray:
    bits = np.asarray(bits)
    if stage < 2:
        return bits.copy()
    return bits[permutation(seed, stage, bits.size)]


def deinterleave(bits, seed: int, stage: int) -> np.ndarray:
    bits = np.asarray(bits)
    if stage < 2:
        return bits.copy()
    out = np.empty_like(bits)
    out[permutation(seed, stage, bits.size)] = bits
    return out


# -- codec ----------------------------------------------------------------

def stage_lengths(policy: Policy, code_set: CodeSet) -> list[tuple[int, int]]:
    """(payload bits, codeword bits) for every stage."""
    out = []
    prev = 0
    for mi, c in zip(policy.plan.m, policy.codes):
        payload = prev + mi * policy.plan.upsilon
        prev = code_set[c].encoded_length(payload)
        out.append((payload, prev))
    return out


def frame_length(policy: Policy, code_set: CodeSet) -> int:
    return stage_lengths(policy, code_set)[-1][1]


def encode_stream(source_bits, policy: Policy, code_set: CodeSet, crc: CrcSpec = DEFAULT_CRC) -> np.ndarray:
    """Encode the source prefix into the outermost codeword c_M."""
    policy.check_codes(code_set)
    plan = policy.plan
    chunks = chunkize(source_bits, plan, crc)
    codeword = np.zeros(0, dtype=np.uint8)
    start = 0
    for stage, (mi, c) in enumerate(zip(plan.m, policy.codes), start=1):
        block = np.concatenate(chunks[start:start + mi])
        start += mi
        payload = interleave(np.concatenate([codeword, block]), policy.interleaver_seed, stage)
        codeword = encode(code_set[c], payload)
    return codeword


def peel(received, policy: Policy, code_set: CodeSet) -> list[np.ndarray]:
    """Decode every stage from the outside in; chunks are returned in transmission order."""
    policy.check_codes(code_set)
    received = np.asarray(received, dtype=np.uint8).ravel()
    lengths = stage_lengths(policy, code_set)
    if received.size != lengths[-1][1]:
        raise LengthMismatch(f"expected {lengths[-1][1]} received bits, got {received.size}")
    plan = policy.plan
    blocks: list[list[np.ndarray]] = [None] * plan.n_stages
    current = received
    for stage in range(plan.n_stages, 0, -1):
        payload_len = lengths[stage - 1][0]
        payload = decode(code_set[policy.codes[stage - 1]], current, payload_len)
        payload = deinterleave(payload, policy.interleaver_seed, stage)
        block_bits = plan.m[stage - 1] * plan.upsilon
        block = payload[payload_len - block_bits:]
        blocks[stage - 1] = list(block.reshape(plan.m[stage - 1], plan.upsilon))
        current = payload[:payload_len - block_bits]
    return [chunk for block in blocks for chunk in block]


def label_chunks(chunks: Sequence[np.ndarray], crc: CrcSpec = DEFAULT_CRC) -> list[bool]:
    """CRC verdict per chunk (True = ok)."""
    return [crc_check(c, crc) for c in chunks]


def first_failure(labels: Sequence[bool]) -> int:
    for i, ok in enumerate(labels):
        if not ok:
            return i
    return len(labels)


@dataclass
class DecodeOutcome:
    decoded_chunks: int
    labels: list[bool]
    source_rate: float
    source_bits: np.ndarray = field(repr=False)

    @property
    def chunk_labels(self) -> list[str]:
        return ["ok" if ok else "failed" for ok in self.labels]


def outcome_from_chunks(chunks: Sequence[np.ndarray], plan: ChunkPlan, crc: CrcSpec = DEFAULT_CRC) -> DecodeOutcome:
    labels = label_chunks(chunks, crc)
    n = first_failure(labels)
    k = plan.k
    bits = np.concatenate([c[:k] for c in chunks[:n]]) if n else np.zeros(0, dtype=np.uint8)
    return DecodeOutcome(n, labels, n * k / plan.n_s, bits)


def decode_stream(received, policy: Policy, code_set: CodeSet, crc: CrcSpec = DEFAULT_CRC) -> DecodeOutcome:
    return outcome_from_chunks(peel(received, policy, code_set), policy.plan, crc)

"""Chunk decoding-failure probabilities P_e and their Monte Carlo estimation."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import InputError, MissingEntry
from .codeset import CodeSet, format_rate, parse_rate
from .crc import DEFAULT_CRC, CrcSpec

PE_FIELDS = ["rates", "upsilon", "eps0", "pe", "trials"]


@dataclass(frozen=True)
class PeEntry:
    pe: float
    trials: int = 0

    @property
    def provenance(self) -> str:
        return "measured" if self.trials > 0 else "ingested"

    @property
    def stderr(self) -> float:
        """Binomial standard error of a measured estimate (nan when ingested)."""
        if self.trials <= 0:
            return math.nan
        return math.sqrt(self.pe * (1.0 - self.pe) / self.trials)


def _key(rates, upsilon, eps0):
    return tuple(parse_rate(r) for r in rates), int(upsilon), float(eps0)


class PeTable:
    """P_e keyed by (code-rate suffix, chunk size, crossover probability)."""

    def __init__(self, entries: dict | None = None):
        self._entries: dict[tuple, PeEntry] = {}
        for (rates, upsilon, eps0), entry in (entries or {}).items():
            self.add(rates, upsilon, eps0, entry)

    def add(self, rates: Sequence, upsilon: int, eps0: float, entry) -> None:
        if not isinstance(entry, PeEntry):
            entry = PeEntry(float(entry))
        if not 0.0 <= entry.pe <= 1.0 or math.isnan(entry.pe):
            raise InputError(f"P_e {entry.pe} outside [0, 1]")
        key = _key(rates, upsilon, eps0)
        if not key[0]:
            raise InputError("empty code sequence")
        self._entries[key] = entry

    def __len__(self):
        return len(self._entries)

    def __contains__(self, key):
        return _key(*key) in self._entries

    def items(self):
        return sorted(self._entries.items(), key=lambda kv: (kv[0][2], kv[0][1], len(kv[0][0]), kv[0][0]))

    @property
    def eps0_values(self) -> list[float]:
        return sorted({k[2] for k in self._entries})

    def entry(self, rates: Sequence, upsilon: int, eps0: float | None = None) -> PeEntry:
        rates = tuple(parse_rate(r) for r in rates)
        if eps0 is None:
            found = [e for (r, u, _), e in self._entries.items() if r == rates and u == upsilon]
            if len(found) == 1:
                return found[0]
            if not found:
                raise MissingEntry(f"no P_e for codes ({_fmt(rates)}) at upsilon={upsilon}")
            raise MissingEntry(f"P_e for ({_fmt(rates)}) stored at several eps0 values; pass eps0")
        try:
            return self._entries[(rates, int(upsilon), float(eps0))]
        except KeyError:
            raise MissingEntry(
                f"no P_e for codes ({_fmt(rates)}) at upsilon={upsilon}, eps0={eps0}") from None

    def lookup(self, rates: Sequence, upsilon: int, eps0: float | None = None) -> float:
        return self.entry(rates, upsilon, eps0).pe

    def stage_probs(self, codes: Sequence, upsilon: int, eps0: float | None = None) -> list[float]:
        """[P_e(c^(z..M)) for z = 1..M]."""
        return [self.lookup(codes[z:], upsilon, eps0) for z in range(len(codes))]

    def merge(self, other: "PeTable") -> "PeTable":
        out = PeTable()
        out._entries = {**self._entries, **other._entries}
        return out

    @classmethod
    def from_function(cls, fn, rate_sequences: Iterable[Sequence], upsilons: Iterable[int],
                      eps0s: Iterable[float]) -> "PeTable":
        """Tabulate ``fn(rates, upsilon, eps0)`` as ingested entries."""
        table = cls()
        upsilons, eps0s = list(upsilons), list(eps0s)
        for rates in rate_sequences:
            for u in upsilons:
                for e in eps0s:
                    table.add(rates, u, e, PeEntry(float(fn(tuple(rates), u, e))))
        return table


def _fmt(rates) -> str:
    return ";".join(format_rate(r) for r in rates)


def pe_lookup(table: PeTable, z: int, policy, eps0: float | None = None) -> float:
    """P_e(c^(z..M)) for 1-based stage ``z``; exactly 1 beyond the last stage."""
    if z < 1:
        raise InputError(f"stage index must be >= 1, got {z}")
    codes = policy.codes
    if z > len(codes):
        return 1.0
    return table.lookup(codes[z - 1:], policy.plan.upsilon, eps0)


def read_pe_csv(path) -> PeTable:
    table = PeTable()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != PE_FIELDS:
            raise InputError(f"{path}: expected header {','.join(PE_FIELDS)}")
        for row in reader:
            rates = [parse_rate(r) for r in row["rates"].split(";")]
            trials = int(row["trials"]) if row["trials"].strip() else 0
            table.add(rates, int(row["upsilon"]), float(row["eps0"]), PeEntry(float(row["pe"]), trials))
    return table


def write_pe_csv(table: PeTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(PE_FIELDS) + "\n")
        for (rates, upsilon, eps0), e in table.items():
            fh.write(f"{_fmt(rates)},{upsilon},{eps0:.17g},{e.pe:.17g},{e.trials}\n")


def _pe_trial(trial, rates, code_set, upsilon, n_r, eps0, seed, crc, frame_chunks):
    from ..channel import STREAM_FRAME, STREAM_SOURCE, BscChannel, trial_rng
    from ..framing import ChunkPlan, Policy, encode_stream, label_chunks, peel

    rng = trial_rng(seed, trial, STREAM_FRAME)
    position = int(rng.integers(frame_chunks))
    interleaver_seed = int(rng.integers(2**62))
    n_stages = len(rates)
    plan = ChunkPlan(m=(frame_chunks,) * n_stages, upsilon=upsilon, n_r=n_r, n_s=1,
                     tail_bits=tuple(code_set[r].tail_bits for r in rates))
    policy = Policy(plan, tuple(rates), interleaver_seed)
    source = trial_rng(seed, trial, STREAM_SOURCE).integers(0, 2, plan.source_bits, dtype=np.uint8)
    sent = encode_stream(source, policy, code_set, crc)
    received = BscChannel(eps0, seed).transmit(sent, trial)
    chunks = peel(received, policy, code_set)
    return not label_chunks(chunks[position:position + 1], crc)[0]


def estimate_pe(codes: Sequence, upsilon: int, eps0: float, trials: int, seed: int,
                code_set: CodeSet, crc: CrcSpec = DEFAULT_CRC, n_r: int = 16,
                frame_chunks: int = 3, workers: int = 1) -> PeEntry:
    """Monte Carlo P_e for a chunk first encoded by ``codes[0]`` and then nested in ``codes[1:]``.

    Every trial builds a frame with ``frame_chunks`` chunks per stage, places the
    chunk under test at a uniformly drawn position of the innermost block,
    sends it through encode -> BSC -> decode and records whether its CRC fails.
    Trial ``t`` uses only substreams of ``(seed, t)``, so the result does not
    depend on ``workers``.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    rates = tuple(parse_rate(r) for r in codes)
    if not rates:
        raise InputError("empty code sequence")
    for r in rates:
        code_set[r]
    if upsilon <= n_r:
        raise InputError("upsilon must exceed n_r")
    args = (rates, code_set, upsilon, n_r, eps0, seed, crc, frame_chunks)
    if workers <= 1:
        failures = sum(_pe_trial(t, *args) for t in range(trials))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            failures = sum(pool.map(lambda t: _pe_trial(t, *args), range(trials)))
    return PeEntry(failures / trials, trials)

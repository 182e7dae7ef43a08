"""Discrete code-rate sets and their realizations."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

import numpy as np

from ..errors import EmptyPayload, InputError, LengthMismatch, UnknownCode
from .conv import ConvCodeSpec, conv_encode, rcpc_family, viterbi_decode


def parse_rate(value) -> Fraction:
    """Accept ``"a/b"`` strings, ints, floats or Fractions; result in (0, 1]."""
    if isinstance(value, Fraction):
        r = value
    elif isinstance(value, str):
        r = Fraction(value.strip())
    elif isinstance(value, float):
        r = Fraction(value).limit_denominator(1 << 16)
    else:
        r = Fraction(value)
    if not 0 < r <= 1:
        raise InputError(f"code rate {value!r} not in (0, 1]")
    return r


def format_rate(r: Fraction) -> str:
    return f"{r.numerator}/{r.denominator}"


@dataclass(frozen=True)
class IdealCode:
    """A code known only by its rate; failure behaviour comes from a PeTable.

    In the bit-true codec it is realised as the payload followed by zero filler
    up to ``ceil(len / rate)`` bits, so frame lengths stay honest. It corrects
    nothing; only the rate-1 passthrough is meaningful over a noisy channel.
    """

    rate: Fraction

    tail_bits = 0

    def __post_init__(self):
        object.__setattr__(self, "rate", parse_rate(self.rate))

    def encoded_length(self, payload_len: int) -> int:
        return math.ceil(Fraction(payload_len) / self.rate)

    @property
    def passthrough(self) -> bool:
        return self.rate == 1


Code = Union[ConvCodeSpec, IdealCode]


def encoded_length(code: Code, payload_len: int) -> int:
    return code.encoded_length(payload_len)


def encode(code: Code, payload) -> np.ndarray:
    payload = np.asarray(payload, dtype=np.uint8).ravel()
    if payload.size == 0:
        raise EmptyPayload("nothing to encode")
    if isinstance(code, ConvCodeSpec):
        return conv_encode(payload, code)
    filler = np.zeros(code.encoded_length(payload.size) - payload.size, dtype=np.uint8)
    return np.concatenate([payload, filler])


def decode(code: Code, received, payload_len: int) -> np.ndarray:
    received = np.asarray(received, dtype=np.uint8).ravel()
    if isinstance(code, ConvCodeSpec):
        return viterbi_decode(received, code, payload_len)
    if received.size != code.encoded_length(payload_len):
        raise LengthMismatch(f"expected {code.encoded_length(payload_len)} bits, got {received.size}")
    return received[:payload_len].copy()


class CodeSet(Mapping):
    """Ordered mapping rate -> realization. Iteration follows increasing rate."""

    def __init__(self, codes: Iterable[Code]):
        table: dict[Fraction, Code] = {}
        for c in codes:
            if c.rate in table:
                raise InputError(f"duplicate code rate {format_rate(c.rate)}")
            table[c.rate] = c
        if not table:
            raise InputError("empty code set")
        self._codes = dict(sorted(table.items()))

    def __getitem__(self, rate) -> Code:
        r = parse_rate(rate)
        try:
            return self._codes[r]
        except KeyError:
            raise UnknownCode(f"rate {format_rate(r)} is not in the code set") from None

    def __iter__(self):
        return iter(self._codes)

    def __len__(self):
        return len(self._codes)

    def __repr__(self):
        return f"CodeSet([{', '.join(format_rate(r) for r in self._codes)}])"

    @property
    def rates(self) -> tuple[Fraction, ...]:
        return tuple(self._codes)

    def subset(self, rates) -> "CodeSet":
        return CodeSet(self[r] for r in rates)

    def tail_bits(self, rate) -> int:
        return self[rate].tail_bits

    def to_json(self) -> list[dict]:
        out = []
        for r, c in self._codes.items():
            if isinstance(c, ConvCodeSpec):
                out.append({
                    "rate": format_rate(r),
                    "kind": "conv",
                    "memory": c.memory,
                    "generators": [format(g, "o") for g in c.generators],
                    "puncturing": [list(row) for row in c.puncture] if c.puncture else None,
                })
            else:
                out.append({"rate": format_rate(r), "kind": "ideal"})
        return out

    @classmethod
    def from_json(cls, items) -> "CodeSet":
        codes = []
        for item in items:
            kind = item.get("kind")
            if kind == "ideal":
                codes.append(IdealCode(parse_rate(item["rate"])))
            elif kind == "conv":
                gens = tuple(int(str(g), 8) for g in item["generators"])
                spec = ConvCodeSpec(int(item["memory"]), gens, item.get("puncturing"))
                if "rate" in item and parse_rate(item["rate"]) != spec.rate:
                    raise InputError(
                        f"declared rate {item['rate']} differs from puncturing rate {format_rate(spec.rate)}")
                codes.append(spec)
            else:
                raise InputError(f"unknown code kind {kind!r}")
        return cls(codes)


def load_code_set(path) -> CodeSet:
    with open(path, encoding="utf-8") as fh:
        return CodeSet.from_json(json.load(fh))


def save_code_set(code_set: CodeSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(code_set.to_json(), fh, indent=1)
        fh.write("\n")


def default_rcpc(rates=None) -> CodeSet:
    """Memory-6 RCPC ladder (period 8, mother rate 1/4), optionally restricted."""
    family = rcpc_family()
    if rates is None:
        return CodeSet(family.values())
    try:
        return CodeSet(family[parse_rate(r)] for r in rates)
    except KeyError as exc:
        raise UnknownCode(f"rate {exc.args[0]} is not in the RCPC family") from None

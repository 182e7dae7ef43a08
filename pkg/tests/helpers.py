"""Builders shared by the test modules."""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from cbcstream.codes import PeTable
from cbcstream.framing import ChunkPlan, Policy
from cbcstream.rdmodel import RdCurve

RATES = (Fraction(1, 2), Fraction(2, 3), Fraction(4, 5))


def random_curve(rng: np.random.Generator, max_rate: float = 1.0, n_points: int | None = None,
                 interpolation: str = "linear") -> RdCurve:
    n = n_points or int(rng.integers(2, 12))
    rates = np.concatenate([[0.0], np.sort(rng.uniform(0, max_rate, n - 1))])
    rates = np.unique(rates)
    dists = np.sort(rng.uniform(0.5, 300.0, rates.size))[::-1]
    return RdCurve(tuple(rates), tuple(dists), interpolation)


def random_instance(rng: np.random.Generator, max_chunks: int = 12, eps0: float = 0.05):
    """Random policy with total chunks <= max_chunks and a table of random P_e."""
    M = int(rng.integers(1, 4))
    while True:
        m = tuple(int(v) for v in rng.integers(1, 6, M))
        if sum(m) <= max_chunks:
            break
    upsilon = int(rng.integers(17, 200))
    codes = tuple(RATES[i] for i in rng.integers(0, len(RATES), M))
    plan = ChunkPlan(m, upsilon, 16, int(rng.integers(100, 5000)))
    policy = Policy(plan, codes)
    table = PeTable()
    for z in range(M):
        # occasionally pin P_e to the edges of [0, 1]
        pick = rng.random()
        pe = 0.0 if pick < 0.05 else 1.0 if pick < 0.1 else float(rng.random())
        table.add(codes[z:], upsilon, eps0, pe)
    return policy, table


def toy_pe(rates, upsilon, eps0) -> float:
    """Synthetic P_e: residual BER shrinks through each nested code, rate r maps p -> (4p)^(1/r)/4."""
    p = eps0
    for r in reversed(rates):
        p = min(p, (4 * p) ** (1 / float(r)) / 4)
    return 1.0 - (1.0 - p) ** upsilon


def toy_table(rates, upsilons, eps0, max_stages=3) -> PeTable:
    seqs = [s for n in range(1, max_stages + 1) for s in itertools.product(rates, repeat=n)]
    return PeTable.from_function(toy_pe, seqs, upsilons, [eps0])

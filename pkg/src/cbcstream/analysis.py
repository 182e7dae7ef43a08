"""Exact distortion statistics of a policy under independent chunk failures.

With perfect error detection and independent chunk failures, the receiver
stops at the first failed chunk. Level ``(j, i)`` means ``i`` chunks of stage
``j`` arrived after all of stages ``1..j-1``; ``j = M + 1, i = 0`` is the
everything-received outcome.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .codes.pe import PeTable
from .errors import IndexOutOfRange, InputError, TooManyChunks
from .framing import ChunkPlan, Policy
from .rdmodel import RdCurve, eval_curve

BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True)
class Level:
    j: int
    i: int
    rate: float
    distortion: float
    prob: float


@dataclass
class MomentReport:
    mean: float
    second_moment: float
    variance: float
    levels: list[Level]
    moments: dict[int, float] = field(default_factory=dict)

    @property
    def std(self) -> float:
        return math.sqrt(max(self.variance, 0.0))

    @property
    def total_prob(self) -> float:
        return math.fsum(lv.prob for lv in self.levels)

    def central_moment(self, n: int) -> float:
        return math.fsum((lv.distortion - self.mean) ** n * lv.prob for lv in self.levels)

    def to_json(self) -> dict:
        return {
            "mean": self.mean,
            "second_moment": self.second_moment,
            "variance": self.variance,
            "std": self.std,
            "moments": {str(n): v for n, v in sorted(self.moments.items())},
            "levels": [
                {"j": lv.j, "i": lv.i, "rate": lv.rate, "distortion": lv.distortion, "prob": lv.prob}
                for lv in self.levels
            ],
        }

    @classmethod
    def from_json(cls, d: dict, tol: float = 1e-9) -> "MomentReport":
        levels = [Level(int(x["j"]), int(x["i"]), float(x["rate"]), float(x["distortion"]), float(x["prob"]))
                  for x in d["levels"]]
        report = cls(float(d["mean"]), float(d["second_moment"]), float(d["variance"]), levels,
                     {int(n): float(v) for n, v in d.get("moments", {}).items()})
        if abs(report.total_prob - 1.0) > tol:
            raise InputError(f"level probabilities sum to {report.total_prob!r}, not 1")
        return report

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("j,i,rate,distortion,prob\n")
        for lv in self.levels:
            buf.write(f"{lv.j},{lv.i},{lv.rate:.17g},{lv.distortion:.17g},{lv.prob:.17g}\n")
        return buf.getvalue()


def _check_level(j: int, i: int, plan: ChunkPlan) -> None:
    M = plan.n_stages
    if not 1 <= j <= M + 1:
        raise IndexOutOfRange(f"stage j={j} outside 1..{M + 1}")
    m_j = 1 if j == M + 1 else plan.m[j - 1]
    if not 0 <= i < m_j:
        raise IndexOutOfRange(f"chunk index i={i} outside 0..{m_j - 1}")


def level_chunks(j: int, i: int, plan: ChunkPlan) -> int:
    """Number of chunks decoded at level (j, i)."""
    _check_level(j, i, plan)
    return sum(plan.m[: j - 1]) + i


def level_rate(j: int, i: int, plan: ChunkPlan) -> float:
    return level_chunks(j, i, plan) * plan.k / plan.n_s


def _level_probs(stage_pe: Sequence[float], m: Sequence[int]) -> list[tuple[int, int, float]]:
    """[(j, i, prob)] for all levels, in truncation order.

    Every factor lies in [0, 1], so running products never underflow before
    the final probability itself does; no log-space path is needed.
    """
    pes = list(stage_pe) + [1.0]
    ms = list(m) + [1]
    out = []
    survive = 1.0  # prod_{s<j} (1 - P_s)^{m_s}
    for j, (p, m_j) in enumerate(zip(pes, ms), start=1):
        for i in range(m_j):
            out.append((j, i, p * (1.0 - p) ** i * survive))
        survive *= (1.0 - p) ** m_j
    return out


def level_prob(j: int, i: int, policy: Policy, pe_table: PeTable, eps0: float | None = None) -> float:
    """P(decoding stops at level (j, i)) = P_j (1-P_j)^i prod_{s<j} (1-P_s)^{m_s}, with P_{M+1} = 1."""
    plan = policy.plan
    _check_level(j, i, plan)
    stage_pe = pe_table.stage_probs(policy.codes, plan.upsilon, eps0)
    for jj, ii, prob in _level_probs(stage_pe, plan.m):
        if (jj, ii) == (j, i):
            return prob
    raise AssertionError("unreachable")


def moments_from_stage_pe(plan: ChunkPlan, stage_pe: Sequence[float], curve: RdCurve, n: int = 2) -> MomentReport:
    if n < 1:
        raise InputError("moment order must be >= 1")
    if len(stage_pe) != plan.n_stages:
        raise InputError("need one P_e per stage")
    if any(not 0.0 <= p <= 1.0 for p in stage_pe):
        raise InputError("P_e values must lie in [0, 1]")
    triples = _level_probs(stage_pe, plan.m)
    counts = np.cumsum([0] + [1] * (len(triples) - 1))
    rates = counts * plan.k / plan.n_s
    dists = np.atleast_1d(eval_curve(curve, rates))
    probs = [p for _, _, p in triples]
    levels = [Level(j, i, float(r), float(d), p) for (j, i, p), r, d in zip(triples, rates, dists)]
    orders = range(1, max(n, 2) + 1)
    moments = {q: math.fsum(float(d) ** q * p for d, p in zip(dists, probs)) for q in orders}
    mean = moments[1]
    variance = math.fsum((float(d) - mean) ** 2 * p for d, p in zip(dists, probs))
    return MomentReport(mean, moments[2], variance, levels, {q: moments[q] for q in range(1, n + 1)})


def moment(policy: Policy, pe_table: PeTable, curve: RdCurve, n: int = 2,
           eps0: float | None = None) -> MomentReport:
    """Moments 1..n of the received distortion, with the full level table.

    ``variance`` is the central second moment; it equals
    ``second_moment - mean**2`` up to rounding.
    """
    plan = policy.plan
    stage_pe = pe_table.stage_probs(policy.codes, plan.upsilon, eps0)
    return moments_from_stage_pe(plan, stage_pe, curve, n)


def brute_force_moment(policy: Policy, pe_table: PeTable, curve: RdCurve, n: int = 2,
                       eps0: float | None = None) -> MomentReport:
    """Enumerate every per-chunk failure pattern; an independent check on :func:`moment`."""
    plan = policy.plan
    total = plan.total_chunks
    if total > BRUTE_FORCE_LIMIT:
        raise TooManyChunks(f"{total} chunks exceeds the enumeration limit of {BRUTE_FORCE_LIMIT}")
    stage_pe = np.array(pe_table.stage_probs(policy.codes, plan.upsilon, eps0))
    chunk_pe = stage_pe[plan.stage_of_chunk()]
    patterns = ((np.arange(2**total)[:, None] >> np.arange(total)) & 1).astype(bool)  # True = failed
    weights = np.where(patterns, chunk_pe, 1.0 - chunk_pe).prod(axis=1)
    decoded = np.where(patterns.any(axis=1), patterns.argmax(axis=1), total)
    prob_by_count = np.bincount(decoded, weights=weights, minlength=total + 1)
    dist = np.atleast_1d(eval_curve(curve, np.arange(total + 1) * plan.k / plan.n_s))
    moments = {q: math.fsum(dist ** q * prob_by_count) for q in range(1, max(n, 2) + 1)}
    mean = moments[1]
    variance = math.fsum((dist - mean) ** 2 * prob_by_count)
    # report levels with (j, i) labels recovered from the decoded count
    levels = []
    bounds = np.cumsum((0,) + plan.m)
    for count in range(total + 1):
        j = int(np.searchsorted(bounds, count, side="right"))
        i = count - int(bounds[j - 1])
        levels.append(Level(j, i, count * plan.k / plan.n_s, float(dist[count]), float(prob_by_count[count])))
    return MomentReport(mean, moments[2], variance, levels, {q: moments[q] for q in range(1, n + 1)})


def central_fourth_moment(report: MomentReport) -> float:
    return report.central_moment(4)

"""Monte Carlo distortion experiments, bit-true or with idealized chunk failures."""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .channel import STREAM_BLOCK, STREAM_SOURCE, BscChannel, trial_rng
from .codes.codeset import CodeSet, IdealCode, format_rate
from .codes.crc import DEFAULT_CRC, CrcSpec
from .codes.pe import PeTable
from .errors import InputError, UnrealizableCode
from .framing import Policy, encode_stream, label_chunks, peel
from .rdmodel import RdCurve, eval_curve

Mode = Literal["end_to_end", "idealized"]

# idealized trials are drawn in fixed-size blocks; block b owns trials [b*B, (b+1)*B)
BLOCK = 4096


@dataclass(frozen=True)
class TrialConfig:
    policy: Policy
    curve: RdCurve
    channel: BscChannel
    trials: int
    mode: Mode = "idealized"
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if self.mode not in ("end_to_end", "idealized"):
            raise InputError(f"unknown mode {self.mode!r}")


@dataclass
class EmpiricalReport:
    mode: str
    trials: int
    mean: float
    variance: float
    sem: float
    var_stderr: float
    histogram: list[int]
    undetected: int = 0
    failed_chunks: int = 0
    chunk_transmissions: int = 0
    decoded: np.ndarray | None = field(default=None, repr=False)
    distortion: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        out = {
            "mode": self.mode,
            "trials": self.trials,
            "mean": self.mean,
            "variance": self.variance,
            "std": math.sqrt(self.variance),
            "sem": self.sem,
            "var_stderr": self.var_stderr,
            "histogram": self.histogram,
        }
        if self.mode == "end_to_end":
            out.update(undetected=self.undetected, failed_chunks=self.failed_chunks,
                       chunk_transmissions=self.chunk_transmissions)
        return out

    def trials_csv(self) -> str:
        if self.decoded is None:
            raise InputError("per-trial data was not kept")
        buf = io.StringIO()
        buf.write("trial,decoded_chunks,distortion\n")
        for t, (n, d) in enumerate(zip(self.decoded.tolist(), self.distortion.tolist())):
            buf.write(f"{t},{n},{d:.17g}\n")
        return buf.getvalue()


def summarize(decoded: np.ndarray, distortion: np.ndarray, total_chunks: int, mode: str, **extra) -> EmpiricalReport:
    """Aggregate per-trial results; every statistic is a function of the arrays alone."""
    n = distortion.size
    mean = float(np.mean(distortion))
    if distortion.min() == distortion.max():
        # constant samples: report the value itself, not a rounded mean with residual spread
        mean = float(distortion[0])
        variance = sem = var_stderr = 0.0
    elif n > 1:
        dev = distortion - mean
        variance = float(np.sum(dev**2) / (n - 1))
        m4 = float(np.mean(dev**4))
        s4 = variance**2
        var_stderr = math.sqrt(max(m4 - s4 * (n - 3) / (n - 1), 0.0) / n)
        sem = math.sqrt(variance / n)
    else:
        variance = sem = var_stderr = 0.0
    hist = np.bincount(decoded, minlength=total_chunks + 1).tolist()
    return EmpiricalReport(mode, n, mean, variance, sem, var_stderr, hist,
                           decoded=decoded, distortion=distortion, **extra)


def _idealized_block(b, trials, chunk_pe, seed):
    lo = b * BLOCK
    size = min(BLOCK, trials - lo)
    u = trial_rng(seed, b, STREAM_BLOCK).random((size, chunk_pe.size))
    failed = u < chunk_pe
    return np.where(failed.any(axis=1), failed.argmax(axis=1), chunk_pe.size)


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _run_idealized(config: TrialConfig, pe_table: PeTable, workers: int) -> EmpiricalReport:
    policy = config.policy
    plan = policy.plan
    stage_pe = np.array(pe_table.stage_probs(policy.codes, plan.upsilon, config.channel.eps0))
    chunk_pe = stage_pe[plan.stage_of_chunk()]
    n_blocks = -(-config.trials // BLOCK)
    parts = _map(lambda b: _idealized_block(b, config.trials, chunk_pe, config.seed), range(n_blocks), workers)
    decoded = np.concatenate(parts).astype(np.int64)
    dist = np.asarray(eval_curve(config.curve, decoded * plan.k / plan.n_s), dtype=float)
    return summarize(decoded, dist, plan.total_chunks, "idealized")


def check_realizable(policy: Policy, code_set: CodeSet) -> None:
    for r in policy.codes:
        code = code_set[r]
        if isinstance(code, IdealCode) and not code.passthrough:
            raise UnrealizableCode(
                f"rate {format_rate(r)} is table-only (ideal); only conv codes and rate-1 passthrough "
                "can run end to end")


def _e2e_trial(t, config: TrialConfig, code_set: CodeSet, crc: CrcSpec):
    policy = config.policy
    plan = policy.plan
    source = trial_rng(config.seed, t, STREAM_SOURCE).integers(0, 2, plan.source_bits, dtype=np.uint8)
    sent = encode_stream(source, policy, code_set, crc)
    received = config.channel.transmit(sent, t)
    chunks = peel(received, policy, code_set)
    labels = np.array(label_chunks(chunks, crc))
    k = plan.k
    wrong = np.array([not np.array_equal(c[:k], source[i * k:(i + 1) * k]) for i, c in enumerate(chunks)])
    undetected = labels & wrong
    stop = ~labels | undetected
    decoded = int(stop.argmax()) if stop.any() else plan.total_chunks
    return decoded, int(undetected.sum()), int((~labels).sum())


def _run_end_to_end(config: TrialConfig, code_set: CodeSet, crc: CrcSpec, workers: int) -> EmpiricalReport:
    policy = config.policy
    plan = policy.plan
    check_realizable(policy, code_set)
    results = _map(lambda t: _e2e_trial(t, config, code_set, crc), range(config.trials), workers)
    decoded = np.array([r[0] for r in results], dtype=np.int64)
    undetected = sum(r[1] for r in results)
    failed = sum(r[2] for r in results)
    dist = np.asarray(eval_curve(config.curve, decoded * plan.k / plan.n_s), dtype=float)
    return summarize(decoded, dist, plan.total_chunks, "end_to_end", undetected=undetected,
                     failed_chunks=failed, chunk_transmissions=plan.total_chunks * config.trials)


def run(config: TrialConfig, pe_table: PeTable | None = None, code_set: CodeSet | None = None,
        crc: CrcSpec = DEFAULT_CRC, workers: int = 1) -> EmpiricalReport:
    """Run ``config.trials`` independent transmissions and aggregate the distortions.

    ``end_to_end`` encodes a pseudorandom source through the real codec and
    channel. A chunk that passes its CRC with wrong bits is counted as
    undetected and the trial is truncated there, as perfect detection would.
    ``idealized`` draws each chunk's failure from its stage P_e.
    """
    if config.mode == "idealized":
        if pe_table is None:
            raise InputError("idealized mode needs a P_e table")
        return _run_idealized(config, pe_table, workers)
    if code_set is None:
        raise InputError("end_to_end mode needs the code set")
    return _run_end_to_end(config, code_set, crc, workers)


@dataclass
class GapReport:
    end_to_end: EmpiricalReport
    idealized: EmpiricalReport
    mean_gap: float
    mean_gap_se: float
    variance_gap: float
    variance_gap_se: float

    def to_json(self) -> dict:
        return {
            "mean_gap": self.mean_gap,
            "mean_gap_se": self.mean_gap_se,
            "variance_gap": self.variance_gap,
            "variance_gap_se": self.variance_gap_se,
            "end_to_end": self.end_to_end.to_json(),
            "idealized": self.idealized.to_json(),
        }


def independence_gap(policy: Policy, channel: BscChannel, trials: int, pe_table: PeTable, curve: RdCurve,
                    code_set: CodeSet, seed: int = 0, crc: CrcSpec = DEFAULT_CRC,
                    workers: int = 1) -> GapReport:
    """How far bit-true results sit from the independent-failure model, with standard errors."""
    e2e = run(TrialConfig(policy, curve, channel, trials, "end_to_end", seed), code_set=code_set, crc=crc,
              workers=workers)
    ideal = run(TrialConfig(policy, curve, channel, trials, "idealized", seed), pe_table=pe_table,
                workers=workers)
    return GapReport(
        e2e, ideal,
        e2e.mean - ideal.mean, math.hypot(e2e.sem, ideal.sem),
        e2e.variance - ideal.variance, math.hypot(e2e.var_stderr, ideal.var_stderr),
    )

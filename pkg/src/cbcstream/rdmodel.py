"""Operational rate-distortion curves D(R)."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import InputError, MissingZeroRate, NegativeRate, NegativeValue, NotMonotone

Interpolation = Literal["linear", "step"]


@dataclass(frozen=True)
class RdCurve:
    """Sampled distortion (MSE) versus source rate (bits/sample).

    The curve must start at rate 0: decoding nothing is a reachable outcome
    and its distortion is never extrapolated.
    """

    rates: tuple[float, ...]
    distortions: tuple[float, ...]
    interpolation: Interpolation = "linear"
    _r: np.ndarray = field(init=False, repr=False, compare=False)
    _d: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        dists = tuple(float(d) for d in self.distortions)
        if len(rates) != len(dists) or not rates:
            raise InputError("rates and distortions must be non-empty and of equal length")
        if self.interpolation not in ("linear", "step"):
            raise InputError(f"unknown interpolation {self.interpolation!r}")
        if any(not math.isfinite(v) for v in rates + dists):
            raise NegativeValue("rates and distortions must be finite")
        if any(v < 0 for v in rates + dists):
            raise NegativeValue("rates and distortions must be >= 0")
        if rates[0] != 0.0:
            raise MissingZeroRate("curve must contain a rate-0 point")
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise InputError("rates must be strictly increasing")
        if any(b > a for a, b in zip(dists, dists[1:])):
            raise NotMonotone("distortion increases with rate")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "distortions", dists)
        r = np.array(rates)
        d = np.array(dists)
        r.flags.writeable = False
        d.flags.writeable = False
        object.__setattr__(self, "_r", r)
        object.__setattr__(self, "_d", d)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.rates, self.distortions))

    def __call__(self, rate):
        return eval_curve(self, rate)

    def with_interpolation(self, interpolation: Interpolation) -> "RdCurve":
        return RdCurve(self.rates, self.distortions, interpolation)


def load_rd_curve(rows: Iterable[Sequence[float]], interpolation: Interpolation = "linear") -> RdCurve:
    """Build a validated curve from ``(rate, distortion)`` rows (sorted here)."""
    rows = [(float(r), float(d)) for r, d in rows]
    if not rows:
        raise MissingZeroRate("empty curve")
    if any(r < 0 or d < 0 for r, d in rows):
        raise NegativeValue("rates and distortions must be >= 0")
    rows.sort(key=lambda p: p[0])
    if rows[0][0] != 0.0:
        raise MissingZeroRate("curve must contain a rate-0 point")
    return RdCurve(tuple(r for r, _ in rows), tuple(d for _, d in rows), interpolation)


def eval_curve(curve: RdCurve, rate):
    """D(rate). Accepts a scalar or an array; rates past the last sample clamp."""
    x = np.asarray(rate, dtype=float)
    if np.any(x < 0):
        raise NegativeRate(f"rate must be >= 0, got {rate!r}")
    if curve.interpolation == "linear":
        out = np.interp(x, curve._r, curve._d)
    else:
        idx = np.searchsorted(curve._r, x, side="right") - 1
        out = curve._d[idx]
    if out.ndim == 0:
        return float(out)
    return out


def parametric_exponential(variance: float, max_rate: float, n_points: int,
                           interpolation: Interpolation = "linear") -> RdCurve:
    """Samples of D(R) = variance * 2**(-2R) on an even grid over [0, max_rate]."""
    if variance <= 0 or max_rate <= 0 or n_points < 2:
        raise InputError("need variance > 0, max_rate > 0, n_points >= 2")
    rates = np.linspace(0.0, max_rate, n_points)
    dists = variance * np.exp2(-2.0 * rates)
    return RdCurve(tuple(rates.tolist()), tuple(dists.tolist()), interpolation)


def psnr(mse, peak: float = 255.0):
    """PSNR in dB for 8-bit sources; reporting only."""
    mse = np.asarray(mse, dtype=float)
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(peak**2 / mse)
    return float(out) if out.ndim == 0 else out


def read_rd_csv(path, interpolation: Interpolation = "linear") -> RdCurve:
    """Read a ``rate,distortion`` CSV file."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["rate", "distortion"]:
            raise InputError(f"{path}: expected header 'rate,distortion'")
        rows = [(float(row["rate"]), float(row["distortion"])) for row in reader]
    return load_rd_curve(rows, interpolation)


def write_rd_csv(curve: RdCurve, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        fh.write("rate,distortion\n")
        for r, d in curve.points:
            fh.write(f"{r:.17g},{d:.17g}\n")

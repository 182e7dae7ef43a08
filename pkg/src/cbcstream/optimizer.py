"""Constrained exhaustive search over chunked concatenated coding policies.

Three problems are solved over the same candidate stream:

* P1: minimise the mean distortion under the transmission budget.
* P2: minimise the distortion variance subject to mean <= gamma_d.
* P3: minimise the second moment among candidates whose mean is within
  zeta of gamma_d (zeta = inf drops the mean constraint).

Every solver scans the full candidate list and reduces with a total order
(objective, secondary objective, lexicographic position), so the winner does
not depend on evaluation order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .analysis import MomentReport, moments_from_stage_pe
from .codes.codeset import CodeSet, format_rate, parse_rate
from .codes.pe import PeTable
from .errors import CapExceeded, Infeasible, InputError, NoFeasiblePolicy, ZeroBaselineStdDev
from .framing import BudgetMode, Policy, plan_from_budget, transmission_rate
from .rdmodel import RdCurve, psnr


@dataclass(frozen=True)
class SearchSpace:
    m_range: tuple[int, ...]
    upsilon_grid: tuple[int, ...]
    rates: tuple[Fraction, ...]
    budget: float
    n_r: int
    n_s: int
    budget_mode: BudgetMode = "idealized"
    max_total_chunks: int | None = None
    max_candidates: int = 1_000_000
    eps0: float | None = None
    interleaver_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "m_range", tuple(sorted({int(v) for v in self.m_range})))
        object.__setattr__(self, "upsilon_grid", tuple(sorted({int(v) for v in self.upsilon_grid})))
        object.__setattr__(self, "rates", tuple(sorted({parse_rate(r) for r in self.rates})))
        if not self.m_range or self.m_range[0] < 1:
            raise InputError("M range must contain positive stage counts")
        if not self.upsilon_grid or any(u <= self.n_r for u in self.upsilon_grid):
            raise InputError("every chunk size must exceed n_r")
        if not self.rates:
            raise InputError("empty code-rate set")
        if not self.budget > 0:
            raise InputError("budget must be positive")
        if not (math.isfinite(self.max_candidates) and self.max_candidates >= 1):
            raise InputError("max_candidates must be a finite positive number")
        if self.budget_mode not in ("idealized", "exact"):
            raise InputError(f"unknown budget mode {self.budget_mode!r}")

    def to_json(self) -> dict:
        return {
            "M_range": list(self.m_range),
            "upsilon_grid": list(self.upsilon_grid),
            "rates": [format_rate(r) for r in self.rates],
            "B": self.budget,
            "N_r": self.n_r,
            "N_s": self.n_s,
            "budget_mode": self.budget_mode,
            "caps": {"max_total_chunks": self.max_total_chunks, "max_candidates": self.max_candidates},
            "eps0": self.eps0,
            "interleaver_seed": self.interleaver_seed,
        }

    @classmethod
    def from_json(cls, d: dict, code_set: CodeSet | None = None) -> "SearchSpace":
        caps = d.get("caps") or {}
        rates = d.get("rates")
        if rates is None:
            if code_set is None:
                raise InputError("search space lists no rates and no code set was given")
            rates = code_set.rates
        try:
            return cls(
                m_range=tuple(d["M_range"]),
                upsilon_grid=tuple(d["upsilon_grid"]),
                rates=tuple(rates),
                budget=float(d["B"]),
                n_r=int(d["N_r"]),
                n_s=int(d["N_s"]),
                budget_mode=d.get("budget_mode", "idealized"),
                max_total_chunks=caps.get("max_total_chunks"),
                max_candidates=int(caps.get("max_candidates", 1_000_000)),
                eps0=d.get("eps0"),
                interleaver_seed=int(d.get("interleaver_seed", 0)),
            )
        except KeyError as exc:
            raise InputError(f"search space is missing field {exc.args[0]!r}") from None


@dataclass
class Candidate:
    index: int
    policy: Policy
    report: MomentReport


@dataclass
class Solution:
    problem: str
    policy: Policy
    report: MomentReport
    objective: float
    r_tr: float
    budget: float
    eps0: float | None = None
    d_star: float | None = None
    gamma_d: float | None = None
    zeta: float | None = None
    n_candidates: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float | None:
        """Achieved |mean - gamma_d| (None for P1)."""
        if self.gamma_d is None:
            return None
        return abs(self.report.mean - self.gamma_d)

    def to_json(self) -> dict:
        return {
            "problem": self.problem,
            "objective": self.objective,
            "r_tr": self.r_tr,
            "B": self.budget,
            "eps0": self.eps0,
            "d_star": self.d_star,
            "gamma_d": self.gamma_d,
            "zeta": _finite_or_str(self.zeta),
            "margin": self.margin,
            "n_candidates": self.n_candidates,
            "levels": self.policy.plan.levels,
            "policy": self.policy.to_json(),
            "report": self.report.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Solution":
        try:
            zeta = d.get("zeta")
            return cls(
                problem=d["problem"],
                policy=Policy.from_json(d["policy"]),
                report=MomentReport.from_json(d["report"]),
                objective=float(d["objective"]),
                r_tr=float(d["r_tr"]),
                budget=float(d["B"]),
                eps0=d.get("eps0"),
                d_star=d.get("d_star"),
                gamma_d=d.get("gamma_d"),
                zeta=None if zeta is None else float(zeta),
                n_candidates=int(d.get("n_candidates", 0)),
            )
        except KeyError as exc:
            raise InputError(f"solution is missing field {exc.args[0]!r}") from None


def _finite_or_str(x):
    if x is None or math.isfinite(x):
        return x
    return "inf" if x > 0 else "-inf"


def _policies(space: SearchSpace, code_set: CodeSet | None) -> list[Policy]:
    out: list[Policy] = []
    for M in space.m_range:
        for upsilon in space.upsilon_grid:
            for codes in itertools.product(space.rates, repeat=M):
                try:
                    plans = plan_from_budget(M, upsilon, space.n_r, space.n_s, codes, space.budget,
                                             space.budget_mode, code_set, space.max_total_chunks)
                except Infeasible:
                    continue
                if len(out) + len(plans) > space.max_candidates:
                    raise CapExceeded(
                        f"search space exceeds max_candidates={space.max_candidates}; "
                        "raise the cap or shrink the space")
                out.extend(Policy(p, codes, space.interleaver_seed, space.budget_mode) for p in plans)
    return out


def enumerate_candidates(space: SearchSpace, pe_table: PeTable, curve: RdCurve,
                         code_set: CodeSet | None = None, n: int = 2) -> Iterator[Candidate]:
    """Every budget-feasible candidate, ordered by (M, upsilon, codes, m).

    The full policy list is built before anything is yielded, so an oversized
    space fails with ``CapExceeded`` up front instead of being truncated.
    """
    policies = _policies(space, code_set)
    stage_cache: dict[tuple, list[float]] = {}
    for idx, policy in enumerate(policies):
        key = (policy.codes, policy.plan.upsilon)
        if key not in stage_cache:
            stage_cache[key] = pe_table.stage_probs(policy.codes, policy.plan.upsilon, space.eps0)
        yield Candidate(idx, policy, moments_from_stage_pe(policy.plan, stage_cache[key], curve, n))


def _candidates(space, pe_table, curve, code_set, candidates):
    if candidates is not None:
        return list(candidates)
    return list(enumerate_candidates(space, pe_table, curve, code_set))


def _solution(problem, cand, objective, space, code_set, n_candidates, **kw) -> Solution:
    r_tr = float(transmission_rate(cand.policy, code_set, space.budget_mode))
    return Solution(problem, cand.policy, cand.report, objective, r_tr, space.budget, space.eps0,
                    n_candidates=n_candidates, **kw)


def solve_p1(space: SearchSpace, pe_table: PeTable, curve: RdCurve, code_set: CodeSet | None = None,
             candidates: Sequence[Candidate] | None = None) -> Solution:
    """Minimum mean distortion; ties go to smaller variance, then earlier policy."""
    cands = _candidates(space, pe_table, curve, code_set, candidates)
    if not cands:
        raise NoFeasiblePolicy("no policy fits the transmission budget")
    best = min(cands, key=lambda c: (c.report.mean, c.report.variance, c.index))
    return _solution("P1", best, best.report.mean, space, code_set, len(cands), d_star=best.report.mean)


def solve_p2(space: SearchSpace, pe_table: PeTable, curve: RdCurve, gamma_d: float,
             code_set: CodeSet | None = None, candidates: Sequence[Candidate] | None = None) -> Solution:
    """Minimum variance subject to mean <= gamma_d."""
    cands = _candidates(space, pe_table, curve, code_set, candidates)
    if not cands:
        raise NoFeasiblePolicy("no policy fits the transmission budget")
    d_star = min(c.report.mean for c in cands)
    feasible = [c for c in cands if c.report.mean <= gamma_d]
    if not feasible:
        raise NoFeasiblePolicy(
            f"mean-distortion constraint is binding: gamma_d={gamma_d!r} < d*={d_star!r}")
    best = min(feasible, key=lambda c: (c.report.variance, c.report.mean, c.index))
    return _solution("P2", best, best.report.variance, space, code_set, len(cands),
                     d_star=d_star, gamma_d=gamma_d)


def solve_p3(space: SearchSpace, pe_table: PeTable, curve: RdCurve, gamma_d: float, zeta: float = math.inf,
             code_set: CodeSet | None = None, candidates: Sequence[Candidate] | None = None) -> Solution:
    """Minimum second moment among candidates with |mean - gamma_d| <= zeta."""
    cands = _candidates(space, pe_table, curve, code_set, candidates)
    if not cands:
        raise NoFeasiblePolicy("no policy fits the transmission budget")
    if zeta < 0:
        raise InputError("zeta must be >= 0")
    d_star = min(c.report.mean for c in cands)
    feasible = [c for c in cands if abs(c.report.mean - gamma_d) <= zeta]
    if not feasible:
        closest = min(abs(c.report.mean - gamma_d) for c in cands)
        raise NoFeasiblePolicy(
            f"no candidate mean within zeta={zeta!r} of gamma_d={gamma_d!r} (closest is {closest!r} away)")
    best = min(feasible, key=lambda c: (c.report.second_moment, c.report.variance, c.index))
    return _solution("P3", best, best.report.second_moment, space, code_set, len(cands),
                     d_star=d_star, gamma_d=gamma_d, zeta=zeta)


def validate_solution(solution: Solution, code_set: CodeSet | None = None, tol: float = 1e-12) -> list[str]:
    """Re-check a solution's constraints from scratch; returns the violations found."""
    problems = []
    r_tr = transmission_rate(solution.policy, code_set, solution.policy.budget_mode)
    if r_tr > Fraction(solution.budget):
        problems.append(f"r_tr={float(r_tr)!r} exceeds B={solution.budget!r}")
    rep = solution.report
    if abs(rep.total_prob - 1.0) > tol:
        problems.append(f"level probabilities sum to {rep.total_prob!r}")
    if rep.variance < -tol:
        problems.append(f"negative variance {rep.variance!r}")
    if solution.problem == "P2" and not rep.mean <= solution.gamma_d:
        problems.append(f"mean {rep.mean!r} exceeds gamma_d={solution.gamma_d!r}")
    if solution.problem == "P3" and not abs(rep.mean - solution.gamma_d) <= solution.zeta:
        problems.append(f"mean {rep.mean!r} outside zeta={solution.zeta!r} of gamma_d={solution.gamma_d!r}")
    return problems


def percentage_decrease(baseline: float, candidate: float) -> float:
    """100 * (baseline - candidate) / baseline."""
    if baseline == 0:
        raise ZeroBaselineStdDev("percentage decrease is undefined for a zero baseline")
    return 100.0 * (baseline - candidate) / baseline


@dataclass
class Comparison:
    rows: list[dict]
    std_decrease_pct: float | None
    variance_decrease_pct: float | None

    CSV_FIELDS = ("scheme", "r_tr", "eps0", "mean", "psnr_db", "std_dev", "variance",
                  "std_decrease_pct", "variance_decrease_pct")

    def to_csv(self) -> str:
        lines = [",".join(self.CSV_FIELDS)]
        for row in self.rows:
            lines.append(",".join(_csv_cell(row.get(f)) for f in self.CSV_FIELDS))
        return "\n".join(lines) + "\n"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _pct_or_none(base, cand):
    try:
        return percentage_decrease(base, cand)
    except ZeroBaselineStdDev:
        return None


def compare(baseline: Solution, candidate: Solution, names=("baseline", "candidate")) -> Comparison:
    """Side-by-side statistics and the percentage decrease in spread of ``candidate``.

    A zero baseline spread leaves the percentages as ``None`` (rendered
    ``undefined`` in CSV).
    """
    std_pct = _pct_or_none(baseline.report.std, candidate.report.std)
    var_pct = _pct_or_none(baseline.report.variance, candidate.report.variance)
    rows = []
    for name, sol in zip(names, (baseline, candidate)):
        rows.append({
            "scheme": name,
            "r_tr": sol.r_tr,
            "eps0": sol.eps0,
            "mean": sol.report.mean,
            "psnr_db": psnr(sol.report.mean) if sol.report.mean > 0 else math.inf,
            "std_dev": sol.report.std,
            "variance": sol.report.variance,
        })
    rows[1]["std_decrease_pct"] = "undefined" if std_pct is None else std_pct
    rows[1]["variance_decrease_pct"] = "undefined" if var_pct is None else var_pct
    return Comparison(rows, std_pct, var_pct)

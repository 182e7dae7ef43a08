"""
Trading a little mean distortion for a lot less variance
========================================================

P1 finds the smallest mean distortion d*. P3 then looks among policies
whose mean stays within zeta of d* and keeps the one with the smallest
second moment, which can only lower the variance. The failure
probabilities come from a simple analytic stand-in so the search runs
instantly.
"""
import itertools
from fractions import Fraction

from cbcstream.codes import PeTable
from cbcstream.optimizer import SearchSpace, compare, enumerate_candidates, solve_p1, solve_p3
from cbcstream.rdmodel import parametric_exponential


def toy_pe(rates, upsilon, eps0):
    # residual bit error shrinks through each nested code: p -> (4p)^(1/r) / 4
    p = eps0
    for r in reversed(rates):
        p = min(p, (4 * p) ** (1 / float(r)) / 4)
    return 1 - (1 - p) ** upsilon


rates = (Fraction(1, 2), Fraction(2, 3))
seqs = [s for n in (1, 2) for s in itertools.product(rates, repeat=n)]
table = PeTable.from_function(toy_pe, seqs, [40], [0.05])
curve = parametric_exponential(100.0, 2.0, 400)
space = SearchSpace((2,), (40,), rates, 0.5, 16, 2048, max_total_chunks=40, eps0=0.05)

cands = list(enumerate_candidates(space, table, curve))
p1 = solve_p1(space, table, curve, candidates=cands)
p3 = solve_p3(space, table, curve, p1.d_star, 0.01 * p1.d_star, candidates=cands)
print(f"{len(cands)} candidates")
for name, sol in (("P1", p1), ("P3", p3)):
    pol = sol.policy
    print(f"  {name}: m={pol.plan.m} codes={[str(c) for c in pol.codes]} "
          f"mean={sol.report.mean:.3f} var={sol.report.variance:.3f}")
print(compare(p1, p3, ("min-mean", "min-second-moment")).to_csv())

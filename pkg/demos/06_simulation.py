"""
Monte Carlo check of the analysis
=================================

The idealized simulator draws chunk failures independently from the P_e
table, so its mean must agree with the closed form. The bit-true simulator
runs the real encoder, channel and Viterbi decoder. Its distance from the
idealized run shows how far decoder error bursts break independence.
"""
from cbcstream.analysis import moment
from cbcstream.channel import BscChannel
from cbcstream.codes import PeTable, default_rcpc, estimate_pe
from cbcstream.framing import ChunkPlan, Policy
from cbcstream.rdmodel import parametric_exponential
from cbcstream.sim import TrialConfig, independence_gap, run

eps0 = 0.03
codes = default_rcpc(["1/2", "4/5"])
policy = Policy(ChunkPlan((2, 2), 120, 16, 1024), ("1/2", "4/5"), interleaver_seed=7)
curve = parametric_exponential(100.0, 1.0, 128)

table = PeTable()
for seq in (("1/2", "4/5"), ("4/5",)):
    table.add(seq, 120, eps0, estimate_pe(seq, 120, eps0, 300, 0, codes))

exact = moment(policy, table, curve)
ideal = run(TrialConfig(policy, curve, BscChannel(eps0), 100_000, seed=1), pe_table=table)
print(f"closed form mean {exact.mean:.4f}  idealized MC {ideal.mean:.4f} +- {ideal.sem:.4f}")

gap = independence_gap(policy, BscChannel(eps0), 300, table, curve, codes, seed=2)
print(f"bit-true minus idealized mean: {gap.mean_gap:+.4f} +- {gap.mean_gap_se:.4f}")
print(f"undetected chunk errors in the bit-true run: {gap.end_to_end.undetected}")

import math
from fractions import Fraction

import numpy as np
import pytest
from helpers import random_curve, random_instance

from cbcstream.analysis import moment
from cbcstream.channel import BscChannel
from cbcstream.codes import CodeSet, IdealCode, PeTable, estimate_pe
from cbcstream.errors import InputError, UnrealizableCode
from cbcstream.framing import ChunkPlan, Policy
from cbcstream.rdmodel import load_rd_curve
from cbcstream.sim import TrialConfig, independence_gap, run

PASS = CodeSet([IdealCode(Fraction(1))])
CURVE = load_rd_curve([(0, 100), (0.05, 40), (0.2, 10), (1, 1)])


def uncoded_policy(m=(3, 2), upsilon=48):
    return Policy(ChunkPlan(m, upsilon, 16, 1000), ("1",) * len(m))


def uncoded_table(policy, eps0):
    pe = 1 - (1 - eps0) ** policy.plan.upsilon
    return PeTable({(policy.codes[z:], policy.plan.upsilon, eps0): pe for z in range(policy.plan.n_stages)})


def test_noiseless_end_to_end_has_zero_variance(rcpc):
    pol = Policy(ChunkPlan((2, 3), 60, 16, 1000), ("1/2", "4/5"))
    rep = run(TrialConfig(pol, CURVE, BscChannel(0.0), 25, "end_to_end", seed=3), code_set=rcpc)
    assert rep.variance == 0.0
    assert rep.histogram[-1] == 25
    assert rep.failed_chunks == 0 and rep.undetected == 0
    assert rep.mean == CURVE(5 * 44 / 1000)


def test_idealized_agrees_with_analysis(rng):
    for _ in range(5):
        pol, table = random_instance(rng, eps0=0.05)
        curve = random_curve(rng, max_rate=pol.plan.source_bits / pol.plan.n_s)
        exp = moment(pol, table, curve, 2, eps0=0.05)
        rep = run(TrialConfig(pol, curve, BscChannel(0.05), 20000, seed=int(rng.integers(1 << 30))),
                  pe_table=table)
        assert abs(rep.mean - exp.mean) <= 3 * rep.sem + 1e-9


def test_idealized_blocks_are_reproducible_and_prefix_stable():
    pol = uncoded_policy()
    table = uncoded_table(pol, 0.01)
    cfg = TrialConfig(pol, CURVE, BscChannel(0.01), 9000, seed=11)
    a = run(cfg, pe_table=table)
    b = run(cfg, pe_table=table, workers=4)
    assert np.array_equal(a.decoded, b.decoded) and a.to_json() == b.to_json()
    shorter = run(TrialConfig(pol, CURVE, BscChannel(0.01), 5000, seed=11), pe_table=table)
    assert np.array_equal(shorter.decoded, a.decoded[:5000])


def test_end_to_end_reproducible_across_workers(rcpc):
    pol = Policy(ChunkPlan((2, 2), 60, 16, 1000), ("2/3", "4/5"))
    cfg = TrialConfig(pol, CURVE, BscChannel(0.04), 40, "end_to_end", seed=5)
    a = run(cfg, code_set=rcpc)
    b = run(cfg, code_set=rcpc, workers=3)
    assert a.to_json() == b.to_json()
    assert a.trials_csv() == b.trials_csv()


def test_unrealizable_ideal_code():
    codes = CodeSet([IdealCode(Fraction(1, 2))])
    pol = Policy(ChunkPlan((2,), 40, 16, 100), ("1/2",))
    with pytest.raises(UnrealizableCode):
        run(TrialConfig(pol, CURVE, BscChannel(0.01), 5, "end_to_end"), code_set=codes)


def test_missing_inputs():
    pol = uncoded_policy()
    with pytest.raises(InputError):
        run(TrialConfig(pol, CURVE, BscChannel(0.01), 5))
    with pytest.raises(InputError):
        run(TrialConfig(pol, CURVE, BscChannel(0.01), 5, "end_to_end"))
    with pytest.raises(InputError):
        TrialConfig(pol, CURVE, BscChannel(0.01), 0)


def test_gap_is_zero_without_noise(rcpc):
    pol = Policy(ChunkPlan((1, 2), 60, 16, 1000), ("1/2", "2/3"))
    table = PeTable({(("1/2", "2/3"), 60, 0.0): 0.0, (("2/3",), 60, 0.0): 0.0})
    gap = independence_gap(pol, BscChannel(0.0), 20, table, CURVE, rcpc, seed=1)
    assert gap.mean_gap == 0.0 and gap.variance_gap == 0.0


def test_uncoded_gap_is_statistically_zero():
    # without coding every chunk fails independently, so the bit-true run obeys the model
    pol = uncoded_policy()
    eps0 = 0.004
    gap = independence_gap(pol, BscChannel(eps0), 3000, uncoded_table(pol, eps0), CURVE, PASS, seed=2)
    assert abs(gap.mean_gap) <= 4 * gap.mean_gap_se
    assert abs(gap.variance_gap) <= 4 * gap.variance_gap_se


def test_undetected_errors_are_rare():
    pol = uncoded_policy(m=(4,), upsilon=40)
    rep = run(TrialConfig(pol, CURVE, BscChannel(0.3), 3000, "end_to_end", seed=4), code_set=PASS)
    # almost every chunk is hit; a 16-bit CRC misses about 2^-16 of them
    assert rep.failed_chunks > 2500
    assert rep.undetected <= 5


def test_histogram_and_csv():
    pol = uncoded_policy()
    table = uncoded_table(pol, 0.02)
    rep = run(TrialConfig(pol, CURVE, BscChannel(0.02), 500, seed=8), pe_table=table)
    assert sum(rep.histogram) == 500 and len(rep.histogram) == pol.plan.total_chunks + 1
    lines = rep.trials_csv().splitlines()
    assert lines[0] == "trial,decoded_chunks,distortion" and len(lines) == 501
    assert math.isclose(rep.to_json()["std"] ** 2, rep.variance)


def test_coded_gap_is_reported_with_uncertainty(rcpc):
    # no reference value exists for a real decoder; the gap only has to come with a finite CI
    pol = Policy(ChunkPlan((2, 2), 120, 16, 1000), ("1/2", "4/5"), interleaver_seed=7)
    eps0 = 0.05
    table = PeTable()
    for seq in (("1/2", "4/5"), ("4/5",)):
        table.add(seq, 120, eps0, estimate_pe(seq, 120, eps0, 150, 1, rcpc))
    gap = independence_gap(pol, BscChannel(eps0), 150, table, CURVE, rcpc, seed=3)
    out = gap.to_json()
    assert all(math.isfinite(out[k]) for k in ("mean_gap", "mean_gap_se", "variance_gap", "variance_gap_se"))
    assert out["end_to_end"]["trials"] == out["idealized"]["trials"] == 150


@pytest.mark.slow
def test_undetected_rate_over_a_million_chunks():
    pol = uncoded_policy(m=(20,), upsilon=40)
    rep = run(TrialConfig(pol, CURVE, BscChannel(0.3), 50_000, "end_to_end", seed=12), code_set=PASS)
    assert rep.chunk_transmissions == 1_000_000
    assert rep.undetected <= 2 * 2**-16 * rep.failed_chunks

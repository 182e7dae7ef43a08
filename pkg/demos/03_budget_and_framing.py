"""
Budget-feasible plans and the bit-true frame
============================================

Each extra chunk in an early stage is paid for through every later code,
so the budget is a nested sum. ``plan_from_budget`` lists every chunk
allocation that fits. One of them is then encoded, sent noiselessly and
decoded back.
"""
import numpy as np

from cbcstream.codes import default_rcpc
from cbcstream.framing import (
    Policy, decode_stream, encode_stream, frame_length, idealized_bits, plan_from_budget, transmission_rate,
)

codes = ("4/5", "2/3")
plans = plan_from_budget(2, 2000, 16, 262144, codes, budget=0.505)
print(f"{len(plans)} allocations fit 0.505 bits/sample; largest has {max(p.levels for p in plans)} levels")
print("cost of m=(4, 39):", idealized_bits((4, 39), 2000, codes), "bits")

# a small plan through the real encoder
small = plan_from_budget(2, 120, 16, 4096, codes, budget=0.2)[-1]
policy = Policy(small, codes, interleaver_seed=3, budget_mode="exact")
code_set = default_rcpc(codes)
print("plan", small.m, " r_tr (exact) =", float(transmission_rate(policy, code_set)))

source = np.random.default_rng(2).integers(0, 2, small.source_bits, dtype=np.uint8)
frame = encode_stream(source, policy, code_set)
print("frame length:", frame.size, "==", frame_length(policy, code_set))
outcome = decode_stream(frame, policy, code_set)
print("decoded chunks:", outcome.decoded_chunks, "of", small.total_chunks)
print("labels:", "".join("+" if ok else "x" for ok in outcome.labels))

"""Chunked concatenated block coding for embedded bitstreams.

Computes distortion moments under independent chunk failures and searches
rate allocations exhaustively. Monte Carlo runs over a binary symmetric
channel check the analysis against real decoding.
"""
__version__ = "0.1.0"

from .analysis import MomentReport, brute_force_moment, level_prob, level_rate, moment
from .channel import BscChannel, transmit
from .codes import CodeSet, ConvCodeSpec, CrcSpec, IdealCode, PeTable, default_rcpc, estimate_pe, pe_lookup
from .framing import ChunkPlan, Policy, decode_stream, encode_stream, plan_from_budget, transmission_rate
from .optimizer import SearchSpace, Solution, compare, enumerate_candidates, solve_p1, solve_p2, solve_p3
from .rdmodel import RdCurve, eval_curve, load_rd_curve, parametric_exponential, psnr
from .sim import TrialConfig, independence_gap, run

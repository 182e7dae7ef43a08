import numpy as np
import pytest

from cbcstream.channel import BscChannel, transmit
from cbcstream.errors import InputError


def test_noiseless_identity(rng):
    x = rng.integers(0, 2, 1000, dtype=np.uint8)
    np.testing.assert_array_equal(transmit(x, BscChannel(0.0, 1), 3), x)


def test_half_crossover_flip_fraction():
    n = 10**6
    y = BscChannel(0.5, 11).transmit(np.zeros(n, dtype=np.uint8), 0)
    assert abs(y.mean() - 0.5) <= 3 * 0.0005


@pytest.mark.parametrize("eps0", [0.01, 0.05, 0.1])
def test_flip_rate_within_four_standard_errors(eps0):
    n = 10**6
    y = BscChannel(eps0, 5).transmit(np.zeros(n, dtype=np.uint8), 2)
    se = np.sqrt(eps0 * (1 - eps0) / n)
    assert abs(y.mean() - eps0) <= 4 * se


def test_deterministic_per_trial(rng):
    x = rng.integers(0, 2, 5000, dtype=np.uint8)
    ch = BscChannel(0.1, 42)
    np.testing.assert_array_equal(ch.transmit(x, 7), ch.transmit(x, 7))
    assert not np.array_equal(ch.transmit(x, 7), ch.transmit(x, 8))


def test_common_seed_flips_are_nested():
    lo = BscChannel(0.02, 9).flips(10_000, 4)
    hi = BscChannel(0.08, 9).flips(10_000, 4)
    assert (hi | ~lo).all() and hi.sum() > lo.sum()


def test_crossover_range():
    with pytest.raises(InputError):
        BscChannel(0.6)

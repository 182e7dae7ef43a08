import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cbcstream.errors import MissingZeroRate, NegativeRate, NegativeValue, NotMonotone
from cbcstream.rdmodel import (
    RdCurve, eval_curve, load_rd_curve, parametric_exponential, psnr, read_rd_csv, write_rd_csv,
)


def test_load_valid_curve():
    c = load_rd_curve([(0, 100), (1, 25), (2, 6.25)])
    assert c.points == [(0.0, 100.0), (1.0, 25.0), (2.0, 6.25)]
    assert c.interpolation == "linear"


@pytest.mark.parametrize("rows, exc", [
    ([(0, 10), (1, 20)], NotMonotone),
    ([(0.5, 30)], MissingZeroRate),
    ([], MissingZeroRate),
    ([(0, 10), (1, -1)], NegativeValue),
])
def test_load_rejects(rows, exc):
    with pytest.raises(exc):
        load_rd_curve(rows)


@pytest.mark.parametrize("mode, rate, expected", [
    ("linear", 0, 100),
    ("step", 0, 100),
    ("linear", 0.5, 62.5),
    ("step", 0.5, 100),
    ("linear", 7, 25),
    ("step", 7, 25),
    ("step", 1, 25),
])
def test_eval(mode, rate, expected):
    c = load_rd_curve([(0, 100), (1, 25)], mode)
    assert eval_curve(c, rate) == expected
    assert c(rate) == expected


def test_eval_negative_rate():
    with pytest.raises(NegativeRate):
        eval_curve(load_rd_curve([(0, 1)]), -0.1)


def test_eval_vectorised():
    c = load_rd_curve([(0, 100), (1, 25)])
    np.testing.assert_array_equal(c(np.array([0, 0.5, 1, 3])), [100, 62.5, 25, 25])


@pytest.mark.parametrize("variance, rate, expected", [(100, 1, 25), (100, 0, 100), (16, 2, 1)])
def test_parametric_exponential_samples(variance, rate, expected):
    c = parametric_exponential(variance, 4.0, 9)
    assert c(rate) == pytest.approx(expected, rel=1e-12)


def test_parametric_exponential_matches_formula_at_samples():
    c = parametric_exponential(37.0, 3.0, 31)
    for r, d in c.points:
        assert d == pytest.approx(37.0 * 2 ** (-2 * r), rel=1e-12)


@given(st.lists(st.floats(0, 5), min_size=2, max_size=20), st.sampled_from(["linear", "step"]))
def test_eval_monotone_non_increasing(rates, mode):
    c = parametric_exponential(50.0, 4.0, 17, mode)
    xs = sorted(rates)
    ys = [c(x) for x in xs]
    assert all(b <= a for a, b in zip(ys, ys[1:]))


@given(st.sampled_from(["linear", "step"]))
def test_eval_exact_at_samples(mode):
    c = load_rd_curve([(0, 90), (0.3, 40), (0.31, 39.5), (2, 3)], mode)
    for r, d in c.points:
        assert c(r) == d


def test_curve_is_immutable():
    c = load_rd_curve([(0, 2), (1, 1)])
    with pytest.raises(Exception):
        c.rates = (0.0,)
    with pytest.raises(ValueError):
        c._d[0] = 5


def test_psnr_reporting():
    # 18.96 MSE is reported as 35.35 dB alongside it
    assert psnr(18.96) == pytest.approx(35.35, abs=0.005)
    assert math.isinf(psnr(0.0))


def test_csv_round_trip(tmp_path):
    c = parametric_exponential(100.0, 2.0, 7)
    path = tmp_path / "rd.csv"
    write_rd_csv(c, path)
    assert path.read_text().splitlines()[0] == "rate,distortion"
    assert read_rd_csv(path) == c


def test_csv_bad_header(tmp_path):
    path = tmp_path / "rd.csv"
    path.write_text("r,d\n0,1\n")
    with pytest.raises(ValueError):
        read_rd_csv(path)


def test_struct_validation_direct():
    with pytest.raises(NotMonotone):
        RdCurve((0.0, 1.0), (1.0, 2.0))

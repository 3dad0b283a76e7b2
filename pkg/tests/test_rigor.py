from decimal import Decimal

import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from subweyl.errors import DomainError, PrecisionExhausted
from subweyl.rigor import (Direction, IntervalBackend, UpperScalar, default_precision, eval_expr,
                           round_directed)


def test_sqrt2_brackets_truth():
    up = eval_expr("sqrt(2)", "UP")
    down = eval_expr("sqrt(2)", "DOWN")
    with mp.workdps(200):
        assert up.value**2 >= 2
        assert down.value**2 <= 2
        assert up.value - down.value < mpf(10) ** -55


def test_one_third_width_is_tiny():
    up = eval_expr("1/3", Direction.UP)
    down = eval_expr("1/3", Direction.DOWN)
    assert 0 < up.value - down.value < mpf(10) ** -58


def test_decimal_literal_is_taken_at_face_value():
    # 0.1 as a binary float is above one tenth; the enclosure must contain the decimal
    up, down = eval_expr("0.1", "UP"), eval_expr("0.1", "DOWN")
    with mp.workdps(100):
        assert down.value <= mpf(1) / 10 <= up.value


def test_caret_means_power():
    assert eval_expr("2^10", "UP").value == 1024


def test_large_power_keeps_relative_width():
    up = eval_expr("exp(875)^(27/164)", "UP")
    down = eval_expr("exp(875)^(27/164)", "DOWN")
    assert (up.value - down.value) / up.value < mpf(10) ** -55


def test_domain_error_for_log_of_negative():
    with pytest.raises(DomainError):
        eval_expr("log(0 - 1)")


def test_precision_exhausted_for_zero_denominator():
    with pytest.raises(PrecisionExhausted):
        eval_expr("1/(1 - 1)")


def test_ceil_of_exact_integer_cannot_be_decided():
    with pytest.raises(PrecisionExhausted):
        eval_expr("ceil(1/3*3)", auto_precision=False)
    assert eval_expr("ceil(2.5)").value == 3


def test_rejects_names_and_attributes():
    with pytest.raises(ValueError):
        eval_expr("__import__('os')")
    with pytest.raises(ValueError):
        eval_expr("x + 1")


def test_env_var_sets_default_precision(monkeypatch):
    monkeypatch.setenv("ZETA_CERTIFY_PRECISION", "90")
    assert default_precision() == 90
    assert IntervalBackend().precision == 90
    monkeypatch.setenv("ZETA_CERTIFY_PRECISION", "10")
    with pytest.raises(ValueError):
        default_precision()


def test_upper_scalar_float_rounds_away():
    third = eval_expr("1/3", "UP")
    assert float(third) >= 1 / 3
    low = eval_expr("1/3", "DOWN")
    assert float(low) <= 1 / 3
    assert third.to_json()["direction"] == "UP"


@given(st.decimals(min_value=Decimal("1e-30"), max_value=Decimal("1e30"), allow_nan=False, places=None),
       st.integers(min_value=1, max_value=12))
def test_round_directed_brackets(x, sig):
    with mp.workdps(80):
        v = mpf(str(x))
        up = round_directed(v, sig, Direction.UP)
        down = round_directed(v, sig, Direction.DOWN)
        assert Decimal(down) <= x <= Decimal(up)
        assert len(up.as_tuple().digits) <= sig
        # adjacent representable values at sig digits
        assert up - down <= Decimal(1).scaleb(up.adjusted() - sig + 1)


@given(st.fractions(min_value=-1000, max_value=1000))
def test_interval_num_of_fraction_encloses(q):
    B = IntervalBackend(40)
    with B.context():
        x = B.num(q)
        with mp.workdps(80):
            exact = mpf(q.numerator) / q.denominator
            assert B.lower(x) <= exact <= B.upper(x)


def test_upper_scalar_rejects_low_precision():
    with pytest.raises(ValueError):
        UpperScalar(mpf(1), Direction.UP, 10)

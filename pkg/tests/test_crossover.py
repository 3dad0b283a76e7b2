from decimal import Decimal

import pytest

from subweyl.crossover import crossover, crossover_constant, crossover_scheme, min_comparator
from subweyl.errors import NoCrossover
from subweyl.optimizer import Scheme, SchemeRow
from subweyl.pipeline import TAIL_ROW_875
from subweyl.rigor import Direction, UpperScalar


def _A(x):
    from mpmath import mpf

    return UpperScalar(mpf(x), Direction.UP, 30)


def test_constant_against_vdc():
    # 66.7 t^(27/164) = 0.618 t^(1/6) log t solved independently with mpmath.findroot: 89.9040...
    assert abs(crossover_constant("66.7", "vdc_0618") - 89.904) < 2e-3


def test_constant_against_hpy():
    assert abs(crossover_constant("66.7", "hpy_2022") - 104.7228) < 2e-3


def test_same_exponent_never_crosses():
    with pytest.raises(NoCrossover):
        crossover_constant("66.7", "patel_307")


def test_precision_invariance():
    a = crossover_constant("66.7", "vdc_0618", precision=60)
    b = crossover_constant("66.7", "vdc_0618", precision=120)
    assert abs(a - b) <= 1e-3


def test_unknown_comparator():
    with pytest.raises(ValueError):
        crossover("66.7", "nope")


def test_scheme_crossover_inside_a_row():
    # a row too weak at its left end and a strong tail: the crossing sits inside the first row
    rows = [SchemeRow(TAIL_ROW_875.with_interval("60", "875"), _A(66.7)),
            SchemeRow(TAIL_ROW_875, _A(66.7))]
    s = Scheme(rows, Decimal(60))
    x = crossover_scheme(s, ("hpy_2022", "patel_307"))
    assert abs(x - crossover_constant("66.7", ("hpy_2022", "patel_307"))) < 2e-3


def test_scheme_better_everywhere_starts_at_t_start():
    rows = [SchemeRow(TAIL_ROW_875.with_interval("60", "875"), _A(30)),
            SchemeRow(TAIL_ROW_875, _A(66.7))]
    assert crossover_scheme(Scheme(rows, Decimal(60))) == 60.0


def test_scheme_tail_too_weak():
    rows = [SchemeRow(TAIL_ROW_875, _A(400))]
    with pytest.raises(NoCrossover):
        crossover_scheme(Scheme(rows, Decimal(875)))


def test_min_comparator_switches():
    import math

    # hpy is smaller at moderate heights, patel eventually
    L = 60.0
    hpy = math.log(0.478013 * math.exp(L / 6) * L + 3.853165 * math.exp(L / 6) - 2.914229)
    assert abs(min_comparator(L) - hpy) < 1e-12
    assert abs(min_comparator(2000.0) - (math.log(307.098) + 27 / 164 * 2000)) < 1e-9

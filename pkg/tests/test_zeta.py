import math

import pytest
from mpmath import mp, mpf

from subweyl.errors import PreconditionFailed
from subweyl.zeta import first_zero, rs_term_count, rs_upper, zeta_oracle

# plain 60-digit mpmath: 2|sum_{n<=5} n^(-1/2-200i)| + 1.48*200^(-1/4) + 0.127*200^(-3/4)
RS200 = "5.98877633731109140680379057759694286555915444527750946762001"
# mpmath.zeta at 60 digits
ZETA3 = "0.538547138541707203938233527176925222043350366388294296831265"


def test_rs_upper_200():
    assert rs_term_count(200) == 5
    v = rs_upper(200)
    with mp.workdps(60):
        assert mpf(v) >= mpf(RS200)
        assert mpf(v) - mpf(RS200) < mpf("1e-14")


def test_rs_upper_dominates_oracle_at_100_terms():
    t = 2 * math.pi * 10**4
    assert rs_term_count(t) in (99, 100)
    assert rs_upper(t) >= zeta_oracle(t)


@pytest.mark.parametrize("t", [200, 1234.5, 5e4, 1e6])
def test_rs_upper_floor(t):
    assert rs_upper(t) >= 1.48 * t**-0.25


def test_rs_upper_domain():
    with pytest.raises(PreconditionFailed):
        rs_upper(199.9)


def test_oracle_t3():
    assert abs(zeta_oracle(3) - mpf(ZETA3)) < 1e-6


def test_first_zero():
    z = first_zero()
    assert abs(z - 14.134725141739) < 1e-8
    assert zeta_oracle(z) < 1e-4


def test_oracle_below_classical_bound():
    t = 1e6
    assert zeta_oracle(t) <= 0.618 * t ** (1 / 6) * math.log(t)


def test_oracle_domain():
    with pytest.raises(PreconditionFailed):
        zeta_oracle(2)

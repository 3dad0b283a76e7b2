from decimal import Decimal

import pytest

from subweyl.errors import NoAdmissiblePoint, SchemeValidationError
from subweyl.optimizer import (DEFAULT_BOX, Scheme, SchemeRow, SearchConfig, build_scheme, decode, encode,
                               coord_bounds, optimize_interval)
from subweyl.pipeline import TAIL_ROW_875, admissibility


def test_budget_one_returns_seed_row():
    res = optimize_interval("875", "inf", SearchConfig(budget=1))
    assert res.evaluations == 1
    assert res.params.theta2 == TAIL_ROW_875.theta2
    assert res.A <= Decimal("66.7")


def test_tail_search_stays_below_66_7():
    res = optimize_interval("875", "inf", SearchConfig(budget=800, seed=3))
    assert res.A <= Decimal("66.7")
    assert admissibility(res.params) is None


def test_same_seed_same_answer():
    cfg = SearchConfig(budget=400, seed=11)
    a = optimize_interval("100", "110", cfg)
    b = optimize_interval("100", "110", cfg)
    assert a.params == b.params and a.A.value == b.A.value


def test_more_budget_never_worse():
    small = optimize_interval("200", "210", SearchConfig(budget=400, seed=5))
    large = optimize_interval("200", "210", SearchConfig(budget=1200, seed=5))
    assert large.float_A <= small.float_A


def test_encode_decode_roundtrip():
    bounds = coord_bounds(DEFAULT_BOX)
    p = decode(encode(TAIL_ROW_875, bounds), "875", "inf")
    assert p == TAIL_ROW_875.__class__.from_dict(dict(TAIL_ROW_875.to_dict(), h2="1.0027"))


def test_no_admissible_point_when_box_is_hopeless():
    box = dict(DEFAULT_BOX, h1=(1.9, 1.99))  # h0 > h1 > 2 - 0.1 is fine, but force h0 above 2
    box["h1"] = (2.5, 3.0)
    with pytest.raises(NoAdmissiblePoint) as exc:
        optimize_interval("875", "inf", SearchConfig(budget=80, box=box))
    assert exc.value.interval == (Decimal(875), Decimal("Infinity"))


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(budget=0)
    with pytest.raises(ValueError):
        SearchConfig(box=dict(DEFAULT_BOX, eta1=(2.0, 1.0)))
    with pytest.raises(ValueError):
        SearchConfig(penalty="whatever")


def test_explicit_single_tail_row():
    s = build_scheme(875, [875], SearchConfig(budget=1))
    assert len(s.rows) == 1 and s.rows[0].log_t1.is_infinite()
    assert s.global_A <= Decimal("66.7")


def test_explicit_breakpoints_tile():
    s = build_scheme(700, [750, 800, 875], SearchConfig(budget=120, seed=2))
    assert [str(r.log_t0) for r in s.rows] == ["700", "750", "800", "875"]
    assert all(admissibility(r.params) is None for r in s.rows)
    assert s.global_A.value == max(r.A.value for r in s.rows)


def test_degenerate_row_rejected():
    row = SchemeRow(TAIL_ROW_875.with_interval("100", "100"), None)
    tail = SchemeRow(TAIL_ROW_875.with_interval("100", "inf"), None)
    with pytest.raises(SchemeValidationError):
        Scheme([row, tail], Decimal(100))


def test_gap_rejected():
    a = SchemeRow(TAIL_ROW_875.with_interval("100", "200"), None)
    b = SchemeRow(TAIL_ROW_875.with_interval("201", "inf"), None)
    with pytest.raises(SchemeValidationError):
        Scheme([a, b], Decimal(100))


def test_t_start_too_small():
    with pytest.raises(ValueError):
        build_scheme(5, "AUTO")

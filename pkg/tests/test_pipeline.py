from decimal import Decimal

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf

from subweyl.errors import AdmissibilityError
from subweyl.pipeline import (TAIL_ROW_875, Conventions, ParamSet, admissibility, assemble, coeff_S1, coeff_S2,
                              coeff_S3, coeff_S3_block, K_of, objective)

# 80-digit plain-mpmath evaluation of the tail row, independent of the interval code
ORACLE_A = "66.624044879563873078846266091906367928686745531122"
ORACLE_S2 = "1.9888216836385175"  # D3 t0^(19/119-27/164) + D4 t0^(71/476-27/164)


def test_tail_row_matches_oracle(tail_row):
    rep = assemble(tail_row)
    with mp.workdps(70):
        assert abs(rep.A_total.value - mpf(ORACLE_A)) < mpf(10) ** -45
    assert rep.A_total <= Decimal("66.7")
    assert abs(float(rep.subsum_breakdown["S2"]) / 2 - float(ORACLE_S2)) < 1e-12


def test_breakdown_adds_up(tail_row):
    rep = assemble(tail_row)
    assert rep.recompute_total().value == rep.A_total.value
    assert rep.K_t1 is None and rep.R_t1 is None
    assert set(rep.mu) == {"mu3(5/82)", "mu4(17/328)", "mu3(87/164)", "mu4(5/246)"}


def test_s3_dominates(tail_row):
    rep = assemble(tail_row)
    b = {k: float(v) for k, v in rep.subsum_breakdown.items()}
    assert b["S3"] > 0.9 * float(rep.A_total)
    assert b["S1"] < 1e-3 and b["RS"] < 1e-100


@pytest.mark.parametrize("conv", [Conventions(h3_convention="statement"), Conventions(h0_convention="theta2"),
                                  Conventions(variant="repaired")])
def test_alternate_conventions_also_certify(tail_row, conv):
    rep = assemble(tail_row, conv)
    assert rep.A_total <= Decimal("66.7")


def test_statement_convention_is_slightly_worse(tail_row):
    a = assemble(tail_row).A_total.value
    b = assemble(tail_row, Conventions(h3_convention="statement")).A_total.value
    assert a < b


def test_h1_not_above_one_names_predicate(tail_row):
    bad = ParamSet.from_dict(dict(tail_row.to_dict(), h1="0.9"))
    with pytest.raises(AdmissibilityError) as exc:
        assemble(bad)
    assert exc.value.predicate == "h1 > 1"
    assert admissibility(bad) == "h1 > 1"
    assert admissibility(tail_row) is None


def test_t0_below_200_rejected(tail_row):
    assert admissibility(tail_row.with_interval("5", "inf")) == "t0 >= 200"


def test_h0_above_two_rejected(tail_row):
    p = ParamSet.from_dict(dict(tail_row.to_dict(), h1="2.5"))
    assert admissibility(p) == "h0 <= 2"


def test_small_q0_rejected(tail_row):
    p = ParamSet.from_dict(dict(tail_row.to_dict(), theta1="1e-40"))
    assert admissibility(p) == "q0 >= 2"


def test_individual_coefficients(tail_row):
    rep = assemble(tail_row)
    assert coeff_S1(tail_row).value == rep.C0.value
    D3, D4 = coeff_S2(tail_row)
    assert D3.value == rep.D3.value and D4.value == rep.D4.value
    assert coeff_S3(tail_row).value == rep.C4_or_C5.value
    blk = coeff_S3_block(tail_row, rep.h0.decimal_string(40))
    assert abs(float(blk[0]) - float(rep.C1)) < 1e-12
    with pytest.raises(AdmissibilityError):
        coeff_S3_block(tail_row, "2.5")


def test_finite_row_counts_blocks(tail_row):
    rep = assemble(tail_row.with_interval("100", "200"))
    assert rep.K_t1 == K_of("200", tail_row.theta2, tail_row.h1)
    assert rep.R_t1 >= 0
    assert set(rep.mu) == {"mu1(5/82)", "mu2(17/328)", "mu1(87/164)", "mu2(5/246)"}


def test_block_count_frozen():
    # (3/34 * 200 - log(261658 sqrt(2 pi))) / log 1.01563 = 274.25..., rounded up
    assert K_of(200, "261658", "1.01563") == 275


def test_higher_precision_tightens(tail_row):
    a60 = assemble(tail_row, precision=60).A_total.value
    a120 = assemble(tail_row, precision=120).A_total.value
    assert a120 <= a60


def test_float_objective_tracks_interval(tail_row):
    assert abs(objective(tail_row) - float(assemble(tail_row).A_total)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0.995, 1.005), st.floats(0.98, 1.02), st.floats(0.9, 1.1))
def test_float_and_interval_agree_nearby(s_h, s_eta, s_theta):
    base = TAIL_ROW_875
    p = ParamSet.from_dict(dict(
        base.to_dict(),
        h1=f"{1 + (float(base.h1) - 1) * s_h:.6g}",
        eta1=f"{float(base.eta1) * s_eta:.6g}",
        theta2=f"{float(base.theta2) * s_theta:.6g}",
    ))
    if admissibility(p) is not None:
        return
    a = float(assemble(p).A_total)
    assert abs(objective(p) - a) < 1e-9 * a


def test_paramset_roundtrip(tail_row):
    d = tail_row.to_dict()
    assert d["log_t1"] == "inf"
    assert ParamSet.from_dict(d) == tail_row
    with pytest.raises(ValueError):
        ParamSet.from_dict({"h1": "1.1"})


def test_bad_convention_names():
    with pytest.raises(ValueError):
        Conventions(h3_convention="other")

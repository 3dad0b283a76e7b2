"""Coefficients of the three-way split of the Riemann-Siegel main sum and the
assembled constant A(t0, t1) with |zeta(1/2+it)| <= A t^(27/164) on [t0, t1].

Parameters are held as ``Decimal`` so a parameter row is exactly the decimal
string that was printed.  All heights are passed as natural logarithms.

Every formula is written once against a backend (see ``rigor``); the
interval backend gives the certified report, the float backend the search
objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from decimal import Decimal
from fractions import Fraction as F
from typing import Optional

from .errors import AdmissibilityError, PrecisionExhausted
from .exponent import deriv_constants
from .rigor import Direction, FloatBackend, IntervalBackend, UpperScalar, with_precision_retry

INF = Decimal("Infinity")
TUNING = ("h1", "h2", "eta1", "eta2", "theta1", "theta2", "theta3")

# 76545*sqrt(2)/107264: ratio of the fifth-derivative envelopes of the dual phase
H5_NUM, H5_DEN = 76545, 107264
THETA = F(27, 164)


def _dec(x):
    if isinstance(x, Decimal):
        return x
    if isinstance(x, float):
        if math.isinf(x):
            return INF
        return Decimal(repr(x))
    s = str(x).strip()
    if s.lower() in ("inf", "infinity", "+inf"):
        return INF
    return Decimal(s)


@dataclass(frozen=True)
class ParamSet:
    log_t0: Decimal
    log_t1: Decimal  # Decimal("Infinity") for the tail row
    h1: Decimal
    h2: Decimal
    eta1: Decimal
    eta2: Decimal
    theta1: Decimal
    theta2: Decimal
    theta3: Decimal

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _dec(getattr(self, f.name)))

    @property
    def infinite(self):
        return self.log_t1.is_infinite()

    def with_interval(self, log_t0, log_t1):
        return replace(self, log_t0=_dec(log_t0), log_t1=_dec(log_t1))

    def to_dict(self):
        return {f.name: ("inf" if getattr(self, f.name).is_infinite() else str(getattr(self, f.name)))
                for f in fields(self)}

    @classmethod
    def from_dict(cls, d):
        missing = [f.name for f in fields(cls) if f.name not in d]
        if missing:
            raise ValueError(f"parameter set is missing {', '.join(missing)}")
        return cls(**{f.name: d[f.name] for f in fields(cls)})


# The published tail row certifying 66.7 on [exp(875), oo).
TAIL_ROW_875 = ParamSet(
    log_t0="875", log_t1="inf", h1="1.01563", h2="1.00270", eta1="1.59875", eta2="0.828895",
    theta1="1.14283", theta2="261658", theta3="2.53087e-11",
)


@dataclass(frozen=True)
class Conventions:
    """Choices where the source formulas are ambiguous.

    h3_convention
        ``"proof"`` evaluates A_4 at h = h3^4 (the fourth-derivative envelope
        ratio actually used when the derivative test is applied);
        ``"statement"`` evaluates it at h3.
    h0_convention
        ``"theta1"``: h0 = h1 / (1 - theta1 t0^(-7/17));
        ``"theta2"``: h0 = h1 / (1 - h1 / (theta2 t0^(7/17))).
    variant
        ``"verbatim"`` uses the displayed coefficient formulas as printed.
        ``"repaired"`` fixes three slips found when re-deriving the partial
        sums: h3 uses theta3 in its denominator, the negative-power block sum
        mu2 carries (2 pi)^(a/2) / (1 - h^-a), and mu4 drops its subtracted
        term, which is not valid uniformly in t.
    """

    h3_convention: str = "proof"
    h0_convention: str = "theta1"
    variant: str = "verbatim"

    def __post_init__(self):
        if self.h3_convention not in ("proof", "statement"):
            raise ValueError("h3_convention must be 'proof' or 'statement'")
        if self.h0_convention not in ("theta1", "theta2"):
            raise ValueError("h0_convention must be 'theta1' or 'theta2'")
        if self.variant not in ("verbatim", "repaired"):
            raise ValueError("variant must be 'verbatim' or 'repaired'")

    def to_dict(self):
        return {"h3_convention": self.h3_convention, "h0_convention": self.h0_convention,
                "variant": self.variant}


DEFAULT_CONVENTIONS = Conventions()


# ---------------------------------------------------------------------------
# evaluation context: parameters converted once into backend numbers


class _Ctx:
    def __init__(self, B, params, conv):
        self.B = B
        self.p = params
        self.conv = conv
        self.L0 = B.num(params.log_t0)
        self.L1 = None if params.infinite else B.num(params.log_t1)
        for name in TUNING:
            setattr(self, name, B.num(getattr(params, name)))
        self.two_pi = 2 * B.pi
        self._tp = {}

    def q(self, p, d=1):
        return self.B.q(p, d)

    def t0_pow(self, p, d=1):
        """t0^(p/d), cached."""
        key = (p, d)
        if key not in self._tp:
            self._tp[key] = self.B.exp(self.B.q(p, d) * self.L0)
        return self._tp[key]

    def t0_frac(self, r):
        return self.t0_pow(r.numerator, r.denominator)

    def pw(self, x, p, d=1):
        return self.B.pow(x, self.B.q(p, d))


def _decide(B, x, name, strict=True):
    """Raise unless x > 0 (strict) or x >= 0 holds for the whole enclosure."""
    lo, hi = B.lower(x), B.upper(x)
    if (lo > 0) if strict else (lo >= 0):
        return
    if ((hi <= 0) if strict else (hi < 0)) or not B.rigorous:
        raise AdmissibilityError(name)
    raise PrecisionExhausted(f"cannot decide admissibility predicate {name!r}")


def _h0(c):
    if c.conv.h0_convention == "theta1":
        return c.h1 / (1 - c.theta1 / c.t0_pow(7, 17))
    return c.h1 / (1 - c.h1 / (c.theta2 * c.t0_pow(7, 17)))


def _h3_theta(c):
    return c.theta3 if c.conv.variant == "repaired" else c.theta2


def _q0(c):
    return c.theta1 * c.pw(c.theta2, 7, 17) * c.t0_pow(65, 697)


def _check(c):
    """Admissibility predicates in a fixed order; raises on the first failure."""
    B, p = c.B, c.p
    for name in TUNING:
        v = getattr(p, name)
        if name[0] == "h":
            if not v > 1:
                raise AdmissibilityError(f"{name} > 1")
        elif not v > 0:
            raise AdmissibilityError(f"{name} > 0")
    if not p.infinite and not p.log_t1 > p.log_t0:
        raise AdmissibilityError("t1 > t0")
    _decide(B, c.L0 - B.log(B.num(200)), "t0 >= 200", strict=False)
    _decide(B, _q0(c) - 2, "q0 >= 2", strict=False)
    if c.conv.h0_convention == "theta1":
        _decide(B, 1 - c.theta1 / c.t0_pow(7, 17), "1 - theta1*t0^(-7/17) > 0")
    _decide(B, 1 - c.h1 / (c.theta2 * c.t0_pow(7, 17)), "1 - h1/(theta2*t0^(7/17)) > 0")
    h0 = _h0(c)
    _decide(B, h0 - 1, "h0 > 1")
    _decide(B, 2 - h0, "h0 <= 2", strict=False)
    th = "theta3" if c.conv.variant == "repaired" else "theta2"
    _decide(B, 1 - c.h2 / (_h3_theta(c) * c.t0_pow(27, 82)), f"1 - (h2/{th})*t0^(-27/82) > 0")
    _decide(B, c.theta1 - 1 / (c.theta2 * c.t0_pow(100, 697)), "theta1 - 1/(theta2*t0^(100/697)) > 0")
    if p.infinite:
        # the K-count term (a log t + b) t^(-27/164) has to peak at t0
        a = 3 / (34 * B.log(c.h1))
        b = 1 - B.log(c.theta2 * B.sqrt(c.two_pi)) / B.log(c.h1)
        _decide(B, c.q(27, 164) * (a * c.L0 + b) - a, "K-count surrogate decreasing on [t0, oo)",
                strict=False)
    return h0


def admissibility(params, conventions=DEFAULT_CONVENTIONS, precision=None):
    """Return None if admissible, else the name of the first violated predicate."""

    def run(prec):
        B = IntervalBackend(prec)
        with B.context():
            _check(_Ctx(B, params, conventions))

    try:
        with_precision_retry(run, precision)
    except AdmissibilityError as exc:
        return exc.predicate
    return None


# ---------------------------------------------------------------------------
# subsum coefficients (backend level)


def _K_t1(c):
    """Number of S3 blocks at t1, clamped at 0."""
    B = c.B
    x = (c.q(3, 34) * c.L1 - B.log(c.theta2 * B.sqrt(c.two_pi))) / B.log(c.h1)
    return max(0, B.ceil(x))


def _R_t1(c):
    B = c.B
    x = (c.q(115, 1394) * c.L1 - B.log(c.theta3 / c.theta2)) / B.log(c.h2)
    return max(0, B.ceil(x))


def _s1(c):
    B = c.B
    return {"C0": 2 * B.sqrt(c.theta3 * (1 + 1 / (2 * c.t0_pow(27, 82))))}


def _s2(c):
    B = c.B
    h2 = c.h2
    h3 = h2 / (1 - h2 / (_h3_theta(c) * c.t0_pow(27, 82)))
    h_arg = B.pow(h3, 4) if c.conv.h3_convention == "proof" else h3
    A4, B4, *_ = deriv_constants(B, 4, c.eta2, h_arg)
    if c.p.infinite:
        R = None
        g1 = 1 / (c.pw(h2, 3, 14) - 1)
        g2 = 1 / (c.pw(h2, 15, 28) - 1)
    else:
        R = _R_t1(c)
        g1 = (1 - B.pow(h2, -c.q(3 * R, 14))) / (c.pw(h2, 3, 14) - 1)
        g2 = (1 - B.pow(h2, -c.q(15 * R, 28))) / (c.pw(h2, 15, 28) - 1)
    if R == 0:
        D3 = D4 = B.num(0)
    else:
        D3 = c.pw(3 / B.pi, 1, 14) * A4 * c.pw(h3, 5, 7) * (h3 - 1) * c.pw(c.theta2, 3, 14) * g1
        D4 = c.pw(B.pi / 3, 1, 14) * B4 * c.pw(h3, 2, 7) * c.pw(h3 - 1, 3, 4) * c.pw(c.theta2, 15, 28) * g2
    return {"h3": h3, "A4": A4, "B4": B4, "D3": D3, "D4": D4, "R_t1": R}


def _s3_block(c, h):
    """Block coefficients C1, C2, E1, E2, E3 at block ratio h (= h0)."""
    B = c.B
    pi, th1, th2 = B.pi, c.theta1, c.theta2
    hm1 = h - 1
    alpha = B.sqrt(hm1 + th1 / (c.pw(th2, 5, 41) * c.t0_pow(222, 697)))
    q0 = _q0(c)
    h5 = H5_NUM * B.sqrt(B.num(2)) / H5_DEN * B.pow(h, 9)
    A5, B5, *_ = deriv_constants(B, 5, c.eta1, h5)
    C1 = alpha * B.sqrt(
        hm1 / th1 / (1 - 1 / q0)
        + B.num("0.4750") * c.pw(th1, 11, 30) * A5 * c.pw(h, 21, 8) * hm1
    )
    C2 = alpha * B.sqrt(B.num("0.2531") * c.pw(th1, 61, 120) * B5 * c.pw(h, 3, 2) * c.pw(hm1, 7, 8))
    E1 = (alpha * B.sqrt(B.num("12.496") * B.sqrt(pi)) * c.pw(h, 3, 4)
          * c.pw(th1 - 1 / (th2 * c.t0_pow(100, 697)), -1, 4))
    E2 = alpha * B.sqrt(
        c.q(9, 14) * c.pw(th1, 1, 3) * (
            B.num("4.465") * c.pw(hm1, 1, 3) / (c.pw(pi, 4, 3) * c.pw(th2, 1, 3) * c.t0_pow(7, 51))
            + 6 / pi * B.pow(h, 3) * hm1
        )
    )
    E3 = alpha * B.sqrt(6 + 5 / pi * B.log(B.num(2)))
    return {"alpha": alpha, "q0": q0, "h5": h5, "A5": A5, "B5": B5,
            "C1": C1, "C2": C2, "E1": E1, "E2": E2, "E3": E3}


def _mu(c, K):
    """The four block-sum factors as functions of an exponent a (an exact Fraction)."""
    B = c.B
    h = c.h1
    shrink = 1 - h / (c.theta2 * c.t0_pow(7, 17))
    repaired = c.conv.variant == "repaired"

    def ha(a):
        return B.pow(h, c.q(a.numerator, a.denominator))

    def tpi(a):
        return B.pow(c.two_pi, c.q(a.numerator, 2 * a.denominator))

    def shr(a):
        return B.pow(shrink, -c.q(a.numerator, a.denominator))

    def mu1(a):
        return (1 - 1 / B.pow(ha(a), K)) / (tpi(a) * (ha(a) - 1))

    def mu2(a):
        if repaired:
            return shr(a) * tpi(a) * (1 - 1 / B.pow(ha(a), K)) / (1 - 1 / ha(a))
        return mu1(a) * shr(a)

    def mu3(a):
        return 1 / (tpi(a) * (ha(a) - 1))

    def mu4(a):
        lead = B.pow(h / c.theta2, c.q(a.numerator, a.denominator))
        if not repaired:
            lead = lead - B.sqrt(c.two_pi) / c.t0_pow(3, 34)
        return shr(a) * lead / (1 - 1 / ha(a))

    return mu1, mu2, mu3, mu4


def _s3(c, h0):
    B = c.B
    blk = _s3_block(c, h0)
    C1, C2, E1, E2, E3 = (blk[k] for k in ("C1", "C2", "E1", "E2", "E3"))
    out = dict(blk, h0=h0)
    if c.p.infinite:
        mu1, mu2, mu3, mu4 = _mu(c, None)
        a1, a2, a3, a4 = F(5, 82), F(17, 328), F(87, 164), F(5, 246)
        m = {"mu3(5/82)": mu3(a1), "mu4(17/328)": mu4(a2), "mu3(87/164)": mu3(a3), "mu4(5/246)": mu4(a4)}
        k_surr = (c.q(3, 34) * c.L0 - B.log(c.theta2 * B.sqrt(c.two_pi))) / B.log(c.h1) + 1
        C = (C1 * m["mu3(5/82)"] + C2 * m["mu4(17/328)"]
             + E1 * m["mu3(87/164)"] / c.t0_pow(27, 328)
             + E2 * m["mu4(5/246)"] / c.t0_pow(427, 8364)
             + E3 * k_surr / c.t0_pow(27, 164))
        out.update(K_t1=None, K_surrogate=k_surr, mu=m, C4_or_C5=C)
        return out
    K = _K_t1(c)
    out["K_t1"] = K
    if K == 0:
        out.update(mu={}, C4_or_C5=B.num(0))
        return out
    mu1, mu2, mu3, mu4 = _mu(c, K)
    a1, a2, a3, a4 = F(5, 82), F(17, 328), F(87, 164), F(5, 246)
    m = {"mu1(5/82)": mu1(a1), "mu2(17/328)": mu2(a2), "mu1(87/164)": mu1(a3), "mu2(5/246)": mu2(a4)}
    C = (C1 * m["mu1(5/82)"]
         + C2 * m["mu2(17/328)"] * B.pow(c.h1, c.q(17 * K, 328)) / c.t0_pow(3, 656)
         + E1 * m["mu1(87/164)"] / c.t0_pow(27, 328)
         + E2 * m["mu2(5/246)"] * B.pow(c.h1, c.q(5 * K, 246)) / c.t0_pow(13, 246)
         + E3 * K / c.t0_pow(27, 164))
    out.update(mu=m, C4_or_C5=C)
    return out


def _assemble(c):
    B = c.B
    h0 = _check(c)
    s1 = _s1(c)
    s2 = _s2(c)
    s3 = _s3(c, h0)
    parts = {
        "S1": 2 * s1["C0"],
        "S2": 2 * (s2["D3"] * c.t0_frac(F(19, 119) - THETA) + s2["D4"] * c.t0_frac(F(71, 476) - THETA)),
        "S3": 2 * s3["C4_or_C5"],
        "RS": B.num("1.48") * c.t0_frac(-F(1, 4) - THETA) + B.num("0.127") * c.t0_frac(-F(3, 4) - THETA),
    }
    total = parts["S1"] + parts["S2"] + parts["S3"] + parts["RS"]
    return s1, s2, s3, parts, total


# ---------------------------------------------------------------------------
# public API


@dataclass(frozen=True)
class CoefficientReport:
    params: ParamSet
    conventions: Conventions
    precision: int
    K_t1: Optional[int]
    R_t1: Optional[int]
    h0: UpperScalar
    q0: UpperScalar
    alpha: UpperScalar
    h3: UpperScalar
    h5: UpperScalar
    A4: UpperScalar
    B4: UpperScalar
    A5: UpperScalar
    B5: UpperScalar
    C0: UpperScalar
    D3: UpperScalar
    D4: UpperScalar
    C1: UpperScalar
    C2: UpperScalar
    E1: UpperScalar
    E2: UpperScalar
    E3: UpperScalar
    C4_or_C5: UpperScalar
    mu: dict
    subsum_breakdown: dict
    A_total: UpperScalar
    K_surrogate: Optional[UpperScalar] = None

    def recompute_total(self):
        """Re-add the stored per-subsum contributions with upward rounding."""
        B = IntervalBackend(self.precision)
        with B.context():
            s = B.num(0)
            for key in ("S1", "S2", "S3", "RS"):
                s = s + B.num(self.subsum_breakdown[key].value)
            return B.scalar(s)

    def to_json(self):
        scalars = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, UpperScalar):
                scalars[f.name] = v.to_json()
        return {
            "params": self.params.to_dict(),
            "conventions": self.conventions.to_dict(),
            "precision": self.precision,
            "K_t1": self.K_t1 if self.K_t1 is not None else "limit",
            "R_t1": self.R_t1 if self.R_t1 is not None else "limit",
            "coefficients": scalars,
            "mu": {k: v.to_json() for k, v in self.mu.items()},
            "subsum_breakdown": {k: v.to_json() for k, v in self.subsum_breakdown.items()},
            "A_total": self.A_total.to_json(),
        }

    def summary_lines(self):
        p = self.params
        t1 = "oo" if p.infinite else f"exp({p.log_t1})"
        lines = [
            f"interval            [exp({p.log_t0}), {t1})",
            f"conventions         h3={self.conventions.h3_convention} h0={self.conventions.h0_convention} "
            f"variant={self.conventions.variant}",
            f"K(t1), R(t1)        {self.K_t1 if self.K_t1 is not None else 'limit'}, "
            f"{self.R_t1 if self.R_t1 is not None else 'limit'}",
        ]
        for key in ("h0", "h3", "h5", "A4", "B4", "A5", "B5", "C0", "D3", "D4",
                    "C1", "C2", "E1", "E2", "E3", "C4_or_C5"):
            lines.append(f"{key:<20}{getattr(self, key).decimal_string(12)}")
        for name, v in self.mu.items():
            lines.append(f"{name:<20}{v.decimal_string(12)}")
        for name, v in self.subsum_breakdown.items():
            lines.append(f"2x{name:<18}{v.decimal_string(12)}" if name != "RS" else f"{'RS error':<20}{v.decimal_string(12)}")
        lines.append(f"{'A_total (UP)':<20}{self.A_total.decimal_string(15)}")
        return lines


def _interval_run(params, conventions, precision, fn):
    def run(p):
        B = IntervalBackend(p)
        with B.context():
            return fn(_Ctx(B, params, conventions), B, p)

    return with_precision_retry(run, precision)


def assemble(params, conventions=DEFAULT_CONVENTIONS, precision=None):
    """Certified A(t0, t1) and every intermediate coefficient."""

    def fn(c, B, p):
        s1, s2, s3, parts, total = _assemble(c)
        up = B.scalar
        return CoefficientReport(
            params=params, conventions=conventions, precision=p,
            K_t1=s3.get("K_t1"), R_t1=s2["R_t1"],
            h0=up(s3["h0"]), q0=up(s3["q0"]), alpha=up(s3["alpha"]), h3=up(s2["h3"]), h5=up(s3["h5"]),
            A4=up(s2["A4"]), B4=up(s2["B4"]), A5=up(s3["A5"]), B5=up(s3["B5"]),
            C0=up(s1["C0"]), D3=up(s2["D3"]), D4=up(s2["D4"]),
            C1=up(s3["C1"]), C2=up(s3["C2"]), E1=up(s3["E1"]), E2=up(s3["E2"]), E3=up(s3["E3"]),
            C4_or_C5=up(s3["C4_or_C5"]),
            mu={k: up(v) for k, v in s3["mu"].items()},
            subsum_breakdown={k: up(v) for k, v in parts.items()},
            A_total=up(total),
            K_surrogate=up(s3["K_surrogate"]) if "K_surrogate" in s3 else None,
        )

    return _interval_run(params, conventions, precision, fn)


def coeff_S1(params, conventions=DEFAULT_CONVENTIONS, precision=None):
    return _interval_run(params, conventions, precision,
                         lambda c, B, p: (_check(c), B.scalar(_s1(c)["C0"]))[1])


def coeff_S2(params, conventions=DEFAULT_CONVENTIONS, precision=None):
    """(D3, D4) as UP-directed scalars."""

    def fn(c, B, p):
        _check(c)
        s2 = _s2(c)
        return B.scalar(s2["D3"]), B.scalar(s2["D4"])

    return _interval_run(params, conventions, precision, fn)


def coeff_S3_block(params, h0, conventions=DEFAULT_CONVENTIONS, precision=None):
    """(C1, C2, E1, E2, E3) at block ratio ``h0``; needs 1 < h0 <= 2 and q0 >= 2."""

    def fn(c, B, p):
        h = B.num(h0)
        _decide(B, h - 1, "h0 > 1")
        _decide(B, 2 - h, "h0 <= 2", strict=False)
        _decide(B, _q0(c) - 2, "q0 >= 2", strict=False)
        _decide(B, c.theta1 - 1 / (c.theta2 * c.t0_pow(100, 697)), "theta1 - 1/(theta2*t0^(100/697)) > 0")
        blk = _s3_block(c, h)
        return tuple(B.scalar(blk[k]) for k in ("C1", "C2", "E1", "E2", "E3"))

    return _interval_run(params, conventions, precision, fn)


def coeff_S3(params, conventions=DEFAULT_CONVENTIONS, precision=None):
    """C4 (finite t1) or C5 (t1 = oo)."""

    def fn(c, B, p):
        h0 = _check(c)
        return B.scalar(_s3(c, h0)["C4_or_C5"])

    return _interval_run(params, conventions, precision, fn)


def K_of(log_t, theta2, h1, precision=None):
    """Block count K(t) = ceil(((3/34) log t - log(theta2 sqrt(2 pi))) / log h1), unclamped."""

    def run(p):
        B = IntervalBackend(p)
        with B.context():
            x = (B.q(3, 34) * B.num(_dec(log_t)) - B.log(B.num(_dec(theta2)) * B.sqrt(2 * B.pi))) \
                / B.log(B.num(_dec(h1)))
            return B.ceil(x)

    return with_precision_retry(run, precision)


_FLOAT = FloatBackend()


def objective(params, conventions=DEFAULT_CONVENTIONS):
    """Uncertified float A(t0, t1); raises AdmissibilityError.  Search use only."""
    c = _Ctx(_FLOAT, params, conventions)
    return _assemble(c)[4]

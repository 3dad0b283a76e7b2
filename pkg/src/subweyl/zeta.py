"""Reference values of |zeta(1/2 + it)| and the Riemann-Siegel majorant.

``zeta_oracle`` uses Borwein's accelerated alternating series for eta(s)
with its explicit truncation bound while that is affordable, and mpmath's
own zeta (Riemann-Siegel based at these heights) above ``ETA_LIMIT``.
Neither path shares code with ``rs_upper``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import mpmath
from mpmath import mp, mpf

from .errors import ConvergenceFailure, PreconditionFailed
from .rigor import Direction, UpperScalar

ETA_LIMIT = 10**4
ORACLE_TOL = mpf("1e-6")
_GUARD_DIGITS = 30


@lru_cache(maxsize=8)
def _borwein_d(n):
    """Exact integer partial sums d_0..d_n of Borwein's weights."""
    d, term, acc = [], 1, 0
    for i in range(n + 1):
        if i:
            # ratio of consecutive weights n (n+i-1)! 4^i / ((n-i)! (2i)!); the quotient is exact
            term = term * 4 * (n + i - 1) * (n - i + 1) // ((2 * i - 1) * (2 * i))
        acc += term
        d.append(acc)
    return tuple(d)


def _eta_terms_needed(t, tol):
    # |error| <= 3 (1 + 2|t|) e^(pi |t| / 2) / (3 + sqrt 8)^n, then divide by |1 - 2^(1-s)| >= sqrt2 - 1
    target = math.log(3 * (1 + 2 * t)) + math.pi * t / 2 - math.log(float(tol) * (math.sqrt(2) - 1))
    return max(10, int(math.ceil(target / math.log(3 + math.sqrt(8)))) + 1)


def zeta_eta(t, tol=ORACLE_TOL):
    """(zeta(1/2+it), error bound) via the accelerated eta series."""
    n = _eta_terms_needed(t, tol / 2)
    d = _borwein_d(n)
    with mp.workdps(_GUARD_DIGITS + int(math.log10(n)) + 5):
        s = mpmath.mpc(mpf(1) / 2, mpf(t))
        dn = mpf(d[n])
        acc = mpmath.mpc(0)
        for k in range(n):
            w = (mpf(d[k]) - dn) / dn
            term = w * mpmath.power(k + 1, -s)
            acc += term if k % 2 == 0 else -term
        eta = -acc
        z = eta / (1 - mpmath.power(2, 1 - s))
        rounding = mpf(n) * mpf(10) ** (-_GUARD_DIGITS + 2)
        return +z, tol / 2 + rounding


def zeta_complex(t, tol=ORACLE_TOL):
    """zeta(1/2 + it) together with an absolute error bound."""
    if not 3 <= t <= 10**8:
        raise PreconditionFailed("zeta_oracle needs 3 <= t <= 1e8")
    if t <= ETA_LIMIT:
        return zeta_eta(t, tol)
    with mp.workdps(30):
        z = mpmath.zeta(mpmath.mpc(0.5, t))
        # cross-evaluate at higher precision as a convergence screen
        with mp.workdps(40):
            z2 = mpmath.zeta(mpmath.mpc(0.5, t))
        if abs(z - z2) > tol / 10:
            raise ConvergenceFailure(f"zeta at t={t} unstable between 30 and 40 digits")
        return +z, tol / 10


def zeta_oracle(t, tol=ORACLE_TOL):
    """|zeta(1/2 + it)| to within ``tol`` (absolute)."""
    z, err = zeta_complex(t, tol)
    if err > tol:
        raise ConvergenceFailure(f"error bound {err} exceeds tolerance at t={t}")
    return abs(z)


def hardy_z(t):
    """Real rotation e^(i theta(t)) zeta(1/2 + it) from the oracle's complex value."""
    z, _ = zeta_complex(t)
    with mp.workdps(30):
        return (mpmath.expj(mpmath.siegeltheta(t)) * z).real


def first_zero(lo=14.0, hi=14.3, tol=1e-10):
    """Bisect the sign change of hardy_z on [lo, hi]."""
    flo = hardy_z(lo)
    if flo * hardy_z(hi) > 0:
        raise ConvergenceFailure("no sign change in bracket")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = hardy_z(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def rs_upper(t, digits=30):
    """2 |sum_{n <= sqrt(t/2pi)} n^(-1/2-it)| + 1.48 t^(-1/4) + 0.127 t^(-3/4), rounded up."""
    if t < 200:
        raise PreconditionFailed("rs_upper needs t >= 200")
    with mp.workdps(digits + 10):
        tt = mpf(t)
        N = int(mp.floor(mp.sqrt(tt / (2 * mp.pi))))
        re = [mpf(0)] * N
        im = [mpf(0)] * N
        for n in range(1, N + 1):
            # n^(-1/2 - it) = n^(-1/2) (cos(t log n) - i sin(t log n))
            r = 1 / mp.sqrt(n)
            ph = tt * mp.log(n)
            re[n - 1] = r * mp.cos(ph)
            im[n - 1] = -r * mp.sin(ph)
        main = 2 * mp.hypot(mp.fsum(re), mp.fsum(im))
        val = main + mpf("1.48") * tt ** mpf(-0.25) + mpf("0.127") * tt ** mpf(-0.75)
        # each term is good to ~10^-(digits+8); pad generously before rounding up
        val += N * mpf(10) ** (-digits)
        return float(UpperScalar(+val, Direction.UP, max(digits, 30)))


def rs_term_count(t):
    return int(math.floor(math.sqrt(t / (2 * math.pi))))

"""Where a bound of the form A t^(27/164) overtakes the published comparators.

All comparisons are done on logarithms at a chosen mpmath precision.  For a
constant A the log-difference against each comparator is monotone in log t;
for a scheme it is monotone within every row, so each row is handled by a
sign test at its ends plus bisection.
"""

from __future__ import annotations

from mpmath import mp, mpf

from .errors import NoCrossover
from .pipeline import _dec
from .rigor import DEFAULT_PRECISION

THETA = mpf(27) / 164
TOL = mpf("1e-3")


def _vdc(L):
    return mp.log(mpf("0.618")) + L / 6 + mp.log(L)


def _hpy(L):
    t6 = mp.exp(L / 6)
    return mp.log(mpf("0.478013") * t6 * L + mpf("3.853165") * t6 - mpf("2.914229"))


def _patel(L):
    return mp.log(mpf("307.098")) + THETA * L


# name -> (log of the bound as a function of log t, smallest log t where it holds)
COMPARATORS = {
    "vdc_0618": (_vdc, lambda: mp.log(3)),
    "hpy_2022": (_hpy, lambda: 12 * mp.log(10)),
    "patel_307": (_patel, lambda: mp.log(3)),
}


def _resolve(against):
    if isinstance(against, str):
        against = (against,)
    bad = [a for a in against if a not in COMPARATORS]
    if bad:
        raise ValueError(f"unknown comparator(s): {', '.join(bad)}; choose from {', '.join(COMPARATORS)}")
    return tuple(against)


def min_comparator(log_t, against=("hpy_2022", "patel_307")):
    """log of the smallest of the named comparator bounds at height exp(log_t)."""
    with mp.workdps(30):
        L = mpf(log_t)
        return float(min(COMPARATORS[a][0](L) for a in _resolve(against)))


def _comparator_fn(against):
    names = _resolve(against)

    def g(L):
        return min(COMPARATORS[a][0](L) for a in names)

    start = max(COMPARATORS[a][1]() for a in names)
    return g, start


def _bisect(d, lo, hi):
    """Root of a non-increasing d on [lo, hi] with d(lo) > 0 >= d(hi)."""
    while hi - lo > TOL / 4:
        mid = (lo + hi) / 2
        if d(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def crossover_constant(A, against="vdc_0618", precision=DEFAULT_PRECISION, horizon=10**6):
    """Smallest log t past which A t^(27/164) <= comparator, for a constant A."""
    g, start = _comparator_fn(against)
    with mp.workdps(precision):
        logA = mp.log(mpf(str(A)))

        def d(L):
            return logA + THETA * L - g(L)

        lo = start
        if d(lo) <= 0:
            if d(mpf(horizon)) <= 0:
                raise NoCrossover(f"{A} t^(27/164) is below {against} everywhere on its range")
            return float(lo)
        step = mpf(1)
        hi = lo + step
        while d(hi) > 0:
            lo, step = hi, step * 2
            hi = lo + step
            if hi > horizon:
                raise NoCrossover(f"{A} t^(27/164) stays above {against} up to log t = {horizon}")
        # d is non-increasing against every comparator, so the root is unique
        return float(_bisect(d, lo, hi))


def crossover_scheme(scheme, against=("hpy_2022", "patel_307"), precision=DEFAULT_PRECISION):
    """Smallest log t past which the scheme's bound is <= the comparator.

    Below t_start the scheme gives no bound, so the result is at least
    t_start.  Raises NoCrossover if the tail row never gets below.
    """
    g, start = _comparator_fn(against)
    with mp.workdps(precision):
        tail = scheme.rows[-1]
        tail_logA = mp.log(tail.A.value)
        # at L -> oo the difference tends to log A - log(307.098) when patel is present, else -oo
        far = mpf(10**6)
        if tail_logA + THETA * far - g(far) > 0:
            raise NoCrossover("the scheme never gets below the comparator")
        for row in reversed(scheme.rows):
            logA = mp.log(row.A.value)

            def d(L, logA=logA):
                return logA + THETA * L - g(L)

            a = max(mpf(str(row.log_t0)), start)
            b = far if row.log_t1.is_infinite() else mpf(str(row.log_t1))
            if b <= a:
                continue
            if d(a) <= 0:
                continue
            if d(b) > 0:
                return float(b)
            return float(_bisect(d, a, b))
        return float(mpf(str(scheme.t_start)))


def crossover(bound, against="vdc_0618", precision=DEFAULT_PRECISION):
    """Dispatch on a constant (number or string) or a Scheme."""
    if hasattr(bound, "rows"):
        return crossover_scheme(bound, against, precision)
    return crossover_constant(bound, against, precision)

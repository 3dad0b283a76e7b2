"""Brute-force checks of the exponential-sum inequalities the bound relies on.

Everything here runs at desk scale (t up to about 10^6, sums up to 10^7
terms).  Sums are evaluated in double precision with a per-term error
estimate, or with mpmath when a precision is requested.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import mpmath
import numpy as np
from mpmath import mp, mpf
from scipy import integrate

from .errors import EnvelopeMissing, MonotonicityViolation, PreconditionFailed, SizeExceeded
from .exponent import deriv_constants
from .rigor import FloatBackend

MAX_TERMS = 10**7
_U = 2.0**-53
_F = FloatBackend()


class PhaseKind(str, enum.Enum):
    LOG_ZETA = "LOG_ZETA"
    DIFFERENCED = "DIFFERENCED"
    CUSTOM = "CUSTOM"


@dataclass
class PhaseSpec:
    """Phase f on the integers a < n <= a + N.

    LOG_ZETA is f(x) = -(t / 2pi) log x and DIFFERENCED is
    g_r(x) = f(x + r) - f(x) for that f.  CUSTOM takes ``func`` (vectorised
    over numpy arrays) and, for envelope screening, ``deriv(k, x)`` returning
    f^(k)(x).
    """

    kind: PhaseKind
    a: int
    N: int
    t: float = 0.0
    r: int = 0
    envelopes: dict = field(default_factory=dict)  # k -> (lambda_k, h)
    func: Optional[Callable] = None
    deriv: Optional[Callable] = None

    def __post_init__(self):
        self.kind = PhaseKind(self.kind)
        if self.N < 0:
            raise ValueError("N must be non-negative")
        if self.kind is PhaseKind.DIFFERENCED and self.r < 1:
            raise PreconditionFailed("differenced phase needs r >= 1")
        if self.kind is PhaseKind.CUSTOM and self.func is None:
            raise ValueError("CUSTOM phase needs func")
        if self.kind is PhaseKind.CUSTOM and self.envelopes and self.deriv is not None:
            self._screen_envelopes()

    @property
    def c(self):
        return self.t / (2 * math.pi)

    def _screen_envelopes(self):
        xs = np.linspace(self.a, self.a + self.N, 66)[1:-1]
        for k, (lam, h) in self.envelopes.items():
            v = np.abs(np.array([self.deriv(k, float(x)) for x in xs]))
            if np.any(v < lam * (1 - 1e-12)) or np.any(v > h * lam * (1 + 1e-12)):
                raise ValueError(f"supplied envelope at order {k} fails on sample points")

    def values(self, n):
        """f at a float array n, plus a bound on the absolute error of each value."""
        n = np.asarray(n, dtype=float)
        if self.kind is PhaseKind.LOG_ZETA:
            v = -self.c * np.log(n)
        elif self.kind is PhaseKind.DIFFERENCED:
            v = -self.c * np.log1p(self.r / n)
        else:
            v = np.asarray(self.func(n), dtype=float)
            if v.shape != n.shape:
                v = np.broadcast_to(v, n.shape).astype(float)
        return v, 8 * _U * np.abs(v)

    def value_mp(self, n):
        n = mpf(n)
        if self.kind is PhaseKind.LOG_ZETA:
            return -mpf(self.t) / (2 * mp.pi) * mp.log(n)
        if self.kind is PhaseKind.DIFFERENCED:
            return -mpf(self.t) / (2 * mp.pi) * mp.log1p(self.r / n)
        return mpf(self.func(n))

    def derivative(self, k, x):
        """f^(k)(x) for the built-in kinds."""
        c = self.c
        if self.kind is PhaseKind.LOG_ZETA:
            return -c * (-1) ** (k - 1) * math.factorial(k - 1) / x**k
        if self.kind is PhaseKind.DIFFERENCED:
            s = -c * (-1) ** (k - 1) * math.factorial(k - 1)
            return s / (x + self.r) ** k - s / x**k
        if self.deriv is None:
            raise EnvelopeMissing(k)
        return self.deriv(k, x)

    def envelope(self, k):
        """(lambda_k, h) on (a, a+N]; computed from the endpoints for the built-in kinds."""
        if k in self.envelopes:
            return self.envelopes[k]
        if self.kind is PhaseKind.CUSTOM:
            raise EnvelopeMissing(k)
        if self.a < 1:
            raise EnvelopeMissing(k)
        # |f^(k)| is decreasing in x for both kinds, so sup at a and inf at a + N
        lo = abs(self.derivative(k, self.a + self.N))
        hi = abs(self.derivative(k, self.a))
        return lo, hi / lo


@dataclass
class CheckResult:
    lemma: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    eps: float
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return asdict(self)


def _result(lemma, lhs, rhs, eps, config, **extra):
    margin = rhs - lhs
    return CheckResult(lemma, float(lhs), float(rhs), float(margin), bool(margin >= -eps), float(eps),
                       config, extra)


def _config(phase, **more):
    d = {"kind": phase.kind.value, "t": phase.t, "a": phase.a, "N": phase.N}
    if phase.kind is PhaseKind.DIFFERENCED:
        d["r"] = phase.r
    d.update(more)
    return d


# ---------------------------------------------------------------------------
# sums


def _partial_sums(phase):
    """Complex running sums S(a, L), L = 1..N, in double precision, and an error bound for each."""
    if phase.N > MAX_TERMS:
        raise SizeExceeded(f"N = {phase.N} exceeds {MAX_TERMS}")
    n = np.arange(phase.a + 1, phase.a + phase.N + 1, dtype=float)
    v, dv = phase.values(n)
    frac = v - np.round(v)  # exact in floating point
    z = np.exp(2j * np.pi * frac)
    # phase error times 2pi, plus the error of exp itself
    err = np.cumsum(2 * np.pi * dv + 4 * _U)
    return np.cumsum(z), err


def brute_sum(phase, precision=None):
    """S_f(a, N) = sum over a < n <= a + N of e(f(n)), with an absolute error bound.

    Without ``precision`` the sum is done in doubles and summed with fsum;
    with it, every term and the accumulation run in mpmath at that many
    digits.
    """
    if phase.N > MAX_TERMS:
        raise SizeExceeded(f"N = {phase.N} exceeds {MAX_TERMS}")
    if precision is None:
        n = np.arange(phase.a + 1, phase.a + phase.N + 1, dtype=float)
        v, dv = phase.values(n)
        frac = v - np.round(v)
        z = np.exp(2j * np.pi * frac)
        s = complex(math.fsum(z.real), math.fsum(z.imag))
        err = float(np.sum(2 * np.pi * dv + 4 * _U)) + phase.N * _U
        return s, err
    with mp.workdps(precision + 10):
        re, im = [], []
        for n in range(phase.a + 1, phase.a + phase.N + 1):
            ph = 2 * mp.pi * phase.value_mp(n)
            re.append(mp.cos(ph))
            im.append(mp.sin(ph))
        s = mpmath.mpc(mp.fsum(re), mp.fsum(im))
        return s, phase.N * mpf(10) ** (-precision + 2)


# ---------------------------------------------------------------------------
# Weyl differencing


def check_weyl(phase, q):
    """|S_f(a,N)|^2 <= (N-1+q)(N/q + (2/q) sum_{r<q} (1 - r/q) Re S_{g_r}(a, N-r)).

    g_r is the differenced phase.  The real-part form is the sharper one; the
    modulus form is recorded alongside.
    """
    N = phase.N
    if not 1 <= q <= N:
        raise PreconditionFailed("need 1 <= q <= N")
    S, eS = brute_sum(phase)
    lhs = abs(S) ** 2
    re_acc, abs_acc, err_acc = 0.0, 0.0, 0.0
    for r in range(1, q):
        g = _differenced(phase, r, N - r)
        Sg, eg = brute_sum(g)
        w = 1 - r / q
        re_acc += w * Sg.real
        abs_acc += w * abs(Sg)
        err_acc += w * eg
    pre = N - 1 + q
    rhs = pre * (N / q + 2 / q * re_acc)
    rhs_abs = pre * (N / q + 2 / q * abs_acc)
    eps = 2 * abs(S) * eS + eS**2 + pre * 2 / q * err_acc + 1e-12 * max(1.0, abs(rhs))
    return _result("weyl_differencing", lhs, rhs, eps, _config(phase, q=q), rhs_modulus_form=rhs_abs)


def _differenced(phase, r, N):
    if phase.kind is PhaseKind.LOG_ZETA:
        return PhaseSpec(PhaseKind.DIFFERENCED, phase.a, N, t=phase.t, r=r)
    f = phase.func if phase.kind is PhaseKind.CUSTOM else (lambda x, p=phase: p.values(x)[0])
    return PhaseSpec(PhaseKind.CUSTOM, phase.a, N, func=lambda x, f=f, r=r: f(x + r) - f(x))


# ---------------------------------------------------------------------------
# k-th derivative test


def kth_test_rhs(k, eta, lam, h, N):
    A, B, *_ = deriv_constants(_F, k, eta, h)
    K = 2 ** (k - 1)
    return A * h ** (2 / K) * N * lam ** (1 / (2 * K - 2)) + B * N ** (1 - 2 / K) * lam ** (-1 / (2 * K - 2))


def check_kth_test(phase, k, eta):
    """|S_f(a,N)| against A_k h^(2/K) N lambda^(1/(2K-2)) + B_k N^(1-2/K) lambda^(-1/(2K-2)).

    Also checks the running maximum over L <= N, which the same right side
    bounds because it grows with N and the envelopes hold on subintervals.
    """
    if k not in (3, 4, 5):
        raise PreconditionFailed("k must be 3, 4 or 5")
    lam, h = phase.envelope(k)
    rhs = kth_test_rhs(k, eta, lam, h, phase.N)
    sums, errs = _partial_sums(phase)
    lhs = abs(sums[-1]) if phase.N else 0.0
    running = float(np.max(np.abs(sums))) if phase.N else 0.0
    eps = float(errs[-1]) + 1e-12 * rhs if phase.N else 1e-12 * rhs
    res = _result(f"kth_derivative_test_k{k}", lhs, rhs, eps, _config(phase, k=k, eta=eta, lam=lam, h=h),
                  running_max=running, running_margin=rhs - running)
    res.passed = res.passed and rhs - running >= -eps
    return res


# ---------------------------------------------------------------------------
# B process and stationary phase

STAT_CONST = 2 * 3 ** (2 / 3) / math.pi ** (2 / 3)


def _b_geometry(phase):
    """Derivative data of a differenced phase on [a, b] with b = a + N."""
    if phase.kind is not PhaseKind.DIFFERENCED:
        raise PreconditionFailed("B process check needs a DIFFERENCED phase")
    a, b = phase.a, phase.a + phase.N
    if a < 1 or b <= a:
        raise PreconditionFailed("need 1 <= a < b")
    d1 = lambda x: phase.derivative(1, x)
    beta, alpha = d1(a), d1(b)
    if not beta > alpha:
        raise MonotonicityViolation("g_r' is not decreasing on [a, b]")
    lam2, h2 = phase.envelope(2)
    lam3, h3 = phase.envelope(3)
    return a, b, alpha, beta, lam2, h2, lam3, h3


def _x_nu(phase, nu):
    r, t = phase.r, phase.t
    return 0.5 * math.sqrt(r * r + 2 * t * r / (math.pi * nu)) - r / 2


def _dual_term(phase, nu):
    x = _x_nu(phase, nu)
    g = phase.values(np.array([x]))[0][0]
    amp = abs(phase.derivative(2, x)) ** -0.5
    ph = g - nu * x - 0.125
    return amp * complex(math.cos(2 * math.pi * ph), math.sin(2 * math.pi * ph)), x


def check_b_process(phase):
    """Residual of the Poisson step against 4.686/sqrt(l2) + c h2 h3^(1/3) (b-a) l3^(1/3) + (5/pi) log(beta-alpha+2) + 6."""
    a, b, alpha, beta, lam2, h2, lam3, h3 = _b_geometry(phase)
    S, eS = brute_sum(phase)
    dual = 0j
    nus = range(math.floor(alpha) + 1, math.floor(beta) + 1)
    for nu in nus:
        dual += _dual_term(phase, nu)[0]
    resid = abs(S - dual)
    rhs = (4.686 / math.sqrt(lam2) + STAT_CONST * h2 * h3 ** (1 / 3) * (b - a) * lam3 ** (1 / 3)
           + 5 / math.pi * math.log(beta - alpha + 2) + 6)
    eps = eS + len(nus) * 1e-9 * max(1.0, lam2 ** -0.5) + 1e-12 * rhs
    return _result("poisson_summation", resid, rhs, eps,
                   _config(phase, b=b, alpha=alpha, beta=beta, lam2=lam2, h2=h2, lam3=lam3, h3=h3),
                   dual_terms=len(nus))


def check_stationary_phase(phase, nu):
    """Integral of e(g(x) - nu x) over [a, b] against its stationary-phase value.

    Error allowed: c h3^(1/3) l3^(1/3) / l2 + (1/pi)(1/|F'(a)| + 1/|F'(b)|)
    with F = g - nu x.  This is the lambda_3^(+1/3) form.
    """
    a, b, alpha, beta, lam2, h2, lam3, h3 = _b_geometry(phase)
    if not alpha < nu <= beta:
        raise PreconditionFailed("nu must lie in (alpha, beta]")
    fa, fb = beta - nu, alpha - nu
    if fa == 0 or fb == 0:
        raise PreconditionFailed("stationary point at an endpoint")
    main, x = _dual_term(phase, nu)

    def F(x):
        return phase.values(np.array([x]))[0][0] - nu * x

    # the phase turns about (beta - alpha)(b - a) times; give quad enough subintervals
    limit = max(200, int(4 * (beta - alpha) * (b - a)) + 50)
    opts = dict(limit=limit, epsabs=1e-11, epsrel=1e-11, points=[x])
    re, ere = integrate.quad(lambda x: math.cos(2 * math.pi * F(x)), a, b, **opts)
    im, eim = integrate.quad(lambda x: math.sin(2 * math.pi * F(x)), a, b, **opts)
    lhs = abs(complex(re, im) - main)
    rhs = STAT_CONST * h3 ** (1 / 3) * lam3 ** (1 / 3) / lam2 + (1 / math.pi) * (1 / abs(fa) + 1 / abs(fb))
    eps = ere + eim + 1e-9 * max(1.0, lam2 ** -0.5)
    return _result("stationary_phase", lhs, rhs, eps, _config(phase, b=b, nu=nu, lam2=lam2, lam3=lam3, h3=h3),
                   x_nu=x)


# ---------------------------------------------------------------------------
# randomized suite

LEMMAS = ("weyl", "kth3", "kth4", "kth5", "stationary", "poisson")


def _loguniform(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def _sample(lemma, rng):
    t = _loguniform(rng, 1e3, 1e6)
    if lemma == "weyl":
        N = int(rng.integers(2, 2001))
        a = int(rng.integers(1, 5001))
        q = int(rng.integers(1, min(N, 40) + 1))
        return check_weyl(PhaseSpec(PhaseKind.LOG_ZETA, a, N, t=t), q)
    if lemma.startswith("kth"):
        k = int(lemma[3])
        a = int(rng.integers(10, 5001))
        N = int(rng.integers(1, 10**4 + 1))
        eta = _loguniform(rng, 0.1, 5.0)
        return check_kth_test(PhaseSpec(PhaseKind.LOG_ZETA, a, N, t=t), k, eta)
    r = int(rng.integers(1, 21))
    a = int(rng.integers(50, 3001))
    N = int(rng.integers(5, 201))
    phase = PhaseSpec(PhaseKind.DIFFERENCED, a, N, t=t, r=r)
    if lemma == "poisson":
        return check_b_process(phase)
    _, b, alpha, beta, *_ = _b_geometry(phase)
    nus = list(range(math.floor(alpha) + 1, math.floor(beta) + 1))
    nus = [v for v in nus if alpha < v < beta]
    if not nus:
        # pick a non-integer frequency when no integer lies strictly inside
        nu = alpha + (beta - alpha) * float(rng.uniform(0.1, 0.9))
    else:
        nu = nus[int(rng.integers(0, len(nus)))]
    return check_stationary_phase(phase, nu)


def run_suite(trials=200, seed=42, lemmas=LEMMAS):
    """``trials`` random configurations per lemma; returns {lemma: [CheckResult]}.

    Each result carries ``trial_seed`` so a failure can be replayed alone
    with :func:`replay`.
    """
    out = {}
    for lemma in lemmas:
        i = LEMMAS.index(lemma)
        res = []
        for j, child in enumerate(_children(seed, i, trials)):
            r = _sample(lemma, np.random.default_rng(child))
            r.config["trial_seed"] = [seed, i, j]
            res.append(r)
        out[lemma] = res
    return out


def _children(seed, lemma_index, trials):
    return [np.random.SeedSequence([seed, lemma_index, j]) for j in range(trials)]


def replay(seed, lemma_index, trial):
    """Re-run one trial of :func:`run_suite`."""
    r = _sample(LEMMAS[lemma_index], np.random.default_rng(np.random.SeedSequence([seed, lemma_index, trial])))
    r.config["trial_seed"] = [seed, lemma_index, trial]
    return r

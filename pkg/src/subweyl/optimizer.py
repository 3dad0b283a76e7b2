"""Parameter search per height interval and interval schemes.

The search runs scipy's differential evolution on the float objective from
``pipeline``; only the champion is re-evaluated with interval arithmetic and
reported.  Coordinates are log(h - 1) for h1, h2, linear for eta1, eta2 and
log(theta) for the thetas.  Candidates are rounded to 6 significant digits
before evaluation, so the parameter row that is certified is exactly the
one that was scored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Optional

import numpy as np
from scipy.optimize import differential_evolution
from scipy.stats import qmc

from .errors import (AdmissibilityError, DomainError, NoAdmissiblePoint, PrecisionExhausted,
                     SchemeValidationError, SubweylError)
from .pipeline import (DEFAULT_CONVENTIONS, INF, TAIL_ROW_875, TUNING, ParamSet, _dec, assemble,
                       objective)
from .rigor import UpperScalar

THETA = 27 / 164
SIG_DIGITS = 6
POPSIZE = 40
MAX_TOTAL_EVALS = 10**6

# natural-coordinate box; h's are searched as log(h - 1), thetas as log(theta)
DEFAULT_BOX = {
    "h1": (1.0001, 1.5),
    "h2": (1.00001, 1.5),
    "eta1": (0.05, 8.0),
    "eta2": (0.05, 8.0),
    "theta1": (1e-3, 1e3),
    "theta2": (0.1, 1e11),
    "theta3": (1e-26, 1e3),
}
_LOG_H = ("h1", "h2")
_LOG = ("theta1", "theta2", "theta3")
PENALTIES = ("graded", "constant")
_PENALTY = 1e30


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for one interval search.

    ``budget`` counts objective evaluations per interval; ``restarts`` splits
    it across independent runs with derived seeds.  ``auto_tolerance`` and
    ``min_width`` only matter to AUTO schemes: a row is accepted when its A is
    within ``auto_tolerance`` (relative) of the tail row's A, or when it is
    already ``min_width`` wide in log t.
    """

    budget: int = 6000
    seed: int = 0
    box: dict = field(default_factory=lambda: dict(DEFAULT_BOX))
    restarts: int = 1
    penalty: str = "graded"
    popsize: int = POPSIZE
    conventions: object = DEFAULT_CONVENTIONS
    precision: Optional[int] = None
    auto_tolerance: float = 0.01
    min_width: float = 0.5
    comparator_cap: bool = True
    max_total_evals: int = MAX_TOTAL_EVALS

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.penalty not in PENALTIES:
            raise ValueError(f"penalty must be one of {PENALTIES}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        for name in TUNING:
            lo, hi = self.box[name]
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"box bounds for {name} must be finite and ordered")
            if name in _LOG_H and lo <= 1:
                raise ValueError(f"box for {name} must lie above 1")
            if name not in _LOG_H and lo <= 0:
                raise ValueError(f"box for {name} must be positive")


def _to_coord(name, v):
    v = float(v)
    if name in _LOG_H:
        return math.log(v - 1)
    if name in _LOG:
        return math.log(v)
    return v


def _from_coord(name, x):
    if name in _LOG_H:
        return 1 + math.exp(x)
    if name in _LOG:
        return math.exp(x)
    return x


def _fmt(v):
    # 6 significant digits, exactly as written to scheme files
    return Decimal(f"{v:.{SIG_DIGITS}g}")


def coord_bounds(box):
    return [(_to_coord(n, box[n][0]), _to_coord(n, box[n][1])) for n in TUNING]


def decode(x, log_t0, log_t1):
    vals = {n: _fmt(_from_coord(n, xi)) for n, xi in zip(TUNING, x)}
    return ParamSet(log_t0=_dec(log_t0), log_t1=_dec(log_t1), **vals)


def encode(params, bounds):
    x = np.array([_to_coord(n, getattr(params, n)) for n in TUNING])
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    return np.clip(x, lo, hi)


# predicates in the order pipeline._check tests them; earlier failures score worse
_PRED_ORDER = ("h1", "h2", "eta1", "eta2", "theta1", "theta2", "theta3", "t1 >", "t0 >=", "q0",
               "1 - theta1", "1 - h1", "h0 > 1", "h0 <=", "1 - (h2", "theta1 - 1", "K-count")


def _penalty(pred, mode):
    if mode == "constant":
        return _PENALTY
    for i, prefix in enumerate(_PRED_ORDER):
        if pred.startswith(prefix):
            return _PENALTY * (len(_PRED_ORDER) - i)
    return _PENALTY * (len(_PRED_ORDER) + 1)


class EvalCounter:
    """Shared evaluation tally; raises once the global cap would be passed."""

    def __init__(self, cap=MAX_TOTAL_EVALS):
        self.cap = cap
        self.count = 0

    def remaining(self):
        return self.cap - self.count


class _Objective:
    def __init__(self, log_t0, log_t1, config, counter):
        self.L0, self.L1 = _dec(log_t0), _dec(log_t1)
        self.conv = config.conventions
        self.mode = config.penalty
        self.counter = counter

    def __call__(self, x):
        self.counter.count += 1
        p = decode(x, self.L0, self.L1)
        try:
            v = objective(p, self.conv)
        except AdmissibilityError as exc:
            return _penalty(exc.predicate, self.mode)
        except (DomainError, PrecisionExhausted, OverflowError, ZeroDivisionError):
            return _PENALTY * 100
        return v if math.isfinite(v) else _PENALTY * 100


@dataclass(frozen=True)
class IntervalResult:
    params: ParamSet
    A: UpperScalar
    evaluations: int
    float_A: float


def _initial_population(bounds, seeds, npop, rng_seed):
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    lhs = qmc.LatinHypercube(d=len(bounds), seed=rng_seed).random(npop)
    pop = lo + lhs * (hi - lo)
    for i, s in enumerate(seeds[:npop]):
        pop[i] = s
    return pop


def _certify(candidates, log_t0, log_t1, config):
    """First candidate (best float score first) that certifies with intervals."""
    for x, score in candidates:
        if score >= _PENALTY:
            break
        p = decode(x, log_t0, log_t1)
        try:
            rep = assemble(p, config.conventions, config.precision)
        except (AdmissibilityError, DomainError, PrecisionExhausted):
            continue
        return p, rep.A_total, score
    return None


def optimize_interval(log_t0, log_t1, config=SearchConfig(), seeds=(), counter=None):
    """Best admissible parameter row found for [exp(log_t0), exp(log_t1)).

    ``seeds`` are ParamSets (only their tuning parameters matter) placed in the
    initial population ahead of the published tail row and the Latin
    hypercube fill.  With ``budget`` below the population size only the
    seeds are scored.
    """
    L0, L1 = _dec(log_t0), _dec(log_t1)
    if not (L1.is_infinite() or L1 > L0):
        raise ValueError("need log_t0 < log_t1")
    counter = counter or EvalCounter(config.max_total_evals)
    bounds = coord_bounds(config.box)
    seed_x = [encode(s, bounds) for s in tuple(seeds) + (TAIL_ROW_875,)]
    f = _Objective(L0, L1, config, counter)
    ss = np.random.SeedSequence([config.seed, int(L0 * 1000), 2**40 if L1.is_infinite() else int(L1 * 1000)])
    run_seeds = ss.spawn(config.restarts)
    per_run = max(1, config.budget // config.restarts)
    before = counter.count
    pool = []
    for rs in run_seeds:
        n = min(per_run, counter.remaining())
        if n <= 0:
            break
        if n < config.popsize:
            for x in seed_x[:n]:
                pool.append((x, f(x)))
            continue
        init = _initial_population(bounds, seed_x, config.popsize, np.random.default_rng(rs.spawn(1)[0]))
        res = differential_evolution(
            f, bounds, seed=np.random.default_rng(rs), init=init, maxiter=n // config.popsize - 1,
            polish=False, tol=0, atol=0, updating="deferred", vectorized=False,
        )
        pool.extend(zip(res.population, res.population_energies))
    # stable sort keeps candidate order for ties, so results do not depend on anything but the seed
    pool.sort(key=lambda item: item[1])
    got = _certify(pool, L0, L1, config)
    if got is None:
        raise NoAdmissiblePoint(
            f"no admissible parameters found on [exp({L0}), {'oo' if L1.is_infinite() else f'exp({L1})'})",
            (L0, L1),
        )
    p, A, fa = got
    return IntervalResult(p, A, counter.count - before, fa)


# ---------------------------------------------------------------------------
# schemes


@dataclass(frozen=True)
class SchemeRow:
    params: ParamSet
    A: UpperScalar

    @property
    def log_t0(self):
        return self.params.log_t0

    @property
    def log_t1(self):
        return self.params.log_t1


@dataclass
class Scheme:
    rows: list
    t_start: Decimal  # log of the first height
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t_start = _dec(self.t_start)
        self.validate()

    def validate(self):
        if not self.rows:
            raise SchemeValidationError("scheme has no rows")
        if self.rows[0].log_t0 != self.t_start:
            raise SchemeValidationError("first row must start at t_start")
        for i, r in enumerate(self.rows):
            if not (r.log_t1.is_infinite() or r.log_t1 > r.log_t0):
                raise SchemeValidationError(f"row {i} is empty or reversed: [{r.log_t0}, {r.log_t1}]")
            if i + 1 < len(self.rows):
                if r.log_t1.is_infinite():
                    raise SchemeValidationError(f"row {i} is infinite but not last")
                if self.rows[i + 1].log_t0 != r.log_t1:
                    raise SchemeValidationError(f"rows {i} and {i + 1} do not tile")
        if not self.rows[-1].log_t1.is_infinite():
            raise SchemeValidationError("last row must extend to infinity")

    @property
    def global_A(self):
        return max((r.A for r in self.rows), key=lambda a: a.value)

    def row_at(self, log_t):
        """Row covering height exp(log_t), or None below t_start."""
        L = _dec(log_t)
        for r in self.rows:
            if r.log_t0 <= L and (r.log_t1.is_infinite() or L < r.log_t1):
                return r
        return None


def comparator_ratio(log_t):
    """min(hpy_2022, patel_307) / t^(27/164), the cap a row must beat at its left end."""
    from .crossover import min_comparator

    return math.exp(min_comparator(float(log_t), ("hpy_2022", "patel_307")) - THETA * float(log_t))


def _explicit_scheme(t_start, breakpoints, config, counter):
    cuts = sorted({_dec(b) for b in breakpoints if _dec(b) > t_start})
    edges = [t_start] + cuts + [INF]
    rows, prev = [], None
    for a, b in zip(edges, edges[1:]):
        res = optimize_interval(a, b, config, seeds=(prev,) if prev else (), counter=counter)
        rows.append(SchemeRow(res.params, res.A))
        prev = res.params
    return rows


TAIL_START = Decimal(875)


def _auto_scheme(t_start, config, counter, log):
    tail_start = max(t_start, TAIL_START)
    tail = optimize_interval(tail_start, INF, config, counter=counter)
    if log:
        log(f"tail [{tail_start}, oo): A = {tail.A.decimal_string(8)}")
    rows = [SchemeRow(tail.params, tail.A)]
    if t_start >= tail_start:
        return rows
    limit = float(tail.A.value) * (1 + config.auto_tolerance)
    min_w = Decimal(str(config.min_width))

    def accept(res, a):
        A = float(res.A.value)
        if A > limit:
            return False
        return not config.comparator_cap or A <= comparator_ratio(a)

    def solve(a, b, seed_params):
        res = optimize_interval(a, b, config, seeds=seed_params, counter=counter)
        if accept(res, a) or b - a <= min_w or counter.remaining() < 2 * config.budget:
            if log:
                log(f"row  [{a}, {b}): A = {res.A.decimal_string(8)}")
            return [SchemeRow(res.params, res.A)]
        mid = _round_mid(a, b)
        return solve(a, mid, (res.params,)) + solve(mid, b, (res.params,))

    return solve(t_start, tail_start, (tail.params,)) + rows


def _round_mid(a, b):
    # keep breakpoints short decimals so scheme files stay readable
    mid = (a + b) / 2
    q = Decimal(1) if b - a >= 4 else Decimal("0.01")
    m = mid.quantize(q)
    return m if a < m < b else mid


def build_scheme(t_start, breakpoints="AUTO", config=SearchConfig(), log=None):
    """Tile [exp(t_start), oo) with optimized rows; ``t_start`` is a log height."""
    t_start = _dec(t_start)
    if t_start < Decimal("5.2983"):  # log 200 = 5.29831...
        raise ValueError("t_start must be at least log 200")
    counter = EvalCounter(config.max_total_evals)
    if isinstance(breakpoints, str):
        if breakpoints.upper() != "AUTO":
            raise ValueError("breakpoints must be a list or 'AUTO'")
        rows = _auto_scheme(t_start, config, counter, log)
    else:
        rows = _explicit_scheme(t_start, breakpoints, config, counter)
    meta = {"seed": config.seed, "budget": config.budget, "evaluations": counter.count}
    return Scheme(rows, t_start, meta)

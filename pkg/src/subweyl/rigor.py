"""Directed-rounding arithmetic.

Every quantity the certification pipeline emits is an interval enclosure
computed with mpmath's interval context (outward rounding on every
operation).  ``UpperScalar`` is the one-sided view of such an enclosure: an
``UP`` value is never below the exact real it stands for, a ``DOWN`` value
never above.

The same pipeline code also runs on plain floats (``FloatBackend``) so the
parameter search can evaluate candidates cheaply; only interval results are
ever reported as certified.
"""

from __future__ import annotations

import ast
import contextlib
import enum
import math
import os
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from mpmath import iv, mp, mpf
from mpmath.libmp import round_ceiling, round_floor, to_float

from .errors import DomainError, PrecisionExhausted

DEFAULT_PRECISION = 60
MIN_PRECISION = 30
MAX_PRECISION = 480


def default_precision():
    env = os.environ.get("ZETA_CERTIFY_PRECISION")
    if env:
        p = int(env)
        if p < MIN_PRECISION:
            raise ValueError(f"ZETA_CERTIFY_PRECISION must be >= {MIN_PRECISION}")
        return p
    return DEFAULT_PRECISION


class Direction(str, enum.Enum):
    UP = "UP"
    DOWN = "DOWN"


@dataclass(frozen=True)
class UpperScalar:
    """A real number together with the side from which it bounds the truth."""

    value: mpf
    direction: Direction = Direction.UP
    precision_digits: int = DEFAULT_PRECISION

    def __post_init__(self):
        if self.precision_digits < MIN_PRECISION:
            raise ValueError(f"precision_digits must be >= {MIN_PRECISION}")

    @classmethod
    def from_interval(cls, x, direction=Direction.UP, precision=DEFAULT_PRECISION):
        lo, hi = endpoints(x)
        return cls(hi if direction is Direction.UP else lo, Direction(direction), precision)

    def __float__(self):
        # round away from the truth so the float keeps the guarantee
        rnd = round_ceiling if self.direction is Direction.UP else round_floor
        return to_float(self.value._mpf_, rnd=rnd)

    def __le__(self, other):
        return self.value <= _as_mpf(other)

    def __lt__(self, other):
        return self.value < _as_mpf(other)

    def __ge__(self, other):
        return self.value >= _as_mpf(other)

    def __gt__(self, other):
        return self.value > _as_mpf(other)

    def decimal_string(self, digits=None):
        return _mpf_to_str(self.value, digits or self.precision_digits)

    def rounded(self, sig=6):
        """Round to ``sig`` significant digits away from the exact value."""
        return round_directed(self.value, sig, self.direction)

    def to_json(self):
        return {"value": _mpf_to_str(self.value, self.precision_digits), "direction": self.direction.value}


def _as_mpf(x):
    if isinstance(x, UpperScalar):
        return x.value
    if isinstance(x, Decimal):
        return mpf(str(x))
    return mpf(x)


def _mpf_to_str(x, digits):
    with mp.workdps(digits + 5):
        return mp.nstr(x, digits, strip_zeros=True)


def round_directed(x, sig, direction):
    """Decimal with ``sig`` significant digits, rounded up (UP) or down (DOWN)."""
    if x == 0:
        return Decimal(0)
    with mp.workdps(max(mp.dps, sig + 20)):
        exp10 = int(mp.floor(mp.log10(abs(x)))) - sig + 1
        scaled = x / mpf(10) ** exp10
        n = int(mp.ceil(scaled)) if direction is Direction.UP else int(mp.floor(scaled))
        # the log10 guess can be off by one at exact powers of ten
        if abs(n) >= 10**sig:
            exp10 += 1
            scaled = x / mpf(10) ** exp10
            n = int(mp.ceil(scaled)) if direction is Direction.UP else int(mp.floor(scaled))
    return Decimal(n).scaleb(exp10)


def endpoints(x):
    """(lower, upper) of an mpmath interval as plain mpf numbers."""
    lo, hi = x._mpi_
    return mp.make_mpf(lo), mp.make_mpf(hi)


def width(x):
    lo, hi = endpoints(x)
    with mp.workdps(mp.dps + 10):
        return hi - lo


@contextlib.contextmanager
def _iv_dps(digits):
    # mpmath's interval context has no workdps(); precision is global to it
    saved = iv.prec
    iv.dps = digits
    try:
        yield
    finally:
        iv.prec = saved


# ---------------------------------------------------------------------------
# backends: the same formula code runs on intervals (certified) or floats (search)


class IntervalBackend:
    """Outward-rounded interval arithmetic at a fixed number of decimal digits."""

    rigorous = True

    def __init__(self, precision=None):
        self.precision = precision or default_precision()
        if self.precision < MIN_PRECISION:
            raise ValueError(f"precision must be >= {MIN_PRECISION} digits")

    def context(self):
        return _iv_dps(self.precision)

    @property
    def pi(self):
        return iv.pi

    def num(self, x):
        if isinstance(x, (Decimal, str)):
            return iv.mpf(str(x))
        if isinstance(x, Fraction):
            return iv.mpf(x.numerator) / x.denominator
        if isinstance(x, int):
            return iv.mpf(x)
        if isinstance(x, float):
            # floats are binary-exact; accepting them is fine, converting decimals through them is not
            return iv.mpf(x)
        return x

    def q(self, p, d=1):
        return iv.mpf(p) / d

    def sqrt(self, x):
        lo, hi = endpoints(x)
        if hi < 0:
            raise DomainError("sqrt of a negative value")
        if lo < 0:
            raise PrecisionExhausted("sqrt argument straddles 0")
        return iv.sqrt(x)

    def log(self, x):
        lo, hi = endpoints(x)
        if hi <= 0:
            raise DomainError("log of a non-positive value")
        if lo <= 0:
            raise PrecisionExhausted("log argument straddles 0")
        return iv.log(x)

    def exp(self, x):
        return iv.exp(x)

    def div(self, x, y):
        lo, hi = endpoints(y)
        if lo <= 0 <= hi:
            raise PrecisionExhausted("denominator enclosure contains 0")
        return x / y

    def pow(self, x, y):
        """x**y for x > 0 and real y; integer y also allows x <= 0."""
        if isinstance(y, int):
            return x**y
        ylo, yhi = endpoints(y)
        if ylo == yhi and ylo == int(ylo):
            return x ** int(ylo)
        return iv.exp(y * self.log(x))

    def floor(self, x):
        lo, hi = endpoints(x)
        a, b = int(mp.floor(lo)), int(mp.floor(hi))
        if a != b:
            raise PrecisionExhausted("floor of an enclosure that crosses an integer")
        return a

    def ceil(self, x):
        lo, hi = endpoints(x)
        a, b = int(mp.ceil(lo)), int(mp.ceil(hi))
        if a != b:
            raise PrecisionExhausted("ceil of an enclosure that crosses an integer")
        return a

    def sign(self, x):
        """+1 / -1 when the sign is certain, 0 when the enclosure straddles zero."""
        lo, hi = endpoints(x)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        return 0

    def upper(self, x):
        return endpoints(x)[1]

    def lower(self, x):
        return endpoints(x)[0]

    def scalar(self, x, direction=Direction.UP):
        return UpperScalar.from_interval(x, direction, self.precision)


class FloatBackend:
    """IEEE doubles, no guarantees.  Used for the objective in parameter search."""

    rigorous = False
    precision = 15

    def context(self):
        return contextlib.nullcontext()

    pi = math.pi

    def num(self, x):
        return float(x)

    def q(self, p, d=1):
        return p / d

    def sqrt(self, x):
        if x < 0:
            raise DomainError("sqrt of a negative value")
        return math.sqrt(x)

    def log(self, x):
        if x <= 0:
            raise DomainError("log of a non-positive value")
        return math.log(x)

    def exp(self, x):
        try:
            return math.exp(x)
        except OverflowError:
            return math.inf

    def div(self, x, y):
        if y == 0:
            raise PrecisionExhausted("division by zero")
        return x / y

    def pow(self, x, y):
        return x**y

    def floor(self, x):
        return math.floor(x)

    def ceil(self, x):
        return math.ceil(x)

    def sign(self, x):
        return (x > 0) - (x < 0)

    def upper(self, x):
        return x

    def lower(self, x):
        return x

    def scalar(self, x, direction=Direction.UP):
        return x


# ---------------------------------------------------------------------------
# expression evaluation

_FUNCS = {"sqrt", "log", "exp", "ceil", "floor"}
_NAMES = {"pi", "e"}


def parse_expr(expr):
    """Parse an arithmetic expression string into an AST, rejecting anything else."""
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if isinstance(node, (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Load,
                             ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.BitXor,
                             ast.USub, ast.UAdd)):
            continue
        if isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1
                    and not node.keywords):
                raise ValueError(f"unsupported call in expression: {ast.unparse(node)}")
            continue
        if isinstance(node, ast.Name):
            if node.id not in _FUNCS | _NAMES:
                raise ValueError(f"unknown name {node.id!r}")
            continue
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            continue
        raise ValueError(f"unsupported syntax: {type(node).__name__}")
    return tree


def _eval_node(node, src, B):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, src, B)
    if isinstance(node, ast.Constant):
        # use the literal text so 0.1 means one tenth, not its binary neighbour
        text = ast.get_source_segment(src, node)
        return B.num(Decimal(text)) if text is not None else B.num(node.value)
    if isinstance(node, ast.Name):
        return B.pi if node.id == "pi" else B.exp(B.num(1))
    if isinstance(node, ast.UnaryOp):
        v = _eval_node(node.operand, src, B)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call):
        v = _eval_node(node.args[0], src, B)
        fn = node.func.id
        if fn in ("ceil", "floor"):
            return B.num(getattr(B, fn)(v))
        return getattr(B, fn)(v)
    if isinstance(node, ast.BinOp):
        lhs = _eval_node(node.left, src, B)
        rhs = _eval_node(node.right, src, B)
        op = node.op
        if isinstance(op, ast.Add):
            return lhs + rhs
        if isinstance(op, ast.Sub):
            return lhs - rhs
        if isinstance(op, ast.Mult):
            return lhs * rhs
        if isinstance(op, ast.Div):
            return B.div(lhs, rhs)
        return B.pow(lhs, rhs)
    raise ValueError(f"cannot evaluate {ast.dump(node)}")


def enclose(expr, precision=None):
    """Interval enclosure of ``expr`` at ``precision`` digits (no retry)."""
    B = IntervalBackend(precision)
    tree = parse_expr(expr)
    with B.context():
        return _eval_node(tree, expr, B)


def eval_expr(expr, direction=Direction.UP, precision=None, auto_precision=True):
    """Evaluate ``expr`` as a one-sided bound.

    ``expr`` may use + - * / ** (or ^), sqrt, log, exp, ceil, floor, pi and e.
    Decimal literals are taken at face value.  On ``PrecisionExhausted`` the
    working precision is doubled up to 480 digits unless ``auto_precision`` is
    false.
    """
    direction = Direction(direction)
    precision = precision or default_precision()
    return with_precision_retry(
        lambda p: UpperScalar.from_interval(enclose(expr, p), direction, p), precision, auto_precision
    )


def with_precision_retry(fn, precision=None, auto=True):
    """Call ``fn(precision)``, doubling the precision on PrecisionExhausted."""
    p = precision or default_precision()
    while True:
        try:
            return fn(p)
        except PrecisionExhausted:
            if not auto or p * 2 > MAX_PRECISION:
                raise
            p *= 2

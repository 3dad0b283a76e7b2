"""Exponent-pair calculus and the explicit k-th derivative test constants."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, InvariantViolation, PreconditionFailed
from .rigor import Direction, IntervalBackend, UpperScalar, with_precision_retry

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ExponentPair:
    """A van der Corput exponent pair (k, l), kept as exact rationals.

    ``derivation`` is the word of A/B processes applied to reach the pair,
    rightmost letter first, e.g. ``"ABAAAB"``.  It does not take part in
    equality.
    """

    k: Fraction
    l: Fraction
    derivation: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "k", Fraction(self.k))
        object.__setattr__(self, "l", Fraction(self.l))
        if not (0 <= self.k <= HALF <= self.l <= 1):
            raise InvariantViolation(f"({self.k}, {self.l}) violates 0 <= k <= 1/2 <= l <= 1")

    def __iter__(self):
        return iter((self.k, self.l))

    def __str__(self):
        suffix = f" [{self.derivation}]" if self.derivation else ""
        return f"({self.k}, {self.l}){suffix}"


TRIVIAL_PAIR = ExponentPair(0, 1)


def apply_A(p):
    """Weyl differencing: (k, l) -> (k/(2k+2), (k+l+1)/(2k+2))."""
    d = 2 * p.k + 2
    return ExponentPair(p.k / d, (p.k + p.l + 1) / d, "A" + p.derivation)


def apply_B(p):
    """Poisson summation: (k, l) -> (l - 1/2, k + 1/2)."""
    return ExponentPair(p.l - HALF, p.k + HALF, "B" + p.derivation)


def expand_word(word):
    """``"ABA^3B"`` -> ``"ABAAAB"``."""
    out = []
    for letter, power in re.findall(r"([AB])(?:\^(\d+))?", word.replace(" ", "")):
        out.append(letter * int(power or 1))
    expanded = "".join(out)
    if len(expanded) == 0 and word.strip():
        raise ValueError(f"not a word over {{A, B}}: {word!r}")
    return expanded


def apply_word(word, pair=TRIVIAL_PAIR):
    """Apply a process word to ``pair``, rightmost letter first."""
    p = pair
    for letter in reversed(expand_word(word)):
        p = apply_A(p) if letter == "A" else apply_B(p)
    return p


def zeta_exponent(p):
    """Exponent theta with zeta(1/2+it) << t^theta log t obtained from the pair."""
    if p.k + 2 * p.l < Fraction(3, 2):
        raise PreconditionFailed(f"k + 2l = {p.k + 2 * p.l} < 3/2")
    return (2 * p.k + 2 * p.l - 1) / 4


# ---------------------------------------------------------------------------
# k-th derivative test constants


@dataclass(frozen=True)
class DerivTestConstants:
    """Constants of the explicit k-th derivative test at (k, eta, h).

    ``delta_base`` is the closed-form factor of the k = 3 base case;
    ``delta_chain`` lists the factors delta_j, j = 3..k-1, used by the
    recursion that lifts A_j, B_j to level j + 1.
    """

    k: int
    eta: object
    h: object
    A_k: UpperScalar
    B_k: UpperScalar
    lambda0: UpperScalar
    delta_base: UpperScalar
    delta_chain: tuple = ()


def delta_base(B, eta):
    return B.sqrt(B.q(1, 2) + B.sqrt(1 + B.q(3, 8) * B.sqrt(B.pi) * B.pow(eta, B.q(3, 2))) / 2)


def delta_step(B, k, eta):
    """delta_k of the recursion, K = 2^(k-1)."""
    K = 2 ** (k - 1)
    return B.sqrt(
        1 + 2 / B.pow(B.num(2337), 1 - B.q(2, K)) * B.pow(9 * B.pi / 1024 * eta, B.q(1, K))
    )


def lambda_zero(B, eta, h):
    return B.pow(1 / eta + 32 * B.sqrt(eta) * h / (15 * B.sqrt(B.pi)), -3)


def deriv_constants(B, k, eta, h):
    """Backend-generic A_k, B_k and their ingredients.

    Returns ``(A_k, B_k, lambda0, delta_base, [delta_3, ..., delta_{k-1}])``.
    ``h`` is carried unchanged through every level of the recursion.
    """
    if k < 3:
        raise DomainError("k must be >= 3")
    if B.sign(eta) <= 0:
        raise DomainError("eta must be positive")
    if B.sign(h - 1) <= 0:
        raise DomainError("h must exceed 1")
    lam0 = lambda_zero(B, eta, h)
    l3 = B.pow(lam0, B.q(1, 3))
    d3 = delta_base(B, eta)
    A = B.sqrt(
        1 / (eta * h)
        + 32 / (15 * B.sqrt(B.pi)) * B.sqrt(eta + l3)
        + (eta + l3) * l3 / 3
    ) * d3
    Bk = B.sqrt(B.num(32)) / (B.sqrt(B.num(3)) * B.pow(B.pi, B.q(1, 4)) * B.pow(eta, B.q(1, 4))) * d3
    chain = []
    for j in range(3, k):
        # K belongs to the source level j
        K = 2 ** (j - 1)
        dj = delta_step(B, j, eta)
        chain.append(dj)
        A = dj * (
            B.pow(h, -B.q(1, K))
            + B.pow(B.num(2), B.q(19, 12)) * (K - 1) / B.sqrt(B.num((2 * K - 1) * (4 * K - 3))) * B.sqrt(A)
        )
        Bk = dj * B.pow(B.num(2), B.q(3, 2)) * (K - 1) / B.sqrt(B.num((2 * K - 3) * (4 * K - 5))) * B.sqrt(Bk)
    return A, Bk, lam0, d3, chain


def derivative_test_constants(k, eta, h, precision=None):
    """Certified (UP-rounded) A_k and B_k for the k-th derivative test.

    ``eta`` and ``h`` may be anything the interval backend accepts (Decimal,
    decimal string, int, Fraction, or an interval).
    """

    def run(p):
        B = IntervalBackend(p)
        with B.context():
            e, hh = B.num(eta), B.num(h)
            A, Bk, lam0, d3, chain = deriv_constants(B, k, e, hh)
            up = lambda x: B.scalar(x, Direction.UP)
            return DerivTestConstants(
                k=k, eta=eta, h=h, A_k=up(A), B_k=up(Bk), lambda0=up(lam0), delta_base=up(d3),
                delta_chain=tuple(up(d) for d in chain),
            )

    return with_precision_retry(run, precision)

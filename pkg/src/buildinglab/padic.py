"""Finite-precision p-adic scalar arithmetic.

A nonzero value is stored in the normal form ``p**v * u`` with integer
valuation ``v`` and a unit ``u`` coprime to ``p``, tracked modulo ``p**N``.
``N`` is the relative precision, so the value itself is pinned modulo
``p**(v+N)``.  Arithmetic follows interval semantics: every result carries
the weakest surviving absolute precision of its operands, never more.

Zero needs two flavours.  The exact zero is produced only by construction
(``PadicScalar.zero(p)``) or by multiplying with it.  An approximate zero
``O(p**k)`` is what remains when every tracked digit of a sum cancels: the
result is known to vanish modulo ``p**k`` and nothing else is known about
it.  The two behave differently under inversion -- the exact zero raises
``ZeroDivisionError`` while the approximate one raises
:class:`PrecisionExhausted` -- and convergence detection relies on never
confusing "cancelled beyond the tracked window" with "provably zero".

Square roots use a residue search modulo p followed by Hensel lifting and
are only defined for odd p, even valuation and a quadratic-residue unit.
Of the two roots, the one whose residue modulo p is smaller is returned.

All values are immutable; every operation returns a fresh scalar, so
instances can be shared freely across threads.
"""

from __future__ import annotations

import math

__all__ = [
    "DEFAULT_PRECISION",
    "INF",
    "NoSquareRoot",
    "PadicError",
    "PadicScalar",
    "PrecisionExhausted",
    "int_valuation",
]

INF = math.inf

DEFAULT_PRECISION = 32


class PadicError(ArithmeticError):
    """Base class for p-adic arithmetic failures."""


class PrecisionExhausted(PadicError):
    """An operation needed digits that the tracked window no longer holds."""


class NoSquareRoot(PadicError):
    """The value has no square root under the supported conventions."""


def int_valuation(x: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if x == 0:
        raise ValueError("valuation of zero is undefined")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _sqrt_mod_p(a: int, p: int) -> int:
    # Residue search; fine for the small primes this laboratory targets.
    if p > 20011:
        raise NoSquareRoot(f"square roots not supported for p={p}")
    a %= p
    for r in range(1, p):
        if (r * r) % p == a:
            return r
    raise NoSquareRoot(f"{a} is not a quadratic residue mod {p}")


class PadicScalar:
    """One element of Q_p known to finite precision.

    Internal encoding:

    * nonzero:  ``unit != 0``, value = p**v * unit  (unit reduced mod p**N)
    * exact zero: ``unit == 0`` and ``v`` is ``INF``
    * approximate zero O(p**k): ``unit == 0``, ``v == k``, ``N == 0``
    """

    __slots__ = ("p", "v", "unit", "N")

    def __init__(self, p: int, v, unit: int, N: int):
        self.p = p
        self.v = v
        self.unit = unit
        self.N = N

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, p: int) -> "PadicScalar":
        return cls(p, INF, 0, 0)

    @classmethod
    def near_zero(cls, p: int, bound) -> "PadicScalar":
        """A value known only to vanish modulo p**bound."""
        if bound is INF:
            return cls.zero(p)
        return cls(p, int(bound), 0, 0)

    @classmethod
    def one(cls, p: int, N: int = DEFAULT_PRECISION) -> "PadicScalar":
        return cls(p, 0, 1, N)

    @classmethod
    def from_int(cls, x: int, p: int, N: int = DEFAULT_PRECISION) -> "PadicScalar":
        if x == 0:
            return cls.zero(p)
        v = int_valuation(x, p)
        unit = (x // p**v) % p**N
        return cls(p, v, unit, N)

    @classmethod
    def from_unit(cls, p: int, v: int, unit: int, N: int = DEFAULT_PRECISION) -> "PadicScalar":
        unit %= p**N
        if unit % p == 0:
            raise ValueError("unit part must be coprime to p")
        return cls(p, v, unit, N)

    # -- predicates and views ------------------------------------------

    def is_zeroish(self) -> bool:
        """True for the exact zero and for approximate zeros."""
        return self.unit == 0

    def is_exact_zero(self) -> bool:
        return self.unit == 0 and self.v is INF

    def val_floor(self):
        """Best known lower bound for the valuation (INF for exact zero)."""
        return self.v

    def valuation(self) -> int:
        """Exact valuation; refuses to guess for approximate zeros."""
        if self.unit == 0:
            if self.v is INF:
                return INF
            raise PrecisionExhausted(
                f"valuation unknown: value is only known to be O({self.p}^{self.v})"
            )
        return self.v

    def abs_precision(self):
        """The value is pinned modulo p**abs_precision()."""
        if self.unit == 0:
            return self.v
        return self.v + self.N

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: "PadicScalar"):
        if self.p != other.p:
            raise ValueError(f"mixed primes {self.p} and {other.p}")

    def __add__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        p = self.p
        if self.unit == 0:
            if self.v is INF:
                return other
            k = self.v
            if other.unit == 0:
                return PadicScalar.near_zero(p, min(k, other.v))
            if other.v >= k:
                return PadicScalar.near_zero(p, k)
            n2 = min(other.N, k - other.v)
            return PadicScalar(p, other.v, other.unit % p**n2, n2)
        if other.unit == 0:
            return other.__add__(self)
        m = min(self.v + self.N, other.v + other.N)
        vm = min(self.v, other.v)
        width = m - vm
        if width <= 0:
            return PadicScalar.near_zero(p, m)
        mod = p**width
        s = (self.unit * p ** (self.v - vm) + other.unit * p ** (other.v - vm)) % mod
        if s == 0:
            return PadicScalar.near_zero(p, m)
        t = int_valuation(s, p)
        v = vm + t
        n2 = m - v
        return PadicScalar(p, v, (s // p**t) % p**n2, n2)

    def __neg__(self) -> "PadicScalar":
        if self.unit == 0:
            return self
        return PadicScalar(self.p, self.v, (-self.unit) % self.p**self.N, self.N)

    def __sub__(self, other: "PadicScalar") -> "PadicScalar":
        return self.__add__(other.__neg__())

    def __mul__(self, other: "PadicScalar") -> "PadicScalar":
        self._check(other)
        p = self.p
        if self.unit == 0 or other.unit == 0:
            if self.is_exact_zero() or other.is_exact_zero():
                return PadicScalar.zero(p)
            # at least one approximate zero; bounds add (v is the bound
            # for zeroish factors and the exact valuation otherwise)
            return PadicScalar.near_zero(p, self.v + other.v)
        n2 = min(self.N, other.N)
        return PadicScalar(p, self.v + other.v, (self.unit * other.unit) % p**n2, n2)

    def inv(self) -> "PadicScalar":
        if self.unit == 0:
            if self.v is INF:
                raise ZeroDivisionError("inversion of exact zero")
            raise PrecisionExhausted(
                f"cannot invert a value indistinguishable from 0 (O({self.p}^{self.v}))"
            )
        mod = self.p**self.N
        return PadicScalar(self.p, -self.v, pow(self.unit, -1, mod), self.N)

    def shift(self, k: int) -> "PadicScalar":
        """Multiply by the exact power p**k."""
        if self.unit == 0:
            if self.v is INF:
                return self
            return PadicScalar.near_zero(self.p, self.v + k)
        return PadicScalar(self.p, self.v + k, self.unit, self.N)

    def sqrt(self) -> "PadicScalar":
        p = self.p
        if p == 2:
            raise NoSquareRoot("square roots are not supported for p=2")
        if self.unit == 0:
            if self.v is INF:
                return self
            raise PrecisionExhausted("square root of a value indistinguishable from 0")
        if self.v % 2 != 0:
            raise NoSquareRoot("odd valuation has no square root in Q_p")
        u = self.unit
        if pow(u, (p - 1) // 2, p) != 1:
            raise NoSquareRoot(f"unit {u % p} mod {p} is not a quadratic residue")
        r = _sqrt_mod_p(u % p, p)
        r = min(r, p - r)
        k = 1
        while k < self.N:
            k = min(2 * k, self.N)
            mod = p**k
            r = ((r + u * pow(r, -1, mod)) * pow(2, -1, mod)) % mod
        return PadicScalar(p, self.v // 2, r % p**self.N, self.N)

    # -- comparisons and export -----------------------------------------

    def agreement(self, other: "PadicScalar"):
        """Valuation floor of the difference: how deeply the two agree."""
        d = self - other
        return d.val_floor()

    def residue(self, k: int) -> int:
        """Integer congruent to the value modulo p**k (value must be integral)."""
        if self.unit == 0:
            if self.v is INF or self.v >= k:
                return 0
            raise PrecisionExhausted(f"residue mod p^{k} not determined")
        if self.v < 0:
            raise ValueError("value is not integral")
        if self.v >= k:
            return 0
        if self.v + self.N < k:
            raise PrecisionExhausted(f"residue mod p^{k} not determined")
        return (self.p**self.v * self.unit) % self.p**k

    def __eq__(self, other) -> bool:
        # Structural equality of representations, not fuzzy closeness.
        if not isinstance(other, PadicScalar):
            return NotImplemented
        return (self.p, self.v, self.unit, self.N) == (other.p, other.v, other.unit, other.N)

    def __hash__(self):
        return hash((self.p, self.v, self.unit, self.N))

    def __repr__(self) -> str:
        if self.unit == 0:
            if self.v is INF:
                return "0 (exact)"
            return f"O({self.p}^{self.v})"
        return f"{self.p}^{self.v} * {self.unit} (mod {self.p}^{self.N})"

    def to_literal(self) -> str:
        """Compact text form used in JSON reports: ``p^v*u``."""
        if self.unit == 0:
            if self.v is INF:
                return "0"
            return f"O({self.p}^{self.v})"
        return f"{self.p}^{self.v}*{self.unit}"

    @classmethod
    def from_literal(cls, text: str, p: int, N: int = DEFAULT_PRECISION) -> "PadicScalar":
        text = text.strip()
        if text == "0":
            return cls.zero(p)
        if text.startswith("O("):
            inner = text[2:-1]
            base, _, exp = inner.partition("^")
            if int(base) != p:
                raise ValueError(f"literal prime {base} does not match context prime {p}")
            return cls.near_zero(p, int(exp))
        head, _, unit = text.partition("*")
        base, _, exp = head.partition("^")
        if int(base) != p:
            raise ValueError(f"literal prime {base} does not match context prime {p}")
        return cls.from_unit(p, int(exp), int(unit), N)

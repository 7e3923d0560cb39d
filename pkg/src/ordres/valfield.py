"""Exact arithmetic in the totally ramified field Q(pi) with pi**e == p.

An element is stored as ``e`` rational coordinates ``(c_0, ..., c_{e-1})``
standing for ``c_0 + c_1*pi + ... + c_{e-1}*pi**(e-1)``.  Valuations are
normalised so that ``ord(p) == 1`` and ``ord(pi) == 1/e``.  Because the
candidate valuations ``ord_p(c_i) + i/e`` are pairwise distinct modulo 1, the
valuation of an element is exactly the minimum of those candidates.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

from .errors import ContextMismatch, IncompatibleRamification, NegativeValuation

INF = math.inf
MAX_RAMIFICATION = 12

Rational = Union[int, Fraction]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, math.isqrt(n) + 1))


def padic_ord(x: Rational, p: int) -> Union[int, float]:
    """Return the p-adic valuation of a rational number (``INF`` for zero)."""
    x = Fraction(x)
    if x == 0:
        return INF
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse ``"num/den"`` (or an integer literal) into an exact Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    return Fraction(str(text).strip())


def format_rational(x: Rational) -> str:
    """Render a rational as ``"num/den"``, or ``"num"`` for integers."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ValContext:
    """The field Q(pi), pi**e == p, in which all computations take place."""

    p: int
    e: int = 1

    def __post_init__(self):
        if not isinstance(self.p, int) or not _is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p!r}")
        if not isinstance(self.e, int) or not 1 <= self.e <= MAX_RAMIFICATION:
            raise ValueError(f"ramification index must lie in 1..{MAX_RAMIFICATION}, got {self.e!r}")

    def element(self, value: Union["ValElement", Rational, Iterable[Rational]]) -> "ValElement":
        """Coerce a rational, coordinate list or element into this context."""
        if isinstance(value, ValElement):
            if value.ctx != self:
                raise ContextMismatch(f"element lives in {value.ctx}, expected {self}")
            return value
        if isinstance(value, (int, Fraction)):
            return ValElement(self, (Fraction(value),) + (Fraction(0),) * (self.e - 1))
        coords = [parse_rational(c) for c in value]
        if len(coords) != self.e:
            raise ValueError(f"expected {self.e} coordinates, got {len(coords)}")
        return ValElement(self, tuple(coords))

    def zero(self) -> "ValElement":
        return self.element(0)

    def one(self) -> "ValElement":
        return self.element(1)

    def pi_power(self, k: int) -> "ValElement":
        """Return pi**k for any integer k (negative powers included)."""
        q, r = divmod(k, self.e)
        coords = [Fraction(0)] * self.e
        coords[r] = Fraction(self.p) ** q
        return ValElement(self, tuple(coords))

    def to_json(self) -> dict:
        return {"p": self.p, "e": self.e}

    @classmethod
    def from_json(cls, data: dict) -> "ValContext":
        return cls(int(data["p"]), int(data.get("e", 1)))


class ValElement:
    """An immutable element of Q(pi)."""

    __slots__ = ("ctx", "coeffs", "_ord")

    def __init__(self, ctx: ValContext, coeffs: tuple):
        self.ctx = ctx
        self.coeffs = coeffs
        self._ord = None

    # -- coercion helpers -------------------------------------------------
    def _coerce(self, other) -> "ValElement":
        if isinstance(other, ValElement):
            if other.ctx != self.ctx:
                raise ContextMismatch(f"cannot combine elements of {self.ctx} and {other.ctx}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.element(other)
        return NotImplemented

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ValElement(self.ctx, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return ValElement(self.ctx, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ValElement(self.ctx, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ValElement(self.ctx, tuple(a * other for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        e = self.ctx.e
        if e == 1:
            return ValElement(self.ctx, (self.coeffs[0] * other.coeffs[0],))
        p = self.ctx.p
        out = [Fraction(0)] * e
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                if not b:
                    continue
                k = i + j
                if k >= e:
                    out[k - e] += a * b * p
                else:
                    out[k] += a * b
        return ValElement(self.ctx, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> "ValElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(pi)")
        e = self.ctx.e
        if e == 1:
            return ValElement(self.ctx, (1 / self.coeffs[0],))
        # Solve x * y == 1 using the multiplication-by-x matrix.
        columns = []
        basis = self.ctx.pi_power(0)
        for _ in range(e):
            columns.append((self * basis).coeffs)
            basis = basis * self.ctx.pi_power(1)
        matrix = [[columns[j][i] for j in range(e)] + [Fraction(int(i == 0))] for i in range(e)]
        solution = _solve(matrix)
        return ValElement(self.ctx, tuple(solution))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return ValElement(self.ctx, tuple(a / other for a in self.coeffs))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.ctx.element(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ctx.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparison -----------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.coeffs[0] == other and not any(self.coeffs[1:])
        if not isinstance(other, ValElement):
            return NotImplemented
        return self.ctx == other.ctx and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.ctx, self.coeffs))

    def __bool__(self):
        return not self.is_zero()

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    # -- valuation ------------------------------------------------------------
    def ord(self) -> Union[Fraction, float]:
        if self._ord is None:
            best = INF
            e, p = self.ctx.e, self.ctx.p
            for i, c in enumerate(self.coeffs):
                if c:
                    v = Fraction(padic_ord(c, p) * e + i, e)
                    if v < best:
                        best = v
            self._ord = best
        return self._ord

    def __repr__(self):
        return f"ValElement({format_element(self)!r}, p={self.ctx.p}, e={self.ctx.e})"

    def __str__(self):
        return format_element(self)


def _solve(matrix: list) -> list:
    """Gauss-Jordan elimination on an augmented square system over Q."""
    n = len(matrix)
    rows = [list(r) for r in matrix]
    for col in range(n):
        pivot = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return [rows[i][n] for i in range(n)]


def ord(x: ValElement):  # noqa: A001 - mirrors the mathematical name
    """Valuation of ``x``, normalised with ``ord(p) == 1``; ``INF`` for zero."""
    return x.ord()


def reduce_residue(x: ValElement) -> int:
    """Image of an integral element in the residue field F_p."""
    v = x.ord()
    if v < 0:
        raise NegativeValuation(f"cannot reduce {x} of valuation {v}")
    if v > 0:
        return 0
    c0 = x.coeffs[0]
    p = x.ctx.p
    return (c0.numerator * pow(c0.denominator, -1, p)) % p


def lift_residue(r: int, ctx: ValContext) -> ValElement:
    """The integer representative of a residue class, as an element."""
    return ctx.element(int(r) % ctx.p)


def embed(x: ValElement, e_new: int) -> ValElement:
    """Map ``x`` into the context with ramification ``e_new`` via pi -> pi'**(e_new/e)."""
    e = x.ctx.e
    if e_new % e:
        raise IncompatibleRamification(f"{e} does not divide {e_new}")
    ctx = ValContext(x.ctx.p, e_new)
    step = e_new // e
    coords = [Fraction(0)] * e_new
    for i, c in enumerate(x.coeffs):
        coords[i * step] = c
    return ValElement(ctx, tuple(coords))


def truncate_below(x: ValElement, t: Rational) -> ValElement:
    """Drop every p-adic digit of ``x`` of valuation at least ``t``.

    The result ``y`` satisfies ``ord(x - y) >= t`` and depends only on the
    class of ``x`` modulo elements of valuation ``>= t``, so it is a canonical
    representative of the closed disc of radius ``p**-t`` around ``x``.
    """
    p, e = x.ctx.p, x.ctx.e
    coords = []
    for i, c in enumerate(x.coeffs):
        # digits of c * pi**i have valuation k + i/e; keep those with k < t - i/e
        bound = math.ceil(Fraction(t) - Fraction(i, e))
        coords.append(_truncate_rational(c, p, bound))
    return ValElement(x.ctx, tuple(coords))


def _truncate_rational(c: Fraction, p: int, bound: int) -> Fraction:
    v = padic_ord(c, p)
    if v >= bound:
        return Fraction(0)
    unit = c / Fraction(p) ** v
    modulus = p ** (bound - v)
    digits = (unit.numerator * pow(unit.denominator, -1, modulus)) % modulus
    return Fraction(digits) * Fraction(p) ** v


# -- serialisation ------------------------------------------------------------

def format_element(x: ValElement) -> str:
    """Render as ``"c0 + c1*pi + c2*pi^2"`` with zero terms omitted."""
    terms = []
    for i, c in enumerate(x.coeffs):
        if not c:
            continue
        mag = format_rational(abs(c))
        if i == 0:
            body = mag
        else:
            power = "pi" if i == 1 else f"pi^{i}"
            body = power if abs(c) == 1 else f"{mag}*{power}"
        terms.append(("-" if c < 0 else "+", body))
    if not terms:
        return "0"
    sign, body = terms[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


_TERM = re.compile(r"^(?:(?P<coef>\d+(?:/\d+)?)\s*\*?\s*)?(?P<pi>pi(?:\s*\^\s*(?P<pow>\d+))?)?$")


def parse_element(text: Union[str, int, Fraction, list], ctx: ValContext) -> ValElement:
    """Parse an element from a string such as ``"1/3 - 2*pi^2"`` or a JSON list."""
    if isinstance(text, (int, Fraction)):
        return ctx.element(text)
    if isinstance(text, (list, tuple)):
        return ctx.element(text)
    source = str(text).replace(" ", "")
    if not source:
        raise ValueError("empty element literal")
    pieces = re.findall(r"[+-]?[^+-]+", source)
    if "".join(pieces) != source:
        raise ValueError(f"cannot parse element {text!r}")
    total = ctx.zero()
    for piece in pieces:
        sign = -1 if piece.startswith("-") else 1
        body = piece.lstrip("+-")
        match = _TERM.match(body)
        if not match or (match.group("coef") is None and match.group("pi") is None):
            raise ValueError(f"cannot parse term {piece!r} in {text!r}")
        coef = Fraction(match.group("coef")) if match.group("coef") else Fraction(1)
        power = 0
        if match.group("pi"):
            power = int(match.group("pow")) if match.group("pow") else 1
        total = total + ctx.pi_power(power) * (sign * coef)
    return total


def element_to_json(x: ValElement) -> list:
    return [format_rational(c) for c in x.coeffs]


@lru_cache(maxsize=None)
def context(p: int, e: int = 1) -> ValContext:
    """Cached constructor for contexts."""
    return ValContext(p, e)

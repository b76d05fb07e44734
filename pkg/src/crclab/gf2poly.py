"""Polynomials over GF(2).

A polynomial is stored as a non-negative integer whose bit i is the
coefficient of x^i, so addition is XOR and multiplication is carry-less.
The zero polynomial has no degree: ``Gf2Poly(0).degree is None``.

Three text renderings are supported:

* ``hex17``: full hexadecimal with the leading coefficient written out
  (``0x11021`` for x^16+x^12+x^5+1);
* ``binary``: MSB-first coefficient string (``10011`` for x^4+x+1);
* ``terms``: human term list (``x^16+x^12+x^5+1``).

``hex-implicit`` parses CRC-catalogue notation where the leading
coefficient is dropped; it needs the degree passed as ``width``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "Gf2Poly",
    "PolyClass",
    "PolyParseError",
    "UnsupportedDegreeError",
    "parse_poly",
    "add",
    "mul",
    "poly_divmod",
    "powmod_x",
    "gcd",
    "is_irreducible",
    "is_primitive",
    "order_of_x",
    "factor",
    "enumerate_degree",
    "FACTOR_MAX_DEGREE",
    "PRIMITIVE_MAX_DEGREE",
]

FACTOR_MAX_DEGREE = 16
PRIMITIVE_MAX_DEGREE = 32

FORMS = ("hex17", "binary", "terms", "hex-implicit")


class PolyParseError(ValueError):
    def __init__(self, text: str, position: int, reason: str):
        self.text = text
        self.position = position
        self.reason = reason
        super().__init__(f"cannot parse {text!r} at position {position}: {reason}")


class UnsupportedDegreeError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Gf2Poly:
    """Immutable binary polynomial; ``value`` bit i is the coefficient of x^i."""

    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("polynomial bit vector must be non-negative")

    @classmethod
    def from_exponents(cls, exponents) -> Gf2Poly:
        v = 0
        for e in exponents:
            v ^= 1 << e
        return cls(v)

    @property
    def degree(self) -> int | None:
        return self.value.bit_length() - 1 if self.value else None

    @property
    def weight(self) -> int:
        return bin(self.value).count("1")

    @property
    def constant_term(self) -> int:
        return self.value & 1

    def is_zero(self) -> bool:
        return self.value == 0

    def exponents(self) -> list[int]:
        """Exponents with nonzero coefficient, highest first."""
        v = self.value
        return [i for i in range(v.bit_length() - 1, -1, -1) if (v >> i) & 1]

    def __bool__(self):
        return self.value != 0

    def __add__(self, other):
        return add(self, other)

    __sub__ = __add__
    __xor__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    def __divmod__(self, other):
        return poly_divmod(self, other)

    def __floordiv__(self, other):
        return poly_divmod(self, other)[0]

    def __mod__(self, other):
        return poly_divmod(self, other)[1]

    def to_hex(self) -> str:
        return f"0x{self.value:X}"

    def to_binary(self) -> str:
        return format(self.value, "b")

    def to_terms(self) -> str:
        if not self.value:
            return "0"
        parts = []
        for e in self.exponents():
            parts.append("1" if e == 0 else "x" if e == 1 else f"x^{e}")
        return "+".join(parts)

    def render(self, form: str = "hex17") -> str:
        if form == "hex17":
            return self.to_hex()
        if form == "binary":
            return self.to_binary()
        if form == "terms":
            return self.to_terms()
        raise ValueError(f"unknown rendering form {form!r}")

    def __str__(self):
        return self.to_terms()

    def __repr__(self):
        return f"Gf2Poly({self.to_hex()})"


@dataclass(frozen=True)
class PolyClass:
    """Algebraic classification of a polynomial.

    ``order_of_x`` is None when the constant term is zero; ``factors`` is
    None when the degree is past the factorization bound.
    """

    classification: str  # "primitive" | "irreducible-not-primitive" | "reducible"
    order_of_x: int | None
    factors: tuple[tuple[Gf2Poly, int], ...] | None

    @property
    def is_primitive(self) -> bool:
        return self.classification == "primitive"

    @property
    def is_irreducible(self) -> bool:
        return self.classification != "reducible"


_TERM_RE = re.compile(r"\s*(?:(1)|x(?:\s*\^\s*(?:\{\s*(\d+)\s*\}|(\d+)))?)\s*")


def _parse_hex(text: str, body_start: int) -> int:
    body = text[body_start:]
    if not body:
        raise PolyParseError(text, body_start, "empty hex digits")
    for i, ch in enumerate(body):
        if ch not in "0123456789abcdefABCDEF_":
            raise PolyParseError(text, body_start + i, f"invalid hex digit {ch!r}")
    return int(body.replace("_", ""), 16)


def _parse_terms(text: str) -> int:
    value = 0
    pos = 0
    expect_term = True
    while pos < len(text):
        if expect_term:
            m = _TERM_RE.match(text, pos)
            if not m or m.end() == pos or not (m.group(1) or "x" in m.group(0)):
                raise PolyParseError(text, pos, "expected a term like x^k, x or 1")
            if m.group(1):
                e = 0
            else:
                e = int(m.group(2) or m.group(3) or 1)
            value ^= 1 << e
            pos = m.end()
            expect_term = False
        else:
            if text[pos] != "+":
                raise PolyParseError(text, pos, f"expected '+', got {text[pos]!r}")
            pos += 1
            expect_term = True
    if expect_term:
        raise PolyParseError(text, len(text), "dangling '+' or empty input")
    return value


def _detect_form(text: str) -> str:
    t = text.strip()
    if t[:2].lower() == "0x":
        return "hex17"
    if "x" in t or "+" in t:
        return "terms"
    return "binary"


def parse_poly(text: str, form: str | None = None, width: int | None = None) -> Gf2Poly:
    """Parse ``text`` in one of the supported renderings.

    ``form`` defaults to auto-detection: a ``0x`` prefix means hex17, an
    ``x`` or ``+`` means a term list, otherwise binary.
    """
    if not isinstance(text, str):
        raise TypeError("polynomial text must be a string")
    stripped = text.strip()
    if not stripped:
        raise PolyParseError(text, 0, "empty input")
    offset = text.index(stripped[0])
    if form is None:
        form = _detect_form(stripped)
    if form in ("hex17", "hex-implicit"):
        start = 2 if stripped[:2].lower() == "0x" else 0
        try:
            v = _parse_hex(stripped, start)
        except PolyParseError as exc:
            raise PolyParseError(text, offset + exc.position, exc.reason) from None
        if form == "hex-implicit":
            if width is None or width < 1:
                raise ValueError("hex-implicit form needs a positive width")
            if v >> width:
                raise PolyParseError(text, offset, f"value does not fit in {width} bits")
            v |= 1 << width
        return Gf2Poly(v)
    if form == "binary":
        for i, ch in enumerate(stripped):
            if ch not in "01_ ":
                raise PolyParseError(text, offset + i, f"invalid binary digit {ch!r}")
        digits = stripped.replace("_", "").replace(" ", "")
        return Gf2Poly(int(digits, 2))
    if form == "terms":
        try:
            return Gf2Poly(_parse_terms(stripped))
        except PolyParseError as exc:
            raise PolyParseError(text, offset + exc.position, exc.reason) from None
    raise ValueError(f"unknown form {form!r}; expected one of {FORMS}")


# --- raw integer kernels -------------------------------------------------


def _clmul(a: int, b: int) -> int:
    if a < b:
        a, b = b, a
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def _divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    db = b.bit_length()
    q = 0
    while a.bit_length() >= db:
        shift = a.bit_length() - db
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def _mod(a: int, m: int) -> int:
    dm = m.bit_length()
    while a.bit_length() >= dm:
        a ^= m << (a.bit_length() - dm)
    return a


def _mulmod(a: int, b: int, m: int) -> int:
    return _mod(_clmul(a, b), m)


def _powmod(base: int, e: int, m: int) -> int:
    result = _mod(1, m)
    base = _mod(base, m)
    while e:
        if e & 1:
            result = _mulmod(result, base, m)
        e >>= 1
        if e:
            base = _mulmod(base, base, m)
    return result


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _mod(a, b)
    return a


# --- public operations ---------------------------------------------------


def add(a: Gf2Poly, b: Gf2Poly) -> Gf2Poly:
    return Gf2Poly(a.value ^ b.value)


def mul(a: Gf2Poly, b: Gf2Poly) -> Gf2Poly:
    return Gf2Poly(_clmul(a.value, b.value))


def poly_divmod(a: Gf2Poly, b: Gf2Poly) -> tuple[Gf2Poly, Gf2Poly]:
    """Long division; raises ZeroDivisionError when ``b`` is zero."""
    q, r = _divmod(a.value, b.value)
    return Gf2Poly(q), Gf2Poly(r)


def gcd(a: Gf2Poly, b: Gf2Poly) -> Gf2Poly:
    return Gf2Poly(_gcd(a.value, b.value))


def powmod_x(e: int, m: Gf2Poly) -> Gf2Poly:
    """x^e reduced modulo ``m`` (square-and-multiply)."""
    if e < 0:
        raise ValueError("exponent must be non-negative")
    if m.degree is None or m.degree < 1:
        raise ValueError("modulus must have degree >= 1")
    return Gf2Poly(_powmod(2, e, m.value))


@lru_cache(maxsize=None)
def _prime_factors(n: int) -> tuple[int, ...]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


def _is_irreducible_int(f: int) -> bool:
    n = f.bit_length() - 1
    if n < 1:
        return False
    if n == 1:
        return True
    if not f & 1:
        return False
    # Rabin: x^(2^n) == x mod f, and gcd(x^(2^(n/q)) - x, f) == 1 for primes q | n
    checkpoints = {n // q: q for q in _prime_factors(n)}
    t = 2
    for i in range(1, n + 1):
        t = _mulmod(t, t, f)
        if i in checkpoints and i != n:
            if _gcd(t ^ 2, f) != 1:
                return False
    return t == 2


def is_irreducible(f: Gf2Poly) -> bool:
    """Rabin's irreducibility test."""
    if f.degree is None or f.degree < 1:
        raise ValueError("irreducibility is defined for degree >= 1")
    return _is_irreducible_int(f.value)


def _is_primitive_int(f: int) -> bool:
    n = f.bit_length() - 1
    if not _is_irreducible_int(f) or not f & 1:
        return False
    group = (1 << n) - 1
    return all(_powmod(2, group // p, f) != 1 for p in _prime_factors(group))


def is_primitive(f: Gf2Poly) -> bool:
    """Irreducible and x has order 2^deg - 1 modulo ``f``."""
    if f.degree is None or f.degree < 1:
        raise ValueError("primitivity is defined for degree >= 1")
    if f.degree > PRIMITIVE_MAX_DEGREE:
        raise UnsupportedDegreeError(
            f"primitivity test supports degree <= {PRIMITIVE_MAX_DEGREE}, got {f.degree}"
        )
    return _is_primitive_int(f.value)


def _order_irreducible(f: int) -> int:
    n = f.bit_length() - 1
    d = (1 << n) - 1
    for p in _prime_factors(d):
        while d % p == 0 and _powmod(2, d // p, f) == 1:
            d //= p
    return d


def _order_bsgs(f: int) -> int:
    n = f.bit_length() - 1
    m = math.isqrt((1 << n) - 1) + 1
    baby = {}
    t = 1
    for j in range(1, m + 1):
        t = _mulmod(t, 2, f)
        if t == 1:
            return j
        baby.setdefault(t, j)
    # x^(i*m + k) == 1  <=>  x^k == x^(-i*m), scanning d in (i*m, (i+1)*m]
    step = _inverse(t, f)
    target = step
    for i in range(1, m + 2):
        if target in baby:
            return i * m + baby[target]
        target = _mulmod(target, step, f)
    raise ArithmeticError("order search exceeded the group bound")


def _inverse(a: int, f: int) -> int:
    # extended Euclid over GF(2)[x]
    r0, r1 = f, a
    s0, s1 = 0, 1
    while r1:
        q, r = _divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 ^ _clmul(q, s1)
    if r0 != 1:
        raise ArithmeticError("element is not invertible")
    return _mod(s0, f)


def order_of_x(f: Gf2Poly) -> int:
    """Smallest d >= 1 with x^d == 1 (mod f).

    Irreducible moduli use the divisors of 2^n - 1; reducible ones of
    degree <= 16 combine the orders of their irreducible factors;
    anything else up to degree 32 falls back to baby-step giant-step.
    """
    if f.degree is None or f.degree < 1:
        raise ValueError("order of x needs a modulus of degree >= 1")
    if not f.constant_term:
        raise ValueError("constant term is 0: x is not invertible modulo f")
    if f.degree == 1:
        return 1
    if f.degree <= PRIMITIVE_MAX_DEGREE and _is_irreducible_int(f.value):
        return _order_irreducible(f.value)
    if f.degree <= FACTOR_MAX_DEGREE:
        total = 1
        for p, e in factor(f):
            o = _order_irreducible(p.value) if p.degree > 1 else 1
            # order modulo p^e is ord_p * 2^t with 2^t >= e
            o *= 1 << (e - 1).bit_length()
            total = math.lcm(total, o)
        return total
    if f.degree <= PRIMITIVE_MAX_DEGREE:
        return _order_bsgs(f.value)
    raise UnsupportedDegreeError(f"order of x supports degree <= {PRIMITIVE_MAX_DEGREE}")


def factor(f: Gf2Poly) -> list[tuple[Gf2Poly, int]]:
    """Full factorization by trial division, as (irreducible, multiplicity) pairs.

    Factors come out in ascending order of their integer encoding.
    """
    if f.degree is None or f.degree < 1:
        raise ValueError("factorization needs degree >= 1")
    if f.degree > FACTOR_MAX_DEGREE:
        raise UnsupportedDegreeError(
            f"factorization supports degree <= {FACTOR_MAX_DEGREE}, got {f.degree}"
        )
    v = f.value
    out: list[tuple[Gf2Poly, int]] = []
    tz = (v & -v).bit_length() - 1
    if tz:
        out.append((Gf2Poly(2), tz))
        v >>= tz
    d = 3  # x+1, then every odd polynomial in increasing order
    while v > 1 and 2 * (d.bit_length() - 1) <= v.bit_length() - 1:
        mult = 0
        while True:
            q, r = _divmod(v, d)
            if r:
                break
            v = q
            mult += 1
        if mult:
            out.append((Gf2Poly(d), mult))
        d += 2
    if v > 1:
        # cofactor has no factor of degree <= deg/2, hence irreducible
        for i, (p, e) in enumerate(out):
            if p.value == v:
                out[i] = (p, e + 1)
                break
        else:
            out.append((Gf2Poly(v), 1))
    out.sort(key=lambda pe: pe[0].value)
    return out


def enumerate_degree(n: int, constant_term_one: bool = True):
    """Yield every polynomial of exact degree ``n`` (optionally only odd ones)."""
    lo = 1 << n
    step = 2 if constant_term_one else 1
    start = lo | 1 if constant_term_one else lo
    for v in range(start, lo << 1, step):
        yield Gf2Poly(v)

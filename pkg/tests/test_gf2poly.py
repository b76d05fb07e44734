from math import lcm

import pytest
from hypothesis import given, strategies as st

from crclab import gf2poly
from crclab.gf2poly import (
    Gf2Poly,
    PolyParseError,
    UnsupportedDegreeError,
    factor,
    is_irreducible,
    is_primitive,
    order_of_x,
    parse_poly,
    poly_divmod,
    powmod_x,
)

polys = st.integers(min_value=0, max_value=(1 << 40) - 1).map(Gf2Poly)
nonzero = st.integers(min_value=1, max_value=(1 << 24) - 1).map(Gf2Poly)


def clmul_oracle(a: int, b: int) -> int:
    out = 0
    for i in range(b.bit_length()):
        if b >> i & 1:
            out ^= a << i
    return out


def brute_order(m: int) -> int:
    # walk x^d mod m until it returns to 1
    w = m.bit_length() - 1
    t, d = 2 % m if w > 1 else 1, 1
    while t != 1:
        t <<= 1
        if t >> w:
            t ^= m
        d += 1
    return d


def test_parse_forms():
    assert parse_poly("0x11021") == Gf2Poly.from_exponents([16, 12, 5, 0])
    assert parse_poly("10011") == Gf2Poly.from_exponents([4, 1, 0])
    assert parse_poly("0x1") == Gf2Poly(1)
    assert parse_poly("x^4+x+1").to_binary() == "10011"
    assert parse_poly("1021", form="hex-implicit", width=16) == parse_poly("0x11021")


def test_render_round_trip():
    p = parse_poly("0x18005")
    assert p.to_hex() == "0x18005"
    assert p.to_binary() == "11000000000000101"
    assert p.to_terms() == "x^16+x^15+x^2+1"
    for text in (p.to_hex(), p.to_binary(), p.to_terms()):
        assert parse_poly(text) == p


@pytest.mark.parametrize("text,pos", [("0x1G", 3), ("1021", None), ("x^4+y", 4), ("10a1", 2)])
def test_parse_errors_name_position(text, pos):
    with pytest.raises(PolyParseError) as exc:
        parse_poly(text, form="binary" if text == "10a1" else None)
    if pos is not None:
        assert exc.value.position == pos


def test_zero_polynomial_has_no_degree():
    assert Gf2Poly(0).degree is None
    assert Gf2Poly(1).degree == 0


def test_add_fixtures():
    a = parse_poly("0x11021")
    assert a + a == Gf2Poly(0)
    assert parse_poly("x+1") + parse_poly("x") == Gf2Poly(1)
    assert (a + parse_poly("0x1100B")).value == 0x11021 ^ 0x1100B


def test_mul_fixtures():
    assert parse_poly("x+1") * parse_poly("x^15+x+1") == parse_poly("0x18005")
    assert parse_poly("x+1") * parse_poly("x+1") == parse_poly("x^2+1")
    a = parse_poly("0x136C3")
    assert a * Gf2Poly(1) == a


@given(polys, polys)
def test_mul_matches_oracle(a, b):
    assert (a * b).value == clmul_oracle(a.value, b.value)


@given(polys, nonzero)
def test_divmod_reconstructs(a, b):
    q, r = poly_divmod(a, b)
    assert q * b + r == a
    assert r.degree is None or r.degree < b.degree


def test_divmod_fixtures():
    q, r = poly_divmod(parse_poly("100100000"), parse_poly("1101"))
    assert r.to_binary() == "1"  # checksum 001
    q, r = poly_divmod(parse_poly("110101100000"), parse_poly("10011"))
    assert r == parse_poly("110")  # checksum 0110
    a = parse_poly("0x1B7A9")
    assert poly_divmod(a, Gf2Poly(1)) == (a, Gf2Poly(0))
    with pytest.raises(ZeroDivisionError):
        poly_divmod(a, Gf2Poly(0))


def test_powmod_x():
    assert powmod_x(1, parse_poly("x^3+x+1")) == parse_poly("x")
    assert powmod_x(2, parse_poly("x^2+1")) == Gf2Poly(1)
    assert powmod_x(65535, parse_poly("0x136C3")) == Gf2Poly(1)


def test_irreducible_fixtures():
    assert is_irreducible(parse_poly("x^2+x+1"))
    assert not is_irreducible(parse_poly("0x11021"))
    assert is_irreducible(parse_poly("0x14AA7"))


def test_primitive_fixtures():
    assert is_primitive(parse_poly("0x136C3"))
    assert not is_primitive(parse_poly("0x18005"))
    assert is_primitive(parse_poly("x^2+x+1"))
    assert not is_primitive(parse_poly("0x14AA7"))
    with pytest.raises(UnsupportedDegreeError):
        is_primitive(Gf2Poly.from_exponents([33, 13, 0]))


def test_order_fixtures():
    assert order_of_x(parse_poly("x+1")) == 1
    assert order_of_x(parse_poly("x^2+x+1")) == 3
    assert order_of_x(parse_poly("0x18005")) == lcm(1, 32767)
    assert order_of_x(parse_poly("0x136C3")) == 65535
    with pytest.raises(ValueError):
        order_of_x(parse_poly("x^3+x"))


@pytest.mark.parametrize("hexval", ["0x11021", "0x18005", "0x14AA7", "0x15FFF", "0x1DFFF", "0x10001", "0x1F"])
def test_order_matches_brute_force(hexval):
    p = parse_poly(hexval)
    assert order_of_x(p) == brute_order(p.value)


def test_order_large_reducible_degree():
    # degree above the factoring bound goes through the generic search
    p = parse_poly("x^20+x^3+1") * parse_poly("x+1")
    assert order_of_x(p) == brute_order(p.value)


def test_factor_fixtures():
    assert factor(parse_poly("0x18005")) == [(parse_poly("x+1"), 1), (parse_poly("x^15+x+1"), 1)]
    assert factor(parse_poly("x^2+1")) == [(parse_poly("x+1"), 2)]
    f = parse_poly("0x136C3")
    assert factor(f) == [(f, 1)]
    with pytest.raises(UnsupportedDegreeError):
        factor(Gf2Poly.from_exponents([17, 3, 0]))


@given(st.integers(min_value=2, max_value=(1 << 17) - 1).map(Gf2Poly))
def test_factor_round_trip(f):
    prod = Gf2Poly(1)
    for p, e in factor(f):
        assert is_irreducible(p)
        for _ in range(e):
            prod = prod * p
    assert prod == f


@given(st.integers(min_value=2, max_value=(1 << 17) - 1).map(Gf2Poly))
def test_even_weight_divisible_by_x_plus_1(f):
    if f.weight % 2 == 0:
        assert not (f % parse_poly("x+1"))
        assert f.degree == 1 or not is_irreducible(f)


def test_small_degree_enumeration():
    # necklace counts of irreducibles for degrees 1..8
    expected = {1: 2, 2: 1, 3: 2, 4: 3, 5: 6, 6: 9, 7: 18, 8: 30}
    for n, count in expected.items():
        polys = gf2poly.enumerate_degree(n, constant_term_one=False)
        assert sum(is_irreducible(p) for p in polys) == count

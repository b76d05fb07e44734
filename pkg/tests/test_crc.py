import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crclab.crc import (
    CrcSpec,
    append_checksum,
    build_table,
    crc_batch,
    crc_bitwise,
    crc_table,
    remainder,
    undetected_bursts,
    verify,
)
from crclab.gf2poly import Gf2Poly, parse_poly, poly_divmod

CCITT = CrcSpec(parse_poly("0x11021"))


def long_division(bits: str, g: str) -> str:
    # schoolbook division on strings, independent of the engines
    work = list(bits + "0" * (len(g) - 1))
    for i in range(len(bits)):
        if work[i] == "1":
            for j, c in enumerate(g):
                work[i + j] = "1" if work[i + j] != c else "0"
    return "".join(work[len(bits):])


def test_checksum_fixtures():
    assert crc_bitwise("100100", CrcSpec("1101")) == 0b001
    assert crc_bitwise("11010110", CrcSpec("10011")) == 0b0110
    assert crc_bitwise("", CCITT) == 0


def test_codeword_fixtures():
    assert str(append_checksum("100100", CrcSpec("1101"))) == "100100 001"
    assert str(append_checksum("11010110", CrcSpec("10011"))) == "11010110 0110"
    assert append_checksum("", CCITT).checksum == 0


def test_verify_fixtures():
    g = CrcSpec("1101")
    assert verify("100100001", g)
    for i in range(9):
        flipped = list("100100001")
        flipped[i] = "1" if flipped[i] == "0" else "0"
        assert not verify("".join(flipped), g)
    assert verify("110011001", g)
    assert long_division("110011", "1101") == "001"
    with pytest.raises(ValueError):
        verify("10", g)


def test_table_engine():
    table = build_table(CCITT)
    assert table[0] == 0
    assert table[0x80] == (poly_divmod(Gf2Poly(1 << 23), CCITT.generator)[1]).value
    for b in range(256):
        assert table[b] == crc_bitwise(bytes([b]), CCITT)
    assert crc_table(b"123456789", CCITT) == 0x31C3
    assert crc_bitwise(b"123456789", CCITT) == 0x31C3
    assert crc_table(b"", CCITT) == 0
    with pytest.raises(ValueError):
        build_table(CrcSpec("1101"))
    with pytest.raises(TypeError):
        crc_table("0101", CCITT)


@given(st.binary(max_size=64), st.sampled_from(["0x11021", "0x18005", "0x136C3", "0x107", "0x104C11DB7"]),
       st.integers(min_value=0))
def test_table_equals_bitwise(data, g, init):
    gen = parse_poly(g)
    spec = CrcSpec(gen, init % (1 << gen.degree))
    assert crc_table(data, spec) == crc_bitwise(data, spec)


@given(st.text(alphabet="01", max_size=80), st.sampled_from(["1101", "10011", "0x11021", "0x18005"]))
def test_bitwise_matches_long_division(bits, g):
    gen = parse_poly(g)
    spec = CrcSpec(gen)
    expected = long_division(bits, gen.to_binary())
    assert crc_bitwise(bits, spec) == int(expected, 2)
    assert verify(append_checksum(bits, spec), spec)


@given(st.text(alphabet="01", min_size=1, max_size=60), st.integers(min_value=1, max_value=0xFFFF))
def test_verify_with_init(bits, init):
    spec = CrcSpec(CCITT.generator, init)
    cw = append_checksum(bits, spec)
    assert verify(cw, spec)
    # init equals a preload XORed onto the first p message bits
    padded = bits + "0" * 16
    value = int(padded, 2) ^ (init << (len(bits)))
    assert crc_bitwise(bits, spec) == poly_divmod(Gf2Poly(value), CCITT.generator)[1].value


@settings(max_examples=200)
@given(st.text(alphabet="01", min_size=1, max_size=120), st.integers(min_value=1))
def test_undetected_iff_divisible(bits, err):
    spec = CCITT
    cw = append_checksum(bits, spec).bits
    n = len(cw)
    e = err % (1 << n)
    corrupted = format(int(cw, 2) ^ e, f"0{n}b")
    divisible = e == 0 or not (Gf2Poly(e) % spec.generator)
    assert verify(corrupted, spec) == divisible


def test_single_bit_errors_rejected():
    rnd = random.Random(5)
    for g in ("1101", "0x11021", "0x18005", "0x14AA7"):
        spec = CrcSpec(g)
        bits = "".join(rnd.choice("01") for _ in range(256 - spec.width))
        cw = append_checksum(bits, spec).bits
        for i in range(len(cw)):
            flipped = cw[:i] + ("1" if cw[i] == "0" else "0") + cw[i + 1:]
            assert not verify(flipped, spec)


def test_odd_weight_errors_rejected_with_x_plus_1():
    spec = CrcSpec("0x18005")
    rnd = random.Random(9)
    cw = append_checksum("1011001110001111", spec).bits
    n = len(cw)
    for _ in range(2000):
        e = rnd.getrandbits(n)
        if bin(e).count("1") % 2:
            assert not verify(format(int(cw, 2) ^ e, f"0{n}b"), spec)
    # exhaustive on a short codeword
    spec = CrcSpec("11")  # x+1
    for e in range(1, 1 << 10):
        if bin(e).count("1") % 2:
            assert remainder(format(e, "010b"), spec.generator) != 0


def test_batch_matches_bitwise():
    rng = np.random.default_rng(3)
    specs = [CrcSpec(g, i) for g, i in (("0x11021", 0), ("0x18005", 0), ("0x136C3", 0x1234), ("0x107", 7), ("0x13", 5), ("11", 1))]
    nbits = rng.integers(0, 200, size=50)
    rows = rng.integers(0, 256, size=(50, 25), dtype=np.uint8)
    for r, n in zip(rows, nbits):
        # clear bits beyond the row length so padding is clean
        bits = np.unpackbits(r)
        bits[n:] = 0
        r[:] = np.packbits(bits)
    out = crc_batch(rows, nbits, specs)
    for k, spec in enumerate(specs):
        for i in range(50):
            msg = "".join(map(str, np.unpackbits(rows[i])[: nbits[i]]))
            assert int(out[k, i]) == crc_bitwise(msg, spec)


def test_burst_scan_small():
    # compare the Gray-code scan with direct enumeration on a short codeword
    spec = CrcSpec("10011")
    n, b_max = 24, 7
    checked = undetected = 0
    for b in range(1, b_max + 1):
        for off in range(n - b + 1):
            inner = 1 << max(b - 2, 0) if b > 1 else 1
            for mid in range(inner):
                e = 1 if b == 1 else (1 << (b - 1)) | (mid << 1) | 1
                checked += 1
                if not (Gf2Poly(e << off) % spec.generator):
                    undetected += 1
    assert undetected_bursts(spec, n, b_max) == (checked, undetected)
    assert undetected > 0


def test_short_bursts_all_detected():
    checked, undetected = undetected_bursts(CCITT, 512, 16)
    expected = 512 + sum((512 - b + 1) << (b - 2) for b in range(2, 17))
    assert checked == expected
    assert undetected == 0


def test_spec_validation():
    with pytest.raises(ValueError):
        CrcSpec("1")
    with pytest.raises(ValueError):
        CrcSpec("1101", init=8)


def test_engines_agree_on_long_messages():
    from crclab.polygen import load_curated

    rng = np.random.default_rng(64)
    lengths = [0, 1, 4095, 65536]
    msgs = [rng.integers(0, 256, n, dtype=np.uint8).tobytes() for n in lengths]
    seen = set()
    gens = [r.poly for r in load_curated() if not (r.hex in seen or seen.add(r.hex))]
    specs = [CrcSpec(g) for g in gens]
    rows = np.zeros((len(msgs), max(lengths)), dtype=np.uint8)
    for i, m in enumerate(msgs):
        rows[i, : len(m)] = np.frombuffer(m, dtype=np.uint8)
    batch = crc_batch(rows, np.array(lengths) * 8, specs)
    for k, spec in enumerate(specs):
        for i, m in enumerate(msgs):
            value = crc_table(m, spec)
            assert int(batch[k, i]) == value
            if len(m) < 65536 or k < 3:  # the bitwise engine is slow; spot-check the longest
                assert crc_bitwise(m, spec) == value

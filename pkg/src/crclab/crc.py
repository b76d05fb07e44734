"""Cyclic redundancy checksums over GF(2).

Conventions are the plain polynomial ones: MSB-first bit order, no input
or output reflection, final XOR of zero.  The checksum of an n-bit
message M with a degree-p generator g is

    (M(x) * x^p + init(x) * x^n) mod g(x)

i.e. ``init`` is XORed onto the first p message bits, which is what a
preloaded shift register does.  With ``init == 0`` an appended codeword
is an exact multiple of the generator; a nonzero ``init`` breaks that
divisibility, so ``verify`` then recomputes and compares instead.

Messages are either ``bytes``-like (whole bytes, MSB first) or bit
strings such as ``"100100"``.  The table engine only accepts bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .gf2poly import Gf2Poly, parse_poly

__all__ = [
    "CrcSpec",
    "Codeword",
    "crc_bitwise",
    "build_table",
    "crc_table",
    "append_checksum",
    "verify",
    "remainder",
    "crc_batch",
    "undetected_bursts",
    "to_bits",
    "MAX_WIDTH",
    "UNDETECTED_FIXTURES",
    "is_undetected_fixture",
]

MAX_WIDTH = 64

# Corrupted codewords that are exact multiples of their generator, kept as
# named examples of errors a CRC cannot see.  Keyed by (generator, bits).
UNDETECTED_FIXTURES = {
    (0b1101, "110011001"): "100100001 with bits 2, 4, 5 and 6 flipped; equals (x^5+x^2+1)(x^3+x^2+1)",
}

Message = Union[bytes, bytearray, memoryview, str]


@dataclass(frozen=True)
class CrcSpec:
    generator: Gf2Poly
    init: int = 0

    def __post_init__(self):
        if isinstance(self.generator, str):
            object.__setattr__(self, "generator", parse_poly(self.generator))
        w = self.generator.degree
        if w is None or not 1 <= w <= MAX_WIDTH:
            raise ValueError(f"generator degree must be in 1..{MAX_WIDTH}, got {w}")
        if not 0 <= self.init < (1 << w):
            raise ValueError(f"init does not fit in {w} bits")

    @property
    def width(self) -> int:
        return self.generator.degree

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def low_bits(self) -> int:
        """Generator without its leading coefficient (the register feedback taps)."""
        return self.generator.value & self.mask


@dataclass(frozen=True)
class Codeword:
    message: str  # bit string
    checksum: int
    width: int

    @property
    def checksum_bits(self) -> str:
        return format(self.checksum, f"0{self.width}b") if self.width else ""

    @property
    def bits(self) -> str:
        return self.message + self.checksum_bits

    def __len__(self):
        return len(self.message) + self.width

    def __str__(self):
        return f"{self.message} {self.checksum_bits}"


def to_bits(message: Message) -> tuple[int, int]:
    """Return ``(value, nbits)`` with the first message bit as the MSB of value."""
    if isinstance(message, str):
        s = message.replace(" ", "").replace("_", "")
        for i, ch in enumerate(s):
            if ch not in "01":
                raise ValueError(f"invalid bit {ch!r} at position {i}")
        return (int(s, 2) if s else 0), len(s)
    b = bytes(message)
    return int.from_bytes(b, "big"), 8 * len(b)


def _bit_string(value: int, nbits: int) -> str:
    return format(value, f"0{nbits}b") if nbits else ""


def _iter_bits(message: Message):
    if isinstance(message, str):
        for i, ch in enumerate(message):
            if ch == "1":
                yield 1
            elif ch == "0":
                yield 0
            elif ch not in " _":
                raise ValueError(f"invalid bit {ch!r} at position {i}")
    else:
        for byte in bytes(message):
            for k in range(7, -1, -1):
                yield (byte >> k) & 1


def crc_bitwise(message: Message, spec: CrcSpec) -> int:
    """Reference engine: one shift-register step per message bit."""
    mask = spec.mask
    taps = spec.low_bits
    reg = spec.init
    top = spec.width - 1
    for bit in _iter_bits(message):
        fb = (reg >> top) ^ bit
        reg = (reg << 1) & mask
        if fb & 1:
            reg ^= taps
    return reg


def build_table(spec: CrcSpec) -> tuple[int, ...]:
    """256-entry byte table: entry b is the init-0 checksum of the single byte b."""
    if spec.width < 8:
        raise ValueError("the table engine needs width >= 8; use crc_bitwise")
    return _byte_table(spec)


def _byte_table(spec: CrcSpec) -> tuple[int, ...]:
    zero = CrcSpec(spec.generator)
    return tuple(crc_bitwise(bytes((b,)), zero) for b in range(256))


def crc_table(message: bytes | bytearray | memoryview, spec: CrcSpec, table=None) -> int:
    """Byte-at-a-time table engine; agrees with ``crc_bitwise`` on every input."""
    if isinstance(message, str):
        raise TypeError("the table engine takes bytes; use crc_bitwise for bit strings")
    if table is None:
        table = build_table(spec)
    shift = spec.width - 8
    mask = spec.mask
    reg = spec.init
    for byte in bytes(message):
        reg = ((reg << 8) & mask) ^ table[((reg >> shift) ^ byte) & 0xFF]
    return reg


def append_checksum(message: Message, spec: CrcSpec) -> Codeword:
    value, nbits = to_bits(message)
    return Codeword(_bit_string(value, nbits), crc_bitwise(message, spec), spec.width)


def verify(codeword: Codeword | Message, spec: CrcSpec) -> bool:
    """True (accept) when the received codeword carries a consistent checksum.

    With ``init == 0`` this is the remainder test: accept iff the generator
    divides the codeword polynomial.
    """
    if isinstance(codeword, Codeword):
        codeword = codeword.bits
    if isinstance(codeword, str):
        codeword = codeword.replace(" ", "").replace("_", "")
        nbits = len(codeword)
    else:
        nbits = 8 * len(codeword)
    if nbits < spec.width:
        raise ValueError(f"codeword of {nbits} bits is shorter than the {spec.width}-bit checksum")
    if spec.init == 0:
        return remainder(codeword, spec.generator) == 0
    value, _ = to_bits(codeword)
    msg = _bit_string(value >> spec.width, nbits - spec.width)
    return crc_bitwise(msg, spec) == value & spec.mask


def is_undetected_fixture(codeword: str, spec: CrcSpec) -> bool:
    bits = codeword.replace(" ", "").replace("_", "")
    return (spec.generator.value, bits) in UNDETECTED_FIXTURES


def remainder(bits: Message, generator: Gf2Poly) -> int:
    """Remainder of the bit sequence (as a polynomial) modulo ``generator``."""
    g = generator.value
    w = generator.degree
    if w is None:
        raise ZeroDivisionError("division by the zero polynomial")
    reg = 0
    for bit in _iter_bits(bits):
        reg = (reg << 1) | bit
        if reg >> w:
            reg ^= g
    return reg


def crc_batch(rows: np.ndarray, nbits: np.ndarray, specs) -> np.ndarray:
    """Table-engine checksums of many messages under many specs at once.

    ``rows`` is ``uint8[n, maxbytes]`` (zero padded) and ``nbits`` the true
    bit length of each row.  Returns ``uint64[len(specs), n]``.  Trailing
    bits that do not fill a byte are clocked through the register one at
    a time, so the result matches ``crc_bitwise`` on the bit string.
    """
    from . import _kernels

    specs = list(specs)
    rows = np.ascontiguousarray(rows, dtype=np.uint8)
    if rows.ndim != 2:
        raise ValueError("rows must be a 2-D byte array")
    nbits = np.ascontiguousarray(nbits, dtype=np.int64)
    if nbits.shape != (rows.shape[0],):
        raise ValueError("nbits must have one entry per row")
    if len(nbits) and (nbits.min() < 0 or nbits.max() > 8 * rows.shape[1]):
        raise ValueError("bit lengths exceed the row buffer")
    tables = np.array([_byte_table(s) for s in specs], dtype=np.uint64).reshape(len(specs), 256)
    taps = np.array([s.low_bits for s in specs], dtype=np.uint64)
    widths = np.array([s.width for s in specs], dtype=np.int64)
    inits = np.array([s.init for s in specs], dtype=np.uint64)
    out = np.zeros((len(specs), rows.shape[0]), dtype=np.uint64)
    if len(specs) and rows.shape[0]:
        _kernels.crc_rows(rows, nbits, tables, taps, widths, inits, out)
    return out


def undetected_bursts(spec: CrcSpec, codeword_bits: int = 512, max_burst: int | None = None):
    """Count burst error patterns (span <= ``max_burst``) that a codeword would accept.

    Every error pattern whose first and last erroneous bits lie at most
    ``max_burst`` apart, at every offset of a ``codeword_bits``-long
    codeword, is checked for divisibility by the generator.  Returns
    ``(patterns_checked, patterns_undetected)``.
    """
    from . import _kernels

    if max_burst is None:
        max_burst = spec.width
    if not 1 <= max_burst <= 30:
        raise ValueError("max_burst must be in 1..30 for exhaustive enumeration")
    g = spec.generator.value
    w = spec.width
    res = np.empty(codeword_bits, dtype=np.uint64)
    r = 1 if w > 0 else 0
    for j in range(codeword_bits):
        res[j] = r
        r <<= 1
        if r >> w:
            r ^= g
    checked, undetected = _kernels.burst_scan(res, max_burst)
    return int(checked), int(undetected)

"""Hamming single-error-correcting code with the SECDED extension.

Codeword positions are numbered from 1.  Parity bits sit at the powers
of two and use even parity over the positions whose index has that bit
set; message bits fill the remaining positions in order.  Messages
shorter than a full block give a shortened code: the codeword simply
stops after the last message bit (high data positions are implied zero).

Bit sequences are strings of ``0``/``1`` characters.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "HammingParams",
    "DecodeResult",
    "SecdedResult",
    "params",
    "params_for_message",
    "encode",
    "decode",
    "syndrome",
    "extend_secded",
    "check_secded",
]


@dataclass(frozen=True)
class HammingParams:
    r: int
    shortened_k: int | None = None

    def __post_init__(self):
        if self.r < 2:
            raise ValueError("a Hamming code needs at least 2 parity bits")
        if self.shortened_k is not None and not 1 <= self.shortened_k <= self.k:
            raise ValueError(f"shortened message length must be in 1..{self.k}")

    @property
    def n(self) -> int:
        return (1 << self.r) - 1

    @property
    def k(self) -> int:
        return self.n - self.r

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)

    @property
    def codeword_length(self) -> int:
        """Transmitted length, accounting for shortening."""
        if self.shortened_k is None:
            return self.n
        return self.shortened_k + self.r


def params(r: int) -> HammingParams:
    return HammingParams(r)


def params_for_message(m: int) -> HammingParams:
    """Smallest code that carries ``m`` message bits, shortened if needed."""
    if m < 1:
        raise ValueError("message must have at least one bit")
    r = 2
    while (1 << r) - 1 - r < m:
        r += 1
    full = (1 << r) - 1 - r
    return HammingParams(r, None if m == full else m)


def _check_bits(bits: str) -> list[int]:
    out = []
    for i, ch in enumerate(bits):
        if ch not in "01":
            raise ValueError(f"invalid bit {ch!r} at position {i}")
        out.append(ord(ch) - 48)
    return out


def _is_pow2(i: int) -> bool:
    return i & (i - 1) == 0


def encode(message: str) -> str:
    data = _check_bits(message)
    p = params_for_message(len(data))
    length = p.codeword_length
    word = [0] * (length + 1)  # 1-based
    it = iter(data)
    for pos in range(1, length + 1):
        if not _is_pow2(pos):
            word[pos] = next(it)
    for i in range(p.r):
        mask = 1 << i
        word[mask] = sum(word[pos] for pos in range(1, length + 1) if pos & mask and pos != mask) & 1
    return "".join(map(str, word[1:]))


def syndrome(codeword: str) -> int:
    """XOR of the (1-based) positions holding a one."""
    s = 0
    for pos, b in enumerate(_check_bits(codeword), start=1):
        if b:
            s ^= pos
    return s


def _layout(length: int) -> int:
    # number of parity positions in a codeword of this length
    r = length.bit_length()
    m = length - r
    if m < 1 or params_for_message(m).r != r:
        raise ValueError(f"no Hamming code has codeword length {length}")
    return r


def _extract(word: list[int]) -> str:
    return "".join(str(b) for pos, b in enumerate(word, start=1) if not _is_pow2(pos))


@dataclass(frozen=True)
class DecodeResult:
    message: str
    syndrome: int
    correction: str  # "none" | "corrected" | "uncorrectable"
    position: int | None = None


def decode(codeword: str) -> DecodeResult:
    """Correct at most one flipped bit and strip the parity bits."""
    word = _check_bits(codeword)
    _layout(len(word))
    s = syndrome(codeword)
    if s == 0:
        return DecodeResult(_extract(word), 0, "none")
    if s > len(word):
        # points into the implied-zero part of a shortened code
        return DecodeResult(_extract(word), s, "uncorrectable")
    word[s - 1] ^= 1
    return DecodeResult(_extract(word), s, "corrected", s)


@dataclass(frozen=True)
class SecdedResult:
    status: str  # "clean" | "corrected" | "double-error-detected" | "uncorrectable"
    position: int | None
    message: str


def extend_secded(codeword: str) -> str:
    """Append an overall even-parity bit."""
    bits = _check_bits(codeword)
    _layout(len(bits))
    return codeword + str(sum(bits) & 1)


def check_secded(extended: str) -> SecdedResult:
    """Classify an extended codeword.

    Positions are 1-based; the overall parity bit is position ``len``.
    """
    bits = _check_bits(extended)
    inner = extended[:-1]
    _layout(len(inner))
    s = syndrome(inner)
    overall = sum(bits) & 1
    if s == 0 and overall == 0:
        return SecdedResult("clean", None, _extract(bits[:-1]))
    if overall == 0:
        return SecdedResult("double-error-detected", None, _extract(bits[:-1]))
    if s == 0:
        return SecdedResult("corrected", len(bits), _extract(bits[:-1]))
    if s > len(inner):
        return SecdedResult("uncorrectable", None, _extract(bits[:-1]))
    fixed = bits[:-1]
    fixed[s - 1] ^= 1
    return SecdedResult("corrected", s, _extract(fixed))

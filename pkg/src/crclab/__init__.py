"""CRC error-detection laboratory: GF(2) polynomials, CRC engines,
generator selection, error injection, the detection harness and
Hamming codes."""

from .crc import CrcSpec, crc_bitwise, crc_table, verify
from .gf2poly import Gf2Poly, parse_poly

__version__ = "0.1.0"

__all__ = ["CrcSpec", "Gf2Poly", "crc_bitwise", "crc_table", "parse_poly", "verify"]

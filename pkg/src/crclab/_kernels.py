"""Compiled inner loops for corpus-scale checksum sweeps."""

import numpy as np
from numba import njit

_U8 = np.uint64(8)
_U1 = np.uint64(1)
_FF = np.uint64(0xFF)


@njit(cache=True, nogil=True)
def crc_rows(data, nbits, tables, taps, widths, inits, out):
    """Checksum every row of ``data`` under every generator.

    data   uint8[rows, maxbytes], MSB-first, zero padded
    nbits  int64[rows] message length in bits (need not be byte aligned)
    tables uint64[G, 256]; taps/inits uint64[G]; widths int64[G] (1..64)
    out    uint64[G, rows]
    """
    G = tables.shape[0]
    regs = np.empty(G, np.uint64)
    masks = np.empty(G, np.uint64)
    rsh = np.empty(G, np.uint64)
    lsh = np.empty(G, np.uint64)
    tops = np.empty(G, np.uint64)
    for g in range(G):
        w = widths[g]
        masks[g] = np.uint64(0xFFFFFFFFFFFFFFFF) >> np.uint64(64 - w)
        # top byte of the register lines up with the input byte; narrow
        # registers are shifted up instead (the (reg << 8) term then vanishes)
        rsh[g] = np.uint64(max(w - 8, 0))
        lsh[g] = np.uint64(max(8 - w, 0))
        tops[g] = np.uint64(w - 1)
    for r in range(data.shape[0]):
        nb = nbits[r]
        nbytes = nb >> 3
        tail = nb & 7
        for g in range(G):
            regs[g] = inits[g]
        for i in range(nbytes):
            b = np.uint64(data[r, i])
            for g in range(G):
                reg = regs[g]
                regs[g] = ((reg << _U8) & masks[g]) ^ tables[g, (((reg << lsh[g]) >> rsh[g]) ^ b) & _FF]
        if tail:
            b = np.uint64(data[r, nbytes])
            for k in range(tail):
                bit = (b >> np.uint64(7 - k)) & _U1
                for g in range(G):
                    reg = regs[g]
                    fb = ((reg >> tops[g]) ^ bit) & _U1
                    reg = (reg << _U1) & masks[g]
                    if fb:
                        reg ^= taps[g]
                    regs[g] = reg
        for g in range(G):
            out[g, r] = regs[g]


@njit(cache=True, nogil=True)
def burst_scan(residues, max_burst):
    """Enumerate every burst of span <= max_burst by its lowest error bit.

    ``residues[j]`` is x^j mod g for bit position j of the codeword.  Each
    pattern's remainder is the XOR of the residues of its set bits, walked
    in Gray-code order.  Returns (patterns checked, patterns with zero
    remainder).
    """
    L = residues.shape[0]
    checked = 0
    undetected = 0
    for s in range(L):
        span = min(max_burst, L - s)
        acc = residues[s]
        checked += 1
        if acc == 0:
            undetected += 1
        free = span - 1
        for i in range(1, 1 << free):
            # lowest set bit of i gives the Gray-code bit to toggle
            j = 0
            t = i
            while not t & 1:
                t >>= 1
                j += 1
            acc ^= residues[s + 1 + j]
            checked += 1
            if acc == 0:
                undetected += 1
    return checked, undetected

"""Candidate generator polynomials: the curated table, constructions, and search.

Selection methods:

``curated-primitive-16``
    hand-picked primitive degree-16 polynomials
``primitive15-times-x+1``
    a primitive degree-15 polynomial multiplied by (x+1)
``random-irreducible``
    seeded random irreducible polynomials
``aasw-search``
    exhaustive ranking by undetected two-bit errors
``standard``
    well-known protocol CRCs (CCITT, IBM CRC-16)
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from math import comb

import numpy as np

from . import gf2poly
from .gf2poly import (
    FACTOR_MAX_DEGREE,
    Gf2Poly,
    PolyClass,
    UnsupportedDegreeError,
    factor,
    is_irreducible,
    is_primitive,
    mul,
    order_of_x,
    parse_poly,
)

__all__ = [
    "METHODS",
    "GeneratorRecord",
    "CuratedTableError",
    "AaswResult",
    "classify",
    "class_label",
    "load_curated",
    "validate_table",
    "primitive15_times_xplus1",
    "random_irreducible",
    "two_bit_uncaught_naive",
    "two_bit_uncaught_order",
    "candidate_set",
    "aasw_search",
    "write_search_csv",
]

log = logging.getLogger(__name__)

METHODS = (
    "curated-primitive-16",
    "primitive15-times-x+1",
    "random-irreducible",
    "aasw-search",
    "standard",
)

X_PLUS_1 = Gf2Poly(0b11)


def class_label(poly: Gf2Poly) -> str:
    """Just the primitive / irreducible / reducible verdict, no factoring."""
    if is_irreducible(poly):
        return "primitive" if is_primitive(poly) else "irreducible-not-primitive"
    return "reducible"


def classify(poly: Gf2Poly) -> PolyClass:
    """Full classification.  ``factors`` is None past the factorization bound."""
    label = class_label(poly)
    order = order_of_x(poly) if poly.constant_term else None
    if poly.degree <= FACTOR_MAX_DEGREE:
        factors = tuple(factor(poly))
    else:
        factors = None
    return PolyClass(label, order, factors)


@dataclass(frozen=True)
class GeneratorRecord:
    poly: Gf2Poly
    selection_method: str
    classification: PolyClass
    aasw_uncaught: int | None = None
    name: str = ""
    inferred: bool = False

    @property
    def hex(self) -> str:
        return self.poly.to_hex()


class CuratedTableError(ValueError):
    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("curated table failed validation:\n  " + "\n  ".join(self.issues))


def _read_rows(path=None):
    if path is None:
        text = resources.files("crclab").joinpath("data/generators.csv").read_text()
    else:
        with open(path, newline="") as fh:
            text = fh.read()
    return list(csv.DictReader(io.StringIO(text)))


def validate_table(rows) -> list[str]:
    """Cross-check each row's three renderings and its method's algebraic claim.

    Returns human-readable issues naming the row (1-based); nothing is repaired.
    """
    return [msg for _, msg in _validate(rows)]


def _validate(rows):
    issues = []
    for i, row in enumerate(rows, start=1):
        label = f"row {i} ({row.get('hex', '?')})"
        try:
            h = parse_poly(row["hex"], "hex17")
            b = parse_poly(row["binary"], "binary")
            t = parse_poly(row["polynomial"], "terms")
        except (KeyError, ValueError) as exc:
            issues.append((i, f"{label}: {exc}"))
            continue
        if not h == b == t:
            issues.append(
                (i, f"{label}: renderings disagree (hex {h.to_hex()}, binary {b.to_hex()}, terms {t.to_hex()})")
            )
            continue
        method = row.get("method")
        if method not in METHODS:
            issues.append((i, f"{label}: unknown selection method {method!r}"))
        elif method == "curated-primitive-16" and not is_primitive(h):
            issues.append((i, f"{label}: listed as primitive but is not"))
        elif method == "primitive15-times-x+1":
            q, r = gf2poly.poly_divmod(h, X_PLUS_1)
            if r:
                issues.append((i, f"{label}: listed as a (x+1) product but x+1 does not divide it"))
            elif q.degree != 15 or not is_primitive(q):
                issues.append((i, f"{label}: quotient by x+1 is not a primitive degree-15 polynomial"))
        elif method == "random-irreducible" and not is_irreducible(h):
            issues.append((i, f"{label}: listed as irreducible but is not"))
    return issues


def load_curated(path=None, strict: bool = True) -> list[GeneratorRecord]:
    """Load the 27-row generator table (26 distinct polynomials).

    Raises ``CuratedTableError`` on any inconsistent row unless ``strict``
    is False, in which case bad rows are logged and skipped.
    """
    rows = _read_rows(path)
    issues = _validate(rows)
    if issues and strict:
        raise CuratedTableError(msg for _, msg in issues)
    bad = {i for i, _ in issues}
    for _, msg in issues:
        log.warning("%s", msg)
    records = []
    for i, row in enumerate(rows, start=1):
        if i in bad:
            continue
        poly = parse_poly(row["hex"], "hex17")
        records.append(
            GeneratorRecord(
                poly=poly,
                selection_method=row["method"],
                classification=classify(poly),
                name=row.get("name") or "",
                inferred=(row.get("inferred", "no").strip().lower() == "yes"),
            )
        )
    return records


def duplicate_polys(records) -> dict[str, list[str]]:
    """Polynomials appearing in more than one record, mapped to their methods."""
    seen: dict[str, list[str]] = {}
    for r in records:
        seen.setdefault(r.hex, []).append(r.selection_method)
    return {h: m for h, m in seen.items() if len(m) > 1}


def primitive15_times_xplus1(p15: Gf2Poly) -> Gf2Poly:
    if p15.degree != 15:
        raise ValueError(f"expected a degree-15 polynomial, got degree {p15.degree}")
    if not is_primitive(p15):
        raise ValueError(f"{p15.to_hex()} is not primitive")
    return mul(p15, X_PLUS_1)


def random_irreducible(degree: int, seed: int) -> Gf2Poly:
    """Seeded rejection sampling over polynomials with both end terms set."""
    if not 1 <= degree <= gf2poly.PRIMITIVE_MAX_DEGREE:
        raise UnsupportedDegreeError(
            f"degree must be in 1..{gf2poly.PRIMITIVE_MAX_DEGREE}, got {degree}"
        )
    if degree == 1:
        return X_PLUS_1
    rng = np.random.default_rng(seed)
    top = 1 << degree
    while True:
        mid = int(rng.integers(0, 1 << (degree - 1), dtype=np.uint64))
        cand = Gf2Poly(top | (mid << 1) | 1)
        if is_irreducible(cand):
            return cand


# --- two-bit error search -----------------------------------------------


@dataclass(frozen=True, order=True)
class AaswResult:
    uncaught_two_bit: int
    candidate: Gf2Poly
    message_len: int = field(compare=False)

    @property
    def codeword_len(self) -> int:
        return self.message_len + self.candidate.degree

    @property
    def hex(self) -> str:
        return self.candidate.to_hex()


def _residues(g: int, k: int) -> list[int]:
    w = g.bit_length() - 1
    out = []
    r = 1
    for _ in range(k):
        out.append(r)
        r <<= 1
        if r >> w:
            r ^= g
    return out


def two_bit_uncaught_naive(g: Gf2Poly, message_len: int, limit: int | None = None) -> int:
    """Count pairs j < i < k with g | x^i + x^j by checking every pair.

    ``limit`` stops counting once the count passes it.
    """
    k = message_len + g.degree
    res = _residues(g.value, k)
    count = 0
    for i in range(1, k):
        ri = res[i]
        for j in range(i):
            if res[j] == ri:
                count += 1
        if limit is not None and count > limit:
            return count
    return count


def two_bit_uncaught_order(g: Gf2Poly, message_len: int) -> int:
    """Same count from the order of x: g | x^i + x^j iff ord(x) divides i - j."""
    if not g.constant_term:
        raise ValueError("order-based count needs a nonzero constant term")
    k = message_len + g.degree
    w = g.degree
    gv = g.value
    t = 2 if w > 1 else 1  # x mod g
    order = None
    for d in range(1, k):
        if t == 1:
            order = d
            break
        t <<= 1
        if t >> w:
            t ^= gv
    if order is None:
        return 0
    return sum(k - d for d in range(order, k, order))


def _count(g: Gf2Poly, message_len: int, limit: int | None) -> int:
    if g.constant_term:
        return two_bit_uncaught_order(g, message_len)
    return two_bit_uncaught_naive(g, message_len, limit)


def candidate_set(name: str = "const1", degree: int = 16) -> list[Gf2Poly]:
    """``const1``: degree-``degree`` polynomials with constant term 1; ``all``: every one."""
    if name == "const1":
        return list(gf2poly.enumerate_degree(degree, constant_term_one=True))
    if name == "all":
        return list(gf2poly.enumerate_degree(degree, constant_term_one=False))
    raise ValueError(f"unknown candidate set {name!r}")


def _eval_chunk(args):
    values, message_len, limit = args
    return [(v, _count(Gf2Poly(v), message_len, limit)) for v in values]


def _save_checkpoint(path, state):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(state, fh)
    os.replace(tmp, path)


def aasw_search(
    message_len: int = 64,
    candidates="const1",
    *,
    degree: int = 16,
    max_uncaught: int | None = None,
    workers: int = 1,
    checkpoint: str | os.PathLike | None = None,
    chunk_size: int = 2048,
) -> list[AaswResult]:
    """Rank candidates by how many two-bit errors they miss.

    ``candidates`` is a set name (see ``candidate_set``) or an iterable of
    polynomials.  Results are sorted by count, then by polynomial value,
    whatever the worker count.  ``max_uncaught`` drops candidates whose
    count exceeds it (and lets the pairwise path stop early).  With a
    ``checkpoint`` path, progress is saved after every chunk and a rerun
    with the same arguments resumes from it.
    """
    if message_len < 1:
        raise ValueError("message_len must be >= 1")
    if isinstance(candidates, str):
        set_name = candidates
        polys = candidate_set(candidates, degree)
    else:
        polys = list(candidates)
        set_name = "explicit:" + ",".join(p.to_hex() for p in polys)
    values = [p.value for p in polys]
    params = {"message_len": message_len, "candidates": set_name, "max_uncaught": max_uncaught}

    done = 0
    scored: list[tuple[int, int]] = []
    if checkpoint is not None and os.path.exists(checkpoint):
        with open(checkpoint) as fh:
            state = json.load(fh)
        if state.get("params") == params:
            done = state["done"]
            scored = [tuple(x) for x in state["scored"]]
            log.info("resuming search at candidate %d of %d", done, len(values))
        else:
            log.warning("checkpoint %s is for different parameters; starting over", checkpoint)

    chunks = [values[i : i + chunk_size] for i in range(done, len(values), chunk_size)]
    jobs = [(c, message_len, max_uncaught) for c in chunks]
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        results = pool.map(_eval_chunk, jobs) if pool else map(_eval_chunk, jobs)
        for chunk, part in zip(chunks, results):
            scored.extend(part)
            done += len(chunk)
            if checkpoint is not None:
                _save_checkpoint(checkpoint, {"params": params, "done": done, "scored": scored})
    finally:
        if pool:
            pool.shutdown()

    out = [
        AaswResult(count, Gf2Poly(v), message_len)
        for v, count in scored
        if max_uncaught is None or count <= max_uncaught
    ]
    out.sort(key=lambda r: (r.uncaught_two_bit, r.candidate.value))
    return out


def write_search_csv(results, fh, with_class: bool = True) -> int:
    """Write ranked results as CSV (hex, method, class, uncaught); returns rows written."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["hex", "method", "class", "uncaught"])
    n = 0
    for r in results:
        label = class_label(r.candidate) if with_class else ""
        w.writerow([r.hex, "aasw-search", label, r.uncaught_two_bit])
        n += 1
    return n


def max_pairs(message_len: int, degree: int = 16) -> int:
    return comb(message_len + degree, 2)

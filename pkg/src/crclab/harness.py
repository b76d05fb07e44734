"""Sweep generator polynomials over a corrupted corpus and count misses.

A block is *undetected* by a generator when the checksum of the corrupted
block equals the checksum of the clean block.  Comparing checksums (rather
than verifying an appended codeword) stays well defined when the
corruption changed the block length.

Blocks are regenerated from the corpus config chunk by chunk, so memory
use does not grow with the corpus.  Chunks can be farmed out to worker
processes; their results are merged in block order, so the report does
not depend on the worker count.

Quartiles use Tukey's hinges: the median of each half of the sorted data,
with the middle element belonging to both halves when the count is odd.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import errinject
from .crc import CrcSpec, crc_batch
from .errinject import CorpusConfig, CorruptionRecord, record_line
from .polygen import GeneratorRecord

__all__ = [
    "ExperimentConfig",
    "GeneratorResult",
    "ExperimentReport",
    "IntegrityError",
    "run",
    "expected_undetected",
    "aggregate",
    "five_number",
    "hd_stats",
    "elusive_blocks",
    "hd_histogram",
    "write_outputs",
    "undetected_matrix",
    "QUARTILE_METHOD",
]

QUARTILE_METHOD = "tukey-hinges"
REPORT_SCHEMA = "crclab.report/1"


class IntegrityError(RuntimeError):
    """The corpus regenerated from the config disagrees with the manifest."""


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: CorpusConfig
    generators: tuple[GeneratorRecord, ...]
    crc_init: int = 0

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.generators:
            raise ValueError("at least one generator is required")


@dataclass
class GeneratorResult:
    hex: str
    method: str
    undetected: int = 0
    blocks: list[int] = field(default_factory=list)


@dataclass
class ExperimentReport:
    packet_count: int
    width: int
    per_generator: list[GeneratorResult]
    blocks: dict[int, dict]  # block_id -> record summary, for every undetected block
    kind_totals: dict[str, int]
    kind_undetected: dict[str, int]
    config: dict = field(default_factory=dict)

    @property
    def expected_undetected(self) -> float:
        return expected_undetected(self.packet_count, self.width)

    def counts(self) -> dict[str, int]:
        return {g.hex: g.undetected for g in self.per_generator}

    def to_dict(self) -> dict:
        summary = aggregate(self)
        return {
            "schema": REPORT_SCHEMA,
            "quartile_method": QUARTILE_METHOD,
            "config": self.config,
            "packet_count": self.packet_count,
            "width": self.width,
            "expected_undetected": self.expected_undetected,
            "mean_undetected": summary["mean"],
            "absolute_deviation": summary["absolute_deviation"],
            "relative_error": summary["relative_error"],
            "per_method_mean": summary["per_method_mean"],
            "per_generator": [
                {"hex": g.hex, "method": g.method, "undetected": g.undetected, "blocks": g.blocks}
                for g in self.per_generator
            ],
            "hd_stats": hd_stats(self),
            "elusive_blocks": [
                {"block_id": b, "multiplicity": m} for b, m in elusive_blocks(self, 1).items()
            ],
            "undetected_blocks": [
                {"block_id": b, **info} for b, info in sorted(self.blocks.items())
            ],
            "kind_totals": self.kind_totals,
            "kind_undetected": self.kind_undetected,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentReport:
        per = [
            GeneratorResult(g["hex"], g["method"], g["undetected"], list(g["blocks"]))
            for g in d["per_generator"]
        ]
        blocks = {}
        for b in d["undetected_blocks"]:
            info = dict(b)
            blocks[info.pop("block_id")] = info
        return cls(
            d["packet_count"], d["width"], per, blocks, d["kind_totals"], d["kind_undetected"], d["config"]
        )


def expected_undetected(packet_count: int, width: int) -> float:
    """Expected misses when each erroneous packet slips through with probability 2^-width."""
    if packet_count < 0 or width < 1:
        raise ValueError("need packet_count >= 0 and width >= 1")
    return packet_count / 2**width


# --- evaluation -----------------------------------------------------------


def undetected_matrix(clean, corrupted, specs) -> np.ndarray:
    """``bool[len(specs), n]``: True where a corrupted packet keeps its clean checksum."""
    n = len(clean)
    if len(corrupted) != n:
        raise ValueError("need one corrupted packet per clean packet")
    packets = list(clean) + list(corrupted)
    maxbytes = max([1] + [len(p.data) for p in packets])
    rows = np.zeros((2 * n, maxbytes), dtype=np.uint8)
    nbits = np.empty(2 * n, dtype=np.int64)
    for j, p in enumerate(packets):
        rows[j, : len(p.data)] = p.data
        nbits[j] = p.nbits
    sums = crc_batch(rows, nbits, specs)
    return sums[:, :n] == sums[:, n:]


def _eval_chunk(args):
    corpus, polys, init, start, stop = args
    specs = [CrcSpec(p, init) for p in polys]
    records: list[CorruptionRecord] = []
    clean = []
    corrupted = []
    for i in range(start, stop):
        good, bad, rec = errinject.materialize_block(corpus, i)
        clean.append(errinject.Packet(good, corpus.packet_bits))
        corrupted.append(bad)
        records.append(rec)
    missed = undetected_matrix(clean, corrupted, specs)
    hits = [np.flatnonzero(missed[g]).tolist() for g in range(len(specs))]
    digest = hashlib.sha256("".join(record_line(r) + "\n" for r in records).encode()).hexdigest()
    kinds: dict[str, int] = {}
    for r in records:
        kinds[r.kind] = kinds.get(r.kind, 0) + 1
    involved = sorted({j for h in hits for j in h})
    info = {
        start + j: {
            "kind": records[j].kind,
            "hd": records[j].hd,
            "differing_bytes": records[j].differing_bytes,
            "length_delta": records[j].length_delta,
        }
        for j in involved
    }
    return start, [[start + j for j in h] for h in hits], info, kinds, digest


def _manifest_digests(path, corpus: CorpusConfig, chunk_size: int):
    """Per-chunk digests of a manifest file, after header-level validation."""
    header = errinject.read_manifest_header(path)
    if header != corpus:
        raise IntegrityError(f"manifest {path} was generated from a different corpus config")
    digests = {}
    expected_id = 0
    h = hashlib.sha256()
    with open(path) as fh:
        fh.readline()
        for line in fh:
            if not line.strip():
                continue
            try:
                rec = CorruptionRecord.from_dict(json.loads(line))
            except (ValueError, KeyError) as exc:
                raise IntegrityError(f"manifest {path}: unreadable record: {exc}") from None
            if rec.block_id != expected_id:
                raise IntegrityError(
                    f"manifest {path}: expected block {expected_id}, found {rec.block_id}"
                )
            h.update((record_line(rec) + "\n").encode())
            expected_id += 1
            if expected_id % chunk_size == 0 or expected_id == corpus.packet_count:
                digests[(expected_id - 1) // chunk_size * chunk_size] = h.hexdigest()
                h = hashlib.sha256()
    if expected_id != corpus.packet_count:
        raise IntegrityError(
            f"manifest {path} has {expected_id} records, corpus has {corpus.packet_count} blocks"
        )
    return digests


def run(
    config: ExperimentConfig,
    workers: int = 1,
    chunk_size: int = 4096,
    manifest=None,
    progress=None,
) -> ExperimentReport:
    """Count undetected corrupted blocks for every generator.

    When a ``manifest`` path is given it is checked against the config
    before counting starts, and every regenerated chunk must match it.
    """
    corpus = config.corpus
    width = max(g.poly.degree for g in config.generators)
    distinct = []
    index = {}
    for g in config.generators:
        if g.hex not in index:
            index[g.hex] = len(distinct)
            distinct.append(g.poly)
    digests = _manifest_digests(manifest, corpus, chunk_size) if manifest is not None else None

    starts = list(range(0, corpus.packet_count, chunk_size))
    jobs = [
        (corpus, distinct, config.crc_init, s, min(s + chunk_size, corpus.packet_count))
        for s in starts
    ]
    hits: list[list[int]] = [[] for _ in distinct]
    blocks: dict[int, dict] = {}
    kind_totals = {k: 0 for k in errinject.KINDS}
    pool = ProcessPoolExecutor(workers) if workers > 1 and len(jobs) > 1 else None
    try:
        results = pool.map(_eval_chunk, jobs) if pool else map(_eval_chunk, jobs)
        for done, (start, chunk_hits, info, kinds, digest) in enumerate(results, start=1):
            if digests is not None and digests.get(start) != digest:
                raise IntegrityError(f"blocks from {start} do not match the manifest")
            for g, h in enumerate(chunk_hits):
                hits[g].extend(h)
            blocks.update(info)
            for k, v in kinds.items():
                kind_totals[k] = kind_totals.get(k, 0) + v
            if progress:
                progress(done, len(jobs))
    finally:
        if pool:
            pool.shutdown()

    per = []
    for g in config.generators:
        h = hits[index[g.hex]]
        per.append(GeneratorResult(g.hex, g.selection_method, len(h), list(h)))
    kind_undetected = {k: 0 for k in kind_totals}
    for g in per:
        for b in g.blocks:
            kind_undetected[blocks[b]["kind"]] = kind_undetected.get(blocks[b]["kind"], 0) + 1
    resolved = {
        "corpus": corpus.to_dict(),
        "generators": [{"hex": g.hex, "method": g.selection_method} for g in config.generators],
        "crc_init": config.crc_init,
    }
    return ExperimentReport(corpus.packet_count, width, per, blocks, kind_totals, kind_undetected, resolved)


# --- analysis ------------------------------------------------------------


def aggregate(report) -> dict:
    """Mean over distinct polynomials, deviation from expectation, per-method means.

    A polynomial listed under two methods counts once in the overall mean
    and once in each method's mean.
    """
    per = report.per_generator
    distinct = {}
    for g in per:
        distinct.setdefault(g.hex, g.undetected)
    expected = expected_undetected(report.packet_count, report.width)
    mean = sum(distinct.values()) / len(distinct) if distinct else 0.0
    absolute = abs(mean - expected)
    relative = absolute / expected if expected else (0.0 if absolute == 0 else math.inf)
    methods: dict[str, list[int]] = {}
    for g in per:
        methods.setdefault(g.method, []).append(g.undetected)
    return {
        "mean": mean,
        "expected": expected,
        "absolute_deviation": absolute,
        "relative_error": relative,
        "distinct_generators": len(distinct),
        "per_method_mean": {m: sum(v) / len(v) for m, v in methods.items()},
    }


def _median(xs):
    n = len(xs)
    mid = n // 2
    return xs[mid] if n % 2 else (xs[mid - 1] + xs[mid]) / 2


def five_number(values) -> dict | None:
    """min, Tukey hinges, median and max; None for an empty input."""
    xs = sorted(values)
    if not xs:
        return None
    half = (len(xs) + 1) // 2
    return {
        "min": xs[0],
        "q1": _median(xs[:half]),
        "median": _median(xs),
        "q3": _median(xs[-half:]),
        "max": xs[-1],
    }


def _undetected_hds(report) -> list[int]:
    out = []
    for g in report.per_generator:
        out.extend(report.blocks[b]["hd"] for b in g.blocks)
    return out


def hd_stats(report) -> dict | None:
    """Five-number summary of Hamming distance over undetected (generator, block) pairs."""
    return five_number(_undetected_hds(report))


def hd_histogram(report, bins: int = 20) -> list[tuple[float, float, int]]:
    hds = _undetected_hds(report)
    if not hds:
        return []
    counts, edges = np.histogram(hds, bins=bins)
    return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))]


def elusive_blocks(report, k: int = 2) -> dict[int, int]:
    """Blocks missed by at least ``k`` generator rows, most-missed first."""
    mult: dict[int, int] = {}
    for g in report.per_generator:
        for b in g.blocks:
            mult[b] = mult.get(b, 0) + 1
    items = sorted(((b, m) for b, m in mult.items() if m >= k), key=lambda bm: (-bm[1], bm[0]))
    return dict(items)


# --- output ---------------------------------------------------------------


def write_outputs(report: ExperimentReport, out_dir, timestamp: str | None = None) -> dict[str, str]:
    """Write the structured report plus CSV tables for external plotting."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "report": os.path.join(out_dir, "report.json"),
        "table": os.path.join(out_dir, "report.csv"),
        "hd_histogram": os.path.join(out_dir, "hd_histogram.csv"),
        "hd_box": os.path.join(out_dir, "hd_box.csv"),
        "method_bars": os.path.join(out_dir, "method_bars.csv"),
    }
    doc = report.to_dict()
    if timestamp is not None:
        doc["generated_at"] = timestamp
    with open(paths["report"], "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(paths["table"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hex", "method", "uncaught"])
        for g in report.per_generator:
            w.writerow([g.hex, g.method, g.undetected])
    with open(paths["hd_histogram"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, c in hd_histogram(report):
            w.writerow([f"{lo:g}", f"{hi:g}", c])
    with open(paths["hd_box"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["min", "q1", "median", "q3", "max"])
        s = hd_stats(report)
        if s is not None:
            w.writerow([f"{s[k]:g}" for k in ("min", "q1", "median", "q3", "max")])
    with open(paths["method_bars"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "mean_uncaught"])
        for m, v in aggregate(report)["per_method_mean"].items():
            w.writerow([m, f"{v:.6f}"])
    return paths

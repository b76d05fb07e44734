"""Deterministic packet corpora with injected errors.

Every random draw is made from a Philox counter-based stream keyed by
``(master_seed, block_id)``: payload bytes come from counter block 0, the
error plan from a disjoint counter range.  A block can therefore be
regenerated in isolation, in any order or any worker, and the corpus
never needs to be stored; a manifest of ``CorruptionRecord`` lines is
enough for a bit-exact replay.

Bit sequences are MSB-first.  Packets are held as packed ``uint8``
arrays plus a bit length (insertions and deletions need not keep the
length byte aligned).

Error kinds
-----------
burst
    XOR a ``length``-bit pattern whose first and last bits are 1 at
    ``offset``; the span of the error is exactly ``length``.
random_flips
    flip ``length`` distinct bits drawn from ``[offset, end)``.
insertion
    insert ``length`` bits before bit ``offset``.
deletion
    remove ``length`` bits starting at ``offset``.
replacement
    overwrite ``length`` bits at ``offset`` with a pattern.
"""

from __future__ import annotations

import json
import math
import os
import struct
from bisect import bisect_right
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "KINDS",
    "ErrorSpec",
    "CorruptionRecord",
    "CorpusConfig",
    "Packet",
    "Manifest",
    "CleanCorpus",
    "ZeroEffectError",
    "InputExhaustedError",
    "ManifestError",
    "corrupt",
    "clean_packet",
    "generate_clean",
    "plan_error",
    "materialize_block",
    "build_corpus",
    "kind_for_block",
    "replay",
    "hamming_distance",
    "write_manifest",
    "read_manifest",
    "write_corpus",
    "read_corpus",
    "random_burst_patterns",
]

KINDS = ("burst", "random_flips", "insertion", "deletion", "replacement")
LENGTH_PRESERVING = ("burst", "random_flips", "replacement")
MAX_ATTEMPTS = 16
MANIFEST_SCHEMA = "crclab.manifest/1"
CORPUS_MAGIC = b"CRCC"
CORPUS_VERSION = 1
_CORPUS_HEADER = struct.Struct(">4sIQQ")

# Philox counter offset separating the error-plan stream from the payload stream
_PLAN_COUNTER = [0, 0, 0, 1]


class ZeroEffectError(ValueError):
    pass


class InputExhaustedError(ValueError):
    pass


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorSpec:
    kind: str
    offset: int
    length: int
    pattern: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown error kind {self.kind!r}")
        if self.offset < 0 or self.length < 0:
            raise ValueError("offset and length must be non-negative")
        if self.pattern is not None:
            if any(c not in "01" for c in self.pattern):
                raise ValueError("pattern must be a bit string")
            if self.kind in ("burst", "insertion", "replacement") and len(self.pattern) != self.length:
                raise ValueError("pattern length must equal the error length")
            if self.kind == "burst" and self.length and (self.pattern[0] != "1" or self.pattern[-1] != "1"):
                raise ValueError("a burst pattern must start and end with an erroneous bit")

    def to_dict(self):
        d = {"kind": self.kind, "offset": self.offset, "length": self.length}
        if self.pattern is not None:
            d["pattern"] = self.pattern
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], int(d["offset"]), int(d["length"]), d.get("pattern"))


@dataclass(frozen=True)
class CorruptionRecord:
    block_id: int
    specs: tuple[ErrorSpec, ...]
    seed: int
    resulting_length: int
    hd: int
    differing_bytes: int
    length_delta: int

    @property
    def kind(self) -> str:
        return self.specs[0].kind if len(self.specs) == 1 else "+".join(s.kind for s in self.specs)

    def to_dict(self):
        return {
            "block_id": self.block_id,
            "specs": [s.to_dict() for s in self.specs],
            "seed": self.seed,
            "resulting_length": self.resulting_length,
            "hd": self.hd,
            "differing_bytes": self.differing_bytes,
            "length_delta": self.length_delta,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["block_id"]),
            tuple(ErrorSpec.from_dict(s) for s in d["specs"]),
            int(d["seed"]),
            int(d["resulting_length"]),
            int(d["hd"]),
            int(d["differing_bytes"]),
            int(d["length_delta"]),
        )


def _default_mix():
    return {k: 0.2 for k in KINDS}


@dataclass(frozen=True)
class CorpusConfig:
    packet_count: int = 727552
    packet_bits: int = 65536
    mix: dict = field(default_factory=_default_mix)
    master_seed: int = 0
    payload_source: str = "seeded-random"
    payload_path: str | None = None
    burst_bits: tuple[int, int] = (18, 4096)
    flip_count: tuple[int, int] = (1, 64)
    indel_bits: tuple[int, int] = (1, 64)
    replace_bits: tuple[int, int] = (1, 4096)

    def __post_init__(self):
        if self.packet_count < 0:
            raise ValueError("packet_count must be >= 0")
        if self.packet_bits <= 0 or self.packet_bits % 8:
            raise ValueError("packet_bits must be a positive multiple of 8")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        unknown = set(self.mix) - set(KINDS)
        if unknown:
            raise ValueError(f"unknown error kinds in mix: {sorted(unknown)}")
        mix = {k: float(self.mix.get(k, 0.0)) for k in KINDS}
        if any(v < 0 for v in mix.values()) or not math.isclose(sum(mix.values()), 1.0, abs_tol=1e-9):
            raise ValueError("mix proportions must be non-negative and sum to 1")
        object.__setattr__(self, "mix", mix)
        for name in ("burst_bits", "flip_count", "indel_bits", "replace_bits"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} must satisfy 1 <= min <= max")
            object.__setattr__(self, name, (int(lo), int(hi)))
        if self.payload_source not in ("seeded-random", "file"):
            raise ValueError("payload_source must be 'seeded-random' or 'file'")
        if self.payload_source == "file" and not self.payload_path:
            raise ValueError("payload_source 'file' needs payload_path")
        if mix["deletion"] > 0 and self.packet_bits < 2:
            raise ValueError("deletion needs packets of at least 2 bits")

    @property
    def packet_bytes(self) -> int:
        return self.packet_bits // 8

    def to_dict(self):
        d = asdict(self)
        d["burst_bits"] = list(self.burst_bits)
        d["flip_count"] = list(self.flip_count)
        d["indel_bits"] = list(self.indel_bits)
        d["replace_bits"] = list(self.replace_bits)
        return d

    @classmethod
    def from_dict(cls, d):
        names = set(cls.__dataclass_fields__)
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown corpus config keys: {sorted(unknown)}")
        kw = dict(d)
        for name in ("burst_bits", "flip_count", "indel_bits", "replace_bits"):
            if name in kw:
                kw[name] = tuple(kw[name])
        return cls(**kw)

    def _key(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def __hash__(self):
        return hash(self._key())


class Packet:
    """A bit sequence stored packed (MSB-first, zero padded to whole bytes)."""

    __slots__ = ("data", "nbits")

    def __init__(self, data, nbits: int | None = None):
        data = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
        if nbits is None:
            nbits = 8 * len(data)
        if len(data) != (nbits + 7) // 8:
            raise ValueError("data length does not match bit length")
        self.data = data
        self.nbits = int(nbits)

    @classmethod
    def from_bits(cls, bits) -> Packet:
        if isinstance(bits, str):
            arr = np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")
        else:
            arr = np.asarray(bits, dtype=np.uint8)
        return cls(np.packbits(arr), len(arr))

    def unpacked(self) -> np.ndarray:
        return np.unpackbits(self.data, count=self.nbits)

    def bits(self) -> str:
        return "".join("1" if b else "0" for b in self.unpacked())

    def tobytes(self) -> bytes:
        return self.data.tobytes()

    def __len__(self):
        return self.nbits

    def __eq__(self, other):
        return (
            isinstance(other, Packet)
            and self.nbits == other.nbits
            and np.array_equal(self.data, other.data)
        )

    def __repr__(self):
        return f"Packet(nbits={self.nbits})"


def _as_packet(x) -> Packet:
    if isinstance(x, Packet):
        return x
    if isinstance(x, str):
        return Packet.from_bits(x)
    if isinstance(x, np.ndarray):
        return Packet(np.ascontiguousarray(x, dtype=np.uint8))
    return Packet(bytes(x))


def hamming_distance(a, b) -> tuple[int, int]:
    """Differing bits after zero-padding the shorter input at its tail.

    Returns ``(hd, length_delta)`` where ``length_delta = |len a - len b|``.
    Inputs may be bit strings, ``Packet`` objects, or bytes.
    """
    hd, _, delta = _compare(_as_packet(a), _as_packet(b))
    return hd, delta


def _compare(a: Packet, b: Packet) -> tuple[int, int, int]:
    n = max(len(a.data), len(b.data))
    x = np.zeros(n, dtype=np.uint8)
    x[: len(a.data)] = a.data
    x[: len(b.data)] ^= b.data
    hd = int(np.bitwise_count(x).sum())
    return hd, int(np.count_nonzero(x)), abs(a.nbits - b.nbits)


def _pattern_bits(spec: ErrorSpec, rng, n: int) -> np.ndarray:
    if spec.pattern is not None:
        return np.frombuffer(spec.pattern.encode(), dtype=np.uint8) - ord("0")
    bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    if spec.kind == "burst" and n:
        bits[0] = 1
        bits[-1] = 1
    return bits


def _check_bounds(spec: ErrorSpec, nbits: int):
    k, off, n = spec.kind, spec.offset, spec.length
    if n == 0:
        raise ZeroEffectError(f"{k} of length 0 changes nothing")
    if k in ("burst", "replacement", "deletion") and off + n > nbits:
        raise ValueError(f"{k} span [{off}, {off + n}) exceeds the {nbits}-bit block")
    if k == "deletion" and n >= nbits:
        raise ValueError("deletion must leave at least one bit")
    if k == "insertion" and off > nbits:
        raise ValueError(f"insertion offset {off} is past the end of the block")
    if k == "random_flips" and n > nbits - off:
        raise ValueError(f"cannot flip {n} distinct bits in [{off}, {nbits})")


def _is_deterministic(spec: ErrorSpec) -> bool:
    return spec.kind == "deletion" or (spec.kind != "random_flips" and spec.pattern is not None)


def _attempt_rng(seed: int, attempt: int):
    return np.random.Generator(np.random.Philox(key=(attempt << 64) | seed))


def _apply(bits: np.ndarray, spec: ErrorSpec, rng) -> np.ndarray:
    k, off, n = spec.kind, spec.offset, spec.length
    if k == "burst":
        out = bits.copy()
        out[off : off + n] ^= _pattern_bits(spec, rng, n)
        return out
    if k == "random_flips":
        pos = off + rng.choice(len(bits) - off, size=n, replace=False)
        out = bits.copy()
        out[pos] ^= 1
        return out
    if k == "insertion":
        return np.concatenate([bits[:off], _pattern_bits(spec, rng, n), bits[off:]])
    if k == "deletion":
        return np.concatenate([bits[:off], bits[off + n :]])
    out = bits.copy()
    out[off : off + n] = _pattern_bits(spec, rng, n)
    return out


def corrupt(block, spec, seed: int, block_id: int = 0) -> tuple[Packet, CorruptionRecord]:
    """Apply one or more error specs to ``block``.

    Random choices come from substreams of ``seed``.  A result identical
    to the input (Hamming distance 0) is retried on the next substream;
    deterministic specs that have no effect raise ``ZeroEffectError``.
    """
    clean = _as_packet(block)
    specs = (spec,) if isinstance(spec, ErrorSpec) else tuple(spec)
    if not specs:
        raise ValueError("at least one error spec is required")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in 64 bits")
    deterministic = all(_is_deterministic(s) for s in specs)
    for attempt in range(MAX_ATTEMPTS):
        rng = _attempt_rng(seed, attempt)
        bits = clean.unpacked()
        for s in specs:
            _check_bounds(s, len(bits))
            bits = _apply(bits, s, rng)
        out = Packet(np.packbits(bits), len(bits))
        hd, nbytes, delta = _compare(clean, out)
        if hd:
            record = CorruptionRecord(block_id, specs, seed, out.nbits, hd, nbytes, delta)
            return out, record
        if deterministic:
            break
    raise ZeroEffectError(f"corruption of block {block_id} left it unchanged")


# --- corpus ---------------------------------------------------------------


def _payload_rng(config: CorpusConfig, block_id: int):
    return np.random.Generator(np.random.Philox(key=(block_id << 64) | config.master_seed))


def _plan_rng(config: CorpusConfig, block_id: int):
    return np.random.Generator(
        np.random.Philox(key=(block_id << 64) | config.master_seed, counter=_PLAN_COUNTER)
    )


def clean_packet(config: CorpusConfig, block_id: int) -> np.ndarray:
    """Payload of block ``block_id`` as ``uint8[packet_bytes]``."""
    if not 0 <= block_id < config.packet_count:
        raise IndexError(f"block {block_id} outside corpus of {config.packet_count}")
    n = config.packet_bytes
    if config.payload_source == "file":
        with open(config.payload_path, "rb") as fh:
            fh.seek(block_id * n)
            data = fh.read(n)
        if len(data) < n:
            raise InputExhaustedError(f"payload file ends before block {block_id}")
        return np.frombuffer(data, dtype=np.uint8)
    return _payload_rng(config, block_id).integers(0, 256, size=n, dtype=np.uint8)


class CleanCorpus:
    """Lazy, regenerating view of a corpus's clean packets."""

    def __init__(self, config: CorpusConfig):
        self.config = config
        if config.payload_source == "file":
            need = config.packet_count * config.packet_bytes
            have = os.path.getsize(config.payload_path)
            if have < need:
                raise InputExhaustedError(
                    f"payload file has {have} bytes, corpus needs {need}"
                )

    def __len__(self):
        return self.config.packet_count

    def __getitem__(self, block_id: int) -> np.ndarray:
        if block_id < 0:
            block_id += len(self)
        return clean_packet(self.config, block_id)

    def __iter__(self):
        for i in range(len(self)):
            yield clean_packet(self.config, i)


def generate_clean(config: CorpusConfig) -> CleanCorpus:
    return CleanCorpus(config)


@lru_cache(maxsize=64)
def _allocation(count: int, mix: tuple[float, ...]) -> tuple[int, tuple[int, ...]]:
    # stride coprime with count, so block_id -> block_id * stride mod count is a bijection
    stride = max(1, round(count * (math.sqrt(5) - 1) / 2))
    while math.gcd(stride, count) != 1:
        stride += 1
    cum = 0.0
    bounds = []
    for p in mix:
        cum += p
        bounds.append(round(count * cum))
    bounds[-1] = count
    return stride, tuple(bounds)


def kind_for_block(config: CorpusConfig, block_id: int) -> str:
    """Error kind of a block: quota allocation interleaved by a fixed permutation.

    Each kind gets ``round`` of its cumulative share, so per-kind totals are
    within one of ``packet_count * proportion``.
    """
    n = config.packet_count
    stride, bounds = _allocation(n, tuple(config.mix[k] for k in KINDS))
    j = (block_id * stride) % n
    return KINDS[bisect_right(bounds, j)]


def _draw(rng, lo, hi) -> int:
    return int(rng.integers(lo, hi + 1))


def plan_error(config: CorpusConfig, block_id: int) -> tuple[ErrorSpec, int]:
    """Error spec and corruption seed for a block, drawn from its plan substream."""
    kind = kind_for_block(config, block_id)
    rng = _plan_rng(config, block_id)
    seed = int(rng.integers(0, 2**64, dtype=np.uint64))
    nb = config.packet_bits
    if kind == "burst":
        lo, hi = config.burst_bits
        n = _draw(rng, min(lo, nb), min(hi, nb))
        off = _draw(rng, 0, nb - n)
    elif kind == "random_flips":
        lo, hi = config.flip_count
        n = _draw(rng, min(lo, nb), min(hi, nb))
        off = 0
    elif kind == "insertion":
        lo, hi = config.indel_bits
        n = _draw(rng, lo, hi)
        off = _draw(rng, 0, nb)
    elif kind == "deletion":
        lo, hi = config.indel_bits
        n = _draw(rng, min(lo, nb - 1), min(hi, nb - 1))
        off = _draw(rng, 0, nb - n)
    else:
        lo, hi = config.replace_bits
        n = _draw(rng, min(lo, nb), min(hi, nb))
        off = _draw(rng, 0, nb - n)
    return ErrorSpec(kind, off, n), seed


def materialize_block(config: CorpusConfig, block_id: int):
    """Regenerate one block: ``(clean payload, corrupted Packet, record)``."""
    clean = clean_packet(config, block_id)
    spec, seed = plan_error(config, block_id)
    corrupted, record = corrupt(Packet(clean, config.packet_bits), spec, seed, block_id=block_id)
    return clean, corrupted, record


def replay(config: CorpusConfig, record: CorruptionRecord) -> Packet:
    """Rebuild a corrupted block from the clean corpus and its record."""
    clean = clean_packet(config, record.block_id)
    out, again = corrupt(Packet(clean, config.packet_bits), record.specs, record.seed, record.block_id)
    if again != record:
        raise ManifestError(f"block {record.block_id} does not replay to its record")
    return out


@dataclass
class Manifest:
    config: CorpusConfig
    records: list[CorruptionRecord]

    def __len__(self):
        return len(self.records)

    def kind_histogram(self) -> dict[str, int]:
        h = {k: 0 for k in KINDS}
        for r in self.records:
            h[r.kind] = h.get(r.kind, 0) + 1
        return h


def iter_records(config: CorpusConfig, start: int = 0, stop: int | None = None):
    stop = config.packet_count if stop is None else stop
    for i in range(start, stop):
        yield materialize_block(config, i)[2]


def build_corpus(config: CorpusConfig) -> tuple[CleanCorpus, Manifest]:
    """Clean corpus handle plus one corruption record per block."""
    corpus = generate_clean(config)
    return corpus, Manifest(config, list(iter_records(config)))


def manifest_header(config: CorpusConfig) -> dict:
    return {"schema": MANIFEST_SCHEMA, "config": config.to_dict()}


def record_line(record: CorruptionRecord) -> str:
    return json.dumps(record.to_dict(), sort_keys=True, separators=(",", ":"))


def write_manifest(path, config: CorpusConfig, records=None) -> int:
    """JSON Lines: a header with the config, then one record per block."""
    if records is None:
        records = iter_records(config)
    n = 0
    with open(path, "w") as fh:
        fh.write(json.dumps(manifest_header(config), sort_keys=True) + "\n")
        for r in records:
            fh.write(record_line(r) + "\n")
            n += 1
    return n


def read_manifest_header(path) -> CorpusConfig:
    with open(path) as fh:
        first = fh.readline()
    try:
        header = json.loads(first)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: bad header line: {exc}") from None
    if header.get("schema") != MANIFEST_SCHEMA:
        raise ManifestError(f"{path}: unsupported manifest schema {header.get('schema')!r}")
    return CorpusConfig.from_dict(header["config"])


def read_manifest(path) -> Manifest:
    config = read_manifest_header(path)
    records = []
    with open(path) as fh:
        fh.readline()
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                records.append(CorruptionRecord.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ManifestError(f"{path}:{lineno}: {exc}") from None
    return Manifest(config, records)


def write_corpus(path, config: CorpusConfig) -> int:
    """Materialize clean packets: fixed header, then packets back to back."""
    with open(path, "wb") as fh:
        fh.write(_CORPUS_HEADER.pack(CORPUS_MAGIC, CORPUS_VERSION, config.packet_bits, config.packet_count))
        for packet in generate_clean(config):
            fh.write(packet.tobytes())
    return config.packet_count


def read_corpus(path) -> tuple[int, np.ndarray]:
    """Return ``(packet_bits, uint8[count, packet_bytes])`` memory-mapped from disk."""
    with open(path, "rb") as fh:
        raw = fh.read(_CORPUS_HEADER.size)
    if len(raw) < _CORPUS_HEADER.size:
        raise ManifestError(f"{path}: truncated corpus header")
    magic, version, bits, count = _CORPUS_HEADER.unpack(raw)
    if magic != CORPUS_MAGIC or version != CORPUS_VERSION:
        raise ManifestError(f"{path}: not a version-{CORPUS_VERSION} corpus file")
    nbytes = bits // 8
    expected = _CORPUS_HEADER.size + count * nbytes
    if os.path.getsize(path) != expected:
        raise ManifestError(f"{path}: size does not match header ({count} x {nbytes} bytes)")
    if count == 0:
        return bits, np.zeros((0, nbytes), dtype=np.uint8)
    data = np.memmap(path, dtype=np.uint8, mode="r", offset=_CORPUS_HEADER.size, shape=(count, nbytes))
    return bits, data


def random_burst_patterns(rng, n: int, codeword_bits: int, min_len: int, max_len: int):
    """``n`` random burst error vectors packed as ``uint8[n, ceil(codeword_bits/8)]``.

    Each vector has span drawn uniformly from ``[min_len, max_len]`` at a
    uniform offset, both span endpoints set and interior bits uniform.
    Also returns the spans and offsets.
    """
    if not 1 <= min_len <= max_len <= codeword_bits:
        raise ValueError("need 1 <= min_len <= max_len <= codeword_bits")
    spans = rng.integers(min_len, max_len + 1, size=n)
    offsets = rng.integers(0, codeword_bits - spans + 1)
    bits = rng.integers(0, 2, size=(n, codeword_bits), dtype=np.uint8)
    col = np.arange(codeword_bits)
    inside = (col >= offsets[:, None]) & (col < (offsets + spans)[:, None])
    bits &= inside.astype(np.uint8)
    rows = np.arange(n)
    bits[rows, offsets] = 1
    bits[rows, offsets + spans - 1] = 1
    return np.packbits(bits, axis=1), spans, offsets

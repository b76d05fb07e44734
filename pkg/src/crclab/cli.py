"""Command-line interface.

Exit codes: 0 success / accept, 1 verify reject, 2 usage or parse error,
3 data-integrity failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime, timezone

from . import errinject, harness, polygen
from .crc import CrcSpec, append_checksum, crc_bitwise, crc_table, is_undetected_fixture, verify
from .gf2poly import PolyParseError, UnsupportedDegreeError, factor, order_of_x, parse_poly

EXIT_OK = 0
EXIT_REJECT = 1
EXIT_USAGE = 2
EXIT_INTEGRITY = 3

RUN_SCHEMA = "crclab.run/1"
_RUN_KEYS = {"schema", "corpus", "generators", "crc_init", "output_dir", "workers", "manifest", "chunk_size"}

log = logging.getLogger("crclab")


class UsageError(Exception):
    pass


def _factor_string(poly) -> str:
    parts = []
    for p, e in factor(poly):
        s = f"({p.to_terms()})"
        parts.append(s if e == 1 else f"{s}^{e}")
    return "".join(parts)


def cmd_poly(args) -> int:
    poly = parse_poly(args.poly, args.form, args.width)
    out = sys.stdout
    if args.action == "parse":
        print(f"hex:    {poly.to_hex()}", file=out)
        print(f"binary: {poly.to_binary()}", file=out)
        print(f"terms:  {poly.to_terms()}", file=out)
        print(f"degree: {poly.degree}", file=out)
        print(f"weight: {poly.weight}", file=out)
        return EXIT_OK
    if poly.degree is None or poly.degree < 1:
        raise UsageError("polynomial must have degree >= 1")
    if args.action == "factor":
        print(_factor_string(poly), file=out)
        return EXIT_OK
    if args.action == "order":
        print(order_of_x(poly), file=out)
        return EXIT_OK
    cls = polygen.classify(poly)
    print(f"hex:    {poly.to_hex()}", file=out)
    print(f"binary: {poly.to_binary()}", file=out)
    print(f"terms:  {poly.to_terms()}", file=out)
    print(f"degree: {poly.degree}  weight: {poly.weight}", file=out)
    if cls.factors is None:
        factors = "factors unavailable"
    else:
        factors = _factor_string(poly)
    if cls.classification == "reducible":
        print(f"reducible: {factors}; primitive: no", file=out)
    else:
        print(f"irreducible: yes; primitive: {'yes' if cls.is_primitive else 'no'}", file=out)
    if cls.order_of_x is not None:
        print(f"order of x: {cls.order_of_x}", file=out)
    return EXIT_OK


def _message_from_args(args):
    given = [x for x in (args.bits, args.hex, args.file) if x is not None]
    if len(given) != 1:
        raise UsageError("give exactly one of --bits, --hex, --file")
    if args.bits is not None:
        return args.bits
    if args.hex is not None:
        h = args.hex[2:] if args.hex.lower().startswith("0x") else args.hex
        try:
            return bytes.fromhex(h)
        except ValueError as exc:
            raise UsageError(f"bad hex message: {exc}") from None
    with open(args.file, "rb") as fh:
        return fh.read()


def cmd_crc(args) -> int:
    spec = CrcSpec(parse_poly(args.generator), int(args.init, 0))
    message = _message_from_args(args)
    if args.verify:
        ok = verify(message, spec)
        if ok:
            note = ""
            if isinstance(message, str) and is_undetected_fixture(message, spec):
                note = " (undetected-error fixture)"
            print(f"accepted{note}")
            return EXIT_OK
        print("rejected")
        return EXIT_REJECT
    if isinstance(message, (bytes, bytearray)) and spec.width >= 8 and not args.bitwise:
        value = crc_table(message, spec)
    else:
        value = crc_bitwise(message, spec)
    print(f"checksum: {value:0{spec.width}b}")
    print(f"hex:      0x{value:0{(spec.width + 3) // 4}X}")
    if isinstance(message, str):
        print(f"codeword: {append_checksum(message, spec)}")
    return EXIT_OK


def _read_candidates(path):
    with open(path) as fh:
        return [parse_poly(line.strip()) for line in fh if line.strip() and not line.startswith("#")]


def cmd_search(args) -> int:
    candidates = _read_candidates(args.candidates_file) if args.candidates_file else args.candidates
    results = polygen.aasw_search(
        args.message_len,
        candidates,
        degree=args.degree,
        max_uncaught=args.max_uncaught,
        workers=args.workers,
        checkpoint=args.checkpoint,
    )
    if args.out == "-":
        n = polygen.write_search_csv(results, sys.stdout, with_class=not args.no_class)
    else:
        with open(args.out, "w", newline="") as fh:
            n = polygen.write_search_csv(results, fh, with_class=not args.no_class)
    zero = sum(1 for r in results if r.uncaught_two_bit == 0)
    print(f"{n} candidates ranked; {zero} with zero uncaught two-bit errors", file=sys.stderr)
    return EXIT_OK


def _load_corpus_config(path) -> errinject.CorpusConfig:
    with open(path) as fh:
        doc = json.load(fh)
    if "corpus" in doc:
        doc = doc["corpus"]
    return errinject.CorpusConfig.from_dict(doc)


def cmd_corpus(args) -> int:
    config = _load_corpus_config(args.config)
    n = errinject.write_manifest(args.manifest, config)
    print(f"wrote {n} records to {args.manifest}", file=sys.stderr)
    if args.materialize:
        errinject.write_corpus(args.materialize, config)
        print(f"wrote clean corpus to {args.materialize}", file=sys.stderr)
    return EXIT_OK


def _resolve_generators(items) -> list[polygen.GeneratorRecord]:
    if not items:
        raise UsageError("config lists no generators")
    table = None
    out = []
    for item in items:
        if item == "table" or (isinstance(item, str) and item.startswith("method:")):
            if table is None:
                table = polygen.load_curated()
            if item == "table":
                out.extend(table)
            else:
                method = item.split(":", 1)[1]
                if method not in polygen.METHODS:
                    raise UsageError(f"unknown selection method {method!r}")
                out.extend(r for r in table if r.selection_method == method)
            continue
        if isinstance(item, dict):
            text, method = item.get("hex"), item.get("method", "standard")
        else:
            text, method = item, "standard"
        poly = parse_poly(text)
        out.append(polygen.GeneratorRecord(poly, method, polygen.classify(poly)))
    return out


def load_run_config(path) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: {exc}") from None
    unknown = set(doc) - _RUN_KEYS
    if unknown:
        raise UsageError(f"{path}: unknown keys {sorted(unknown)}")
    if doc.get("schema") != RUN_SCHEMA:
        raise UsageError(f"{path}: schema must be {RUN_SCHEMA!r}")
    if "corpus" not in doc or "generators" not in doc:
        raise UsageError(f"{path}: 'corpus' and 'generators' are required")
    return doc


def cmd_run(args) -> int:
    doc = load_run_config(args.config)
    try:
        corpus = errinject.CorpusConfig.from_dict(doc["corpus"])
        gens = _resolve_generators(doc["generators"])
        init = doc.get("crc_init", 0)
        init = int(init, 0) if isinstance(init, str) else int(init)
        config = harness.ExperimentConfig(corpus, gens, init)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    out_dir = args.out_dir or doc.get("output_dir") or "."
    workers = args.workers if args.workers is not None else doc.get("workers", 1)
    manifest = args.manifest or doc.get("manifest")
    if manifest is not None and not os.path.isabs(manifest):
        manifest = os.path.join(os.path.dirname(os.path.abspath(args.config)), manifest)
    report = harness.run(config, workers=workers, chunk_size=doc.get("chunk_size", 4096), manifest=manifest)
    report.config["schema"] = RUN_SCHEMA
    stamp = None if args.no_timestamp else datetime.now(timezone.utc).isoformat(timespec="seconds")
    paths = harness.write_outputs(report, out_dir, stamp)
    _print_summary(report)
    print(f"report written to {paths['report']}", file=sys.stderr)
    return EXIT_OK


def _print_summary(report):
    s = harness.aggregate(report)
    print(f"packets: {report.packet_count}  expected undetected per generator: {s['expected']:.7g}")
    for g in report.per_generator:
        print(f"  {g.hex:<10} {g.method:<24} {g.undetected}")
    print(
        f"mean over {s['distinct_generators']} distinct generators: {s['mean']:.6f} "
        f"(absolute deviation {s['absolute_deviation']:.6f}, relative {s['relative_error']:.6f})"
    )
    hd = harness.hd_stats(report)
    if hd:
        print("HD of undetected blocks: " + ", ".join(f"{k} {v:g}" for k, v in hd.items()))
    elusive = harness.elusive_blocks(report, 2)
    if elusive:
        top = list(elusive.items())[:5]
        print("most elusive blocks: " + ", ".join(f"{b} ({m})" for b, m in top))


def cmd_report(args) -> int:
    with open(args.report) as fh:
        doc = json.load(fh)
    if doc.get("schema") != harness.REPORT_SCHEMA:
        raise UsageError(f"{args.report}: not a report file")
    report = harness.ExperimentReport.from_dict(doc)
    _print_summary(report)
    if args.out_dir:
        harness.write_outputs(report, args.out_dir, doc.get("generated_at"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crclab", description="CRC and GF(2) polynomial laboratory")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("poly", help="parse, classify, factor a polynomial or find the order of x")
    sp.add_argument("action", choices=("parse", "classify", "factor", "order"))
    sp.add_argument("poly", help="0x11021, 10011 or x^4+x+1")
    sp.add_argument("--form", choices=("hex17", "binary", "terms", "hex-implicit"))
    sp.add_argument("--width", type=int, help="degree for --form hex-implicit")
    sp.set_defaults(func=cmd_poly)

    sp = sub.add_parser("crc", help="compute or verify a checksum")
    sp.add_argument("-g", "--generator", required=True)
    sp.add_argument("--init", default="0", help="register preload (default 0)")
    sp.add_argument("--bits", help="message as a bit string")
    sp.add_argument("--hex", help="message bytes as hex")
    sp.add_argument("--file", help="message bytes from a file")
    sp.add_argument("--verify", action="store_true", help="treat the input as a codeword")
    sp.add_argument("--bitwise", action="store_true", help="use the bitwise engine for byte input")
    sp.set_defaults(func=cmd_crc)

    sp = sub.add_parser("search", help="rank generators by undetected two-bit errors")
    sp.add_argument("--message-len", type=int, default=64)
    sp.add_argument("--candidates", choices=("const1", "all"), default="const1")
    sp.add_argument("--candidates-file", help="search these polynomials instead (one per line)")
    sp.add_argument("--degree", type=int, default=16)
    sp.add_argument("--max-uncaught", type=int, help="drop candidates missing more than this")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--checkpoint", help="progress file; rerun to resume")
    sp.add_argument("--no-class", action="store_true", help="skip the class column")
    sp.add_argument("-o", "--out", default="-")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("corpus", help="write a corpus manifest (and optionally the clean packets)")
    sp.add_argument("config")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--materialize", help="write clean packets to this file")
    sp.set_defaults(func=cmd_corpus)

    sp = sub.add_parser("run", help="run an experiment from a config file")
    sp.add_argument("config")
    sp.add_argument("--out-dir")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--manifest", help="check the regenerated corpus against this manifest")
    sp.add_argument("--no-timestamp", action="store_true")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("report", help="summarize a report file and optionally re-emit plot data")
    sp.add_argument("report")
    sp.add_argument("--out-dir")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (harness.IntegrityError, errinject.ManifestError, errinject.InputExhaustedError) as exc:
        print(f"crclab: integrity error: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (UsageError, PolyParseError, UnsupportedDegreeError, ValueError, OSError) as exc:
        print(f"crclab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

import csv
import json

import pytest

from crclab import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_poly_classify(capsys):
    code, out, _ = run_cli(capsys, "poly", "classify", "0x18005")
    assert code == 0
    assert "reducible: (x+1)(x^15+x+1); primitive: no" in out
    code, out, _ = run_cli(capsys, "poly", "classify", "0x136C3")
    assert "primitive: yes" in out


def test_poly_parse_factor_order(capsys):
    code, out, _ = run_cli(capsys, "poly", "parse", "x^4+x+1")
    assert code == 0 and "binary: 10011" in out
    assert run_cli(capsys, "poly", "factor", "x^2+1")[1].strip() == "(x+1)^2"
    assert run_cli(capsys, "poly", "order", "0x14AA7")[1].strip() == "13107"


def test_poly_parse_error(capsys):
    code, _, err = run_cli(capsys, "poly", "parse", "0x1G")
    assert code == 2 and "position 3" in err
    assert run_cli(capsys, "poly", "order", "x^3+x")[0] == 2


def test_crc(capsys):
    code, out, _ = run_cli(capsys, "crc", "-g", "1101", "--bits", "100100")
    assert code == 0
    assert "checksum: 001" in out and "hex:      0x1" in out
    code, out, _ = run_cli(capsys, "crc", "-g", "0x11021", "--hex", "313233343536373839")
    assert "0x31C3" in out


def test_crc_file(capsys, tmp_path):
    path = tmp_path / "msg"
    path.write_bytes(b"123456789")
    code, out, _ = run_cli(capsys, "crc", "-g", "0x11021", "--file", str(path))
    assert code == 0 and "0x31C3" in out


def test_crc_verify(capsys):
    code, out, _ = run_cli(capsys, "crc", "-g", "1101", "--bits", "100100001", "--verify")
    assert code == 0 and out.strip() == "accepted"
    code, out, _ = run_cli(capsys, "crc", "-g", "1101", "--bits", "110011001", "--verify")
    assert code == 0 and "accepted (undetected-error fixture)" in out
    code, out, _ = run_cli(capsys, "crc", "-g", "1101", "--bits", "100100011", "--verify")
    assert code == 1 and "rejected" in out


def test_crc_usage_errors(capsys):
    assert run_cli(capsys, "crc", "-g", "1101")[0] == 2
    assert run_cli(capsys, "crc", "-g", "1101", "--bits", "10", "--verify")[0] == 2
    assert run_cli(capsys, "crc", "-g", "zz", "--bits", "10")[0] == 2
    assert run_cli(capsys, "nonsense")[0] == 2


def test_search(capsys, tmp_path):
    out_path = tmp_path / "s.csv"
    code, _, err = run_cli(capsys, "search", "--message-len", "64", "--max-uncaught", "0", "-o", str(out_path))
    assert code == 0
    rows = list(csv.DictReader(out_path.open()))
    assert len(rows) == 2048 + sum(1 for r in rows if r["class"] != "primitive")
    assert all(r["uncaught"] == "0" for r in rows)
    assert "with zero uncaught" in err


def test_search_checkpoint(capsys, tmp_path):
    ck = tmp_path / "ck.json"
    a = tmp_path / "a.csv"
    assert run_cli(capsys, "search", "--message-len", "20", "--checkpoint", str(ck), "--no-class", "-o", str(a))[0] == 0
    assert json.loads(ck.read_text())["done"] == 32768
    b = tmp_path / "b.csv"
    assert run_cli(capsys, "search", "--message-len", "20", "--checkpoint", str(ck), "--no-class", "-o", str(b))[0] == 0
    assert a.read_text() == b.read_text()


def test_search_empty_candidate_set(capsys, tmp_path):
    out_path = tmp_path / "e.csv"
    empty = tmp_path / "none.txt"
    empty.write_text("# nothing to search\n")
    code, _, err = run_cli(capsys, "search", "--candidates-file", str(empty), "-o", str(out_path))
    assert code == 0
    assert out_path.read_text() == "hex,method,class,uncaught\n"
    assert err.startswith("0 candidates")


def test_search_candidates_file(capsys, tmp_path):
    listing = tmp_path / "c.txt"
    listing.write_text("x^16+1\n0x136C3\n")
    code, out, _ = run_cli(capsys, "search", "--candidates-file", str(listing))
    assert code == 0
    assert out.splitlines()[1:] == ["0x136C3,aasw-search,primitive,0", "0x10001,aasw-search,reducible,160"]


def write_config(path, **overrides):
    doc = {
        "schema": "crclab.run/1",
        "corpus": {"packet_count": 600, "packet_bits": 1024, "master_seed": 5},
        "generators": ["method:random-irreducible", "0x11021", {"hex": "0x1F", "method": "standard"}],
        "chunk_size": 128,
    }
    doc.update(overrides)
    path.write_text(json.dumps(doc))
    return path


def test_run_and_report(capsys, tmp_path):
    cfg = write_config(tmp_path / "run.json")
    code, out, _ = run_cli(capsys, "run", str(cfg), "--out-dir", str(tmp_path / "o"), "--no-timestamp")
    assert code == 0
    assert "mean over 12 distinct generators" in out
    doc = json.loads((tmp_path / "o" / "report.json").read_text())
    assert doc["config"]["schema"] == "crclab.run/1"
    assert len(doc["config"]["generators"]) == 12
    assert "generated_at" not in doc
    code, out2, _ = run_cli(capsys, "report", str(tmp_path / "o" / "report.json"), "--out-dir", str(tmp_path / "p"))
    assert code == 0 and out2 == out.split("report written")[0]
    assert (tmp_path / "p" / "report.json").read_text() == (tmp_path / "o" / "report.json").read_text()


def test_run_timestamp(capsys, tmp_path):
    cfg = write_config(tmp_path / "run.json", corpus={"packet_count": 10, "packet_bits": 64})
    assert run_cli(capsys, "run", str(cfg), "--out-dir", str(tmp_path))[0] == 0
    assert "generated_at" in json.loads((tmp_path / "report.json").read_text())


def test_run_zero_packets(capsys, tmp_path):
    cfg = write_config(tmp_path / "run.json", corpus={"packet_count": 0})
    code, out, _ = run_cli(capsys, "run", str(cfg), "--out-dir", str(tmp_path), "--no-timestamp")
    assert code == 0
    doc = json.loads((tmp_path / "report.json").read_text())
    assert all(g["undetected"] == 0 for g in doc["per_generator"])


@pytest.mark.parametrize(
    "overrides",
    [
        {"schema": "crclab.run/0"},
        {"extra": 1},
        {"generators": []},
        {"generators": ["method:nope"]},
        {"corpus": {"packet_bits": 12}},
        {"corpus": {"shape": "round"}},
    ],
)
def test_run_rejects_bad_config(capsys, tmp_path, overrides):
    cfg = write_config(tmp_path / "run.json", **overrides)
    assert run_cli(capsys, "run", str(cfg), "--out-dir", str(tmp_path))[0] == 2


def test_corpus_and_integrity(capsys, tmp_path):
    cfg = write_config(tmp_path / "run.json")
    manifest = tmp_path / "m.jsonl"
    blob = tmp_path / "c.bin"
    code, _, _ = run_cli(capsys, "corpus", str(cfg), "--manifest", str(manifest), "--materialize", str(blob))
    assert code == 0
    assert len(manifest.read_text().splitlines()) == 601
    assert blob.stat().st_size > 600 * 128
    args = ("run", str(cfg), "--out-dir", str(tmp_path / "o"), "--no-timestamp", "--manifest", str(manifest))
    assert run_cli(capsys, *args)[0] == 0
    lines = manifest.read_text().splitlines()
    manifest.write_text("\n".join(lines[:-1]) + "\n")
    assert run_cli(capsys, *args)[0] == 3

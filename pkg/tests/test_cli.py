import json

import pytest
from click.testing import CliRunner

from glyphgate.cli import EXIT_CLEAN, EXIT_ERROR, EXIT_REFUSED, EXIT_VULNERABLE, main
from glyphgate.pdf.write import PageSpec, build_pdf


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    res = CliRunner().invoke(main, ["gen-corpus", "--scheme", "word2019", "--size", "12", "-n", "3",
                                    "--seed", "3", "--out", str(out)])
    assert res.exit_code == 0, res.output
    return out


def _pdfs(d):
    return sorted(p for p in d.glob("*.pdf") if not p.name.endswith(".repaired.pdf"))


def test_gen_corpus_is_deterministic(corpus_dir, tmp_path):
    res = CliRunner().invoke(main, ["gen-corpus", "--scheme", "word2019", "--size", "12", "-n", "3",
                                    "--seed", "3", "--out", str(tmp_path)])
    assert res.exit_code == 0
    a, b = _pdfs(corpus_dir), _pdfs(tmp_path)
    assert [p.name for p in a] == [p.name for p in b]
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()
        truth = json.loads(x.with_suffix(".truth.json").read_text())
        assert truth["scheme"] == "word2019" and truth["version"] == 1


def test_scan_flags_vulnerable_docs(corpus_dir, tmp_path):
    report = tmp_path / "scan.json"
    res = CliRunner().invoke(main, ["scan", *map(str, _pdfs(corpus_dir)), "--report", str(report)])
    assert res.exit_code == EXIT_VULNERABLE
    data = json.loads(report.read_text())
    assert data["version"] == 1
    for d in data["documents"]:
        assert d["scheme"]["id"] == "word2019"
        truth = json.loads((corpus_dir / d["doc"].rsplit("/", 1)[-1]).with_suffix(".truth.json").read_text())
        assert len(d["sites"]) == len(truth["redactions"])


def test_scan_clean_doc_exits_zero(tmp_path):
    p = tmp_path / "plain.pdf"
    p.write_bytes(build_pdf([PageSpec(b"BT /F1 12 Tf 72 700 Td (Nothing hidden here.) Tj ET", {"F1": "tnr"})]))
    assert CliRunner().invoke(main, ["scan", str(p)]).exit_code == EXIT_CLEAN


def test_scan_bad_pdf_is_an_error(tmp_path):
    p = tmp_path / "bad.pdf"
    p.write_bytes(b"%PDF-1.4 nonsense")
    assert CliRunner().invoke(main, ["scan", str(p)]).exit_code == EXIT_ERROR


def test_attack_requires_authorization(corpus_dir):
    res = CliRunner().invoke(main, ["attack", str(_pdfs(corpus_dir)[0])])
    assert res.exit_code == EXIT_REFUSED
    assert "--authorized" in res.output


def test_attack_keeps_the_redacted_name(corpus_dir, tmp_path):
    pdf = _pdfs(corpus_dir)[0]
    truth = json.loads(pdf.with_suffix(".truth.json").read_text())
    hidden = {r["text"] for r in truth["redactions"] if r["kind"] == "excising"}
    report = tmp_path / "attack.json"
    res = CliRunner().invoke(main, ["attack", str(pdf), "--authorized", "--include-too-long",
                                    "--report", str(report)])
    assert res.exit_code == 0, res.output
    data = json.loads(report.read_text())
    assert data["entries"] >= 1000
    found = set()
    for s in data["sites"]:
        found |= set(s["match"]["survivors"])
        if "rank" in s:
            assert 0 <= s["rank"]["p_coll"] <= 1
    assert hidden <= found


def test_attack_unknown_site_ref(corpus_dir):
    res = CliRunner().invoke(main, ["attack", str(_pdfs(corpus_dir)[0]), "p9l9g9", "--authorized"])
    assert res.exit_code == 2
    assert "p9l9g9" in res.output


@pytest.mark.parametrize("mode", ["excise", "deshift", "quantize:24", "widthgrid:600", "monospace"])
def test_repair_writes_and_verifies(mode, corpus_dir, tmp_path):
    report = tmp_path / "repair.json"
    res = CliRunner().invoke(main, ["repair", str(_pdfs(corpus_dir)[0]), "--mode", mode,
                                    "--out-dir", str(tmp_path / "out"), "--report", str(report)])
    assert res.exit_code == 0, res.output
    (doc,) = json.loads(report.read_text())["documents"]
    assert doc["ok"] and doc["protection"]["ok"]
    out = tmp_path / "out" / _pdfs(corpus_dir)[0].name
    assert out.read_bytes().startswith(_pdfs(corpus_dir)[0].read_bytes())
    if mode == "excise":
        assert doc["protection"]["nonexcising_after"] == 0


def test_repair_rejects_unknown_mode(corpus_dir):
    res = CliRunner().invoke(main, ["repair", str(_pdfs(corpus_dir)[0]), "--mode", "blur"])
    assert res.exit_code == 2


def test_measure_reports_every_projection(tmp_path):
    dic = tmp_path / "names.txt"
    dic.write_text("\n".join(["Adams", "Baker", "Clark", "Davis", "Evans", "Ford", "Green", "Hill"]))
    report = tmp_path / "measure.json"
    res = CliRunner().invoke(main, ["measure", "--dict", str(dic), "--scheme", "word2007", "--scheme",
                                    "unadjusted", "--contexts", "3", "--report", str(report)])
    assert res.exit_code == 0, res.output
    rows = json.loads(report.read_text())["rows"]
    assert [(r["scheme"], r["projection"]) for r in rows] == [
        ("word2007", "full"), ("word2007", "width"), ("word2007", "length"),
        ("unadjusted", "full"), ("unadjusted", "length")]
    for r in rows:
        assert r["entropy_x"] == pytest.approx(3.0)
        assert 0 <= r["bits"] <= r["entropy_x"] + 1e-9


def test_version_flag():
    res = CliRunner().invoke(main, ["--version"])
    assert res.exit_code == 0

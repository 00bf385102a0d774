import pytest

from glyphgate.corpus import LINE_WIDTH_PT, gen_corpus, wrap
from glyphgate.metrics import advance_width, load_metrics
from glyphgate.pdf.parse import parse_document
from glyphgate.schemes.base import SchemeId


def test_wrap_respects_line_width():
    m = load_metrics("tnr")
    words = ("The file was reviewed by Fleming last week and then sent on to the clerk " * 8).split()
    lines = wrap(words, m, 12)
    assert " ".join(lines).split() == words
    assert all(advance_width(l, m) * 12 / 1000 <= LINE_WIDTH_PT for l in lines)


def test_same_seed_same_bytes():
    a = gen_corpus(2, "ocr", "tnr", seed=5)
    b = gen_corpus(2, "ocr", "tnr", seed=5)
    assert [p for p, _ in a] == [p for p, _ in b]
    assert [p for p, _ in gen_corpus(2, "ocr", "tnr", seed=6)] != [p for p, _ in a]


def test_cannot_generate_unrecognized():
    with pytest.raises(ValueError):
        gen_corpus(1, SchemeId.NEARWORD, "tnr")


@pytest.mark.parametrize("scheme", ["unadjusted", "word2007", "word2019", "ocr"])
def test_truth_matches_rendered_text(scheme):
    for pdf, truth in gen_corpus(3, scheme, "calibri", size=11, seed=1, redact_rate=1.0):
        doc = parse_document(pdf)
        lines = doc.pages[0].lines
        assert len(lines) == len(truth.lines)
        assert truth.redactions
        for r in truth.redactions:
            original = truth.lines[r.line]
            assert original[r.start:r.start + len(r.text)] == r.text
            if r.kind == "excising":
                assert lines[r.line].text == original[:r.start] + original[r.start + len(r.text):]
            else:
                assert lines[r.line].text == original

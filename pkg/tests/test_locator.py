import pytest

from glyphgate.errors import DegenerateSite
from glyphgate.metrics import advance_width, load_metrics
from glyphgate.locator import (EXCISING, NONEXCISING, RedactionSite, locate, locate_excising,
                               locate_nonexcising, measure_site_width)
from glyphgate.pdf.parse import parse_document
from glyphgate.pdf.write import PageSpec, build_pdf
from glyphgate.schemes.identify import identify_document

BOX = "0 0 0 rg {} re f"


def pdf_of(content: str) -> bytes:
    return build_pdf([PageSpec(content.encode("latin-1"), {"F1": "tnr"})])


def x_after(prefix: str, size: float = 10, x0: float = 72) -> float:
    return x0 + advance_width(prefix, load_metrics("tnr")) * size / 1000


def box(x0: float, x1: float, y: float = 700) -> str:
    return BOX.format(f"{x0:.4f} {y - 3} {x1 - x0:.4f} 12")


def gap_box(prefix: str, units: float, y: float = 700) -> str:
    x0 = x_after(prefix)
    return box(x0, x0 + units / 100, y)


def word_box(prefix: str, word: str, y: float = 700) -> str:
    return box(x_after(prefix) - 0.2, x_after(prefix + word) + 0.2, y)


def test_excised_gap_width():
    # "Call " + 6256-unit gap (martian) + " about", at 10 pt
    content = "BT /F1 10 Tf 72 700 Td [(Call )-6256( about)] TJ ET " + gap_box("Call ", 6256)
    doc = parse_document(pdf_of(content))
    (site,) = locate_excising(doc)
    assert site.kind == EXCISING
    assert site.width == 6256
    assert site.first_on_line
    assert site.ref() == "p0l0g5"
    assert measure_site_width(site, doc) == 6256


def test_gap_without_box_is_not_a_site():
    doc = parse_document(pdf_of("BT /F1 10 Tf 72 700 Td [(Call )-6256( about)] TJ ET"))
    assert locate_excising(doc) == []


def test_slack_filters_small_gaps():
    content = "BT /F1 10 Tf 72 700 Td [(Call )-40( about)] TJ ET " + gap_box("Call ", 40)
    doc = parse_document(pdf_of(content))
    assert len(locate_excising(doc)) == 1
    assert locate_excising(doc, slack=50) == []


def test_too_long_tag():
    content = "BT /F1 10 Tf 72 700 Td [(Call )-9000( about)] TJ ET " + gap_box("Call ", 9000)
    (site,) = locate_excising(parse_document(pdf_of(content)))
    assert site.too_long
    (site,) = locate_excising(parse_document(pdf_of(content)), max_width_pt=None)
    assert not site.too_long


def test_box_over_live_text_is_nonexcising():
    content = "BT /F1 10 Tf 72 700 Td (Ask Wilkins about it) Tj ET " + word_box("Ask ", "Wilkins")
    doc = parse_document(pdf_of(content))
    sites = locate_nonexcising(doc)
    assert [s.covered_text for s in sites] == ["Wilkins"]
    assert sites[0].kind == NONEXCISING
    assert locate_excising(doc) == []


def test_box_painted_before_text_hides_nothing():
    content = word_box("Ask ", "Wilkins") + " BT /F1 10 Tf 72 700 Td (Ask Wilkins about it) Tj ET"
    assert locate_nonexcising(parse_document(pdf_of(content))) == []


def test_partial_word_cover_skipped_in_strict_mode():
    content = "BT /F1 10 Tf 72 700 Td (Ask Wilkins about it) Tj ET " + word_box("Ask ", "Wil")
    doc = parse_document(pdf_of(content))
    assert locate_nonexcising(doc) == []
    assert locate_nonexcising(doc, strict=False)


def test_unrelated_draw_order_does_not_matter():
    text_a = "BT /F1 10 Tf 72 700 Td (Ask Wilkins about it) Tj ET "
    text_b = "BT /F1 10 Tf 72 650 Td [(Call )-6256( today)] TJ ET "
    boxes = word_box("Ask ", "Wilkins") + " " + gap_box("Call ", 6256, y=650)
    one = parse_document(pdf_of(text_a + text_b + boxes))
    two = parse_document(pdf_of(text_b + text_a + boxes))
    key = lambda doc: sorted((s.kind, s.covered_text, s.width, s.box.bbox) for s in locate(doc))
    assert key(one) == key(two)
    assert len(key(one)) == 2


def test_zero_width_site_is_degenerate():
    doc = parse_document(pdf_of("BT /F1 10 Tf 72 700 Td (Call about) Tj ET " + gap_box("Call", 100)))
    site = RedactionSite(0, 0, EXCISING, doc.pages[0].rects[0], (5, 5))
    with pytest.raises(DegenerateSite):
        measure_site_width(site, doc)


@pytest.mark.parametrize("scheme", ["unadjusted", "word2007", "word2019", "ocr"])
@pytest.mark.parametrize("font", ["tnr", "courier"])
def test_recall_and_exact_widths_on_corpus(scheme, font, small_corpus):
    for _, truth, doc in small_corpus[scheme, font]:
        schemes = [i.scheme for i in identify_document(doc)]
        exc = locate_excising(doc, schemes=schemes)
        nonex = locate_nonexcising(doc)
        want_exc = [r for r in truth.redactions if r.kind == "excising"]
        want_non = [r for r in truth.redactions if r.kind == "nonexcising"]
        assert [s.line for s in exc] == [r.line for r in want_exc]
        assert [s.covered_text for s in nonex] == [r.text for r in want_non]
        for s, r in zip(exc, want_exc):
            assert s.width == pytest.approx(r.width_units, abs=0.005)

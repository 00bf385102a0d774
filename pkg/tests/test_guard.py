import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glyphgate.errors import InvalidInterval, RegressionDetected
from glyphgate.guard import (MONO_FONT_ID, ProtectionReport, SiteProtection, excise_nonexcising, grid_width,
                             mm_to_units, mono_cell, mono_count, quantize_shifts, quantize_vector, remove_shifts,
                             repair, strip_redaction_rects, verify_protection)
from glyphgate.ir import simulate_origins
from glyphgate.locator import locate_excising, locate_nonexcising
from glyphgate.metrics import load_metrics
from glyphgate.pdf.parse import parse_document
from glyphgate.pdf.write import write_repair
from glyphgate.schemes.identify import identify_document

MODES = ("excise", "deshift", "quantize:24", "widthgrid:600", "strip-rects", "monospace")


def _schemes(doc):
    return [i.scheme for i in identify_document(doc)]


def _origins_consistent(doc):
    for page in doc.pages:
        for line in page.lines:
            assert simulate_origins(line) == pytest.approx([g.origin_x for g in line.glyphs], abs=1e-6)


def test_mm_to_units():
    # 1 inch at 12 pt is 72 pt, i.e. 6000 units
    assert mm_to_units(25.4, 12) == pytest.approx(6000)


def test_grid_width_rounds_up():
    assert grid_width(1200, 600) == 1200
    assert grid_width(1201, 600) == 1800
    assert grid_width(1, 600) == 600


@settings(max_examples=150)
@given(st.lists(st.floats(-300, 300, allow_nan=False), min_size=1, max_size=20),
       st.floats(1, 100, allow_nan=False))
def test_quantize_vector_bounds_displacement(shifts, interval):
    s = np.array(shifts)
    q = quantize_vector(s, interval)[0]
    assert q[0] == s[0]
    moved = np.cumsum(q[1:]) - np.cumsum(s[1:])
    assert np.all(np.abs(moved) <= interval / 2 + 1e-6)
    offsets = np.cumsum(q[1:]) / interval
    np.testing.assert_allclose(offsets, np.round(offsets), atol=1e-6)


def test_quantize_rejects_bad_interval(small_corpus):
    doc = small_corpus["word2019", "tnr"][0][2]
    for bad in (0, -3, float("nan"), float("inf")):
        with pytest.raises(InvalidInterval):
            quantize_shifts(doc, bad)
    with pytest.raises(InvalidInterval):
        repair(doc, "quantize")
    with pytest.raises(ValueError):
        repair(doc, "sharpen")


def test_quantize_interval_in_mm(small_corpus):
    doc = small_corpus["word2019", "tnr"][0][2]
    _, plan = repair(doc, "quantize:0.1mm")
    # 0.1 mm at 12 pt is 23.6 units
    assert plan.mode == "quantize:24.0"


def test_repairs_do_not_mutate_input(small_corpus):
    doc = small_corpus["word2007", "tnr"][0][2]
    before = [[(g.char, g.exact_shift, g.origin_x) for g in l.glyphs] for l in doc.pages[0].lines]
    for mode in MODES:
        repair(doc, mode)
    assert before == [[(g.char, g.exact_shift, g.origin_x) for g in l.glyphs] for l in doc.pages[0].lines]


def test_excise_removes_hidden_text(small_corpus):
    for _, truth, doc in small_corpus["unadjusted", "tnr"] + small_corpus["word2019", "tnr"]:
        hidden = [r for r in truth.redactions if r.kind == "nonexcising"]
        after, _ = excise_nonexcising(doc)
        assert locate_nonexcising(after) == []
        text = "\n".join(l.text for l in after.pages[0].lines)
        for r in hidden:
            assert r.text not in after.pages[0].lines[r.line].text
        _origins_consistent(after)
        # the glyphs that stay do not move
        kept = {(round(g.origin_x, 6), g.char) for l in after.pages[0].lines for g in l.glyphs}
        orig = {(round(g.origin_x, 6), g.char) for l in doc.pages[0].lines for g in l.glyphs}
        assert kept <= orig
        assert text


def test_deshift_keeps_gaps_and_zeroes_the_rest(small_corpus):
    for _, truth, doc in small_corpus["word2007", "tnr"]:
        sites = locate_excising(doc, max_width_pt=None, schemes=_schemes(doc))
        after, _ = remove_shifts(doc, sites)
        gaps = {(s.line, s.gap_index) for s in sites}
        for li, line in enumerate(after.pages[0].lines):
            for gi, g in enumerate(line.glyphs):
                if (li, gi) in gaps:
                    assert g.exact_shift == doc.pages[0].lines[li].glyphs[gi].exact_shift
                elif gi:
                    assert g.exact_shift == 0 or abs(g.exact_shift) >= 100
        _origins_consistent(after)


def test_strip_rects_only_touches_redaction_boxes(small_corpus):
    _, truth, doc = small_corpus["unadjusted", "tnr"][0]
    after, plan = strip_redaction_rects(doc)
    assert after.pages[0].rects == []
    assert len(plan.remove_ops[0]) == 2 * len(truth.redactions)


def test_monospace_uses_whole_cells(small_corpus):
    _, truth, doc = small_corpus["word2019", "tnr"][0]
    sites = locate_excising(doc, max_width_pt=None, schemes=_schemes(doc))
    after, plan = repair(doc, "monospace")
    assert plan.add_fonts == {MONO_FONT_ID: "courier"}
    cell = mono_cell()
    for s in sites:
        line = after.pages[0].lines[s.line]
        assert {g.font_id for g in line.glyphs} == {MONO_FONT_ID}
        assert line.glyphs[s.gap_index].exact_shift == -cell * int(mono_count(s.width, load_metrics("tnr")))
        assert line.glyphs[0].font_size <= doc.pages[0].lines[s.line].glyphs[0].font_size


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("scheme", ["unadjusted", "word2007", "word2019", "ocr"])
def test_repair_never_leaks_more(mode, scheme, small_corpus, last_names):
    for _, _, doc in small_corpus[scheme, "tnr"]:
        schemes = _schemes(doc)
        after, plan = repair(doc, mode, schemes=schemes)
        rep = verify_protection(doc, after, last_names, plan.mode, schemes=schemes)
        assert rep.ok
        assert rep.bits_after <= rep.bits_before + 1e-9


def test_excise_then_verify_reports_hidden_sites(small_corpus, last_names):
    _, truth, doc = next(item for item in small_corpus["word2019", "tnr"]
                         if any(r.kind == "nonexcising" for r in item[1].redactions))
    after, plan = repair(doc, "excise")
    rep = verify_protection(doc, after, last_names, plan.mode)
    assert rep.nonexcising_before >= 1
    assert rep.nonexcising_after == 0
    hidden = [s for s in rep.sites if s.kind == "nonexcising"]
    assert all(s.bits_after < s.bits_before for s in hidden)


def test_strip_rects_exposes_nonexcising_text(small_corpus, last_names):
    _, truth, doc = next(item for item in small_corpus["unadjusted", "tnr"]
                         if any(r.kind == "nonexcising" for r in item[1].redactions))
    after, plan = repair(doc, "strip-rects")
    rep = verify_protection(doc, after, last_names, plan.mode)
    hidden = [s for s in rep.sites if s.kind == "nonexcising"]
    assert hidden and all(s.note == "text still present" for s in hidden)


def test_regression_is_raised():
    bad = SiteProtection("p0l0g1", "excising", 1.0, 2.0, ["a"], ["a", "b"])
    assert not bad.ok
    lost = SiteProtection("p0l0g1", "excising", 1.0, 0.5, ["a", "b"], ["a"])
    assert not lost.ok
    assert not ProtectionReport("x", [bad]).ok


def test_verify_raises_on_a_leaky_after_doc(small_corpus, last_names):
    # claim a deshift happened but hand back the untouched Word document
    _, _, doc = small_corpus["word2007", "tnr"][0]
    rep = verify_protection(doc, doc, last_names, "deshift", raise_on_regression=False)
    if rep.ok:
        pytest.skip("no Word site whose shifts carry information here")
    with pytest.raises(RegressionDetected):
        verify_protection(doc, doc, last_names, "deshift")


@pytest.mark.parametrize("mode", MODES)
def test_written_repair_reparses_to_the_same_ir(mode, small_corpus):
    data, _, doc = small_corpus["word2019", "tnr"][1]
    after, plan = repair(doc, mode)
    out = write_repair(data, after, plan)
    assert out.startswith(data)  # incremental update
    again = parse_document(out)
    assert [l.text for l in again.pages[0].lines] == [l.text for l in after.pages[0].lines]
    for la, lb in zip(again.pages[0].lines, after.pages[0].lines):
        assert [g.exact_shift for g in la.glyphs] == pytest.approx([g.exact_shift for g in lb.glyphs], abs=1e-3)
        assert [g.origin_x for g in la.glyphs] == pytest.approx([g.origin_x for g in lb.glyphs], abs=1e-3)
    assert len(again.pages[0].rects) == len(after.pages[0].rects)

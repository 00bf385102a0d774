import random
import string

import numpy as np
import pytest

from glyphgate import kernels
from glyphgate.metrics import load_metrics
from glyphgate.schemes.base import SchemeId, word_model
from glyphgate.schemes.identify import identify_document
from glyphgate.schemes.ocr import left_margin, ocr_infer_redaction_width, ocr_line_matches
from glyphgate.schemes.word import (DISP_THRESHOLD, after_to_ir, apply_edits, apply_il_fix, ir_to_after,
                                    load_internal_table, synthesize_internal_widths, word_edit_variants,
                                    word_emit_shifts)
from glyphgate.errors import CombinatoricBudgetExceeded, MissingInternalTable

PURE = kernels.implementation(pure=True)
COMPILED = kernels.implementation(pure=False)


def test_exhibit_fixture():
    internal = load_internal_table("tnr", 14, 2019, synthesize=False)
    assert word_emit_shifts("Exhibit A. ", load_metrics("tnr"), internal, 14) == [0, 0, 0, 0, 0, 0, -2, 0, 0, 0, 0]


def test_no_shift_on_first_glyph_or_after_last():
    model = word_model("arial", 10, 2007)
    text = "The quick brown fox jumps over the lazy dog."
    assert model.shifts(text)[0] == 0
    assert model.after(text)[-1] == 0


def test_shifts_leave_the_threshold_band():
    for font in ("tnr", "arial", "calibri"):
        for version in (2007, 2019):
            sh = word_model(font, 12, version).shifts("Copies went to Ramirez and the clerk.")
            # int(disp*1000 + 0.5) truncates toward zero: +3 is the smallest
            # positive shift, -2 the smallest negative one
            lo = DISP_THRESHOLD * 1000
            assert all(s == 0 or s >= lo or s <= 1 - lo for s in sh)


def test_courier_emits_nothing():
    assert not any(word_model("courier", 12, 2019).shifts("Ask Wilkins about the schedule."))


def test_after_ir_conversion_roundtrip():
    after = [3, 0, -2, 0]
    assert after_to_ir(after) == [0, 3, 0, -2]
    assert ir_to_after(after_to_ir(after)) == after


def test_il_fix_lowers_shifts_landing_on_i_and_l():
    assert apply_il_fix("ail", [0, 5, 0]) == [0, 4, 0]
    assert apply_il_fix("abc", [0, 5, 0]) == [0, 5, 0]


def test_reference_path_matches_kernel():
    m = load_metrics("tnr")
    internal = load_internal_table("tnr", 12, 2007)
    text = "The file was reviewed by Fleming last week."
    assert word_emit_shifts(text, m, internal, 12) == word_model("tnr", 12, 2007).shifts(text)


def test_unpackaged_size_is_synthesised():
    table = load_internal_table("tnr", 11, 2019)
    assert table.widths == synthesize_internal_widths(load_metrics("tnr"), 11, 2019)
    with pytest.raises(MissingInternalTable):
        load_internal_table("tnr", 11, 2019, synthesize=False)


def test_edit_variants_include_unedited_line():
    m = load_metrics("tnr")
    internal = load_internal_table("tnr", 12, 2019)
    text = "Copies went to Ramirez and the clerk."
    variants = word_edit_variants(text, (15, 22), 1, m, internal, 12)
    assert tuple(word_emit_shifts(text, m, internal, 12)) in {v.shifts for v in variants}
    assert tuple(apply_edits(text, m, internal, 12, [])) in {v.shifts for v in variants}
    with pytest.raises(CombinatoricBudgetExceeded):
        word_edit_variants(text, (0, len(text)), 3, m, internal, 12, budget=10)


# -- kernels ---------------------------------------------------------------------------

@pytest.mark.skipif(COMPILED.IMPLEMENTATION != "cython", reason="compiled kernels not built")
@pytest.mark.parametrize("font,size,version", [("tnr", 12, 2019), ("arial", 10, 2007), ("calibri", 14, 2007),
                                               ("courier", 12, 2019)])
def test_compiled_and_pure_kernels_agree(font, size, version):
    model = word_model(font, size, version)
    t = model.table
    rng = random.Random(f"{font}{size}{version}")
    entries = ["".join(rng.choices(string.ascii_letters, k=rng.randint(1, 12))) for _ in range(300)]
    entries.append("x一")  # unrenderable
    codes, offsets = t.encode(entries)
    args = (t.codes("Ask "), t.codes(" about the schedule."), codes, offsets, t.widths, t.internal,
            t.text_space, t.is_space, model.size, version, model.internal.pixel_divisor,
            model.internal.brkpoint, 6, False, model.metrics.monospaced)
    w1, tail1 = COMPILED.word_batch(*args)
    w2, tail2 = PURE.word_batch(*args)
    np.testing.assert_array_equal(w1, w2)
    np.testing.assert_array_equal(tail1, tail2)
    assert np.isnan(w1[-1])
    o1 = COMPILED.ocr_widths(codes, offsets, t.widths, -1.5)
    o2 = PURE.ocr_widths(codes, offsets, t.widths, -1.5)
    np.testing.assert_allclose(o1, o2, rtol=0, atol=1e-9)


def test_batch_width_matches_full_line_simulation():
    model = word_model("tnr", 12, 2019)
    t = model.table
    prefix, suffix = "Call ", " with any questions."
    entries = ["Ramirez", "Fleming", "Wilkins", "Li"]
    codes, offsets = t.encode(entries)
    width, _ = kernels.word_batch(t.codes(prefix), t.codes(suffix), codes, offsets, t.widths, t.internal,
                                  t.text_space, t.is_space, model.size, 2019, model.internal.pixel_divisor,
                                  model.internal.brkpoint, 0, False, False)
    for e, w in zip(entries, width):
        ir = model.shifts(prefix + e + suffix)
        p = len(prefix)
        adv = sum(model.metrics.widths[c] for c in e)
        assert w == pytest.approx(adv - sum(ir[p:p + len(e) + 1]))


# -- identification ----------------------------------------------------------------------

@pytest.mark.parametrize("scheme", ["unadjusted", "word2007", "word2019", "ocr"])
def test_identify_generated_pages(scheme, small_corpus):
    for _, _, doc in small_corpus[scheme, "tnr"]:
        assert identify_document(doc)[0].scheme == SchemeId(scheme)


def test_courier_word_pages_look_unadjusted(small_corpus):
    # Word writes no shifts in a monospaced font, so the page is all zeros
    for _, _, doc in small_corpus["word2019", "courier"]:
        assert identify_document(doc)[0].scheme == SchemeId.UNADJUSTED


def test_identification_json_shape(small_corpus):
    ident = identify_document(small_corpus["word2019", "tnr"][0][2])[0].to_json()
    assert ident["id"] == "word2019"
    assert ident["matched_glyphs"] > 100


def test_scheme_parse_aliases():
    assert SchemeId.parse("Word-2019") == SchemeId.WORD2019
    assert SchemeId.parse("adobe_ocr") == SchemeId.OCR


# -- OCR side channel ---------------------------------------------------------------------

def test_ocr_side_channel_recovers_truth(small_corpus):
    checked = 0
    for _, truth, doc in small_corpus["ocr", "tnr"]:
        page = doc.pages[0]
        assert all(ocr_line_matches(l) for l in page.lines if len(l.glyphs) > 1 and l.ocr_words)
        margin = left_margin(page.lines)
        for red in truth.redactions:
            if red.kind != "excising":
                continue
            w = ocr_infer_redaction_width(page.lines[red.line], red.bbox, margin)
            assert w == pytest.approx(red.width_units, abs=0.005)
            checked += 1
    assert checked

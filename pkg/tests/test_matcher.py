import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glyphgate.dictionaries import expand_initials, expand_titles, name_dictionary
from glyphgate.errors import EmptyMatchSet
from glyphgate.leakmeter import RedactionChannel, sample_contexts
from glyphgate.locator import locate_excising
from glyphgate.matcher import (Dictionary, MatchSet, Projection, collision_probability,
                               correlate, filter_by_glyph_coverage, load_dictionary, match, normalized_freq,
                               match_context, rank, simulate_guess, site_context, word_batch_eval,
                               word_width_slack)
from glyphgate.metrics import widths_of
from glyphgate.schemes.base import SchemeId
from glyphgate.schemes.identify import identify_document


def _excising(doc):
    schemes = [i.scheme for i in identify_document(doc)]
    return schemes, locate_excising(doc, max_width_pt=None, schemes=schemes)


@pytest.mark.parametrize("scheme", ["unadjusted", "word2007", "word2019", "ocr"])
@pytest.mark.parametrize("font", ["tnr", "courier"])
def test_truth_survives(scheme, font, small_corpus, last_names):
    n = 0
    for _, truth, doc in small_corpus[scheme, font]:
        schemes, sites = _excising(doc)
        reds = [r for r in truth.redactions if r.kind == "excising"]
        for site, red in zip(sites, reds):
            ms = match(doc, site, last_names, schemes[site.page])
            assert red.text in ms.survivors
            assert ms.guesses == len(last_names)
            n += 1
    assert n


def test_word_fingerprint_narrows_width_class(small_corpus, last_names):
    """Suffix shifts rule out names that width alone cannot."""
    total_full = total_width = 0
    for _, truth, doc in small_corpus["word2007", "tnr"]:
        schemes, sites = _excising(doc)
        for site in sites:
            ctx = site_context(doc, site, schemes[0])
            total_full += len(match_context(ctx, last_names))
            total_width += len(match_context(ctx, last_names, projection=Projection.WIDTH))
    assert total_full < total_width


def test_word_width_slack_is_sound(last_names):
    """Word shifts inside a redaction move its width by at most the slack."""
    for font in ("tnr", "arial", "calibri"):
        for scheme in (SchemeId.WORD2007, SchemeId.WORD2019):
            for size in (9, 12, 14):
                ch = RedactionChannel(last_names, scheme, font, size)
                adv = widths_of(last_names.entries, ch.metrics).astype(float)
                for ctx in sample_contexts(6, seed=size):
                    sc = ch.site_context(ctx)
                    width, _ = word_batch_eval(sc, *last_names.encoded(sc.model.table))
                    ok = ~np.isnan(width)
                    assert np.max(np.abs(width[ok] - adv[ok])) <= word_width_slack(sc.model)


def test_batch_matches_reference_simulation(last_names):
    ch = RedactionChannel(last_names, SchemeId.WORD2019, "tnr", 12)
    sc = ch.site_context(sample_contexts(1, seed=3)[0])
    width, tail = word_batch_eval(sc, *last_names.encoded(sc.model.table))
    for i in range(0, len(last_names), 97):
        (fp,) = simulate_guess(sc, last_names.entries[i])
        assert width[i] == pytest.approx(fp.redaction_width)
        assert tuple(tail[i]) == pytest.approx(fp.suffix_shifts)


def test_ocr_tc_enters_width(last_names):
    ch = RedactionChannel(last_names, SchemeId.OCR, "tnr", 12, tc=-1.5)
    sc = ch.site_context(sample_contexts(1)[0])
    (fp,) = simulate_guess(sc, "Li")
    assert fp.redaction_width == pytest.approx(1251 + 569 - 2 * 1.5)


def test_edit_history_keeps_truth(small_corpus, last_names):
    _, truth, doc = small_corpus["word2019", "tnr"][0]
    schemes, sites = _excising(doc)
    red = [r for r in truth.redactions if r.kind == "excising"][0]
    ms = match(doc, sites[0], last_names, schemes[0], edits=1)
    assert red.text in ms.survivors


def test_length_projection_needs_count_for_proportional(small_corpus, last_names):
    _, truth, doc = small_corpus["unadjusted", "tnr"][0]
    schemes, sites = _excising(doc)
    with pytest.raises(ValueError):
        match(doc, sites[0], last_names, schemes[0], projection=Projection.LENGTH)
    ms = match(doc, sites[0], last_names, schemes[0], projection=Projection.LENGTH, length=5)
    assert all(len(e) == 5 for e in ms.survivors)


def test_survivors_sorted_by_frequency_then_name():
    d = Dictionary(["b", "a", "c"], {"a": 1, "b": 1, "c": 5})
    ms = MatchSet("x", ["b", "a", "c"])
    stats = rank(ms, d.freq)
    assert [e for e, _ in sorted(stats.rank_of.items(), key=lambda kv: kv[1])] == ["c", "a", "b"]
    assert stats.p_name == pytest.approx(5 / 7)
    assert stats.p_coll == pytest.approx(2 / 7)


def test_rank_empty_raises():
    with pytest.raises(EmptyMatchSet):
        rank(MatchSet("x", []))


def test_frequency_floor_for_unknown_entries():
    p = normalized_freq(["a", "b", "zz"], {"a": 0.6, "b": 0.2})
    assert p["zz"] == pytest.approx(p["b"])
    assert math.fsum(p.values()) == pytest.approx(1)


@settings(max_examples=200)
@given(st.floats(0.0, 0.9), st.floats(0.0, 1.0), st.integers(0, 500))
def test_collision_probability_is_binomial_tail(p_name, frac, n):
    p_coll = frac * (1 - p_name)
    a = p_coll / (1 - p_name)
    direct = math.fsum(math.comb(n, k) * a ** k * (1 - a) ** (n - k) for k in range(1, n + 1)) if n < 200 else None
    got = collision_probability(p_name, p_coll, n)
    assert 0.0 <= got <= 1.0
    if direct is not None:
        assert got == pytest.approx(direct, abs=1e-9)


def test_shortlist_n_is_smallest_crossing():
    stats = rank(MatchSet("x", ["a", "b"]), {"a": 0.5, "b": 0.01, "c": 0.49})
    n = stats.shortlist_n(0.05)
    assert stats.collision_probability(n) > 0.05
    assert stats.collision_probability(n - 1) <= 0.05
    lone = rank(MatchSet("x", ["a"]), {"a": 1.0})
    assert lone.shortlist_n() == math.inf


def test_correlate_and_coverage_filters():
    one = MatchSet("p0l1g3", ["Ann", "Bob", "Cyd"])
    two = MatchSet("p0l5g7", ["Bob", "Cyd", "Dee"])
    both = correlate([one, two])
    assert both.survivors == ["Bob", "Cyd"]
    assert filter_by_glyph_coverage(both, set("Bob")).survivors == ["Bob"]


def test_title_and_initial_variants_collapse(last_names):
    base = Dictionary(last_names.entries[:5], None, name="few")
    d = expand_titles(base)
    assert len(d) == 5 * 5
    ms = MatchSet("x", ["Mr. " + base.entries[0], "Dr. " + base.entries[0], base.entries[1]])
    assert ms.collapsed(d) == [base.entries[0], base.entries[1]]
    ini = expand_initials(base)
    assert ini.base("Q. " + base.entries[2]) == base.entries[2]


def test_load_dictionary_with_counts(tmp_path):
    p = tmp_path / "d.txt"
    p.write_text("# names\nAnn\t3\nBob\t1\nAnn\t3\n", encoding="utf-8")
    d = load_dictionary(p)
    assert d.entries == ["Ann", "Bob"]
    assert d.freq["Ann"] == pytest.approx(0.75)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from glyphgate.errors import MissingGlyph
from glyphgate.metrics import (BUILTIN_FONTS, advance_width, canonical_font_name, index_dictionary,
                               load_metrics, width_classes, widths_of)


@pytest.mark.parametrize("font", BUILTIN_FONTS)
def test_shipped_tables_load(font):
    m = load_metrics(font)
    assert m.units_per_em == 1000
    assert all(m.widths[c] > 0 for c in "abcXYZ .")


def test_reference_widths():
    assert load_metrics("tnr").widths["e"] == 909
    assert load_metrics("arial").widths["e"] == 1139
    assert load_metrics("calibri").widths["e"] == 1019


def test_courier_is_monospaced():
    m = load_metrics("courier")
    assert m.monospaced
    assert set(m.widths.values()) == {1229}
    assert not load_metrics("tnr").monospaced


def test_anagrams_share_width():
    tnr = load_metrics("tnr")
    assert {advance_width(w, tnr) for w in ("tamarin", "trample", "railmen", "martian")} == {6256}
    assert advance_width("cat", tnr) != 6256


def test_missing_glyph():
    with pytest.raises(MissingGlyph):
        advance_width("a一", load_metrics("tnr"))


@pytest.mark.parametrize("name,key", [("ABCDEF+TimesNewRomanPSMT", "tnr"), ("/Arial,Bold", "arial"),
                                      ("CourierNewPSMT", "courier"), ("Wingdings", None)])
def test_base_font_aliases(name, key):
    assert canonical_font_name(name) == key


def test_width_classes_partition_alphabet():
    m = load_metrics("arial")
    table = width_classes(m, "abcdefghijklmnopqrstuvwxyz")
    members = [g for c in table.classes.values() for g in c]
    assert sorted(members) == list("abcdefghijklmnopqrstuvwxyz")
    assert table.class_of("e") == 1139


@given(st.lists(st.text(alphabet="abcdefghijklmnopqrstuvwxyzABC .", max_size=12), max_size=20))
def test_vectorised_widths_match_scalar(entries):
    m = load_metrics("calibri")
    assert widths_of(entries, m).tolist() == [advance_width(e, m) for e in entries]


def test_vectorised_widths_flag_unrenderable():
    assert widths_of(["ab", "a一", ""], load_metrics("tnr")).tolist() == [909 + 1024, -1, 0]


def test_index_dictionary_buckets():
    idx = index_dictionary(["martian", "templar", "cat", "x一"], load_metrics("tnr"), strict=False)
    assert sorted(idx.lookup(6256)) == ["martian", "templar"]
    assert idx.lookup(6256.5) == []
    assert idx.skipped == ["x一"]
    assert sorted(idx.lookup(6250, tolerance=10)) == ["martian", "templar"]
    with pytest.raises(MissingGlyph):
        index_dictionary(["x一"], load_metrics("tnr"))

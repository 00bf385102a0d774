import math

import numpy as np
import pytest

from glyphgate.errors import EmptyDict, InvalidDpi
from glyphgate.leakmeter import (MAX_FREQUENCY, UNIFORM, Context, RedactionChannel, context_entropy,
                                 entropy_empirical, entropy_uniform, fingerprint_labels,
                                 fingerprint_labels_reference, length_entropy, mutual_information, p_correct,
                                 raster_quantization, sample_contexts)
from glyphgate.matcher import Dictionary, Projection
from glyphgate.metrics import index_dictionary, load_metrics
from glyphgate.schemes.base import SchemeId


@pytest.fixture(scope="module")
def small_dict(last_names):
    return Dictionary(last_names.entries[:400], last_names.freq, name="few")


def test_uniform_and_empirical_entropy():
    d = Dictionary(["a", "b", "c", "d"], {"a": 0.5, "b": 0.25, "c": 0.125, "d": 0.125})
    assert entropy_uniform(d) == 2.0
    assert entropy_empirical(d) == pytest.approx(1.75)
    with pytest.raises(EmptyDict):
        entropy_uniform([])
    with pytest.raises(EmptyDict):
        entropy_empirical([])


def test_contexts_are_deterministic():
    assert sample_contexts(5, seed=4) == sample_contexts(5, seed=4)
    for c in sample_contexts(20, seed=1):
        assert c.prefix.endswith(" ") and c.suffix.startswith(" ")
        assert c.prefix.strip() and c.suffix.strip()


def test_courier_leaks_exactly_the_length(small_dict):
    ch = RedactionChannel(small_dict, SchemeId.UNADJUSTED, "courier", 12)
    rep = mutual_information(ch, sample_contexts(3))
    assert rep.bits == pytest.approx(length_entropy(small_dict.entries))
    assert all(b == pytest.approx(rep.per_context[0]) for b in rep.per_context)


def test_unadjusted_leak_is_the_width_partition(small_dict):
    ch = RedactionChannel(small_dict, SchemeId.UNADJUSTED, "tnr", 12)
    idx = index_dictionary(small_dict.entries, load_metrics("tnr"))
    sizes = [len(v) for v in idx.buckets.values()]
    n = sum(sizes)
    want = -sum(s / n * math.log2(s / n) for s in sizes)
    assert mutual_information(ch, sample_contexts(2)).bits == pytest.approx(want)


@pytest.mark.parametrize("scheme", [SchemeId.WORD2007, SchemeId.WORD2019, SchemeId.OCR])
def test_batch_labels_match_reference(scheme, small_dict):
    ch = RedactionChannel(small_dict, scheme, "arial", 10, tc=-1.5)
    for ctx in sample_contexts(2, seed=9):
        a = fingerprint_labels(ch, ctx)
        b = fingerprint_labels_reference(ch, ctx)
        # same partition, labels may be numbered differently
        assert len(set(zip(a.tolist(), b.tolist()))) == len(set(a.tolist())) == len(set(b.tolist()))


def test_projections_only_lose_information(small_dict):
    ctxs = sample_contexts(4, seed=2)
    bits = {p: mutual_information(RedactionChannel(small_dict, SchemeId.WORD2007, "tnr", 12, projection=p),
                                  ctxs).bits
            for p in (Projection.FULL, Projection.WIDTH)}
    assert bits[Projection.WIDTH] <= bits[Projection.FULL] + 1e-9


def test_leak_bounded_by_prior_entropy(small_dict):
    ch = RedactionChannel(small_dict, SchemeId.WORD2019, "calibri", 12, freq=small_dict.freq)
    rep = mutual_information(ch, sample_contexts(3))
    assert 0 <= rep.bits <= rep.entropy_x + 1e-9
    assert 0 < rep.p_correct <= 1


def test_weighted_context_entropy_sums_class_mass():
    d = Dictionary(["ab", "ba", "c"], {"ab": 0.5, "ba": 0.25, "c": 0.25})
    ch = RedactionChannel(d, SchemeId.UNADJUSTED, "courier", 12, freq=d.freq)
    # classes by length: {ab, ba} with mass 0.75 and {c} with 0.25
    want = -(0.75 * math.log2(0.75) + 0.25 * math.log2(0.25))
    assert context_entropy(ch, Context("x ", " y")) == pytest.approx(want)


@pytest.mark.parametrize("strategy", [UNIFORM, MAX_FREQUENCY])
def test_monte_carlo_guessing_matches_exact(strategy, small_dict):
    ch = RedactionChannel(small_dict, SchemeId.UNADJUSTED, "tnr", 12, freq=small_dict.freq)
    ctxs = sample_contexts(1)
    exact = p_correct(ch, ctxs, strategy)
    mc = p_correct(ch, ctxs, strategy, method="monte-carlo", draws=40_000, seed=5)
    sd = math.sqrt(exact * (1 - exact) / 40_000)
    assert abs(mc - exact) <= 5 * sd + 1e-9


def test_max_frequency_beats_uniform_guessing(small_dict):
    ch = RedactionChannel(small_dict, SchemeId.UNADJUSTED, "tnr", 12, freq=small_dict.freq)
    ctxs = sample_contexts(1)
    assert p_correct(ch, ctxs, MAX_FREQUENCY) >= p_correct(ch, ctxs, UNIFORM) - 1e-12


def test_raster_quantization_merges_classes(small_dict):
    idx = index_dictionary(small_dict.entries, load_metrics("tnr"))
    counts = [raster_quantization(idx, dpi, 12).classes for dpi in (72, 150, 300, 600, 10 ** 7)]
    assert counts == sorted(counts)
    assert counts[-1] == len(idx.buckets)
    low = raster_quantization(idx, 72, 12)
    assert low.step == pytest.approx(72000 / (72 * 12))
    assert low.bits <= raster_quantization(idx, 600, 12).bits
    with pytest.raises(InvalidDpi):
        raster_quantization(idx, 0, 12)
    with pytest.raises(ValueError):
        raster_quantization(idx, 300, -1)


def test_length_entropy_weighted():
    assert length_entropy(["a", "bb", "cc", "dd"]) == pytest.approx(-(0.25 * math.log2(0.25) + 0.75 * math.log2(0.75)))
    got = length_entropy(["a", "bb", "cc"], {"a": 0.5, "bb": 0.25, "cc": 0.25})
    assert got == pytest.approx(1.0)
    assert np.isfinite(length_entropy(["a"]))

"""Scheme identifiers and line-level shift models."""

from __future__ import annotations

import enum
import functools
import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .. import kernels
from ..errors import MissingGlyph
from ..metrics import FontMetrics, load_metrics
from .word import InternalWidthTable, _text_space_width, after_to_ir, apply_il_fix, load_internal_table

logger = logging.getLogger(__name__)


class SchemeId(str, enum.Enum):
    UNADJUSTED = "unadjusted"
    WORD2007 = "word2007"
    WORD2019 = "word2019"
    OCR = "ocr"
    NEARWORD = "nearword"
    UNRECOGNIZED = "unrecognized"

    @property
    def is_word(self) -> bool:
        return self in (SchemeId.WORD2007, SchemeId.WORD2019)

    @property
    def version(self) -> Optional[int]:
        return {SchemeId.WORD2007: 2007, SchemeId.WORD2019: 2019}.get(self)

    @classmethod
    def parse(cls, text: str) -> "SchemeId":
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {"adobeocr": "ocr", "near": "nearword", "none": "unadjusted"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class GlyphTable:
    """Per-glyph arrays consumed by the compiled kernels."""

    index: Dict[str, int]
    widths: np.ndarray  # int64, 1000/em
    internal: np.ndarray  # int32, Word dots
    text_space: np.ndarray  # float64
    is_space: np.ndarray  # uint8

    def codes(self, text: str) -> np.ndarray:
        try:
            return np.fromiter((self.index[c] for c in text), dtype=np.int32, count=len(text))
        except KeyError as exc:
            raise MissingGlyph(exc.args[0]) from None

    def encode(self, entries: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
        """CSR encoding of ``entries``; glyphs missing from the table become -1."""
        get = self.index.get
        offsets = np.zeros(len(entries) + 1, dtype=np.int64)
        lengths = np.fromiter((len(e) for e in entries), dtype=np.int64, count=len(entries))
        np.cumsum(lengths, out=offsets[1:])
        joined = "".join(entries)
        codes = np.fromiter((get(c, -1) for c in joined), dtype=np.int32, count=len(joined))
        return codes, offsets


@dataclass(frozen=True)
class WordModel:
    """Word shift model for one font, size and version."""

    metrics: FontMetrics
    internal: InternalWidthTable
    size: float
    version: int
    precise: bool = False
    il_fix: bool = False

    @functools.cached_property
    def table(self) -> GlyphTable:
        u = self.internal.u_const or float(self.metrics.units_per_em)
        glyphs = sorted(set(self.metrics.widths) & set(self.internal.widths), key=ord)
        return GlyphTable(
            index={g: i for i, g in enumerate(glyphs)},
            widths=np.array([self.metrics.widths[g] for g in glyphs], dtype=np.int64),
            internal=np.array([self.internal.widths[g] for g in glyphs], dtype=np.int32),
            text_space=np.array([_text_space_width(self.metrics.widths[g], u, self.version) for g in glyphs],
                                dtype=np.float64),
            is_space=np.array([g == " " for g in glyphs], dtype=np.uint8),
        )

    def after(self, text: str) -> np.ndarray:
        t = self.table
        codes = t.codes(text)
        after, _ = kernels.word_after(t.widths[codes], t.internal[codes], t.text_space[codes],
                                      t.is_space[codes], self.size, self.version,
                                      self.internal.pixel_divisor, self.internal.brkpoint,
                                      self.precise, self.metrics.monospaced)
        if self.il_fix:
            after = np.asarray(apply_il_fix(text, after.tolist()), dtype=np.float64)
        return after

    def shifts(self, text: str) -> list:
        return after_to_ir(self.after(text).tolist())


@functools.lru_cache(maxsize=256)
def word_model(font: str, size: float, version: int, precise: bool = False, il_fix: bool = False) -> WordModel:
    metrics = load_metrics(font)
    internal = load_internal_table(metrics.name, size, version)
    return WordModel(metrics, internal, float(size), version, precise, il_fix)

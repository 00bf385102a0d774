"""Glyph-positioning intermediate representation.

Every glyph carries its advance width and its shift, both in text space
units (thousandths of the font size). The shift follows the TJ sign
convention: it is the net adjustment applied between the previous glyph
and this one, so ``[(H)-2(i)] TJ`` gives ``i`` a shift of -2 and

    origin[i + 1] = origin[i] + (advance[i] - shift[i + 1]) * size / 1000

along the baseline (scaled by horizontal scaling, Tz). Character and word
spacing are folded into the shift of the glyph that follows them.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .metrics import FontMetrics

SHIFT_QUANTUM = 0.01


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def split_shift(value: float) -> Tuple[int, float]:
    """Integer part (half away from zero) and sub-unit residue of a shift."""
    value = round(value, 6)
    whole = round_half_away(value)
    return whole, round(value - whole, 6)


def qshift(value: float) -> float:
    """Shift rounded to the comparison quantum (0.01 units)."""
    return round(value / SHIFT_QUANTUM) * SHIFT_QUANTUM + 0.0


@dataclass(frozen=True)
class Glyph:
    code: int
    unicode: Optional[str]
    advance: float
    shift: int
    origin_x: float
    origin_y: float
    font_id: str
    font_size: float
    residue: float = 0.0
    # OCR side channels: Tc (units) in effect when this glyph was shown and
    # whether a Td/Tm started a new positioning run at this glyph.
    tc: float = 0.0
    run_start: bool = False
    hscale: float = 1.0
    draw_order: int = 0
    color: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    source: int = -1  # index of the BT block that showed the glyph

    @property
    def exact_shift(self) -> float:
        return self.shift + self.residue

    @property
    def char(self) -> str:
        return self.unicode if self.unicode is not None else "�"

    @property
    def advance_pt(self) -> float:
        return self.advance * self.font_size * self.hscale / 1000.0

    @property
    def end_x(self) -> float:
        return self.origin_x + self.advance_pt

    def bbox(self, metrics: Optional[FontMetrics] = None) -> Tuple[float, float, float, float]:
        asc, desc = (800, -200) if metrics is None else (metrics.ascent, metrics.descent)
        k = self.font_size / 1000.0
        return (self.origin_x, self.origin_y + desc * k, self.end_x, self.origin_y + asc * k)


@dataclass(frozen=True)
class OcrWord:
    """Word-level OCR positioning: Tc applied from ``start`` through ``stop - 1``."""

    start: int
    stop: int
    tc: float
    td_x: Optional[float] = None


@dataclass
class TextLine:
    glyphs: List[Glyph]
    baseline_y: float
    ocr_words: List[OcrWord] = field(default_factory=list)
    trailing: float = 0.0

    @property
    def text(self) -> str:
        return "".join(g.char for g in self.glyphs)

    @property
    def words(self) -> List[Tuple[int, int]]:
        """Index spans of maximal non-space runs."""
        spans = []
        start = None
        for i, g in enumerate(self.glyphs):
            if g.char == " ":
                if start is not None:
                    spans.append((start, i))
                    start = None
            elif start is None:
                start = i
        if start is not None:
            spans.append((start, len(self.glyphs)))
        return spans

    @property
    def shifts(self) -> List[float]:
        return [g.exact_shift for g in self.glyphs]

    @property
    def font_id(self) -> Optional[str]:
        return self.glyphs[0].font_id if self.glyphs else None

    @property
    def font_size(self) -> Optional[float]:
        return self.glyphs[0].font_size if self.glyphs else None

    def uniform_font(self) -> bool:
        return len({(g.font_id, g.font_size) for g in self.glyphs}) <= 1


@dataclass(frozen=True)
class RectFill:
    bbox: Tuple[float, float, float, float]
    color: Tuple[float, float, float]
    draw_order: int
    source: int = -1  # index of the ``re`` operator in the page content
    paint: int = -1  # index of the painting operator

    def __post_init__(self):
        x0, y0, x1, y1 = self.bbox
        if x0 > x1 or y0 > y1:
            raise ValueError(f"inverted rectangle {self.bbox}")

    def contains(self, box, eps: float = 1e-6) -> bool:
        x0, y0, x1, y1 = box
        return (self.bbox[0] - eps <= x0 and x1 <= self.bbox[2] + eps
                and self.bbox[1] - eps <= y0 and y1 <= self.bbox[3] + eps)

    def overlaps(self, box, eps: float = 1e-6) -> bool:
        x0, y0, x1, y1 = box
        return (x0 < self.bbox[2] - eps and self.bbox[0] + eps < x1
                and y0 < self.bbox[3] - eps and self.bbox[1] + eps < y1)


@dataclass(frozen=True)
class FontRef:
    font_id: str
    base_font: str
    metrics: FontMetrics
    shipped: bool
    code_bytes: int = 1
    # unicode characters the embedded font program maps (ToUnicode/encoding)
    coverage: frozenset = frozenset()


@dataclass
class Page:
    index: int
    lines: List[TextLine] = field(default_factory=list)
    rects: List[RectFill] = field(default_factory=list)
    mediabox: Tuple[float, float, float, float] = (0.0, 0.0, 612.0, 792.0)
    # CTM in effect at each BT operator (keyed by operator index)
    block_ctm: Dict[int, Tuple[float, ...]] = field(default_factory=dict)
    # font id -> resource name on this page
    font_resources: Dict[str, str] = field(default_factory=dict)

    @property
    def glyph_count(self) -> int:
        return sum(len(line.glyphs) for line in self.lines)


@dataclass
class DocumentIR:
    pages: List[Page]
    fonts: Dict[str, FontRef]
    producer_hint: Optional[str] = None
    warnings: List[str] = field(default_factory=list)

    def metrics(self, font_id: str) -> FontMetrics:
        return self.fonts[font_id].metrics

    def check(self) -> None:
        for page in self.pages:
            for line in page.lines:
                for g in line.glyphs:
                    if g.font_id not in self.fonts:
                        raise ValueError(f"glyph font {g.font_id!r} not in document fonts")

    def copy(self) -> "DocumentIR":
        pages = [Page(p.index, [TextLine(list(l.glyphs), l.baseline_y, list(l.ocr_words), l.trailing)
                                for l in p.lines], list(p.rects), p.mediabox, dict(p.block_ctm),
                      dict(p.font_resources))
                 for p in self.pages]
        return DocumentIR(pages, dict(self.fonts), self.producer_hint, list(self.warnings))


def simulate_origins(line: TextLine) -> List[float]:
    """Re-derive glyph x origins from the first origin, advances and shifts."""
    if not line.glyphs:
        return []
    xs = [line.glyphs[0].origin_x]
    for prev, g in zip(line.glyphs, line.glyphs[1:]):
        k = prev.font_size * prev.hscale / 1000.0
        kg = g.font_size * g.hscale / 1000.0
        xs.append(xs[-1] + prev.advance * k - g.exact_shift * kg)
    return xs


def with_shift(g: Glyph, value: float) -> Glyph:
    whole, residue = split_shift(value)
    return replace(g, shift=whole, residue=residue)


DUMP_HEADER = (
    "# glyphgate IR v1; units are text space (1/1000 font size);"
    " shift uses the TJ sign: origin[i+1] = origin[i] + (advance[i] - shift[i+1]) * size/1000\n"
    "page\tline\tglyph\tunicode\tcode\tfont\tsize\tadvance\tshift\tresidue\tx\ty\n"
)


def dump_ir(doc: DocumentIR) -> str:
    """Deterministic TSV listing, one glyph per row in reading order."""
    out = io.StringIO()
    out.write(DUMP_HEADER)
    for page in doc.pages:
        for li, line in enumerate(page.lines):
            for gi, g in enumerate(line.glyphs):
                uni = "" if g.unicode is None else f"U+{ord(g.unicode[0]):04X}" if len(g.unicode) == 1 else g.unicode
                out.write(
                    f"{page.index}\t{li}\t{gi}\t{uni}\t{g.code}\t{g.font_id}\t{g.font_size:.4f}\t"
                    f"{g.advance:g}\t{g.shift}\t{g.residue:.6f}\t{g.origin_x:.6f}\t{g.origin_y:.6f}\n"
                )
    return out.getvalue()

"""Find redactions: boxes over live text and boxes over excised gaps.

Coverage is decided with vector geometry. A glyph counts as hidden when a
rectangle painted after it contains its whole advance x ascent/descent box.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import DegenerateSite, SideChannelAbsent
from .ir import DocumentIR, Glyph, Page, RectFill, TextLine
from .schemes.base import SchemeId
from .schemes.ocr import left_margin, ocr_side_channel

logger = logging.getLogger(__name__)

CM_PT = 72 / 2.54
DEFAULT_MAX_WIDTH_PT = 2.1 * CM_PT
NONEXCISING = "nonexcising"
EXCISING = "excising"


@dataclass
class RedactionSite:
    page: int
    line: int
    kind: str
    box: RectFill
    # nonexcising: covered glyph span; excising: (gap, gap) where gap is the
    # index of the first glyph after the removed text
    span: Tuple[int, int]
    width: Optional[float] = None  # units, excising only
    covered_text: str = ""
    first_on_line: bool = True
    too_long: bool = False
    tc: float = 0.0  # OCR successor-space Tc when the width came from the side channel
    width_pt: float = 0.0

    @property
    def gap_index(self) -> int:
        return self.span[0]

    def ref(self) -> str:
        return f"p{self.page}l{self.line}g{self.span[0]}"

    def to_json(self) -> dict:
        return {
            "page": self.page,
            "line": self.line,
            "kind": self.kind,
            "span": list(self.span),
            "width_units": self.width,
            "bbox": [round(v, 4) for v in self.box.bbox],
            "first_on_line": self.first_on_line,
            "too_long": self.too_long,
            "ref": self.ref(),
        }


def _glyph_box(g: Glyph, doc: DocumentIR):
    ref = doc.fonts.get(g.font_id)
    return g.bbox(ref.metrics if ref is not None else None)


def _hides(rect: RectFill, g: Glyph, box) -> bool:
    return rect.draw_order > g.draw_order and rect.contains(box)


def locate_nonexcising(doc: DocumentIR, strict: bool = True) -> List[RedactionSite]:
    """Runs of glyphs hidden under later-painted rectangles.

    Pass one keeps rectangles overlapping some glyph box; pass two confirms
    full containment. In strict mode a word only partly hidden is dropped
    with a warning.
    """
    sites = []
    for page in doc.pages:
        if not page.rects:
            continue
        for li, line in enumerate(page.lines):
            if not line.glyphs:
                continue
            span = max(g.font_size for g in line.glyphs) * 2
            lx0, lx1 = line.glyphs[0].origin_x - span, max(g.end_x for g in line.glyphs) + span
            ly0, ly1 = line.baseline_y - span, line.baseline_y + span
            if not any(r.overlaps((lx0, ly0, lx1, ly1)) for r in page.rects):
                continue
            boxes = [_glyph_box(g, doc) for g in line.glyphs]
            hits = [r for r in page.rects if any(r.overlaps(b) for b in boxes)]
            if not hits:
                continue
            hidden: List[Optional[RectFill]] = []
            for g, b in zip(line.glyphs, boxes):
                cover = next((r for r in hits if _hides(r, g, b)), None)
                hidden.append(cover)
            partial = set()
            for a, z in line.words:
                flags = [hidden[i] is not None for i in range(a, z)]
                if any(flags) and not all(flags):
                    partial.update(range(a, z))
            if partial and strict:
                logger.warning("page %d line %d: rectangle covers part of a word; skipped",
                               page.index, li)
            i = 0
            n = len(line.glyphs)
            while i < n:
                if hidden[i] is None or (strict and i in partial) or line.glyphs[i].char == " ":
                    i += 1
                    continue
                rect = hidden[i]
                j = i
                last = i
                while j < n and hidden[j] is rect and not (strict and j in partial):
                    if line.glyphs[j].char != " ":
                        last = j
                    j += 1
                text = "".join(g.char for g in line.glyphs[i:last + 1])
                first = not any(s.page == page.index and s.line == li for s in sites)
                sites.append(RedactionSite(page.index, li, NONEXCISING, rect, (i, last + 1),
                                           covered_text=text, first_on_line=first))
                i = j
    return sites


def _gap_rect(page: Page, line: TextLine, prev: Glyph, nxt: Glyph, doc: DocumentIR) -> Optional[RectFill]:
    x0, x1 = prev.end_x, nxt.origin_x
    lo = line.baseline_y + min(doc.fonts[g.font_id].metrics.descent for g in (prev, nxt)) * prev.font_size / 1000
    hi = line.baseline_y + max(doc.fonts[g.font_id].metrics.ascent for g in (prev, nxt)) * prev.font_size / 1000
    mid_x = (x0 + x1) / 2
    mid_y = (lo + hi) / 2
    best = None
    for r in page.rects:
        bx0, by0, bx1, by1 = r.bbox
        if bx0 <= mid_x <= bx1 and by0 <= mid_y <= by1 and bx1 > x0 and bx0 < x1:
            if best is None or r.draw_order > best.draw_order:
                best = r
    return best


def locate_excising(doc: DocumentIR, slack: float = 0.0, max_width_pt: float = DEFAULT_MAX_WIDTH_PT,
                    schemes: Optional[Sequence[SchemeId]] = None) -> List[RedactionSite]:
    """Gaps between words that a drawn rectangle occupies.

    A gap is the extra space between consecutive glyphs beyond the first
    one's advance; it must exceed ``slack`` units and have visible text on
    both sides of it on the same line. ``schemes`` (one per page) routes
    OCR pages through the Tc side channel.
    """
    sites = []
    for page in doc.pages:
        scheme = schemes[page.index] if schemes is not None else None
        margin = None
        for li, line in enumerate(page.lines):
            gl = line.glyphs
            nonspace = [i for i, g in enumerate(gl) if g.char != " "]
            if len(nonspace) < 2:
                continue
            first_ns, last_ns = nonspace[0], nonspace[-1]
            seen_on_line = 0
            for q in range(1, len(gl)):
                prev, g = gl[q - 1], gl[q]
                gap = -g.exact_shift
                if gap <= slack:
                    continue
                if not (first_ns < q <= last_ns):
                    continue
                rect = _gap_rect(page, line, prev, g, doc)
                if rect is None:
                    continue
                if _hides(rect, prev, _glyph_box(prev, doc)) or _hides(rect, g, _glyph_box(g, doc)):
                    continue  # box over live text, not over a gap
                site = RedactionSite(page.index, li, EXCISING, rect, (q, q),
                                     first_on_line=seen_on_line == 0)
                seen_on_line += 1
                if scheme == SchemeId.OCR:
                    if margin is None:
                        margin = left_margin(page.lines) or 0.0
                    try:
                        sc = ocr_side_channel(line, rect.bbox, margin)
                        site.width, site.tc = sc.width, sc.tc
                    except SideChannelAbsent as exc:
                        logger.warning("page %d line %d: %s", page.index, li, exc)
                        site.width = gap
                else:
                    site.width = measure_gap(line, q)
                site.width_pt = site.width * g.font_size * g.hscale / 1000
                site.too_long = max_width_pt is not None and site.width_pt > max_width_pt
                sites.append(site)
    return sites


def measure_gap(line: TextLine, q: int) -> float:
    """Removed width before glyph ``q``: its negated shift, in units."""
    return round(-line.glyphs[q].exact_shift, 6)


def measure_site_width(site: RedactionSite, doc: DocumentIR, scheme: Optional[SchemeId] = None) -> float:
    """Width of an excising site; OCR pages use the Tc side channel."""
    if site.kind != EXCISING:
        raise DegenerateSite("only excising sites have a measurable width")
    page = doc.pages[site.page]
    line = page.lines[site.line]
    if scheme == SchemeId.OCR:
        margin = left_margin(page.lines)
        width = ocr_side_channel(line, site.box.bbox, margin).width
    else:
        width = measure_gap(line, site.gap_index)
    if width <= 0:
        raise DegenerateSite(f"site {site.ref()} has non-positive width {width}")
    return width


def locate(doc: DocumentIR, schemes: Optional[Sequence[SchemeId]] = None, **kw) -> List[RedactionSite]:
    return locate_nonexcising(doc) + locate_excising(doc, schemes=schemes, **kw)

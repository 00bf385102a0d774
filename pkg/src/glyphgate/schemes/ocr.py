"""Side channels left by OCR text layers.

OCR flows position every word with its own Td and apply a per-word Tc that
also covers the space after the word. When a word is excised, that
successor space survives with the removed word's Tc, and its Td origin
marks where the word ended, so

    width = sum(advances) + n * tc

is recoverable exactly once the word's start x is known.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from ..errors import SideChannelAbsent
from ..ir import TextLine

logger = logging.getLogger(__name__)

_EPS = 1e-6


@dataclass(frozen=True)
class OcrSideChannel:
    width: float  # units
    tc: float  # units per glyph
    successor: int  # glyph index of the surviving successor space
    start_x: float
    from_margin: bool


def left_margin(lines: Sequence[TextLine], exclude: Optional[TextLine] = None) -> Optional[float]:
    """Most common line-start x among ``lines`` (ties to the leftmost)."""
    starts = Counter(round(l.glyphs[0].origin_x, 3) for l in lines
                     if l.glyphs and l is not exclude)
    if not starts:
        return None
    best = max(starts.values())
    return min(x for x, c in starts.items() if c == best)


def ocr_side_channel(line: TextLine, site_bbox: Tuple[float, float, float, float],
                     margin: Optional[float] = None) -> OcrSideChannel:
    x0 = site_bbox[0]
    succ = next((i for i, g in enumerate(line.glyphs) if g.origin_x > x0 + _EPS), None)
    if succ is None:
        raise SideChannelAbsent("no glyph follows the redaction on its line")
    g = line.glyphs[succ]
    if g.char != " " or not line.ocr_words:
        raise SideChannelAbsent("successor space with OCR spacing not found")
    first_on_line = succ == 0
    if first_on_line:
        if margin is None:
            raise SideChannelAbsent("redaction starts the line and no margin is known")
        start = margin
    else:
        start = x0
    k = g.font_size * g.hscale / 1000.0
    width = (g.origin_x - start) / k
    return OcrSideChannel(width=round(width, 6), tc=g.tc, successor=succ, start_x=start,
                          from_margin=first_on_line)


def ocr_infer_redaction_width(line: TextLine, site_bbox: Tuple[float, float, float, float],
                              margin: Optional[float] = None) -> float:
    """Width in units of an excised OCR word whose box starts at ``site_bbox[0]``.

    ``margin`` is the page's left margin (see :func:`left_margin`), used when
    the word began the line so no predecessor places its start.
    """
    return ocr_side_channel(line, site_bbox, margin).width


def ocr_line_matches(line: TextLine, quantum: float = 0.01) -> bool:
    """True if every non-run-start glyph carries exactly the preceding Tc."""
    if not line.ocr_words or len(line.glyphs) < 2:
        return False
    for prev, g in zip(line.glyphs, line.glyphs[1:]):
        if g.run_start:
            continue
        if abs(g.exact_shift + prev.tc) > quantum / 2:
            return False
    return True

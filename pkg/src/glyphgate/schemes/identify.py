"""Page-level scheme identification.

A scheme is credited with every glyph on a line whose whole shift vector
it reproduces. Lines carrying a positioning jump (an excised redaction or
a manual Td inside a run) match nothing and are left out of the Near-Word
distance as well.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from ..errors import GlyphGateError
from ..ir import DocumentIR, Page, TextLine, qshift
from ..metrics import canonical_font_name
from .base import SchemeId, WordModel, word_model
from .ocr import ocr_line_matches

logger = logging.getLogger(__name__)

MATCH_GLYPHS = 100  # a scheme needs strictly more matching glyphs
NEARWORD_L1_PER_CHAR = 0.1  # 10 units per 100 characters
JUMP_UNITS = 100  # shifts this large are layout jumps, not scheme output
WORD_SCHEMES = (SchemeId.WORD2007, SchemeId.WORD2019)


@dataclass
class Identification:
    scheme: SchemeId
    counts: Dict[SchemeId, int]
    line_tags: List[List[SchemeId]]
    nearword_l1: Optional[float] = None
    nearword_chars: int = 0
    above_threshold: List[SchemeId] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "id": self.scheme.value,
            "matched_glyphs": self.counts.get(self.scheme, 0),
            "counts": {k.value: v for k, v in self.counts.items()},
            "above_threshold": [s.value for s in self.above_threshold],
        }


def line_word_model(line: TextLine, doc: DocumentIR, scheme: SchemeId,
                    precise: bool = False, il_fix: bool = False) -> Optional[WordModel]:
    """Word model for a single-font line in a shipped font, else ``None``."""
    if not line.glyphs or not line.uniform_font():
        return None
    ref = doc.fonts.get(line.font_id)
    if ref is None or not ref.shipped:
        return None
    try:
        return word_model(ref.metrics.name, round(line.font_size, 4), scheme.version, precise, il_fix)
    except GlyphGateError:
        return None


def _has_jump(line: TextLine) -> bool:
    return any(abs(g.exact_shift) >= JUMP_UNITS for g in line.glyphs)


def _same(observed: Sequence[float], predicted: Sequence[float]) -> bool:
    return all(qshift(a) == qshift(b) for a, b in zip(observed, predicted))


def predicted_shifts(line: TextLine, model: WordModel) -> Optional[list]:
    try:
        return model.shifts(line.text)
    except KeyError:
        return None


def identify_scheme(page: Page, doc: DocumentIR, il_fix: Optional[bool] = None,
                    precise: bool = False) -> Identification:
    """Identify the shifting scheme used on ``page``.

    ``il_fix=None`` enables the ``i``/``l`` variant only when both letters
    occur on the page.
    """
    if il_fix is None:
        text = "".join(l.text for l in page.lines)
        il_fix = "i" in text and "l" in text
    counts = {s: 0 for s in (SchemeId.UNADJUSTED, SchemeId.WORD2007, SchemeId.WORD2019, SchemeId.OCR)}
    tags: List[List[SchemeId]] = []
    l1 = {s: 0.0 for s in WORD_SCHEMES}
    l1_ok = {s: True for s in WORD_SCHEMES}
    l1_chars = 0
    all_zero = True
    for line in page.lines:
        n = len(line.glyphs)
        shifts = line.shifts
        line_tags: List[SchemeId] = []
        jump = _has_jump(line)
        zero = all(qshift(s) == 0 for s in shifts)
        if not jump and not zero:
            all_zero = False
        if zero:
            line_tags.append(SchemeId.UNADJUSTED)
        if ocr_line_matches(line):
            line_tags.append(SchemeId.OCR)
        if not jump:
            l1_chars += n
        for s in WORD_SCHEMES:
            variants = [False, True] if il_fix else [False]
            best = None
            for fix in variants:
                model = line_word_model(line, doc, s, precise, fix)
                pred = predicted_shifts(line, model) if model is not None else None
                if pred is None:
                    continue
                if _same(shifts, pred):
                    best = 0.0
                    break
                d = sum(abs(a - b) for a, b in zip(shifts, pred))
                best = d if best is None else min(best, d)
            if best == 0.0:
                line_tags.append(s)
            if not jump:
                if best is None:
                    l1_ok[s] = False
                else:
                    l1[s] += best
        for t in line_tags:
            counts[t] += n
        tags.append(line_tags)
    above = [s for s, c in counts.items() if c > MATCH_GLYPHS]
    scheme = None
    if above:
        top = max(counts[s] for s in above)
        winners = [s for s in above if counts[s] == top]
        for pref in (SchemeId.UNADJUSTED, SchemeId.WORD2019, SchemeId.WORD2007, SchemeId.OCR):
            if pref in winners:
                scheme = pref
                break
    near_l1 = None
    candidates = [l1[s] for s in WORD_SCHEMES if l1_ok[s]]
    if candidates and l1_chars:
        near_l1 = min(candidates)
    if scheme is None:
        if all_zero:
            scheme = SchemeId.UNADJUSTED
        elif near_l1 is not None and near_l1 <= NEARWORD_L1_PER_CHAR * l1_chars:
            scheme = SchemeId.NEARWORD
        else:
            scheme = SchemeId.UNRECOGNIZED
    return Identification(scheme=scheme, counts=counts, line_tags=tags, nearword_l1=near_l1,
                          nearword_chars=l1_chars, above_threshold=above)


def identify_document(doc: DocumentIR, **kw) -> List[Identification]:
    return [identify_scheme(p, doc, **kw) for p in doc.pages]

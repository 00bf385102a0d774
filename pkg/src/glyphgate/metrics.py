"""Advance-width tables and the width structure they induce.

Widths are integers on a 1000-per-em grid, so they are the same numbers as
text space units and do not depend on the point size.
"""

from __future__ import annotations

import csv
import functools
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from ._data import find_data
from .errors import MissingGlyph

logger = logging.getLogger(__name__)

BUILTIN_FONTS = ("tnr", "arial", "calibri", "courier")

# PDF /BaseFont spellings that resolve to a shipped table.
_ALIASES = {
    "timesnewroman": "tnr",
    "timesnewromanpsmt": "tnr",
    "times-roman": "tnr",
    "times": "tnr",
    "tnr": "tnr",
    "arial": "arial",
    "arialmt": "arial",
    "helvetica": "arial",
    "calibri": "calibri",
    "courier": "courier",
    "couriernew": "courier",
    "couriernewpsmt": "courier",
}


@dataclass(frozen=True)
class FontMetrics:
    name: str
    widths: Mapping[str, int]
    units_per_em: int = 1000
    ascent: int = 800
    descent: int = -200
    kern: Optional[Callable[[str, str], int]] = field(default=None, compare=False)

    def __post_init__(self):
        bad = [g for g, w in self.widths.items() if w <= 0]
        if bad:
            raise ValueError(f"non-positive widths for {bad!r} in {self.name}")

    @property
    def monospaced(self) -> bool:
        return len(set(self.widths.values())) <= 1

    def width(self, glyph: str) -> int:
        try:
            return self.widths[glyph]
        except KeyError:
            raise MissingGlyph(glyph, self.name) from None

    @functools.cached_property
    def _ascii_table(self) -> np.ndarray:
        table = np.full(128, -1, dtype=np.int64)
        for g, w in self.widths.items():
            if len(g) == 1 and ord(g) < 128:
                table[ord(g)] = w
        return table

    def __hash__(self):
        return hash((self.name, self.units_per_em))


def canonical_font_name(name: str) -> Optional[str]:
    """Map a PDF BaseFont (subset tag and style suffix allowed) to a table."""
    base = name.lstrip("/")
    if len(base) > 7 and base[6] == "+":
        base = base[7:]
    base = base.split(",")[0].lower().replace(" ", "")
    return _ALIASES.get(base)


@functools.lru_cache(maxsize=None)
def load_metrics(name: str) -> FontMetrics:
    """Load a shipped metrics CSV (``glyph,unicode_hex,width_1000em``)."""
    key = canonical_font_name(name) or name
    path = find_data("metrics", f"{key}.csv")
    widths = {}
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            glyph = row["glyph"] or chr(int(row["unicode_hex"], 16))
            if row["unicode_hex"]:
                glyph = chr(int(row["unicode_hex"], 16))
            widths[glyph] = int(row["width_1000em"])
    return FontMetrics(name=key, widths=widths)


def write_metrics(font: FontMetrics, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["glyph", "unicode_hex", "width_1000em"])
        for g in sorted(font.widths, key=ord):
            w.writerow([g, f"{ord(g):04X}", font.widths[g]])


def advance_width(text: str, font: FontMetrics, size: float | None = None) -> int:
    """Total advance of ``text`` in text space units.

    ``size`` is accepted for symmetry with the rest of the API; unit totals
    do not depend on it.
    """
    total = 0
    prev = None
    for ch in text:
        total += font.width(ch)
        if font.kern is not None and prev is not None:
            total += font.kern(prev, ch)
        prev = ch
    return total


def widths_of(entries: Sequence[str], font: FontMetrics) -> np.ndarray:
    """Vectorised :func:`advance_width` over many strings.

    Entries containing a glyph missing from ``font`` get width ``-1``.
    Kerning is not applied here.
    """
    n = len(entries)
    out = np.zeros(n, dtype=np.int64)
    if n == 0:
        return out
    joined = "".join(entries)
    lengths = np.fromiter((len(e) for e in entries), dtype=np.int64, count=n)
    if joined.isascii():
        codes = np.frombuffer(joined.encode("ascii"), dtype=np.uint8)
        per_char = font._ascii_table[codes]
    else:
        per_char = np.fromiter((font.widths.get(c, -1) for c in joined),
                               dtype=np.int64, count=len(joined))
    bad_char = per_char < 0
    per_char = np.where(bad_char, 0, per_char)
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    nonempty = lengths > 0
    if per_char.size:
        sums = np.add.reduceat(per_char, starts[nonempty]) if nonempty.any() else []
        out[nonempty] = sums
        bad = np.add.reduceat(bad_char.astype(np.int64), starts[nonempty]) if nonempty.any() else []
        bad_entries = np.zeros(n, dtype=bool)
        bad_entries[nonempty] = np.asarray(bad) > 0
        out[bad_entries] = -1
    return out


@dataclass(frozen=True)
class WidthClassTable:
    classes: Mapping[int, frozenset]

    def class_of(self, glyph: str) -> int:
        for width, members in self.classes.items():
            if glyph in members:
                return width
        raise MissingGlyph(glyph)

    def __len__(self):
        return len(self.classes)


def width_classes(font: FontMetrics, alphabet: Optional[Iterable[str]] = None) -> WidthClassTable:
    """Partition ``alphabet`` (default: every glyph of ``font``) by width."""
    glyphs = font.widths if alphabet is None else list(alphabet)
    groups: dict[int, set] = {}
    for g in glyphs:
        groups.setdefault(font.width(g), set()).add(g)
    return WidthClassTable({w: frozenset(groups[w]) for w in sorted(groups)})


@dataclass
class DictWidthIndex:
    """Dictionary entries bucketed by total advance width."""

    font: FontMetrics
    buckets: dict
    skipped: list = field(default_factory=list)

    def lookup(self, width: float, tolerance: float = 0) -> list:
        if tolerance <= 0:
            return list(self.buckets.get(int(width), ())) if float(width).is_integer() else []
        lo, hi = width - tolerance, width + tolerance
        out = []
        for w in self.buckets:
            if lo <= w <= hi:
                out.extend(self.buckets[w])
        return out

    def __len__(self):
        return len(self.buckets)


def index_dictionary(entries: Sequence[str], font: FontMetrics, strict: bool = True) -> DictWidthIndex:
    """Bucket ``entries`` by :func:`advance_width`.

    With ``strict`` a non-renderable entry raises :class:`MissingGlyph`;
    otherwise it is recorded in ``skipped``.
    """
    entries = list(entries)
    widths = widths_of(entries, font)
    buckets: dict[int, list] = {}
    skipped = []
    for entry, w in zip(entries, widths.tolist()):
        if w < 0:
            if strict:
                missing = next(c for c in entry if c not in font.widths)
                raise MissingGlyph(missing, font.name)
            skipped.append(entry)
            continue
        buckets.setdefault(w, []).append(entry)
    return DictWidthIndex(font=font, buckets=buckets, skipped=skipped)

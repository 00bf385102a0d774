"""Reference model of Word's "Save as PDF" glyph shifting.

Three stages run per line:

1. :func:`word_init_widths` scales TrueType widths and converts them to
   text-space widths with version-specific rounding.
2. :func:`word_wysiwyg_widths` runs the double-loop error tracking that
   reconciles Word's internal (600 DPI) widths with the TrueType line
   prefix.
3. :func:`word_emit_shifts` accumulates TrueType vs device width drift from
   left to right and emits a shift whenever it leaves the +/-0.003 em band.

Shift vectors returned here are "after" vectors: ``after[j]`` is the TJ
adjustment written after glyph ``j``. In the document IR that value is the
shift of glyph ``j + 1``; :func:`after_to_ir` converts.

The floating point widths (``float`` vs ``double``) follow the original
routine; ``precise=True`` swaps every 32-bit accumulator for 64-bit and
exists to demonstrate that the distinction matters.
"""

from __future__ import annotations

import csv
import logging
import math
import struct
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .._data import find_data
from ..errors import CombinatoricBudgetExceeded, MissingGlyph, MissingInternalTable
from ..metrics import FontMetrics, load_metrics

logger = logging.getLogger(__name__)

DISP_THRESHOLD = 0.003
LINE_WIDTH_PT = 468.0
# fontScaledWidth / divisor = internal dots. Shipped widths are font-file
# values on a ~2048/em grid used as-is on a 1000/em grid, so Word's 600 DPI
# lattice corresponds to ~1200 DPI here: divisor 120.
DEFAULT_PIXEL_DIVISOR = 120
# fontScaledWidth of a 468 pt line: width * size * 2 == 2000 * points
DEFAULT_BRKPOINT = int(LINE_WIDTH_PT * 2000)
EDIT_MARGIN_DOTS = 600

_F32 = struct.Struct("f")


def f32(x: float) -> float:
    """Round a Python float to the nearest IEEE single."""
    return _F32.unpack(_F32.pack(x))[0]


def roundf(x: float) -> float:
    """C ``roundf``: halves away from zero."""
    return math.copysign(math.floor(abs(x) + 0.5), x)


def c_int(x: float) -> int:
    """C float-to-int conversion (truncation toward zero)."""
    return int(x)


@dataclass(frozen=True)
class InternalWidthTable:
    """Word's internal per-glyph widths, in 600 DPI dots at ``font_size``."""

    font: str
    version: int
    font_size: float
    widths: Mapping[str, int]
    u_const: Optional[float] = None
    pixel_divisor: float = DEFAULT_PIXEL_DIVISOR
    brkpoint: int = DEFAULT_BRKPOINT

    def __post_init__(self):
        if self.version not in (2007, 2019):
            raise ValueError(f"unknown Word version {self.version}")
        if any(w <= 0 for w in self.widths.values()):
            raise ValueError("internal widths must be positive")

    def __hash__(self):
        return hash((self.font, self.version, self.font_size))

    def width(self, glyph: str) -> int:
        try:
            return self.widths[glyph]
        except KeyError:
            raise MissingGlyph(glyph, f"{self.font} internal") from None


def dpi_of(pixel_divisor: float) -> float:
    return 144000.0 / pixel_divisor


def synthesize_internal_widths(metrics: FontMetrics, size: float, version: int,
                               pixel_divisor: float = DEFAULT_PIXEL_DIVISOR) -> dict:
    """Deterministic stand-in for Word's internal widths.

    2019 tables hold the nearest dot count. 2007 tables hold a width hinted
    to a 96 DPI screen pixel first and then expressed in dots.
    """
    out = {}
    dots_per_px = dpi_of(pixel_divisor) / 96
    for g, w in metrics.widths.items():
        if version == 2019:
            out[g] = max(1, math.floor(w * size * 2 / pixel_divisor + 0.5))
        else:
            px = max(1, math.floor(w * size * 96 / 72000 + 0.5))
            out[g] = max(1, math.floor(px * dots_per_px + 0.5))
    return out


def _size_tag(size: float) -> str:
    return f"{size:g}".replace(".", "p")


def load_internal_table(font: str, size: float, version: int, synthesize: bool = True) -> InternalWidthTable:
    """Load ``internal/<font>-<size>-<version>.csv``.

    The file carries ``# key=value`` header lines (``version``, ``u_const``,
    ``pixel_divisor``, ``brkpoint``) followed by ``glyph,internal_width``
    rows. When no file exists and ``synthesize`` is set, a table is built by
    :func:`synthesize_internal_widths`.
    """
    metrics = load_metrics(font)
    try:
        path = find_data("internal", f"{metrics.name}-{_size_tag(size)}-{version}.csv")
    except FileNotFoundError:
        if not synthesize:
            raise MissingInternalTable(f"{metrics.name} {size}pt Word {version}") from None
        logger.warning("synthesising Word %s internal widths for %s %spt", version, metrics.name, size)
        return InternalWidthTable(metrics.name, version, size,
                                  synthesize_internal_widths(metrics, size, version))
    return read_internal_table(path, metrics.name, size)


def read_internal_table(path, font: str, size: float) -> InternalWidthTable:
    header = {}
    rows = []
    with open(path, newline="", encoding="utf-8") as f:
        body = []
        for line in f:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key.strip()] = value.strip()
            else:
                body.append(line)
        for row in csv.DictReader(body):
            rows.append((chr(int(row["unicode_hex"], 16)), int(row["internal_width"])))
    u = header.get("u_const", "")
    return InternalWidthTable(
        font=font,
        version=int(header.get("version", 2019)),
        font_size=float(header.get("font_size", size)),
        widths=dict(rows),
        u_const=float(u) if u not in ("", "auto") else None,
        pixel_divisor=float(header.get("pixel_divisor", DEFAULT_PIXEL_DIVISOR)),
        brkpoint=int(header.get("brkpoint", DEFAULT_BRKPOINT)),
    )


def write_internal_table(table: InternalWidthTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# version={table.version}\n")
        f.write(f"# font_size={table.font_size:g}\n")
        f.write(f"# u_const={'auto' if table.u_const is None else table.u_const}\n")
        f.write(f"# pixel_divisor={table.pixel_divisor:g}\n")
        f.write(f"# brkpoint={table.brkpoint}\n")
        w = csv.writer(f)
        w.writerow(["glyph", "unicode_hex", "internal_width"])
        for g in sorted(table.widths, key=ord):
            w.writerow([g, f"{ord(g):04X}", table.widths[g]])


@dataclass
class WysiwygState:
    chars: list
    widths: list
    font_scaled: list
    text_space: list
    pixel: list
    uncorrected: list
    size: float
    version: int
    pixel_divisor: float = DEFAULT_PIXEL_DIVISOR
    brkpoint: int = DEFAULT_BRKPOINT
    monospaced: bool = False
    adjusted: bool = False

    def __len__(self):
        return len(self.chars)

    def device_widths(self) -> list:
        # one dot is divisor / 2000 points
        k = self.pixel_divisor / 2000.0
        return [p * k for p in self.pixel]


def _text_space_width(width: int, u: float, version: int) -> float:
    if version == 2007:
        x = f32(f32(float(width)) / f32(u))
        return roundf(f32(roundf(f32(x * 10000)) / 10))
    return roundf(float(width) / u * 1000.0)


def word_init_widths(text: Sequence[str], metrics: FontMetrics, internal: InternalWidthTable,
                     size: float, version: Optional[int] = None) -> WysiwygState:
    version = version or internal.version
    u = internal.u_const or float(metrics.units_per_em)
    chars = list(text)
    widths = [metrics.width(c) for c in chars]
    pixel = [internal.width(c) for c in chars]
    return WysiwygState(
        chars=chars,
        widths=widths,
        font_scaled=[int(w * size * 2) for w in widths],
        text_space=[_text_space_width(w, u, version) for w in widths],
        pixel=pixel,
        uncorrected=[0] * len(chars),
        size=size,
        version=version,
        pixel_divisor=internal.pixel_divisor,
        brkpoint=internal.brkpoint,
        monospaced=metrics.monospaced,
    )


def _pixel_w(total: int, divisor: float) -> int:
    return math.floor(total / divisor + 0.5)


def word_wysiwyg_widths(state: WysiwygState) -> list:
    """Run the WYSIWYG adjustment in place and return ``state.pixel``."""
    n = len(state)
    fsw = state.font_scaled
    pw = state.pixel
    unc = state.uncorrected
    div = state.pixel_divisor
    brk = state.brkpoint
    i = 0
    tracking = 0
    while n:
        total = fsw[i]
        new_adjustment = _pixel_w(total, div)
        accumulated = pw[i] - new_adjustment
        pw[i] = so_far = last_new = new_adjustment
        unc[i] = new_adjustment
        i += 1
        if i == n:
            break
        while True:
            total += fsw[i]
            if total > brk:
                break
            orig = pw[i]
            new_adj = _pixel_w(total, div) - so_far
            diff = orig - new_adj
            tracking = diff - accumulated
            if diff != accumulated:
                parity = tracking & 1
                if tracking <= 0:
                    tracking >>= 1
                    if diff < -accumulated:
                        tracking += parity
                    if -new_adj >= tracking:
                        tracking = -new_adj
                else:
                    tracking >>= 1
                    if accumulated < -diff:
                        tracking += parity
                    if last_new < tracking:
                        tracking = last_new
            pw[i - 1] -= tracking
            new_track = new_adj + tracking
            so_far += new_adj
            accumulated = orig - new_track
            pw[i] = new_track
            unc[i] = new_track
            last_new = new_adj
            i += 1
            if i >= n:
                break
        if i >= n:
            break
    state.adjusted = True
    return pw


def adjust(state: WysiwygState, after: list, start: int = -1, precise: bool = False) -> list:
    """Emit "after" shifts for glyphs ``start + 1 ..`` (the adjust routine)."""
    n = len(state)
    dev_w = state.device_widths()
    size = float(state.size)
    chars = state.chars
    ts = state.text_space
    leading_space = True
    ttf = 0.0
    dev = 0.0
    last = n - 1
    v2007 = state.version <= 2016 or state.version == 2007
    for j in range(start + 1, n):
        if leading_space and chars[j] == " ":
            continue
        leading_space = False
        if precise:
            t = ts[j] / 1000.0
            d = dev_w[j] / size
            ttf += t
            dev += d
            disp = ttf - dev
        elif v2007:
            t = f32(f32(ts[j]) / 1000.0)
            d = dev_w[j] / size
            ttf = f32(ttf + t)
            dev = f32(dev + d)
            disp = f32(ttf - dev)
        else:
            t = f32(ts[j] / 1000.0)
            d = f32(dev_w[j] / size)
            ttf = f32(ttf + t)
            dev = f32(dev + d)
            disp = f32(ttf - dev)
        if (disp > DISP_THRESHOLD or disp < -DISP_THRESHOLD) and j != last:
            after[j] = c_int(disp * 1000 + 0.5)
            ttf = dev = 0.0
        else:
            after[j] = 0
    return after


def emit_after(state: WysiwygState, precise: bool = False) -> list:
    """Full-line "after" shift vector for a prepared state."""
    n = len(state)
    after = [0] * n
    if n == 0 or state.monospaced:
        return after
    if not state.adjusted:
        word_wysiwyg_widths(state)
    return adjust(state, after, -1, precise)


def after_to_ir(after: Sequence[float]) -> list:
    """Convert an "after" vector to per-glyph IR shifts (shift before glyph)."""
    if not after:
        return []
    return [0] + list(after[:-1])


def ir_to_after(shifts: Sequence[float]) -> list:
    if not shifts:
        return []
    return list(shifts[1:]) + [0]


def word_emit_shifts(line: Sequence[str], metrics: FontMetrics, internal: InternalWidthTable,
                     size: float, version: Optional[int] = None, precise: bool = False,
                     il_fix: bool = False) -> list:
    """IR shift vector (one entry per glyph) Word would write for ``line``."""
    state = word_init_widths(line, metrics, internal, size, version)
    after = emit_after(state, precise)
    if il_fix:
        after = apply_il_fix(state.chars, after)
    return after_to_ir(after)


def apply_il_fix(chars: Sequence[str], after: Sequence[float]) -> list:
    """Variant seen in some Word builds: nonzero shifts landing on ``i``/``l`` are one unit lower."""
    out = list(after)
    for j, a in enumerate(after):
        if a and j + 1 < len(chars) and chars[j + 1] in "il":
            out[j] = a - 1
    return out


# -- edit history -----------------------------------------------------------

def _dots_to_pdf_units(dots: float, pixel_divisor: float = DEFAULT_PIXEL_DIVISOR) -> float:
    return dots * pixel_divisor / 2000.0


def _round_to_digits(x: float, digits: int) -> float:
    scale = 10.0 ** digits
    return roundf(x * scale) / scale


def compute_edit_adjustments(state: WysiwygState, after: Sequence[float]) -> list:
    n = len(state)
    fs = float(state.size)
    total_dots = 0
    total_dev = 0.0
    out = []
    for i in range(n):
        total_dots += state.uncorrected[i] if i == n - 1 else state.pixel[i]
        total_dev += (state.text_space[i] - after[i]) * (fs / 1000)
        real = total_dev + _dots_to_pdf_units(EDIT_MARGIN_DOTS, state.pixel_divisor)
        edited = _round_to_digits(_dots_to_pdf_units(total_dots + EDIT_MARGIN_DOTS, state.pixel_divisor), 5)
        out.append((real - edited) / (fs / 1000))
    return out


def edit(state: WysiwygState, after: list, eadj: Sequence[float], i: int, precise: bool = False) -> list:
    """Split the fragment after glyph ``i``; returns fresh edit adjustments."""
    fs = float(state.size)
    disp = roundf(f32(eadj[i] * (fs / 1000) * 1000)) / 1000 / (fs / 1000)
    after[i] += disp
    adjust(state, after, i, precise)
    return compute_edit_adjustments(state, after)


def edit_suffix(state: WysiwygState, saved_after: list, saved_eadj: list,
                suffix_after: Sequence[float], precise: bool = False) -> list:
    """Replay edits implied by a recorded suffix onto a simulated line.

    ``saved_after`` is modified in place and returned.
    """
    n = len(saved_after)
    m = len(suffix_after)
    for k in range(m - 1):
        ind = n - m + k
        guess = roundf(10 * saved_after[ind])
        check = roundf(10 * suffix_after[k])
        if ind == n - 1:
            saved_after[ind] = suffix_after[k]
            break
        adj = roundf(10 * saved_eadj[ind])
        if guess + adj == check:
            saved_eadj = edit(state, saved_after, saved_eadj, ind, precise)
    for k in range(n - 1):
        if state.chars[k] == "-":
            saved_eadj = edit(state, saved_after, saved_eadj, k - 1, precise)
            saved_eadj = edit(state, saved_after, saved_eadj, k, precise)
    return saved_after


@dataclass(frozen=True)
class EditVariant:
    split_points: tuple
    shifts: tuple


def apply_edits(line: Sequence[str], metrics: FontMetrics, internal: InternalWidthTable, size: float,
                split_points: Sequence[int], version: Optional[int] = None,
                precise: bool = False) -> list:
    """IR shifts after editing the line at each of ``split_points`` in order."""
    state = word_init_widths(line, metrics, internal, size, version)
    after = emit_after(state, precise)
    if state.monospaced or not split_points:
        return after_to_ir(after)
    eadj = compute_edit_adjustments(state, after)
    for i in split_points:
        if 0 <= i < len(state) - 1:
            eadj = edit(state, after, eadj, i, precise)
    return after_to_ir(after)


def word_edit_variants(line: Sequence[str], span: tuple, max_splits: int,
                       metrics: FontMetrics, internal: InternalWidthTable, size: float,
                       version: Optional[int] = None, budget: int = 4096,
                       precise: bool = False) -> set:
    """Enumerate shift vectors reachable by editing in or next to ``span``.

    Split points range over ``span[0] - 1 .. span[1]`` (glyph indices whose
    following fragment boundary is reset); every combination of at most
    ``max_splits`` points is tried. Lines containing ``-`` additionally get
    the hyphen edits on both neighbours.
    """
    from itertools import combinations

    chars = list(line)
    start, stop = span
    candidates = [i for i in range(max(0, start - 1), min(len(chars) - 1, stop + 1))]
    hyphens = []
    for k, c in enumerate(chars[:-1]):
        if c == "-":
            hyphens.extend(i for i in (k - 1, k) if 0 <= i < len(chars) - 1)
    combos = [()]
    for r in range(1, max_splits + 1):
        combos.extend(combinations(candidates, r))
    if hyphens and max_splits > 0:
        combos.extend(tuple(sorted(set(c) | set(hyphens))) for c in list(combos))
    if len(combos) > budget:
        raise CombinatoricBudgetExceeded(f"{len(combos)} edit variants exceed budget {budget}")
    seen = {}
    for combo in combos:
        shifts = tuple(apply_edits(chars, metrics, internal, size, combo, version, precise))
        seen.setdefault(shifts, EditVariant(tuple(combo), shifts))
    return set(seen.values())

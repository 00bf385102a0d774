"""Repairs that remove or blunt what a redaction leaks, and a checker.

Every repair works on a private copy of the IR and returns it together with
a :class:`PatchPlan` describing which parts of the original content streams
must be regenerated. Glyph origins in the returned IR always agree with the
shifts (the first glyph of a line anchors it).

:func:`verify_protection` plays an attacker who knows which repair ran: for
each dictionary entry it rebuilds the line the producer would have written,
applies the same repair transform and compares with the repaired document.
Survivors before and after and the leaked bits are reported per site.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import DegenerateSite, InvalidInterval, RegressionDetected
from .ir import DocumentIR, FontRef, Glyph, Page, RectFill, TextLine, round_half_away, simulate_origins, with_shift
from .leakmeter import _counts_entropy, _prob_entropy
from .locator import EXCISING, NONEXCISING, RedactionSite, locate_excising, locate_nonexcising
from .matcher import MATCH_EPS, Dictionary, _plain_table, normalized_freq, site_context, word_batch_eval
from .metrics import FontMetrics, load_metrics
from .pdf.parse import fold_ocr_operators
from .pdf.write import BASE_FONT_NAMES, PatchPlan, winansi_code
from .schemes.base import SchemeId
from .schemes.identify import JUMP_UNITS, identify_document

logger = logging.getLogger(__name__)

MM_PT = 72 / 25.4
MONO_FONT_ID = "GGMono"
MODES = ("excise", "deshift", "quantize:N", "widthgrid:N", "strip-rects", "monospace")


def mm_to_units(mm: float, size: float) -> float:
    """Length in millimetres expressed in text space units at ``size`` points."""
    return mm * MM_PT * 1000 / size


def _relayout(line: TextLine) -> TextLine:
    xs = simulate_origins(line)
    line.glyphs = [replace(g, origin_x=x) if g.origin_x != x else g for g, x in zip(line.glyphs, xs)]
    return fold_ocr_operators(line)


def _touch_line(plan: PatchPlan, page: int, glyphs: Sequence[Glyph]):
    for b in sorted({g.source for g in glyphs}):
        plan.touch_block(page, b)


def _excising_sites(doc: DocumentIR, sites=None, schemes=None) -> List[RedactionSite]:
    if sites is None:
        if schemes is None:
            schemes = [i.scheme for i in identify_document(doc)]
        sites = locate_excising(doc, max_width_pt=None, schemes=schemes)
    return [s for s in sites if s.kind == EXCISING]


# -- repairs --------------------------------------------------------------------

def excise_nonexcising(doc: DocumentIR, sites: Optional[Sequence[RedactionSite]] = None
                       ) -> Tuple[DocumentIR, PatchPlan]:
    """Delete text hidden under boxes, keeping every other glyph in place.

    The glyph after a removed span gets a shift that puts it exactly where
    it was, so the box now sits over a gap. The box itself stays.
    """
    out = doc.copy()
    plan = PatchPlan("excise")
    if sites is None:
        sites = locate_nonexcising(doc)
    by_line: Dict[Tuple[int, int], List[RedactionSite]] = {}
    for s in sites:
        if s.kind == NONEXCISING:
            by_line.setdefault((s.page, s.line), []).append(s)
    for (pi, li), line_sites in by_line.items():
        line = out.pages[pi].lines[li]
        _touch_line(plan, pi, line.glyphs)
        glyphs = list(line.glyphs)
        for s in sorted(line_sites, key=lambda s: -s.span[0]):
            a, b = s.span
            if b < len(glyphs):
                nxt = glyphs[b]
                if a > 0:
                    k = nxt.font_size * nxt.hscale / 1000
                    nxt = with_shift(nxt, (glyphs[a - 1].end_x - nxt.origin_x) / k)
                else:
                    nxt = replace(with_shift(nxt, 0.0), run_start=True)
                glyphs[b] = nxt
            del glyphs[a:b]
        line.glyphs = glyphs
        fold_ocr_operators(line)
    out.pages = [_drop_empty(p) for p in out.pages]
    return out, plan


def _drop_empty(page: Page) -> Page:
    page.lines = [l for l in page.lines if l.glyphs]
    return page


def _keep_mask(line: TextLine, gaps: Sequence[int]) -> List[bool]:
    keep = [False] * len(line.glyphs)
    for i, g in enumerate(line.glyphs):
        if abs(g.exact_shift) >= JUMP_UNITS:
            keep[i] = True
    for q in gaps:
        keep[q] = True
    if keep:
        keep[0] = True  # the anchor glyph carries no shift of its own
    return keep


def _gaps_by_line(doc: DocumentIR, sites=None) -> Dict[Tuple[int, int], List[int]]:
    gaps: Dict[Tuple[int, int], List[int]] = {}
    for s in _excising_sites(doc, sites):
        gaps.setdefault((s.page, s.line), []).append(s.gap_index)
    return gaps


def remove_shifts(doc: DocumentIR, sites: Optional[Sequence[RedactionSite]] = None
                  ) -> Tuple[DocumentIR, PatchPlan]:
    """Zero every shift except redaction gaps and layout jumps.

    Text after each glyph slides by at most the accumulated shift. Lines
    whose shifts are already all zero are left untouched.
    """
    out = doc.copy()
    plan = PatchPlan("deshift")
    gaps = _gaps_by_line(doc, sites)
    for page in out.pages:
        for li, line in enumerate(page.lines):
            keep = _keep_mask(line, gaps.get((page.index, li), ()))
            if all(k or g.exact_shift == 0 for k, g in zip(keep, line.glyphs)):
                continue
            _touch_line(plan, page.index, line.glyphs)
            line.glyphs = [g if k else with_shift(g, 0.0) for g, k in zip(line.glyphs, keep)]
            _relayout(line)
    return out, plan


def quantize_vector(shifts: np.ndarray, interval: float) -> np.ndarray:
    """Round cumulative offsets to multiples of ``interval``.

    Works row-wise on a 2-D array; column 0 (the anchor glyph) is left as
    is. Each later glyph moves by at most ``interval / 2`` units.
    """
    s = np.atleast_2d(np.asarray(shifts, dtype=np.float64))
    if s.shape[1] <= 1:
        return s.copy()
    d = np.cumsum(s[:, 1:], axis=1)
    scaled = d / interval
    qd = np.sign(scaled) * np.floor(np.abs(scaled) + 0.5) * interval
    out = s.copy()
    out[:, 1:] = np.diff(np.concatenate([np.zeros((s.shape[0], 1)), qd], axis=1), axis=1)
    return out


def quantize_shifts(doc: DocumentIR, interval: float) -> Tuple[DocumentIR, PatchPlan]:
    """Snap glyph displacements to a grid of ``interval`` units."""
    if not interval > 0 or not math.isfinite(interval):
        raise InvalidInterval(f"interval must be positive, got {interval}")
    out = doc.copy()
    plan = PatchPlan(f"quantize:{float(interval)!r}")
    for page in out.pages:
        for line in page.lines:
            shifts = np.array([g.exact_shift for g in line.glyphs])
            new = quantize_vector(shifts, interval)[0]
            if np.array_equal(new, shifts):
                continue
            _touch_line(plan, page.index, line.glyphs)
            line.glyphs = [g if g.exact_shift == v else with_shift(g, float(v))
                           for g, v in zip(line.glyphs, new.tolist())]
            _relayout(line)
    return out, plan


def grid_width(width: float, grid: float) -> float:
    """``width`` rounded up to the next multiple of ``grid``."""
    return math.ceil(width / grid - 1e-9) * grid


def _gap_rect(line: TextLine, q: int, old_bbox) -> Tuple[float, float, float, float]:
    # keep the left edge: OCR widths are measured from it
    return (old_bbox[0], old_bbox[1], max(old_bbox[2], line.glyphs[q].origin_x), old_bbox[3])


def _replace_box(plan: PatchPlan, page: Page, site: RedactionSite, bbox):
    plan.remove(site.page, site.box.source)
    plan.remove(site.page, site.box.paint)
    page.rects = [r for r in page.rects if r is not site.box]
    plan.add_rect(site.page, bbox)
    # the writer paints new boxes last, after every glyph
    last = max([r.draw_order for r in page.rects] + [g.draw_order for l in page.lines for g in l.glyphs] + [0])
    page.rects.append(RectFill(tuple(bbox), site.box.color, last + 1))


def quantize_redaction_width(doc: DocumentIR, site: RedactionSite, char_width: float, grid: int = 1
                             ) -> Tuple[DocumentIR, PatchPlan]:
    """Widen one excised gap to the next multiple of ``grid * char_width``.

    The text after the gap moves right and the box is redrawn over the
    wider gap.
    """
    return _widen(doc, [site], char_width * grid, f"widthgrid:{char_width * grid:g}")


def quantize_all_widths(doc: DocumentIR, grid_units: float, sites=None) -> Tuple[DocumentIR, PatchPlan]:
    return _widen(doc, _excising_sites(doc, sites), grid_units, f"widthgrid:{grid_units:g}")


def _widen(doc: DocumentIR, sites: Sequence[RedactionSite], step: float, mode: str):
    if not step > 0:
        raise InvalidInterval(f"grid must be positive, got {step}")
    out = doc.copy()
    plan = PatchPlan(mode)
    for s in sites:
        if s.kind != EXCISING or s.width is None:
            raise DegenerateSite(f"site {s.ref()} is not an excised gap")
        extra = grid_width(s.width, step) - s.width
        if extra <= 1e-9:
            continue
        page = out.pages[s.page]
        line = page.lines[s.line]
        g = line.glyphs[s.gap_index]
        line.glyphs[s.gap_index] = with_shift(g, g.exact_shift - extra)
        _relayout(line)
        _touch_line(plan, s.page, line.glyphs)
        _replace_box(plan, page, s, _gap_rect(line, s.gap_index, s.box.bbox))
    return out, plan


def strip_redaction_rects(doc: DocumentIR, sites: Optional[Sequence[RedactionSite]] = None
                          ) -> Tuple[DocumentIR, PatchPlan]:
    """Remove the boxes linked to redaction sites; other rectangles stay."""
    if sites is None:
        sites = locate_nonexcising(doc) + locate_excising(doc, max_width_pt=None)
    out = doc.copy()
    plan = PatchPlan("strip-rects")
    boxes = {}
    for s in sites:
        boxes[id(s.box)] = s
    for page in out.pages:
        kept = []
        for r in page.rects:
            s = boxes.get(id(r))
            if s is None:
                kept.append(r)
                continue
            plan.remove(page.index, r.source)
            plan.remove(page.index, r.paint)
        page.rects = kept
    return out, plan


def mono_cell() -> int:
    """Advance of every glyph in the packaged monospace font."""
    return load_metrics("courier").widths[" "]


def mono_average(metrics: FontMetrics) -> float:
    """Mean lowercase advance, used to turn a gap width into a character count."""
    lower = [metrics.widths[c] for c in "abcdefghijklmnopqrstuvwxyz" if c in metrics.widths]
    return sum(lower) / len(lower) if lower else float(metrics.units_per_em) / 2


def mono_count(width, metrics: FontMetrics):
    """Characters a monospace gap gets for a removed ``width`` (vectorised)."""
    n = np.floor(np.asarray(width, dtype=np.float64) / mono_average(metrics) + 0.5)
    return np.maximum(n, 1)


def monospace_lines(doc: DocumentIR, sites: Optional[Sequence[RedactionSite]] = None
                    ) -> Tuple[DocumentIR, PatchPlan]:
    """Re-set each redacted line in a monospace font.

    The gap becomes a whole number of character cells and the size is
    scaled so the line keeps its length (never growing the size).
    """
    sites = _excising_sites(doc, sites)
    out = doc.copy()
    plan = PatchPlan("monospace")
    courier = load_metrics("courier")
    if MONO_FONT_ID not in out.fonts:
        out.fonts[MONO_FONT_ID] = FontRef(MONO_FONT_ID, BASE_FONT_NAMES["courier"], courier, True, 1,
                                          frozenset(courier.widths))
    by_line: Dict[Tuple[int, int], List[RedactionSite]] = {}
    for s in sites:
        by_line.setdefault((s.page, s.line), []).append(s)
    for (pi, li), line_sites in sorted(by_line.items()):
        page = out.pages[pi]
        line = page.lines[li]
        if any(g.unicode is None or len(g.unicode) != 1 or winansi_code(g.unicode) is None
               for g in line.glyphs):
            plan.notes.append(f"page {pi} line {li}: glyphs outside WinAnsi, left as is")
            continue
        if not line.uniform_font():
            plan.notes.append(f"page {pi} line {li}: mixed fonts, left as is")
            continue
        metrics = doc.fonts[line.font_id].metrics
        cells = {s.gap_index: int(mono_count(s.width, metrics)) for s in line_sites}
        g0 = line.glyphs[0]
        extent = (line.glyphs[-1].end_x - g0.origin_x) * 1000 / (g0.font_size * g0.hscale)
        n_cells = len(line.glyphs) + sum(cells.values())
        cell = mono_cell()
        size = min(g0.font_size, g0.font_size * extent / (cell * n_cells))
        size = round(size, 4)
        _touch_line(plan, pi, line.glyphs)
        line.glyphs = [
            replace(g, code=winansi_code(g.unicode), advance=float(cell), font_id=MONO_FONT_ID,
                    font_size=size, shift=-cell * cells.get(i, 0), residue=0.0, tc=0.0,
                    run_start=i == 0)
            for i, g in enumerate(line.glyphs)
        ]
        _relayout(line)
        page.font_resources[MONO_FONT_ID] = MONO_FONT_ID
        plan.add_fonts[MONO_FONT_ID] = "courier"
        for s in line_sites:
            y0 = line.baseline_y + courier.descent * size / 1000
            y1 = line.baseline_y + courier.ascent * size / 1000
            _replace_box(plan, page, s, (line.glyphs[s.gap_index - 1].end_x, y0,
                                         line.glyphs[s.gap_index].origin_x, y1))
    return out, plan


def repair(doc: DocumentIR, mode: str, schemes: Optional[Sequence[SchemeId]] = None
           ) -> Tuple[DocumentIR, PatchPlan]:
    """Dispatch a repair by its CLI name (see :data:`MODES`).

    ``schemes`` (one per page) saves re-identifying the document.
    """
    name, _, arg = mode.partition(":")
    if name == "excise":
        return excise_nonexcising(doc)
    if name == "quantize":
        return quantize_shifts(doc, _parse_interval(arg, doc))
    if name == "strip-rects":
        return strip_redaction_rects(doc)
    sites = _excising_sites(doc, schemes=schemes)
    if name == "deshift":
        return remove_shifts(doc, sites)
    if name == "widthgrid":
        return quantize_all_widths(doc, float(arg or mono_cell()), sites)
    if name == "monospace":
        return monospace_lines(doc, sites)
    raise ValueError(f"unknown repair mode {mode!r}; expected one of {', '.join(MODES)}")


def _parse_interval(arg: str, doc: DocumentIR) -> float:
    """``N`` in units, or ``Nmm`` converted at the most common font size."""
    if not arg:
        raise InvalidInterval("quantize needs an interval, e.g. quantize:24 or quantize:0.1mm")
    if arg.endswith("mm"):
        sizes = [l.font_size for p in doc.pages for l in p.lines if l.glyphs]
        size = max(set(sizes), key=sizes.count) if sizes else 12.0
        return round(mm_to_units(float(arg[:-2]), size))
    return float(arg)


# -- verification -----------------------------------------------------------------

@dataclass
class SiteProtection:
    ref: str
    kind: str
    bits_before: float
    bits_after: float
    survivors_before: List[str]
    survivors_after: List[str]
    note: str = ""

    @property
    def superset(self) -> bool:
        return set(self.survivors_before) <= set(self.survivors_after)

    @property
    def ok(self) -> bool:
        return self.bits_after <= self.bits_before + 1e-9 and self.superset

    def to_json(self) -> dict:
        return {"site": self.ref, "kind": self.kind, "bits_before": self.bits_before,
                "bits_after": self.bits_after, "survivors_before": len(self.survivors_before),
                "survivors_after": len(self.survivors_after), "superset": self.superset,
                "ok": self.ok, "note": self.note}


@dataclass
class ProtectionReport:
    mode: str
    sites: List[SiteProtection] = field(default_factory=list)
    nonexcising_before: int = 0
    nonexcising_after: int = 0
    excising_after: int = 0

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.sites)

    @property
    def bits_before(self) -> float:
        return math.fsum(s.bits_before for s in self.sites)

    @property
    def bits_after(self) -> float:
        return math.fsum(s.bits_after for s in self.sites)

    def to_json(self) -> dict:
        return {"mode": self.mode, "ok": self.ok, "bits_before": self.bits_before,
                "bits_after": self.bits_after, "nonexcising_before": self.nonexcising_before,
                "nonexcising_after": self.nonexcising_after, "excising_after": self.excising_after,
                "sites": [s.to_json() for s in self.sites]}


def _entropy(labels: np.ndarray, probs: Optional[np.ndarray]) -> float:
    if probs is None:
        return _counts_entropy(np.bincount(labels).tolist())
    mass = np.bincount(labels, weights=probs)
    return _prob_entropy((mass / mass.sum()).tolist())


def _labels(keys: np.ndarray) -> np.ndarray:
    """Class label per row; rows are compared exactly after rounding to 1e-6."""
    keys = np.round(keys, 6) + 0.0  # + 0.0 folds -0.0 into 0.0
    if keys.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    keys = np.ascontiguousarray(keys[:, (keys != keys[0]).any(axis=0)])
    if keys.shape[1] == 0:
        return np.zeros(keys.shape[0], dtype=np.int64)
    rows = keys.view(np.dtype((np.void, keys.dtype.itemsize * keys.shape[1]))).reshape(-1)
    _, lab = np.unique(rows, return_inverse=True)
    return lab.reshape(-1)


def _candidate_lines(doc: DocumentIR, site: RedactionSite, scheme: SchemeId, dictionary: Dictionary):
    """Per entry: the excised line's shift vector had that entry been removed.

    Returns ``(rows, widths, ok)``; ``rows`` is ``(n_entries, n_glyphs)``.
    """
    ctx = site_context(doc, site, scheme)
    line = doc.pages[site.page].lines[site.line]
    base = np.array(line.shifts, dtype=np.float64)
    q = site.gap_index
    scheme = ctx.effective_scheme
    if scheme.is_word:
        codes, offsets = dictionary.encoded(ctx.model.table)
        width, tail = word_batch_eval(ctx, codes, offsets)
    else:
        table = _plain_table(ctx.metrics)
        codes, offsets = dictionary.encoded(table)
        width = kernels.ocr_widths(codes, offsets, table.widths, ctx.tc if scheme == SchemeId.OCR else 0.0)
        tail = np.zeros((len(width), 0))
    ok = ~np.isnan(width)
    rows = np.tile(base, (len(width), 1))
    rows[:, q] = base[q] + ctx.fingerprint.redaction_width - np.nan_to_num(width)
    if tail.shape[1]:
        rows[:, q + 1:q + 1 + tail.shape[1]] = tail
    return rows, np.nan_to_num(width), ok, ctx


def _transform(mode: str, rows: np.ndarray, widths: np.ndarray, q: int, keep: Sequence[bool],
               metrics: FontMetrics) -> np.ndarray:
    name, _, arg = mode.partition(":")
    if name in ("excise", "strip-rects"):
        return rows
    if name == "deshift":
        out = rows.copy()
        out[:, ~np.asarray(keep, dtype=bool)] = 0.0
        out[:, q] = rows[:, q]
        return out
    if name == "quantize":
        return quantize_vector(rows, float(arg))
    if name == "widthgrid":
        step = float(arg)
        out = rows.copy()
        out[:, q] -= np.ceil(widths / step - 1e-9) * step - widths
        return out
    if name == "monospace":
        return mono_count(widths, metrics)[:, None] * -mono_cell()
    raise ValueError(f"unknown repair mode {mode!r}")


def _observed(mode: str, line: TextLine, q: int) -> np.ndarray:
    if mode.partition(":")[0] == "monospace":
        return np.array([line.glyphs[q].exact_shift])
    return np.array(line.shifts, dtype=np.float64)


def _survivors(keys: np.ndarray, observed: np.ndarray, ok: np.ndarray, entries) -> List[str]:
    if keys.shape[1] != observed.shape[0]:
        return []
    hit = ok & np.all(np.abs(keys - observed[None, :]) <= MATCH_EPS, axis=1)
    return [entries[i] for i in np.flatnonzero(hit)]


def verify_protection(doc_before: DocumentIR, doc_after: DocumentIR, dictionary: Dictionary,
                      mode: str, schemes: Optional[Sequence[SchemeId]] = None,
                      freq: Optional[Mapping[str, float]] = None,
                      raise_on_regression: bool = True,
                      sites_before: Optional[Tuple[Sequence[RedactionSite], Sequence[RedactionSite]]] = None
                      ) -> ProtectionReport:
    """Compare what each redaction leaks before and after a repair.

    ``mode`` names the repair that produced ``doc_after`` (as accepted by
    :func:`repair`, with numeric arguments resolved). ``sites_before`` may
    pass ``(nonexcising, excising)`` sites already located on
    ``doc_before``. Raises :class:`RegressionDetected` if any site leaks
    more afterwards.
    """
    if schemes is None:
        schemes = [i.scheme for i in identify_document(doc_before)]
    probs_all = None
    if freq is not None:
        p = normalized_freq(dictionary.entries, freq)
        probs_all = np.array([p[e] for e in dictionary.entries])
    entries = dictionary.entries
    report = ProtectionReport(mode=mode)
    if sites_before is None:
        sites_before = (locate_nonexcising(doc_before),
                        locate_excising(doc_before, schemes=schemes, max_width_pt=None))
    non_before, ex_before = sites_before
    report.nonexcising_before = len(non_before)
    non_after = locate_nonexcising(doc_after)
    ex_after = locate_excising(doc_after, max_width_pt=None, schemes=schemes)
    report.nonexcising_after = len(non_after)
    report.excising_after = len(ex_after)
    gaps = _gaps_by_line(doc_before, ex_before)
    h_x = (_prob_entropy(probs_all.tolist()) if probs_all is not None else math.log2(len(entries)))

    for site in non_before:
        visible = [site.covered_text] if site.covered_text in set(entries) else []
        after_site = None
        if mode.startswith("excise"):
            after_site = next((s for s in ex_after if s.page == site.page and s.line == site.line
                               and s.box.bbox == site.box.bbox), None)
        if after_site is None:
            try:
                line_a = doc_after.pages[site.page].lines[site.line]
                a, b = site.span
                still = "".join(g.char for g in line_a.glyphs[a:b]).rstrip() == site.covered_text
            except IndexError:
                still = False
            report.sites.append(SiteProtection(site.ref(), NONEXCISING, h_x, h_x if still else 0.0,
                                               visible, visible if still else [],
                                               "text still present" if still else "site vanished"))
            continue
        scheme = schemes[site.page]
        rows, widths, ok, _ = _candidate_lines(doc_after, after_site, scheme, dictionary)
        line = doc_after.pages[after_site.page].lines[after_site.line]
        surv = _survivors(rows, np.array(line.shifts), ok, entries)
        lab = _labels(rows[ok])
        bits = _entropy(lab, probs_all[ok] if probs_all is not None else None)
        report.sites.append(SiteProtection(site.ref(), NONEXCISING, h_x, bits, visible, surv,
                                           "text excised"))

    for site in ex_before:
        scheme = schemes[site.page]
        if scheme.is_word and not site.first_on_line:
            report.sites.append(SiteProtection(site.ref(), EXCISING, 0.0, 0.0, [], [],
                                               "not first on line; skipped"))
            continue
        line_b = doc_before.pages[site.page].lines[site.line]
        rows, widths, ok, ctx = _candidate_lines(doc_before, site, scheme, dictionary)
        p_ok = probs_all[ok] if probs_all is not None else None
        before = _survivors(rows, np.array(line_b.shifts), ok, entries)
        bits_b = _entropy(_labels(rows[ok]), p_ok)
        keep = _keep_mask(line_b, gaps.get((site.page, site.line), ()))
        keys = _transform(mode, rows, widths, site.gap_index, keep, ctx.metrics)
        try:
            line_a = doc_after.pages[site.page].lines[site.line]
        except IndexError:
            line_a = None
        if line_a is None or len(line_a.glyphs) != len(line_b.glyphs):
            report.sites.append(SiteProtection(site.ref(), EXCISING, bits_b, bits_b, before, [],
                                               "line changed shape; cannot compare"))
            continue
        after = _survivors(keys, _observed(mode, line_a, site.gap_index), ok, entries)
        bits_a = _entropy(_labels(keys[ok]), p_ok)
        report.sites.append(SiteProtection(site.ref(), EXCISING, bits_b, bits_a, before, after))

    bad = [s for s in report.sites if not s.ok]
    if bad and raise_on_regression:
        s = bad[0]
        raise RegressionDetected(
            f"{mode}: site {s.ref} leaks more after repair (bits {s.bits_before:.4f} -> {s.bits_after:.4f}, "
            f"survivors {len(s.survivors_before)} -> {len(s.survivors_after)}, superset={s.superset})")
    return report

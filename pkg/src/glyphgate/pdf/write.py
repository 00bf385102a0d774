"""PDF output: fresh documents for the corpus generator and incremental
updates for repairs.

Object serialisation, xref tables and incremental trailers come from pypdf.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pypdf import PdfWriter
from pypdf.generic import ArrayObject, DecodedStreamObject, DictionaryObject, NameObject, NumberObject

from ..errors import MalformedPdf
from ..ir import DocumentIR, Glyph, Page
from ..metrics import FontMetrics, load_metrics
from .content import Name, Op, parse_operations, serialize, tj_array
from .parse import mat_inv

logger = logging.getLogger(__name__)

BASE_FONT_NAMES = {
    "tnr": "TimesNewRomanPSMT",
    "arial": "ArialMT",
    "calibri": "Calibri",
    "courier": "CourierNewPSMT",
}

# operators whose effect is confined to placing glyphs inside BT/ET
_SHOW_OPS = {"BT", "ET", "Tj", "TJ", "'", '"', "Td", "TD", "Tm", "T*"}


def winansi_code(ch: str) -> Optional[int]:
    try:
        b = ch.encode("cp1252")
    except UnicodeEncodeError:
        return None
    return b[0] if len(b) == 1 else None


def font_dictionary(metrics: FontMetrics, base_font: Optional[str] = None) -> DictionaryObject:
    """Non-embedded simple TrueType font with WinAnsi encoding and /Widths."""
    widths = []
    for code in range(32, 256):
        try:
            ch = bytes([code]).decode("cp1252")
        except UnicodeDecodeError:
            ch = None
        widths.append(NumberObject(metrics.widths.get(ch, 0) if ch else 0))
    return DictionaryObject({
        NameObject("/Type"): NameObject("/Font"),
        NameObject("/Subtype"): NameObject("/TrueType"),
        NameObject("/BaseFont"): NameObject("/" + (base_font or BASE_FONT_NAMES.get(metrics.name, metrics.name))),
        NameObject("/FirstChar"): NumberObject(32),
        NameObject("/LastChar"): NumberObject(255),
        NameObject("/Widths"): ArrayObject(widths),
        NameObject("/Encoding"): NameObject("/WinAnsiEncoding"),
    })


def _stream(data: bytes) -> DecodedStreamObject:
    s = DecodedStreamObject()
    s.set_data(data)
    return s


@dataclass
class PageSpec:
    content: bytes
    fonts: Dict[str, str]  # resource name -> shipped metrics name
    mediabox: Tuple[float, float, float, float] = (0.0, 0.0, 612.0, 792.0)


def build_pdf(pages: Sequence[PageSpec], producer: Optional[str] = None) -> bytes:
    """Assemble a deterministic PDF from raw content streams."""
    w = PdfWriter()
    font_objs: Dict[str, object] = {}
    for spec in pages:
        page = w.add_blank_page(width=spec.mediabox[2] - spec.mediabox[0],
                                height=spec.mediabox[3] - spec.mediabox[1])
        fonts = DictionaryObject()
        for res, name in sorted(spec.fonts.items()):
            if name not in font_objs:
                font_objs[name] = w._add_object(font_dictionary(load_metrics(name)))
            fonts[NameObject("/" + res)] = font_objs[name]
        page[NameObject("/Resources")] = DictionaryObject({NameObject("/Font"): fonts})
        page[NameObject("/Contents")] = w._add_object(_stream(spec.content))
    if producer:
        w.add_metadata({"/Producer": producer})
    else:
        w.add_metadata({"/Producer": "glyphgate"})
    buf = io.BytesIO()
    w.write(buf)
    return buf.getvalue()


# -- repairs ----------------------------------------------------------------

@dataclass
class PatchPlan:
    """What a repair touched, in terms of the original content streams.

    ``blocks`` lists BT operator indices per page whose text must be
    regenerated from the repaired IR; ``remove_ops`` lists ``re``/paint
    operator indices to drop; ``add_fonts`` maps new font ids to shipped
    metrics names; ``add_rects`` lists black boxes (device space) painted
    on top of the page.
    """

    mode: str
    blocks: Dict[int, List[int]] = field(default_factory=dict)
    remove_ops: Dict[int, List[int]] = field(default_factory=dict)
    add_fonts: Dict[str, str] = field(default_factory=dict)
    add_rects: Dict[int, List[Tuple[float, float, float, float]]] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def touch_block(self, page: int, block: int):
        if block < 0:
            self.notes.append(f"page {page}: text outside a top-level text object left unchanged")
            return
        lst = self.blocks.setdefault(page, [])
        if block not in lst:
            lst.append(block)

    def remove(self, page: int, op_index: int):
        if op_index < 0:
            self.notes.append(f"page {page}: path inside a form XObject left unchanged")
            return
        lst = self.remove_ops.setdefault(page, [])
        if op_index not in lst:
            lst.append(op_index)

    def add_rect(self, page: int, bbox):
        self.add_rects.setdefault(page, []).append(tuple(round(v, 6) for v in bbox))

    @property
    def touched_pages(self) -> List[int]:
        return sorted(set(self.blocks) | set(self.remove_ops) | set(self.add_rects))

    def to_json(self) -> dict:
        return {
            "mode": self.mode,
            "blocks": {str(k): sorted(v) for k, v in sorted(self.blocks.items())},
            "remove_ops": {str(k): sorted(v) for k, v in sorted(self.remove_ops.items())},
            "add_fonts": dict(sorted(self.add_fonts.items())),
            "add_rects": {str(k): [list(b) for b in v] for k, v in sorted(self.add_rects.items())},
            "notes": list(self.notes),
        }

    def merge(self, other: "PatchPlan") -> "PatchPlan":
        out = PatchPlan(mode=f"{self.mode}+{other.mode}", notes=self.notes + other.notes,
                        add_fonts={**self.add_fonts, **other.add_fonts})
        for src in (self, other):
            for p, v in src.blocks.items():
                for b in v:
                    out.touch_block(p, b)
            for p, v in src.remove_ops.items():
                for o in v:
                    out.remove(p, o)
            for p, v in src.add_rects.items():
                for b in v:
                    out.add_rect(p, b)
        return out


def _glyph_bytes(g: Glyph, doc: DocumentIR) -> bytes:
    ref = doc.fonts[g.font_id]
    return int(g.code).to_bytes(ref.code_bytes, "big")


def _segments(glyphs: List[Glyph]):
    """Split glyphs into runs sharing font, size, scaling, color and Tc.

    A glyph that started a positioning run in the source starts a new
    segment too, so word-level OCR positioning survives a rewrite.
    """
    run: List[Glyph] = []
    for g in glyphs:
        if run and (g.run_start or (g.font_id, g.font_size, g.hscale, g.color, g.tc) != (
                run[-1].font_id, run[-1].font_size, run[-1].hscale, run[-1].color, run[-1].tc)):
            yield run
            run = []
        run.append(g)
    if run:
        yield run


def render_block(lines: Iterable[List[Glyph]], doc: DocumentIR, resource_of: Dict[str, str]) -> List[Op]:
    """Text showing operators placing ``lines`` at their IR positions.

    Positions are device space, so callers wrap the result in an inverse
    CTM. The first glyph of each segment is placed with ``Tm``; every later
    one through its TJ number, which adds back the segment's Tc (the IR
    folds Tc into the following glyph's shift).
    """
    ops: List[Op] = [Op("Tw", (0,)), Op("Ts", (0,))]
    tc_state = None
    for glyphs in lines:
        for run in _segments(glyphs):
            g0 = run[0]
            r, gg, b = g0.color
            tc_pt = round(g0.tc * g0.font_size / 1000, 9)
            if tc_pt != tc_state:
                ops.append(Op("Tc", (tc_pt,)))
                tc_state = tc_pt
            ops.append(Op("Tf", (Name(resource_of[g0.font_id]), round(g0.font_size, 6))))
            ops.append(Op("Tz", (round(g0.hscale * 100, 6),)))
            ops.append(Op("rg", (r, gg, b)))
            ops.append(Op("Tm", (1, 0, 0, 1, round(g0.origin_x, 6), round(g0.origin_y, 6))))
            chunks: list = []
            for k, g in enumerate(run):
                if k:
                    num = round(g.exact_shift + run[k - 1].tc, 6)
                    if num:
                        chunks.append(num)
                chunks.append(_glyph_bytes(g, doc))
            ops.append(Op("TJ", (tj_array(chunks),)))
    return ops


def rewrite_page_content(ops: List[Op], page: Page, doc: DocumentIR, blocks: Sequence[int],
                         remove_ops: Sequence[int], resource_of: Dict[str, str],
                         add_rects: Sequence[Tuple[float, float, float, float]] = ()) -> List[Op]:
    """Regenerate the listed BT blocks from ``page`` and drop ``remove_ops``.

    Painting operators listed in ``remove_ops`` become ``n`` (end path
    without painting); other listed operators are dropped. ``add_rects``
    are filled in black after the original content, which is wrapped in
    ``q``/``Q`` so they land in default user space.
    """
    by_block: Dict[int, List[List[Glyph]]] = {b: [] for b in blocks}
    for line in page.lines:
        cur: Dict[int, List[Glyph]] = {}
        for g in line.glyphs:
            if g.source in by_block:
                cur.setdefault(g.source, []).append(g)
        for b, gl in cur.items():
            by_block[b].append(gl)
    remove = set(remove_ops)
    out: List[Op] = []
    i = 0
    n = len(ops)
    while i < n:
        op = ops[i]
        if i in by_block and op.operator == "BT":
            j = i
            while j < n and ops[j].operator != "ET":
                j += 1
            state_ops = []
            for k in range(i + 1, j):
                o = ops[k]
                if o.operator == '"':
                    state_ops += [Op("Tw", (o.operands[0],)), Op("Tc", (o.operands[1],))]
                elif o.operator not in _SHOW_OPS:
                    state_ops.append(o)
            ctm = page.block_ctm.get(i, (1.0, 0.0, 0.0, 1.0, 0.0, 0.0))
            inv = mat_inv(ctm)
            out.append(Op("q", ()))
            out.append(Op("cm", tuple(round(v, 9) for v in inv)))
            out.append(Op("BT", ()))
            out.extend(state_ops)
            out.extend(render_block(by_block[i], doc, resource_of))
            out.append(Op("ET", ()))
            out.append(Op("Q", ()))
            out.extend(state_ops)
            i = j + 1
            continue
        if i in remove:
            if op.operator in ("f", "F", "f*", "B", "B*", "b", "b*"):
                out.append(Op("n", ()))
            i += 1
            continue
        out.append(op)
        i += 1
    if add_rects:
        out = [Op("q", ())] + out + [Op("Q", ()), Op("q", ()), Op("rg", (0, 0, 0))]
        for x0, y0, x1, y1 in add_rects:
            out.append(Op("re", (round(x0, 6), round(y0, 6), round(x1 - x0, 6), round(y1 - y0, 6))))
            out.append(Op("f", ()))
        out.append(Op("Q", ()))
    return out


def write_repair(original: bytes, doc: DocumentIR, plan: PatchPlan) -> bytes:
    """Append an incremental update rewriting only the touched pages."""
    try:
        writer = PdfWriter(io.BytesIO(original), incremental=True)
    except Exception as exc:
        raise MalformedPdf(str(exc)) from exc
    touched = plan.touched_pages
    new_font_objs: Dict[str, object] = {}
    for pi in touched:
        page_obj = writer.pages[pi]
        contents = page_obj.get_contents()
        ops = parse_operations(contents.get_data() if contents is not None else b"", writer)
        resources = page_obj.get("/Resources")
        resources = resources.get_object() if resources is not None else DictionaryObject()
        fonts = resources.get("/Font")
        fonts = fonts.get_object() if fonts is not None else DictionaryObject()
        resource_of: Dict[str, str] = dict(doc.pages[pi].font_resources)
        for fid, name in plan.add_fonts.items():
            if fid not in new_font_objs:
                new_font_objs[fid] = writer._add_object(font_dictionary(load_metrics(name)))
            res_name = fid
            fonts[NameObject("/" + res_name)] = new_font_objs[fid]
            resource_of[fid] = res_name
        new_resources = DictionaryObject(dict(resources))
        new_resources[NameObject("/Font")] = DictionaryObject(dict(fonts))
        page_obj[NameObject("/Resources")] = new_resources
        new_ops = rewrite_page_content(ops, doc.pages[pi], doc, plan.blocks.get(pi, []),
                                       plan.remove_ops.get(pi, []), resource_of,
                                       plan.add_rects.get(pi, ()))
        page_obj[NameObject("/Contents")] = writer._add_object(_stream(serialize(new_ops)))
    buf = io.BytesIO()
    writer.write(buf)
    return buf.getvalue()

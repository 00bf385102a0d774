"""PDF -> DocumentIR.

File structure (xref, filters, encryption, object resolution) is handled by
pypdf; text state, glyph geometry and rectangle fills are interpreted here.
"""

from __future__ import annotations

import io
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from pypdf import PdfReader
from pypdf.errors import PdfReadError
from pypdf.generic import IndirectObject

from ..errors import Encrypted, MalformedPdf, UnsupportedEncoding
from ..ir import DocumentIR, FontRef, Glyph, OcrWord, Page, RectFill, TextLine, split_shift
from ..metrics import FontMetrics, canonical_font_name, load_metrics
from .content import Name, Op, parse_operations

logger = logging.getLogger(__name__)

IDENTITY = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)
FILL_OPS = {"f", "F", "f*", "B", "B*", "b", "b*"}
MAX_FORM_DEPTH = 8


def mat_mul(m, n):
    """``m x n`` for PDF 3x2 affine matrices."""
    a, b, c, d, e, f = m
    A, B, C, D, E, F = n
    return (a * A + b * C, a * B + b * D, c * A + d * C, c * B + d * D,
            e * A + f * C + E, e * B + f * D + F)


def mat_inv(m):
    a, b, c, d, e, f = m
    det = a * d - b * c
    if det == 0:
        raise MalformedPdf("singular transformation matrix")
    ia, ib, ic, id_ = d / det, -b / det, -c / det, a / det
    return (ia, ib, ic, id_, -(e * ia + f * ic), -(e * ib + f * id_))


def apply(m, x, y):
    a, b, c, d, e, f = m
    return a * x + c * y + e, b * x + d * y + f


def _resolve(obj):
    while isinstance(obj, IndirectObject):
        obj = obj.get_object()
    return obj


# -- fonts ------------------------------------------------------------------

_BF_RE = re.compile(rb"beginbf(char|range)(.*?)endbf\1", re.S)
_HEX_RE = re.compile(rb"<([0-9A-Fa-f\s]*)>|\[([^\]]*)\]")
_CS_RE = re.compile(rb"begincodespacerange(.*?)endcodespacerange", re.S)


def _hex(tok: bytes) -> bytes:
    return bytes.fromhex(tok.decode("ascii").replace(" ", "").replace("\n", "").replace("\r", ""))


def _utf16(b: bytes) -> str:
    try:
        return b.decode("utf-16-be")
    except UnicodeDecodeError:
        return b.decode("latin-1")


def parse_tounicode(data: bytes) -> Tuple[Dict[int, str], int]:
    """Parse a ToUnicode CMap into ``{code: text}`` and the code byte width."""
    mapping: Dict[int, str] = {}
    nbytes = 1
    cs = _CS_RE.search(data)
    if cs:
        toks = re.findall(rb"<([0-9A-Fa-f]+)>", cs.group(1))
        if toks:
            nbytes = max(len(t) // 2 for t in toks)
    for kind, body in _BF_RE.findall(data):
        toks = [m for m in _HEX_RE.finditer(body)]
        step = 2 if kind == b"char" else 3
        for i in range(0, len(toks) - step + 1, step):
            if kind == b"char":
                src, dst = toks[i].group(1), toks[i + 1].group(1)
                if src is None or dst is None:
                    continue
                mapping[int.from_bytes(_hex(src), "big")] = _utf16(_hex(dst))
            else:
                lo = int.from_bytes(_hex(toks[i].group(1)), "big")
                hi = int.from_bytes(_hex(toks[i + 1].group(1)), "big")
                dst = toks[i + 2]
                if dst.group(2) is not None:
                    items = re.findall(rb"<([0-9A-Fa-f]+)>", dst.group(2))
                    for k, item in enumerate(items):
                        mapping[lo + k] = _utf16(_hex(item))
                else:
                    base = _hex(dst.group(1))
                    for k in range(hi - lo + 1):
                        v = int.from_bytes(base, "big") + k
                        mapping[lo + k] = _utf16(v.to_bytes(len(base), "big"))
    return mapping, nbytes


def _glyph_name_to_unicode(name: str) -> Optional[str]:
    try:
        from pypdf._codecs import adobe_glyphs
    except ImportError:  # pragma: no cover - private module moved
        adobe_glyphs = {}
    key = "/" + name
    if key in adobe_glyphs:
        return adobe_glyphs[key]
    if name.startswith("uni") and len(name) >= 7:
        try:
            return chr(int(name[3:7], 16))
        except ValueError:
            return None
    if len(name) == 1:
        return name
    return None


_BASE_ENCODINGS = {"WinAnsiEncoding": "cp1252", "MacRomanEncoding": "mac_roman",
                   "StandardEncoding": "latin-1", "PDFDocEncoding": "latin-1"}


@dataclass
class _Font:
    ref: FontRef
    widths: Dict[int, float]
    default_width: float
    to_unicode: Dict[int, str]
    type3_scale: float = 1.0

    def decode(self, data: bytes) -> List[Tuple[int, bool]]:
        n = self.ref.code_bytes
        out = []
        for i in range(0, len(data) - n + 1, n):
            code = int.from_bytes(data[i:i + n], "big")
            out.append((code, n == 1 and code == 32))
        return out

    def width(self, code: int) -> float:
        return self.widths.get(code, self.default_width)


def _simple_encoding(fontdict) -> Dict[int, str]:
    enc = _resolve(fontdict.get("/Encoding"))
    base = "cp1252"
    diffs = []
    if isinstance(enc, str):
        base = _BASE_ENCODINGS.get(enc.lstrip("/"), base)
    elif enc is not None:
        be = enc.get("/BaseEncoding")
        if be is not None:
            base = _BASE_ENCODINGS.get(str(be).lstrip("/"), base)
        diffs = list(_resolve(enc.get("/Differences", [])) or [])
    table = {}
    for code in range(256):
        try:
            table[code] = bytes([code]).decode(base)
        except UnicodeDecodeError:
            pass
    code = 0
    for item in diffs:
        item = _resolve(item)
        if isinstance(item, (int, float)) and not isinstance(item, str):
            code = int(item)
        else:
            uni = _glyph_name_to_unicode(str(item).lstrip("/"))
            if uni is not None:
                table[code] = uni
            code += 1
    return table


def _cid_widths(desc) -> Tuple[Dict[int, float], float]:
    dw = float(_resolve(desc.get("/DW", 1000)))
    widths: Dict[int, float] = {}
    w = [_resolve(x) for x in (_resolve(desc.get("/W")) or [])]
    i = 0
    while i < len(w):
        first = int(w[i])
        nxt = _resolve(w[i + 1]) if i + 1 < len(w) else None
        if isinstance(nxt, list) or hasattr(nxt, "__iter__") and not isinstance(nxt, (str, bytes)):
            for k, v in enumerate(nxt):
                widths[first + k] = float(_resolve(v))
            i += 2
        else:
            last, v = int(w[i + 1]), float(w[i + 2])
            for c in range(first, last + 1):
                widths[c] = v
            i += 3
    return widths, dw


def load_font(font_id: str, fontdict, warnings: List[str]) -> _Font:
    fontdict = _resolve(fontdict)
    subtype = str(fontdict.get("/Subtype", "/Type1")).lstrip("/")
    base_font = str(fontdict.get("/BaseFont", f"/{font_id}")).lstrip("/")
    to_unicode: Dict[int, str] = {}
    code_bytes = 1
    tu = _resolve(fontdict.get("/ToUnicode"))
    if tu is not None and hasattr(tu, "get_data"):
        to_unicode, code_bytes = parse_tounicode(tu.get_data())
    widths: Dict[int, float] = {}
    default_width = 0.0
    type3_scale = 1.0
    if subtype == "Type0":
        code_bytes = 2
        desc = _resolve(_resolve(fontdict.get("/DescendantFonts"))[0])
        widths, default_width = _cid_widths(desc)
        base_font = str(desc.get("/BaseFont", fontdict.get("/BaseFont", font_id))).lstrip("/")
    else:
        code_bytes = 1
        if not to_unicode:
            to_unicode = _simple_encoding(fontdict)
        else:
            enc = _simple_encoding(fontdict)
            for k, v in enc.items():
                to_unicode.setdefault(k, v)
        first = int(_resolve(fontdict.get("/FirstChar", 0)))
        ws = _resolve(fontdict.get("/Widths"))
        if subtype == "Type3":
            fm = [float(_resolve(x)) for x in _resolve(fontdict.get("/FontMatrix"))]
            type3_scale = fm[0] * 1000.0
        if ws is not None:
            for k, v in enumerate(ws):
                widths[first + k] = float(_resolve(v)) * type3_scale
        fd = _resolve(fontdict.get("/FontDescriptor"))
        if fd is not None:
            default_width = float(_resolve(fd.get("/MissingWidth", 0)))
        if ws is None:
            shipped_name = canonical_font_name(base_font)
            if shipped_name:
                m = load_metrics(shipped_name)
                for code, ch in to_unicode.items():
                    if ch in m.widths:
                        widths[code] = float(m.widths[ch])
            else:
                warnings.append(f"font {font_id} ({base_font}) has no widths")
    char_widths: Dict[str, int] = {}
    for code, w in widths.items():
        ch = to_unicode.get(code)
        if ch and len(ch) == 1 and w > 0:
            char_widths.setdefault(ch, int(round(w)))
    coverage = frozenset(to_unicode[c] for c, w in widths.items() if w > 0 and to_unicode.get(c))
    shipped_name = canonical_font_name(base_font)
    metrics = None
    shipped = False
    if shipped_name:
        m = load_metrics(shipped_name)
        if all(m.widths.get(ch) == w for ch, w in char_widths.items()):
            metrics, shipped = m, True
        else:
            warnings.append(f"font {font_id}: widths disagree with shipped {shipped_name} table")
    if metrics is None:
        metrics = FontMetrics(name=base_font, widths=char_widths or {" ": 1})
    ref = FontRef(font_id=font_id, base_font=base_font, metrics=metrics, shipped=shipped,
                  code_bytes=code_bytes, coverage=coverage)
    return _Font(ref=ref, widths=widths, default_width=default_width, to_unicode=to_unicode,
                 type3_scale=type3_scale)


# -- interpreter ------------------------------------------------------------

@dataclass
class _GState:
    ctm: tuple = IDENTITY
    fill: tuple = (0.0, 0.0, 0.0)
    fill_cs: str = "DeviceGray"
    tc: float = 0.0
    tw: float = 0.0
    th: float = 1.0
    tl: float = 0.0
    ts: float = 0.0
    font: Optional[str] = None
    size: float = 0.0

    def copy(self):
        return _GState(**self.__dict__)


@dataclass
class _RawGlyph:
    code: int
    unicode: Optional[str]
    advance: float
    x: float
    y: float
    end_x: float
    size: float
    hscale: float
    font_id: str
    tc: float
    run_start: bool
    order: int
    color: tuple
    source: int
    # spacing (points along baseline) applied after this glyph by Tc/Tw
    spacing_after: float = 0.0


def _cmyk_to_rgb(c, m, y, k):
    return ((1 - c) * (1 - k), (1 - m) * (1 - k), (1 - y) * (1 - k))


def _color(operands, cs: str):
    vals = [float(v) for v in operands if isinstance(v, (int, float))]
    if cs == "DeviceRGB" or len(vals) == 3:
        return tuple(vals[:3])
    if cs == "DeviceCMYK" or len(vals) == 4:
        return _cmyk_to_rgb(*vals[:4])
    if vals:
        return (vals[0],) * 3
    return (0.0, 0.0, 0.0)


class _PageInterpreter:
    def __init__(self, reader: Optional[PdfReader], resources, fonts: Dict[str, _Font],
                 doc_fonts: Dict[str, FontRef], warnings: List[str], by_obj: Dict):
        self.reader = reader
        self.fonts = fonts
        self._by_obj = by_obj
        self.doc_fonts = doc_fonts
        self.warnings = warnings
        self.glyphs: List[_RawGlyph] = []
        self.rects: List[RectFill] = []
        self.block_ctm: Dict[int, tuple] = {}
        self.font_resources: Dict[str, str] = {}
        self.order = 0
        self._resources_stack = [resources]

    def font(self, name: str) -> _Font:
        key = str(name)
        res = _resolve(self._resources_stack[-1]) or {}
        fonts = _resolve(res.get("/Font")) or {}
        entry = fonts.get("/" + key)
        if entry is None:
            raise MalformedPdf(f"font resource /{key} not found")
        obj_key = entry.idnum if isinstance(entry, IndirectObject) else id(entry)
        cached = self._by_obj.get(obj_key)
        if cached is not None:
            self.font_resources.setdefault(cached.ref.font_id, key)
            return cached
        ident = key
        n = 1
        while ident in self.fonts:
            n += 1
            ident = f"{key}_{n}"
        f = load_font(ident, entry, self.warnings)
        self.fonts[ident] = f
        self._by_obj[obj_key] = f
        self.doc_fonts[ident] = f.ref
        self.font_resources.setdefault(ident, key)
        return f

    def run(self, ops: List[Op], gs: _GState, depth: int = 0, top_level: bool = True):
        stack: List[_GState] = []
        tm = tlm = IDENTITY
        path_rects: List[Tuple[tuple, int]] = []
        subpath: List[Tuple[float, float]] = []
        run_start = True
        block = -1
        for idx, op in enumerate(ops):
            o, a = op.operator, op.operands
            self.order += 1
            try:
                if o == "q":
                    stack.append(gs.copy())
                elif o == "Q":
                    if stack:
                        gs = stack.pop()
                elif o == "cm":
                    gs.ctm = mat_mul(tuple(float(x) for x in a[:6]), gs.ctm)
                elif o in ("rg", "g", "k"):
                    gs.fill = _color(a, {"rg": "DeviceRGB", "g": "DeviceGray", "k": "DeviceCMYK"}[o])
                    gs.fill_cs = {"rg": "DeviceRGB", "g": "DeviceGray", "k": "DeviceCMYK"}[o]
                elif o == "cs":
                    gs.fill_cs = str(a[0])
                    gs.fill = (0.0, 0.0, 0.0)
                elif o in ("sc", "scn"):
                    gs.fill = _color(a, gs.fill_cs)
                elif o == "BT":
                    tm = tlm = IDENTITY
                    run_start = True
                    block = idx if top_level else -1
                    if top_level:
                        self.block_ctm[idx] = gs.ctm
                elif o == "ET":
                    block = -1
                elif o == "Tc":
                    gs.tc = float(a[0])
                elif o == "Tw":
                    gs.tw = float(a[0])
                elif o == "Tz":
                    gs.th = float(a[0]) / 100.0
                elif o == "TL":
                    gs.tl = float(a[0])
                elif o == "Ts":
                    gs.ts = float(a[0])
                elif o == "Tf":
                    gs.font, gs.size = str(a[0]), float(a[1])
                elif o == "Td":
                    tlm = mat_mul((1, 0, 0, 1, float(a[0]), float(a[1])), tlm)
                    tm = tlm
                    run_start = True
                elif o == "TD":
                    gs.tl = -float(a[1])
                    tlm = mat_mul((1, 0, 0, 1, float(a[0]), float(a[1])), tlm)
                    tm = tlm
                    run_start = True
                elif o == "Tm":
                    tlm = tm = tuple(float(x) for x in a[:6])
                    run_start = True
                elif o == "T*":
                    tlm = mat_mul((1, 0, 0, 1, 0, -gs.tl), tlm)
                    tm = tlm
                    run_start = True
                elif o in ("Tj", "TJ", "'", '"'):
                    if o == "'":
                        tlm = mat_mul((1, 0, 0, 1, 0, -gs.tl), tlm)
                        tm = tlm
                        run_start = True
                        items = [a[0]]
                    elif o == '"':
                        gs.tw, gs.tc = float(a[0]), float(a[1])
                        tlm = mat_mul((1, 0, 0, 1, 0, -gs.tl), tlm)
                        tm = tlm
                        run_start = True
                        items = [a[2]]
                    elif o == "Tj":
                        items = [a[0]]
                    else:
                        items = list(a[0])
                    tm, run_start = self._show(items, gs, tm, run_start, block)
                elif o == "re":
                    x, y, w, h = (float(v) for v in a[:4])
                    pts = [apply(gs.ctm, px, py) for px, py in ((x, y), (x + w, y), (x, y + h), (x + w, y + h))]
                    xs, ys = [p[0] for p in pts], [p[1] for p in pts]
                    path_rects.append(((min(xs), min(ys), max(xs), max(ys)), idx if top_level else -1))
                    subpath = []
                elif o == "m":
                    subpath = [apply(gs.ctm, float(a[0]), float(a[1]))]
                elif o == "l":
                    subpath.append(apply(gs.ctm, float(a[0]), float(a[1])))
                elif o == "h":
                    rect = _axis_rect(subpath)
                    if rect:
                        path_rects.append((rect, -1))
                    subpath = []
                elif o in FILL_OPS:
                    rect = _axis_rect(subpath)
                    if rect:
                        path_rects.append((rect, -1))
                    for bbox, src in path_rects:
                        self.rects.append(RectFill(bbox=bbox, color=tuple(gs.fill), draw_order=self.order,
                                                   source=src, paint=idx if top_level else -1))
                    path_rects, subpath = [], []
                elif o in ("S", "s", "n"):
                    path_rects, subpath = [], []
                elif o == "Do":
                    self._do_xobject(str(a[0]), gs, depth)
            except (IndexError, TypeError, ValueError) as exc:
                raise MalformedPdf(f"bad operands for {o}: {a!r}") from exc

    def _do_xobject(self, name: str, gs: _GState, depth: int):
        if depth >= MAX_FORM_DEPTH:
            self.warnings.append("form XObject nesting too deep")
            return
        res = _resolve(self._resources_stack[-1]) or {}
        xobj = _resolve((_resolve(res.get("/XObject")) or {}).get("/" + name))
        if xobj is None or str(xobj.get("/Subtype")) != "/Form":
            return
        matrix = tuple(float(_resolve(x)) for x in (xobj.get("/Matrix") or IDENTITY))
        inner = gs.copy()
        inner.ctm = mat_mul(matrix, gs.ctm)
        self._resources_stack.append(xobj.get("/Resources") or self._resources_stack[-1])
        try:
            self.run(parse_operations(xobj.get_data(), self.reader), inner, depth + 1, top_level=False)
        finally:
            self._resources_stack.pop()

    def _show(self, items, gs: _GState, tm, run_start: bool, block: int):
        if gs.font is None:
            raise MalformedPdf("text shown before Tf")
        font = self.font(gs.font)
        fs, th = gs.size, gs.th
        for item in items:
            if isinstance(item, (int, float)):
                tx = -float(item) / 1000.0 * fs * th
                tm = mat_mul((1, 0, 0, 1, tx, 0), tm)
                continue
            for code, is_space in font.decode(bytes(item)):
                w = font.width(code)
                if code not in font.widths and font.default_width == 0:
                    self.warnings.append(f"no width for code {code} in font {font.ref.font_id}")
                trm = mat_mul((fs * th, 0, 0, fs, 0, gs.ts), mat_mul(tm, gs.ctm))
                x, y = trm[4], trm[5]
                sy = math.hypot(trm[2], trm[3])
                sx = math.hypot(trm[0], trm[1])
                size = sy
                hscale = sx / sy if sy else 1.0
                end = apply(trm, w / 1000.0, 0)[0]
                uni = font.to_unicode.get(code)
                if uni is None:
                    self.warnings.append(f"unmappable code {code} in font {font.ref.font_id}")
                spacing = gs.tc + (gs.tw if is_space else 0.0)
                tx = (w / 1000.0 * fs + spacing) * th
                tm = mat_mul((1, 0, 0, 1, tx, 0), tm)
                scale_x = sx / fs if fs else 1.0
                self.glyphs.append(_RawGlyph(
                    code=code, unicode=uni, advance=w, x=x, y=y, end_x=end, size=size,
                    hscale=hscale, font_id=font.ref.font_id,
                    tc=gs.tc * 1000.0 / fs if fs else 0.0, run_start=run_start,
                    order=self.order, color=tuple(gs.fill), source=block,
                    spacing_after=spacing * th * scale_x))
                run_start = False
        return tm, run_start


def _axis_rect(points):
    if len(points) not in (4, 5):
        return None
    pts = points[:4]
    xs = sorted({round(p[0], 6) for p in pts})
    ys = sorted({round(p[1], 6) for p in pts})
    if len(xs) == 2 and len(ys) == 2:
        return (xs[0], ys[0], xs[1], ys[1])
    return None


def _build_lines(raw: List[_RawGlyph], tol: float = 0.5) -> List[TextLine]:
    """Group glyphs by baseline and convert geometry into advances + shifts."""
    groups: Dict[float, List[_RawGlyph]] = {}
    keys: List[float] = []
    for g in raw:
        for k in keys:
            if abs(k - g.y) <= tol:
                groups[k].append(g)
                break
        else:
            keys.append(g.y)
            groups[g.y] = [g]
    lines = []
    for k in sorted(keys, key=lambda v: -v):
        gl = groups[k]
        glyphs: List[Glyph] = []
        prev: Optional[_RawGlyph] = None
        for g in gl:
            if prev is None:
                shift = 0.0
            else:
                unit = g.size * g.hscale / 1000.0
                shift = (prev.end_x - g.x) / unit if unit else 0.0
            whole, residue = split_shift(shift)
            glyphs.append(Glyph(code=g.code, unicode=g.unicode, advance=g.advance, shift=whole,
                                residue=residue, origin_x=g.x, origin_y=g.y, font_id=g.font_id,
                                font_size=round(g.size, 9), tc=round(g.tc, 6), run_start=g.run_start,
                                hscale=round(g.hscale, 9), draw_order=g.order, color=g.color,
                                source=g.source))
            prev = g
        trailing = 0.0
        if gl:
            last = gl[-1]
            unit = last.size * last.hscale / 1000.0
            trailing = round(-last.spacing_after / unit, 6) if unit else 0.0
        line = TextLine(glyphs=glyphs, baseline_y=gl[0].y, trailing=trailing)
        lines.append(fold_ocr_operators(line))
    return lines


def fold_ocr_operators(line: TextLine) -> TextLine:
    """Record word-level Tc/Td runs on a line.

    A run starts at every glyph placed by a text positioning operator and
    extends through the glyph before the next such start, so an OCR word's
    run covers its successor space. Runs split where Tc changes. Lines with
    a single run and no character spacing get no annotations.
    """
    glyphs = line.glyphs
    if not glyphs:
        line.ocr_words = []
        return line
    starts = [0]
    for i in range(1, len(glyphs)):
        if glyphs[i].run_start or glyphs[i].tc != glyphs[i - 1].tc:
            starts.append(i)
    words = []
    for s, e in zip(starts, starts[1:] + [len(glyphs)]):
        words.append(OcrWord(start=s, stop=e, tc=glyphs[s].tc,
                             td_x=glyphs[s].origin_x if glyphs[s].run_start else None))
    if len(words) == 1 and words[0].tc == 0:
        words = []
    line.ocr_words = words
    return line


def parse_document(data: bytes, strict: bool = False) -> DocumentIR:
    """Parse PDF bytes into a :class:`DocumentIR`.

    Unmappable glyph codes are kept with ``unicode=None``; with ``strict``
    they raise :class:`UnsupportedEncoding` instead.
    """
    try:
        reader = PdfReader(io.BytesIO(data), strict=False)
        if reader.is_encrypted:
            raise Encrypted("encrypted PDF documents are not supported")
        pages_obj = reader.pages
        n_pages = len(pages_obj)
    except Encrypted:
        raise
    except (PdfReadError, ValueError, KeyError, TypeError, AttributeError) as exc:
        raise MalformedPdf(str(exc)) from exc
    except Exception as exc:  # pypdf can surface assorted errors on junk input
        raise MalformedPdf(str(exc)) from exc
    if n_pages == 0:
        raise MalformedPdf("document has no pages")
    warnings: List[str] = []
    doc_fonts: Dict[str, FontRef] = {}
    font_cache: Dict[str, _Font] = {}
    by_obj: Dict = {}
    pages = []
    for pi, page in enumerate(pages_obj):
        try:
            contents = page.get_contents()
            ops = parse_operations(contents.get_data(), reader) if contents is not None else []
            mb = tuple(float(v) for v in page.mediabox)
        except MalformedPdf:
            raise
        except Exception as exc:
            raise MalformedPdf(f"page {pi}: {exc}") from exc
        interp = _PageInterpreter(reader, page.get("/Resources"), font_cache, doc_fonts, warnings, by_obj)
        interp.run(ops, _GState())
        pages.append(Page(index=pi, lines=_build_lines(interp.glyphs), rects=interp.rects,
                          mediabox=mb, block_ctm=interp.block_ctm,
                          font_resources=interp.font_resources))
    if strict:
        bad = [w for w in warnings if w.startswith("unmappable")]
        if bad:
            raise UnsupportedEncoding(bad[0])
    for w in sorted(set(warnings)):
        logger.warning(w)
    producer = None
    try:
        meta = reader.metadata
        if meta is not None:
            producer = meta.get("/Producer") or meta.get("/Creator")
            producer = str(producer) if producer else None
    except Exception:
        producer = None
    return DocumentIR(pages=pages, fonts=doc_fonts, producer_hint=producer, warnings=sorted(set(warnings)))


def parse_file(path) -> DocumentIR:
    with open(path, "rb") as f:
        return parse_document(f.read())

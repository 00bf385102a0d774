"""Synthetic redacted documents with a ground-truth sidecar.

Each document is a single page of wrapped prose with names dropped into
short frames. Lines are typeset under one of the supported schemes and a
share of the names is redacted the way common tools do it: either a box
painted over live text (nonexcising) or the glyphs removed, the following
text kept in place with a compensating shift, and a box drawn over the gap
(excising).
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from .dictionaries import load_corpus, name_dictionary
from .errors import MissingGlyph
from .matcher import Dictionary
from .metrics import FontMetrics, load_metrics
from .pdf.content import Name, Op, serialize, tj_array
from .pdf.write import PageSpec, build_pdf, winansi_code
from .schemes.base import SchemeId, word_model

logger = logging.getLogger(__name__)

SIDECAR_VERSION = 1
LINE_WIDTH_PT = 468.0
LEFT_MARGIN = 72.0
TOP = 720.0
FRAMES = (
    "Copies went to {} and the clerk.",
    "Ask {} about the schedule.",
    "The form was signed by {} on Monday.",
    "Call {} with any questions.",
    "A note from {} was attached.",
    "The file was reviewed by {} last week.",
)
OCR_TC_CHOICES = (-2.3, -1.5, -0.8, 0.0, 0.6, 1.2)
GENERATED_SCHEMES = (SchemeId.UNADJUSTED, SchemeId.WORD2007, SchemeId.WORD2019, SchemeId.OCR)


@dataclass
class Redaction:
    line: int
    kind: str
    text: str
    start: int  # character offset in the original line
    width_units: float
    bbox: Tuple[float, float, float, float]
    first_on_line: bool = True


@dataclass
class DocTruth:
    doc: str
    scheme: str
    font: str
    size: float
    seed: int
    lines: List[str]
    redactions: List[Redaction] = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        d["version"] = SIDECAR_VERSION
        return d


def _encode(text: str) -> bytes:
    out = bytearray()
    for c in text:
        code = winansi_code(c)
        if code is None:
            raise MissingGlyph(c, "WinAnsi")
        out.append(code)
    return bytes(out)


def wrap(words: Sequence[str], metrics: FontMetrics, size: float, width: float = LINE_WIDTH_PT) -> List[str]:
    lines, cur = [], ""
    for w in words:
        cand = w if not cur else cur + " " + w
        if cur and sum(metrics.widths[c] for c in cand) * size / 1000 > width:
            lines.append(cur)
            cur = w
        else:
            cur = cand
    if cur:
        lines.append(cur)
    return lines


def line_shifts(text: str, scheme: SchemeId, metrics: FontMetrics, size: float) -> List[float]:
    """IR shifts a producer using ``scheme`` writes for ``text``."""
    if scheme.is_word:
        return word_model(metrics.name, size, scheme.version).shifts(text)
    return [0.0] * len(text)


def _origins(text: str, shifts: Sequence[float], metrics: FontMetrics, size: float, x0: float) -> List[float]:
    xs = [x0]
    for i in range(1, len(text)):
        xs.append(xs[-1] + (metrics.widths[text[i - 1]] - shifts[i]) * size / 1000)
    return xs


def _box(x0: float, x1: float, y: float, size: float) -> Tuple[float, float, float, float]:
    return (round(x0, 4), round(y - 0.25 * size, 4), round(x1, 4), round(y + 0.9 * size, 4))


def render_shifted_line(text: str, shifts: Sequence[float], metrics: FontMetrics, size: float,
                        x: float, y: float, span: Optional[Tuple[int, int]] = None,
                        excise: bool = False) -> Tuple[List[Op], Optional[tuple], float]:
    """Operators for one TJ-positioned line, optionally excising ``span``.

    Returns ``(ops, gap_or_text_box, removed_width_units)``.
    """
    xs = _origins(text, shifts, metrics, size, x)
    shifts = list(shifts)
    keep = list(range(len(text)))
    box = None
    width = 0.0
    if span is not None:
        a, b = span
        adv = sum(metrics.widths[c] for c in text[a:b])
        width = adv - sum(shifts[a:b + 1])
        if excise:
            keep = list(range(a)) + list(range(b, len(text)))
            shifts[b] = -width
            gap0 = xs[a - 1] + metrics.widths[text[a - 1]] * size / 1000
            box = _box(gap0, xs[b], y, size)
        else:
            end = max(xs[i] + metrics.widths[text[i]] * size / 1000 for i in range(a, b))
            box = _box(xs[a] - 0.3, end + 0.3, y, size)
    chunks: list = []
    for k, i in enumerate(keep):
        if k and shifts[i]:
            chunks.append(round(shifts[i], 6))
        chunks.append(_encode(text[i]))
    ops = [Op("BT", ()), Op("Tf", (Name("F1"), size)), Op("Tm", (1, 0, 0, 1, round(x, 4), round(y, 4))),
           Op("TJ", (tj_array(chunks),)), Op("ET", ())]
    return ops, box, width


def render_ocr_line(text: str, metrics: FontMetrics, size: float, x: float, y: float,
                    rng: random.Random, span: Optional[Tuple[int, int]] = None,
                    excise: bool = False, jitter_pt: float = 0.4) -> Tuple[List[Op], Optional[tuple], float]:
    """An OCR text layer line: one Td and one Tc per word, Tc covering the trailing space."""
    words = []
    i = 0
    while i < len(text):
        j = text.find(" ", i)
        j = len(text) if j < 0 else j
        words.append((i, min(j + 1, len(text))))  # word plus successor space
        i = j + 1
    k = size / 1000
    ops = [Op("BT", ()), Op("Tf", (Name("F1"), size))]
    box = None
    width = 0.0
    prev_x = 0.0
    pen = x
    for wi, (a, b) in enumerate(words):
        tc = rng.choice(OCR_TC_CHOICES)
        start = round(pen + (rng.uniform(-jitter_pt, jitter_pt) if wi else 0.0), 4)
        word = text[a:b]
        core = word.rstrip(" ")
        advance = sum(metrics.widths[c] + tc for c in word)
        pen = start + advance * k
        redacted = span is not None and span[0] == a and span[1] == a + len(core)
        ops.append(Op("Tc", (round(tc * size / 1000, 6),)))
        if redacted:
            width = sum(metrics.widths[c] + tc for c in core)
            space_x = round(start + width * k, 6)
            if excise:
                box = (start, round(y - 0.25 * size, 4), space_x, round(y + 0.9 * size, 4))
                if len(word) > len(core):
                    ops.append(Op("Td", (round(space_x - prev_x, 6), 0 if wi else y)))
                    ops.append(Op("Tj", (_encode(word[len(core):]),)))
                    prev_x = space_x
                continue
            # OCR boxes follow the recognised word box, which starts at its Td
            box = _box(start, space_x + 0.3, y, size)
        ops.append(Op("Td", (round(start - prev_x, 6), 0 if wi else y)))
        ops.append(Op("Tj", (_encode(word),)))
        prev_x = start
    ops.append(Op("ET", ()))
    return ops, box, width


def _name_spans(line: str, names: Sequence[str]) -> List[Tuple[int, int]]:
    spans = []
    for n in names:
        start = 0
        while True:
            i = line.find(n, start)
            if i < 0:
                break
            j = i + len(n)
            if (i == 0 or line[i - 1] == " ") and (j == len(line) or line[j] == " "):
                spans.append((i, j))
            start = j
    return sorted(set(spans))


def generate_document(rng: random.Random, scheme: SchemeId, font: str, size: float,
                      dictionary: Dictionary, sentences: Sequence[str], redact_rate: float = 0.5,
                      nonexcising_rate: float = 0.2, n_sentences: int = 5,
                      doc_id: str = "doc", seed: int = 0) -> Tuple[bytes, DocTruth]:
    metrics = load_metrics(font)
    weights = [dictionary.freq.get(e, 0.0) for e in dictionary.entries] if dictionary.freq else None
    parts, names = [], []
    for _ in range(n_sentences):
        parts.append(rng.choice(sentences))
        name = rng.choices(dictionary.entries, weights=weights)[0]
        names.append(name)
        parts.append(rng.choice(FRAMES).format(name))
    lines = wrap(" ".join(parts).split(" "), metrics, size)
    truth = DocTruth(doc=doc_id, scheme=scheme.value, font=metrics.name, size=size, seed=seed, lines=lines)
    content: List[Op] = []
    boxes: List[tuple] = []
    chosen = []
    for li, text in enumerate(lines):
        spans = [s for s in _name_spans(text, names) if 0 < s[0] and s[1] < len(text) - 1]
        if spans and rng.random() < redact_rate:
            chosen.append((li, rng.choice(spans)))
    if not chosen:
        for li, text in enumerate(lines):
            spans = [s for s in _name_spans(text, names) if 0 < s[0] and s[1] < len(text) - 1]
            if spans:
                chosen.append((li, spans[0]))
                break
    chosen = dict(chosen)
    leading = round(size * 1.25, 4)
    for li, text in enumerate(lines):
        y = round(TOP - li * leading, 4)
        span = chosen.get(li)
        kind = None
        if span is not None:
            kind = "nonexcising" if rng.random() < nonexcising_rate else "excising"
        excise = kind == "excising"
        if scheme == SchemeId.OCR:
            ops, box, width = render_ocr_line(text, metrics, size, LEFT_MARGIN, y, rng, span, excise)
        else:
            shifts = line_shifts(text, scheme, metrics, size)
            ops, box, width = render_shifted_line(text, shifts, metrics, size, LEFT_MARGIN, y, span, excise)
        content.extend(ops)
        if span is not None:
            boxes.append(box)
            truth.redactions.append(Redaction(line=li, kind=kind, text=text[span[0]:span[1]],
                                              start=span[0], width_units=round(width, 6), bbox=box))
    content.append(Op("rg", (0, 0, 0)))
    for b in boxes:
        content.append(Op("re", (b[0], b[1], round(b[2] - b[0], 6), round(b[3] - b[1], 6))))
        content.append(Op("f", ()))
    producer = {SchemeId.UNADJUSTED: "glyphgate corpus (unadjusted)",
                SchemeId.WORD2007: "glyphgate corpus (word 2007 model)",
                SchemeId.WORD2019: "glyphgate corpus (word 2019 model)",
                SchemeId.OCR: "glyphgate corpus (ocr layer)"}[scheme]
    pdf = build_pdf([PageSpec(serialize(content), {"F1": metrics.name})], producer=producer)
    return pdf, truth


def gen_corpus(n_docs: int, scheme: SchemeId, font: str, size: float = 12, redact_rate: float = 0.5,
               seed: int = 0, out_dir=None, dictionary: Optional[Dictionary] = None,
               nonexcising_rate: float = 0.2, n_sentences: int = 5) -> List[Tuple[bytes, DocTruth]]:
    """Generate ``n_docs`` documents; deterministic for a given seed.

    With ``out_dir`` each document is written as ``<id>.pdf`` plus
    ``<id>.truth.json``.
    """
    scheme = SchemeId(scheme)
    if scheme not in GENERATED_SCHEMES:
        raise ValueError(f"cannot generate scheme {scheme.value}")
    dictionary = dictionary or name_dictionary("last")
    sentences = load_corpus()
    rng = random.Random(f"{seed}:{scheme.value}:{font}:{size}")
    out = []
    for i in range(n_docs):
        doc_id = f"{scheme.value}-{load_metrics(font).name}-{size:g}-{i:05d}"
        pdf, truth = generate_document(rng, scheme, font, size, dictionary, sentences, redact_rate,
                                       nonexcising_rate, n_sentences, doc_id, seed)
        out.append((pdf, truth))
        if out_dir is not None:
            d = Path(out_dir)
            d.mkdir(parents=True, exist_ok=True)
            (d / f"{doc_id}.pdf").write_bytes(pdf)
            (d / f"{doc_id}.truth.json").write_text(json.dumps(truth.to_json(), indent=1, sort_keys=True))
    return out

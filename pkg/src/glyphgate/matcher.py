"""Dictionary matching against a redaction's fingerprint.

Every dictionary entry is typeset into the site's line under the page's
scheme, excised again, and kept only if the result is indistinguishable
from the document: same removed width and, for Word, same shifts on the
suffix glyphs that follow the redaction.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import EmptyMatchSet, MissingGlyph
from .ir import DocumentIR, TextLine, qshift
from .locator import EXCISING, RedactionSite, measure_site_width
from .metrics import FontMetrics, index_dictionary, DictWidthIndex, widths_of
from .schemes.base import GlyphTable, SchemeId, WordModel, word_model
from .schemes.identify import JUMP_UNITS
from .schemes.ocr import left_margin, ocr_side_channel
from .schemes.word import after_to_ir, word_edit_variants

logger = logging.getLogger(__name__)

# widths and shifts compare at the 0.01 unit quantum
MATCH_EPS = 0.005
# Word shifts inside a redaction move its width by at most this many device
# dots; measured worst cases are 7.2 (2007) and 2.8 (2019) over sizes 8-16.
# Used when a site cannot be simulated exactly.
WORD_WIDTH_SLACK_DOTS = {2007: 10.0, 2019: 4.0}
# width slack for pages whose scheme was not recognised
UNRECOGNIZED_SLACK = 10.0
EDIT_WINDOW = 50.0


class Projection(str, enum.Enum):
    FULL = "full"  # width and every comparable shift
    WIDTH = "width"  # width only
    LENGTH = "length"  # glyph count only (what a monospaced rendering would leak)


# -- dictionaries -------------------------------------------------------------

@dataclass
class Dictionary:
    entries: List[str]
    freq: Optional[Dict[str, float]] = None
    name: str = "dict"
    # expanded variant -> base entry (titles, initials)
    base_of: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        uniq = []
        for e in self.entries:
            if e not in seen:
                seen.add(e)
                uniq.append(e)
        if len(uniq) != len(self.entries):
            logger.warning("dictionary %s: dropped %d duplicate entries", self.name, len(self.entries) - len(uniq))
        self.entries = uniq
        if self.freq is not None:
            total = sum(self.freq.values())
            if total <= 0:
                raise ValueError("frequency table sums to zero")
            if abs(total - 1) > 1e-9:
                self.freq = {k: v / total for k, v in self.freq.items()}
        self._encoded: Dict[tuple, tuple] = {}
        self._index: Dict[str, DictWidthIndex] = {}

    def __len__(self):
        return len(self.entries)

    def base(self, entry: str) -> str:
        return self.base_of.get(entry, entry)

    def encoded(self, table: GlyphTable) -> Tuple[np.ndarray, np.ndarray]:
        key = tuple(table.index)
        if key not in self._encoded:
            self._encoded[key] = table.encode(self.entries)
        return self._encoded[key]

    def width_index(self, metrics: FontMetrics) -> DictWidthIndex:
        if metrics.name not in self._index:
            self._index[metrics.name] = index_dictionary(self.entries, metrics, strict=False)
        return self._index[metrics.name]


def load_dictionary(path, name: Optional[str] = None, freq_path=None) -> Dictionary:
    """Read ``entry`` or ``entry<TAB>count`` lines (UTF-8)."""
    entries, counts = [], {}
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            entry, _, count = line.partition("\t")
            entries.append(entry)
            if count:
                counts[entry] = float(count)
    if freq_path is not None:
        counts = {}
        with open(freq_path, encoding="utf-8") as f:
            for raw in f:
                entry, _, count = raw.rstrip("\n").partition("\t")
                if entry and count:
                    counts[entry] = float(count)
    return Dictionary(entries, counts or None, name or str(path))


# -- fingerprints ---------------------------------------------------------------

@dataclass(frozen=True)
class Fingerprint:
    redaction_width: float
    prefix_shifts: Tuple[float, ...] = ()
    suffix_shifts: Tuple[float, ...] = ()
    glyph_coverage: Optional[frozenset] = None
    length: Optional[int] = None

    def key(self, projection: Projection = Projection.FULL) -> tuple:
        if projection == Projection.LENGTH:
            return (self.length,)
        w = qshift(self.redaction_width)
        if projection == Projection.WIDTH:
            return (w,)
        return (w, tuple(qshift(s) for s in self.suffix_shifts))

    def matches(self, other: "Fingerprint", projection: Projection = Projection.FULL,
                tolerance: float = 0.0) -> bool:
        if projection == Projection.LENGTH:
            return self.length == other.length
        if abs(self.redaction_width - other.redaction_width) > tolerance + MATCH_EPS:
            return False
        if projection == Projection.WIDTH:
            return True
        n = min(len(self.suffix_shifts), len(other.suffix_shifts))
        return all(abs(a - b) <= tolerance + MATCH_EPS
                   for a, b in zip(self.suffix_shifts[:n], other.suffix_shifts[:n]))


@dataclass
class SiteContext:
    """Everything needed to re-typeset a site's line with a guess."""

    site: RedactionSite
    scheme: SchemeId
    metrics: FontMetrics
    size: float
    prefix: str
    suffix: str
    fingerprint: Fingerprint
    n_cmp: int
    model: Optional[WordModel] = None
    tc: float = 0.0
    gated: bool = False  # dependent scheme but not first on its line

    @property
    def effective_scheme(self) -> SchemeId:
        if self.scheme in (SchemeId.NEARWORD, SchemeId.UNRECOGNIZED):
            return SchemeId.UNADJUSTED
        return self.scheme


def _next_jump(line: TextLine, start: int) -> int:
    for i in range(start, len(line.glyphs)):
        if abs(line.glyphs[i].exact_shift) >= JUMP_UNITS:
            return i
    return len(line.glyphs)


def site_context(doc: DocumentIR, site: RedactionSite, scheme: SchemeId,
                 precise: bool = False, il_fix: bool = False) -> SiteContext:
    if site.kind != EXCISING:
        raise ValueError("only excising sites can be attacked; nonexcising text is still present")
    page = doc.pages[site.page]
    line = page.lines[site.line]
    q = site.gap_index
    g = line.glyphs[q]
    ref = doc.fonts[g.font_id]
    size = round(g.font_size, 4)
    tc = 0.0
    if scheme == SchemeId.OCR:
        sc = ocr_side_channel(line, site.box.bbox, left_margin(page.lines))
        width, tc = sc.width, sc.tc
    else:
        width = measure_site_width(site, doc, scheme)
    stop = _next_jump(line, q + 1)
    shifts = line.shifts
    fp = Fingerprint(
        redaction_width=width,
        prefix_shifts=tuple(shifts[:q]),
        suffix_shifts=tuple(shifts[q + 1:stop]) if scheme.is_word else (),
        glyph_coverage=ref.coverage or None,
        length=round(width / ref.metrics.widths[next(iter(ref.metrics.widths))])
        if ref.metrics.monospaced else None,
    )
    model = None
    if scheme.is_word:
        model = word_model(ref.metrics.name, size, scheme.version, precise, il_fix)
    text = line.text
    return SiteContext(site=site, scheme=scheme, metrics=ref.metrics, size=size,
                       prefix=text[:q], suffix=text[q:stop], fingerprint=fp,
                       n_cmp=max(0, stop - q - 1), model=model, tc=tc,
                       gated=scheme.is_word and not site.first_on_line)


def fingerprint_site(doc: DocumentIR, site: RedactionSite, scheme: SchemeId) -> Fingerprint:
    """Leaked information at ``site``: removed width plus surrounding shifts."""
    return site_context(doc, site, scheme).fingerprint


def simulate_guess(ctx: SiteContext, guess: str, scheme: Optional[SchemeId] = None,
                   edits: int = 0) -> List[Fingerprint]:
    """Fingerprints the site would show had ``guess`` been redacted.

    One fingerprint without edits; with ``edits > 0`` one per distinct Word
    edit-history variant.
    """
    scheme = scheme or ctx.effective_scheme
    for c in guess:
        if c not in ctx.metrics.widths:
            raise MissingGlyph(c, ctx.metrics.name)
    adv = sum(ctx.metrics.widths[c] for c in guess)
    length = len(guess)
    cov = frozenset(guess)
    if scheme == SchemeId.OCR:
        return [Fingerprint(round(adv + length * ctx.tc, 6), ctx.fingerprint.prefix_shifts, (), cov, length)]
    if not scheme.is_word:
        return [Fingerprint(float(adv), ctx.fingerprint.prefix_shifts, (), cov, length)]
    model = ctx.model or word_model(ctx.metrics.name, ctx.size, scheme.version)
    p, m = len(ctx.prefix), len(guess)
    text = ctx.prefix + guess + ctx.suffix
    if edits <= 0:
        variants = [model.shifts(text)]
    else:
        span = (p, p + m)
        variants = [list(v.shifts) for v in word_edit_variants(
            text, span, edits, model.metrics, model.internal, model.size, model.version,
            precise=model.precise)]
    out = []
    for ir in variants:
        width = adv - sum(ir[p:p + m + 1])
        suffix = tuple(ir[p + m + 1:p + m + 1 + ctx.n_cmp])
        out.append(Fingerprint(float(width), tuple(ir[:p]), suffix, cov, length))
    return out


# -- matching -------------------------------------------------------------------

@dataclass
class MatchSet:
    site_ref: str
    survivors: List[str]
    widths_distinct: int = 0
    inconsistent: bool = False
    projection: str = Projection.FULL.value
    scheme: str = ""
    guesses: int = 0
    notes: List[str] = field(default_factory=list)

    def __len__(self):
        return len(self.survivors)

    def __contains__(self, item):
        return item in self.survivors

    def collapsed(self, dictionary: Optional[Dictionary] = None) -> List[str]:
        """Survivors with title/initial variants folded onto their base name."""
        out, seen = [], set()
        for s in self.survivors:
            b = dictionary.base(s) if dictionary is not None else s
            if b not in seen:
                seen.add(b)
                out.append(b)
        return out

    def to_json(self) -> dict:
        return {"site": self.site_ref, "survivors": list(self.survivors),
                "widths_distinct": self.widths_distinct, "inconsistent": self.inconsistent,
                "projection": self.projection, "scheme": self.scheme, "guesses": self.guesses,
                "notes": list(self.notes)}


def _order(entries: Iterable[str], dictionary: Dictionary) -> List[str]:
    freq = dictionary.freq or {}
    return sorted(entries, key=lambda e: (-freq.get(e, 0.0), e))


def _widths_distinct(entries: Sequence[str], metrics: FontMetrics) -> int:
    if not entries:
        return 0
    return len(set(widths_of(list(entries), metrics).tolist()))


def match_context(ctx: SiteContext, dictionary: Dictionary, edits: int = 0, tolerance: float = 0.0,
                  projection: Projection = Projection.FULL, length: Optional[int] = None) -> MatchSet:
    """Survivors of ``dictionary`` at a prepared site."""
    projection = Projection(projection)
    scheme = ctx.effective_scheme
    fp = ctx.fingerprint
    entries = dictionary.entries
    notes = []
    n = len(entries)
    if projection == Projection.LENGTH:
        target = length if length is not None else fp.length
        if target is None:
            raise ValueError("length projection needs a glyph count for proportional fonts")
        survivors = [e for e in entries if len(e) == target]
    elif scheme == SchemeId.OCR:
        table = _plain_table(ctx.metrics)
        codes, offsets = dictionary.encoded(table)
        w = kernels.ocr_widths(codes, offsets, table.widths, ctx.tc)
        keep = np.abs(w - fp.redaction_width) <= tolerance + MATCH_EPS
        survivors = [entries[i] for i in np.flatnonzero(keep)]
    elif not scheme.is_word:
        tol = tolerance
        if ctx.scheme in (SchemeId.NEARWORD, SchemeId.UNRECOGNIZED):
            tol = max(tol, UNRECOGNIZED_SLACK)
            notes.append(f"scheme {ctx.scheme.value}: width-only match with +/-{tol:g} units")
        idx = dictionary.width_index(ctx.metrics)
        w = fp.redaction_width
        if tol > 0:
            survivors = idx.lookup(w, tol + MATCH_EPS)
        else:
            r = round(w)
            survivors = idx.lookup(r) if abs(w - r) <= MATCH_EPS else []
    elif ctx.gated:
        model = ctx.model or word_model(ctx.metrics.name, ctx.size, scheme.version)
        tol = tolerance + word_width_slack(model)
        notes.append("not first on line: width-only match within Word shift slack")
        survivors = dictionary.width_index(ctx.metrics).lookup(fp.redaction_width, tol)
    else:
        survivors = _word_match(ctx, dictionary, tolerance, projection)
        if edits > 0:
            extra = _edit_match(ctx, dictionary, survivors, edits, tolerance, projection)
            survivors = survivors + extra
    survivors = _order(survivors, dictionary)
    return MatchSet(site_ref=ctx.site.ref(), survivors=survivors,
                    widths_distinct=_widths_distinct(survivors, ctx.metrics),
                    inconsistent=not survivors, projection=projection.value,
                    scheme=ctx.scheme.value, guesses=n, notes=notes)


_PLAIN_TABLES: Dict[str, GlyphTable] = {}


def _plain_table(metrics: FontMetrics) -> GlyphTable:
    t = _PLAIN_TABLES.get(metrics.name)
    if t is None or t.index.keys() != metrics.widths.keys():
        glyphs = sorted(metrics.widths, key=ord)
        t = GlyphTable(index={g: i for i, g in enumerate(glyphs)},
                       widths=np.array([metrics.widths[g] for g in glyphs], dtype=np.int64),
                       internal=np.ones(len(glyphs), dtype=np.int32),
                       text_space=np.zeros(len(glyphs)), is_space=np.zeros(len(glyphs), dtype=np.uint8))
        _PLAIN_TABLES[metrics.name] = t
    return t


def word_batch_eval(ctx: SiteContext, codes: np.ndarray, offsets: np.ndarray):
    """Run the batch kernel for a prepared site; returns ``(width, tail)``."""
    model = ctx.model
    t = model.table
    pre = t.codes(ctx.prefix)
    suf = t.codes(ctx.suffix[:ctx.n_cmp + 1])
    return kernels.word_batch(pre, suf, codes, offsets, t.widths, t.internal, t.text_space,
                              t.is_space, model.size, model.version, model.internal.pixel_divisor,
                              model.internal.brkpoint, ctx.n_cmp, model.precise,
                              model.metrics.monospaced)


def word_width_slack(model: WordModel) -> float:
    """Width slack in text-space units for a Word model (one dot = divisor / 2 / size)."""
    dots = WORD_WIDTH_SLACK_DOTS.get(model.version, max(WORD_WIDTH_SLACK_DOTS.values()))
    return dots * model.internal.pixel_divisor / (2.0 * model.size)


def _word_match(ctx: SiteContext, dictionary: Dictionary, tolerance: float,
                projection: Projection) -> List[str]:
    model = ctx.model
    if model.il_fix:
        # the fix depends on neighbours across the whole line; go through the reference path
        keep = []
        for e in dictionary.entries:
            try:
                fps = simulate_guess(ctx, e)
            except (MissingGlyph, KeyError):
                continue
            if any(ctx.fingerprint.matches(f, projection, tolerance) for f in fps):
                keep.append(e)
        return keep
    codes, offsets = dictionary.encoded(model.table)
    width, tail = word_batch_eval(ctx, codes, offsets)
    ok = np.abs(width - ctx.fingerprint.redaction_width) <= tolerance + MATCH_EPS
    if projection == Projection.FULL and tail.shape[1]:
        obs = np.asarray(ctx.fingerprint.suffix_shifts[:tail.shape[1]], dtype=np.float64)
        ok &= np.all(np.abs(tail - obs) <= tolerance + MATCH_EPS, axis=1)
    return [dictionary.entries[i] for i in np.flatnonzero(ok)]


def _edit_match(ctx: SiteContext, dictionary: Dictionary, already: Sequence[str], edits: int,
                tolerance: float, projection: Projection) -> List[str]:
    have = set(already)
    cand = dictionary.width_index(ctx.metrics).lookup(ctx.fingerprint.redaction_width, EDIT_WINDOW)
    extra = []
    for e in cand:
        if e in have:
            continue
        fps = simulate_guess(ctx, e, edits=edits)
        if any(ctx.fingerprint.matches(f, projection, tolerance) for f in fps):
            extra.append(e)
    return extra


def match(doc: DocumentIR, site: RedactionSite, dictionary: Dictionary, scheme: SchemeId,
          edits: int = 0, tolerance: float = 0.0, projection: Projection = Projection.FULL,
          length: Optional[int] = None, precise: bool = False, il_fix: bool = False) -> MatchSet:
    """Entries of ``dictionary`` consistent with everything leaked at ``site``."""
    ctx = site_context(doc, site, scheme, precise, il_fix)
    return match_context(ctx, dictionary, edits, tolerance, projection, length)


def correlate(matchsets: Sequence[MatchSet], metrics: Optional[FontMetrics] = None) -> MatchSet:
    """Intersect match sets of sites believed to hide the same text."""
    if not matchsets:
        raise EmptyMatchSet("nothing to correlate")
    common = set(matchsets[0].survivors)
    for ms in matchsets[1:]:
        common &= set(ms.survivors)
    survivors = [s for s in matchsets[0].survivors if s in common]
    if metrics is not None:
        distinct = _widths_distinct(survivors, metrics)
    else:
        distinct = min([len(survivors)] + [ms.widths_distinct for ms in matchsets])
    return MatchSet(site_ref="+".join(ms.site_ref for ms in matchsets), survivors=survivors,
                    widths_distinct=distinct, inconsistent=not survivors,
                    projection=matchsets[0].projection, scheme=matchsets[0].scheme,
                    guesses=max(ms.guesses for ms in matchsets))


def filter_by_glyph_coverage(ms: MatchSet, observed: Iterable[str], visible: Iterable[str] = ()) -> MatchSet:
    """Drop survivors that need a glyph the document's font maps lack.

    ``observed`` is the set of characters the (subset) fonts map;
    ``visible`` adds characters seen in unredacted text.
    """
    allowed = set(observed) | set(visible) | {" "}
    survivors = [s for s in ms.survivors if set(s) <= allowed]
    return MatchSet(site_ref=ms.site_ref, survivors=survivors, widths_distinct=ms.widths_distinct,
                    inconsistent=not survivors, projection=ms.projection, scheme=ms.scheme,
                    guesses=ms.guesses, notes=ms.notes + ["glyph coverage filter"])


# -- ranking --------------------------------------------------------------------

def collision_probability(p_name: float, p_coll: float, n: int) -> float:
    """Chance that at least one of ``n`` other people's names also survives.

    Each other name is drawn from the population without the target name
    and collides with probability ``a = p_coll / (1 - p_name)``, so the
    binomial sum over k >= 1 collisions of C(n,k) a^k (1-a)^(n-k)
    collapses to ``1 - (1 - a)**n``.
    """
    if n <= 0 or p_coll <= 0 or p_name >= 1:
        return 0.0
    b = (1 - p_name - p_coll) / (1 - p_name)
    return min(1.0, max(0.0, 1.0 - max(b, 0.0) ** n))


@dataclass
class RankStats:
    rank_of: Dict[str, int]
    p_name: float
    p_coll: float
    z_score: float
    probabilities: Dict[str, float] = field(default_factory=dict)

    def collision_probability(self, n: int) -> float:
        return collision_probability(self.p_name, self.p_coll, n)

    def shortlist_n(self, alpha: float = 0.05, n_max: int = 1_000_000):
        """Smallest ``n`` whose collision probability exceeds ``alpha`` (``inf`` if none)."""
        if self.p_coll <= 0 or self.p_name >= 1:
            return math.inf
        b = (1 - self.p_name - self.p_coll) / (1 - self.p_name)
        # closed form of the sum: 1 - b**n
        if b <= 0:
            return 1 if alpha < 1 else math.inf
        if alpha >= 1:
            return math.inf
        n = max(1, math.ceil(math.log(1 - alpha) / math.log(b)) if b < 1 else n_max + 1)
        while n > 1 and 1 - b ** (n - 1) > alpha:
            n -= 1
        while n <= n_max and not (1 - b ** n > alpha):
            n += 1
        return n if n <= n_max else math.inf

    def to_json(self, alpha: float = 0.05) -> dict:
        s = self.shortlist_n(alpha)
        return {"p_name": self.p_name, "p_coll": self.p_coll, "z_score": self.z_score,
                "shortlist_n": None if s == math.inf else s,
                "ranks": dict(sorted(self.rank_of.items(), key=lambda kv: kv[1]))}


def normalized_freq(entries: Sequence[str], freq: Optional[Mapping[str, float]]) -> Dict[str, float]:
    """Probabilities over ``entries``; entries absent from ``freq`` get its floor."""
    if not entries:
        return {}
    if not freq:
        return {e: 1.0 / len(entries) for e in entries}
    present = [freq[e] for e in entries if e in freq and freq[e] > 0]
    floor = min(present) if present else min(v for v in freq.values() if v > 0)
    raw = {e: (freq[e] if freq.get(e, 0) > 0 else floor) for e in entries}
    total = sum(raw.values())
    return {e: v / total for e, v in raw.items()}


def rank(ms: MatchSet, freq: Optional[Mapping[str, float]] = None,
         population: Optional[Sequence[str]] = None) -> RankStats:
    """Order survivors by frequency and compute collision statistics.

    Probabilities are normalised over ``population`` (default: the
    survivors together with every entry of ``freq``).
    """
    if not ms.survivors:
        raise EmptyMatchSet(f"no survivors at {ms.site_ref}")
    if population is None:
        population = list(dict.fromkeys(list(ms.survivors) + list(freq or {})))
    probs = normalized_freq(population, freq)
    surv = sorted(ms.survivors, key=lambda e: (-probs.get(e, 0.0), e))
    rank_of = {e: i + 1 for i, e in enumerate(surv)}
    p = [probs.get(e, 0.0) for e in surv]
    p_name = p[0]
    p_coll = sum(p[1:])
    if len(p) > 1:
        mean = sum(p) / len(p)
        sd = math.sqrt(sum((x - mean) ** 2 for x in p) / len(p))
        z = (p_name - mean) / sd if sd > 0 else 0.0
    else:
        z = 0.0
    return RankStats(rank_of=rank_of, p_name=p_name, p_coll=p_coll, z_score=z,
                     probabilities={e: probs.get(e, 0.0) for e in surv})

"""How much a redaction leaks: entropy, mutual information and guess odds.

The channel maps a hidden dictionary entry X, placed into a context L (the
text around the redaction), to the fingerprint Y left in the document. Y is
a deterministic function of (X, L), so I(X; Y | L) = H(Y | L), which is what
:func:`mutual_information` estimates by averaging over sampled contexts.
"""

from __future__ import annotations

import logging
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Optional, Sequence

import numpy as np

from .dictionaries import load_corpus
from .errors import EmptyDict, InvalidDpi, MissingGlyph
from .matcher import (Dictionary, Fingerprint, Projection, SiteContext, _plain_table,
                      normalized_freq, simulate_guess, word_batch_eval)
from .metrics import DictWidthIndex, load_metrics
from .schemes.base import SchemeId, word_model

logger = logging.getLogger(__name__)

UNIFORM = "uniform-random"
MAX_FREQUENCY = "max-frequency"


def _counts_entropy(counts: Sequence[int]) -> float:
    """Entropy of a partition given exact integer class sizes."""
    n = sum(counts)
    if n == 0:
        return 0.0
    # log2 N - (1/N) sum c log2 c, summed from exact integers
    acc = math.fsum(c * math.log2(c) for c in counts if c > 1)
    return max(0.0, math.log2(n) - acc / n)


def _prob_entropy(probs: Sequence[float]) -> float:
    return max(0.0, -math.fsum(p * math.log2(p) for p in probs if p > 0))


def entropy_uniform(d) -> float:
    """log2 of the dictionary size."""
    n = len(d)
    if n == 0:
        raise EmptyDict("dictionary is empty")
    return math.log2(n)


def entropy_empirical(d, freq: Optional[Mapping[str, float]] = None) -> float:
    """Shannon entropy of ``d`` under ``freq`` (missing entries get the floor)."""
    entries = list(d.entries if isinstance(d, Dictionary) else d)
    if not entries:
        raise EmptyDict("dictionary is empty")
    if freq is None and isinstance(d, Dictionary):
        freq = d.freq
    return _prob_entropy(normalized_freq(entries, freq).values())


@dataclass(frozen=True)
class Context:
    """Text left and right of the redacted word, spaces included."""

    prefix: str
    suffix: str


def sample_contexts(n: int, seed: int = 0, sentences: Optional[Sequence[str]] = None) -> List[Context]:
    """Pick a word with visible words on both sides, ``n`` times."""
    sentences = [s for s in (sentences or load_corpus()) if len(s.split()) >= 3]
    if not sentences:
        raise ValueError("corpus has no sentence of three or more words")
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        words = rng.choice(sentences).split()
        k = rng.randrange(1, len(words) - 1)
        out.append(Context(" ".join(words[:k]) + " ", " " + " ".join(words[k + 1:])))
    return out


@dataclass
class RedactionChannel:
    dictionary: Dictionary
    scheme: SchemeId = SchemeId.UNADJUSTED
    font: str = "tnr"
    size: float = 12.0
    freq: Optional[Mapping[str, float]] = None  # None: X uniform over the dictionary
    projection: Projection = Projection.FULL
    tc: float = 0.0  # OCR character spacing in units

    def __post_init__(self):
        self.scheme = SchemeId(self.scheme)
        self.projection = Projection(self.projection)
        self.metrics = load_metrics(self.font)

    def probabilities(self) -> np.ndarray:
        entries = self.dictionary.entries
        if self.freq is None:
            return np.full(len(entries), 1.0 / len(entries))
        p = normalized_freq(entries, self.freq)
        return np.array([p[e] for e in entries])

    def site_context(self, ctx: Context) -> SiteContext:
        model = None
        if self.scheme.is_word:
            model = word_model(self.metrics.name, self.size, self.scheme.version)
        return SiteContext(site=None, scheme=self.scheme, metrics=self.metrics, size=self.size,
                           prefix=ctx.prefix, suffix=ctx.suffix, fingerprint=Fingerprint(0.0),
                           n_cmp=max(0, len(ctx.suffix) - 1), model=model, tc=self.tc)


@dataclass
class LeakReport:
    bits: float
    p_correct: float
    n_contexts: int
    per_context: List[float] = field(default_factory=list)
    entropy_x: float = 0.0
    strategy: str = MAX_FREQUENCY

    def to_json(self) -> dict:
        return {"bits": self.bits, "p_correct": self.p_correct, "n_contexts": self.n_contexts,
                "entropy_x": self.entropy_x, "strategy": self.strategy,
                "per_context": list(self.per_context)}


def _check_renderable(bad: np.ndarray, entries: Sequence[str], font: str):
    if bad.any():
        entry = entries[int(np.flatnonzero(bad)[0])]
        raise MissingGlyph(next((c for c in entry if c), "?"), f"{font} (entry {entry!r})")


def fingerprint_labels(channel: RedactionChannel, ctx: Context) -> np.ndarray:
    """Class label per dictionary entry: equal labels mean equal fingerprints.

    Grouping uses the exact (width, shift vector) values, never a digest.
    """
    d = channel.dictionary
    entries = d.entries
    proj = channel.projection
    if proj == Projection.LENGTH:
        keys = np.fromiter((len(e) for e in entries), dtype=np.int64, count=len(entries))[:, None]
    else:
        sc = channel.site_context(ctx)
        scheme = channel.scheme
        if scheme.is_word:
            codes, offsets = d.encoded(sc.model.table)
            width, tail = word_batch_eval(sc, codes, offsets)
            _check_renderable(np.isnan(width), entries, channel.metrics.name)
            keys = width[:, None] if proj == Projection.WIDTH else np.column_stack([width, tail])
        else:
            table = _plain_table(channel.metrics)
            codes, offsets = d.encoded(table)
            lengths = np.diff(offsets)
            gw = table.widths[np.clip(codes, 0, None)]
            bad_char = codes < 0
            adv = np.zeros(len(entries), dtype=np.int64)
            bad = np.zeros(len(entries), dtype=bool)
            nz = lengths > 0
            if codes.size:
                adv[nz] = np.add.reduceat(np.where(bad_char, 0, gw), offsets[:-1][nz])
                bad[nz] = np.add.reduceat(bad_char.astype(np.int64), offsets[:-1][nz]) > 0
            _check_renderable(bad, entries, channel.metrics.name)
            if scheme == SchemeId.OCR and channel.tc:
                keys = np.round(adv + lengths * channel.tc, 6)[:, None]
            else:
                keys = adv[:, None]
    _, labels = np.unique(keys, axis=0, return_inverse=True)
    return labels.reshape(-1)


def fingerprint_labels_reference(channel: RedactionChannel, ctx: Context) -> np.ndarray:
    """Per-entry labels through :func:`simulate_guess` (slow, for cross-checks)."""
    sc = channel.site_context(ctx)
    scheme = channel.scheme if channel.scheme != SchemeId.NEARWORD else SchemeId.UNADJUSTED
    seen: Dict[Hashable, int] = {}
    out = []
    for e in channel.dictionary.entries:
        fp = simulate_guess(sc, e, scheme)[0]
        if channel.projection == Projection.LENGTH:
            key = (fp.length,)
        elif channel.projection == Projection.WIDTH or not scheme.is_word:
            key = (fp.redaction_width,)
        else:
            key = (fp.redaction_width,) + tuple(fp.suffix_shifts)
        out.append(seen.setdefault(key, len(seen)))
    return np.asarray(out)


def context_entropy(channel: RedactionChannel, ctx: Context, labels: Optional[np.ndarray] = None) -> float:
    labels = fingerprint_labels(channel, ctx) if labels is None else labels
    if channel.freq is None:
        return _counts_entropy(np.bincount(labels).tolist())
    probs = channel.probabilities()
    mass = defaultdict(list)
    for lab, p in zip(labels.tolist(), probs.tolist()):
        mass[lab].append(p)
    return _prob_entropy([math.fsum(v) for v in mass.values()])


def _p_correct_exact(labels: np.ndarray, probs: np.ndarray, strategy: str) -> float:
    if strategy == UNIFORM:
        sizes = np.bincount(labels)
        return float(math.fsum((probs / sizes[labels]).tolist()))
    if strategy == MAX_FREQUENCY:
        best = defaultdict(float)
        for lab, p in zip(labels.tolist(), probs.tolist()):
            best[lab] = max(best[lab], p)
        return math.fsum(best.values())
    raise ValueError(f"unknown strategy {strategy!r}")


def _p_correct_mc(labels: np.ndarray, probs: np.ndarray, strategy: str, draws: int,
                  rng: np.random.Generator) -> float:
    """Play the guessing game ``draws`` times."""
    xs = rng.choice(len(labels), size=draws, p=probs / probs.sum())
    members = defaultdict(list)
    for i, lab in enumerate(labels.tolist()):
        members[lab].append(i)
    if strategy == MAX_FREQUENCY:
        pick = {lab: max(m, key=lambda i: (probs[i], -i)) for lab, m in members.items()}
        wins = sum(1 for x in xs.tolist() if pick[labels[x]] == x)
    else:
        wins = 0
        for x in xs.tolist():
            m = members[labels[x]]
            wins += m[int(rng.integers(len(m)))] == x
    return wins / draws


def p_correct(channel: RedactionChannel, contexts: Sequence[Context], strategy: str = MAX_FREQUENCY,
              method: str = "exact", draws: int = 100_000, seed: int = 0) -> float:
    """Chance that an adversary who sees Y names X, averaged over contexts.

    ``uniform-random`` picks any entry of the matching class; ``max-frequency``
    picks the most likely one. ``method="monte-carlo"`` simulates the game.
    """
    if not contexts:
        raise ValueError("no contexts")
    probs = channel.probabilities()
    rng = np.random.default_rng(seed)
    vals = []
    for ctx in contexts:
        labels = fingerprint_labels(channel, ctx)
        if method == "exact":
            vals.append(_p_correct_exact(labels, probs, strategy))
        else:
            vals.append(_p_correct_mc(labels, probs, strategy, draws, rng))
    return math.fsum(vals) / len(vals)


def mutual_information(channel: RedactionChannel, contexts: Sequence[Context],
                       strategy: str = MAX_FREQUENCY, exhaustive: bool = False) -> LeakReport:
    """Mean over ``contexts`` of H(Y | L = l).

    ``exhaustive`` re-typesets every entry through the reference path
    instead of the batch kernels; both must agree.
    """
    if not contexts:
        raise ValueError("no contexts")
    if not len(channel.dictionary):
        raise EmptyDict(channel.dictionary.name)
    probs = channel.probabilities()
    per, pc = [], []
    for ctx in contexts:
        labels = (fingerprint_labels_reference if exhaustive else fingerprint_labels)(channel, ctx)
        per.append(context_entropy(channel, ctx, labels))
        pc.append(_p_correct_exact(labels, probs, strategy))
    hx = _prob_entropy(probs.tolist()) if channel.freq is not None else entropy_uniform(channel.dictionary)
    return LeakReport(bits=math.fsum(per) / len(per), p_correct=math.fsum(pc) / len(pc),
                      n_contexts=len(contexts), per_context=per, entropy_x=hx, strategy=strategy)


def length_entropy(entries: Sequence[str], freq: Optional[Mapping[str, float]] = None) -> float:
    """Entropy of the word-length distribution (what a monospace font leaks)."""
    if freq is None:
        return _counts_entropy(list(Counter(len(e) for e in entries).values()))
    p = normalized_freq(list(entries), freq)
    mass = defaultdict(float)
    for e, v in p.items():
        mass[len(e)] += v
    return _prob_entropy(list(mass.values()))


@dataclass
class RasterQuantization:
    dpi: float
    size: float
    step: float  # units per device pixel
    classes: int
    unquantized_classes: int
    bits: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def raster_quantization(index: DictWidthIndex, dpi: float, size: float) -> RasterQuantization:
    """Width classes that survive when widths are only known to a device pixel.

    A pixel spans ``72000 / (dpi * size)`` units; widths falling in the same
    pixel bucket merge. ``bits`` is the entropy of the merged partition for
    a uniformly chosen entry.
    """
    if dpi <= 0:
        raise InvalidDpi(f"dpi must be positive, got {dpi}")
    if size <= 0:
        raise ValueError(f"size must be positive, got {size}")
    q = 72000.0 / (dpi * size)
    buckets: Counter = Counter()
    for w, members in index.buckets.items():
        buckets[math.floor(w / q + 1e-9)] += len(members)
    return RasterQuantization(dpi=dpi, size=size, step=q, classes=len(buckets),
                              unquantized_classes=len(index.buckets),
                              bits=_counts_entropy(list(buckets.values())))

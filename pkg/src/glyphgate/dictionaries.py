"""Dictionary construction: packaged names, title/initial expansion and
rule-based generators.
"""

from __future__ import annotations

import itertools
import logging
import math
import re
import string
from typing import Dict, Iterable, Iterator, List, Optional, Sequence

from ._data import find_data
from .errors import EmptyDict
from .matcher import Dictionary

logger = logging.getLogger(__name__)

TITLES = ("Mr.", "Mrs.", "Ms.", "Dr.")
FILN_SIZE = 1_600_000


def _read_names() -> Dict[str, Dict[str, float]]:
    out: Dict[str, Dict[str, float]] = {"first": {}, "last": {}}
    with open(find_data("names.tsv"), encoding="utf-8") as f:
        for line in f:
            if line.startswith("#") or not line.strip():
                continue
            name, kind, weight = line.rstrip("\n").split("\t")
            out[kind][name] = out[kind].get(name, 0.0) + float(weight)
    return out


def name_dictionary(kind: str = "last") -> Dictionary:
    """Packaged names with frequencies; ``kind`` is first, last or all."""
    tables = _read_names()
    if kind in tables:
        freq = tables[kind]
    elif kind == "all":
        freq = {}
        for t in tables.values():
            total = sum(t.values())
            for k, v in t.items():
                freq[k] = freq.get(k, 0.0) + v / total / len(tables)
    else:
        raise ValueError(f"unknown name kind {kind!r}")
    entries = sorted(freq, key=lambda e: (-freq[e], e))
    return Dictionary(entries, dict(freq), name=f"names-{kind}")


def expand_titles(d: Dictionary, titles: Sequence[str] = TITLES, keep_base: bool = True) -> Dictionary:
    """Add ``title + name`` variants mapped back to their base name."""
    entries, base_of, freq = [], {}, {}
    for e in d.entries:
        if keep_base:
            entries.append(e)
        for t in titles:
            v = f"{t} {e}"
            entries.append(v)
            base_of[v] = d.base(e)
    if d.freq:
        share = len(titles) + (1 if keep_base else 0)
        for v in entries:
            freq[v] = d.freq.get(base_of.get(v, v), 0.0) / share
    return Dictionary(entries, freq or None, name=f"{d.name}+titles", base_of={**d.base_of, **base_of})


def expand_initials(surnames: Dictionary, first: Optional[Dictionary] = None,
                    keep_base: bool = False) -> Dictionary:
    """``I. Surname`` variants; initial weights follow ``first`` when given."""
    init_w = {c: 1.0 / 26 for c in string.ascii_uppercase}
    if first is not None and first.freq:
        acc: Dict[str, float] = {}
        for name, p in first.freq.items():
            if name[:1] in init_w:
                acc[name[0]] = acc.get(name[0], 0.0) + p
        total = sum(acc.values())
        init_w = {c: acc.get(c, 0.0) / total for c in init_w}
    entries, base_of, freq = [], {}, {}
    for s in surnames.entries:
        if keep_base:
            entries.append(s)
        for c in string.ascii_uppercase:
            v = f"{c}. {s}"
            entries.append(v)
            base_of[v] = s
            if surnames.freq:
                freq[v] = surnames.freq.get(s, 0.0) * init_w[c]
    return Dictionary(entries, freq or None, name=f"{surnames.name}+initials", base_of=base_of)


_ONSETS = ["B", "Br", "C", "Ch", "D", "F", "G", "H", "J", "K", "L", "M", "N", "P", "R", "S",
           "Sh", "St", "T", "V", "W"]
_NUCLEI = ["a", "e", "i", "o", "u", "ai", "ea", "ee", "oo", "ou"]
_CODAS = ["", "b", "ck", "d", "ff", "g", "k", "l", "ll", "m", "n", "nd", "ng", "r", "rt", "s",
          "t", "tt", "x"]
_TAILS = ["", "son", "ton", "man", "ley", "er", "ford", "wood", "field", "berg", "ski", "ez",
          "in", "well", "by", "ham", "land", "more", "ridge", "stein"]


def synthetic_surnames(n: int, exclude: Iterable[str] = ()) -> List[str]:
    """Deterministic pronounceable surnames (onset + vowel + coda + tail)."""
    seen = set(exclude)
    out = []
    for parts in itertools.product(_TAILS, _ONSETS, _NUCLEI, _CODAS, _NUCLEI[:5], _CODAS):
        tail, o, v, c, v2, c2 = parts
        name = o + v + c + (v2 + c2 if tail == "" else "") + tail
        if name in seen or len(name) > 14:
            continue
        seen.add(name)
        out.append(name)
        if len(out) == n:
            return out
    raise ValueError(f"cannot synthesise {n} surnames")


def filn_dictionary(size: int = FILN_SIZE) -> Dictionary:
    """First-initial + last-name style dictionary of (at least) ``size`` entries.

    Packaged surnames are padded with :func:`synthetic_surnames` until
    26 initials x surnames reaches ``size``.
    """
    real = _read_names()["last"]
    n_surnames = math.ceil(size / 26)
    surnames = sorted(real, key=lambda e: (-real[e], e))[:n_surnames]
    if len(surnames) < n_surnames:
        surnames += synthetic_surnames(n_surnames - len(surnames), exclude=surnames)
    entries = [f"{c}. {s}" for s in surnames for c in string.ascii_uppercase]
    return Dictionary(entries, None, name=f"filn-{len(entries)}")


def generate_strings(alphabet: str = string.ascii_lowercase, min_len: int = 3, max_len: int = 16,
                     limit: Optional[int] = None) -> Iterator[str]:
    """All strings over ``alphabet`` with length in ``[min_len, max_len]`` (shortest first)."""
    count = 0
    for n in range(min_len, max_len + 1):
        for t in itertools.product(alphabet, repeat=n):
            yield "".join(t)
            count += 1
            if limit is not None and count >= limit:
                return


def generate_acronyms(min_len: int = 2, max_len: int = 5, limit: Optional[int] = None) -> Iterator[str]:
    """Uppercase acronyms of 2 to 5 letters."""
    return generate_strings(string.ascii_uppercase, min_len, max_len, limit)


def dictionary_from(entries: Iterable[str], name: str) -> Dictionary:
    entries = list(entries)
    if not entries:
        raise EmptyDict(name)
    return Dictionary(entries, None, name=name)


# -- corpus text --------------------------------------------------------------

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:['’][A-Za-z]+)*|[^\sA-Za-z0-9]+")


def tokenize(text: str) -> List[str]:
    """Words (contractions kept whole) and runs of punctuation as tokens."""
    return _TOKEN_RE.findall(text)


def load_corpus(path=None) -> List[str]:
    """Non-empty lines of a UTF-8 text corpus (default: packaged sample)."""
    path = path or find_data("corpus.txt")
    with open(path, encoding="utf-8") as f:
        return [l.strip() for l in f if l.strip() and not l.startswith("#")]

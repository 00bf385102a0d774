"""Command line interface: scan, attack, measure, repair, gen-corpus."""

from __future__ import annotations

import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import click

from . import kernels
from .corpus import GENERATED_SCHEMES, gen_corpus
from .dictionaries import filn_dictionary, load_corpus, name_dictionary
from .errors import GlyphGateError
from .guard import MODES, repair as run_repair, verify_protection
from .leakmeter import MAX_FREQUENCY, UNIFORM, RedactionChannel, mutual_information, sample_contexts
from .locator import locate_excising, locate_nonexcising
from .matcher import Dictionary, Projection, load_dictionary, match_context, rank, site_context
from .pdf.parse import parse_document
from .pdf.write import write_repair
from .schemes.base import SchemeId
from .schemes.identify import identify_document

logger = logging.getLogger("glyphgate")

REPORT_VERSION = 1
EXIT_CLEAN, EXIT_ERROR, EXIT_VULNERABLE, EXIT_REFUSED = 0, 1, 2, 3
SCHEME_CHOICES = ["auto", "unadjusted", "word2007", "word2019", "ocr"]


# -- helpers --------------------------------------------------------------------

def resolve_dictionary(spec: Optional[str], freq_path: Optional[str] = None) -> Dictionary:
    """A dictionary file, or a packaged one: ``names:first|last|all`` or ``filn[:N]``."""
    spec = spec or "names:last"
    if spec.startswith("names:"):
        d = name_dictionary(spec.split(":", 1)[1])
    elif spec == "filn" or spec.startswith("filn:"):
        _, _, n = spec.partition(":")
        d = filn_dictionary(int(n)) if n else filn_dictionary()
    else:
        return load_dictionary(spec, freq_path=freq_path)
    if freq_path is not None:
        counts = load_dictionary(freq_path).freq or {}
        d = Dictionary(d.entries, counts or None, name=d.name, base_of=d.base_of)
    return d


def _schemes_for(doc, forced: str):
    idents = identify_document(doc)
    if forced != "auto":
        return idents, [SchemeId(forced)] * len(doc.pages)
    return idents, [i.scheme for i in idents]


def _doc_scheme(idents) -> dict:
    if not idents:
        return {"id": SchemeId.UNRECOGNIZED.value, "matched_glyphs": 0}
    # the scheme of the page with the most matching glyphs speaks for the document
    best = max(idents, key=lambda i: i.counts.get(i.scheme, 0))
    return {"id": best.scheme.value, "matched_glyphs": best.counts.get(best.scheme, 0)}


def _emit(data: dict, report: Optional[str], as_json: bool):
    text = json.dumps(data, indent=2, sort_keys=True)
    if report:
        Path(report).write_text(text + "\n", encoding="utf-8")
        logger.info("report written to %s", report)
    if as_json:
        click.echo(text)


def _pool_map(fn, items: Sequence, jobs: int) -> Iterable:
    """Ordered map over a process pool (in-process for one job)."""
    jobs = max(1, jobs or os.cpu_count() or 1)
    if jobs == 1 or len(items) <= 1:
        for i, it in enumerate(items, 1):
            logger.debug("%d/%d %s", i, len(items), it[0] if isinstance(it, tuple) else it)
            yield fn(it)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for i, res in enumerate(pool.map(fn, items), 1):
            logger.debug("%d/%d done", i, len(items))
            yield res


# -- scan -------------------------------------------------------------------------

def scan_document(path: str, scheme: str = "auto", tolerance: float = 0.0,
                  max_width_cm: Optional[float] = 2.1) -> dict:
    """Findings for one PDF in the report schema."""
    out = {"doc": str(path), "version": REPORT_VERSION}
    try:
        doc = parse_document(Path(path).read_bytes())
    except (GlyphGateError, OSError) as exc:
        out.update(pages=0, scheme=None, sites=[], error=f"{type(exc).__name__}: {exc}")
        return out
    idents, schemes = _schemes_for(doc, scheme)
    max_pt = None if max_width_cm is None else max_width_cm * 72 / 2.54
    sites = locate_nonexcising(doc) + locate_excising(doc, slack=tolerance, max_width_pt=max_pt,
                                                      schemes=schemes)
    sites.sort(key=lambda s: (s.page, s.line, s.span[0], s.kind))
    out.update(
        pages=len(doc.pages),
        scheme=_doc_scheme(idents) if scheme == "auto" else {"id": scheme, "matched_glyphs": None},
        page_schemes=[i.to_json() for i in idents],
        sites=[{**s.to_json(), "covered_text": s.covered_text or None} for s in sites],
        warnings=list(doc.warnings) if getattr(doc, "warnings", None) else [],
    )
    return out


def _scan_job(args):
    return scan_document(*args)


# -- repair -----------------------------------------------------------------------

def repair_document(path: str, mode: str, out_dir: Optional[str], dict_spec: Optional[str],
                    freq_path: Optional[str], verify: bool = True) -> dict:
    src = Path(path)
    res = {"doc": str(src), "mode": mode, "version": REPORT_VERSION}
    try:
        data = src.read_bytes()
        doc = parse_document(data)
        _, schemes = _schemes_for(doc, "auto")
        after, plan = run_repair(doc, mode, schemes=schemes)
        dest = Path(out_dir) / src.name if out_dir else src.with_name(src.stem + ".repaired.pdf")
        if dest.resolve() == src.resolve():
            raise click.UsageError(f"refusing to overwrite the input {src}")
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_bytes(write_repair(data, after, plan))
        res.update(output=str(dest), plan=plan.to_json())
        if verify:
            d = resolve_dictionary(dict_spec, freq_path)
            rep = verify_protection(doc, after, d, plan.mode, schemes=schemes, freq=d.freq,
                                    raise_on_regression=False)
            res["protection"] = rep.to_json()
            res["ok"] = rep.ok
        else:
            res["ok"] = True
    except (GlyphGateError, OSError, ValueError) as exc:
        res.update(ok=False, error=f"{type(exc).__name__}: {exc}")
    return res


def _repair_job(args):
    return repair_document(*args)


# -- commands -------------------------------------------------------------------

@click.group()
@click.option("-v", "--verbose", count=True, help="More logging (repeatable).")
@click.version_option(package_name="artifact")
def main(verbose: int):
    """Find, attack, measure and repair glyph-positioning leaks in redacted PDFs."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scheme", type=click.Choice(SCHEME_CHOICES), default="auto", show_default=True)
@click.option("--tolerance", type=float, default=0.0, show_default=True,
              help="Gap slack in text space units.")
@click.option("--max-width-cm", type=float, default=2.1, show_default=True,
              help="Sites wider than this are tagged too-long.")
@click.option("--report", type=click.Path(dir_okay=False), help="Write the findings JSON here.")
@click.option("--json", "as_json", is_flag=True, help="Print the findings JSON to stdout.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes (0 = all cores).")
def scan(paths, scheme, tolerance, max_width_cm, report, as_json, jobs):
    """Identify schemes and locate redactions in PATHS.

    Exits 0 when nothing leaks, 2 when any redaction site is found.
    """
    items = [(p, scheme, tolerance, max_width_cm) for p in paths]
    docs = list(_pool_map(_scan_job, items, jobs))
    _emit({"version": REPORT_VERSION, "documents": docs}, report, as_json)
    vulnerable = errors = 0
    for d in docs:
        if "error" in d:
            errors += 1
            click.echo(f"{d['doc']}: error: {d['error']}", err=True)
            continue
        sites = d["sites"]
        kinds = {k: sum(s["kind"] == k for s in sites) for k in ("nonexcising", "excising")}
        vulnerable += bool(sites)
        if not as_json:
            click.echo(f"{d['doc']}: scheme={d['scheme']['id']} pages={d['pages']} "
                       f"nonexcising={kinds['nonexcising']} excising={kinds['excising']}")
            for s in sites:
                w = "" if s["width_units"] is None else f" width={s['width_units']:g}"
                extra = " too-long" if s["too_long"] else ""
                text = f" text={s['covered_text']!r}" if s.get("covered_text") else ""
                click.echo(f"  {s['ref']} {s['kind']}{w}{extra}{text}")
    click.echo(f"{len(docs)} document(s), {vulnerable} with leaking redactions, {errors} error(s)", err=True)
    if vulnerable:
        sys.exit(EXIT_VULNERABLE)
    sys.exit(EXIT_ERROR if errors else EXIT_CLEAN)


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.argument("site_refs", nargs=-1)
@click.option("--dict", "dict_spec", default="names:last", show_default=True,
              help="Dictionary FILE, or names:first|last|all, or filn[:N].")
@click.option("--freq", "freq_path", type=click.Path(exists=True, dir_okay=False),
              help="entry<TAB>count frequency FILE.")
@click.option("--scheme", type=click.Choice(SCHEME_CHOICES), default="auto", show_default=True)
@click.option("--edits", type=int, default=0, show_default=True, help="Word edit-history depth.")
@click.option("--tolerance", type=float, default=0.0, show_default=True, help="Width tolerance in units.")
@click.option("--projection", type=click.Choice([p.value for p in Projection]), default="full",
              show_default=True)
@click.option("--no-gating", is_flag=True, help="Attack later sites on a Word line with full shifts too.")
@click.option("--include-too-long", is_flag=True, help="Also attack sites tagged too-long.")
@click.option("--top", type=int, default=20, show_default=True, help="Survivors to print per site.")
@click.option("--report", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@click.option("--authorized", is_flag=True,
              help="Confirm you are authorised to analyse this document.")
def attack(path, site_refs, dict_spec, freq_path, scheme, edits, tolerance, projection, no_gating,
           include_too_long, top, report, as_json, authorized):
    """Rule out dictionary entries at excising sites of PATH.

    SITE_REFS look like p0l3g12 (as printed by scan); default is every
    excising site.
    """
    if not authorized:
        click.echo("attack recovers redacted text; rerun with --authorized if you are "
                   "entitled to analyse this document", err=True)
        sys.exit(EXIT_REFUSED)
    d = resolve_dictionary(dict_spec, freq_path)
    doc = parse_document(Path(path).read_bytes())
    _, schemes = _schemes_for(doc, scheme)
    located = locate_excising(doc, schemes=schemes)
    sites = [s for s in located if include_too_long or site_refs or not s.too_long]
    if len(sites) < len(located):
        click.echo(f"skipping {len(located) - len(sites)} too-long site(s); see --include-too-long", err=True)
    if site_refs:
        wanted = set(site_refs)
        sites = [s for s in sites if s.ref() in wanted]
        missing = wanted - {s.ref() for s in sites}
        if missing:
            raise click.BadParameter(f"no excising site {', '.join(sorted(missing))}", param_hint="SITE_REFS")
    results = []
    t0 = time.perf_counter()
    guesses = 0
    for s in sites:
        ctx = site_context(doc, s, schemes[s.page])
        if no_gating:
            ctx.gated = False
        ms = match_context(ctx, d, edits=edits, tolerance=tolerance, projection=projection)
        guesses += len(d)
        entry = {"site": s.ref(), "scheme": ctx.scheme.value, "width_units": s.width,
                 "match": ms.to_json()}
        if ms.survivors:
            stats = rank(ms, d.freq, population=d.entries)
            entry["rank"] = stats.to_json(0.05)
            entry["collapsed"] = ms.collapsed(d)
        results.append(entry)
    elapsed = time.perf_counter() - t0
    data = {"version": REPORT_VERSION, "doc": str(path), "dictionary": d.name, "entries": len(d),
            "implementation": kernels.IMPLEMENTATION, "seconds": elapsed,
            "guesses_per_second": guesses / elapsed if elapsed > 0 else None, "sites": results}
    _emit(data, report, as_json)
    if not as_json:
        for r in results:
            m = r["match"]
            head = f"{r['site']} [{r['scheme']}] width={r['width_units']:g}: {len(m['survivors'])} survivor(s)"
            if "rank" in r:
                n = r["rank"]["shortlist_n"]
                head += f", p_coll={r['rank']['p_coll']:.4g}, shortlist_n(0.05)={'inf' if n is None else n}"
            click.echo(head)
            for e in m["survivors"][:top]:
                click.echo(f"  {r['rank']['ranks'][e]:>4}  {e}")
            for note in m["notes"]:
                click.echo(f"  note: {note}")
    if not results:
        click.echo("no excising sites to attack", err=True)


@main.command()
@click.option("--dict", "dict_spec", default="names:last", show_default=True)
@click.option("--freq", "freq_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--scheme", "schemes", multiple=True,
              type=click.Choice([s.value for s in GENERATED_SCHEMES]),
              help="Repeatable; default is every scheme.")
@click.option("--font", default="tnr", show_default=True)
@click.option("--size", type=float, default=12.0, show_default=True)
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False),
              help="Sentences to draw contexts from (default: packaged sample).")
@click.option("--contexts", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--strategy", type=click.Choice([MAX_FREQUENCY, UNIFORM]), default=MAX_FREQUENCY,
              show_default=True)
@click.option("--uniform", is_flag=True, help="Ignore frequencies: names drawn uniformly.")
@click.option("--report", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def measure(dict_spec, freq_path, schemes, font, size, corpus_path, contexts, seed, strategy, uniform,
            report, as_json):
    """Bits leaked and adversary success rate per scheme."""
    d = resolve_dictionary(dict_spec, freq_path)
    ctxs = sample_contexts(contexts, seed, load_corpus(corpus_path) if corpus_path else None)
    freq = None if uniform else d.freq
    rows = []
    for sc in schemes or [s.value for s in GENERATED_SCHEMES]:
        projections = [Projection.FULL, Projection.LENGTH]
        if SchemeId(sc).is_word:
            projections.insert(1, Projection.WIDTH)  # width-only equals full elsewhere
        for proj in projections:
            ch = RedactionChannel(d, SchemeId(sc), font, size, freq=freq, projection=proj)
            rep = mutual_information(ch, ctxs, strategy)
            rows.append({"scheme": sc, "projection": proj.value, **rep.to_json()})
    data = {"version": REPORT_VERSION, "dictionary": d.name, "entries": len(d), "font": font,
            "size": size, "seed": seed, "rows": rows}
    for r in data["rows"]:
        r.pop("per_context", None)
    _emit(data, report, as_json)
    if not as_json:
        click.echo(f"{d.name}: {len(d)} entries, {font} {size:g} pt, {contexts} contexts")
        click.echo(f"{'scheme':<11} {'leaks':<7} {'H(X)':>8} {'bits':>8} {'P(correct)':>11}")
        for r in rows:
            click.echo(f"{r['scheme']:<11} {r['projection']:<7} {r['entropy_x']:>8.3f} "
                       f"{r['bits']:>8.3f} {r['p_correct']:>11.4f}")


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", required=True,
              help=f"One of: {', '.join(MODES)} (N in units, or e.g. 0.1mm for quantize).")
@click.option("--out-dir", type=click.Path(file_okay=False), help="Default: <name>.repaired.pdf beside the input.")
@click.option("--dict", "dict_spec", default="names:last", show_default=True,
              help="Dictionary used to verify the repair.")
@click.option("--freq", "freq_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--no-verify", is_flag=True, help="Skip the before/after leak comparison.")
@click.option("--report", type=click.Path(dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
@click.option("--jobs", type=int, default=1, show_default=True)
def repair(paths, mode, out_dir, dict_spec, freq_path, no_verify, report, as_json, jobs):
    """Patch PATHS with an incremental update and check nothing leaks more."""
    name = mode.split(":", 1)[0]
    if name not in {m.split(":")[0] for m in MODES}:
        raise click.BadParameter(f"expected one of {', '.join(MODES)}", param_hint="--mode")
    items = [(p, mode, out_dir, dict_spec, freq_path, not no_verify) for p in paths]
    docs = list(_pool_map(_repair_job, items, jobs))
    _emit({"version": REPORT_VERSION, "documents": docs}, report, as_json)
    bad = 0
    for d in docs:
        if not d["ok"]:
            bad += 1
        if as_json:
            continue
        if "error" in d:
            click.echo(f"{d['doc']}: error: {d['error']}", err=True)
        elif "protection" in d:
            p = d["protection"]
            click.echo(f"{d['doc']} -> {d['output']}: bits {p['bits_before']:.3f} -> {p['bits_after']:.3f}, "
                       f"nonexcising {p['nonexcising_before']} -> {p['nonexcising_after']}"
                       f"{'' if d['ok'] else '  REGRESSION'}")
        else:
            click.echo(f"{d['doc']} -> {d['output']}")
    if bad:
        sys.exit(EXIT_ERROR)


@main.command("gen-corpus")
@click.option("--scheme", type=click.Choice([s.value for s in GENERATED_SCHEMES]), required=True)
@click.option("--font", default="tnr", show_default=True)
@click.option("--size", type=float, default=12.0, show_default=True)
@click.option("--redact-rate", type=click.FloatRange(0, 1), default=0.5, show_default=True)
@click.option("--nonexcising-rate", type=click.FloatRange(0, 1), default=0.2, show_default=True)
@click.option("-n", "--count", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--dict", "dict_spec", default="names:last", show_default=True,
              help="Names to redact.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def gen_corpus_cmd(scheme, font, size, redact_rate, nonexcising_rate, count, seed, dict_spec, out_dir):
    """Write a synthetic redacted corpus with .truth.json sidecars."""
    d = resolve_dictionary(dict_spec)
    docs = gen_corpus(count, scheme, font, size, redact_rate=redact_rate, seed=seed, out_dir=out_dir,
                      dictionary=d, nonexcising_rate=nonexcising_rate)
    n_red = sum(len(t.redactions) for _, t in docs)
    click.echo(f"{len(docs)} document(s), {n_red} redaction(s) in {out_dir}")


if __name__ == "__main__":  # pragma: no cover
    main()

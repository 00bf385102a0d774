"""Guesses per second of the compiled and pure-Python kernels.

Times the Word batch kernel (dependent scheme, the expensive case) and the
OCR width kernel on random 7-character entries, then a full attack through
``match_context`` with each implementation swapped in.

    python3 benchmarks/bench_kernels.py --entries 20000 --repeat 3
"""

import argparse
import json
import random
import string
import time
from contextlib import contextmanager

from glyphgate import kernels
from glyphgate.leakmeter import Context, RedactionChannel
from glyphgate.matcher import Dictionary, Fingerprint, _plain_table, match_context, word_batch_eval
from glyphgate.schemes.base import SchemeId


def random_entries(n, length=7, seed=0):
    rng = random.Random(seed)
    out = set()
    while len(out) < n:
        out.add(rng.choice(string.ascii_uppercase) + "".join(rng.choices(string.ascii_lowercase, k=length - 1)))
    return sorted(out)


@contextmanager
def using(mod):
    saved = kernels.word_batch, kernels.ocr_widths
    kernels.word_batch, kernels.ocr_widths = mod.word_batch, mod.ocr_widths
    try:
        yield
    finally:
        kernels.word_batch, kernels.ocr_widths = saved


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(n_entries=20000, repeat=3, font="tnr", size=12.0, seed=0):
    entries = random_entries(n_entries, seed=seed)
    d = Dictionary(entries, None, name=f"random7-{n_entries}")
    ctx_text = Context("The form was signed by ", " on Monday after lunch.")
    ch = RedactionChannel(d, SchemeId.WORD2019, font, size)
    ctx = ch.site_context(ctx_text)
    codes, offsets = d.encoded(ctx.model.table)
    width, tail = word_batch_eval(ctx, codes, offsets)
    # the fingerprint of the first entry, so the attack has one true survivor
    ctx.fingerprint = Fingerprint(float(width[0]), (), tuple(float(v) for v in tail[0]))
    ctx.site = type("S", (), {"ref": staticmethod(lambda: "bench")})()
    plain = _plain_table(ch.metrics)
    pcodes, poffsets = d.encoded(plain)

    rows = []
    mods = [("cython", kernels.implementation(False)), ("python", kernels.implementation(True))]
    for label, mod in mods:
        if mod.IMPLEMENTATION != label:
            rows.append({"implementation": label, "available": False})
            continue
        with using(mod):
            t_word = best_of(lambda: word_batch_eval(ctx, codes, offsets), repeat)
            t_ocr = best_of(lambda: mod.ocr_widths(pcodes, poffsets, plain.widths, -1.5), repeat)
            t_attack = best_of(lambda: match_context(ctx, d), repeat)
        rows.append({"implementation": label, "available": True, "entries": n_entries,
                     "word_batch_per_s": n_entries / t_word, "ocr_widths_per_s": n_entries / t_ocr,
                     "attack_per_s": n_entries / t_attack})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entries", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--font", default="tnr")
    ap.add_argument("--json", metavar="FILE")
    args = ap.parse_args(argv)
    rows = run(args.entries, args.repeat, args.font)
    print(f"{'kernel':<8} {'word batch/s':>14} {'ocr widths/s':>14} {'attack/s':>12}")
    for r in rows:
        if not r["available"]:
            print(f"{r['implementation']:<8} (not built)")
            continue
        print(f"{r['implementation']:<8} {r['word_batch_per_s']:>14,.0f} {r['ocr_widths_per_s']:>14,.0f} "
              f"{r['attack_per_s']:>12,.0f}")
    done = [r for r in rows if r["available"]]
    if len(done) == 2:
        print(f"speedup (attack): {done[0]['attack_per_s'] / done[1]['attack_per_s']:.1f}x")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(rows, f, indent=2)


if __name__ == "__main__":
    main()

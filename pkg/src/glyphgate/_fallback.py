"""Pure-Python implementations of the kernels in ``_ckernels.pyx``."""

import math

import numpy as np

from .schemes.word import f32

IMPLEMENTATION = "python"

_THRESHOLD = 0.003


def _pixel_w(total, divisor):
    return math.floor(total / divisor + 0.5)


def _wysiwyg(fsw, pw, n, divisor, brk):
    i = 0
    while n:
        total = fsw[i]
        new_adjustment = _pixel_w(total, divisor)
        accumulated = pw[i] - new_adjustment
        pw[i] = so_far = last_new = new_adjustment
        i += 1
        if i == n:
            break
        while True:
            total += fsw[i]
            if total > brk:
                break
            orig = pw[i]
            new_adj = _pixel_w(total, divisor) - so_far
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
            last_new = new_adj
            i += 1
            if i >= n:
                break
        if i >= n:
            break


def _adjust(ts, pw, is_space, n, size, dot_pt, v2007, precise, after):
    leading = True
    ttf = dev = 0.0
    last = n - 1
    for j in range(n):
        if leading and is_space[j]:
            continue
        leading = False
        dw = pw[j] * dot_pt
        if precise:
            ttf += ts[j] / 1000.0
            dev += dw / size
            disp = ttf - dev
        elif v2007:
            ttf = f32(ttf + f32(f32(ts[j]) / 1000.0))
            dev = f32(dev + dw / size)
            disp = f32(ttf - dev)
        else:
            ttf = f32(ttf + f32(ts[j] / 1000.0))
            dev = f32(dev + f32(dw / size))
            disp = f32(ttf - dev)
        if (disp > _THRESHOLD or disp < -_THRESHOLD) and j != last:
            after[j] = int(disp * 1000 + 0.5)
            ttf = dev = 0.0
        else:
            after[j] = 0


def _line_after(fsw, internal, ts, is_space, size, divisor, brk, v2007, precise, mono):
    n = len(fsw)
    after = [0] * n
    pw = list(internal)
    if n == 0 or mono:
        return after, pw
    _wysiwyg(fsw, pw, n, divisor, brk)
    _adjust(ts, pw, is_space, n, size, divisor / 2000.0, v2007, precise, after)
    return after, pw


def word_after(widths, internal, text_space, is_space, size, version, divisor, brk,
               precise=False, monospaced=False):
    fsw = [int(w * size * 2) for w in np.asarray(widths).tolist()]
    after, pw = _line_after(fsw, [int(x) for x in np.asarray(internal).tolist()],
                            [float(x) for x in np.asarray(text_space).tolist()],
                            [bool(x) for x in np.asarray(is_space).tolist()],
                            float(size), float(divisor), int(brk), version <= 2016,
                            bool(precise), bool(monospaced))
    return np.asarray(after, dtype=np.float64), np.asarray(pw, dtype=np.int32)


def word_batch(prefix, suffix, codes, offsets, glyph_w, glyph_int, glyph_ts, glyph_sp,
               size, version, divisor, brk, n_cmp, precise=False, monospaced=False):
    gw = np.asarray(glyph_w).tolist()
    gi = np.asarray(glyph_int).tolist()
    gt = np.asarray(glyph_ts, dtype=np.float64).tolist()
    gs = np.asarray(glyph_sp).tolist()
    size = float(size)
    fs_of = [int(w * size * 2) for w in gw]
    pre = np.asarray(prefix).tolist()
    suf = np.asarray(suffix).tolist()
    codes = np.asarray(codes).tolist()
    offsets = np.asarray(offsets).tolist()
    n_entries = len(offsets) - 1
    n_pre, n_suf = len(pre), len(suf)
    n_tail = max(0, min(n_cmp, n_suf - 1))
    width = np.empty(n_entries, dtype=np.float64)
    tail = np.zeros((n_entries, n_tail), dtype=np.float64)
    v2007 = version <= 2016
    for e in range(n_entries):
        guess = codes[offsets[e]:offsets[e + 1]]
        if not guess or min(guess) < 0:
            width[e] = math.nan
            continue
        line = pre + guess + suf
        after, _ = _line_after([fs_of[g] for g in line], [gi[g] for g in line],
                               [gt[g] for g in line], [gs[g] for g in line],
                               size, divisor, brk, v2007, precise, monospaced)
        m = len(guess)
        shifts = sum(after[max(0, n_pre - 1):n_pre + m])
        width[e] = sum(gw[g] for g in guess) - shifts
        if n_tail:
            tail[e] = after[n_pre + m:n_pre + m + n_tail]
    return width, tail


def ocr_widths(codes, offsets, glyph_w, tc):
    codes = np.asarray(codes, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    gw = np.asarray(glyph_w, dtype=np.float64)
    n = len(offsets) - 1
    out = np.zeros(n, dtype=np.float64)
    if len(codes) == 0:
        return out
    per = np.where(codes < 0, np.nan, gw[np.clip(codes, 0, None)] + tc)
    lengths = np.diff(offsets)
    nonempty = lengths > 0
    out[nonempty] = np.add.reduceat(per, offsets[:-1][nonempty])
    return out

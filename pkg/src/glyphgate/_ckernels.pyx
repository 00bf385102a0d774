# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Word line simulation and batched guess evaluation.

Semantics mirror ``glyphgate._fallback`` exactly, including the single vs
double precision split of the adjust routine. Build with
``-ffp-contract=off`` so no fused multiply-add changes rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, NAN
from libc.stdlib cimport malloc, free
from numpy cimport int32_t, int64_t

cnp.import_array()

IMPLEMENTATION = "cython"

cdef double DISP_THRESHOLD = 0.003


cdef inline int _pixel_w(int64_t total, double divisor) noexcept nogil:
    return <int>floor(total / divisor + 0.5)


cdef void _wysiwyg(const int64_t *fsw, int32_t *pw, int n, double divisor, int64_t brk) noexcept nogil:
    cdef int i = 0
    cdef int tracking = 0
    cdef int64_t total
    cdef int new_adjustment, accumulated, so_far, last_new, orig, new_adj, diff, parity, new_track
    if n == 0:
        return
    while True:
        total = fsw[i]
        new_adjustment = _pixel_w(total, divisor)
        accumulated = pw[i] - new_adjustment
        pw[i] = new_adjustment
        so_far = new_adjustment
        last_new = new_adjustment
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


cdef void _adjust(const double *ts, const int32_t *pw, const unsigned char *is_space, int n,
                  double size, double dot_pt, int v2007, int precise, double *after) noexcept nogil:
    cdef int j
    cdef int leading = 1
    cdef float ttf = 0, dev = 0, t32, d32, disp32
    cdef double pttf = 0, pdev = 0, d64, disp
    for j in range(n):
        if leading and is_space[j]:
            continue
        leading = 0
        if precise:
            pttf += ts[j] / 1000.0
            pdev += (pw[j] * dot_pt) / size
            disp = pttf - pdev
        elif v2007:
            t32 = (<float>ts[j]) / 1000
            d64 = (pw[j] * dot_pt) / size
            ttf += t32
            dev = <float>(<double>dev + d64)
            disp32 = ttf - dev
            disp = disp32
        else:
            t32 = <float>(ts[j] / 1000.0)
            d32 = <float>((pw[j] * dot_pt) / size)
            ttf += t32
            dev += d32
            disp32 = ttf - dev
            disp = disp32
        if (disp > DISP_THRESHOLD or disp < -DISP_THRESHOLD) and j != n - 1:
            after[j] = <int>(disp * 1000 + 0.5)
            ttf = 0
            dev = 0
            pttf = 0
            pdev = 0
        else:
            after[j] = 0


cdef void _line_after(const int64_t *fsw, const int32_t *internal, const double *ts,
                      const unsigned char *is_space, int n, double size, double divisor,
                      int64_t brk, int v2007, int precise, int mono, int32_t *pw, double *after) noexcept nogil:
    cdef int j
    for j in range(n):
        after[j] = 0
        pw[j] = internal[j]
    if n == 0 or mono:
        return
    _wysiwyg(fsw, pw, n, divisor, brk)
    _adjust(ts, pw, is_space, n, size, divisor / 2000.0, v2007, precise, after)


def word_after(widths, internal, text_space, is_space, double size, int version,
               double divisor, int64_t brk, bint precise=False, bint monospaced=False):
    """"After" shift vector of one line (see ``glyphgate.schemes.word``)."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] w = np.ascontiguousarray(widths, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] pi = np.ascontiguousarray(internal, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tsa = np.ascontiguousarray(text_space, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] sp = np.ascontiguousarray(is_space, dtype=np.uint8)
    cdef int n = w.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] fsw = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] pw = np.empty(n, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] after = np.zeros(n, dtype=np.float64)
    cdef int j
    for j in range(n):
        fsw[j] = <int64_t>(w[j] * size * 2)
    if n:
        _line_after(&fsw[0], &pi[0], &tsa[0], &sp[0], n, size, divisor, brk,
                    version <= 2016, precise, monospaced, &pw[0], &after[0])
    return after, pw


def word_batch(prefix, suffix, codes, offsets, glyph_w, glyph_int, glyph_ts, glyph_sp,
               double size, int version, double divisor, int64_t brk, int n_cmp,
               bint precise=False, bint monospaced=False):
    """Simulate ``prefix + guess + suffix`` for every dictionary entry.

    ``prefix``/``suffix`` are glyph-index arrays into the ``glyph_*`` tables;
    ``codes``/``offsets`` hold the dictionary in CSR form (a negative code
    marks an unrenderable entry). Returns ``(width, tail)`` where ``width``
    is the excised gap in units (advances of the guess minus every shift
    from the first guess glyph through the first suffix glyph) and
    ``tail[k]`` holds the next ``n_cmp`` suffix shifts. Unrenderable
    entries get ``width = nan``.
    """
    cdef cnp.ndarray[cnp.int32_t, ndim=1] pre = np.ascontiguousarray(prefix, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] suf = np.ascontiguousarray(suffix, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] cd = np.ascontiguousarray(codes, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] gw = np.ascontiguousarray(glyph_w, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] gi = np.ascontiguousarray(glyph_int, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gt = np.ascontiguousarray(glyph_ts, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] gs = np.ascontiguousarray(glyph_sp, dtype=np.uint8)
    cdef int n_pre = pre.shape[0]
    cdef int n_suf = suf.shape[0]
    cdef Py_ssize_t n_entries = off.shape[0] - 1
    cdef int n_tail = n_cmp if n_cmp < n_suf - 1 else n_suf - 1
    if n_tail < 0:
        n_tail = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] width = np.empty(n_entries, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] tail = np.zeros((n_entries, max(n_tail, 1)), dtype=np.float64)
    cdef int max_len = 0
    cdef Py_ssize_t e
    for e in range(n_entries):
        if off[e + 1] - off[e] > max_len:
            max_len = <int>(off[e + 1] - off[e])
    cdef int cap = n_pre + max_len + n_suf + 1
    cdef int64_t *fsw = <int64_t *>malloc(cap * sizeof(int64_t))
    cdef int32_t *internal = <int32_t *>malloc(cap * sizeof(int32_t))
    cdef int32_t *pw = <int32_t *>malloc(cap * sizeof(int32_t))
    cdef double *ts = <double *>malloc(cap * sizeof(double))
    cdef unsigned char *sp = <unsigned char *>malloc(cap * sizeof(unsigned char))
    cdef double *after = <double *>malloc(cap * sizeof(double))
    cdef int j, k, g, m, n, bad
    cdef double adv, shifts
    cdef int v2007 = version <= 2016
    if not (fsw and internal and pw and ts and sp and after):
        free(fsw); free(internal); free(pw); free(ts); free(sp); free(after)
        raise MemoryError()
    try:
        with nogil:
            for j in range(n_pre):
                g = pre[j]
                fsw[j] = <int64_t>(gw[g] * size * 2)
                internal[j] = gi[g]
                ts[j] = gt[g]
                sp[j] = gs[g]
            for e in range(n_entries):
                m = <int>(off[e + 1] - off[e])
                bad = m == 0
                adv = 0
                for k in range(m):
                    g = cd[off[e] + k]
                    if g < 0:
                        bad = 1
                        break
                    j = n_pre + k
                    fsw[j] = <int64_t>(gw[g] * size * 2)
                    internal[j] = gi[g]
                    ts[j] = gt[g]
                    sp[j] = gs[g]
                    adv += gw[g]
                if bad:
                    width[e] = NAN
                    continue
                for k in range(n_suf):
                    g = suf[k]
                    j = n_pre + m + k
                    fsw[j] = <int64_t>(gw[g] * size * 2)
                    internal[j] = gi[g]
                    ts[j] = gt[g]
                    sp[j] = gs[g]
                n = n_pre + m + n_suf
                _line_after(fsw, internal, ts, sp, n, size, divisor, brk, v2007, precise,
                            monospaced, pw, after)
                # IR shift of glyph i is after[i - 1]
                shifts = 0
                for j in range(n_pre - 1, n_pre + m):
                    if j >= 0:
                        shifts += after[j]
                width[e] = adv - shifts
                for k in range(n_tail):
                    tail[e, k] = after[n_pre + m + k]
    finally:
        free(fsw); free(internal); free(pw); free(ts); free(sp); free(after)
    return width, tail[:, :n_tail]


def ocr_widths(codes, offsets, glyph_w, double tc):
    """Per-entry advance sum plus ``len * tc`` (nan for unrenderable entries)."""
    cdef cnp.ndarray[cnp.int32_t, ndim=1] cd = np.ascontiguousarray(codes, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] gw = np.ascontiguousarray(glyph_w, dtype=np.int64)
    cdef Py_ssize_t n_entries = off.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n_entries, dtype=np.float64)
    cdef Py_ssize_t e, k
    cdef int g
    cdef double s
    with nogil:
        for e in range(n_entries):
            s = 0
            for k in range(off[e], off[e + 1]):
                g = cd[k]
                if g < 0:
                    s = NAN
                    break
                s += gw[g] + tc
            out[e] = s
    return out

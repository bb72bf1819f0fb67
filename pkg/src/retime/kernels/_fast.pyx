# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: index plans, temporal blends, bilinear resize.

Mirrors retime.kernels._pure operation for operation; the blend arithmetic
is written in the identical order so results match the fallback bit for bit
(the extension is compiled with -ffp-contract=off for the same reason).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def eq1_indices(Py_ssize_t n, Py_ssize_t l, double alpha):
    out = np.empty(l, dtype=np.int64)
    cdef cnp.int64_t[::1] v = out
    cdef Py_ssize_t i
    cdef double x
    for i in range(l):
        x = floor(alpha * <double>(i + 1))
        if x < 1.0:
            v[i] = 1
        elif x >= <double>n:
            v[i] = n
        else:
            v[i] = <cnp.int64_t>x
    return out


def linear_resample(const double[:, ::1] frames, const double[::1] positions):
    cdef Py_ssize_t n = frames.shape[0]
    cdef Py_ssize_t p = frames.shape[1]
    cdef Py_ssize_t m = positions.shape[0]
    out = np.empty((m, p), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t j, k, lo, hi
    cdef double t, f, w
    for j in range(m):
        t = positions[j]
        if t < 1.0:
            t = 1.0
        elif t > <double>n:
            t = <double>n
        f = floor(t)
        w = t - f
        lo = <Py_ssize_t>f
        if lo >= n:
            lo = n
            hi = n
            w = 0.0
        else:
            hi = lo + 1
        for k in range(p):
            o[j, k] = (1.0 - w) * frames[lo - 1, k] + w * frames[hi - 1, k]
    return out


def bilinear_resize(const double[:, :, ::1] img, Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t c = img.shape[2]
    cdef double scale_y = <double>h / <double>out_h
    cdef double scale_x = <double>w / <double>out_w
    out = np.empty((out_h, out_w, c), dtype=np.float64)
    cdef double[:, :, ::1] o = out
    cdef Py_ssize_t j, i, k, y0, y1, x0, x1
    cdef double sy, sx, wy, wx, top, bot
    for j in range(out_h):
        sy = (<double>j + 0.5) * scale_y - 0.5
        if sy < 0.0:
            sy = 0.0
        elif sy > <double>(h - 1):
            sy = <double>(h - 1)
        y0 = <Py_ssize_t>floor(sy)
        wy = sy - floor(sy)
        y1 = y0 + 1 if y0 + 1 < h else h - 1
        for i in range(out_w):
            sx = (<double>i + 0.5) * scale_x - 0.5
            if sx < 0.0:
                sx = 0.0
            elif sx > <double>(w - 1):
                sx = <double>(w - 1)
            x0 = <Py_ssize_t>floor(sx)
            wx = sx - floor(sx)
            x1 = x0 + 1 if x0 + 1 < w else w - 1
            for k in range(c):
                top = (1.0 - wx) * img[y0, x0, k] + wx * img[y0, x1, k]
                bot = (1.0 - wx) * img[y1, x0, k] + wx * img[y1, x1, k]
                o[j, i, k] = (1.0 - wy) * top + wy * bot
    return out

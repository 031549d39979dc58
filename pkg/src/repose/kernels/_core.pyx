# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled image-space kernels; formula-for-formula mirror of fallback.py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

BACKEND = "cython"


def dilate(mask, int radius):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((h, w), dtype=np.uint8)
    cdef Py_ssize_t y, x, dy, dx, sy, sx
    cdef long r2 = <long>radius * radius
    if radius <= 0:
        return (m != 0).astype(np.uint8)
    for y in range(h):
        for x in range(w):
            if m[y, x]:
                for dy in range(-radius, radius + 1):
                    sy = y + dy
                    if sy < 0 or sy >= h:
                        continue
                    for dx in range(-radius, radius + 1):
                        if dx * dx + dy * dy > r2:
                            continue
                        sx = x + dx
                        if 0 <= sx < w:
                            out[sy, sx] = 1
    return out


def erode(mask, int radius):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(mask, dtype=np.uint8)
    if radius <= 0:
        return (m != 0).astype(np.uint8)
    inv = (m == 0).astype(np.uint8)
    return (1 - dilate(inv, radius)).astype(np.uint8)


def warp_mask_nn(mask, double dx, double dy, double scale, double cx, double cy):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out = np.zeros((h, w), dtype=np.uint8)
    cdef Py_ssize_t qy, qx
    cdef double px, py
    cdef Py_ssize_t ix, iy
    for qy in range(h):
        for qx in range(w):
            px = (qx - cx) / scale + cx - dx
            py = (qy - cy) / scale + cy - dy
            ix = <Py_ssize_t>floor(px + 0.5)
            iy = <Py_ssize_t>floor(py + 0.5)
            if 0 <= ix < w and 0 <= iy < h:
                out[qy, qx] = m[iy, ix]
    return out


def warp_image_bilinear(img, double dx, double dy, double scale, double cx, double cy, double fill=0.0):
    cdef cnp.ndarray[cnp.float32_t, ndim=3] src = np.ascontiguousarray(img, dtype=np.float32)
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1], nc = src.shape[2]
    cdef cnp.ndarray[cnp.float32_t, ndim=3] out = np.full((h, w, nc), <float>fill, dtype=np.float32)
    cdef Py_ssize_t qy, qx, c, x0, y0
    cdef double px, py
    cdef float fx, fy, tl, tr, bl, br, top, bot
    for qy in range(h):
        for qx in range(w):
            px = (qx - cx) / scale + cx - dx
            py = (qy - cy) / scale + cy - dy
            x0 = <Py_ssize_t>floor(px)
            y0 = <Py_ssize_t>floor(py)
            if x0 < 0 or x0 + 1 >= w or y0 < 0 or y0 + 1 >= h:
                continue
            fx = <float>(px - x0)
            fy = <float>(py - y0)
            for c in range(nc):
                tl = src[y0, x0, c]
                tr = src[y0, x0 + 1, c]
                bl = src[y0 + 1, x0, c]
                br = src[y0 + 1, x0 + 1, c]
                top = tl + (tr - tl) * fx
                bot = bl + (br - bl) * fx
                out[qy, qx, c] = top + (bot - top) * fy
    return out


def blend(dst, src, alpha):
    cdef cnp.ndarray[cnp.float32_t, ndim=3] d = np.ascontiguousarray(dst, dtype=np.float32)
    cdef cnp.ndarray[cnp.float32_t, ndim=3] s = np.ascontiguousarray(src, dtype=np.float32)
    cdef cnp.ndarray[cnp.float32_t, ndim=2] a = np.ascontiguousarray(alpha, dtype=np.float32)
    cdef Py_ssize_t h = d.shape[0], w = d.shape[1], nc = d.shape[2]
    cdef cnp.ndarray[cnp.float32_t, ndim=3] out = np.empty((h, w, nc), dtype=np.float32)
    cdef Py_ssize_t y, x, c
    for y in range(h):
        for x in range(w):
            for c in range(nc):
                out[y, x, c] = d[y, x, c] + a[y, x] * (s[y, x, c] - d[y, x, c])
    return out

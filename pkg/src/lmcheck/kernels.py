"""Vectorised norm kernels over batches of decreasing step functions.

A batch is a 2-d array ``v`` whose rows are non-increasing, non-negative
piece values, plus breakpoints ``t`` of shape ``(L + 1,)`` or ``(k, L + 1)``
with ``t[..., 0] == 0``.  Equal neighbouring values are allowed: every
formula here is additive over a subdivision of a constant piece, so rows
need not be coalesced.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import binom

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _tops(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    top = v[:, 0].copy() if v.shape[1] else np.zeros(v.shape[0])
    safe = np.where(top > 0, top, 1.0)
    return top, safe


def _t2(t: np.ndarray, k: int) -> np.ndarray:
    return np.broadcast_to(t, (k, t.shape[-1]))


def cumulative_rows(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    t = _t2(t, v.shape[0])
    return np.concatenate((np.zeros((v.shape[0], 1)), np.cumsum(v * np.diff(t, axis=1), axis=1)), axis=1)


def lp_rows(v: np.ndarray, t: np.ndarray, p: float) -> np.ndarray:
    top, safe = _tops(v)
    if math.isinf(p):
        return top
    w = np.diff(_t2(t, v.shape[0]), axis=1)
    s = np.sum(w * (v / safe[:, None]) ** p, axis=1)
    return top * s ** (1.0 / p)


def weak_rows(v: np.ndarray, t: np.ndarray, p: float) -> np.ndarray:
    if v.shape[1] == 0:
        return np.zeros(v.shape[0])
    t = _t2(t, v.shape[0])
    return np.max(v * t[:, 1:] ** (1.0 / p), axis=1)


def weak_rows_levels(v: np.ndarray, t: np.ndarray, p: float) -> np.ndarray:
    """Level-set form ``sup_λ λ d(λ)^{1/p}``: each value times the mass at or above it."""
    if v.shape[1] == 0:
        return np.zeros(v.shape[0])
    t = _t2(t, v.shape[0])
    k, n = v.shape
    # last position holding the same value as position i, found from the right
    same_next = np.concatenate((v[:, 1:] == v[:, :-1], np.zeros((k, 1), bool)), axis=1)
    idx = np.where(same_next, -1, np.arange(n)[None, :])
    last = np.minimum.accumulate(np.where(idx < 0, n, idx)[:, ::-1], axis=1)[:, ::-1]
    d = np.take_along_axis(t[:, 1:], last, axis=1)
    return np.max(v * d ** (1.0 / p), axis=1)


def lorentz_rows(v: np.ndarray, t: np.ndarray, p: float, r: float) -> np.ndarray:
    if math.isinf(r):
        return weak_rows(v, t, p)
    top, safe = _tops(v)
    tt = _t2(t, v.shape[0])
    w = (p / r) * np.diff(tt ** (r / p), axis=1)
    s = np.sum(w * (v / safe[:, None]) ** r, axis=1)
    return top * s ** (1.0 / r)


def lorentz_rows_layer(v: np.ndarray, t: np.ndarray, p: float, r: float) -> np.ndarray:
    """Distribution-function form ``(p ∫ [λ d(λ)^{1/p}]^r dλ/λ)^{1/r}``."""
    if math.isinf(r):
        return weak_rows_levels(v, t, p)
    top, safe = _tops(v)
    tt = _t2(t, v.shape[0])
    u = v / safe[:, None]
    nxt = np.concatenate((u[:, 1:], np.zeros((u.shape[0], 1))), axis=1)
    s = np.sum((p / r) * tt[:, 1:] ** (r / p) * (u**r - nxt**r), axis=1)
    return top * np.maximum(s, 0.0) ** (1.0 / r)


def w_rows(v: np.ndarray, t: np.ndarray) -> np.ndarray:
    if v.shape[1] == 0:
        return np.zeros(v.shape[0])
    tt = _t2(t, v.shape[0])
    c = cumulative_rows(v, tt)
    nxt = np.concatenate((v[:, 1:], np.zeros((v.shape[0], 1))), axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        gap = c[:, 1:] / tt[:, 1:] - nxt
    return np.max(np.where(tt[:, 1:] > 0, gap, 0.0), axis=1)


def hardy_rows(v: np.ndarray, t: np.ndarray, s: np.ndarray) -> np.ndarray:
    """``f**`` of every row at the points ``s`` (shape ``(k, len(s))``)."""
    tt = _t2(t, v.shape[0])
    c = cumulative_rows(v, tt)
    vals = np.concatenate((v, np.zeros((v.shape[0], 1))), axis=1)
    out = np.empty((v.shape[0], s.size))
    for row in range(v.shape[0]):
        i = np.searchsorted(tt[row], s, side="right") - 1
        i = np.minimum(i, v.shape[1])
        out[row] = (c[row, i] + vals[row, i] * (s - tt[row, i])) / s
    return out


def star_lorentz_rows(v: np.ndarray, t: np.ndarray, p: float, r: float) -> np.ndarray:
    """``(∫ [s^{1/p} f**(s)]^r ds/s)^{1/r}`` (or the sup for ``r = inf``) per row.

    On piece ``i`` we have ``f**(s) = a_i/s + v_i`` with
    ``a_i = C_{i-1} - v_i t_{i-1} >= 0``; past the support ``f**(s) = C/s``.
    Integer ``r`` is integrated term by term from the binomial expansion;
    other ``r`` use Gauss-Legendre in ``log s`` on short sub-intervals.
    """
    if p <= 1:
        raise ValueError("p must exceed 1")
    k, n = v.shape
    if n == 0:
        return np.zeros(k)
    tt = np.array(_t2(t, k), dtype=float)
    top, safe = _tops(v)
    u = v / safe[:, None]
    c = cumulative_rows(u, tt)
    if math.isinf(r):
        # s^{1/p} f**(s) is convex in each piece and decreasing on the tail
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = c[:, 1:] * tt[:, 1:] ** (1.0 / p - 1.0)
        return top * np.max(np.where(tt[:, 1:] > 0, vals, 0.0), axis=1)
    a = np.maximum(c[:, :-1] - u * tt[:, :-1], 0.0)
    t0, t1 = tt[:, :-1], tt[:, 1:]
    # first piece: a = 0 and the integral is u^r (p/r) t1^{r/p}
    total = u[:, 0] ** r * (p / r) * t1[:, 0] ** (r / p)
    a, uu, t0, t1 = a[:, 1:], u[:, 1:], t0[:, 1:], t1[:, 1:]
    valid = t1 > t0
    if float(r).is_integer():
        ri = int(r)
        for j in range(ri + 1):
            e = r / p - j
            coef = binom(ri, j) * a**j * uu ** (ri - j)
            if e == 0:
                with np.errstate(divide="ignore", invalid="ignore"):
                    piece = np.log(t1 / t0)
            else:
                piece = (t1**e - t0**e) / e
            total = total + np.sum(np.where(valid & (coef > 0), coef * np.where(valid, piece, 0.0), 0.0), axis=1)
    else:
        for row in range(k):
            total[row] += _star_pieces_quadrature(a[row], uu[row], t0[row], t1[row], p, r)
    tail = c[:, -1] ** r * tt[:, -1] ** (r / p - r) / (r - r / p)
    total = total + tail
    return top * total ** (1.0 / r)


def _star_pieces_quadrature(a, v, t0, t1, p, r) -> float:
    acc = 0.0
    for ai, vi, lo, hi in zip(a, v, t0, t1):
        if not hi > lo:
            continue
        wl, wh = math.log(lo), math.log(hi)
        m = max(1, math.ceil((wh - wl) / 0.5))
        edges = np.linspace(wl, wh, m + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        w = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        s = np.exp(w)
        g = s ** (r / p) * (ai / s + vi) ** r
        acc += float(np.sum(g.reshape(m, -1) * _GL_WEIGHTS[None, :] * half[:, None]))
    return acc


def bmo_rows(x: np.ndarray) -> np.ndarray:
    """Mean absolute deviation from the mean for every row of signed values."""
    m = x.mean(axis=1, keepdims=True)
    return np.abs(x - m).mean(axis=1)

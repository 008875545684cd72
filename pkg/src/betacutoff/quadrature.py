"""Breadth-first adaptive Simpson quadrature for vectorised integrands.

The integrands in this package are exponential or Erlang densities times a
piecewise-affine function of time, smooth between a handful of known kinks.
Callers pass those kinks as ``points`` so every panel is smooth, and truncate
infinite ranges themselves.
"""

from __future__ import annotations

import math

import numpy as np


class QuadratureError(RuntimeError):
    pass


def simpson(f, a: float, b: float, tol: float = 1e-13, points=(), max_depth: int = 60):
    """Integrate ``f`` over [a, b].

    ``f`` takes a 1-d array of abscissae and returns either an array of the
    same length or a ``(k, n)`` array for a vector-valued integrand. ``tol`` is
    an absolute tolerance on every component of the result.
    """
    if b < a:
        raise ValueError("need a <= b")
    edges = sorted({a, b, *(x for x in points if a < x < b)})
    lo = np.array(edges[:-1], dtype=float)
    hi = np.array(edges[1:], dtype=float)
    if lo.size == 0 or b == a:
        return _zeros_like_output(f, a)

    width = b - a
    mid = 0.5 * (lo + hi)
    fa, fm, fb = _split3(f, lo, mid, hi)
    whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb)
    local_tol = tol * (hi - lo) / width

    total = np.zeros(whole.shape[:-1])
    for _ in range(max_depth):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm, frm = _split2(f, lm, rm)
        left = (mid - lo) / 6.0 * (fa + 4.0 * flm + fm)
        right = (hi - mid) / 6.0 * (fm + 4.0 * frm + fb)
        diff = left + right - whole
        err = np.abs(diff) if diff.ndim == 1 else np.abs(diff).max(axis=0)
        # a panel narrower than float resolution straddles a jump sampled on the wrong side; its
        # mass is negligible, so accept it instead of bisecting forever
        done = (err <= 15.0 * local_tol) | (hi - lo <= 1e-14 * np.maximum(np.abs(hi), width))
        if done.any():
            acc = left[..., done] + right[..., done] + diff[..., done] / 15.0
            total = total + acc.sum(axis=-1)
        keep = ~done
        if not keep.any():
            return total
        # refine the rejected panels into their two halves
        lo, mid, hi = lo[keep], mid[keep], hi[keep]
        fa, fm, fb = fa[..., keep], fm[..., keep], fb[..., keep]
        lm, rm, flm, frm = lm[keep], rm[keep], flm[..., keep], frm[..., keep]
        left, right, tol_k = left[..., keep], right[..., keep], local_tol[keep] / 2.0
        lo = np.concatenate([lo, mid])
        hi_new = np.concatenate([mid, hi])
        mid = np.concatenate([lm, rm])
        fa = np.concatenate([fa, fm], axis=-1)
        fb = np.concatenate([fm, fb], axis=-1)
        fm = np.concatenate([flm, frm], axis=-1)
        whole = np.concatenate([left, right], axis=-1)
        local_tol = np.concatenate([tol_k, tol_k])
        hi = hi_new
    raise QuadratureError(f"adaptive Simpson did not converge on [{a}, {b}]")


def _eval(f, x):
    return np.asarray(f(x), dtype=float)


def _split2(f, x, y):
    out = _eval(f, np.concatenate([x, y]))
    n = x.size
    return out[..., :n], out[..., n:]


def _split3(f, x, y, z):
    out = _eval(f, np.concatenate([x, y, z]))
    n = x.size
    return out[..., :n], out[..., n : 2 * n], out[..., 2 * n :]


def _zeros_like_output(f, a):
    probe = _eval(f, np.array([a]))
    return np.zeros(probe.shape[:-1])


def exp_tail_cutoff(mean: float, eps: float = 1e-14) -> float:
    """T with exp(-T/mean) = eps; beyond T an exponential density carries mass < eps."""
    return mean * math.log(1.0 / eps)


def erlang_cutoff(shape: int, mean: float, eps: float = 1e-14) -> float:
    """Upper limit past which ``t * Erlang(shape, scale=mean)`` carries mass < eps.

    Uses a generous Chernoff-style margin: ``shape + 12 sqrt(shape) + log(1/eps)``
    scale units.
    """
    return mean * (shape + 12.0 * math.sqrt(shape) + math.log(1.0 / eps))


def erlang_pdf(t: np.ndarray, shape: int, mean: float) -> np.ndarray:
    """Density of a sum of ``shape`` i.i.d. exponentials with mean ``mean``, in log space."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    logp = (shape - 1) * np.log(tp) - tp / mean - math.lgamma(shape) - shape * math.log(mean)
    out[pos] = np.exp(logp)
    if shape == 1:
        out[t == 0] = 1.0 / mean
    return out

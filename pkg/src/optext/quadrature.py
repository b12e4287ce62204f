"""Deterministic quadrature helpers.

Everything here is fixed-order and reproducible: Gauss-Legendre panels for
segment integrals, scipy's adaptive rule only for improper heads and tails,
and geometric hunting for truncation points of decaying integrands.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy import integrate

from .errors import NonIntegrableWeightError, QuadratureError

#: relative level (vs. peak) below which a decaying integrand is truncated.
#: 1e-18 would already be negligible for exponential tails; slow polynomial
#: tails need the extra headroom to keep the dropped mass under 1e-12.
TRUNCATION_RATIO = 1e-24

HUNT_CAP = 2.0 ** 100


@functools.lru_cache(maxsize=None)
def gl_nodes(order: int):
    """Cached Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def gl_panel(f, lo, hi, order=32, dtype=np.float64):
    """Fixed-order Gauss-Legendre integral of f over [lo, hi]."""
    x, w = gl_nodes(order)
    x = x.astype(dtype)
    w = w.astype(dtype)
    lo = dtype(lo)
    hi = dtype(hi)
    half = (hi - lo) / dtype(2)
    mid = (lo + hi) / dtype(2)
    vals = np.asarray(f(mid + half * x), dtype=dtype)
    return half * np.dot(w, vals)


def segment_integrals(f, edges, order=24, max_len=2.0, dtype=np.float64):
    """Integrals of f over each consecutive pair of edges.

    Long segments are split into panels so a single fixed-order rule never
    has to swallow a wide tail interval; the allowed panel length grows with
    |position| (span ratio bounded), which keeps panel counts logarithmic on
    windows millions wide while staying fine near the origin.  One call to f
    per flattened node array; summation order is deterministic.
    """
    edges = np.asarray(edges, dtype=dtype)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("need at least two edges")
    x, w = gl_nodes(order)
    x = x.astype(dtype)
    w = w.astype(dtype)

    nodes = []
    weights = []
    seg_of_panel = []
    for i in range(edges.size - 1):
        lo, hi = edges[i], edges[i + 1]
        if float(hi - lo) < 0:
            raise ValueError("edges must be ascending")
        pos = lo
        while True:
            remaining = hi - pos
            step = min(remaining, max(dtype(max_len), dtype(0.25) * abs(pos)))
            nxt = hi if step >= remaining else pos + step
            half = (nxt - pos) / dtype(2)
            mid = (nxt + pos) / dtype(2)
            nodes.append(mid + half * x)
            weights.append(w * half)
            seg_of_panel.append(i)
            pos = nxt
            if pos >= hi:
                break

    flat_nodes = np.concatenate(nodes)
    flat_weights = np.concatenate(weights)
    vals = np.asarray(f(flat_nodes), dtype=dtype) * flat_weights
    per_panel = vals.reshape(len(seg_of_panel), order).sum(axis=1)

    out = np.zeros(edges.size - 1, dtype=dtype)
    np.add.at(out, np.asarray(seg_of_panel), per_panel)
    return out


def adaptive(f, lo, hi, epsrel=1e-12, epsabs=0.0, limit=400):
    """scipy adaptive quadrature with failure escalation."""
    val, err, info, *rest = integrate.quad(
        f, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1
    )
    if rest:
        # a message is only appended on trouble; retry once with a laxer
        # absolute floor before giving up (pure roundoff-limited cases).
        val2, err2, *rest2 = integrate.quad(
            f, lo, hi, epsabs=1e-13 * max(1.0, abs(val)), epsrel=epsrel,
            limit=limit, full_output=1
        )
        if not np.isfinite(val2):
            raise QuadratureError(f"adaptive quadrature failed on ({lo}, {hi}): {rest[0]}")
        return val2
    return val


def chained_adaptive(scalar_f, a, b, epsrel=1e-12):
    """Adaptive panels over [a, b] in geometrically growing spans.

    One quad call across a window many decades wide steps right past
    localized mass; chaining keeps every panel at a resolvable aspect.
    """
    total, pos = 0.0, a
    while pos < b:
        nxt = min(b, pos + max(1.0, abs(pos)))
        total += adaptive(scalar_f, pos, nxt, epsrel=epsrel)
        pos = nxt
    return total


def hunt_below(g, start, level, step0=1.0, direction=1, cap=HUNT_CAP):
    """First probed point beyond `start` where g < level, geometric stepping.

    Raises NonIntegrableWeightError when the cap is reached, which is the
    divergence signal for integrands that refuse to decay.
    """
    step = step0
    t = start
    while abs(t - start) < cap:
        t = t + direction * step
        if g(t) < level:
            return t
        step *= 2.0
    raise NonIntegrableWeightError(
        f"integrand does not fall below {level:.3e} within {cap:.3e} of {start}"
    )


def improper_weighted(f, lo, peak_hint=None, epsrel=1e-12):
    """Integral of a positive decaying f over (lo, +inf), lo possibly -inf.

    Truncation hunting keeps the adaptive rule on a finite window around the
    integrand's support; the dropped tails are re-added with dedicated
    improper calls so slow polynomial decay still meets the tolerance.
    """
    if peak_hint is None:
        probes = np.linspace(-30.0, 30.0, 61) if lo == -np.inf else lo + np.geomspace(1e-6, 60.0, 61)
        pv = np.asarray(f(probes))
        peak_hint = float(probes[int(np.argmax(pv))])
    peak_val = float(f(np.asarray([peak_hint]))[0])
    if not np.isfinite(peak_val) or peak_val <= 0:
        raise NonIntegrableWeightError("no positive finite peak found")
    level = TRUNCATION_RATIO * peak_val

    scalar_f = lambda t: float(f(np.asarray([t]))[0])
    hi = hunt_below(scalar_f, peak_hint, level, step0=1.0, direction=1)
    if lo > -np.inf:
        total = chained_adaptive(scalar_f, lo, hi, epsrel=epsrel)
    else:
        # the left hunt doubles as the divergence detector for A = +inf
        left = hunt_below(scalar_f, peak_hint, level, step0=1.0, direction=-1)
        total = chained_adaptive(scalar_f, left, hi, epsrel=epsrel)
        total += adaptive(scalar_f, -np.inf, left, epsrel=epsrel)
    tail = adaptive(scalar_f, hi, np.inf, epsrel=min(1e-8, epsrel * 1e4))
    return total + tail


def cumulative_weighted(f, lower, ts, order=24, dtype=np.float64, head_epsrel=1e-12):
    """Cumulative integrals I(t_i) = int_lower^{t_i} f and M1(t_i) = int s f(s) ds.

    The head up to ts[0] is adaptive (handles an improper lower endpoint or an
    endpoint singularity); increments between grid points are Gauss-Legendre
    panels evaluated in `dtype`, so differences across nearby points keep full
    working precision even when the head carries float64 error.
    """
    ts = np.asarray(ts, dtype=np.float64)
    if np.any(np.diff(ts) <= 0):
        raise ValueError("grid must be strictly ascending")
    scalar_f = lambda t: float(f(np.asarray([t]))[0])
    head_I = adaptive(scalar_f, lower, float(ts[0]), epsrel=head_epsrel)
    head_M = adaptive(lambda t: t * scalar_f(t), lower, float(ts[0]), epsrel=head_epsrel)

    edges = ts.astype(dtype)
    inc_I = segment_integrals(f, edges, order=order, dtype=dtype)
    inc_M = segment_integrals(lambda s: s * np.asarray(f(s)), edges, order=order, dtype=dtype)

    I = np.empty(ts.size, dtype=dtype)
    M1 = np.empty(ts.size, dtype=dtype)
    I[0] = dtype(head_I)
    M1[0] = dtype(head_M)
    I[1:] = I[0] + np.cumsum(inc_I)
    M1[1:] = M1[0] + np.cumsum(inc_M)
    return I, M1


def richardson_limit(samples, ratio=2.0):
    """Neville tableau toward zero step for samples f(h0 / ratio**j).

    Returns (limit, consistency) where consistency is the absolute difference
    of the last two diagonal extrapolants.
    """
    fs = [float(v) for v in samples]
    n = len(fs)
    tab = [fs[:]]
    for k in range(1, n):
        prev = tab[-1]
        row = []
        for i in range(n - k):
            num = ratio ** k * prev[i + 1] - prev[i]
            row.append(num / (ratio ** k - 1.0))
        tab.append(row)
    diag = [tab[k][0] for k in range(n)]
    return diag[-1], abs(diag[-1] - diag[-2])

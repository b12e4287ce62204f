"""Green functions, capacities, Bergman kernels, the Suita gap, and the
adjoint L-kernel on the unit disc and concentric annuli.

The annulus Green function is built by separation of variables: subtract
log|z - z0|, then match the harmonic remainder to minus the log term on
both circles with a Fourier-Laurent series. Everything downstream
(capacity, L-kernel, winding counts) differentiates or extrapolates that
series, so the finite-difference Laplace oracle in the tests is the one
truly independent route.
"""

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DomainError,
    InternalConsistencyError,
    LimitUndefinedError,
    SingularityError,
    UnsupportedDomainError,
)
from .quadrature import richardson_limit


@dataclass(frozen=True)
class PlanarDomain:
    """Unit disc or concentric annulus {q < |z| < 1}.

    n_series is the Fourier-Laurent truncation order used by every
    series-backed query on the annulus; queries are pure, so instances
    are safe to share across threads.
    """

    kind: str
    q: float = 0.0
    n_series: int = 60

    def __post_init__(self):
        if self.kind not in ("disc", "annulus"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if self.kind == "annulus":
            if not 0.0 < self.q < 1.0:
                raise DomainError("annulus inner radius must sit in (0, 1)")
            if self.n_series < 1:
                raise DomainError("series truncation must be positive")

    def contains(self, z):
        r = abs(complex(z))
        if self.kind == "disc":
            return r < 1.0
        return self.q < r < 1.0


def unit_disc():
    return PlanarDomain(kind="disc")


def annulus(q, n_series=60):
    return PlanarDomain(kind="annulus", q=float(q), n_series=int(n_series))


def _require_interior(dom, z, label="point"):
    if not dom.contains(z):
        raise DomainError(f"{label} {z!r} is not interior to the domain")


@lru_cache(maxsize=512)
def _annulus_coeffs(q, n_terms, t):
    """Cosine-series coefficients of the harmonic correction for a real
    source t in (q, 1).

    H(r, theta) = b0 log r + sum a_n Re(z^n) + c_n Re((q/z)^n) matches
    -log|z - t| on both circles; written with (q/z)^n so nothing blows up
    near the inner boundary.
    """
    n = np.arange(1.0, n_terms + 1.0)
    qn = q ** n
    q2n = qn * qn
    a1 = t ** n / n
    a2 = (q / t) ** n / n
    a = (a1 - a2 * qn) / (1.0 - q2n)
    c = (a2 - a1 * qn) / (1.0 - q2n)
    b0 = -math.log(t) / math.log(q)
    return b0, a, c


def _annulus_green_real(q, n_terms, z, t):
    b0, a, c = _annulus_coeffs(q, n_terms, t)
    n = np.arange(1, n_terms + 1)
    zn = z ** n
    wn = (q / z) ** n
    series = float(np.sum(a * zn.real) + np.sum(c * wn.real))
    return math.log(abs(z - t)) + b0 * math.log(abs(z)) + series


def green(dom, z, z0):
    """Green function with pole at z0, negative on the domain.

    Disc: log|(z - z0)/(1 - conj(z0) z)|. Annulus: rotate z0 onto the
    positive real axis and evaluate the truncated series; the truncation
    error decays geometrically in n_series.
    """
    z, z0 = complex(z), complex(z0)
    _require_interior(dom, z)
    _require_interior(dom, z0, "pole")
    if z == z0:
        raise SingularityError("Green function pole at z = z0")
    if dom.kind == "disc":
        return math.log(abs((z - z0) / (1.0 - z0.conjugate() * z)))
    phase = cmath.exp(-1j * cmath.phase(z0))
    return _annulus_green_real(dom.q, dom.n_series, z * phase, abs(z0))


def _series_truncation_bound(dom, z0):
    """Sup bound over the whole annulus for the dropped Green-series tail.

    |a_n z^n| <= 2 t^n / (n (1 - q^2)) and |c_n (q/z)^n| decays like
    (q/t)^n; summing both geometric tails past the truncation order gives
    the bound.
    """
    if dom.kind == "disc":
        return 0.0
    t = abs(complex(z0))
    n1 = dom.n_series + 1
    out = 0.0
    for x in (t, dom.q / t):
        out += 2.0 * x ** n1 / (n1 * (1.0 - dom.q ** 2) * (1.0 - x))
    return out


def _capacity_samples(dom, z0, levels=6):
    z0 = complex(z0)
    if dom.kind == "disc":
        edge = 1.0 - abs(z0)
    else:
        edge = min(1.0 - abs(z0), abs(z0) - dom.q)
    h0 = 0.05 * edge
    samples = []
    for j in range(levels):
        h = h0 / 2.0 ** j
        acc = 0.0
        for k in range(4):
            ang = cmath.exp(1j * (0.25 + 0.5 * k) * math.pi)
            acc += green(dom, z0 + h * ang, z0)
        samples.append(0.25 * acc - math.log(h))
    return samples


def log_capacity(dom, z0):
    """c_beta(z0) = exp lim_{z -> z0} (G(z, z0) - log|z - z0|).

    The limit is extrapolated from Green evaluations at z0 + h e^{i theta}
    averaged over four angles; the average of a harmonic remainder over
    four symmetric points carries only h^4, h^8, ... errors, so the
    Richardson ladder runs in h^4 (ratio 16).
    """
    _require_interior(dom, z0)
    samples = _capacity_samples(dom, z0)
    limit, consistency = richardson_limit(samples, ratio=16.0)
    if not np.isfinite(limit) or consistency > 1e-7 * max(1.0, abs(limit)):
        raise LimitUndefinedError(
            f"capacity extrapolation stalled at consistency {consistency!r}")
    return math.exp(limit)


def _capacity_and_error(dom, z0):
    samples = _capacity_samples(dom, z0)
    limit, consistency = richardson_limit(samples, ratio=16.0)
    cb = math.exp(limit)
    # both the dropped series tail and the extrapolation residue move the
    # limit additively, so they scale c_beta by roughly (1 + err)
    err = cb * (consistency + _series_truncation_bound(dom, z0))
    return cb, err


def _capacity_direct(dom, z0):
    """Series limit of G - log|z - z0| evaluated at the pole directly.

    Tighter than the extrapolation route (no Richardson residue), used by
    the Suita gap where every digit matters. Returns (c_beta, error) with
    the error covering the dropped tail plus roundoff.
    """
    t = abs(complex(z0))
    q, nt = dom.q, dom.n_series
    b0, a, c = _annulus_coeffs(q, nt, t)
    n = np.arange(1, nt + 1)
    u = b0 * math.log(t) + float(np.sum(a * t ** n) + np.sum(c * (q / t) ** n))
    # tail terms are (t^{2n} + (q/t)^{2n} - 2 q^{2n})/(n (1-q^{2n})), each
    # nonnegative by AM-GM, so the geometric majorant below covers them
    x1, x2 = t * t, (q / t) ** 2
    tail = (x1 ** (nt + 1) / (1.0 - x1) + x2 ** (nt + 1) / (1.0 - x2)) \
        / ((nt + 1) * (1.0 - q * q))
    cb = math.exp(u)
    return cb, cb * (tail + 1e-14 * max(1.0, abs(u)))


def _disc_bergman_series(r2, n_terms=400):
    j = np.arange(n_terms)
    return float(np.sum((j + 1.0) * r2 ** j) / math.pi)


def _annulus_bergman(q, n_terms, r):
    """Laurent-monomial kernel sum at radius r with an explicit tail bound.

    Norms: ||z^k||^2 = pi (1 - q^{2k+2})/(k+1) for k != -1 and
    2 pi log(1/q) at k = -1. Negative degrees are folded as
    (m-1)/(pi (q^2 (r/q)^{2m} - r^{2m})) with m = -k, which stays finite
    however deep the Laurent tail goes.
    """
    val = 1.0 / (2.0 * math.pi * math.log(1.0 / q) * r * r)
    k = np.arange(0, n_terms + 1, dtype=np.float64)
    val += float(np.sum(r ** (2.0 * k) * (k + 1.0)
                        / (math.pi * (1.0 - q ** (2.0 * k + 2.0)))))
    m = np.arange(2, n_terms + 1, dtype=np.float64)
    with np.errstate(over="ignore"):
        neg = (m - 1.0) / (math.pi * (q * q * (r / q) ** (2.0 * m)
                                      - r ** (2.0 * m)))
    val += float(np.sum(neg[np.isfinite(neg)]))

    x = r * r
    y = (q / r) ** 2
    n1 = n_terms + 1
    tail = (x ** n1 * ((n1 + 1) - n1 * x) / (1.0 - x) ** 2
            / (math.pi * (1.0 - q ** (2 * n_terms + 4))))
    tail += (y ** n1 * ((n1 + 1) - n1 * y) / (1.0 - y) ** 2
             / (math.pi * q * q * (1.0 - q ** (2 * n_terms))))
    return val, tail


def bergman(dom, z0):
    """Bergman kernel B(z0) in the plain area-measure normalization.

    Disc: closed form 1/(pi (1 - |z0|^2)^2), cross-checked against the
    monomial series. Annulus: Laurent series truncated at n_series with a
    geometric tail bound (see suita_check for the bound's consumer).
    """
    _require_interior(dom, z0)
    r = abs(complex(z0))
    if dom.kind == "disc":
        closed = 1.0 / (math.pi * (1.0 - r * r) ** 2)
        series = _disc_bergman_series(r * r)
        if abs(closed - series) > 1e-10 * closed:
            raise InternalConsistencyError(
                f"disc kernel closed form {closed!r} vs series {series!r}")
        return closed
    val, _ = _annulus_bergman(dom.q, dom.n_series, r)
    return val


@dataclass(frozen=True)
class SuitaRecord:
    """One point of the Suita comparison: gap = pi B - c_beta^2."""

    z0: complex
    c_beta: float
    bergman: float
    gap: float
    truncation_error_bound: float

    def __post_init__(self):
        if self.c_beta <= 0.0 or self.bergman <= 0.0:
            raise InternalConsistencyError("capacity and kernel must be positive")
        if self.gap < -self.truncation_error_bound:
            raise InternalConsistencyError(
                f"gap {self.gap!r} violates the bound {self.truncation_error_bound!r}")


def _suita_annulus_mp(q, t, digits):
    """High-precision Suita gap via the product form of the capacity.

    The coefficient sums telescope through sum x^n/(n (1 - q^{2n})) =
    -sum_j log(1 - x q^{2j}), turning exp(lim G - log|z - t|) into
    t^{-log t/log q} prod(1-q^{2j})^2 / prod(1-t^2 q^{2j})(1-q^{2j+2}/t^2).
    The annulus gap scales like the square of the dual nome
    exp(pi^2/log q), far below double resolution for fat tori, which is
    why this route exists.
    """
    import mpmath as mp

    with mp.workdps(digits):
        qm, tm = mp.mpf(q), mp.mpf(t)
        floor = mp.mpf(10) ** (-digits - 10)
        u = -mp.log(tm) ** 2 / mp.log(qm)
        j = 1
        while True:
            f = qm ** (2 * j)
            if f < floor:
                break
            u += 2 * mp.log1p(-f)
            j += 1
        j = 0
        while True:
            f1 = tm * tm * qm ** (2 * j)
            f2 = (qm / tm) ** 2 * qm ** (2 * j)
            if f1 < floor and f2 < floor:
                break
            u -= mp.log1p(-f1) + mp.log1p(-f2)
            j += 1
        cb = mp.exp(u)

        bv = 1 / (2 * mp.pi * tm * tm * mp.log(1 / qm))
        k = 0
        while True:
            term = (k + 1) * tm ** (2 * k) / (mp.pi * (1 - qm ** (2 * k + 2)))
            bv += term
            if k > 2 and term < floor:
                break
            k += 1
        k = 2
        while True:
            term = (1 - k) * tm ** (-2 * k) / (mp.pi * (1 - qm ** (2 - 2 * k)))
            bv += term
            if k > 2 and abs(term) < floor:
                break
            k += 1

        gap = mp.pi * bv - cb * cb
        bound = mp.mpf(10) ** (5 - digits) * (mp.pi * bv + cb * cb)
        return float(cb), float(bv), float(gap), float(bound)


def suita_check(dom, z0):
    """Evaluate pi B(z0) - c_beta(z0)^2 with an error budget.

    The disc is the equality case: the gap must vanish to 1e-9. On the
    annulus the gap must clear the combined truncation and roundoff bound
    strictly; when double precision cannot separate the two (the gap dies
    like the squared dual nome as q grows) the computation escalates to
    an arbitrary-precision pass sized from that scaling law.
    """
    _require_interior(dom, z0)
    r = abs(complex(z0))
    if dom.kind == "disc":
        cb, cb_err = _capacity_and_error(dom, z0)
        bv = bergman(dom, z0)
        bound = 2.0 * cb * cb_err + 1e-10 * math.pi * bv
        gap = math.pi * bv - cb * cb
        if abs(gap) > 1e-9 * max(1.0, cb * cb):
            raise InternalConsistencyError(
                f"disc gap {gap!r} exceeds the equality tolerance")
        return SuitaRecord(z0=complex(z0), c_beta=cb, bergman=bv, gap=gap,
                           truncation_error_bound=bound)

    cb, cb_err = _capacity_direct(dom, z0)
    bv, tail = _annulus_bergman(dom.q, dom.n_series, r)
    scale = math.pi * bv + cb * cb
    bound = math.pi * tail + 2.0 * cb * cb_err + 1e-14 * scale
    gap = math.pi * bv - cb * cb
    if gap <= bound:
        digits = 30 + int(8.6 / abs(math.log(dom.q)))
        for _ in range(4):
            cb, bv, gap, bound = _suita_annulus_mp(dom.q, r, digits)
            if gap > bound:
                break
            digits *= 2
    if gap <= bound:
        raise InternalConsistencyError(
            f"annulus gap {gap!r} does not clear the error bound {bound!r}")
    return SuitaRecord(z0=complex(z0), c_beta=cb, bergman=bv, gap=gap,
                       truncation_error_bound=bound)


def suita_sweep(qs=(0.3, 0.5, 0.7), fractions=(0.25, 0.5, 0.75), n_series=240):
    """Suita records over a grid of annuli and radii, disc rows first.

    Returns (label, q, record) tuples ready for delimited output.
    """
    rows = [("disc", 0.0, suita_check(unit_disc(), z0))
            for z0 in (0.0, 0.3, 0.6)]
    for q in qs:
        dom = annulus(q, n_series)
        for f in fractions:
            z0 = q + f * (1.0 - q)
            rows.append(("annulus", q, suita_check(dom, z0)))
    return rows


def analytic_capacity_disc(z0, dom=None):
    """c_B(z0) on the unit disc via the Mobius extremal function.

    The normalized competitor (z - z0)/((1 - conj(z0) z)) has derivative
    1/(1 - |z0|^2) at z0 and modulus 1 on the boundary, so
    c_B = 1/(1 - |z0|^2); the lemma's equality with c_beta (the disc has
    |g| = e^G for g the Mobius factor itself) is asserted against the
    extrapolation route.
    """
    if dom is not None and dom.kind != "disc":
        raise UnsupportedDomainError(
            "analytic capacity needs a single-valued |g| = e^G; "
            "the annulus has none")
    z0 = complex(z0)
    if abs(z0) >= 1.0:
        raise DomainError("point must be interior to the unit disc")
    c_b = 1.0 / (1.0 - abs(z0) ** 2)
    c_beta = log_capacity(unit_disc(), z0)
    if abs(c_b - c_beta) > 1e-10 * c_beta:
        raise InternalConsistencyError(
            f"analytic capacity {c_b!r} vs logarithmic {c_beta!r}")
    if c_beta < c_b - 1e-12 * c_b:
        raise InternalConsistencyError("c_beta >= c_B must hold")
    return c_b


def _l_kernel_real(q, n_terms, z, t):
    # pi L = 1/(z-t)^2 - 1/(2 z t log q)
    #        + sum n q^{2n} (z^{n-1} t^{-n-1} + t^{n-1} z^{-n-1})/(1 - q^{2n}),
    # grouped as (q^2/t)^n and (q^2/z)^n so no factor ever exceeds 1
    n = np.arange(1, n_terms + 1)
    q2n = q ** (2.0 * n)
    c = n / (1.0 - q2n)
    series = np.sum(c * ((q * q / t) ** n * z ** (n - 1) / t
                         + (q * q / z) ** n * t ** (n - 1.0) / z))
    return (1.0 / (z - t) ** 2
            - 1.0 / (2.0 * z * t * math.log(q)) + series) / math.pi


def l_kernel(dom, z, t):
    """Adjoint kernel (2/pi) d^2 G / dz dt, Wirtinger in both slots.

    The 1/(pi (z - t)^2) singular part is carried analytically; the series
    remainder is holomorphic across z = t, symmetric under z <-> t, and
    vanishes as q -> 0, recovering the disc kernel. Rotation reduces any
    source to the positive real axis, picking up the e^{-2i arg t} cocycle.
    """
    z, t = complex(z), complex(t)
    _require_interior(dom, z)
    _require_interior(dom, t, "source")
    if z == t:
        raise SingularityError("adjoint kernel pole at z = t")
    if dom.kind == "disc":
        return 1.0 / (math.pi * (z - t) ** 2)
    phase = cmath.exp(-1j * cmath.phase(t))
    return phase * phase * _l_kernel_real(dom.q, dom.n_series, z * phase, abs(t))


def _winding(vals):
    ang = np.unwrap(np.angle(np.asarray(vals)))
    return (ang[-1] - ang[0]) / (2.0 * math.pi)


def _circle_winding(dom, center, radius, t, n_nodes):
    th = np.linspace(0.0, 2.0 * math.pi, n_nodes + 1)
    pts = center + radius * np.exp(1j * th)
    vals = [l_kernel(dom, p, t) for p in pts]
    return _winding(vals)


def l_zero_count(dom, t, n_nodes=4096):
    """Zeros of z -> L(z, t) by the argument principle on a keyhole.

    The contour is the domain boundary pulled inward plus a small circle
    around t excluding the double pole; the winding sum is then exactly
    the zero count. Disc count is 0, the annulus count is 1.
    """
    t = complex(t)
    _require_interior(dom, t, "source")
    if dom.kind == "disc":
        edge = 1.0 - abs(t)
        w = (_circle_winding(dom, 0.0, 1.0 - 0.05 * edge, t, n_nodes)
             - _circle_winding(dom, t, 0.25 * edge, t, n_nodes))
    else:
        edge = min(1.0 - abs(t), abs(t) - dom.q)
        w = (_circle_winding(dom, 0.0, 1.0 - 0.01 * (1.0 - dom.q), t, n_nodes)
             - _circle_winding(dom, 0.0, dom.q + 0.01 * (1.0 - dom.q), t, n_nodes)
             - _circle_winding(dom, t, 0.25 * edge, t, n_nodes))
    count = round(w)
    if abs(w - count) > 1e-3:
        raise InternalConsistencyError(
            f"winding {w!r} is not close to an integer; refine the contour")
    return int(count)

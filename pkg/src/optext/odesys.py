"""Closed-form solution of the (s, u) system, residual checkers, mollifiers,
and the boundary-splicing construction.

The system is
    1)  (s + s'^2 / (u'' s - s'')) e^{u - t} c(t) = 1
    2)  s' - s u' = 1
and its solution is algebraic in the cumulative integrals of c e^{-t}:
with D(t) = a + int_{-A}^t c e^{-t1} dt1 and
N(t) = a (t + A) + t D-integral - first moment + b, one has u = -log D and
s = N / D.  Everything here evaluates those two cumulatives on demand from a
shared anchored sweep, so u, s, and both checkers stay mutually consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    AdmissibilityError,
    ConstructionError,
    InternalConsistencyError,
    NonIntegrableWeightError,
    PositivityViolationError,
)
from .quadrature import adaptive, gl_nodes
from .weights import (
    WeightSpec,
    boundary_value,
    check_cA,
    check_cA_delta,
    default_grid,
    demailly_weight,
    make_weight,
    pointwise_margins,
    smooth_bump,
    weight_moment,
    STRICTNESS_FLOOR,
)

_LD = np.longdouble


class _CumulativeEngine:
    """I(t) = int_{-A}^t c e^{-s} ds and M1(t) = int s c e^{-s} ds on demand.

    Anchored longdouble sweep over a reference grid; arbitrary points are
    reached by Gauss-Legendre panels from the nearest anchor, chained in
    geometrically growing spans so far-tail evaluations stay accurate.
    """

    def __init__(self, w, anchors, a, b):
        from .quadrature import cumulative_weighted

        self.w = w
        self.lb = w.lower_bound
        self.a = _LD(a)
        self.b = _LD(b)
        anchors = np.asarray(anchors, dtype=np.float64)
        f = lambda t: w.weighted(t, dtype=_LD)
        I, M1 = cumulative_weighted(f, self.lb, anchors, order=32, dtype=_LD)
        self.anchor_ts = anchors
        self.anchor_tl = anchors.astype(_LD)
        self.anchor_I = I
        self.anchor_M1 = M1
        self.u = self._make_u()
        self.s = self._make_s()

    def _panels_from(self, ta, t):
        # signed increments int_ta^t g and int_ta^t sigma g, chained panels
        x, wt = gl_nodes(32)
        x = x.astype(_LD)
        wt = wt.astype(_LD)
        dI = _LD(0.0)
        dM = _LD(0.0)
        pos = ta
        sgn = _LD(1.0) if t >= ta else _LD(-1.0)
        remaining = abs(t - pos)
        guard = 0
        while remaining > 0:
            step = min(remaining, max(_LD(0.5), _LD(0.5) * abs(pos)))
            nxt = pos + sgn * step
            half = (nxt - pos) / _LD(2.0)
            mid = (nxt + pos) / _LD(2.0)
            nodes = mid + half * x
            g = self.w.weighted(nodes, dtype=_LD)
            dI += half * np.dot(wt, g)
            dM += half * np.dot(wt, g * nodes)
            pos = nxt
            remaining = abs(t - pos)
            guard += 1
            if guard > 4096:
                raise InternalConsistencyError("cumulative chain did not terminate")
        return dI, dM

    def cumulative(self, ts):
        """(I, M1) in longdouble at arbitrary interior points."""
        ts64 = np.atleast_1d(np.asarray(ts, dtype=np.float64))
        tl = ts64.astype(_LD)
        idx = np.searchsorted(self.anchor_ts, ts64, side="right") - 1
        idx = np.clip(idx, 0, self.anchor_ts.size - 1)
        I = np.empty(ts64.size, dtype=_LD)
        M1 = np.empty(ts64.size, dtype=_LD)
        floor = _LD(1e-3) * self.anchor_I[-1]
        for j in range(ts64.size):
            k = int(idx[j])
            dI, dM = self._panels_from(self.anchor_tl[k], tl[j])
            I[j] = self.anchor_I[k] + dI
            M1[j] = self.anchor_M1[k] + dM
            if I[j] < floor:
                I[j], M1[j] = self._direct_slice(tl[j])
        return I, M1

    def _direct_slice(self, t):
        # the mass below t is a negligible fraction of the sweep total, so
        # the anchored route's absolute error dominates the value; integrate
        # the slice itself (both integrands one-signed, no cancellation)
        from .quadrature import adaptive

        t64 = float(t)
        lo = float(self.lb) if np.isfinite(self.lb) else -np.inf
        g = lambda x: float(self.w.weighted(x))
        Iv = _LD(adaptive(g, lo, t64))
        Sv = _LD(adaptive(lambda x: (t64 - x) * g(x), lo, t64))
        # stored so that t I - M1 telescopes back to the shifted moment Sv
        return Iv, t * Iv - Sv

    def DN(self, ts):
        """D = a + I and N = a(t - lb) + t I - M1 + b, longdouble."""
        ts = np.atleast_1d(np.asarray(ts, dtype=_LD))
        I, M1 = self.cumulative(ts)
        D = self.a + I
        N = ts * I - M1 + self.b
        if np.isfinite(self.lb):
            N = N + self.a * (ts - _LD(self.lb))
        return D, N

    def _make_u(self):
        def u(ts):
            ts = np.asarray(ts, dtype=np.float64)
            D, _ = self.DN(ts)
            return (-np.log(D)).astype(np.float64).reshape(ts.shape)
        return u

    def _make_s(self):
        def s(ts):
            ts = np.asarray(ts, dtype=np.float64)
            D, N = self.DN(ts)
            return (N / D).astype(np.float64).reshape(ts.shape)
        return s

    def owns(self, sol):
        return sol.u is self.u and sol.s is self.s


@dataclass(frozen=True)
class OdeSolution:
    """Solution pair (u, s) with its defining constants.

    a = (1/delta) c_A(-A) e^A and b = a/delta for finite delta; both vanish
    in the integral-only regime (delta None).  total_constant is the factor
    a + int c e^{-t} dt the extension bound is built from.
    """

    weight: WeightSpec
    upper_a: float
    delta: Optional[float]
    a: float
    b: float
    u: Callable[[np.ndarray], np.ndarray]
    s: Callable[[np.ndarray], np.ndarray]
    total_constant: float
    engine: Optional[_CumulativeEngine] = None
    grid: tuple = ()

    def table(self, ts):
        """Three-column (t, u, s) array for export."""
        ts = np.asarray(ts, dtype=np.float64)
        return np.column_stack([ts, self.u(ts), self.s(ts)])


def solve_ode(w, delta=None, grid=None, verify=True):
    """Build the closed-form OdeSolution for an admissible weight.

    delta None selects the a = b = 0 regime (no boundary term).  verify=False
    skips the admissibility gate so diagnostic runs can inspect the solution
    attached to a failing weight.
    """
    if delta is not None:
        delta = float(delta)
        if delta <= 0:
            raise ValueError("delta must be positive")
        if verify:
            rep = check_cA_delta(w, delta)
            if not rep.holds_ca_delta:
                raise AdmissibilityError(
                    f"{w.name} fails the shifted inequality at t = {rep.worst_t}",
                    violating_t=rep.worst_t)
        bv = boundary_value(w)
        a = bv / delta
        b = a / delta
    else:
        if verify:
            rep = check_cA(w)
            if not rep.holds_ca:
                raise AdmissibilityError(
                    f"{w.name} fails the base inequality at t = {rep.worst_t}",
                    violating_t=rep.worst_t)
        a = 0.0
        b = 0.0
    anchors = np.asarray(grid, dtype=np.float64) if grid is not None else default_grid(w, 384)
    engine = _CumulativeEngine(w, anchors, a, b)
    try:
        total = a + weight_moment(w, 0)
    except NonIntegrableWeightError:
        # u and s exist fine; only the extension bound degenerates
        total = float("inf")
    return OdeSolution(
        weight=w,
        upper_a=w.upper_a,
        delta=delta,
        a=a,
        b=b,
        u=engine.u,
        s=engine.s,
        total_constant=total,
        engine=engine,
        grid=tuple(float(t) for t in anchors),
    )


def _native_derivatives(sol, ts):
    """(u', u'', s', s'', D, N, g) for a solution still wired to its engine.

    First derivatives come from the closed form (D' = c e^{-t} exactly);
    second derivatives use the weight's own derivative when exposed, else
    increment panels.  Nothing here simplifies through the identities under
    test, otherwise the residuals would be checking 0 = 0.
    """
    eng = sol.engine
    w = sol.weight
    tl = np.asarray(ts, dtype=_LD)
    D, N = eng.DN(tl)
    g = w.weighted(tl, dtype=_LD)
    u1 = -g / D
    s1 = 1.0 - N * g / (D * D)
    if w.deriv is not None:
        c = np.asarray(w.eval(tl), dtype=_LD)
        cp = np.asarray(w.deriv(tl), dtype=_LD)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            Dpp = (cp - c) * np.exp(-tl)
        bad = ~np.isfinite(Dpp)
        if np.any(bad):
            # factored overflow far out; derivative of the log channel
            hh = _LD(1e-6) * (1.0 + np.abs(tl[bad]))
            gp = (w.weighted(tl[bad] + hh, dtype=_LD)
                  - w.weighted(tl[bad] - hh, dtype=_LD)) / (2.0 * hh)
            Dpp[bad] = gp
        u2 = (g / D) ** 2 - Dpp / D
        s2 = -g / D - N * Dpp / (D * D) + 2.0 * N * g * g / (D ** 3)
    else:
        u2, s2 = _increment_second(sol, tl, D, N, g)[2:]
    return u1, u2, s1, s2, D, N, g


def _increment_pair(eng, t, h):
    """P0 = int_t^{t+h} g and P1 = int_t^{t+h} (sigma - t) g, signed in h."""
    x, wt = gl_nodes(24)
    x = x.astype(_LD)
    wt = wt.astype(_LD)
    half = h / _LD(2.0)
    mid = t + half
    nodes = mid[:, None] + half[:, None] * x[None, :]
    g = eng.w.weighted(nodes.ravel(), dtype=_LD).reshape(nodes.shape)
    P0 = (g @ wt) * half
    P1 = (((nodes - t[:, None]) * g) @ wt) * half
    return P0, P1


def _increment_second(sol, tl, D, N, g):
    """Derivatives of u and s from direct integral increments.

    u(t+h) - u(t) = -log1p(dI/D) and the s difference collapses to a small
    bracket, so no large quantities are ever subtracted; this keeps second
    differences meaningful far beyond where raw finite differences of u and
    s drown in rounding.
    """
    eng = sol.engine
    h = _LD(1e-5) * (1.0 + np.abs(tl))
    lb = eng.lb
    if np.isfinite(lb):
        # near a finite boundary with a = 0 the log-potential has a pole in
        # its third derivative, so the step must shrink with the distance;
        # the increments are exact integrals, making tiny steps harmless
        h = np.minimum(h, _LD(1e-5) * (tl - _LD(lb)))
    P0p, P1p = _increment_pair(eng, tl, h)
    P0m, P1m = _increment_pair(eng, tl, -h)
    dup = -np.log1p(P0p / D)
    dum = -np.log1p(P0m / D)
    dNp = h * (D + P0p) - P1p
    dNm = -h * (D + P0m) - P1m
    dsp = (dNp * D - N * P0p) / ((D + P0p) * D)
    dsm = (dNm * D - N * P0m) / ((D + P0m) * D)
    u1 = (dup - dum) / (2.0 * h)
    s1 = (dsp - dsm) / (2.0 * h)
    u2 = (dup + dum) / (h * h)
    s2 = (dsp + dsm) / (h * h)
    return u1, s1, u2, s2


def _wrapped_derivatives(sol, ts):
    """Plain longdouble central differences on opaque u, s callables."""
    tl = np.asarray(ts, dtype=_LD)
    h = _LD(1e-5) * (1.0 + np.abs(tl))
    uf = lambda t: np.asarray(sol.u(np.asarray(t, dtype=np.float64)), dtype=_LD)
    sf = lambda t: np.asarray(sol.s(np.asarray(t, dtype=np.float64)), dtype=_LD)
    up, u0, um = uf(tl + h), uf(tl), uf(tl - h)
    sp, s0, sm = sf(tl + h), sf(tl), sf(tl - h)
    u1 = (up - um) / (2.0 * h)
    s1 = (sp - sm) / (2.0 * h)
    u2 = (up - 2.0 * u0 + um) / (h * h)
    s2 = (sp - 2.0 * s0 + sm) / (h * h)
    return u1, u2, s1, s2, u0, s0


class ResidualReport(tuple):
    """Max-residual pair (system equation, structure equation)."""

    __slots__ = ()

    def __new__(cls, eq_system, eq_structure):
        return super().__new__(cls, (float(eq_system), float(eq_structure)))

    @property
    def eq_system(self):
        return self[0]

    @property
    def eq_structure(self):
        return self[1]


def _interior_grid_guard(sol, grid):
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("residual grid is empty")
    lb = sol.weight.lower_bound
    if sol.engine is not None and sol.engine.owns(sol):
        # native increments shrink their step toward the boundary, so any
        # strictly interior grid is fine
        if np.isfinite(lb) and np.any(grid <= lb):
            raise ValueError("grid must stay inside the domain")
        return grid
    h = 1e-5 * (1.0 + np.abs(grid))
    if np.isfinite(lb) and np.any(grid - h <= lb):
        raise ValueError("grid must stay an FD step inside the domain")
    return grid


def residual_check(sol, grid):
    """Max absolute residuals of the two defining equations over the grid.

    Native solutions are differentiated through their integral engine (or the
    weight's own derivative); foreign or perturbed callables fall back to
    central differences with step 1e-5 (1 + |t|).
    """
    grid = _interior_grid_guard(sol, grid)
    native = sol.engine is not None and sol.engine.owns(sol)
    tl = grid.astype(_LD)
    if native:
        u1a, u2a, s1a, s2a, D, N, g = _native_derivatives(sol, tl)
        s0 = N / D
        factor = g / D  # e^{u - t} c(t) evaluated without leaving log space
        Q = u2a * s0 - s2a
        # far in a tail s' decays below quadrature resolution and the sign
        # of Q is no longer numerically meaningful; there the construction
        # identity Q = (g/D) s' turns s'^2/Q into s' D/g, so the first
        # equation is evaluated in that division-free form instead
        deg = np.abs(np.asarray(s1a, dtype=np.float64)) <= 1e-10
        bad = (Q <= 0) & ~deg
        if np.any(bad):
            raise PositivityViolationError(
                "u'' s - s'' is not positive on the grid",
                violating_t=float(grid[np.argmax(bad)]))
        res1 = np.empty_like(s0)
        nd = ~deg
        res1[nd] = np.abs((s0[nd] + s1a[nd] * s1a[nd] / Q[nd]) * factor[nd] - 1.0)
        res1[deg] = np.abs(s0[deg] * factor[deg] + s1a[deg] - 1.0)
        # the structure equation gets independent increment derivatives;
        # feeding it the same closed forms would verify an identity
        u1i, s1i, _, _ = _increment_second(sol, tl, D, N, g)
        res2 = np.abs(s1i - s0 * u1i - 1.0)
    else:
        u1, u2, s1, s2, u0, s0 = _wrapped_derivatives(sol, tl)
        Q = u2 * s0 - s2
        band = _fd_noise_band(tl, u0, s0)
        bad = Q < -band
        if np.any(bad):
            raise PositivityViolationError(
                "u'' s - s'' is not positive on the grid",
                violating_t=float(grid[np.argmax(bad)]))
        with np.errstate(over="ignore", under="ignore"):
            factor = np.exp(u0) * sol.weight.weighted(tl, dtype=_LD)
        # the first equation divides by Q; where |Q| sits inside the FD
        # noise band the quotient is meaningless, so those points are left
        # out of the max (the structure equation never divides and stays)
        ok = Q > band
        res1 = (np.abs((s0[ok] + s1[ok] * s1[ok] / Q[ok]) * factor[ok] - 1.0)
                if np.any(ok) else np.zeros(1, dtype=_LD))
        res2 = np.abs(s1 - s0 * u1 - 1.0)
    return ResidualReport(float(np.max(res1)), float(np.max(res2)))


def _fd_noise_band(tl, u0, s0):
    # second differences of float64-valued callables carry value noise
    # ~eps max(1, |f|) amplified by 4/h^2; 64x covers evaluation chains
    h = _LD(1e-5) * (1.0 + np.abs(tl))
    eps = _LD(64.0 * np.finfo(np.float64).eps)
    du = eps * np.maximum(_LD(1.0), np.abs(u0))
    ds = eps * np.maximum(_LD(1.0), np.abs(s0))
    return 4.0 * (np.abs(s0) * du + ds) / (h * h)


def positivity_check(sol, grid):
    """True iff s' > 0 and u'' s - s'' > 0 across the grid.

    Also asserts the sign agreement of the two quantities (they differ by
    the factor -u' > 0); disagreement beyond noise means the solution and
    its engine got out of sync.
    """
    grid = _interior_grid_guard(sol, grid)
    tl = grid.astype(_LD)
    native = sol.engine is not None and sol.engine.owns(sol)
    if native:
        u1, u2, s1, s2, D, N, g = _native_derivatives(sol, tl)
        s0 = N / D
    else:
        u1, u2, s1, s2, u0, s0 = _wrapped_derivatives(sol, tl)
    Q = u2 * s0 - s2
    s1f = np.asarray(s1, dtype=np.float64)
    Qf = np.asarray(Q, dtype=np.float64)
    s0f = np.abs(np.asarray(s0, dtype=np.float64))
    # dead bands: quadrature noise, not longdouble eps, limits how small a
    # slope can be sign-resolved (s' -> 0 in the tails of admissible weights)
    band_s = 1e-10 * np.maximum(1.0, s0f)
    band_q = 1e-10 * np.maximum(1.0, s0f)
    if not native:
        band_q = np.maximum(
            band_q, np.asarray(_fd_noise_band(tl, u0, s0), dtype=np.float64))
        band_s = np.maximum(band_s, 1e-9 * np.maximum(1.0, s0f))
    resolved = (np.abs(s1f) > band_s) & (np.abs(Qf) > band_q)
    if np.any(np.sign(s1f[resolved]) != np.sign(Qf[resolved])):
        j = int(np.where(resolved)[0][
            int(np.argmax(np.sign(s1f[resolved]) != np.sign(Qf[resolved])))])
        raise InternalConsistencyError(
            f"sign(s') and sign(u'' s - s'') disagree at t = {grid[j]}")
    return bool(np.all(s1f > -band_s) and np.all(Qf > -band_q))


_DEMAILLY_QUOTED_TOL = 1e-8


def demailly_quoted_s(r, ts):
    """The closed form quoted alongside the construction: not the canonical
    solution; kept verbatim for the comparison the lower-bound check makes."""
    ts = np.asarray(ts, dtype=np.float64)
    return ((1.0 + 1.0 / r) * ts - np.log(ts) - 1.0) / (2.0 - 1.0 / ts)


def demailly_s_lower_bound(r, grid):
    """Compare the solved s against the quoted closed form and t/2 bound.

    Returns True only when the canonical s matches the quoted formula within
    1e-8 everywhere and clears t/2.  The quoted formula does not satisfy the
    b = a/delta boundary data (its value at the left endpoint is not 1/delta),
    so the comparison honestly reports the mismatch.
    """
    r = float(r)
    if r <= 0:
        raise ValueError("r must be positive")
    grid = np.asarray(grid, dtype=np.float64)
    if np.any(grid <= 2.0 * r):
        raise ValueError("grid must sit inside (2r, inf)")
    w = demailly_weight(r)
    sol = solve_ode(w, delta=1.0 / r)
    s_vals = sol.s(grid)
    quoted = demailly_quoted_s(r, grid)
    matches = bool(np.max(np.abs(s_vals - quoted)) <= _DEMAILLY_QUOTED_TOL
                   * np.maximum(1.0, np.max(np.abs(quoted))))
    dominates = bool(np.all(s_vals >= grid / 2.0))
    return matches and dominates


def splice_weight(w, A_prime, sample_count=160):
    """Shorten the domain to some (-A'', inf) with a steep boundary stub.

    The returned weight equals w on [-A', inf); below, the weighted integrand
    continues as F0 e^{-kappa (t + A')}, and (A'', kappa) are searched so the
    delta''-form total reproduces the original integral exactly and the
    shifted inequality stays strict.  A'' moves by bisection toward A';
    kappa by golden section on a log scale.
    """
    A = w.upper_a
    A_prime = float(A_prime)
    if A_prime >= A:
        raise ValueError("need A' < A")
    base = check_cA(w)
    if not base.holds_ca:
        raise AdmissibilityError("splice needs an admissible input",
                                 violating_t=base.worst_t)
    total_w = weight_moment(w, 0)
    F0 = float(w.weighted(np.asarray([-A_prime]))[0])
    scalar_g = lambda t: float(w.weighted(np.asarray([t]))[0])
    m_gap = adaptive(scalar_g, w.lower_bound, -A_prime)
    if m_gap <= 0:
        raise ConstructionError("no mass below -A' to relocate")
    m_head = total_w - m_gap

    def candidate(W, y):
        # y = kappa * W; stub mass F0 W (e^y - 1)/y, boundary value F0 e^y
        kappa = y / W
        stub = F0 * W * float(np.expm1(y)) / y if y != 0 else F0 * W
        a2 = m_gap - stub
        if a2 <= 0:
            return None
        bv2 = F0 * math.exp(y)
        delta2 = bv2 / a2
        b2 = a2 / delta2
        lb2 = -(A_prime + W)

        def ev(t):
            t = np.asarray(t, dtype=np.float64)
            out = np.empty_like(t)
            hi = t >= -A_prime
            out[hi] = np.asarray(w.eval(t[hi]), dtype=np.float64)
            out[~hi] = F0 * np.exp(t[~hi] - kappa * (t[~hi] + A_prime))
            return out

        dv = None
        if w.deriv is not None:
            def dv(t):
                t = np.asarray(t, dtype=np.float64)
                out = np.empty_like(t)
                hi = t >= -A_prime
                out[hi] = np.asarray(w.deriv(t[hi]), dtype=np.float64)
                out[~hi] = (1.0 - kappa) * F0 * np.exp(
                    t[~hi] - kappa * (t[~hi] + A_prime))
                return out

        def lv(t):
            t = np.asarray(t)
            out = np.empty_like(t)
            hi = t >= -A_prime
            out[hi] = np.asarray(w.log_weighted(t[hi]), dtype=t.dtype) + t[hi]
            out[~hi] = math.log(F0) + t[~hi] - kappa * (t[~hi] + A_prime)
            return out

        w2 = WeightSpec(f"{w.name}|stub(A''={-lb2:g})", lb2, ev, deriv=dv,
                        log_eval=lv)
        return w2, delta2, a2, b2

    def sample_grid(W):
        lb2 = -(A_prime + W)
        eps0 = 1e-7 * (1.0 + abs(lb2))
        stub_pts = lb2 + np.geomspace(eps0, W, sample_count // 3)
        head_hi = max(-A_prime + 8.0, 8.0)
        head_pts = np.linspace(-A_prime + 1e-6, head_hi, sample_count // 3)
        far_pts = head_hi + np.geomspace(1.0, 64.0, sample_count // 3)
        return np.unique(np.concatenate([stub_pts, head_pts, far_pts]))

    def min_margin(W, y):
        cand = candidate(W, y)
        if cand is None:
            return -math.inf, None
        w2, delta2, a2, b2 = cand
        from .weights import _sweep_margins
        margins = _sweep_margins(w2, sample_grid(W), a2, b2)
        return float(np.min(margins)), cand

    gold = (math.sqrt(5.0) - 1.0) / 2.0
    W = (A - A_prime) / 2.0 if np.isfinite(A) else 1.0
    budget = 200
    for _ in range(24):
        if budget <= 0:
            break
        # keep the flat-kappa stub feasible before spending search budget
        if F0 * W >= m_gap:
            W *= 0.5
            continue
        y_hi_cap = math.log(max(m_gap / (F0 * W), 1.0 + 1e-9)) + 4.0
        lo, hi = -6.0, y_hi_cap  # y searched on log-ish span via its exponent
        f_cache = {}

        def eval_y(ly):
            if ly not in f_cache:
                f_cache[ly] = min_margin(W, math.exp(ly))
            return f_cache[ly]

        a_pt, b_pt = lo, hi
        c_pt = b_pt - gold * (b_pt - a_pt)
        d_pt = a_pt + gold * (b_pt - a_pt)
        fc, fd = eval_y(c_pt)[0], eval_y(d_pt)[0]
        iters = 0
        while (b_pt - a_pt) > 1e-3 and iters < 48 and budget > 0:
            if fc >= fd:
                b_pt, d_pt, fd = d_pt, c_pt, fc
                c_pt = b_pt - gold * (b_pt - a_pt)
                fc = eval_y(c_pt)[0]
            else:
                a_pt, c_pt, fc = c_pt, d_pt, fd
                d_pt = a_pt + gold * (b_pt - a_pt)
                fd = eval_y(d_pt)[0]
            iters += 1
            budget -= 1
        best_ly = c_pt if fc >= fd else d_pt
        best_margin, cand = eval_y(best_ly)
        if cand is not None and best_margin > STRICTNESS_FLOOR:
            w2, delta2, a2, b2 = cand
            rep = check_cA_delta(w2, delta2)
            total2 = rep.boundary_value / delta2 + rep.total_integral
            if (rep.holds_ca_delta
                    and abs(total2 - total_w) <= 1e-8 * max(1.0, abs(total_w))):
                return w2, delta2
        W *= 0.5
    raise ConstructionError(
        f"no boundary stub for {w.name} at A' = {A_prime} within budget")


# ---------------------------------------------------------------------------
# mollifiers


@dataclass(frozen=True)
class Mollifier:
    """Smooth increasing convex ramp v and its piecewise-linear limit."""

    t0: float
    eps: float
    v: Callable[[np.ndarray], np.ndarray]
    v_prime: Callable[[np.ndarray], np.ndarray]
    v_second: Callable[[np.ndarray], np.ndarray]
    b_limit: Callable[[np.ndarray], np.ndarray]
    b_limit_prime: Callable[[np.ndarray], np.ndarray]


def make_mollifier(t0, eps):
    """Convolution ramp: v(t) = t above -t0 - eps, constant below -t0 - 1 + eps.

    v'' is the flat indicator profile smoothed by a compact bump kernel; the
    kernel half-width is capped so 0 <= v'' <= 2 holds right up to eps = 1/4.
    """
    t0 = float(t0)
    eps = float(eps)
    if not (0.0 < eps < 0.25):
        raise ValueError("need 0 < eps < 1/4")
    s = 0.5 * min(eps / 4.0, 0.25 - eps)
    aL = -t0 - 1.0 + eps + s
    aR = -t0 - eps - s
    P = 1.0 / (aR - aL)
    mu = 0.5 * (aL + aR)

    x64, w64 = gl_nodes(64)
    norm = float(np.dot(w64, smooth_bump(x64)))  # int_{-1}^{1} bump

    def rho(y):
        return smooth_bump(np.asarray(y) / s) / (s * norm)

    # K = kernel CDF, T = its antiderivative, U = T's antiderivative;
    # all three have closed continuations outside the kernel support
    def K(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        out[x >= s] = 1.0
        mid = (x > -s) & (x < s)
        if np.any(mid):
            xm = x[mid]
            half = (xm + s) / 2.0
            nodes = (-s + half[:, None]) + half[:, None] * x64[None, :]
            out[mid] = (rho(nodes) @ w64) * half
        return out

    def T(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        hi = x >= s
        out[hi] = x[hi]
        mid = (x > -s) & (x < s)
        if np.any(mid):
            xm = x[mid]
            # T(x) = int (x - y)+ rho(y) dy, split exactly at the kink y = x
            half = (xm + s) / 2.0
            nodes = (-s + half[:, None]) + half[:, None] * x64[None, :]
            out[mid] = (((xm[:, None] - nodes) * rho(nodes)) @ w64) * half
        return out

    m2 = float((np.square(s * x64) * smooth_bump(x64)) @ w64 / norm)

    def U(x):
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(x)
        hi = x >= s
        out[hi] = 0.5 * (x[hi] * x[hi] + m2)
        mid = (x > -s) & (x < s)
        if np.any(mid):
            xm = x[mid]
            half = (xm + s) / 2.0
            nodes = (-s + half[:, None]) + half[:, None] * x64[None, :]
            sq = 0.5 * np.square(xm[:, None] - nodes)
            out[mid] = ((sq * rho(nodes)) @ w64) * half
        return out

    def v_second(t):
        t = np.asarray(t, dtype=np.float64)
        return P * (K(t - aL) - K(t - aR))

    def v_prime(t):
        t = np.asarray(t, dtype=np.float64)
        return np.clip(P * (T(t - aL) - T(t - aR)), 0.0, 1.0)

    def v(t):
        t = np.asarray(t, dtype=np.float64)
        return P * (U(t - aL) - U(t - aR)) + mu

    lo_knee = -t0 - 1.0
    hi_knee = -t0

    def b_anti(t):
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        ramp = (t > lo_knee) & (t < hi_knee)
        out[ramp] = 0.5 * np.square(t[ramp] - lo_knee)
        top = t >= hi_knee
        out[top] = (t[top] - hi_knee) + 0.5
        return out

    def b_limit(t):
        return b_anti(t) - b_anti(np.zeros(1))[0]

    def b_limit_prime(t):
        t = np.asarray(t, dtype=np.float64)
        return np.clip(t + t0 + 1.0, 0.0, 1.0)

    return Mollifier(t0=t0, eps=eps, v=v, v_prime=v_prime, v_second=v_second,
                     b_limit=b_limit, b_limit_prime=b_limit_prime)

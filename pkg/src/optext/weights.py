"""Weight functions c(t) on (-A, +inf), their admissibility checks, and the
catalog of named families.

A weight is admissible when the square of its cumulative weighted integral
strictly dominates the weighted integrand times the doubly cumulative
integral at every t (base inequality), or the boundary-shifted variant of
that inequality for a given delta > 0.  Both checks run off a single
cumulative sweep; the double integral comes from integration by parts,
J(t) = t*I(t) - M1(t), never from a nested quadrature.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    AdmissibilityError,
    BoundaryValueError,
    ConstructionError,
    InternalConsistencyError,
    LimitUndefinedError,
    NonIntegrableWeightError,
)
from .quadrature import (
    adaptive,
    chained_adaptive,
    cumulative_weighted,
    hunt_below,
    improper_weighted,
    richardson_limit,
    TRUNCATION_RATIO,
)

STRICTNESS_FLOOR = 1e-12


def _log1pexp(x):
    # log(1 + e^x), stable on both sides, dtype-preserving
    x = np.asarray(x)
    out = np.empty_like(x)
    pos = x > 0
    with np.errstate(over="ignore"):
        out[pos] = x[pos] + np.log1p(np.exp(-x[pos]))
        out[~pos] = np.log1p(np.exp(x[~pos]))
    return out


def _expit(x):
    # 1 / (1 + e^{-x}), stable, dtype-preserving
    x = np.asarray(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def smooth_bump(x):
    """C-infinity bump with support (-1, 1), peak value 1 at 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
    return out


def smooth_bump_deriv(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    one = 1.0 - xi * xi
    out[inside] = np.exp(1.0 - 1.0 / one) * (-2.0 * xi / (one * one))
    return out


@dataclass(frozen=True)
class WeightSpec:
    """A positive weight on (lower_bound, +inf); lower_bound is -A."""

    name: str
    lower_bound: float
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    log_eval: Optional[Callable[[np.ndarray], np.ndarray]] = None
    analytic_integral: Optional[float] = None
    integral_provenance: Optional[str] = None

    @property
    def upper_a(self) -> float:
        """A = -lower_bound (can be +inf)."""
        return -self.lower_bound

    def log_weighted(self, ts, k=0, dtype=np.float64):
        """log c(t) - (k+1) t, via the dedicated log channel when present."""
        ts = np.asarray(ts, dtype=dtype)
        if self.log_eval is not None:
            lc = np.asarray(self.log_eval(ts), dtype=dtype)
        else:
            with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                lc = np.log(np.asarray(self.eval(ts), dtype=dtype))
        return lc - (k + 1.0) * ts

    def weighted(self, ts, dtype=np.float64, k=0):
        """c(t) e^{-(k+1) t} at the given points.

        The factored product c * e^{-t} overflows long before the true value
        does when c grows exponentially; such entries are recomputed through
        log space.
        """
        ts = np.asarray(ts, dtype=dtype)
        shape = ts.shape
        ts = np.atleast_1d(ts)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            out = np.asarray(self.eval(ts), dtype=dtype) * np.exp(-(k + 1.0) * ts)
        bad = ~np.isfinite(out)
        if np.any(bad):
            with np.errstate(over="ignore", under="ignore", invalid="ignore"):
                out[bad] = np.exp(self.log_weighted(ts[bad], k=k, dtype=dtype))
        return out.reshape(shape)


def make_weight(name, lower_bound, eval, deriv=None, log_eval=None,
                analytic_integral=None, integral_provenance=None,
                probe_count=64):
    """Validated constructor: positivity probe plus a tail-decay estimate.

    Weights that fail the decay estimate (weighted integrand not heading to
    zero on the right) are rejected; the bump counterexample is built through
    the plain dataclass on purpose.
    """
    w = WeightSpec(name, float(lower_bound), eval, deriv=deriv,
                   log_eval=log_eval, analytic_integral=analytic_integral,
                   integral_provenance=integral_provenance)
    lb = w.lower_bound
    if np.isfinite(lb):
        probes = lb + np.geomspace(1e-8 * (1.0 + abs(lb)), 40.0, probe_count)
    else:
        probes = np.linspace(-40.0, 40.0, probe_count)
    vals = np.asarray(eval(probes), dtype=np.float64)
    if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
        raise ValueError(f"weight {name!r} must be positive and finite on samples")
    g = w.weighted(probes)
    peak = float(np.max(g))

    def tail_decays(start, direction):
        nonlocal peak
        pos = start
        seq = []
        for _ in range(40):
            pos = pos + direction * max(1.0, abs(pos))
            with np.errstate(over="ignore", invalid="ignore", under="ignore"):
                gv = float(w.weighted(np.asarray([pos]))[0])
            if not np.isfinite(gv):
                # factored evaluation overflowed (c huge, e^{-t} tiny);
                # judge by the finite samples collected so far
                break
            seq.append(gv)
            if gv < 1e-6 * peak:
                return True
            peak = max(peak, gv)
        if len(seq) >= 4 and all(b < a for a, b in zip(seq, seq[1:])):
            return seq[-1] < 1e-2 * peak
        return False

    if not tail_decays(float(probes[-1]), +1):
        raise NonIntegrableWeightError(
            f"weight {name!r}: weighted integrand shows no right-tail decay"
        )
    if not np.isfinite(lb) and not tail_decays(float(probes[0]), -1):
        raise NonIntegrableWeightError(
            f"weight {name!r}: weighted integrand shows no left-tail decay"
        )
    return w


# ---------------------------------------------------------------------------
# catalog


def const_weight(A=0.0):
    A = float(A)
    return make_weight(
        "const",
        lower_bound=-A,
        eval=lambda t: np.ones_like(np.asarray(t)),
        deriv=lambda t: np.zeros_like(np.asarray(t)),
        log_eval=lambda t: np.zeros_like(np.asarray(t)),
        analytic_integral=math.exp(A),
        integral_provenance="int_{-A}^inf e^{-t} dt = e^{A}",
    )


def ohsawa2_weight(m, eps):
    m = int(m)
    eps = float(eps)
    if m < 1 or eps <= 0:
        raise ValueError("need m >= 1 and eps > 0")

    def ev(t):
        return np.exp(-(m + eps) * _log1pexp(-np.asarray(t) / m))

    def dv(t):
        t = np.asarray(t)
        return ev(t) * ((m + eps) / m) * _expit(-t / m)

    closed = math.exp(
        math.lgamma(m + 1) + math.lgamma(eps) - math.lgamma(m + eps)
    )
    return make_weight(
        f"ohsawa2({m},{eps:g})",
        lower_bound=-np.inf,
        eval=ev,
        deriv=dv,
        log_eval=lambda t: -(m + eps) * _log1pexp(-np.asarray(t) / m),
        analytic_integral=closed,
        integral_provenance="Gamma(m+1)Gamma(eps)/Gamma(m+eps)",
    )


def concise_weight(eps):
    w = ohsawa2_weight(1, eps)
    return dataclasses.replace(
        w, name=f"concise({float(eps):g})",
        analytic_integral=1.0 / float(eps),
        integral_provenance="int_0^inf (1+u)^{-1-eps} du = 1/eps",
    )


def demailly_weight(r=1.0):
    r = float(r)
    if r <= 0:
        raise ValueError("need r > 0")

    def ev(t):
        t = np.asarray(t)
        return np.exp(t) / (t * t)

    def dv(t):
        t = np.asarray(t)
        return np.exp(t) * (t - 2.0) / (t * t * t)

    return make_weight(
        f"demailly({r:g})",
        lower_bound=2.0 * r,
        eval=ev,
        deriv=dv,
        log_eval=lambda t: np.asarray(t) - 2.0 * np.log(np.asarray(t)),
        analytic_integral=1.0 / (2.0 * r),
        integral_provenance="int_{2r}^inf t^{-2} dt = 1/(2r)",
    )


def dhp_weight(b, alpha):
    b = float(b)
    alpha = float(alpha)
    if not (0 < b <= 1) or alpha < 1:
        raise ValueError("need 0 < b <= 1 and alpha >= 1")

    def ev(t):
        return np.exp((1.0 - b) * np.asarray(t))

    def dv(t):
        return (1.0 - b) * np.exp((1.0 - b) * np.asarray(t))

    return make_weight(
        f"dhp({b:g},{alpha:g})",
        lower_bound=alpha,
        eval=ev,
        deriv=dv,
        log_eval=lambda t: (1.0 - b) * np.asarray(t),
        analytic_integral=math.exp(-b * alpha) / b,
        integral_provenance="int_alpha^inf e^{-b t} dt = e^{-b alpha}/b",
    )


def limiting_weight(alpha):
    alpha = float(alpha)
    if alpha <= -1:
        raise ValueError("need alpha > -1")

    def ev(t):
        t = np.asarray(t, dtype=np.float64)
        out = np.ones_like(t)
        low = t < 1.0
        out[low] = np.power(t[low], alpha)
        return out

    def dv(t):
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        low = t < 1.0
        out[low] = alpha * np.power(t[low], alpha - 1.0)
        return out

    def lv(t):
        t = np.asarray(t)
        out = np.zeros_like(t)
        low = t < 1.0
        out[low] = alpha * np.log(t[low])
        return out

    return make_weight(
        f"limiting({alpha:g})",
        lower_bound=0.0,
        eval=ev,
        deriv=dv,
        log_eval=lv,
    )


class _TableFn:
    """Monotone cubic interpolant with linear extension past the last knot."""

    def __init__(self, xs, ys):
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ValueError("table abscissae must be strictly increasing")
        self._pchip = PchipInterpolator(xs, ys, extrapolate=False)
        self._dpchip = self._pchip.derivative()
        self.x0, self.x1 = float(xs[0]), float(xs[-1])
        self.y1 = float(ys[-1])
        self.slope1 = float(self._dpchip(self.x1))

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.empty_like(t)
        hi = t > self.x1
        mid = ~hi
        out[mid] = self._pchip(np.clip(t[mid], self.x0, self.x1))
        out[hi] = self.y1 + self.slope1 * (t[hi] - self.x1)
        return out

    def deriv(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.empty_like(t)
        hi = t > self.x1
        mid = ~hi
        out[mid] = self._dpchip(np.clip(t[mid], self.x0, self.x1))
        out[hi] = self.slope1
        return out


def mv_weight(g=None, g_deriv=None, name="mv(g-table)"):
    """Weight e^t / g(t) on (1, inf); default comparison table g(t) = t^2."""
    if g is None:
        g = lambda t: np.square(np.asarray(t, dtype=np.float64))
        g_deriv = lambda t: 2.0 * np.asarray(t, dtype=np.float64)
        name = "mv(t^2)"

    def ev(t):
        t = np.asarray(t)
        return np.exp(t) / np.asarray(g(t))

    dv = None
    if g_deriv is not None:
        def dv(t):
            t = np.asarray(t)
            gt = np.asarray(g(t))
            return np.exp(t) * (gt - np.asarray(g_deriv(t))) / (gt * gt)

    def lv(t):
        t = np.asarray(t)
        return t - np.log(np.asarray(g(t)))

    return make_weight(name, lower_bound=1.0, eval=ev, deriv=dv, log_eval=lv)


def mv_weight_from_table(xs, gs):
    fn = _TableFn(xs, gs)
    return mv_weight(g=fn, g_deriv=fn.deriv, name="mv(g-table)")


def table_weight(xs, cs, name="table"):
    """Custom weight from a two-column (t, c) table.

    Beyond the last knot the weighted integrand c e^{-t} is continued
    exponentially with the terminal log-slope so the improper integrals stay
    meaningful; inside the table evaluation is monotone cubic.
    """
    fn = _TableFn(xs, cs)
    t1 = fn.x1
    c1 = float(fn(np.asarray([t1]))[0])
    d1 = float(fn.deriv(np.asarray([t1]))[0])
    lam = d1 / c1 - 1.0  # log-slope of c e^{-t} at the end

    def ev(t):
        t = np.asarray(t, dtype=np.float64)
        out = np.empty_like(t)
        hi = t > t1
        out[~hi] = fn(t[~hi])
        out[hi] = c1 * np.exp((lam + 1.0) * (t[hi] - t1))
        return out

    def dv(t):
        t = np.asarray(t, dtype=np.float64)
        out = np.empty_like(t)
        hi = t > t1
        out[~hi] = fn.deriv(t[~hi])
        out[hi] = c1 * (lam + 1.0) * np.exp((lam + 1.0) * (t[hi] - t1))
        return out

    def lv(t):
        t = np.asarray(t)
        out = np.empty_like(t)
        hi = t > t1
        with np.errstate(divide="ignore", invalid="ignore"):
            out[~hi] = np.log(fn(t[~hi]))
        out[hi] = math.log(c1) + (lam + 1.0) * (t[hi] - t1)
        return out

    return make_weight(name, lower_bound=float(fn.x0), eval=ev, deriv=dv,
                       log_eval=lv)


def load_table_weight(path, name=None):
    data = np.loadtxt(path, delimiter=",", dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("expected a two-column (t, c) table")
    return table_weight(data[:, 0], data[:, 1], name=name or f"table:{path}")


def bump_weight():
    """Counterexample: weighted integrand 1 + 99*bump(center 1, width 0.1).

    Deliberately built without the validated constructor; its weighted
    integral diverges, which is the point of the counterexample.
    """
    def ev(t):
        t = np.asarray(t, dtype=np.float64)
        return np.exp(t) * (1.0 + 99.0 * smooth_bump((t - 1.0) / 0.1))

    def dv(t):
        t = np.asarray(t, dtype=np.float64)
        base = 1.0 + 99.0 * smooth_bump((t - 1.0) / 0.1)
        return np.exp(t) * (base + 990.0 * smooth_bump_deriv((t - 1.0) / 0.1))

    def lv(t):
        t = np.asarray(t, dtype=np.float64)
        return t + np.log1p(99.0 * smooth_bump((t - 1.0) / 0.1))

    return WeightSpec("bump", 0.0, ev, dv, log_eval=lv)


CATALOG_NAMES = (
    "const",
    "ohsawa2(m,eps)",
    "concise(eps)",
    "demailly(r)",
    "dhp(b,alpha)",
    "limiting(alpha)",
    "mv(g-table)",
)


def catalog_defaults():
    """Concrete instances exercised by the verification suites."""
    return (
        const_weight(0.0),
        ohsawa2_weight(2, 1.0),
        concise_weight(1.0),
        demailly_weight(1.0),
        dhp_weight(0.5, 2.0),
        limiting_weight(-0.5),
        mv_weight(),
    )


def parse_weight(text):
    """Parse catalog strings like 'ohsawa2(2,1)' or 'const'."""
    text = text.strip()
    if "(" in text:
        head, _, rest = text.partition("(")
        if not rest.endswith(")"):
            raise ValueError(f"malformed weight spec {text!r}")
        args = [float(x) for x in rest[:-1].split(",") if x.strip()]
    else:
        head, args = text, []
    head = head.strip()
    table = {
        "const": const_weight,
        "ohsawa2": ohsawa2_weight,
        "concise": concise_weight,
        "demailly": demailly_weight,
        "dhp": dhp_weight,
        "limiting": limiting_weight,
        "mv": mv_weight,
        "bump": lambda: bump_weight(),
    }
    if head not in table:
        raise ValueError(f"unknown weight {head!r}")
    return table[head](*args)


# ---------------------------------------------------------------------------
# scans and grids


def weighted_scan(w, n=4096):
    """Dense probe of the weighted integrand; returns (ts, gs)."""
    lb = w.lower_bound
    if np.isfinite(lb):
        span = 16.0
        eps0 = 1e-9 * (1.0 + abs(lb))
        for _ in range(28):
            ts = lb + np.geomspace(eps0, span, n)
            gs = w.weighted(ts)
            peak = float(np.max(gs))
            if gs[-1] < 1e-12 * peak or span > 2.0 ** 21:
                break
            span *= 2.0
        return ts, gs
    lo, hi = -16.0, 16.0
    for _ in range(24):
        ts = np.linspace(lo, hi, n)
        gs = w.weighted(ts)
        peak = float(np.max(gs))
        grow_left = gs[0] > 1e-2 * peak
        grow_right = gs[-1] > 1e-12 * peak
        if (not grow_left and not grow_right) or (hi - lo) > 2.0 ** 18:
            break
        if grow_left:
            lo -= (hi - lo)
        if grow_right:
            hi += (hi - lo)
    return ts, gs


def default_grid(w, n=256):
    """Mass-quantile grid with log-spaced approach to a finite -A.

    Quantiles of the weighted integrand put half the points where the mass
    lives (resolving narrow features automatically); the rest approach the
    endpoints where margins degenerate.
    """
    ts, gs = weighted_scan(w)
    peak = float(np.max(gs))
    keep = gs >= 1e-13 * peak
    ts, gs = ts[keep], gs[keep]
    mass = np.concatenate([[0.0], np.cumsum(0.5 * (gs[1:] + gs[:-1]) * np.diff(ts))])
    if mass[-1] <= 0:
        raise NonIntegrableWeightError("degenerate weighted mass in scan")
    mass /= mass[-1]
    lb = w.lower_bound
    keep2 = np.concatenate([[True], np.diff(mass) > 0])
    # the largest integrand values anchor narrow features that a pure
    # mass-quantile grid can wash out when the scan window is huge
    feats = ts[np.argsort(gs)[-64:]]
    if np.isfinite(lb):
        n_edge = n // 4
        qs = np.linspace(0.0005, 0.9995, n - n_edge)
        body = np.interp(qs, mass[keep2], ts[keep2])
        eps0 = 1e-8 * (1.0 + abs(lb))
        edge_hi = max(float(body[0]) - lb, 10.0 * eps0)
        edge = lb + np.geomspace(eps0, edge_hi, n_edge)
        grid = np.unique(np.concatenate([edge, body, feats]))
    else:
        qs = np.linspace(0.0005, 0.9995, n)
        grid = np.unique(np.concatenate(
            [np.interp(qs, mass[keep2], ts[keep2]), feats]))
    return grid


# ---------------------------------------------------------------------------
# reports and checks


@dataclass(frozen=True)
class AdmissibilityReport:
    holds_ca: Optional[bool] = None
    margin_ca: Optional[float] = None
    holds_ca_delta: Optional[bool] = None
    margin_ca_delta: Optional[float] = None
    delta: Optional[float] = None
    sufficient_condition: Optional[bool] = None
    boundary_value: Optional[float] = None
    total_integral: Optional[float] = None
    grid: tuple = ()
    worst_t: Optional[float] = None


def weight_moment(w, k):
    """int c(t) e^{-(k+1) t} dt over (-A, inf), relative accuracy 1e-10."""
    if k < 0:
        raise ValueError("k must be >= 0")

    def f(t):
        return w.weighted(np.asarray(t, dtype=np.float64), k=k)

    lb = w.lower_bound
    if np.isfinite(lb):
        probes = lb + np.geomspace(1e-8 * (1.0 + abs(lb)), 60.0, 128)
    else:
        probes = np.linspace(-60.0, 60.0, 241)
    pv = f(probes)
    finite = np.isfinite(pv)
    if not np.any(finite):
        raise NonIntegrableWeightError("moment integrand has no finite probe")
    idx = int(np.argmax(np.where(finite, pv, -np.inf)))
    peak_hint = float(probes[idx])
    return improper_weighted(f, lb, peak_hint=peak_hint)


def total_integral_or_inf(w):
    try:
        return weight_moment(w, 0)
    except NonIntegrableWeightError:
        return math.inf


def boundary_value(w, h0=0.5):
    """lim_{t -> -A+} c(t) e^{-t}; 0 by convention when A = +inf."""
    lb = w.lower_bound
    if not np.isfinite(lb):
        return 0.0
    offs = h0 * np.power(2.0, -np.arange(7, dtype=np.float64))
    with np.errstate(over="ignore", divide="ignore"):
        fs = w.weighted(lb + offs)
    if not np.all(np.isfinite(fs)):
        return math.inf
    limit, consistency = richardson_limit(fs)
    scale = max(abs(limit), 1e-300)
    if consistency <= 1e-8 * max(1.0, scale):
        return max(limit, 0.0)
    # retry closer in before deciding
    offs = (h0 / 64.0) * np.power(2.0, -np.arange(7, dtype=np.float64))
    fs2 = w.weighted(lb + offs)
    if np.all(np.isfinite(fs2)):
        limit2, consistency2 = richardson_limit(fs2)
        if consistency2 <= 1e-8 * max(1.0, abs(limit2)):
            return max(limit2, 0.0)
        if np.all(np.diff(fs2) > 0) and fs2[-1] > 4.0 * fs2[0]:
            return math.inf
    raise LimitUndefinedError(
        f"boundary limit of {w.name} did not stabilize (last gap {consistency:.3e})"
    )


def _sweep_margins(w, grid, a, b):
    """Normalized margins of (a + I)^2 > g * (a*(t-lb) + t*I - M1 + b)."""
    grid = np.asarray(grid, dtype=np.float64)
    lb = w.lower_bound
    f = lambda t: w.weighted(t)
    I, M1 = cumulative_weighted(f, lb, grid)
    J = grid * I - M1
    if np.isfinite(lb) and a != 0.0:
        J = J + a * (grid - lb)
    g = w.weighted(grid)
    lhs = (a + I) ** 2
    rhs = g * (J + b)
    return (lhs - rhs) / rhs


def check_cA(w, grid=None):
    """Base admissibility inequality sweep (boundary terms absent)."""
    if grid is None:
        grid = default_grid(w)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size < 64:
        raise ValueError("admissibility grid needs at least 64 points")
    margins = _sweep_margins(w, grid, 0.0, 0.0)
    i = int(np.argmin(margins))
    margin = float(margins[i])
    return AdmissibilityReport(
        holds_ca=bool(margin > STRICTNESS_FLOOR),
        margin_ca=margin,
        boundary_value=boundary_value(w),
        total_integral=total_integral_or_inf(w),
        grid=tuple(float(t) for t in grid),
        worst_t=float(grid[i]),
    )


def check_cA_delta(w, delta, grid=None):
    """Boundary-shifted admissibility inequality for a given delta > 0."""
    if delta is None or delta <= 0:
        raise ValueError("delta must be positive")
    lb = w.lower_bound
    if not np.isfinite(lb):
        raise BoundaryValueError(
            "delta-form admissibility needs finite A; hypothesis $c_{A}(-A)e^{A}\\neq0$ "
            "is vacuous at A = +inf"
        )
    bv = boundary_value(w)
    if not np.isfinite(bv) or bv <= 0.0:
        raise BoundaryValueError(
            f"boundary value c_A(-A)e^A = {bv}; hypothesis $c_{{A}}(-A)e^{{A}}\\neq0$ "
            "(finite, nonzero) fails"
        )
    if grid is None:
        grid = default_grid(w)
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size < 64:
        raise ValueError("admissibility grid needs at least 64 points")
    a = bv / delta
    b = bv / (delta * delta)
    margins = _sweep_margins(w, grid, a, b)
    i = int(np.argmin(margins))
    margin = float(margins[i])
    return AdmissibilityReport(
        holds_ca_delta=bool(margin > STRICTNESS_FLOOR),
        margin_ca_delta=margin,
        delta=float(delta),
        boundary_value=bv,
        total_integral=total_integral_or_inf(w),
        grid=tuple(float(t) for t in grid),
        worst_t=float(grid[i]),
    )


def pointwise_margins(w, grid, delta=None):
    """Margins at each grid point (delta-form when delta given)."""
    if delta is None:
        return _sweep_margins(w, grid, 0.0, 0.0)
    bv = boundary_value(w)
    return _sweep_margins(w, grid, bv / delta, bv / delta ** 2)


def _fd_first(f, ts):
    ts = np.asarray(ts, dtype=np.longdouble)
    h = np.longdouble(1e-5) * (1.0 + np.abs(ts))
    return (f(ts + h) - f(ts - h)) / (2.0 * h)


def _fd_second(f, ts):
    ts = np.asarray(ts, dtype=np.longdouble)
    h = np.longdouble(1e-5) * (1.0 + np.abs(ts))
    return (f(ts + h) - 2.0 * f(ts) + f(ts - h)) / (h * h)


def check_sufficient(w, a):
    """Monotone-then-antitone test of c e^{-t} with left log-concavity.

    Wants A = +inf.  The op never raises: a finite A counts as a violation
    and returns False, like any failed sign test.  Finite differences decide
    each sign only where the signal exceeds the stencil noise estimate;
    unresolved points are skipped rather than guessed.
    """
    if np.isfinite(w.lower_bound):
        return False
    a = float(a)
    g = lambda t: w.weighted(t, dtype=np.longdouble)
    ga = float(g(np.asarray([a]))[0])

    scalar_g = lambda t: float(g(np.asarray([t]))[0])
    # a failed hunt means the integrand refuses to decay on that side; a
    # bounded window is enough for the sign tests to expose the violation
    try:
        right_T = hunt_below(scalar_g, a, TRUNCATION_RATIO * ga, step0=1.0, direction=1)
    except NonIntegrableWeightError:
        right_T = a + 64.0
    try:
        left_T = hunt_below(scalar_g, a, TRUNCATION_RATIO * ga, step0=1.0, direction=-1)
    except NonIntegrableWeightError:
        left_T = a - 64.0

    eps_ld = float(np.finfo(np.longdouble).eps)
    right = a + np.geomspace(1e-6, right_T - a, 512)
    left = a - np.geomspace(1e-6, a - left_T, 512)

    if w.deriv is not None:
        def gprime(ts):
            ts = np.asarray(ts, dtype=np.longdouble)
            c = np.asarray(w.eval(ts), dtype=np.longdouble)
            cp = np.asarray(w.deriv(ts), dtype=np.longdouble)
            return (cp - c) * np.exp(-ts)
        dp_right = gprime(right)
        dp_left = gprime(left)
        eps_db = float(np.finfo(np.float64).eps)
        noise_r = 4.0 * eps_db * np.asarray(g(right), dtype=np.float64)
        noise_l = 4.0 * eps_db * np.asarray(g(left), dtype=np.float64)
    else:
        dp_right = _fd_first(g, right)
        dp_left = _fd_first(g, left)
        h_r = 1e-5 * (1.0 + np.abs(right))
        h_l = 1e-5 * (1.0 + np.abs(left))
        noise_r = 8.0 * eps_ld * np.asarray(g(right), dtype=np.float64) / h_r
        noise_l = 8.0 * eps_ld * np.asarray(g(left), dtype=np.float64) / h_l

    dp_right = np.asarray(dp_right, dtype=np.float64)
    dp_left = np.asarray(dp_left, dtype=np.float64)
    if np.any(dp_right > noise_r + 1e-30):
        return False
    if np.any(dp_left < -(noise_l + 1e-30)):
        return False

    # strict log-concavity on the left of the crossover
    lg = lambda ts: np.log(g(ts))
    lg2 = np.asarray(_fd_second(lg, left), dtype=np.float64)
    h_l = 1e-5 * (1.0 + np.abs(left))
    lgv = np.abs(np.asarray(lg(np.asarray(left, dtype=np.longdouble)), dtype=np.float64))
    noise2 = 8.0 * eps_ld * np.maximum(lgv, 1.0) / (h_l * h_l)
    resolved = np.abs(lg2) > 10.0 * noise2
    if np.any(lg2[resolved] >= 0.0):
        return False
    return True


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


def _smoothstep_deriv(x):
    inside = (x > 0.0) & (x < 1.0)
    out = np.zeros_like(np.asarray(x, dtype=np.float64))
    xi = np.asarray(x)[inside]
    out[inside] = 6.0 * xi * (1.0 - xi)
    return out


def approximate_weight(w, B):
    """Splice a decreasing tail onto w at -A + B.

    The tail is an exponential-decay profile toward a strictly positive
    level, glued through a cubic smoothing window of width min(1, B)/10, and
    its decay rate is solved so the spliced weighted integral lands under
    1/B.  w is untouched at or below the junction; admissibility of the
    result is re-verified before returning.
    """
    B = float(B)
    if B <= 0:
        raise ValueError("B must be positive")
    base = check_cA(w)
    if not base.holds_ca:
        raise AdmissibilityError("approximate_weight needs an admissible input",
                                 violating_t=base.worst_t)
    lb = w.lower_bound
    T = lb + B if np.isfinite(lb) else B
    cT = float(np.asarray(w.eval(np.asarray([T])), dtype=np.float64)[0])
    MT = cT * math.exp(-T)  # mass of the constant-c_T tail

    def tail_mass_old():
        scalar = lambda t: float(w.weighted(np.asarray([t]))[0])
        hi = hunt_below(scalar, T, TRUNCATION_RATIO * max(scalar(T), 1e-300),
                        step0=1.0, direction=1)
        return (chained_adaptive(scalar, T, hi)
                + adaptive(scalar, hi, np.inf, epsrel=1e-8))

    old_tail = tail_mass_old()

    if not np.isfinite(lb):
        # the unbounded-A recipe: constant continuation at level c(B)
        if MT >= 1.0 / B:
            raise ConstructionError(f"tail mass {MT:.3e} >= 1/B; increase B")

        def tail_fn(t):
            return np.full_like(np.asarray(t, dtype=np.float64), cT)

        def tail_deriv(t):
            return np.zeros_like(np.asarray(t, dtype=np.float64))

        new_tail = MT
    else:
        eps_b = min(1.0, B) / 10.0
        from .quadrature import gl_panel

        def tail_profile(kappa, level):
            def prof(t):
                return level + (cT - level) * np.exp(-kappa * (t - T))

            def fn(t):
                t = np.asarray(t, dtype=np.float64)
                sig = _smoothstep((t - T) / eps_b)
                return (1.0 - sig) * cT + sig * prof(t)
            return fn

        def tail_mass(kappa, level):
            fn = tail_profile(kappa, level)
            blend = gl_panel(lambda t: fn(t) * np.exp(-t), T, T + eps_b, order=32)
            closed = math.exp(-(T + eps_b)) * (
                level + (cT - level) * math.exp(-kappa * eps_b) / (1.0 + kappa)
            )
            return float(blend) + closed

        target = min(old_tail, 0.95 / B, 0.98 * MT)
        level = max(1e-4, min(0.45, target / (2.0 * MT))) * cT
        lo_k, hi_k = 1e-8, 1e12
        m_lo, m_hi = tail_mass(lo_k, level), tail_mass(hi_k, level)
        if not (m_hi < target < m_lo):
            raise ConstructionError(
                f"no feasible tail mass near {target:.3e} (achievable "
                f"[{m_hi:.3e}, {m_lo:.3e}]); increase B")
        from scipy.optimize import brentq
        kappa = 10.0 ** brentq(
            lambda lk: tail_mass(10.0 ** lk, level) - target,
            math.log10(lo_k), math.log10(hi_k), xtol=1e-13, maxiter=200)
        new_tail = tail_mass(kappa, level)
        fn = tail_profile(kappa, level)

        def tail_fn(t):
            return fn(t)

        def tail_deriv(t):
            t = np.asarray(t, dtype=np.float64)
            prof = level + (cT - level) * np.exp(-kappa * (t - T))
            dprof = -kappa * (cT - level) * np.exp(-kappa * (t - T))
            sig = _smoothstep((t - T) / eps_b)
            dsig = _smoothstep_deriv((t - T) / eps_b) / eps_b
            return dsig * (prof - cT) + sig * dprof

    def ev(t):
        t = np.asarray(t, dtype=np.float64)
        out = np.empty_like(t)
        hi = t > T
        out[~hi] = np.asarray(w.eval(t[~hi]), dtype=np.float64)
        out[hi] = tail_fn(t[hi])
        return out

    dv = None
    if w.deriv is not None:
        def dv(t):
            t = np.asarray(t, dtype=np.float64)
            out = np.empty_like(t)
            hi = t > T
            out[~hi] = np.asarray(w.deriv(t[~hi]), dtype=np.float64)
            out[hi] = tail_deriv(t[hi])
            return out

    w2 = WeightSpec(f"{w.name}+tail(B={B:g})", lb, ev, dv)

    if new_tail >= 1.0 / B:
        raise ConstructionError("spliced tail mass failed the 1/B bound")
    rerun = check_cA(w2)
    if not rerun.holds_ca:
        raise InternalConsistencyError(
            f"splice of {w.name} lost admissibility at t = {rerun.worst_t}")
    moment_diff = abs(new_tail - old_tail)
    return w2, moment_diff


def master_total(w, delta=None):
    """(1/delta) c_A(-A) e^A + int c e^{-t} dt, or the integral alone."""
    moment = weight_moment(w, 0)
    if delta is None:
        return moment
    bv = boundary_value(w)
    if not np.isfinite(bv) or bv <= 0:
        raise BoundaryValueError(
            f"boundary value {bv} invalid for the delta-form master total")
    return bv / delta + moment

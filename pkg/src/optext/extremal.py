"""Model-ball optimality checks: least-norm solves over monomial bases,
moment comparison for crossing pairs, and the punctured-disc tail bound.

The model domain is the ball of radius e^{A/(2m)} in C^m carrying the
radial profile pair (phi, Psi).  Everything here reduces to 1-D radial
quadrature in x = log|z|^2; angular factors are closed-form.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ConstructionError,
    DomainError,
    InternalConsistencyError,
    NonIntegrableWeightError,
    QuadratureError,
)
from .quadrature import adaptive, improper_weighted
from .weights import WeightSpec, smooth_bump, smooth_bump_deriv

_REL_AGREE = 1e-8


@dataclass(frozen=True)
class ModelBall:
    """Ball of radius e^{A/(2m)} in C^m with the sharp radial profiles.

    phi = (1+delta) max(m log|z|^2, log a^2) and
    Psi = -max(m log|z|^2, log a^2) + m log|z|^2 + A - eps.
    The max compares m log|z|^2 against log a^2; that reading makes the
    closed-form ball integral and its a->0 limit dimension-uniform.
    degenerate=True selects the flat profile phi = 0, Psi = m log|z|^2
    (unit ball, used by the least-norm degenerate example).
    """

    m: int
    A: float
    a: float
    delta: float
    eps: float
    degenerate: bool = False

    def __post_init__(self):
        if int(self.m) != self.m or not 1 <= self.m <= 3:
            raise DomainError("m must be 1, 2, or 3")
        if not self.degenerate:
            if not 0.0 < self.a < 1.0:
                raise DomainError("a must sit in (0, 1)")
            if self.delta <= 0:
                raise DomainError("delta must be positive")
            if self.eps < 0:
                raise DomainError("eps must be nonnegative")
        if np.isfinite(self.A):
            self._sampled_profile_checks()

    @property
    def radius(self):
        return math.exp(self.A / (2.0 * self.m)) if np.isfinite(self.A) else math.inf

    @property
    def x_split(self):
        # log|z|^2 at which m log|z|^2 crosses log a^2
        return 2.0 * math.log(self.a) / self.m

    @property
    def x_edge(self):
        return self.A / self.m if np.isfinite(self.A) else math.inf

    def phi_x(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.degenerate:
            return np.zeros_like(x)
        return (1.0 + self.delta) * np.maximum(self.m * x, 2.0 * math.log(self.a))

    def psi_x(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.degenerate:
            return self.m * x
        inner = np.maximum(self.m * x, 2.0 * math.log(self.a))
        return -inner + self.m * x + self.A - self.eps

    def _sampled_profile_checks(self):
        if self.degenerate:
            lo = self.x_edge - 40.0
            xs = np.linspace(lo, self.x_edge - 1e-9, 400)
            if np.any(self.psi_x(xs) >= 0.0):
                raise DomainError("degenerate profile needs Psi < 0 on the ball")
            return
        xs = np.linspace(self.x_split - 30.0, self.x_edge - 1e-9, 400)
        if self.eps > 0 and np.any(self.psi_x(xs) >= 0.0):
            raise DomainError(
                "Psi must stay negative off the origin (needs eps >= A here)")
        for f in (self.phi_x, lambda x: self.phi_x(x) + (1.0 + self.delta) * self.psi_x(x)):
            vals = f(xs)
            scale = max(1.0, float(np.max(np.abs(vals))))
            if np.any(np.diff(vals, 2) < -1e-9 * scale):
                raise DomainError("radial profile is not convex in log|z|")


def degenerate_disc(m=1):
    """Unit ball with phi = 0 and Psi = m log|z|^2."""
    return ModelBall(m=m, A=0.0, a=0.5, delta=1.0, eps=0.0, degenerate=True)


def multi_indices(m, K):
    """All m-tuples of nonnegative integers with total degree <= K."""
    out = [k for k in itertools.product(range(K + 1), repeat=m) if sum(k) <= K]
    out.sort(key=lambda k: (sum(k), k))
    return out


def _angular_factor(k):
    # int_{S^{2m-1}} |w^k|^2 dsigma = 2 pi^m prod(k_i!) / (m-1+|k|)!
    m = len(k)
    num = 2.0 * math.pi ** m
    for ki in k:
        num *= math.factorial(ki)
    return num / math.factorial(m - 1 + sum(k))


def _shell_radial(ball, w, n):
    """(1/2) int c(-Psi) e^{-phi} e^{(n+m)x} dx over the ball's x-range."""
    m = ball.m

    def f(x):
        t = -float(ball.psi_x(x))
        # inf from an overflowing weight is a real signal: the shell diverges
        with np.errstate(over="ignore", invalid="ignore"):
            cv = float(w.eval(t))
        return cv * math.exp(-float(ball.phi_x(x)) + (n + m) * x)

    if ball.degenerate:
        return 0.5 * adaptive(f, -np.inf, ball.x_edge)
    split = ball.x_split
    inner = adaptive(f, -np.inf, split)
    outer = adaptive(f, split, ball.x_edge)
    return 0.5 * (inner + outer)


def _tail_moment(w, lo):
    # int_lo^inf c e^{-t} dt
    f = lambda t: w.weighted(np.asarray(t, dtype=np.float64))
    return improper_weighted(f, lo)


def radial_integral(ball, w):
    """int_ball c(-Psi) e^{-phi} dlambda, closed form against quadrature.

    Closed form: pi^m/m! (a^{-2 delta} e^{-A+eps} int_{-A+eps}^inf c e^{-t} dt
    + c(-A+eps) (a^{-2 delta} - e^{-delta A})/delta).  Both routes must agree
    to 1e-8 relative; the closed-form value is returned.
    """
    if ball.degenerate:
        raise DomainError("closed form needs the two-region profile")
    if not np.isfinite(ball.A):
        raise DomainError("closed form needs a finite radius")
    t0 = -ball.A + ball.eps
    if t0 < w.lower_bound:
        raise DomainError(
            f"weight domain starts at {w.lower_bound}, needs c at {t0}")
    c0 = float(w.eval(t0))
    if not np.isfinite(c0) or c0 <= 0.0:
        raise DomainError(f"weight is not usable at the edge value {t0}")
    pref = math.pi ** ball.m / math.factorial(ball.m)
    a2d = ball.a ** (-2.0 * ball.delta)
    tail = _tail_moment(w, t0)
    closed = pref * (a2d * math.exp(-ball.A + ball.eps) * tail
                     + c0 * (a2d - math.exp(-ball.delta * ball.A)) / ball.delta)
    direct = _angular_factor((0,) * ball.m) * _shell_radial(ball, w, 0)
    if abs(closed - direct) > _REL_AGREE * max(abs(closed), abs(direct)):
        raise InternalConsistencyError(
            f"ball integral closed form {closed!r} vs quadrature {direct!r}")
    return closed


def monomial_norms(ball, w, K):
    """Weighted L2 norms M_k of z^k for all |k| <= K.

    One radial quadrature per degree shell; angular factors in closed form.
    Returns (indices, norms).
    """
    if K < 4:
        raise ValueError("degree cap must be at least 4")
    shells = np.empty(K + 1)
    for n in range(K + 1):
        try:
            shells[n] = _shell_radial(ball, w, n)
        except (QuadratureError, NonIntegrableWeightError, OverflowError):
            shells[n] = np.inf
    idx = multi_indices(ball.m, K)
    norms = np.array([_angular_factor(k) * shells[sum(k)] for k in idx])
    if not np.all(np.isfinite(norms)):
        j = int(np.argmax(~np.isfinite(norms)))
        raise ConstructionError(
            f"monomial norm at degree {sum(idx[j])} is not finite; "
            "lower the degree cap")
    if np.any(norms <= 0.0):
        raise ConstructionError("moment matrix is not strictly positive")
    return idx, norms


def least_norm_extension(ball, w, f0, K=8, start=None):
    """Minimize sum |a_k|^2 M_k over a_0 = f0; returns (coefficients, value).

    The diagonal structure makes the answer analytic (a = f0 e_0, value
    |f0|^2 M_0); a coordinate-descent solve with exact per-coordinate line
    search recovers it independently from any start point and the two must
    agree, which doubles as a regression check on the moment computation.
    Exact line search divides each gradient entry by its own curvature, so
    the huge spread of the norms across degrees cannot stall it.
    """
    idx, norms = monomial_norms(ball, w, K)
    f0 = complex(f0)
    exact = np.zeros(len(idx), dtype=complex)
    exact[0] = f0
    exact_val = abs(f0) ** 2 * norms[0]

    coeffs = (np.asarray(start, dtype=complex).copy() if start is not None
              else np.full(len(idx), f0, dtype=complex))
    if coeffs.shape != (len(idx),):
        raise ValueError(f"start point needs shape ({len(idx)},)")
    coeffs[0] = f0
    for _ in range(4):
        for k in range(1, len(idx)):
            grad = 2.0 * norms[k] * coeffs[k]
            coeffs[k] -= grad / (2.0 * norms[k])
        if np.max(np.abs(coeffs[1:]), initial=0.0) <= 1e-14 * max(1.0, abs(f0)):
            break
    value = float(np.real(np.vdot(coeffs, norms * coeffs)))

    if np.max(np.abs(coeffs - exact)) > 1e-10 * max(1.0, abs(f0)):
        raise InternalConsistencyError("solver left the analytic minimizer")
    if abs(value - exact_val) > 1e-9 * max(1.0, exact_val):
        raise InternalConsistencyError(
            f"solver value {value!r} vs analytic {exact_val!r}")
    return coeffs, value


def optimality_ratio(m, w, delta, A, a, eps):
    """Sharpness ratio of the model-ball minimum against its a->0 limit.

    [min / (a^{-2 delta} e^{eps-A} |f0|^2)] divided by
    [pi^m/m! (int_{-A+eps}^inf c e^{-t} dt + (1/delta) c(-A+eps) e^{A-eps})].
    Tends to 1 as a -> 0 (then eps -> 0); the gap at finite a comes from the
    e^{-delta A} correction in the second closed-form term, which pulls the
    ratio below 1.
    """
    if a > 1e-2:
        raise ValueError("the sharpness regime needs a <= 1e-2")
    ball = ModelBall(m=m, A=A, a=a, delta=delta, eps=eps)
    closed = radial_integral(ball, w)
    _, least = least_norm_extension(ball, w, 1.0, K=4)
    if abs(least - closed) > 1e-7 * abs(closed):
        raise InternalConsistencyError(
            f"least-norm minimum {least!r} vs ball integral {closed!r}")
    t0 = -A + eps
    tail = _tail_moment(w, t0)
    c0 = float(w.eval(t0))
    pref = math.pi ** m / math.factorial(m)
    numer = least / (a ** (-2.0 * delta) * math.exp(eps - A))
    denom = pref * (tail + c0 * math.exp(A - eps) / delta)
    return numer / denom


def ratio_sweep(m, w, delta, A, a_values, eps_values):
    """Tabulated (a, eps, ratio) rows for the finite-parameter sweeps."""
    rows = [(float(a), float(e), optimality_ratio(m, w, delta, A, a, e))
            for a in a_values for e in eps_values]
    return np.array(rows, dtype=np.float64)


@dataclass(frozen=True)
class CrossingPair:
    """Two positive profiles equal outside (r3, r1) that cross at r2.

    d1 > d2 on (r2, r1), d1 < d2 on (r3, r2), with equal e^{-t}-weighted
    totals (enforced by build_crossing to 1e-10).
    """

    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    r1: float
    r2: float
    r3: float


def build_crossing(d1, r1, r2, r3, amplitude=0.05):
    """Companion profile with a mass-preserving smooth crossing.

    Raises d1 on (r3, r2) and lowers it on (r2, r1) by scaled smooth bumps;
    the lowering amplitude is solved so the e^{-t}-weighted totals match.
    The modified region keeps d2(t) e^{-t} strictly decreasing (sampled),
    otherwise the construction is rejected.
    """
    if not 0.0 < r3 < r2 < r1:
        raise ValueError("radii must satisfy 0 < r3 < r2 < r1")
    if amplitude <= 0.0:
        raise ConstructionError("strict crossing requires a positive amplitude")
    cu, wu = 0.5 * (r3 + r2), 0.5 * (r2 - r3)
    cd, wd = 0.5 * (r2 + r1), 0.5 * (r1 - r2)
    bump_u = lambda t: smooth_bump((np.asarray(t, dtype=np.float64) - cu) / wu)
    bump_d = lambda t: smooth_bump((np.asarray(t, dtype=np.float64) - cd) / wd)

    ts = np.linspace(r3, r1, 2001)
    base = np.asarray(d1.eval(ts), dtype=np.float64)
    amp_u = amplitude * float(np.min(base))
    mass_u = adaptive(lambda t: float(bump_u(t)) * math.exp(-t), r3, r2)
    mass_d = adaptive(lambda t: float(bump_d(t)) * math.exp(-t), r2, r1)
    amp_d = amp_u * mass_u / mass_d

    def d2(t):
        t = np.asarray(t, dtype=np.float64)
        return (np.asarray(d1.eval(t), dtype=np.float64)
                + amp_u * bump_u(t) - amp_d * bump_d(t))

    vals = d2(ts)
    if np.any(vals <= 0.0):
        raise ConstructionError("companion profile lost positivity")
    if d1.deriv is None:
        raise ConstructionError("base profile needs a derivative")
    slope = (np.asarray(d1.deriv(ts), dtype=np.float64)
             + amp_u * smooth_bump_deriv((ts - cu) / wu) / wu
             - amp_d * smooth_bump_deriv((ts - cd) / wd) / wd)
    if np.any(slope - vals > -1e-12):
        raise ConstructionError(
            "d2(t) e^{-t} is not decreasing on the modified region; "
            "reduce the amplitude")
    gap0 = adaptive(lambda t: float(d2(t) - d1.eval(np.asarray(t))) * math.exp(-t),
                    r3, r1)
    if abs(gap0) > 1e-10:
        raise InternalConsistencyError(
            f"weighted totals differ by {gap0!r} after balancing")

    d1_fn = lambda t: np.asarray(d1.eval(np.asarray(t, dtype=np.float64)),
                                 dtype=np.float64)
    return CrossingPair(d1=d1_fn, d2=d2, r1=float(r1), r2=float(r2), r3=float(r3))


def moment_dominance(pair, k_max=50):
    """True iff the d1 moments sit strictly under the d2 moments for k >= 1.

    The profiles agree outside (r3, r1), so each comparison reduces to the
    sign of int_{r3}^{r1} (d2 - d1) e^{-kt} e^{-t} dt; k = 0 must balance
    to 1e-10 (the construction constraint).
    """
    diff = lambda t, k: (float(pair.d2(t) - pair.d1(t))
                         * math.exp(-(k + 1.0) * t))
    gap0 = adaptive(lambda t: diff(t, 0), pair.r3, pair.r1)
    if abs(gap0) > 1e-10:
        return False
    for k in range(1, k_max + 1):
        if adaptive(lambda t: diff(t, k), pair.r3, pair.r1) <= 0.0:
            return False
    return True


def disc_tail_constant(r, j_max=50):
    """Worst monomial mass ratio between the disc and the r-tail annulus.

    ratio_j = int_disc |z^j|^2 / int_{r<|z|<1} |z^j|^2 = 1/(1 - r^{2j+2});
    checked against direct radial quadrature, decreasing in j, and attained
    at j = 0 where it equals 1/(1 - r^2).
    """
    if not 0.0 < r < 1.0:
        raise ValueError("r must sit in (0, 1)")
    js = np.arange(j_max + 1)
    closed = 1.0 / (1.0 - r ** (2.0 * js + 2.0))
    for j in (0, min(3, j_max), j_max):
        full = adaptive(lambda p: p ** (2 * j + 1), 0.0, 1.0)
        tailq = adaptive(lambda p: p ** (2 * j + 1), r, 1.0)
        quad_ratio = full / tailq
        if abs(quad_ratio - closed[j]) > 1e-10 * closed[j]:
            raise InternalConsistencyError(
                f"tail ratio at j={j}: closed {closed[j]!r} vs {quad_ratio!r}")
    # strictly decreasing until r^{2j+2} underflows and the ratio pins at 1
    if np.any(np.diff(closed) > 0.0):
        raise InternalConsistencyError("tail ratios must decrease in j")
    worst = float(closed[0])
    if abs(worst - 1.0 / (1.0 - r * r)) > 1e-12 * worst:
        raise InternalConsistencyError("worst ratio must be 1/(1-r^2)")
    return worst

"""Green functions, capacities, Suita gaps, and the adjoint kernel."""

import math

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from hypothesis import assume, given, settings, strategies as st

import optext as ox
from optext.errors import (
    DomainError,
    InternalConsistencyError,
    SingularityError,
    UnsupportedDomainError,
)


def theta_capacity(q, t):
    """Product-form capacity oracle, independent of the series route.

    The coefficient sums telescope through sum x^n / (n (1 - q^{2n})) =
    -sum_j log(1 - x q^{2j}), so the pole limit of G - log|z - t| becomes
    a ratio of convergent products.
    """
    u = -math.log(t) ** 2 / math.log(q)
    for j in range(1, 200):
        u += 2.0 * math.log1p(-q ** (2 * j))
    for j in range(200):
        u -= math.log1p(-t * t * q ** (2 * j))
        u -= math.log1p(-(q / t) ** 2 * q ** (2 * j))
    return math.exp(u)


def fd_harmonic_correction(q, z0, nr, nt):
    """Five-point polar Laplace solve for the harmonic part of the Green
    function: H = -log|z - z0| on both circles, Delta H = 0 inside.

    Nothing here touches the series construction, so agreement is a real
    cross-check. Returns the interior grid (nr-1, nt) and the radii.
    """
    dr = (1.0 - q) / nr
    dth = 2.0 * math.pi / nt
    rs = q + dr * np.arange(nr + 1)
    ths = dth * np.arange(nt)

    def bdata(r):
        return -np.log(np.abs(r * np.exp(1j * ths) - z0))

    g_in, g_out = bdata(q), bdata(1.0)
    n_unk = (nr - 1) * nt
    rows, cols, vals = [], [], []
    rhs = np.zeros(n_unk)
    for i in range(1, nr):
        r = rs[i]
        cr_p = 1.0 / dr ** 2 + 1.0 / (2.0 * r * dr)
        cr_m = 1.0 / dr ** 2 - 1.0 / (2.0 * r * dr)
        ct = 1.0 / (r * dth) ** 2
        for j in range(nt):
            k = (i - 1) * nt + j
            rows += [k, k, k]
            cols += [k, (i - 1) * nt + (j + 1) % nt, (i - 1) * nt + (j - 1) % nt]
            vals += [-2.0 / dr ** 2 - 2.0 * ct, ct, ct]
            if i + 1 <= nr - 1:
                rows.append(k)
                cols.append(i * nt + j)
                vals.append(cr_p)
            else:
                rhs[k] -= cr_p * g_out[j]
            if i - 1 >= 1:
                rows.append(k)
                cols.append((i - 2) * nt + j)
                vals.append(cr_m)
            else:
                rhs[k] -= cr_m * g_in[j]
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n_unk, n_unk))
    return spla.spsolve(mat, rhs).reshape(nr - 1, nt), rs


def wirtinger_ddz(f, z, h):
    fx = (f(z + h) - f(z - h)) / (2.0 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2.0 * h)
    return 0.5 * (fx - 1j * fy)


# ---------------------------------------------------------------------------
# domains


def test_domain_guards():
    with pytest.raises(DomainError):
        ox.annulus(0.0)
    with pytest.raises(DomainError):
        ox.annulus(1.0)
    with pytest.raises(DomainError):
        ox.annulus(0.5, n_series=0)
    with pytest.raises(DomainError):
        ox.PlanarDomain(kind="strip")


def test_domain_membership():
    disc = ox.unit_disc()
    ann = ox.annulus(0.5)
    assert disc.contains(0.0) and disc.contains(0.99j)
    assert not disc.contains(1.0)
    assert ann.contains(0.7) and not ann.contains(0.3) and not ann.contains(1.1)


# ---------------------------------------------------------------------------
# Green function


def test_green_disc_reference():
    val = ox.green(ox.unit_disc(), 0.5, 0.0)
    assert abs(val - math.log(0.5)) < 1e-15


def test_green_disc_boundary_limit():
    # G -> 0 at the boundary; at distance 1e-9 the value is within 1e-8
    val = ox.green(ox.unit_disc(), (1.0 - 1e-9) * np.exp(0.3j), 0.2)
    assert abs(val) < 1e-8


def test_green_annulus_matches_laplace_solve():
    # independent oracle: sparse FD solve of the harmonic correction on
    # two grids sharing the probe node (0.72, theta=0), Richardson in h^2
    q, z0 = 0.5, 0.7
    coarse, _ = fd_harmonic_correction(q, z0, 100, 450)
    fine, _ = fd_harmonic_correction(q, z0, 200, 900)
    h_ext = (4.0 * fine[88 - 1, 0] - coarse[44 - 1, 0]) / 3.0
    g_fd = math.log(abs(0.72 - z0)) + h_ext
    g_series = ox.green(ox.annulus(q, 200), 0.72, z0)
    assert abs(g_series - g_fd) < 1e-4


def test_green_annulus_boundary_vanishing():
    dom = ox.annulus(0.5, 200)
    assert abs(ox.green(dom, 0.9999999 * np.exp(1.1j), 0.7)) < 1e-6
    assert abs(ox.green(dom, (0.5 + 1e-7) * np.exp(2.3j), 0.7)) < 1e-6


def test_green_guards():
    dom = ox.annulus(0.5)
    with pytest.raises(DomainError):
        ox.green(dom, 1.2, 0.7)
    with pytest.raises(DomainError):
        ox.green(dom, 0.7, 0.4)
    with pytest.raises(SingularityError):
        ox.green(dom, 0.7, 0.7)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0.55, 0.95),
    st.floats(0.0, 2.0 * math.pi),
    st.floats(0.55, 0.95),
    st.floats(0.0, 2.0 * math.pi),
)
def test_green_symmetric_and_negative(r1, th1, r2, th2):
    # radii stand off the circles: G itself vanishes at the boundary, so
    # strict negativity there needs the truncation error out of the way
    z = r1 * np.exp(1j * th1)
    t = r2 * np.exp(1j * th2)
    assume(abs(z - t) > 1e-4)
    dom = ox.annulus(0.5, 400)
    g_zt = ox.green(dom, z, t)
    g_tz = ox.green(dom, t, z)
    assert abs(g_zt - g_tz) < 1e-10 * max(1.0, abs(g_zt))
    assert g_zt < 0.0


# ---------------------------------------------------------------------------
# capacity


def test_capacity_disc_values():
    assert abs(ox.log_capacity(ox.unit_disc(), 0.0) - 1.0) < 1e-12
    assert abs(ox.log_capacity(ox.unit_disc(), 0.6) - 1.5625) < 1e-10


def test_capacity_annulus_frozen_value():
    # the extrapolation gate inside log_capacity already enforces ladder
    # consistency well below 1e-6
    val = ox.log_capacity(ox.annulus(0.5), 0.7)
    assert abs(val - 3.2407959928526724) < 1e-9


def test_capacity_annulus_against_product_form():
    for q, t in [(0.3, 0.6), (0.5, 0.7), (0.7, 0.8)]:
        val = ox.log_capacity(ox.annulus(q, 240), t)
        ref = theta_capacity(q, t)
        assert abs(val - ref) < 1e-10 * ref


def test_capacity_rotation_invariant():
    dom = ox.annulus(0.5, 120)
    a = ox.log_capacity(dom, 0.7)
    b = ox.log_capacity(dom, 0.7j)
    c = ox.log_capacity(dom, 0.7 * np.exp(2.13j))
    assert abs(a - b) < 1e-11 and abs(a - c) < 1e-11


# ---------------------------------------------------------------------------
# Bergman kernel


def test_bergman_disc_closed_form():
    assert abs(ox.bergman(ox.unit_disc(), 0.0) - 1.0 / math.pi) < 1e-15
    want = 1.0 / (math.pi * (1.0 - 0.36) ** 2)
    assert abs(ox.bergman(ox.unit_disc(), 0.6) - want) < 1e-12 * want


def test_bergman_annulus_truncation_stable():
    v60 = ox.bergman(ox.annulus(0.5, 60), 0.7)
    v80 = ox.bergman(ox.annulus(0.5, 80), 0.7)
    assert abs(v60 - 3.343131916024288) < 1e-12
    assert abs(v60 - v80) < 1e-12


def test_bergman_monotone_in_truncation():
    # every Laurent mode contributes a positive term
    vals = [ox.bergman(ox.annulus(0.5, n), 0.7) for n in (2, 4, 8, 16, 60)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > vals[0]


# ---------------------------------------------------------------------------
# Suita comparison


def test_suita_disc_equality():
    for z0 in (0.0, 0.3, 0.6, 0.8, 0.5j, -0.4 + 0.4j):
        rec = ox.suita_check(ox.unit_disc(), z0)
        assert abs(rec.gap) <= 1e-9 * max(1.0, rec.c_beta ** 2)


def test_suita_annulus_gap_positive():
    for q in (0.3, 0.5, 0.7):
        dom = ox.annulus(q, 240)
        for f in (0.25, 0.5, 0.75):
            rec = ox.suita_check(dom, q + f * (1.0 - q))
            assert rec.gap > rec.truncation_error_bound
            assert rec.gap > 0.0


def test_suita_annulus_gap_against_mp_oracle():
    # independent high-precision pass over the product form; the module's
    # q=0.5 path runs entirely in doubles, so this is a genuine cross-check
    mp = pytest.importorskip("mpmath")
    q, t = 0.5, 0.7
    with mp.workdps(40):
        qm, tm = mp.mpf(q), mp.mpf(t)
        u = -mp.log(tm) ** 2 / mp.log(qm)
        for j in range(1, 120):
            u += 2 * mp.log1p(-qm ** (2 * j))
        for j in range(120):
            u -= mp.log1p(-tm * tm * qm ** (2 * j))
            u -= mp.log1p(-(qm / tm) ** 2 * qm ** (2 * j))
        cb = mp.exp(u)
        bv = 1 / (2 * mp.pi * tm * tm * mp.log(1 / qm))
        for k in range(0, 200):
            bv += (k + 1) * tm ** (2 * k) / (mp.pi * (1 - qm ** (2 * k + 2)))
        for k in range(2, 200):
            bv += (1 - k) * tm ** (-2 * k) / (mp.pi * (1 - qm ** (2 - 2 * k)))
        gap_ref = float(mp.pi * bv - cb * cb)
    rec = ox.suita_check(ox.annulus(q, 240), t)
    assert gap_ref > 0.0
    assert abs(rec.gap - gap_ref) < 1e-3 * gap_ref


def test_suita_gap_shrinks_with_fatter_annulus():
    # the gap collapses like the squared dual nome exp(2 pi^2 / log q)
    gaps = [ox.suita_check(ox.annulus(q, 240), q + 0.5 * (1.0 - q)).gap
            for q in (0.3, 0.5, 0.7)]
    assert gaps[0] > gaps[1] > gaps[2] > 0.0
    assert gaps[2] < 1e-18


def test_suita_sweep_layout():
    rows = ox.suita_sweep()
    assert len(rows) == 12
    assert [lab for lab, _, _ in rows[:3]] == ["disc"] * 3
    assert [q for _, q, _ in rows[3:]] == [0.3] * 3 + [0.5] * 3 + [0.7] * 3
    for lab, _, rec in rows:
        assert isinstance(rec, ox.SuitaRecord)
        if lab == "annulus":
            assert rec.gap > rec.truncation_error_bound


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))
def test_suita_disc_equality_everywhere(x, y):
    assume(x * x + y * y <= 0.64)
    rec = ox.suita_check(ox.unit_disc(), complex(x, y))
    assert abs(rec.gap) <= 1e-9 * max(1.0, rec.c_beta ** 2)


def test_suita_record_rejects_nonpositive():
    with pytest.raises(InternalConsistencyError):
        ox.SuitaRecord(z0=0.0, c_beta=-1.0, bergman=1.0, gap=0.0,
                       truncation_error_bound=0.0)


# ---------------------------------------------------------------------------
# analytic capacity


def test_analytic_capacity_disc_values():
    assert abs(ox.analytic_capacity_disc(0.0) - 1.0) < 1e-12
    assert abs(ox.analytic_capacity_disc(0.6) - 1.5625) < 1e-10


def test_analytic_capacity_agrees_with_logarithmic():
    # the call itself asserts c_B = c_beta within 1e-10 and would raise
    for z0 in (0.0, 0.35, 0.7j, -0.2 + 0.5j):
        ox.analytic_capacity_disc(z0)


def test_analytic_capacity_rejects_annulus():
    with pytest.raises(UnsupportedDomainError):
        ox.analytic_capacity_disc(0.7, dom=ox.annulus(0.5))


# ---------------------------------------------------------------------------
# adjoint kernel


def test_l_kernel_disc_closed_form():
    val = ox.l_kernel(ox.unit_disc(), 0.3, 0.1)
    assert abs(val - 1.0 / (math.pi * 0.04)) < 1e-12


def test_l_kernel_symmetric():
    dom = ox.annulus(0.5, 120)
    for z, t in [(0.8, 0.62), (0.6 + 0.2j, -0.55 + 0.4j), (-0.3 + 0.55j, 0.7)]:
        a = ox.l_kernel(dom, z, t)
        b = ox.l_kernel(dom, t, z)
        assert abs(a - b) < 1e-12 * max(1.0, abs(a))


def test_l_kernel_matches_wirtinger_differences():
    # second mixed Wirtinger derivative of the Green function, h = 1e-4
    dom = ox.annulus(0.5, 120)
    z, t = 0.6 + 0.2j, -0.55 + 0.4j
    h = 1e-4

    def dz_green(s):
        return wirtinger_ddz(lambda w: ox.green(dom, w, s), z, h)

    ref = (2.0 / math.pi) * wirtinger_ddz(dz_green, t, h)
    val = ox.l_kernel(dom, z, t)
    assert abs(val - ref) < 1e-6


def test_l_kernel_singular_part_split():
    # subtracting the double pole leaves a function continuous across
    # z = t; pair-averaging kills the odd term, so the h = 1e-3 and 1e-4
    # probes agree to O(h^2)
    dom = ox.annulus(0.5, 120)
    t = 0.7

    def remainder(h):
        a = ox.l_kernel(dom, t + h, t) - 1.0 / (math.pi * h * h)
        b = ox.l_kernel(dom, t - h, t) - 1.0 / (math.pi * h * h)
        return 0.5 * (a + b)

    assert abs(remainder(1e-3) - remainder(1e-4)) < 1e-5


def test_l_kernel_guards():
    dom = ox.annulus(0.5)
    with pytest.raises(SingularityError):
        ox.l_kernel(dom, 0.7, 0.7)
    with pytest.raises(DomainError):
        ox.l_kernel(dom, 0.3, 0.7)
    with pytest.raises(DomainError):
        ox.l_kernel(dom, 0.7, 1.3)


def test_l_zero_count_annulus():
    assert ox.l_zero_count(ox.annulus(0.5, 120), 0.7) == 1


def test_l_zero_count_disc():
    assert ox.l_zero_count(ox.unit_disc(), 0.3) == 0


def test_l_zero_count_rotated_source():
    assert ox.l_zero_count(ox.annulus(0.5, 120), 0.7j) == 1


def test_l_zero_count_guard():
    with pytest.raises(DomainError):
        ox.l_zero_count(ox.annulus(0.5), 0.2)

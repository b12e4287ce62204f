"""Weight catalog, moments, and admissibility checks against closed forms."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

import optext as ox
from optext.errors import (
    AdmissibilityError,
    BoundaryValueError,
    ConstructionError,
    LimitUndefinedError,
    NonIntegrableWeightError,
)

REL = 1e-10


def relerr(got, want):
    return abs(got - want) / max(abs(want), 1e-300)


# ---------------------------------------------------------------------------
# moments against closed forms


def test_const_moment_is_exponential():
    assert relerr(ox.weight_moment(ox.const_weight(0.0), 0), 1.0) < REL
    assert relerr(ox.weight_moment(ox.const_weight(1.0), 0), math.e) < REL


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0])
def test_concise_moment_is_reciprocal_eps(eps):
    w = ox.concise_weight(eps)
    assert relerr(ox.weight_moment(w, 0), 1.0 / eps) < REL


@pytest.mark.parametrize("r", [1.0, 2.0])
def test_demailly_moment(r):
    w = ox.demailly_weight(r)
    assert relerr(ox.weight_moment(w, 0), 1.0 / (2.0 * r)) < REL


@pytest.mark.parametrize("m,eps", [(1, 0.5), (2, 1.0), (3, 0.7)])
def test_ohsawa2_moment_gamma_form(m, eps):
    w = ox.ohsawa2_weight(m, eps)
    want = math.gamma(m + 1) * math.gamma(eps) / math.gamma(m + eps)
    assert relerr(ox.weight_moment(w, 0), want) < REL


def test_ohsawa2_moment_substitution_route():
    # u = e^{-t/m} turns the moment into m * int u^{m-1} (1+u)^{-(m+eps)} du
    m, eps = 2, 1.0
    w = ox.ohsawa2_weight(m, eps)
    val, err = integrate.quad(
        lambda u: m * u ** (m - 1) * (1.0 + u) ** -(m + eps), 0.0, np.inf
    )
    assert err < 1e-10
    assert relerr(ox.weight_moment(w, 0), val) < 1e-9


def test_limiting_moment_incomplete_gamma():
    alpha = -0.5
    w = ox.limiting_weight(alpha)
    want = special.gammainc(alpha + 1.0, 1.0) * math.gamma(alpha + 1.0) + math.exp(-1.0)
    assert relerr(ox.weight_moment(w, 0), want) < REL


def test_mv_default_moment():
    assert relerr(ox.weight_moment(ox.mv_weight(), 0), 1.0) < REL


@pytest.mark.parametrize("b,alpha", [(0.5, 2.0), (1.0, 1.0), (0.25, 3.0)])
def test_dhp_moment(b, alpha):
    w = ox.dhp_weight(b, alpha)
    assert relerr(ox.weight_moment(w, 0), math.exp(-b * alpha) / b) < REL


def test_higher_moments_const():
    w = ox.const_weight(0.0)
    for k in range(4):
        assert relerr(ox.weight_moment(w, k), 1.0 / (k + 1.0)) < REL


def test_higher_moment_demailly_expn():
    # int_2^inf e^{-t} t^{-2} dt = E_2(2) / 2
    w = ox.demailly_weight(1.0)
    want = float(special.expn(2, 2)) / 2.0
    assert relerr(ox.weight_moment(w, 1), want) < REL


def test_moments_strictly_decreasing_in_k():
    # weights supported in t > 0: the e^{-kt} factor only shrinks
    for w in (ox.const_weight(0.0), ox.demailly_weight(1.0),
              ox.dhp_weight(0.5, 2.0), ox.limiting_weight(-0.5), ox.mv_weight()):
        ms = [ox.weight_moment(w, k) for k in range(4)]
        assert all(b < a for a, b in zip(ms, ms[1:])), w.name


def test_moment_rejects_negative_k():
    with pytest.raises(ValueError):
        ox.weight_moment(ox.const_weight(0.0), -1)


def test_log_channel_survives_factored_overflow():
    # e^t / t^2 at t = 1e6 overflows the naive product; the weighted value
    # must still come out as t^{-2}
    w = ox.demailly_weight(1.0)
    got = float(w.weighted(np.array([1.0e6]))[0])
    assert relerr(got, 1.0e-12) < 1e-9


# ---------------------------------------------------------------------------
# boundary values


def test_boundary_values_catalog():
    assert relerr(ox.boundary_value(ox.demailly_weight(1.0)), 0.25) < 1e-8
    assert relerr(ox.boundary_value(ox.const_weight(0.0)), 1.0) < 1e-8
    assert relerr(ox.boundary_value(ox.dhp_weight(0.5, 2.0)), math.exp(-1.0)) < 1e-8


def test_boundary_value_infinite_a_convention():
    assert ox.boundary_value(ox.ohsawa2_weight(2, 1.0)) == 0.0
    assert ox.boundary_value(ox.concise_weight(1.0)) == 0.0


def test_boundary_value_divergent():
    # t^{-1/2} e^{-t} blows up at the finite endpoint 0
    assert ox.boundary_value(ox.limiting_weight(-0.5)) == math.inf


# ---------------------------------------------------------------------------
# base admissibility


def test_check_cA_const_holds():
    rep = ox.check_cA(ox.const_weight(0.0))
    assert rep.holds_ca
    assert rep.margin_ca > 0.5  # margin is exactly 1 in closed form


def test_check_cA_ohsawa2_holds():
    rep = ox.check_cA(ox.ohsawa2_weight(2, 1.0))
    assert rep.holds_ca


def test_check_cA_catalog_defaults_hold():
    for w in ox.catalog_defaults():
        rep = ox.check_cA(w)
        assert rep.holds_ca, (w.name, rep.margin_ca, rep.worst_t)


def test_check_cA_bump_fails_at_peak():
    rep = ox.check_cA(ox.bump_weight())
    assert not rep.holds_ca
    assert rep.margin_ca < 0.0
    assert 0.85 < rep.worst_t < 1.15


def test_check_cA_bump_brute_force_margins():
    # independent route: direct quadrature of I and M1 near the bump,
    # no shared cumulative machinery
    g = lambda s: 1.0 + 99.0 * ox.smooth_bump((s - 1.0) / 0.1)
    lo = 0.0
    worst = (math.inf, None)
    for t in np.linspace(0.5, 1.5, 101):
        I, _ = integrate.quad(g, lo, t, limit=200)
        M1, _ = integrate.quad(lambda s: s * g(s), lo, t, limit=200)
        J = t * I - M1
        margin = (I * I - g(t) * J) / (g(t) * J)
        if margin < worst[0]:
            worst = (margin, t)
    assert worst[0] < 0.0
    rep = ox.check_cA(ox.bump_weight())
    assert abs(rep.worst_t - worst[1]) < 0.15


def test_check_cA_needs_dense_grid():
    with pytest.raises(ValueError):
        ox.check_cA(ox.const_weight(0.0), grid=np.linspace(0.1, 5.0, 10))


def test_report_carries_certificate_fields():
    rep = ox.check_cA(ox.const_weight(0.0))
    assert len(rep.grid) >= 64
    assert rep.total_integral is not None
    assert rep.boundary_value is not None
    assert rep.worst_t is not None


# ---------------------------------------------------------------------------
# delta-form admissibility


def test_check_cA_delta_const():
    rep = ox.check_cA_delta(ox.const_weight(0.0), 1.0)
    assert rep.holds_ca_delta
    assert rep.delta == 1.0


def test_check_cA_delta_demailly():
    rep = ox.check_cA_delta(ox.demailly_weight(1.0), 1.0)
    assert rep.holds_ca_delta


def test_check_cA_delta_bump_fails():
    rep = ox.check_cA_delta(ox.bump_weight(), 1.0e6)
    assert not rep.holds_ca_delta
    assert rep.margin_ca_delta < 0.0


def test_check_cA_delta_names_failed_hypothesis():
    with pytest.raises(BoundaryValueError) as exc:
        ox.check_cA_delta(ox.ohsawa2_weight(2, 1.0), 1.0)
    assert "c_{A}(-A)e^{A}" in str(exc.value)


def test_check_cA_delta_divergent_boundary():
    with pytest.raises(BoundaryValueError):
        ox.check_cA_delta(ox.limiting_weight(-0.5), 1.0)


def test_check_cA_delta_rejects_bad_delta():
    with pytest.raises(ValueError):
        ox.check_cA_delta(ox.const_weight(0.0), 0.0)


def test_margin_signs_agree_between_forms_for_bump():
    # both the base and shifted sweeps must flag the same defect
    base = ox.check_cA(ox.bump_weight())
    shifted = ox.check_cA_delta(ox.bump_weight(), 1.0e6)
    assert (base.margin_ca < 0) == (shifted.margin_ca_delta < 0)


# ---------------------------------------------------------------------------
# sufficient condition


def test_sufficient_concise_at_origin():
    assert ox.check_sufficient(ox.concise_weight(1.0), 0.0) is True


def test_sufficient_const_false():
    assert ox.check_sufficient(ox.const_weight(0.0), 0.0) is False


def test_sufficient_bump_false():
    assert ox.check_sufficient(ox.bump_weight(), 0.0) is False


def test_sufficient_needs_right_crossover():
    w = ox.ohsawa2_weight(2, 1.0)
    # crossover of (log g)' sits at -2 log 2, not at the origin
    assert ox.check_sufficient(w, 0.0) is False
    assert ox.check_sufficient(w, -2.0 * math.log(2.0)) is True


def test_sufficient_implies_base_admissibility():
    for w, a in ((ox.concise_weight(1.0), 0.0),
                 (ox.ohsawa2_weight(2, 1.0), -2.0 * math.log(2.0))):
        assert ox.check_sufficient(w, a)
        assert ox.check_cA(w).holds_ca


# ---------------------------------------------------------------------------
# tail splicing


def test_approximate_weight_demailly():
    w = ox.demailly_weight(1.0)
    w2, diff = ox.approximate_weight(w, 10.0)
    assert diff < 0.1
    assert diff <= 2.0 / 10.0
    ts = np.array([2.0 + 1e-6, 3.5, 7.0, 11.999])
    np.testing.assert_array_equal(w2.eval(ts), w.eval(ts))
    assert ox.check_cA(w2).holds_ca


def test_approximate_weight_diff_vanishes():
    w = ox.const_weight(0.0)
    diffs = [ox.approximate_weight(w, B)[1] for B in (5.0, 10.0, 20.0)]
    assert all(d <= 2.0 / B for d, B in zip(diffs, (5.0, 10.0, 20.0)))
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] < 1e-9


def test_approximate_weight_unbounded_a():
    w = ox.concise_weight(1.0)
    w2, diff = ox.approximate_weight(w, 10.0)
    assert diff <= 2.0 / 10.0
    ts = np.array([-3.0, 0.0, 9.9])
    np.testing.assert_array_equal(w2.eval(ts), w.eval(ts))
    assert ox.check_cA(w2).holds_ca


def test_approximate_weight_rejects_bad_input():
    with pytest.raises(ValueError):
        ox.approximate_weight(ox.const_weight(0.0), -1.0)
    with pytest.raises(AdmissibilityError):
        ox.approximate_weight(ox.bump_weight(), 10.0)


# ---------------------------------------------------------------------------
# constructors, parsing, tables


def test_make_weight_rejects_divergent():
    with pytest.raises(NonIntegrableWeightError):
        ox.make_weight("grows", 0.0, lambda t: np.exp(2.0 * np.asarray(t)))


def test_make_weight_rejects_nonpositive():
    with pytest.raises(ValueError):
        ox.make_weight("signed", 0.0, lambda t: np.asarray(t) - 1.0)


def test_parse_weight_roundtrip():
    for text, name in [("const", "const"), ("ohsawa2(2,1)", "ohsawa2(2,1)"),
                       ("concise(1)", "concise(1)"), ("demailly(1)", "demailly(1)"),
                       ("dhp(0.5,2)", "dhp(0.5,2)"), ("limiting(-0.5)", "limiting(-0.5)"),
                       ("mv", "mv(t^2)"), ("bump", "bump")]:
        assert ox.parse_weight(text).name == name


def test_parse_weight_rejects_unknown():
    with pytest.raises(ValueError):
        ox.parse_weight("mystery(3)")
    with pytest.raises(ValueError):
        ox.parse_weight("const(1")


def test_catalog_has_seven_families():
    defaults = ox.catalog_defaults()
    assert len(defaults) == 7
    assert len({w.name for w in defaults}) == 7


def test_table_weight_tracks_sampled_family():
    src = ox.concise_weight(1.0)
    xs = np.linspace(-12.0, 12.0, 400)
    w = ox.table_weight(xs, src.eval(xs), name="sampled")
    assert relerr(ox.weight_moment(w, 0), 1.0) < 5e-4
    assert ox.check_cA(w).holds_ca


def test_boundary_value_unstable_raises():
    # weighted integrand oscillates at the endpoint: no limit to certify
    w = ox.WeightSpec(
        "wobble", 0.0,
        lambda t: np.exp(t) * (2.0 + np.sin(1.0 / np.asarray(t, dtype=np.float64))))
    with pytest.raises(LimitUndefinedError):
        ox.boundary_value(w)


# ---------------------------------------------------------------------------
# property tests


@settings(max_examples=12, deadline=None)
@given(b=st.floats(0.15, 1.0), alpha=st.floats(1.0, 4.0))
def test_dhp_moment_property(b, alpha):
    w = ox.dhp_weight(b, alpha)
    assert relerr(ox.weight_moment(w, 0), math.exp(-b * alpha) / b) < 1e-9


@settings(max_examples=10, deadline=None)
@given(m=st.integers(1, 4), eps=st.floats(0.3, 3.0))
def test_ohsawa2_moment_property(m, eps):
    w = ox.ohsawa2_weight(m, eps)
    want = math.exp(math.lgamma(m + 1) + math.lgamma(eps) - math.lgamma(m + eps))
    assert relerr(ox.weight_moment(w, 0), want) < 1e-9


@settings(max_examples=8, deadline=None)
@given(B=st.floats(4.0, 30.0))
def test_splice_moment_bound_property(B):
    w2, diff = ox.approximate_weight(ox.const_weight(0.0), B)
    assert diff <= 2.0 / B
    assert ox.check_cA(w2).holds_ca

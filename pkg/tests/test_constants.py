import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from matrixballs import (
    A_pq_classical,
    C_pq,
    DegenerateInputWarning,
    EnsembleSpec,
    UllmanDist,
    a_p_beta,
    a_pq,
    asymptotic_volume_radius,
    b_p,
    delta_p_closed_form,
    intersection_threshold,
    log_c_n_beta,
    ullman_pdf,
)
from matrixballs.constants import c_n_beta_limit, delta_p_entropy_form, log_volume_surrogate
from oracles import log_c_direct

ps = st.floats(0.5, 8.0)


def test_spec_fields():
    s = EnsembleSpec(4, 2, "inf")
    assert s.m == 12 and s.dim == 16 and s.p_is_inf
    assert s.as_dict() == {"n": 4, "beta": 2.0, "p": "inf"}
    with pytest.raises(ValueError):
        EnsembleSpec(0, 2, 2)
    with pytest.raises(ValueError):
        EnsembleSpec(3, -1, 2)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("beta", [1.0, 2.0, 4.0, 0.7])
def test_log_c_matches_literal_product(n, beta):
    assert log_c_n_beta(n, beta) == pytest.approx(log_c_direct(n, beta), abs=1e-11)


def test_log_c_goe_two_by_two():
    # (1/2) * (2 sqrt(pi) / Gamma(1/2))^-1 * [2 sqrt(2 pi) / (sqrt2 Gamma(1/2))] * [4 pi / sqrt2]
    assert math.exp(log_c_n_beta(2, 1.0)) == pytest.approx(math.pi * math.sqrt(2), rel=1e-12)


def test_log_c_large_n_finite():
    assert math.isfinite(log_c_n_beta(10_000, 4.0))


@pytest.mark.parametrize("beta", [1.0, 2.0, 4.0])
def test_c_ratio_trends_to_one(beta):
    ratios = [
        math.exp(0.5 * beta * math.log(n) + 2 / n**2 * log_c_n_beta(n, beta)) / c_n_beta_limit(beta)
        for n in (50, 200, 2000, 20000)
    ]
    assert all(a < b < 1.0 for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] > 0.998


def test_delta_p_special_values():
    assert delta_p_closed_form(2.0) == pytest.approx(math.exp(-0.25), rel=1e-15)
    assert delta_p_closed_form(math.inf) == 0.5
    assert delta_p_closed_form("inf") == 0.5


@settings(max_examples=40, deadline=None)
@given(ps)
def test_delta_p_two_forms_agree(p):
    assert delta_p_closed_form(p) == pytest.approx(delta_p_entropy_form(p), rel=1e-13)


def test_delta_p_tends_to_half():
    assert delta_p_closed_form(1e6) == pytest.approx(0.5, rel=1e-5)


def test_b_p_values():
    assert b_p(2.0) == pytest.approx(2.0, rel=1e-14)
    assert b_p(1.0) == pytest.approx(math.pi, rel=1e-14)


@pytest.mark.parametrize("p,q", [(1.0, 2.0), (2.0, 4.0), (4.0, 1.5), (0.7, 3.0)])
def test_C_pq_against_quadrature(p, q):
    def mom(r):
        v, _ = integrate.quad(lambda x: x**r * ullman_pdf(UllmanDist(p), x), 0, 1, limit=200)
        return 2 * v

    assert C_pq(p, q) == pytest.approx(mom(q) ** (1 / q) / mom(p) ** (1 / p), rel=1e-7)


def test_C_pq_semicircle():
    # E x^2 = 1/4, E x^4 = 2/16 on [-1, 1]
    assert C_pq(2.0, 4.0) == pytest.approx((1 / 8) ** 0.25 / 0.5, rel=1e-14)
    assert C_pq(3.0, 3.0) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(ps, ps)
def test_threshold_collapse(p, q):
    if abs(p - q) < 1e-9:
        return
    assert float(intersection_threshold(p, q)) == pytest.approx(C_pq(p, q) * a_pq(p, q), abs=1e-12)


def test_threshold_degenerate():
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        t = intersection_threshold(2.0, 2.0)
    assert t.degenerate and t.value == 1.0
    assert any(issubclass(x.category, DegenerateInputWarning) for x in w)


def test_a_p_beta_and_a_pq():
    assert a_p_beta(2.0, 2.0) == pytest.approx(math.exp(-0.5) * c_n_beta_limit(2.0))
    assert a_pq(2.0, "inf") == pytest.approx(0.5 / math.exp(-0.25))


def test_classical_threshold_values():
    assert A_pq_classical(math.inf, 2.0) == pytest.approx(0.83821, abs=5e-6)
    assert A_pq_classical(1.0, 2.0) == pytest.approx(0.93019, abs=5e-6)


@pytest.mark.parametrize("q", [1.0, 2.0, 5.0])
def test_classical_threshold_continuous_at_inf(q):
    assert A_pq_classical(1e7, q) == pytest.approx(A_pq_classical(math.inf, q), rel=1e-5)


def test_classical_threshold_domain():
    with pytest.raises(ValueError):
        A_pq_classical(0.5, 2.0)
    with pytest.raises(ValueError):
        A_pq_classical(2.0, math.inf)
    with pytest.raises(ValueError):
        A_pq_classical(2.0, 2.0)


def test_asymptotic_radius():
    spec = EnsembleSpec(10, 2.0, 2.0)
    r = asymptotic_volume_radius(spec)
    assert r.kind == "asymptotic surrogate"
    assert r.value == pytest.approx(10 ** -2 * a_p_beta(2.0, 2.0))
    rb = asymptotic_volume_radius(spec, "beta_n2")
    assert rb.value == pytest.approx(r.value ** 0.5)
    assert log_volume_surrogate(spec) == pytest.approx(50 * math.log(r.value))
    with pytest.raises(ValueError):
        asymptotic_volume_radius(spec, "bad")
    assert asymptotic_volume_radius(EnsembleSpec(10, 2.0, "inf")).value == pytest.approx(
        10 ** -1 * a_p_beta(math.inf, 2.0)
    )

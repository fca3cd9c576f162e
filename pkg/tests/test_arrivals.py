import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from gixq import (
    BatchSizeDistribution,
    ConfigError,
    Deterministic,
    Erlang,
    Exponential,
    HyperExponential,
    lst,
    lst_derivative,
    pade_surrogate,
    pgf,
)
from gixq.arrivals import pade_coefficients
from gixq.errors import LSTSingularityError
from models import TABLE1_BATCH
from oracles import pade_exp_closed_form

ALL_LAWS = [
    Exponential(10.0),
    Erlang(4, 10.0),
    Deterministic(0.1),
    HyperExponential((0.3, 0.7), (3.0, 20.0)),
]


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda m: m.family)
def test_lst_at_zero_is_one(law):
    assert lst(law, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_deterministic_lst_value():
    assert lst(Deterministic(0.1), 2.0) == pytest.approx(0.818730753, abs=1e-9)


def test_erlang_lst_hand_value_and_quadrature():
    s = 2.0 + 15.0 * (1 - 0.5)
    expected = (40.0 / (40.0 + 9.5)) ** 4
    law = Erlang(4, 10.0)
    assert lst(law, s) == pytest.approx(expected, rel=1e-14)
    pdf = stats.gamma(a=4, scale=1 / 40.0).pdf
    quad, _ = integrate.quad(lambda t: math.exp(-s * t) * pdf(t), 0, np.inf)
    assert lst(law, s) == pytest.approx(quad, rel=1e-9)


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda m: m.family)
def test_lst_matches_numerical_integration_at_complex_points(law):
    s = 3.0 + 4.0j
    if isinstance(law, Deterministic):
        ref = np.exp(-s * law.period)
    else:
        sample = {
            "exponential": lambda t: 10 * np.exp(-10 * t),
            "erlang": stats.gamma(a=4, scale=1 / 40.0).pdf,
            "hyperexponential": lambda t: 0.3 * 3 * np.exp(-3 * t) + 0.7 * 20 * np.exp(-20 * t),
        }[law.family]
        re, _ = integrate.quad(lambda t: (np.exp(-s * t) * sample(t)).real, 0, np.inf, limit=200)
        im, _ = integrate.quad(lambda t: (np.exp(-s * t) * sample(t)).imag, 0, np.inf, limit=200)
        ref = re + 1j * im
    assert abs(lst(law, s) - ref) < 1e-9


@pytest.mark.parametrize(
    "law, expected",
    [(Exponential(10.0), -0.1), (Deterministic(0.1), -0.1), (Erlang(4, 10.0), -0.1)],
    ids=["exp", "det", "erlang"],
)
def test_first_derivative_at_zero_is_minus_mean(law, expected):
    assert lst_derivative(law, 0.0, 1) == pytest.approx(expected, rel=1e-12)


def test_erlang_derivative_against_central_difference():
    law, h = Erlang(4, 10.0), 1e-6
    fd = (lst(law, h) - lst(law, -h)) / (2 * h)
    assert lst_derivative(law, 0.0) == pytest.approx(fd, abs=1e-8)


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda m: m.family)
@pytest.mark.parametrize("order", [1, 2])
def test_derivatives_match_finite_differences_on_random_points(law, order):
    rng = np.random.default_rng(11)
    s = rng.uniform(1e-6, 50.0, size=1000)
    s[s < 1e-5] = 1e-5
    h = 1e-6 if order == 1 else 1e-4
    if order == 1:
        fd = (lst(law, s + h) - lst(law, s - h)) / (2 * h)
    else:
        fd = (lst(law, s + h) - 2 * lst(law, s) + lst(law, s - h)) / h**2
    exact = lst_derivative(law, s, order)
    tol = 1e-6 if order == 1 else 1e-4
    assert np.all(np.abs(exact - fd) < tol * (1 + np.abs(exact)))


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda m: m.family)
def test_second_derivative_at_zero_is_second_moment(law):
    second = {
        "exponential": 2 / 100.0,
        "erlang": 4 * 5 / 40.0**2,
        "deterministic": 0.01,
        "hyperexponential": 0.3 * 2 / 9 + 0.7 * 2 / 400,
    }[law.family]
    assert lst_derivative(law, 0.0, 2) == pytest.approx(second, rel=1e-12)


def test_unsupported_derivative_order():
    with pytest.raises(ValueError):
        lst_derivative(Exponential(1.0), 0.0, 3)


def test_pole_raises():
    with pytest.raises(LSTSingularityError):
        lst(Exponential(10.0), -10.0)
    with pytest.raises(ZeroDivisionError):
        lst(Erlang(2, 1.0), -2.0)


@pytest.mark.parametrize(
    "make",
    [
        lambda: Exponential(0.0),
        lambda: Exponential(-1.0),
        lambda: Erlang(0, 1.0),
        lambda: Deterministic(0.0),
        lambda: HyperExponential((0.5, 0.6), (1.0, 2.0)),
        lambda: HyperExponential((0.5, 0.5), (1.0, -2.0)),
    ],
)
def test_invalid_laws_rejected(make):
    with pytest.raises(ConfigError):
        make()


@pytest.mark.parametrize("law", ALL_LAWS, ids=lambda m: m.family)
def test_rate_is_inverse_mean(law):
    assert law.rate * law.mean == pytest.approx(1.0, rel=1e-14)
    assert law.with_rate(3.0).rate == pytest.approx(3.0, rel=1e-14)


def test_erlang_parameterizations_agree():
    assert Erlang.from_phase_rate(4, 40.0) == Erlang(4, 10.0)
    assert Erlang(4, 10.0).phase_rate == 40.0


@given(kappa=st.floats(0.1, 10.0), s=st.floats(0.0, 30.0))
@settings(max_examples=60, deadline=None)
def test_scaling_rates_rescales_the_transform(kappa, s):
    for law in ALL_LAWS:
        assert lst(law.scaled(kappa), kappa * s) == pytest.approx(lst(law, s), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("law", ALL_LAWS[:2] + ALL_LAWS[3:], ids=lambda m: m.family)
def test_rational_form_reproduces_lst(law):
    num, den = law.rational()
    s = np.array([0.0, 0.7, 5.0 + 2.0j, 40.0])
    vals = np.polynomial.polynomial.polyval(s, num) / np.polynomial.polynomial.polyval(s, den)
    np.testing.assert_allclose(vals, lst(law, s), rtol=1e-13)


def test_deterministic_has_no_rational_form():
    assert Deterministic(0.1).rational() is None


# --------------------------------------------------------------------------- Pade


def test_pade_one_one_of_exp():
    taylor = [(-1) ** j / math.factorial(j) for j in range(3)]
    p, q, _ = pade_coefficients(taylor, 1, 1)
    np.testing.assert_allclose(p, [1.0, -0.5], atol=1e-15)
    np.testing.assert_allclose(q, [1.0, 0.5], atol=1e-15)
    sur = pade_surrogate(Deterministic(1.0), 1, 1, radius=0.5)
    assert sur(0.3) == pytest.approx((1 - 0.15) / (1 + 0.15), rel=1e-15)


@pytest.mark.parametrize("m, n", [(2, 2), (5, 5), (8, 6), (15, 15)])
def test_pade_matches_closed_form(m, n):
    taylor = [Fraction((-1) ** j, math.factorial(j)) for j in range(m + n + 1)]
    p, q, _ = pade_coefficients(taylor, m, n)
    p_ref, q_ref = pade_exp_closed_form(m, n)
    np.testing.assert_allclose(p, p_ref, rtol=1e-14, atol=0)
    np.testing.assert_allclose(q, q_ref, rtol=1e-14, atol=0)


def test_pade_fifteen_at_seventeen():
    sur = pade_surrogate(Deterministic(0.1), 15, 15, radius=17.0)
    assert abs(sur(17.0) - math.exp(-1.7)) < 1e-12
    assert sur(0.0) == pytest.approx(1.0, abs=1e-12)


def test_pade_accuracy_on_disc_of_radius_five():
    law = Deterministic(0.25)
    sur = pade_surrogate(law)
    assert sur.validity_radius == pytest.approx(20.0)
    s = 20.0 * np.sqrt(np.random.default_rng(0).uniform(size=500)) * np.exp(
        2j * np.pi * np.random.default_rng(1).uniform(size=500)
    )
    rel = np.abs(sur(s) / lst(law, s) - 1)
    assert rel.max() < 1e-10
    assert sur.max_rel_error < 1e-10


def test_pade_condition_reported_as_diagnostic():
    sur = pade_surrogate(Deterministic(0.1))
    assert sur.condition > 1e10
    assert sur.order == (15, 15)


def test_pade_rejects_non_deterministic():
    with pytest.raises(TypeError):
        pade_surrogate(Exponential(1.0))


def test_pade_pole_inside_disc_is_reported():
    from gixq.errors import PadeError

    with pytest.raises(PadeError) as info:
        pade_surrogate(Deterministic(1.0), radius=100.0)
    assert info.value.condition is not None


# --------------------------------------------------------------------------- batches


def test_table_batch_pgf():
    g = BatchSizeDistribution.from_mapping(TABLE1_BATCH)
    assert g.b == 10
    assert g.gbar == pytest.approx(4.2)
    assert pgf(g, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert pgf(g, 0.0) == 0.0
    direct = 0.2 * 0.5 + 0.4 * 0.5**3 + 0.3 * 0.5**6 + 0.1 * 0.5**10
    assert pgf(g, 0.5) == pytest.approx(direct, rel=1e-15)
    assert abs(pgf(g, 0.5) - 0.15478) < 1e-5


@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=12), st.complex_numbers(max_magnitude=1.0))
@settings(max_examples=100, deadline=None)
def test_pgf_matches_direct_sum(weights, z):
    w = np.array(weights) / sum(weights)
    g = BatchSizeDistribution(tuple(w[:-1]) + (1.0 - math.fsum(w[:-1]),))
    direct = sum(p * z ** (i + 1) for i, p in enumerate(g.probs))
    assert abs(g.pgf(z) - direct) < 1e-12
    assert abs(g.pgf(1.0) - 1.0) < 1e-12


def test_reversed_poly_layout():
    g = BatchSizeDistribution.from_mapping({1: 0.5, 3: 0.5})
    np.testing.assert_array_equal(g.reversed_poly(), [0.5, 0.0, 0.5])
    assert g.as_mapping() == {1: 0.5, 3: 0.5}


@pytest.mark.parametrize(
    "mass",
    [{}, {0: 1.0}, {1: 0.5, 2: 0.4}, {1: -0.1, 2: 1.1}, {1: 1.0, 4: 0.0, 3: float("nan")}],
)
def test_invalid_batch_laws_rejected(mass):
    with pytest.raises(ConfigError):
        BatchSizeDistribution.from_mapping(mass)


def test_trailing_zero_mass_rejected_in_dense_form():
    with pytest.raises(ConfigError):
        BatchSizeDistribution((0.5, 0.5, 0.0))


def test_small_rounding_is_renormalized():
    g = BatchSizeDistribution.from_mapping({1: 0.2, 3: 0.4, 6: 0.3, 10: 0.1 + 5e-10})
    assert math.fsum(g.probs) == pytest.approx(1.0, abs=1e-15)

import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as strat

from robinsplit.errors import ConfigurationError
from robinsplit.manufactured import (
    case_example1,
    case_example2,
    case_example3,
    case_names,
    default_order,
    exact_first_step_data,
    get_case,
)

ALL_CASES = [case_example1(), case_example2(), case_example3()]


def _random_points(rng, n, ylo=0.0, yhi=1.0):
    pts = rng.uniform(size=(n, 2))
    pts[:, 1] = ylo + (yhi - ylo) * pts[:, 1]
    return pts


def test_case_registry():
    assert case_names() == ("example1", "example2", "example3")
    assert get_case("example2").name == "example2"
    with pytest.raises(ConfigurationError):
        get_case("example9")


def test_default_orders():
    assert default_order("example1") == 1
    assert default_order("example2") == 2
    assert default_order("example3") == 2


def test_pde_consistency_closed_forms():
    # dt_u - nu * tr(hess_u) must equal the stored forcing everywhere
    rng = np.random.default_rng(42)
    for case in ALL_CASES:
        for _ in range(20):
            t = rng.uniform(0.0, 1.0)
            x = _random_points(rng, 1)[0]
            lap = case.hess_u(t, x)[0, 0] + case.hess_u(t, x)[1, 1]
            residual = case.dt_u(t, x) - case.nu_f * lap
            f = 0.0 if case.f_f is None else case.f_f(t, x)
            assert abs(residual - f) < 1e-10, case.name


def test_time_derivative_against_differences():
    rng = np.random.default_rng(1)
    eps = 1e-6
    for case in ALL_CASES:
        t = 0.37
        x = _random_points(rng, 8)
        fd = (case.u_exact(t + eps, x) - case.u_exact(t - eps, x)) / (2 * eps)
        np.testing.assert_allclose(fd, case.dt_u(t, x), atol=1e-5)


def test_gradient_against_differences():
    rng = np.random.default_rng(2)
    eps = 1e-6
    for case in ALL_CASES:
        t = 0.61
        x = _random_points(rng, 8)
        for axis in (0, 1):
            shift = np.zeros(2)
            shift[axis] = eps
            fd = (case.u_exact(t, x + shift) - case.u_exact(t, x - shift)) / (2 * eps)
            np.testing.assert_allclose(fd, case.grad_u(t, x)[:, axis], atol=1e-5)


def test_hessian_against_differences():
    rng = np.random.default_rng(3)
    eps = 1e-4
    for case in ALL_CASES:
        t = 0.25
        x = _random_points(rng, 4)
        for axis in (0, 1):
            shift = np.zeros(2)
            shift[axis] = eps
            fd = (
                case.grad_u(t, x + shift) - case.grad_u(t, x - shift)
            ) / (2 * eps)
            np.testing.assert_allclose(fd, case.hess_u(t, x)[:, axis, :], atol=1e-6)


def test_interface_continuity():
    rng = np.random.default_rng(4)
    for case in ALL_CASES:
        x1 = rng.uniform(size=12)
        pts = np.stack([x1, np.full_like(x1, case.split_y)], axis=-1)
        for t in (0.0, 0.3, 1.0):
            np.testing.assert_allclose(
                case.u_exact(t, pts), case.w_exact(t, pts), atol=1e-14
            )


def test_flux_balance_across_interface():
    # nu_s grad w . n_s + nu_f grad u . n_f with n_f = +e2 and n_s = -e2
    rng = np.random.default_rng(5)
    for case in ALL_CASES:
        x1 = rng.uniform(size=12)
        pts = np.stack([x1, np.full_like(x1, case.split_y)], axis=-1)
        for t in (0.0, 0.5):
            jump = case.nu_f * case.grad_u(t, pts)[:, 1] - case.nu_s * case.grad_w(t, pts)[:, 1]
            assert np.max(np.abs(jump)) < 1e-14


def test_multiplier_matches_normal_flux():
    rng = np.random.default_rng(6)
    for case in ALL_CASES:
        x1 = rng.uniform(size=12)
        pts = np.stack([x1, np.full_like(x1, case.split_y)], axis=-1)
        for t in (0.0, 0.8):
            np.testing.assert_allclose(
                case.l_exact(t, x1),
                case.nu_f * case.grad_u(t, pts)[:, 1],
                atol=1e-13,
            )


def test_multiplier_value_at_origin():
    case = case_example1()
    expected = -math.pi * math.sqrt(2.0) / 2.0
    assert abs(case.l_exact(0.0, np.array(0.0)) - expected) < 1e-12
    assert abs(expected + 2.221441469) < 1e-9


def test_example1_forcing_free():
    case = case_example1()
    assert case.f_f is None and case.f_s is None


def test_example2_forcing_formula():
    case = case_example2()
    t, pts = 0.7, np.array([[0.3, 0.4]])
    expected = (3 * t**2 + 2 * np.pi**2 * (t**3 + 1)) * np.cos(np.pi * 0.3) * np.sin(
        np.pi * 0.4
    )
    np.testing.assert_allclose(case.f_f(t, pts), [expected], rtol=1e-14)


def test_example3_forcing_formula():
    case = case_example3()
    t, pts = 0.2, np.array([[0.1, 0.6]])
    expected = (1 + 2 * np.pi**2) * np.exp(t) * np.cos(np.pi * 0.1) * np.sin(np.pi * 0.6)
    np.testing.assert_allclose(case.f_f(t, pts), [expected], rtol=1e-14)


def test_example2_initial_profile():
    case = case_example2()
    pts = np.array([[0.25, 0.5]])
    np.testing.assert_allclose(
        case.u_exact(0.0, pts), np.cos(np.pi * 0.25) * np.sin(np.pi * 0.5), rtol=1e-14
    )


@given(strat.floats(min_value=0.0, max_value=1.0), strat.floats(min_value=0.0, max_value=1.0))
@settings(deadline=None, max_examples=40)
def test_mirror_antisymmetry(t, x1):
    for case in ALL_CASES:
        a = case.u_exact(t, np.array([x1, 0.4]))
        b = case.u_exact(t, np.array([1.0 - x1, 0.4]))
        assert abs(a + b) < 1e-12 * max(1.0, abs(a))


# -- first-step data --------------------------------------------------------

def test_first_step_data_example3_G1():
    dt = 0.125
    data = exact_first_step_data(case_example3(), dt)
    x1 = np.array([0.0, 0.3, 0.9])
    expected = (
        (np.exp(2 * dt) - 2 * np.exp(dt) + 1.0)
        / dt
        * np.cos(np.pi * x1)
        * np.sin(0.75 * np.pi)
    )
    np.testing.assert_allclose(data.G1[2](x1), expected, rtol=1e-12)


def test_first_step_data_example1_g2():
    dt = 0.0625
    data = exact_first_step_data(case_example1(), dt)
    tp = 2 * np.pi**2
    expected = -(np.pi * np.sqrt(2.0) / 2.0) * (np.exp(-2 * tp * dt) - np.exp(-tp * dt))
    assert abs(data.g2[2](np.array(0.0)) - expected) < 1e-12


def test_first_step_differences_vanish_for_frozen_time():
    # freeze the time factor by hand: differences of equal samples vanish
    case = case_example2()
    frozen = case.u_exact

    def const_u(t, x):
        return frozen(0.0, x)

    import dataclasses

    const_case = dataclasses.replace(
        case,
        u_exact=const_u,
        w_exact=const_u,
        l_exact=lambda t, x1: case.l_exact(0.0, x1),
    )
    data = exact_first_step_data(const_case, 0.1)
    x1 = np.linspace(0.0, 1.0, 7)
    pts = np.stack([x1, np.full_like(x1, case.split_y)], axis=-1)
    for n in (2, 3):
        assert np.max(np.abs(data.G1[n](x1))) < 1e-13
        assert np.max(np.abs(data.G2[n](x1))) < 1e-13
    assert np.max(np.abs(data.ddu(pts))) < 1e-13
    assert np.max(np.abs(data.ddw(pts))) < 1e-13


def test_first_step_second_difference_quotient():
    case = case_example2()
    dt = 0.2
    data = exact_first_step_data(case, dt)
    pts = np.array([[0.2, 0.3], [0.7, 0.5]])
    expected = (
        case.u_exact(2 * dt, pts) - 2 * case.u_exact(dt, pts) + case.u_exact(0.0, pts)
    ) / dt
    np.testing.assert_allclose(data.ddu(pts), expected, rtol=1e-13)


def test_first_step_rejects_bad_dt():
    with pytest.raises(ConfigurationError):
        exact_first_step_data(case_example1(), 0.0)

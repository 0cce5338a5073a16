import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from grid_oracles import prox_abs_grid
from proxeps.oracles import InvalidCertificateError, L1Norm, TotalVariation
from proxeps.prox import (
    AbsoluteGap,
    PreconditionError,
    RAbsolute,
    SigmaApprox,
    SigmaQuasi,
    check_accel_criterion,
    check_r_approximate,
    check_sigma_approximate,
    check_sigma_quasi_approximate,
    e_optimality_excess,
    prox_l1,
    r_to_e,
    solve_prox_absolute,
    solve_prox_segment,
    solve_prox_tv_dual,
    tv_dual_gap,
)

ABS = L1Norm(1.0, dim=1)
a = np.array


def test_prox_l1_examples():
    assert np.array_equal(prox_l1(1, [2.0]), [1.0])
    assert np.array_equal(prox_l1(0.7, [0.0, 0.0]), [0.0, 0.0])
    assert np.allclose(prox_l1(0.5, [2, -0.3]), [1.5, 0])
    with pytest.raises(ValueError):
        prox_l1(0.0, [1.0])


@pytest.mark.parametrize("alpha,z", [(1, 2.0), (0.5, 2.0), (0.5, -0.3), (2.0, -5.5), (0.1, 0.05)])
def test_prox_l1_matches_grid(alpha, z):
    # a value-based grid argmin resolves the minimizer to about sqrt(machine eps)
    assert abs(prox_l1(alpha, [z])[0] - prox_abs_grid(alpha, z)) < 1e-7 * max(1.0, abs(z))


def test_check_r_approximate_examples():
    for r in (0.0, 0.3, 10.0):
        res = check_r_approximate(1, a([2.0]), a([1.0]), a([1.0]), r, ABS)
        assert res.passed and res.lhs == 0
    res = check_r_approximate(1, a([2.0]), a([1.5]), a([1.0]), 0.5, ABS)
    assert res.passed and np.isclose(res.lhs, 0.5)
    assert not check_r_approximate(1, a([2.0]), a([1.5]), a([1.0]), 0.49, ABS).passed
    with pytest.raises(InvalidCertificateError):
        check_r_approximate(1, a([2.0]), a([1.5]), a([0.2]), 1.0, ABS)


def test_check_sigma_approximate_examples():
    for s in (0.0, 0.5, 0.99):
        res = check_sigma_approximate(1, a([2.0]), a([1.0]), a([1.0]), 0.0, s, ABS)
        assert res.passed and res.lhs == 0
    res = check_sigma_approximate(1, a([2.0]), a([1.2]), a([1.0]), 0.0, 0.25, ABS)
    assert np.isclose(res.lhs, 0.04) and np.isclose(res.rhs, 0.64 * 0.0625) and res.passed
    assert not check_sigma_approximate(1, a([2.0]), a([1.2]), a([1.0]), 0.0, 0.24, ABS).passed
    assert not check_sigma_approximate(1, a([2.0]), a([1.2]), a([1.0]), 0.0, 0.0, ABS).passed


def test_check_sigma_quasi_examples():
    assert check_sigma_quasi_approximate(1, a([2.0]), a([1.0]), a([1.0]), 0.0, 0.0, ABS).passed
    s_min = np.sqrt(0.04 / 1.64)
    res = check_sigma_quasi_approximate(1, a([2.0]), a([1.2]), a([1.0]), 0.0, 0.3, ABS)
    assert np.isclose(res.rhs, 1.64 * 0.09)
    assert check_sigma_quasi_approximate(1, a([2.0]), a([1.2]), a([1.0]), 0.0, s_min * 1.001, ABS).passed
    assert not check_sigma_quasi_approximate(1, a([2.0]), a([1.2]), a([1.0]), 0.0, s_min * 0.999, ABS).passed


def test_check_accel_criterion_examples():
    res = check_accel_criterion(1, a([2.0]), a([2.0]), a([0.0]), a([1.0]), a([1.0]), 0.0, 0.5, ABS)
    assert res.passed and res.lhs == 0
    res = check_accel_criterion(1, a([2.0]), a([2.0]), a([0.0]), a([1.2]), a([1.0]), 0.0, 0.5, ABS)
    assert np.isclose(res.lhs, 0.04) and np.isclose(res.rhs, 0.25 * (0.64 + 1.0))
    with pytest.raises(PreconditionError):
        check_accel_criterion(1, a([2.5]), a([2.0]), a([0.0]), a([1.2]), a([1.0]), 0.0, 0.5, ABS)


def test_r_to_e_examples():
    assert r_to_e(0.5, 0.25) == 1.0
    assert r_to_e(0.0, 3.0) == 0.0
    assert r_to_e(0.37, 0.5) == 0.37
    assert r_to_e(0.5, 1.0, squared=True) == 0.125
    with pytest.raises(ValueError):
        r_to_e(0.1, 0.0)


def test_solve_prox_absolute_examples():
    c = solve_prox_absolute(ABS, 1.0, a([2.0]), 0.0)
    assert np.array_equal(c.x_bar, [1.0]) and c.lhs == 0
    c = solve_prox_absolute(ABS, 1.0, a([2.0]), 0.5)
    assert 1.0 <= c.x_bar[0] <= 1.5 and c.lhs <= 0.5 + 1e-12
    assert np.isclose(c.lhs, abs(c.x_bar[0] - 1.0))
    c = solve_prox_absolute(ABS, 1.0, a([0.0]), 0.3)
    assert np.array_equal(c.x_bar, [0.0])


def test_segment_search_certificates_are_valid():
    g = L1Norm(1.0, dim=3)
    rng = np.random.default_rng(0)
    for _ in range(50):
        alpha, y = rng.uniform(0.1, 2), rng.uniform(-3, 3, 3)
        sigma = rng.uniform(0, 0.95)
        c = solve_prox_segment(g, alpha, y, SigmaApprox(sigma))
        assert check_sigma_approximate(alpha, y, c.x_bar, c.w_bar, c.eps_bar, sigma, g).passed
        c = solve_prox_segment(g, alpha, y, AbsoluteGap(0.1))
        assert e_optimality_excess(g, alpha, y, c.x_bar) <= 0.1 + 1e-12


alphas = st.floats(0.05, 5.0)
points = st.floats(-6.0, 6.0)


@given(alpha=alphas, y=points, sigma=st.floats(0.0, 0.99))
def test_sigma_approximate_implies_quasi(alpha, y, sigma):
    c = solve_prox_segment(ABS, alpha, a([y]), SigmaApprox(sigma))
    assert check_sigma_approximate(alpha, a([y]), c.x_bar, c.w_bar, c.eps_bar, sigma, ABS).passed
    assert check_sigma_quasi_approximate(alpha, a([y]), c.x_bar, c.w_bar, c.eps_bar, sigma, ABS).passed


@given(alpha=alphas, y=points, r=st.floats(0.0, 1.0))
def test_r_approximate_distance_bound(alpha, y, r):
    c = solve_prox_absolute(ABS, alpha, a([y]), r)
    assert abs(c.x_bar[0] - prox_abs_grid(alpha, y)) <= r + 1e-7 * max(1.0, abs(y))


@given(alpha=alphas, y=points, r=st.floats(0.0, 1.0))
def test_r_approximate_conversion_to_e(alpha, y, r):
    c = solve_prox_absolute(ABS, alpha, a([y]), r)
    p = prox_abs_grid(alpha, y)
    excess = (alpha * abs(c.x_bar[0]) + 0.5 * (c.x_bar[0] - y) ** 2) - (alpha * abs(p) + 0.5 * (p - y) ** 2)
    # excess is in units of alpha * (prox objective); divide by alpha
    assert excess / alpha <= r_to_e(r, alpha) + 1e-9
    assert excess / alpha <= r_to_e(r, alpha, squared=True) + 1e-9


# ----------------------------------------------------------------------- TV

SHAPE = (8, 7)


def _tv(y):
    return TotalVariation(0.2, SHAPE).value(y)


def test_tv_gap_at_zero_is_tv_value():
    y = np.random.default_rng(0).uniform(0, 1, 56)
    assert np.isclose(tv_dual_gap(0.7, y, np.zeros((2,) + SHAPE), 0.2, SHAPE), _tv(y), rtol=1e-12)


def test_tv_gap_constant_image():
    y = np.full(56, 0.4)
    assert tv_dual_gap(0.7, y, np.zeros((2,) + SHAPE), 0.2, SHAPE) == 0.0


@given(seed=st.integers(0, 10_000))
def test_tv_gap_nonnegative(seed):
    rng = np.random.default_rng(seed)
    y = rng.uniform(0, 1, 56)
    v = rng.standard_normal((2,) + SHAPE)
    mag = np.sqrt(v[0] ** 2 + v[1] ** 2)
    v = 0.2 * v / np.maximum(mag, 1e-12) * rng.uniform(0, 1, SHAPE)
    assert tv_dual_gap(0.5, y, v, 0.2, SHAPE) >= 0.0


def test_tv_dual_constant_image_passes_immediately():
    y = np.full(56, 0.3)
    c = solve_prox_tv_dual(1.0, y, 0.2, SigmaApprox(0.1), 100, SHAPE)
    assert c.inner_iterations == 1 and c.lhs == 0 and not c.flagged


def test_tv_dual_looser_sigma_needs_no_more_steps():
    rng = np.random.default_rng(5)
    for _ in range(5):
        y = rng.uniform(0, 1, 56)
        loose = solve_prox_tv_dual(0.5, y, 0.2, SigmaApprox(0.99), 3000, SHAPE)
        tight = solve_prox_tv_dual(0.5, y, 0.2, SigmaApprox(0.1), 3000, SHAPE)
        assert loose.inner_iterations <= tight.inner_iterations


def test_tv_dual_gap_budget_at_start():
    y = np.random.default_rng(1).uniform(0, 1, 56)
    g0 = tv_dual_gap(0.5, y, np.zeros((2,) + SHAPE), 0.2, SHAPE)
    c = solve_prox_tv_dual(0.5, y, 0.2, AbsoluteGap(g0), 100, SHAPE)
    assert c.inner_iterations == 1


def test_tv_dual_certificate_is_consistent():
    y = np.random.default_rng(2).uniform(0, 1, 56)
    c = solve_prox_tv_dual(0.5, y, 0.2, SigmaApprox(0.3), 3000, SHAPE, keep_trace=True)
    assert not c.flagged
    assert np.all(np.diff(c.gap_trace) <= 0)
    # w_bar is an eps_bar-subgradient of TV at x_bar
    tv = TotalVariation(0.2, SHAPE)
    rng = np.random.default_rng(3)
    for _ in range(30):
        z = rng.uniform(-1, 2, 56)
        assert tv.value(z) >= tv.value(c.x_bar) + c.w_bar @ (z - c.x_bar) - c.eps_bar - 1e-10


def test_tv_dual_flags_exhausted_budget():
    y = np.random.default_rng(4).uniform(0, 1, 56)
    c = solve_prox_tv_dual(0.5, y, 0.2, AbsoluteGap(0.0), 3, SHAPE)
    assert c.flagged and c.inner_iterations == 3


def test_criteria_validate_parameters():
    for bad in (lambda: RAbsolute(-1), lambda: SigmaApprox(1.0), lambda: SigmaQuasi(-0.1), lambda: AbsoluteGap(-1)):
        with pytest.raises(ValueError):
            bad()

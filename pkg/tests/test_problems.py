import numpy as np
import pytest

from grid_oracles import argmin_1d, ista_certified
from proxeps.operators import (
    MatrixOperator,
    adjoint_mismatch,
    discrete_gradient,
    divergence,
    gaussian_blur,
    gaussian_kernel,
    gradient_operator,
    identity_operator,
    power_norm_sq,
)
from proxeps.pgm import read_pgm, write_pgm
from proxeps.problems import (
    lasso_matrix,
    lipschitz_spot_check,
    make_lasso,
    make_toy1d,
    make_tv_deblur,
    min_quadratic_form,
    reference_solve,
    synthetic_image,
)
from proxeps.prox import AbsoluteGap, solve_prox_tv_dual


# ------------------------------------------------------------------ lasso

def test_lasso_is_deterministic():
    p1, p2 = make_lasso(6, seed=11), make_lasso(6, seed=11)
    assert np.array_equal(p1.meta["A"], p2.meta["A"]) and np.array_equal(p1.meta["b"], p2.meta["b"])
    assert not np.array_equal(p1.meta["A"], make_lasso(6, seed=12).meta["A"])


def test_lasso_structure():
    p = make_lasso(5, seed=0)
    A = p.meta["A"]
    assert np.allclose(A, A.T) and min_quadratic_form(A, rng=0) >= 0
    assert np.array_equal(p.x0, np.ones(5)) and np.array_equal(p.meta["b"], np.ones(5))
    # default step 1/||A||^2 equals 1/L for f = 0.5||Ax - b||^2
    assert np.isclose(1.0 / p.L, 1.0 / np.linalg.norm(A, 2) ** 2, rtol=1e-12)
    assert lipschitz_spot_check(p.f, p.L, rng=1) <= 1.0 + 1e-12


def test_lasso_scalar_matches_grid():
    p = make_lasso(1, seed=4)
    m2 = float(lasso_matrix(1, 4)[0, 0])
    ref = reference_solve(p)
    x_grid, F_grid = argmin_1d(lambda x: 0.5 * (m2 * x - 1.0) ** 2 + np.abs(x), -5, 5)
    assert abs(ref.x_star[0] - x_grid) < 1e-6 and abs(ref.s_star - F_grid) < 1e-9


def test_toy1d_matches_grid():
    p = make_toy1d()
    ref = reference_solve(p)
    x_grid, F_grid = argmin_1d(lambda x: 0.5 * (x - 2.0) ** 2 + np.abs(x), -3, 3)
    assert abs(ref.x_star[0] - x_grid) < 1e-6 and abs(ref.s_star - F_grid) < 1e-9
    assert abs(ref.s_star - 1.5) < 1e-12


@pytest.mark.parametrize("n,seed", [(2, 0), (5, 1), (10, 2)])
def test_reference_matches_independent_ista(n, seed):
    p = make_lasso(n, seed)
    ref = reference_solve(p)
    _, F = ista_certified(p.meta["A"], p.meta["b"])
    assert abs(ref.s_star - F) <= 1e-8
    assert ref.certified_gap is not None and ref.certified_gap <= 1e-10 and not ref.flagged


def test_reference_is_repeatable():
    r1, r2 = reference_solve(make_lasso(7, 3)), reference_solve(make_lasso(7, 3))
    assert np.array_equal(r1.x_star, r2.x_star) and r1.s_star == r2.s_star and r1.d0 == r2.d0


def test_boxed_lasso_stays_feasible():
    p = make_lasso(4, 0, box=(-0.5, 0.5))
    ref = reference_solve(p)
    assert p.C.contains(ref.x_star) and p.C.contains(p.x0)


# -------------------------------------------------------------- operators

def test_discrete_gradient_examples():
    assert np.all(discrete_gradient(np.full(12, 3.0), (3, 4)) == 0)
    p = discrete_gradient(np.array([[0.0, 1.0], [0.0, 1.0]]), (2, 2))
    assert np.array_equal(p[1], [[1, 0], [1, 0]]) and np.array_equal(p[0], np.zeros((2, 2)))


def test_gradient_divergence_adjoint():
    rng = np.random.default_rng(0)
    for shape in ((5, 7), (1, 6), (8, 8)):
        x = rng.standard_normal(shape[0] * shape[1])
        q = rng.standard_normal((2,) + shape)
        assert abs(np.sum(discrete_gradient(x, shape) * q) + divergence(q, shape) @ x) < 1e-12 * 100
    assert adjoint_mismatch(gradient_operator((6, 5)), rng) < 1e-12


def test_gradient_norm_bound():
    assert power_norm_sq(gradient_operator((16, 16))) <= 8.0


def test_gaussian_blur_examples():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(64)
    assert np.allclose(gaussian_blur((8, 8), kernel_size=1).apply(x), x)
    op = gaussian_blur((8, 8), 4, 2.0)
    c = np.full(64, 0.7)
    assert np.allclose(op.apply(c), c)
    assert adjoint_mismatch(op, rng) < 1e-12
    assert np.isclose(gaussian_kernel(4, 2.0).sum(), 1.0)
    assert np.sqrt(power_norm_sq(op, iters=2000)) <= op.norm_bound


def test_matrix_and_identity_operators():
    M = np.arange(6.0).reshape(2, 3)
    op = MatrixOperator(M)
    assert np.allclose(op.apply([1, 0, 0]), M[:, 0]) and np.allclose(op.adjoint([1, 0]), M[0])
    assert np.isclose(op.norm_bound, np.linalg.norm(M, 2))
    assert np.array_equal(identity_operator(3).apply([1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


# --------------------------------------------------------------------- TV

def test_synthetic_image_range_and_determinism():
    img = synthetic_image(32, seed=2)
    assert img.shape == (32, 32) and img.min() >= 0 and img.max() <= 1
    assert np.array_equal(img, synthetic_image(32, seed=2))


def test_tv_noiseless_identity_zero_tau():
    p = make_tv_deblur(8, tau=0.0, noise_std=0.0, seed=0, blur=False)
    assert p.F(p.meta["x_true"]) == 0.0


def test_tv_constant_data_has_constant_optimum():
    p = make_tv_deblur(8, tau=0.05, noise_std=0.0, image=np.full((8, 8), 0.4))
    ref = reference_solve(p)
    assert np.allclose(ref.x_star, 0.4, atol=1e-10) and ref.s_star < 1e-18


def test_tv_reference_matches_long_proximal_gradient_run():
    """Independent oracle: unaccelerated exact-prox gradient steps at alpha = 1/L."""
    p = make_tv_deblur(8, tau=1e-2, noise_std=1e-2, seed=0)
    ref = reference_solve(p)
    a, x, v = 1.0 / p.L, p.x0.copy(), None
    for _ in range(1500):
        c = solve_prox_tv_dual(a, x - a * p.f.gradient(x), 1e-2, AbsoluteGap(1e-12), 5000, p.shape, v0=v)
        v, x = c.dual, c.x_bar
    assert abs(p.F(x) - ref.s_star) <= 1e-9
    assert ref.s_star <= p.F(x) + 1e-12


def test_tv_problem_metadata():
    p = make_tv_deblur(16, tau=1e-4, noise_std=1e-4, seed=3)
    assert p.shape == (16, 16) and p.dim == 256 and np.array_equal(p.x0, p.f.b)
    assert lipschitz_spot_check(p.f, p.L, rng=0, dim=256) <= 1.0 + 1e-8


# -------------------------------------------------------------------- PGM

def test_pgm_roundtrip(tmp_path):
    img = np.round(synthetic_image(12, 0) * 255) / 255
    path = tmp_path / "x.pgm"
    write_pgm(path, img)
    assert np.array_equal(read_pgm(path), img)


def test_pgm_header_with_comment(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# a comment\n2 1\n255\n" + bytes([0, 255]))
    assert np.array_equal(read_pgm(path), [[0.0, 1.0]])
    path.write_bytes(b"P2\n2 1\n255\n0 255\n")
    with pytest.raises(ValueError):
        read_pgm(path)


def test_tv_from_image_file(tmp_path):
    path = tmp_path / "img.pgm"
    write_pgm(path, synthetic_image(10, 1))
    p = make_tv_deblur(tau=1e-3, image=read_pgm(path))
    assert p.shape == (10, 10)

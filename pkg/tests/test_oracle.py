"""The brute-force oracles themselves plus the Jacobi and low-rank baselines."""

import numpy as np
import pytest

from fastspec.chains import reconstruct
from fastspec.errors import TooLarge
from fastspec.gfactor import spectrum_update_sym
from fastspec.graphio import erdos_renyi, laplacian
from fastspec.oracle import (
    brute_g_init,
    brute_g_update,
    brute_t,
    dense_g_objective,
    dense_t_objective,
    jacobi_truncated,
    low_rank_baseline,
)

from helpers import random_symmetric


# ------------------------------------------------------------- brute oracles


def test_brute_g_init_diagonal_matched():
    s = np.diag([4.0, 1.0])
    ref = brute_g_init(s, np.array([4.0, 1.0]), angle_step=1e-4)
    assert ref.objective <= 1e-8  # identity is optimal and lies on the grid


def test_brute_g_init_2x2_exchange():
    s = np.array([[0.0, 1.0], [1.0, 0.0]])
    ref = brute_g_init(s, np.array([1.0, -1.0]), angle_step=1e-5)
    assert ref.objective <= 1e-8


def test_brute_g_init_grid_refinement():
    rng = np.random.default_rng(80)
    s = random_symmetric(rng, 5)
    sbar = rng.normal(size=5)
    coarse = brute_g_init(s, sbar, angle_step=4e-4)
    fine = brute_g_init(s, sbar, angle_step=1e-4)
    assert fine.objective <= coarse.objective + 1e-12


def test_brute_g_update_identical_matrices():
    rng = np.random.default_rng(81)
    a = random_symmetric(rng, 4)
    ref = brute_g_update(a, a, angle_step=1e-4)
    assert ref.objective <= 1e-8


def test_brute_g_update_grid_refinement():
    rng = np.random.default_rng(90)
    a, b = random_symmetric(rng, 5), random_symmetric(rng, 5)
    coarse = brute_g_update(a, b, angle_step=4e-3)
    fine = brute_g_update(a, b, angle_step=1e-3)
    assert fine.objective <= coarse.objective + 1e-12


def test_brute_t_grid_refinement():
    rng = np.random.default_rng(91)
    c = rng.normal(size=(5, 5))
    b = rng.normal(size=(5, 5))
    coarse = brute_t(c, b, mode="init", a_step=4e-3)
    fine = brute_t(c, b, mode="init", a_step=1e-3)
    assert fine.objective <= coarse.objective + 1e-12


def test_brute_g_update_matches_dense_at_optimum():
    rng = np.random.default_rng(82)
    a, b = random_symmetric(rng, 5), random_symmetric(rng, 5)
    ref = brute_g_update(a, b, angle_step=1e-3)
    dense = dense_g_objective(a, b, ref.i, ref.j, ref.transform.block())
    assert abs(dense - ref.objective) <= 1e-8 * max(1.0, abs(ref.objective))


def test_brute_t_exact_conjugation():
    rng = np.random.default_rng(83)
    b = rng.normal(size=(4, 4))
    # C built by one exact shear conjugation must be matched on the grid
    t = np.eye(4)
    t[0, 2] = 0.5
    ti = np.eye(4)
    ti[0, 2] = -0.5
    c = t @ b @ ti
    ref = brute_t(c, b, mode="init", a_step=1e-3)
    assert ref.objective <= 1e-10
    assert (ref.f, ref.i, ref.j) == (2, 0, 2)
    assert abs(ref.a - 0.5) <= 1e-3


def test_brute_t_grid_matches_dense_spot_checks():
    rng = np.random.default_rng(84)
    c = rng.normal(size=(5, 5))
    b = rng.normal(size=(5, 5))
    ref = brute_t(c, b, mode="init", a_step=1e-3)
    dense = dense_t_objective(c, b, ref.f, ref.i, ref.j, ref.a)
    assert abs(dense - ref.objective) <= 1e-8 * max(1.0, abs(ref.objective))
    am = np.eye(5) + 0.2 * rng.normal(size=(5, 5))
    d = np.linalg.inv(am)
    ref = brute_t(c, (am, b, d), mode="update", a_step=1e-3)
    dense = dense_t_objective(c, b, ref.f, ref.i, ref.j, ref.a, a_mat=am, d=d)
    assert abs(dense - ref.objective) <= 1e-8 * max(1.0, abs(ref.objective))


def test_brute_oracles_reject_large_inputs():
    rng = np.random.default_rng(85)
    s = random_symmetric(rng, 12)
    with pytest.raises(TooLarge):
        brute_g_init(s, np.ones(12))
    with pytest.raises(TooLarge):
        brute_g_update(s, s)
    with pytest.raises(TooLarge):
        brute_t(rng.normal(size=(12, 12)), rng.normal(size=(12, 12)))


# ------------------------------------------------------------------- Jacobi


def test_jacobi_diagonal_input():
    s = np.diag([3.0, 1.0, -1.0])
    chain = jacobi_truncated(s, 4)
    assert len(chain) == 4
    recon = reconstruct(chain).data
    assert np.abs(recon - s).max() <= 1e-12


def test_jacobi_2x2_single_rotation():
    s = np.array([[2.0, 1.0], [1.0, 2.0]])
    chain = jacobi_truncated(s, 1)
    assert np.allclose(np.sort(chain.spectrum), [1.0, 3.0], atol=1e-12)
    assert np.abs(reconstruct(chain).data - s).max() <= 1e-12


def test_jacobi_offdiagonal_mass_strictly_decreases():
    lap = laplacian(erdos_renyi(32, 0.3, 5)).data
    n = 32
    g = int(n * np.log2(n))
    work = lap.copy()
    prev = float((work ** 2).sum() - (np.diag(work) ** 2).sum())
    chain = jacobi_truncated(lap, g)
    # replay: off-diagonal mass after k rotations is the error of the k-prefix
    for k in range(1, g + 1):
        prefix = chain.transforms[-k:] if False else None
    # direct check: conjugate the matrix by successive rotations
    for t in reversed(chain.transforms):
        v = t.block()
        i, j = t.i, t.j
        work[[i, j], :] = v.T @ work[[i, j], :]
        work[:, [i, j]] = work[:, [i, j]] @ v
        cur = float((work ** 2).sum() - (np.diag(work) ** 2).sum())
        assert cur < prev or (cur == prev == 0.0)
        prev = cur


def test_jacobi_error_never_increases_with_respect_to_diag_spectrum():
    rng = np.random.default_rng(86)
    s = random_symmetric(rng, 10)
    errs = []
    for g in (0, 2, 5, 9, 14, 20):
        chain = jacobi_truncated(s, g)
        errs.append(float(((s - reconstruct(chain).data) ** 2).sum()))
    for k in range(1, len(errs)):
        assert errs[k] <= errs[k - 1] + 1e-9


# ------------------------------------------------------------------ low rank


def test_low_rank_full_rank_exact():
    rng = np.random.default_rng(87)
    x = rng.normal(size=(6, 6))
    approx = low_rank_baseline(x, 6)
    assert np.abs(approx.data - x).max() <= 1e-12


def test_low_rank_planted():
    rng = np.random.default_rng(88)
    u = rng.normal(size=(8, 2))
    v = rng.normal(size=(2, 8))
    x = u @ v
    approx = low_rank_baseline(x, 2)
    assert float(((approx.data - x) ** 2).sum()) <= 1e-9


def test_low_rank_error_matches_trailing_singular_values():
    rng = np.random.default_rng(89)
    x = rng.normal(size=(32, 32))
    r = 5
    approx = low_rank_baseline(x, r)
    err = float(((x - approx.data) ** 2).sum())
    # Jacobi-based eigensolver cross-check: eigenvalues of X^T X are the
    # squared singular values
    gram = x.T @ x
    chain = jacobi_truncated(gram, 20000)
    sv2 = np.sort(spectrum_update_sym(gram, chain))[::-1]
    want = float(sv2[r:].sum())
    assert abs(err - want) <= 1e-8 * max(1.0, want)

import numpy as np
import pytest

from ampursuit.cholesky import (
    BACKWARD,
    FORWARD,
    CholFactor,
    DimensionMismatch,
    IndexOutOfRange,
    NegativePivot,
    NotPositiveDefinite,
    ZeroDiagonal,
    chol_full,
    chol_insert,
    chol_remove,
    rank_one_update,
    spd_solve,
    tri_solve,
)

LAM = 0.1


def unit_columns(q, p, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((q, p))
    return A / np.linalg.norm(A, axis=0)


def gram_of(A, cols):
    sub = A[:, list(cols)]
    return sub.T @ sub + LAM * np.eye(len(cols))


def test_tri_solve_scalar_division():
    L = CholFactor(np.array([[2.0]]))
    assert tri_solve(L, np.array([4.0]), FORWARD) == pytest.approx([2.0])


def test_tri_solve_identity_both_modes():
    L = CholFactor(np.eye(3))
    b = np.array([1.5, -2.0, 0.25])
    np.testing.assert_allclose(tri_solve(L, b, FORWARD), b)
    np.testing.assert_allclose(tri_solve(L, b, BACKWARD), b)


def test_tri_solve_solves_spd_system():
    rng = np.random.default_rng(7)
    M = rng.standard_normal((8, 8))
    G = M @ M.T + 8 * np.eye(8)
    b = rng.standard_normal(8)
    L = chol_full(G)
    x = spd_solve(L, b)
    np.testing.assert_allclose(G @ x, b, atol=1e-9)
    np.testing.assert_allclose(x, np.linalg.solve(G, b), atol=1e-9)


def test_tri_solve_errors():
    L = CholFactor(np.array([[2.0]]))
    with pytest.raises(DimensionMismatch):
        tri_solve(L, np.zeros(3), FORWARD)
    corrupt = CholFactor(np.array([[1.0, 0.0], [0.5, 0.0]]))
    with pytest.raises(ZeroDiagonal):
        tri_solve(corrupt, np.zeros(2), FORWARD)


def test_chol_full_scalar():
    np.testing.assert_allclose(chol_full(np.array([[4.0]])).L, [[2.0]])


def test_chol_full_scaled_identity():
    G = (1 + LAM) * np.eye(4)
    np.testing.assert_allclose(chol_full(G).L, np.sqrt(1 + LAM) * np.eye(4))


def test_chol_full_reconstructs_gram():
    A = unit_columns(40, 20, seed=3)
    G = gram_of(A, range(10))
    L = chol_full(G)
    np.testing.assert_allclose(L.gram(), G, rtol=1e-10, atol=1e-12)


def test_chol_full_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        chol_full(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_chol_insert_first_column():
    L = chol_insert(CholFactor.empty(), np.zeros(0), 1 + LAM)
    np.testing.assert_allclose(L.L, [[np.sqrt(1 + LAM)]])


def test_chol_insert_bottom_right_entry():
    # the appended row is [v, sqrt(diag - v.v)] with L v = g
    A = unit_columns(30, 6, seed=11)
    L = chol_full(gram_of(A, range(5)))
    g = A[:, :5].T @ A[:, 5]
    v = tri_solve(L, g, FORWARD)
    grown = chol_insert(L, g, 1 + LAM)
    assert grown.L[5, 5] == pytest.approx(np.sqrt(1 + LAM - v @ v), abs=1e-12)
    np.testing.assert_allclose(grown.L[5, :5], v, atol=1e-12)


def test_chol_insert_matches_refactorization():
    A = unit_columns(30, 6, seed=12)
    L = chol_full(gram_of(A, range(5)))
    grown = chol_insert(L, A[:, :5].T @ A[:, 5], 1 + LAM)
    expected = chol_full(gram_of(A, range(6)))
    np.testing.assert_allclose(grown.L, expected.L, atol=1e-9)


def test_chol_insert_rejects_duplicate_column():
    # ridge-free Gram, then append an exact copy of an active column: the
    # pivot collapses to zero and the insertion must be refused
    A = unit_columns(30, 3, seed=13)
    L = chol_full(A.T @ A)
    dup = A.T @ A[:, 0]
    with pytest.raises(NegativePivot):
        chol_insert(L, dup, 1.0)


def test_rank_one_update_zero_vector():
    A = unit_columns(20, 5, seed=14)
    L = chol_full(gram_of(A, range(5)))
    np.testing.assert_allclose(rank_one_update(L, np.zeros(5)).L, L.L)


def test_rank_one_update_unit_vector():
    L = rank_one_update(CholFactor(np.eye(2)), np.array([1.0, 0.0]))
    np.testing.assert_allclose(L.L, [[np.sqrt(2), 0.0], [0.0, 1.0]])


def test_rank_one_update_reconstruction():
    rng = np.random.default_rng(15)
    M = rng.standard_normal((7, 7))
    G = M @ M.T + 7 * np.eye(7)
    L = chol_full(G)
    u = rng.standard_normal(7)
    updated = rank_one_update(L, u)
    np.testing.assert_allclose(updated.gram(), G + np.outer(u, u), atol=1e-10)
    assert np.all(np.diagonal(updated.L) > 0)
    assert np.allclose(np.triu(updated.L, 1), 0.0)


def test_chol_remove_to_empty():
    L = CholFactor(np.array([[1.3]]))
    assert chol_remove(L, 0).order == 0


def test_chol_remove_last_keeps_leading_block():
    A = unit_columns(30, 5, seed=16)
    L = chol_full(gram_of(A, range(5)))
    shrunk = chol_remove(L, 4)
    np.testing.assert_allclose(shrunk.L, L.L[:4, :4])


def test_chol_remove_interior_matches_refactorization():
    A = unit_columns(40, 8, seed=17)
    L = chol_full(gram_of(A, range(8)))
    shrunk = chol_remove(L, 3)
    remaining = [0, 1, 2, 4, 5, 6, 7]
    expected = chol_full(gram_of(A, remaining))
    np.testing.assert_allclose(shrunk.L, expected.L, atol=1e-9)


def test_chol_remove_bad_position():
    L = CholFactor(np.eye(3))
    with pytest.raises(IndexOutOfRange):
        chol_remove(L, 3)


@pytest.mark.parametrize("seed", range(5))
def test_random_insert_remove_sequences(seed):
    # factor maintained under a random walk of inserts/removes stays within
    # 1e-8 of direct refactorization
    rng = np.random.default_rng(1000 + seed)
    A = unit_columns(96, 128, seed=2000 + seed)
    active: list[int] = []
    L = CholFactor.empty()
    for _ in range(60):
        can_grow = len(active) < 64 and len(active) < A.shape[1]
        grow = can_grow and (len(active) == 0 or rng.random() < 0.6)
        if grow:
            candidates = [i for i in range(A.shape[1]) if i not in active]
            i = int(rng.choice(candidates))
            g = A[:, active].T @ A[:, i] if active else np.zeros(0)
            L = chol_insert(L, g, 1 + LAM)
            active.append(i)
        else:
            pos = int(rng.integers(len(active)))
            L = chol_remove(L, pos)
            del active[pos]
        expected = chol_full(gram_of(A, active))
        np.testing.assert_allclose(L.L, expected.L, atol=1e-8)

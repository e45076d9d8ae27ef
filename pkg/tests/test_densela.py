import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from nlprod.densela import (
    RealLinearSystem,
    as_complex_matrix,
    complex_rank,
    nullspace,
    rank_oracle,
)

TOL = 1e-9


def qr_rank(a, tol=TOL):
    """Rank from a column-pivoted QR factorization."""
    if a.shape[0] == 0:
        return 0
    _, r, _ = scipy.linalg.qr(a, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return 0
    return int(np.sum(diag > tol * diag[0]))


def rank7_system(seed=7):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=(7, 9))
    combos = rng.normal(size=(3, 7)) @ base
    return np.vstack([base, combos])


def test_no_rows_gives_full_space():
    basis = nullspace(RealLinearSystem.from_rows([], 4))
    assert basis.shape == (4, 4)
    np.testing.assert_allclose(basis.T @ basis, np.eye(4), atol=1e-12)


def test_chain_equalities_force_all_ones():
    system = RealLinearSystem.from_rows([[1, -1, 0], [0, 1, -1]], 3)
    basis = nullspace(system)
    assert basis.shape == (3, 1)
    np.testing.assert_allclose(abs(basis[:, 0]), np.ones(3) / np.sqrt(3), atol=1e-12)


def test_random_rank7_against_pivoted_qr():
    a = rank7_system()
    assert qr_rank(a) == 7
    system = RealLinearSystem(a, 9)
    assert nullspace(system).shape[1] == 9 - qr_rank(a) == 2
    assert rank_oracle(system) == 7


def test_rank_oracle_trivial():
    assert rank_oracle(RealLinearSystem(np.eye(5), 5)) == 5
    assert rank_oracle(RealLinearSystem(np.zeros((3, 4)), 4)) == 0
    assert nullspace(RealLinearSystem(np.zeros((3, 4)), 4)).shape == (4, 4)


@pytest.mark.parametrize(
    "rows, width",
    [(np.zeros((0, 0)), 0), (np.array([[np.nan, 1.0]]), 2), (np.array([[np.inf, 1.0]]), 2)],
)
def test_rejects_bad_systems(rows, width):
    with pytest.raises(ValueError):
        nullspace(RealLinearSystem(rows, width), TOL)
    with pytest.raises(ValueError):
        rank_oracle(RealLinearSystem(rows, width), TOL)


def test_rejects_nonpositive_tol():
    with pytest.raises(ValueError):
        nullspace(RealLinearSystem(np.eye(2), 2), 0.0)


def test_rows_must_share_width():
    with pytest.raises(ValueError):
        RealLinearSystem.from_rows([[1, 2], [1, 2, 3]], 2)


def test_complex_rows_are_split():
    system = RealLinearSystem.from_complex_rows([[1 + 2j, 0]], 2)
    np.testing.assert_allclose(system.rows, [[1, 0], [2, 0]])


def test_basis_order_is_by_peak_component():
    system = RealLinearSystem.from_rows([[0, 1, 0, 0]], 4)
    basis = nullspace(system)
    peaks = [int(np.argmax(np.abs(v))) for v in basis.T]
    assert peaks == sorted(peaks)
    assert all(v[np.argmax(np.abs(v))] > 0 for v in basis.T)


def test_as_complex_matrix_row_major():
    m = as_complex_matrix([1, 2, 3, 4, 5, 6], rows=2, cols=3)
    assert m.shape == (2, 3) and m[1, 0] == 4
    with pytest.raises(ValueError):
        as_complex_matrix([1, 2, 3], rows=2, cols=2)
    with pytest.raises(ValueError):
        as_complex_matrix([[1, np.nan]])


def test_complex_rank():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3))
    assert complex_rank(m @ m.conj().T) == 3


@st.composite
def deficient_systems(draw):
    width = draw(st.integers(1, 36))
    rank = draw(st.integers(0, width))
    extra = draw(st.integers(0, 6))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    base = rng.normal(size=(rank, width))
    rows = np.vstack([base, rng.normal(size=(extra, rank)) @ base]) if rank else np.zeros((extra, width))
    return RealLinearSystem(rows, width), rank


@settings(max_examples=150, deadline=None)
@given(deficient_systems())
def test_rank_plus_nullity_is_width(case):
    system, rank = case
    basis = nullspace(system, TOL)
    assert rank_oracle(system, TOL) == rank
    assert rank + basis.shape[1] == system.width
    np.testing.assert_allclose(basis.T @ basis, np.eye(basis.shape[1]), atol=1e-12)
    if system.n_rows and basis.size:
        scale = np.max(np.linalg.norm(system.rows, axis=1))
        assert np.max(np.abs(system.rows @ basis)) <= 10 * TOL * max(scale, 1.0)

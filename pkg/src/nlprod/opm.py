"""Orthogonality-preserving measurement (OPM) constraints, one party at a time.

A measurement element ``E = M^dagger M`` acting on one party keeps a family
pairwise orthogonal iff ``<phi_j| E (x) I |phi_k> = 0`` for every pair
``j < k``.  These are linear equations in the ``dim**2`` real parameters of the
Hermitian ``E``.  If the only solutions are multiples of the identity, the
party has no nontrivial orthogonality-preserving first measurement.

Parameter layout: the ``dim`` diagonal entries first, then for every ``j < k``
the real and imaginary parts of ``E[j, k]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densela import DEFAULT_TOL, RealLinearSystem, is_hermitian, nullspace
from .families import StateFamily
from .tensorstate import apply_local_operator, flatten_terms, inner

# Rows with no entry above this are the zero rows of spectator-annihilated pairs.
ZERO_ROW_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("operator must be square")
        if not is_hermitian(m, 1e-12):
            raise ValueError("operator is not Hermitian")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.matrix))


def _offdiag_pairs(dim: int):
    return [(j, k) for j in range(dim) for k in range(j + 1, dim)]


def operator_from_params(params: np.ndarray, dim: int) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.shape != (dim * dim,):
        raise ValueError(f"expected {dim * dim} parameters")
    m = np.diag(params[:dim]).astype(complex)
    for n, (j, k) in enumerate(_offdiag_pairs(dim)):
        z = params[dim + 2 * n] + 1j * params[dim + 2 * n + 1]
        m[j, k] = z
        m[k, j] = np.conj(z)
    return m


def params_from_operator(matrix: np.ndarray) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    dim = m.shape[0]
    out = np.empty(dim * dim)
    out[:dim] = np.diag(m).real
    for n, (j, k) in enumerate(_offdiag_pairs(dim)):
        out[dim + 2 * n] = m[j, k].real
        out[dim + 2 * n + 1] = m[j, k].imag
    return out


def frobenius_weights(dim: int) -> np.ndarray:
    """Per-parameter scale making the parameter map a Frobenius isometry."""
    w = np.full(dim * dim, np.sqrt(2.0))
    w[:dim] = 1.0
    return w


def _matrix_elements_to_params(w: np.ndarray) -> np.ndarray:
    """Map ``W[..., r, s]`` with ``value = sum W[r, s] E[r, s]`` to parameter coefficients."""
    dim = w.shape[-1]
    out = np.empty(w.shape[:-2] + (dim * dim,), dtype=complex)
    idx = np.arange(dim)
    out[..., :dim] = w[..., idx, idx]
    for n, (j, k) in enumerate(_offdiag_pairs(dim)):
        out[..., dim + 2 * n] = w[..., j, k] + w[..., k, j]
        out[..., dim + 2 * n + 1] = 1j * (w[..., j, k] - w[..., k, j])
    return out


def _pair_elements(states, party: int) -> np.ndarray:
    """``W[j, k, r, s]`` with ``<phi_j| E_party |phi_k> = sum_rs W[j, k, r, s] E[r, s]``."""
    owner, coeffs, factors = flatten_terms(states)
    spectator = np.conj(coeffs)[:, None] * coeffs[None, :]
    for q, f in enumerate(factors):
        if q != party:
            spectator = spectator * (np.conj(f) @ f.T)
    local = factors[party]
    n_states = len(states)
    member = np.zeros((n_states, owner.size))
    member[owner, np.arange(owner.size)] = 1.0
    # sum over term pairs (t, u) with t in state j, u in state k
    return np.einsum(
        "jt,tu,ku,tr,us->jkrs", member, spectator, member, np.conj(local), local, optimize=True
    )


def pair_constraint_rows(a, b, party: int) -> np.ndarray:
    """Real rows contributed by the single pair ``(a, b)``; zero rows are dropped."""
    w = _pair_elements([a, b], party)[0, 1]
    c = _matrix_elements_to_params(w)
    rows = np.vstack([c.real, c.imag])
    keep = np.max(np.abs(rows), axis=1) > ZERO_ROW_TOL
    return rows[keep]


def build_constraints(f: StateFamily, party: int) -> RealLinearSystem:
    """Real linear system in the Hermitian parameters for one party."""
    if len(f) == 0:
        raise ValueError("empty family")
    if not 0 <= party < f.layout.n_parties:
        raise ValueError(f"party {party} out of range")
    dim = f.layout.dims[party]
    w = _pair_elements(f.states, party)
    j, k = np.triu_indices(len(f), 1)
    c = _matrix_elements_to_params(w[j, k])
    rows = np.empty((2 * c.shape[0], dim * dim))
    rows[0::2] = c.real
    rows[1::2] = c.imag
    keep = np.max(np.abs(rows), axis=1) > ZERO_ROW_TOL if rows.size else np.zeros(0, bool)
    return RealLinearSystem(rows[keep], dim * dim)


def solution_space(f: StateFamily, party: int, tol: float = DEFAULT_TOL) -> list[HermitianOperator]:
    """Frobenius-orthonormal basis of the Hermitian solutions for ``party``."""
    system = build_constraints(f, party)
    dim = f.layout.dims[party]
    weights = frobenius_weights(dim)
    scaled = RealLinearSystem(system.rows / weights[None, :], system.width)
    basis = nullspace(scaled, tol)
    return [HermitianOperator(operator_from_params(z / weights, dim)) for z in basis.T]


def identity_residual(basis: list[HermitianOperator], dim: int) -> float:
    """Distance of the normalized identity from the span of ``basis``."""
    ident = np.eye(dim) / np.sqrt(dim)
    proj = sum((np.vdot(b.matrix, ident) * b.matrix for b in basis), np.zeros((dim, dim), complex))
    return float(np.linalg.norm(ident - proj))


def _canonical_sign(m: np.ndarray) -> np.ndarray:
    flat = m.reshape(-1)
    idx = int(np.argmax(np.abs(flat) > np.max(np.abs(flat)) * (1 - 1e-9)))
    z = flat[idx]
    ref = z.real if abs(z.real) > 1e-12 else z.imag
    return -m if ref < 0 else m


def choose_witness(basis: list[HermitianOperator], dim: int) -> HermitianOperator | None:
    """Traceless unit-norm element of the solution space, or None if it is 1-D."""
    if len(basis) <= 1:
        return None
    ident = np.eye(dim)
    best, best_norm = None, -1.0
    for b in basis:
        traceless = b.matrix - np.trace(b.matrix) / dim * ident
        nrm = np.linalg.norm(traceless)
        if nrm > best_norm + 1e-12:
            best, best_norm = traceless, nrm
    w = best / best_norm
    return HermitianOperator(_canonical_sign((w + w.conj().T) / 2))


@dataclass(frozen=True)
class PartyResult:
    party: int
    dimension: int
    witness: HermitianOperator | None
    identity_residual: float

    @property
    def certified(self) -> bool:
        return self.dimension == 1


@dataclass(frozen=True)
class NonlocalityReport:
    family: str
    parties: tuple[PartyResult, ...]

    @property
    def certified(self) -> bool:
        return all(p.certified for p in self.parties)

    @property
    def dimensions(self) -> list[int]:
        return [p.dimension for p in self.parties]


def certify_party(f: StateFamily, party: int, tol: float = DEFAULT_TOL) -> PartyResult:
    dim = f.layout.dims[party]
    basis = solution_space(f, party, tol)
    resid = identity_residual(basis, dim)
    if resid > np.sqrt(tol):
        raise ValueError(
            f"identity is not a solution for party {party} (residual {resid:.3g}); "
            "is the family pairwise orthogonal?"
        )
    return PartyResult(party, len(basis), choose_witness(basis, dim), resid)


def certify(f: StateFamily, tol: float = DEFAULT_TOL) -> NonlocalityReport:
    """Solve every party's system.

    The family is certified when each party's solution space is spanned by the
    identity alone, i.e. nobody can open with a nontrivial measurement that
    keeps the family orthogonal.
    """
    return NonlocalityReport(f.name, tuple(certify_party(f, p, tol) for p in range(f.layout.n_parties)))


def pair_values(f: StateFamily, party: int, matrix: np.ndarray) -> np.ndarray:
    """``<phi_j| H_party |phi_k>`` for all ``j < k``, evaluated on states directly."""
    acted = [apply_local_operator(s, party, matrix) for s in f.states]
    vals = []
    for j in range(len(f)):
        for k in range(j + 1, len(f)):
            vals.append(0j if acted[k] is None else inner(f.states[j], acted[k]))
    return np.asarray(vals, dtype=complex)


def verify_witness(f: StateFamily, party: int, h, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``h`` on ``party`` leaves every pair of the family orthogonal."""
    m = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h, dtype=complex)
    if m.shape != (f.layout.dims[party],) * 2:
        raise ValueError("operator dimension does not match the party")
    if not is_hermitian(m, 1e-12):
        raise ValueError("operator must be Hermitian")
    vals = pair_values(f, party, m)
    return bool(vals.size == 0 or np.max(np.abs(vals)) <= tol)


def in_span(h, basis: list[HermitianOperator], tol: float = 1e-9) -> bool:
    """True when ``h`` lies in the Frobenius span of the orthonormal ``basis``."""
    m = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h, dtype=complex)
    proj = sum((np.vdot(b.matrix, m) * b.matrix for b in basis), np.zeros_like(m, dtype=complex))
    return float(np.linalg.norm(m - proj)) <= tol * max(1.0, float(np.linalg.norm(m)))

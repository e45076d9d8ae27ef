"""Multipartite pure states stored as short sums of elementary tensors.

Every state used in this package has at most a handful of terms, so a state
is kept as a list of ``(coefficient, (ket_1, ..., ket_n))`` rather than a
dense vector of length ``prod(dims)``.  Local indices handed to the public
constructors are 1-based, matching the ``|1>, |2>, ...`` labelling of the
constructions; amplitude arrays themselves are ordinary 0-based numpy arrays.

When a party is extended by an ancilla qubit, local index ``x`` and ancilla bit
``a`` map to the extended 1-based index ``2 * (x - 1) + a + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .densela import as_complex_matrix, is_hermitian, is_projector

PRUNE_TOL = 1e-14
_CHECK_TOL = 1e-12


@dataclass(frozen=True)
class PartyLayout:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 2:
            raise ValueError("a layout needs at least two parties")
        if any(d < 2 for d in dims):
            raise ValueError(f"local dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def with_dim(self, party: int, dim: int) -> "PartyLayout":
        dims = list(self.dims)
        dims[party] = dim
        return PartyLayout(tuple(dims))


@dataclass(frozen=True, eq=False)
class LocalKet:
    """Amplitude vector of one party's local state (not necessarily unit norm)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size < 1 or not np.all(np.isfinite(amp)):
            raise ValueError("amplitudes must be a nonempty finite vector")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def overlap(self, other: "LocalKet") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def is_basis_ket(self, atol: float = _CHECK_TOL) -> bool:
        mags = np.abs(self.amplitudes)
        return int(np.sum(mags > atol)) == 1

    def __repr__(self):
        return f"LocalKet({np.round(self.amplitudes, 6).tolist()})"


def basis_ket(dim: int, index: int) -> LocalKet:
    """Computational basis ket ``|index>`` (1-based) of a ``dim``-level system."""
    if not 1 <= index <= dim:
        raise ValueError(f"index {index} out of range 1..{dim}")
    amp = np.zeros(dim, dtype=complex)
    amp[index - 1] = 1.0
    return LocalKet(amp)


def super_ket(dim: int, i: int, j: int, sign: int) -> LocalKet:
    """``(|i> + sign |j>) / sqrt(2)``."""
    if i == j:
        raise ValueError("super_ket needs two distinct indices")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    amp = (basis_ket(dim, i).amplitudes + sign * basis_ket(dim, j).amplitudes) / np.sqrt(2)
    return LocalKet(amp)


def uniform_ket(dim: int) -> LocalKet:
    """``(|1> + |2> + ... + |dim>) / sqrt(dim)``."""
    return LocalKet(np.full(dim, 1 / np.sqrt(dim), dtype=complex))


Term = tuple[complex, tuple[LocalKet, ...]]


@dataclass(frozen=True, eq=False)
class SparseState:
    layout: PartyLayout
    terms: tuple[Term, ...]

    def __post_init__(self):
        terms = tuple((complex(c), tuple(factors)) for c, factors in self.terms)
        if not terms:
            raise ValueError("a state needs at least one term")
        for _, factors in terms:
            if len(factors) != self.layout.n_parties:
                raise ValueError("factor count must equal party count")
            for ket, dim in zip(factors, self.layout.dims):
                if ket.dim != dim:
                    raise ValueError(f"factor of dim {ket.dim} in a slot of dim {dim}")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def product(cls, factors: Sequence[LocalKet], coefficient: complex = 1.0) -> "SparseState":
        layout = PartyLayout(tuple(k.dim for k in factors))
        return cls(layout, ((coefficient, tuple(factors)),))

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def scaled(self, factor: complex) -> "SparseState":
        return SparseState(self.layout, tuple((factor * c, f) for c, f in self.terms))

    def norm(self) -> float:
        return float(np.sqrt(max(inner(self, self).real, 0.0)))

    def normalized(self) -> "SparseState":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize a zero state")
        return self.scaled(1 / nrm)

    def to_dense(self) -> np.ndarray:
        """Full state vector; intended for small checks only."""
        out = np.zeros(self.layout.total_dim, dtype=complex)
        for c, factors in self.terms:
            vec = np.array([1.0 + 0j])
            for ket in factors:
                vec = np.kron(vec, ket.amplitudes)
            out += c * vec
        return out


def add_states(*states: SparseState) -> SparseState:
    layout = states[0].layout
    if any(s.layout != layout for s in states):
        raise ValueError("layout mismatch")
    return SparseState(layout, tuple(t for s in states for t in s.terms))


def inner(a: SparseState, b: SparseState) -> complex:
    """``<a|b>``, antilinear in ``a``."""
    if a.layout != b.layout:
        raise ValueError(f"layout mismatch: {a.layout.dims} vs {b.layout.dims}")
    total = 0j
    for ca, fa in a.terms:
        for cb, fb in b.terms:
            prod = np.conj(ca) * cb
            for ka, kb in zip(fa, fb):
                prod *= np.vdot(ka.amplitudes, kb.amplitudes)
                if prod == 0:
                    break
            total += prod
    return complex(total)


def gram_matrix(states: Sequence[SparseState]) -> np.ndarray:
    """``G[j, k] = <s_j|s_k>`` for a list of states sharing one layout."""
    if not states:
        return np.zeros((0, 0), dtype=complex)
    layout = states[0].layout
    if any(s.layout != layout for s in states):
        raise ValueError("layout mismatch")
    owner, coeffs, factors = flatten_terms(states)
    pair = np.conj(coeffs)[:, None] * coeffs[None, :]
    for f in factors:
        pair = pair * (np.conj(f) @ f.T)
    member = np.zeros((len(states), owner.size))
    member[owner, np.arange(owner.size)] = 1.0
    return member @ pair @ member.T


def flatten_terms(states: Sequence[SparseState]):
    """Stack all terms of ``states``.

    Returns ``(owner, coeffs, factors)`` where ``owner[t]`` is the state index
    of term ``t`` and ``factors[p]`` is a ``(T, dims[p])`` amplitude array.
    """
    owner, coeffs = [], []
    per_party: list[list[np.ndarray]] = [[] for _ in states[0].layout.dims]
    for idx, s in enumerate(states):
        for c, fs in s.terms:
            owner.append(idx)
            coeffs.append(c)
            for p, ket in enumerate(fs):
                per_party[p].append(ket.amplitudes)
    return (
        np.asarray(owner, dtype=int),
        np.asarray(coeffs, dtype=complex),
        [np.vstack(rows) for rows in per_party],
    )


def _check_party(s: SparseState, party: int):
    if not 0 <= party < s.layout.n_parties:
        raise ValueError(f"party {party} out of range for {s.layout.n_parties} parties")


def apply_local_operator(s: SparseState, party: int, matrix: np.ndarray) -> SparseState | None:
    """Apply ``matrix`` to ``party``'s factor in every term.

    Factor norms are folded into the coefficients; terms whose coefficient
    falls to ``PRUNE_TOL`` or below are dropped.  Returns ``None`` when every
    term vanishes.
    """
    _check_party(s, party)
    matrix = np.asarray(matrix, dtype=complex)
    dim = s.layout.dims[party]
    if matrix.shape != (dim, dim):
        raise ValueError(f"operator of shape {matrix.shape} on a party of dim {dim}")
    terms = []
    for c, factors in s.terms:
        new = matrix @ factors[party].amplitudes
        nrm = np.linalg.norm(new)
        coeff = c * nrm
        if abs(coeff) <= PRUNE_TOL:
            continue
        fs = list(factors)
        fs[party] = LocalKet(new / nrm)
        terms.append((coeff, tuple(fs)))
    if not terms:
        return None
    return SparseState(s.layout, tuple(terms))


@dataclass(frozen=True, eq=False)
class LocalProjector:
    party: int
    matrix: np.ndarray

    def __post_init__(self):
        m = as_complex_matrix(self.matrix).copy()
        if not is_projector(m, _CHECK_TOL):
            raise ValueError("matrix is not a Hermitian idempotent")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))

    @classmethod
    def from_vectors(cls, party: int, vectors: Sequence[np.ndarray]) -> "LocalProjector":
        """Projector onto the span of orthonormal ``vectors``."""
        v = np.asarray(vectors, dtype=complex)
        return cls(party, v.T @ np.conj(v))


@dataclass(frozen=True, eq=False)
class LocalMeasurement:
    """Complete set of mutually orthogonal projectors on one party."""

    party: int
    projectors: tuple[LocalProjector, ...]

    def __post_init__(self):
        projs = tuple(self.projectors)
        if not projs:
            raise ValueError("a measurement needs at least one projector")
        dim = projs[0].dim
        if any(p.dim != dim or p.party != self.party for p in projs):
            raise ValueError("projectors must share party and dimension")
        total = sum(p.matrix for p in projs)
        if not np.allclose(total, np.eye(dim), rtol=0, atol=_CHECK_TOL):
            raise ValueError("projectors do not sum to the identity")
        for a in range(len(projs)):
            for b in range(a + 1, len(projs)):
                if not np.allclose(projs[a].matrix @ projs[b].matrix, 0, atol=_CHECK_TOL):
                    raise ValueError(f"projectors {a} and {b} are not orthogonal")
        object.__setattr__(self, "projectors", projs)

    @property
    def dim(self) -> int:
        return self.projectors[0].dim

    def __len__(self):
        return len(self.projectors)


def apply_projector(s: SparseState, p: LocalProjector) -> tuple[SparseState | None, float]:
    """Project ``s`` locally; return the unnormalized state and its squared norm.

    For a unit-norm input the weight is the outcome probability.  The state is
    ``None`` when the projector annihilates ``s``.
    """
    dim = s.layout.dims[p.party] if 0 <= p.party < s.layout.n_parties else None
    if dim != p.dim:
        raise ValueError(f"projector of dim {p.dim} on party {p.party} of dim {dim}")
    out = apply_local_operator(s, p.party, p.matrix)
    if out is None:
        return None, 0.0
    return out, max(inner(out, out).real, 0.0)


def extend_ket(ket: LocalKet, ancilla) -> LocalKet:
    """Tensor ``ket`` with an ancilla qubit given as a bit (0/1) or a 2-vector."""
    if isinstance(ancilla, (int, np.integer)):
        if ancilla not in (0, 1):
            raise ValueError("ancilla bit must be 0 or 1")
        anc = np.zeros(2, dtype=complex)
        anc[ancilla] = 1.0
    else:
        anc = np.asarray(ancilla, dtype=complex).reshape(-1)
        if anc.size != 2:
            raise ValueError("ancilla must be a qubit")
    return LocalKet(np.kron(ket.amplitudes, anc))


def extend_party(s: SparseState, party: int, ancilla) -> SparseState:
    """Attach an ancilla qubit in a fixed local state to ``party``."""
    _check_party(s, party)
    layout = s.layout.with_dim(party, 2 * s.layout.dims[party])
    terms = []
    for c, factors in s.terms:
        fs = list(factors)
        fs[party] = extend_ket(fs[party], ancilla)
        terms.append((c, tuple(fs)))
    return SparseState(layout, tuple(terms))


def extended_index(x: int, bit: int) -> int:
    """1-based index of ``|x>|bit>`` in an ancilla-extended local space."""
    return 2 * (x - 1) + bit + 1


def same_ray(a: SparseState, b: SparseState, atol: float = 1e-12) -> bool:
    """True when unit states ``a`` and ``b`` differ by a global phase at most."""
    return abs(abs(inner(a, b)) ** 2 - 1) <= atol


def check_hermitian(matrix: np.ndarray, atol: float = _CHECK_TOL) -> np.ndarray:
    m = as_complex_matrix(matrix)
    if not is_hermitian(m, atol):
        raise ValueError("matrix is not Hermitian")
    return m

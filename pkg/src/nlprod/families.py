"""Generators for the orthogonal product-state families and basic checks on them.

Parties are 0-based in the API; local kets use 1-based labels, so party ``p``
holding ``|1+i>`` is ``super_ket(d, 1, i, +1)`` in slot ``p``.

The main family for ``n`` parties of dimension ``d`` has ``n`` blocks of
``2(d-1)`` states.  For block ``m`` (1-based, ``m < n``) the party numbered
``n-m`` (1-based) holds ``|i>``, its right neighbour holds ``|1 +- i>`` and
everybody else holds ``|1>``; block ``n`` wraps around, with ``|1 +- i>`` on the
first party and ``|i>`` on the last.  Labels follow the closed-form index

    phi_{2(m-1)(d-1) + k}  (sign +),   phi_{(2m-1)(d-1) + k}  (sign -),   k = i - 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensorstate import (
    PartyLayout,
    SparseState,
    basis_ket,
    gram_matrix,
    super_ket,
    uniform_ket,
)

ORTHO_TOL = 1e-12
FAMILY_NAMES = ("main", "example1", "basis1", "basis2", "stopper")


@dataclass(frozen=True, eq=False)
class StateFamily:
    name: str
    layout: PartyLayout
    states: tuple[SparseState, ...]
    labels: tuple[str, ...]
    # (block, i, sign) for states of the main construction, None otherwise
    tags: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.states) != len(self.labels):
            raise ValueError("one label per state is required")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")
        if any(s.layout != self.layout for s in self.states):
            raise ValueError("all states must share the family layout")
        tags = tuple(self.tags) if self.tags else (None,) * len(self.states)
        object.__setattr__(self, "tags", tags)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, label: str) -> SparseState:
        return self.states[self.labels.index(label)]

    def subset(self, labels: Sequence[str], name: str | None = None) -> "StateFamily":
        idx = [self.labels.index(lab) for lab in labels]
        return StateFamily(
            name or self.name,
            self.layout,
            [self.states[i] for i in idx],
            [self.labels[i] for i in idx],
            [self.tags[i] for i in idx],
        )


def main_index(d: int, block: int, i: int, sign: int) -> int:
    """1-based position of state ``(block, i, sign)`` in the closed-form labelling."""
    k = i - 1
    if sign > 0:
        return 2 * (block - 1) * (d - 1) + k
    return (2 * block - 1) * (d - 1) + k


def main_label(d: int, block: int, i: int, sign: int) -> str:
    return f"phi_{main_index(d, block, i, sign)}"


def block_parties(n: int, block: int) -> tuple[int, int]:
    """0-based parties ``(holder of |i>, holder of |1 +- i>)`` for ``block``."""
    if block < n:
        return n - block - 1, n - block
    return n - 1, 0


def main_state(n: int, d: int, block: int, i: int, sign: int) -> SparseState:
    basis_party, super_party = block_parties(n, block)
    factors = [basis_ket(d, 1)] * n
    factors[basis_party] = basis_ket(d, i)
    factors[super_party] = super_ket(d, 1, i, sign)
    return SparseState.product(factors)


def _check_nd(n: int, d: int):
    if n < 3:
        raise ValueError(f"need at least 3 parties, got n={n}")
    if d < 2:
        raise ValueError(f"need local dimension at least 2, got d={d}")


def gen_main_family(n: int, d: int) -> StateFamily:
    """The ``2n(d-1)`` state family, ordered by block, then ``i``, then sign (+ first)."""
    _check_nd(n, d)
    states, labels, tags = [], [], []
    for block in range(1, n + 1):
        for i in range(2, d + 1):
            for sign in (1, -1):
                states.append(main_state(n, d, block, i, sign))
                labels.append(main_label(d, block, i, sign))
                tags.append((block, i, sign))
    return StateFamily("main", PartyLayout((d,) * n), states, labels, tags)


def computational_state(d: int, indices: Sequence[int]) -> SparseState:
    return SparseState.product([basis_ket(d, x) for x in indices])


def computational_label(indices: Sequence[int]) -> str:
    return "ket_" + "".join(str(x) for x in indices)


def _computational_family(name: str, words: Sequence[str]) -> StateFamily:
    indices = [tuple(int(ch) for ch in w) for w in words]
    return StateFamily(
        name,
        PartyLayout((3, 3, 3)),
        [computational_state(3, ix) for ix in indices],
        [computational_label(ix) for ix in indices],
    )


# Computational-basis completion of the 3x3x3 family (15 states).
_EXAMPLE1_COMPLETION = (
    "111", "123", "132", "213", "222",
    "223", "231", "232", "233", "312",
    "321", "322", "323", "332", "333",
)

# The 21 computational-basis states that, with the i = 2 half of the 3x3x3
# family, give the weaker product basis.
_BASIS2_PRODUCTS = (
    "111", "113", "123", "131", "132",
    "133", "213", "222", "223", "231",
    "232", "233", "311", "312", "313",
    "321", "322", "323", "331", "332",
    "333",
)


def gen_example1_completion() -> StateFamily:
    return _computational_family("example1", _EXAMPLE1_COMPLETION)


def union(name: str, *families: StateFamily) -> StateFamily:
    layout = families[0].layout
    return StateFamily(
        name,
        layout,
        [s for f in families for s in f.states],
        [lab for f in families for lab in f.labels],
        [t for f in families for t in f.tags],
    )


def gen_basis1() -> StateFamily:
    return union("basis1", gen_main_family(3, 3), gen_example1_completion())


def gen_basis2() -> StateFamily:
    main = gen_main_family(3, 3)
    half = [lab for lab, tag in zip(main.labels, main.tags) if tag[1] == 2]
    return union("basis2", _computational_family("basis2", _BASIS2_PRODUCTS), main.subset(half))


def gen_stopper_family(n: int, d: int) -> StateFamily:
    """Sign-minus member of every ``(block, i)`` pair plus the uniform product state."""
    _check_nd(n, d)
    main = gen_main_family(n, d)
    keep = [lab for lab, tag in zip(main.labels, main.tags) if tag[2] < 0]
    sub = main.subset(keep)
    stopper = SparseState.product([uniform_ket(d)] * n)
    return StateFamily(
        "stopper",
        sub.layout,
        sub.states + (stopper,),
        sub.labels + ("stopper",),
        sub.tags + (None,),
    )


def get_family(name: str, n: int | None = None, d: int | None = None) -> StateFamily:
    if name == "main":
        return gen_main_family(n, d)
    if name == "stopper":
        return gen_stopper_family(n, d)
    if name == "example1":
        return gen_example1_completion()
    if name == "basis1":
        return gen_basis1()
    if name == "basis2":
        return gen_basis2()
    raise ValueError(f"unknown family {name!r}; expected one of {', '.join(FAMILY_NAMES)}")


@dataclass(frozen=True)
class OrthogonalityReport:
    max_overlap: float
    worst_pair: tuple[str, str] | None
    max_norm_error: float
    tol: float = ORTHO_TOL

    @property
    def passed(self) -> bool:
        return self.max_overlap <= self.tol


def check_orthogonality(f: StateFamily, tol: float = ORTHO_TOL) -> OrthogonalityReport:
    g = gram_matrix(f.states)
    norm_error = float(np.max(np.abs(np.diag(g) - 1))) if len(f) else 0.0
    off = np.abs(g - np.diag(np.diag(g)))
    if len(f) < 2:
        return OrthogonalityReport(0.0, None, norm_error, tol)
    j, k = np.unravel_index(int(np.argmax(off)), off.shape)
    worst = float(off[j, k])
    pair = (f.labels[min(j, k)], f.labels[max(j, k)]) if worst > tol else None
    return OrthogonalityReport(worst, pair, norm_error, tol)


def check_completeness(f: StateFamily, tol: float = ORTHO_TOL) -> bool:
    return len(f) == f.layout.total_dim and check_orthogonality(f, tol).passed


def is_single_superposition(state: SparseState) -> bool:
    """True when exactly one factor of a one-term state is not a basis ket."""
    if state.n_terms != 1:
        return False
    _, factors = state.terms[0]
    return sum(not k.is_basis_ket() for k in factors) == 1

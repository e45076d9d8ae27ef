"""Adaptive LOCC protocol trees and their exact simulation.

A tree is built from :class:`Node` (one party performs a complete projective
measurement, one child per projector) and :class:`Leaf` (a verdict).  Verdicts
are a family label, ``FAIL``, or a ``pending:`` tag for leaves of a fragment
that still has to be completed.  Measurements written with only their
informative projectors are padded with a residual projector; residual outcomes
lead to ``FAIL`` leaves and the simulator tracks the probability reaching them.

Parties are 0-based.  After :func:`attach_resource` the two resource holders
have local dimension ``2d`` with ``|x>|a>`` stored at 1-based index
``2(x-1)+a+1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np
from more_itertools import set_partitions

from .families import StateFamily, main_label
from .tensorstate import (
    LocalMeasurement,
    LocalProjector,
    SparseState,
    add_states,
    apply_projector,
    extend_party,
    extended_index,
    inner,
)

FAIL = "fail"
PENDING = "pending:"
PROB_TOL = 1e-15


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Leaf:
    verdict: str


@dataclass(frozen=True, eq=False)
class Node:
    measurement: LocalMeasurement
    children: tuple
    residual: frozenset = field(default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        object.__setattr__(self, "residual", frozenset(self.residual))
        if len(self.children) != len(self.measurement):
            raise ValueError("need exactly one child per projector")

    @property
    def party(self) -> int:
        return self.measurement.party


ProtocolTree = Union[Node, Leaf]


def depth(tree: ProtocolTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(c) for c in tree.children)


def iter_nodes(tree: ProtocolTree, path=()) -> Iterator[tuple[tuple[int, ...], ProtocolTree]]:
    yield path, tree
    if isinstance(tree, Node):
        for o, child in enumerate(tree.children):
            yield from iter_nodes(child, path + (o,))


def graft(tree: ProtocolTree, path: Sequence[int], subtree: ProtocolTree) -> ProtocolTree:
    """Return a copy of ``tree`` with the subtree at ``path`` replaced."""
    if not path:
        return subtree
    if not isinstance(tree, Node):
        raise ValueError("path runs past a leaf")
    children = list(tree.children)
    children[path[0]] = graft(children[path[0]], path[1:], subtree)
    return Node(tree.measurement, children, tree.residual)


def measurement(party: int, dim: int, groups: Sequence[Sequence[np.ndarray]], pad: bool = True):
    """Projective measurement from groups of orthonormal vectors.

    With ``pad`` the complement of the groups is appended as a last
    projector, if nonzero.  Returns ``(measurement, residual_indices)``.
    """
    projs = [LocalProjector.from_vectors(party, g) for g in groups]
    residual = set()
    if pad:
        rest = np.eye(dim) - sum(p.matrix for p in projs)
        if np.linalg.norm(rest) > 1e-9:
            projs.append(LocalProjector(party, rest))
            residual.add(len(projs) - 1)
    return LocalMeasurement(party, tuple(projs)), frozenset(residual)


def _node(party, dim, groups, children, pad=True) -> Node:
    meas, residual = measurement(party, dim, groups, pad)
    children = list(children) + [Leaf(FAIL)] * (len(meas) - len(children))
    return Node(meas, children, residual)


def _e(dim: int, x: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[x - 1] = 1.0
    return v


def _ext(d: int, x: int, bit: int) -> np.ndarray:
    return _e(2 * d, extended_index(x, bit))


def _plus_minus(u: np.ndarray, v: np.ndarray, sign: int) -> np.ndarray:
    return (u + sign * v) / np.sqrt(2)


def attach_resource(f: StateFamily, party_a: int, party_b: int) -> StateFamily:
    """Tensor every state with ``(|0>_A|0>_B + |1>_A|1>_B)/sqrt(2)``."""
    n = f.layout.n_parties
    if party_a == party_b or not (0 <= party_a < n and 0 <= party_b < n):
        raise ValueError(f"bad resource parties ({party_a}, {party_b}) for {n} parties")
    states = []
    for s in f.states:
        halves = [
            extend_party(extend_party(s, party_a, bit), party_b, bit).scaled(1 / np.sqrt(2))
            for bit in (0, 1)
        ]
        states.append(add_states(*halves))
    return StateFamily(f"{f.name}+resource", states[0].layout, states, f.labels, f.tags)


def build_discrimination_protocol(n: int, d: int) -> ProtocolTree:
    """Entanglement-assisted tree for ``gen_main_family(n, d)``.

    Expects the family with a maximally entangled qubit pair attached to the
    last two parties (``attach_resource(f, n - 2, n - 1)``).
    """
    if n < 3:
        raise ValueError(f"need at least 3 parties, got n={n}")
    if d < 2:
        raise ValueError(f"need local dimension at least 2, got d={d}")
    a, b = n - 2, n - 1
    dim2 = 2 * d
    idx = range(2, d + 1)

    def sign_split(party, block, i, vec):
        # vec(sign) is the party's local vector for the state of that sign
        return _node(
            party,
            dim2 if party in (a, b) else d,
            [[vec(1)], [vec(-1)]],
            [Leaf(main_label(d, block, i, 1)), Leaf(main_label(d, block, i, -1))],
        )

    def last_block(t):
        # survivors hold |1,t> on a and |i,t> on b; |1 +- i> sits on party 0
        children = [
            sign_split(0, n, i, lambda sg, i=i: _plus_minus(_e(d, 1), _e(d, i), sg)) for i in idx
        ]
        groups = [[_ext(d, i, 0), _ext(d, i, 1)] for i in idx]
        return _node(b, dim2, groups, children)

    def single_block(p, s):
        # block n-p-1 (0-based party p holds |i>, party p+1 holds |1 +- i>)
        block = n - p - 1
        children = []
        for i in idx:
            if p + 1 == a:
                vec = lambda sg, i=i: np.kron(_plus_minus(_e(d, 1), _e(d, i), sg), _e(2, s + 1))
            else:
                vec = lambda sg, i=i: _plus_minus(_e(d, 1), _e(d, i), sg)
            children.append(sign_split(p + 1, block, i, vec))
        return _node(p, d, [[_e(d, i)] for i in idx], children)

    def first_block(s, t):
        # |i,s>_a |1,s>_b +- |i,t>_a |i,t>_b on the resource holders
        children = []
        for i in idx:
            inner_children = []
            for sg_a in (1, -1):
                leaves = [Leaf(main_label(d, 1, i, sg_a * sg_b)) for sg_b in (1, -1)]
                groups_b = [[_plus_minus(_ext(d, 1, s), _ext(d, i, t), sg_b)] for sg_b in (1, -1)]
                inner_children.append(_node(b, dim2, groups_b, leaves))
            groups_a = [[_plus_minus(_ext(d, i, s), _ext(d, i, t), sg)] for sg in (1, -1)]
            children.append(_node(a, dim2, groups_a, inner_children))
        groups = [[_ext(d, i, 0), _ext(d, i, 1)] for i in idx]
        return _node(a, dim2, groups, children)

    def eliminate(p, s, t):
        if p == a:
            return first_block(s, t)
        rest = [_e(d, i) for i in idx]
        return _node(p, d, [[_e(d, 1)], rest], [eliminate(p + 1, s, t), single_block(p, s)], pad=False)

    def branch(s, t):
        others = [_ext(d, x, bit) for x in range(1, d + 1) for bit in (0, 1) if (x, bit) != (1, t)]
        return _node(a, dim2, [[_ext(d, 1, t)], others], [last_block(t), eliminate(0, s, t)], pad=False)

    r1 = [_ext(d, 1, 0)] + [_ext(d, i, 1) for i in idx]
    r2 = [_ext(d, 1, 1)] + [_ext(d, i, 0) for i in idx]
    return _node(b, dim2, [r1, r2], [branch(0, 1), branch(1, 0)], pad=False)


@dataclass(frozen=True)
class PathRecord:
    path: tuple[int, ...]
    probability: float
    verdict: str


@dataclass(frozen=True)
class StateOutcome:
    label: str
    paths: tuple[PathRecord, ...]
    residual_probability: float

    @property
    def total_probability(self) -> float:
        return float(sum(r.probability for r in self.paths))

    @property
    def success_probability(self) -> float:
        return float(sum(r.probability for r in self.paths if r.verdict == self.label))

    @property
    def wrong_probability(self) -> float:
        return float(
            sum(
                r.probability
                for r in self.paths
                if r.verdict not in (self.label, FAIL) and not r.verdict.startswith(PENDING)
            )
        )


@dataclass(frozen=True)
class DiscriminationReport:
    family: str
    outcomes: tuple[StateOutcome, ...]
    tol: float

    @property
    def perfect(self) -> bool:
        return all(abs(o.success_probability - 1) <= self.tol for o in self.outcomes)

    @property
    def max_wrong_probability(self) -> float:
        return max((o.wrong_probability for o in self.outcomes), default=0.0)

    @property
    def max_residual_probability(self) -> float:
        return max((o.residual_probability for o in self.outcomes), default=0.0)

    @property
    def max_total_error(self) -> float:
        return max((abs(o.total_probability - 1) for o in self.outcomes), default=0.0)


def _check_node(node: Node, state: SparseState):
    dims = state.layout.dims
    if not 0 <= node.party < len(dims) or node.measurement.dim != dims[node.party]:
        raise ProtocolError(
            f"measurement of dim {node.measurement.dim} on party {node.party} "
            f"does not fit layout {dims}"
        )


def _evaluate(tree, state, weight, path, records, residual):
    if isinstance(tree, Leaf):
        records.append(PathRecord(path, float(weight), tree.verdict))
        return residual
    _check_node(tree, state)
    branches = [apply_projector(state, p) for p in tree.measurement.projectors]
    total = sum(w for _, w in branches)
    if abs(total - weight) > 1e-9:
        raise ProtocolError(f"measurement at path {path} is not complete (lost {weight - total:.3g})")
    for o, ((post, w), child) in enumerate(zip(branches, tree.children)):
        if o in tree.residual:
            residual += w
        if post is None or w <= PROB_TOL:
            continue
        residual = _evaluate(child, post, w, path + (o,), records, residual)
    return residual


def run_protocol(tree: ProtocolTree, f: StateFamily, tol: float = 1e-9) -> DiscriminationReport:
    """Exact branch-by-branch simulation of ``tree`` on every state of ``f``."""
    outcomes = []
    for label, s in zip(f.labels, f.states):
        records: list[PathRecord] = []
        residual = _evaluate(tree, s.normalized(), 1.0, (), records, 0.0)
        outcomes.append(StateOutcome(label, tuple(records), float(residual)))
    return DiscriminationReport(f.name, tuple(outcomes), tol)


@dataclass(frozen=True)
class TraceEntry:
    path: tuple[int, ...]
    survivors: tuple[str, ...]
    max_overlap: float
    is_leaf: bool


def _max_overlap(states: Sequence[SparseState]) -> float:
    unit = [s.normalized() for s in states]
    worst = 0.0
    for j in range(len(unit)):
        for k in range(j + 1, len(unit)):
            worst = max(worst, abs(inner(unit[j], unit[k])))
    return worst


def trace_candidates(tree: ProtocolTree, f: StateFamily) -> list[TraceEntry]:
    """Follow all states of ``f`` through ``tree`` simultaneously.

    At every node and leaf, record which candidates still have nonzero weight
    and the largest overlap between their normalized post-measurement states.
    """
    entries: list[TraceEntry] = []

    def walk(node, cands, path):
        labels = tuple(lab for lab, _ in cands)
        entries.append(TraceEntry(path, labels, _max_overlap([s for _, s in cands]), isinstance(node, Leaf)))
        if isinstance(node, Leaf):
            return
        for o, (proj, child) in enumerate(zip(node.measurement.projectors, node.children)):
            nxt = []
            for lab, s in cands:
                post, w = apply_projector(s, proj)
                if post is not None and w > PROB_TOL:
                    nxt.append((lab, post))
            walk(child, nxt, path + (o,))

    walk(tree, list(zip(f.labels, f.states)), ())
    return entries


def subfamily_at(tree: ProtocolTree, f: StateFamily, path: Sequence[int], name: str | None = None) -> StateFamily:
    """Normalized post-measurement survivors of ``f`` along ``path``."""
    cands = list(zip(f.labels, f.states))
    node = tree
    for o in path:
        proj = node.measurement.projectors[o]
        nxt = []
        for lab, s in cands:
            post, w = apply_projector(s, proj)
            if post is not None and w > PROB_TOL:
                nxt.append((lab, post.normalized()))
        cands, node = nxt, node.children[o]
    if not cands:
        raise ValueError(f"no survivors at path {tuple(path)}")
    return StateFamily(
        name or f"{f.name}@{''.join(map(str, path))}",
        f.layout,
        [s for _, s in cands],
        [lab for lab, _ in cands],
    )


# greedy search ----------------------------------------------------------------


def _factor(s: SparseState, party: int) -> np.ndarray:
    return s.terms[0][1][party].amplitudes


def _two_state_node(cands, layout) -> Node:
    (la, sa), (lb, sb) = cands
    for party in range(layout.n_parties):
        fa, fb = _factor(sa, party), _factor(sb, party)
        if abs(np.vdot(fa, fb)) <= 1e-12:
            dim = layout.dims[party]
            fa, fb = fa / np.linalg.norm(fa), fb / np.linalg.norm(fb)
            return _node(party, dim, [[fa], [fb]], [Leaf(la), Leaf(lb)])
    raise ValueError(f"{la} and {lb} have no locally orthogonal factor")


def _spectator_overlap(sa, sb, party) -> complex:
    out = np.conj(sa.terms[0][0]) * sb.terms[0][0]
    for q, (ka, kb) in enumerate(zip(sa.terms[0][1], sb.terms[0][1])):
        if q != party:
            out *= ka.overlap(kb)
    return out


def _partition_options(cands, layout, max_dim):
    options = []
    for party in range(layout.n_parties):
        dim = layout.dims[party]
        if dim > max_dim:
            continue
        factors = [_factor(s, party) for _, s in cands]
        for groups in set_partitions(range(dim)):
            if len(groups) < 2:
                continue
            survivors = []
            ok = True
            for g in groups:
                sv = [c for c, fac in enumerate(factors) if np.sum(np.abs(fac[g]) ** 2) > 1e-12]
                for x in range(len(sv)):
                    for y in range(x + 1, len(sv)):
                        j, k = sv[x], sv[y]
                        local = np.vdot(factors[j][g], factors[k][g])
                        if abs(local * _spectator_overlap(cands[j][1], cands[k][1], party)) > 1e-12:
                            ok = False
                            break
                    if not ok:
                        break
                if not ok:
                    break
                survivors.append(sv)
            if not ok or not any(0 < len(sv) < len(cands) for sv in survivors):
                continue
            score = (max(len(sv) for sv in survivors), len(groups))
            options.append((score, party, groups, survivors))
    options.sort(key=lambda item: (item[0], item[1]))
    return options


def _greedy(cands, layout, depth_left, max_dim):
    if len(cands) == 1:
        return Leaf(cands[0][0])
    if depth_left == 0:
        return None
    if len(cands) == 2:
        return _two_state_node(cands, layout)
    for _, party, groups, survivors in _partition_options(cands, layout, max_dim):
        dim = layout.dims[party]
        projs = [LocalProjector.from_vectors(party, [_e(dim, x + 1) for x in g]) for g in groups]
        children = []
        for proj, sv in zip(projs, survivors):
            if not sv:
                children.append(Leaf(FAIL))
                continue
            sub = []
            for c in sv:
                post, _ = apply_projector(cands[c][1], proj)
                sub.append((cands[c][0], post.normalized()))
            child = _greedy(sub, layout, depth_left - 1, max_dim)
            if child is None:
                break
            children.append(child)
        else:
            return Node(LocalMeasurement(party, tuple(projs)), children)
    return None


def greedy_diagonal_distinguisher(f: StateFamily, max_depth: int = 8, max_dim: int = 6) -> ProtocolTree | None:
    """Search for a tree of computational-basis coarse-grainings that ends in singletons.

    Each node splits one party's basis indices into groups so that surviving
    candidates stay pairwise orthogonal and some group keeps a strict, nonempty
    subset of them.  Two remaining candidates are separated at a party where
    their factors are orthogonal.  Returns ``None`` if no tree of depth at most
    ``max_depth`` is found.
    """
    if any(s.n_terms != 1 for s in f.states):
        raise ValueError("greedy search needs single-term product states")
    cands = [(lab, s.normalized()) for lab, s in zip(f.labels, f.states)]
    return _greedy(cands, f.layout, max_depth, max_dim)


# basis-2 demonstration --------------------------------------------------------


def build_basis2_split() -> ProtocolTree:
    """Each party in turn measures ``{|1><1| + |2><2|, |3><3|}`` while outcomes stay 0.

    Leaves are ``pending:<path>`` with the 0-based outcome path.
    """
    dim = 3
    low = [_e(dim, 1), _e(dim, 2)]
    high = [_e(dim, 3)]

    def cascade(party, path):
        if party == 3:
            return Leaf(PENDING + "".join(map(str, path)))
        children = [cascade(party + 1, path + (0,)), Leaf(PENDING + "".join(map(str, path + (1,))))]
        return _node(party, dim, [low, high], children, pad=False)

    return cascade(0, ())


@dataclass(frozen=True)
class Basis2Demo:
    split: ProtocolTree
    tree: ProtocolTree
    leaves: dict
    completed: dict
    max_overlap: float


def basis2_demo(max_depth: int = 8) -> Basis2Demo:
    """Run the cascade on basis-2 and complete every outcome-1 leaf greedily."""
    from .families import gen_basis2

    f = gen_basis2()
    split = build_basis2_split()
    trace = trace_candidates(split, f)
    leaves = {e.path: e.survivors for e in trace if e.is_leaf}
    tree = split
    completed = {}
    for path in sorted(leaves):
        if 1 not in path:
            continue
        sub = subfamily_at(split, f, path)
        subtree = greedy_diagonal_distinguisher(sub, max_depth=max_depth)
        completed[path] = subtree is not None
        if subtree is not None:
            tree = graft(tree, path, subtree)
    return Basis2Demo(split, tree, leaves, completed, max(e.max_overlap for e in trace))

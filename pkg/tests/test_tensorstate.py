import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reference_states import S, dense, e, embed, kron, sup
from nlprod.families import gen_main_family
from nlprod.locc import attach_resource
from nlprod.tensorstate import (
    LocalKet,
    LocalMeasurement,
    LocalProjector,
    PartyLayout,
    SparseState,
    apply_projector,
    basis_ket,
    extend_ket,
    extend_party,
    extended_index,
    gram_matrix,
    inner,
    same_ray,
    super_ket,
)

P1 = np.diag([1, 1, 0]).astype(complex)
P2 = np.diag([0, 0, 1]).astype(complex)


def phi1():
    return SparseState.product([basis_ket(3, 1), basis_ket(3, 2), super_ket(3, 1, 2, 1)])


@pytest.mark.parametrize(
    "dim, index, expected",
    [(3, 1, [1, 0, 0]), (3, 3, [0, 0, 1]), (2, 2, [0, 1])],
)
def test_basis_ket(dim, index, expected):
    np.testing.assert_array_equal(basis_ket(dim, index).amplitudes, expected)


@pytest.mark.parametrize("index", [0, 4])
def test_basis_ket_out_of_range(index):
    with pytest.raises(ValueError):
        basis_ket(3, index)


def test_super_ket_values():
    np.testing.assert_allclose(super_ket(3, 1, 2, 1).amplitudes, [S, S, 0])
    np.testing.assert_allclose(super_ket(3, 1, 3, -1).amplitudes, [S, 0, -S])
    for d in range(2, 7):
        for i in range(2, d + 1):
            assert abs(super_ket(d, 1, i, 1).overlap(super_ket(d, 1, i, -1))) < 1e-15


def test_super_ket_rejects_equal_indices():
    with pytest.raises(ValueError):
        super_ket(3, 2, 2, 1)
    with pytest.raises(ValueError):
        super_ket(3, 1, 4, 1)


def test_layout_validation():
    with pytest.raises(ValueError):
        PartyLayout((3,))
    with pytest.raises(ValueError):
        PartyLayout((3, 1))


def test_state_validation():
    with pytest.raises(ValueError):
        SparseState(PartyLayout((2, 2)), ())
    with pytest.raises(ValueError):
        SparseState(PartyLayout((2, 2)), ((1.0, (basis_ket(2, 1), basis_ket(3, 1))),))


def test_inner_examples():
    f = gen_main_family(3, 3)
    assert abs(inner(f["phi_1"], f["phi_1"]) - 1) < 1e-15
    # |2>|1+2>|1> against |3>|1+3>|1>
    a = SparseState.product([basis_ket(3, 2), super_ket(3, 1, 2, 1), basis_ket(3, 1)])
    b = SparseState.product([basis_ket(3, 3), super_ket(3, 1, 3, 1), basis_ket(3, 1)])
    assert inner(a, b) == 0


def test_inner_layout_mismatch():
    with pytest.raises(ValueError):
        inner(phi1(), SparseState.product([basis_ket(2, 1), basis_ket(2, 1), basis_ket(2, 1)]))


def test_resource_block1_pair_orthogonal():
    f = attach_resource(gen_main_family(3, 3), 1, 2)
    plus, minus = f["phi_1"], f["phi_3"]
    assert abs(inner(plus, minus)) < 1e-15
    # dense: the four term-pair overlaps cancel
    assert abs(np.vdot(dense(plus), dense(minus))) < 1e-15


def test_projector_weights_on_phi1():
    state, w = apply_projector(phi1(), LocalProjector(0, P2))
    assert state is None and w == 0
    state, w = apply_projector(phi1(), LocalProjector(0, P1))
    assert w == pytest.approx(1, abs=1e-15)
    assert same_ray(state, phi1())


def test_r1_on_resource_block1_state():
    n, d, i = 3, 3, 2
    f = attach_resource(gen_main_family(n, d), 1, 2)
    s = f["phi_1"]
    r1 = np.zeros((6, 6))
    for x, bit in [(1, 0)] + [(j, 1) for j in range(2, d + 1)]:
        r1[extended_index(x, bit) - 1, extended_index(x, bit) - 1] = 1
    post, w = apply_projector(s, LocalProjector(2, r1))
    # weight by dense brute force
    vec = dense(s)
    dense_weight = np.linalg.norm(embed(r1, 2, (3, 6, 6)) @ vec) ** 2
    assert w == pytest.approx(dense_weight, abs=1e-14)
    assert w == pytest.approx(0.5, abs=1e-14)
    ext = lambda x, bit: e(6, extended_index(x, bit))
    target = S * (kron(e(3, 1), ext(i, 0), ext(1, 0)) + kron(e(3, 1), ext(i, 1), ext(i, 1)))
    assert abs(abs(np.vdot(target, dense(post.normalized()))) ** 2 - 1) < 1e-12


def test_extension_ordering():
    np.testing.assert_array_equal(extend_ket(basis_ket(3, 1), 0).amplitudes, e(6, 1))
    np.testing.assert_array_equal(extend_ket(basis_ket(3, 3), 1).amplitudes, e(6, 6))
    np.testing.assert_allclose(extend_ket(super_ket(3, 1, 2, 1), 0).amplitudes, S * (e(6, 1) + e(6, 3)))


def test_extend_party_bad_index():
    with pytest.raises(ValueError):
        extend_party(phi1(), 3, 0)


def test_gram_matrix_matches_pairwise_inner():
    f = attach_resource(gen_main_family(3, 2), 1, 2)
    g = gram_matrix(f.states)
    for j, a in enumerate(f.states):
        for k, b in enumerate(f.states):
            assert g[j, k] == pytest.approx(inner(a, b), abs=1e-15)


def test_measurement_validation():
    with pytest.raises(ValueError):
        LocalMeasurement(0, (LocalProjector(0, P1),))
    with pytest.raises(ValueError):
        LocalProjector(0, np.array([[1, 1], [0, 0]]))
    m = LocalMeasurement(0, (LocalProjector(0, P1), LocalProjector(0, P2)))
    assert len(m) == 2 and m.dim == 3


# properties ---------------------------------------------------------------

DIMS = (2, 3, 2)


@st.composite
def states(draw, dims=DIMS):
    seed = draw(st.integers(0, 2**32 - 1))
    n_terms = draw(st.integers(1, 3))
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(n_terms):
        c = complex(rng.normal(), rng.normal())
        factors = tuple(LocalKet(rng.normal(size=d) + 1j * rng.normal(size=d)) for d in dims)
        terms.append((c, factors))
    return SparseState(PartyLayout(dims), tuple(terms)).normalized()


@st.composite
def measurements(draw, dims=DIMS):
    party = draw(st.integers(0, len(dims) - 1))
    dim = dims[party]
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    cuts = sorted(draw(st.sets(st.integers(1, dim - 1), max_size=dim - 1)))
    bounds = [0, *cuts, dim]
    projs = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        v = q[:, lo:hi]
        projs.append(LocalProjector(party, v @ v.conj().T))
    return LocalMeasurement(party, tuple(projs))


@settings(max_examples=60, deadline=None)
@given(states(), states())
def test_inner_conjugate_symmetry(a, b):
    assert inner(a, b) == pytest.approx(np.conj(inner(b, a)), abs=1e-12)
    assert inner(a, b) == pytest.approx(np.vdot(dense(a), dense(b)), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(states(), measurements())
def test_probability_conservation(s, meas):
    total = sum(apply_projector(s, p)[1] for p in meas.projectors)
    assert total == pytest.approx(1, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(states(), measurements())
def test_projection_is_idempotent(s, meas):
    for p in meas.projectors:
        once, w1 = apply_projector(s, p)
        if once is None:
            continue
        twice, w2 = apply_projector(once, p)
        assert w2 == pytest.approx(w1, abs=1e-12)
        np.testing.assert_allclose(dense(twice), dense(once), atol=1e-12)

"""Hand-written dense reference states, independent of the package generators."""

import numpy as np

S = 1 / np.sqrt(2)


def e(dim, x):
    v = np.zeros(dim, dtype=complex)
    v[x - 1] = 1
    return v


def sup(dim, x, y, sign):
    return S * (e(dim, x) + sign * e(dim, y))


def kron(*vs):
    out = np.array([1.0 + 0j])
    for v in vs:
        out = np.kron(out, v)
    return out


def _k3(x):
    return e(3, x)


def _p3(x, y, sign):
    return sup(3, x, y, sign)


# 3x3x3 twelve-state set, keyed by its own 1-based numbering
TWELVE = {
    1: kron(_k3(1), _k3(2), _p3(1, 2, 1)),
    2: kron(_k3(1), _k3(2), _p3(1, 2, -1)),
    3: kron(_k3(1), _k3(3), _p3(1, 3, 1)),
    4: kron(_k3(1), _k3(3), _p3(1, 3, -1)),
    5: kron(_k3(2), _p3(1, 2, 1), _k3(1)),
    6: kron(_k3(2), _p3(1, 2, -1), _k3(1)),
    7: kron(_k3(3), _p3(1, 3, 1), _k3(1)),
    8: kron(_k3(3), _p3(1, 3, -1), _k3(1)),
    9: kron(_p3(1, 2, 1), _k3(1), _k3(2)),
    10: kron(_p3(1, 2, -1), _k3(1), _k3(2)),
    11: kron(_p3(1, 3, 1), _k3(1), _k3(3)),
    12: kron(_p3(1, 3, -1), _k3(1), _k3(3)),
}

# (block, i, sign) of each entry of TWELVE in the generator's closed-form labelling
TWELVE_TAGS = {
    1: (1, 2, 1), 2: (1, 2, -1), 3: (1, 3, 1), 4: (1, 3, -1),
    5: (2, 2, 1), 6: (2, 2, -1), 7: (2, 3, 1), 8: (2, 3, -1),
    9: (3, 2, 1), 10: (3, 2, -1), 11: (3, 3, 1), 12: (3, 3, -1),
}

COMPLETION_15 = ["111", "123", "132", "213", "222", "223", "231", "232", "233",
                 "312", "321", "322", "323", "332", "333"]
BASIS2_21 = ["111", "113", "123", "131", "132", "133", "213", "222", "223", "231",
             "232", "233", "311", "312", "313", "321", "322", "323", "331", "332", "333"]


def word(w):
    return kron(*(_k3(int(ch)) for ch in w))


def dense(state):
    """Dense vector of a package SparseState, computed term by term with np.kron."""
    out = 0
    for c, factors in state.terms:
        out = out + c * kron(*(k.amplitudes for k in factors))
    return out


def embed(op, party, dims):
    """Operator ``op`` on ``party`` tensored with identities elsewhere."""
    mats = [np.eye(dd) for dd in dims]
    mats[party] = op
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out

"""Small built-in groups with their standard representations."""
from __future__ import annotations

from itertools import permutations, product

import numpy as np

from .groups import (
    GroupError,
    GroupModel,
    Representation,
    build_finite_group,
    matrix_representation,
    qconj,
    qmul,
    spin_representation,
)

__all__ = [
    "symmetric3",
    "s3_standard_rep",
    "cyclic2",
    "sign_rep",
    "quaternion8",
    "binary_icosahedral",
    "quaternion_group",
    "builtin_group",
    "builtin_rep",
    "highest_weight_projection",
    "BUILTINS",
]

PHI = (1 + np.sqrt(5)) / 2


def _perm_table(perms):
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    t = np.empty((n, n), dtype=int)
    for a, p in enumerate(perms):
        for b, r in enumerate(perms):
            t[a, b] = index[tuple(p[r[i]] for i in range(len(r)))]
    return t


def symmetric3() -> GroupModel:
    """S3 with word length over {(0 1), (0 1 2)}, class-symmetrized.

    Lengths: identity 0, three-cycles 1, transpositions 2.
    """
    perms = list(permutations(range(3)))
    t = _perm_table(perms)
    s = perms.index((1, 0, 2))
    c = perms.index((1, 2, 0))
    g = build_finite_group(t, [s, c], name="S3")
    object.__setattr__(g, "_perms", perms)
    return g


def s3_standard_rep(group: GroupModel) -> Representation:
    """Two-dimensional irreducible representation of S3.

    Permutation matrices restricted to the orthogonal complement of
    (1, 1, 1), in the basis (1,-1,0)/sqrt2, (1,1,-2)/sqrt6.
    """
    perms = group._perms
    basis = np.array([[1, -1, 0], [1, 1, -2]], dtype=float)
    basis /= np.linalg.norm(basis, axis=1, keepdims=True)
    mats = []
    for p in perms:
        M = np.zeros((3, 3))
        for i in range(3):
            M[p[i], i] = 1.0
        mats.append(basis @ M @ basis.T)
    return matrix_representation(group, np.array(mats, dtype=complex), label="S3-standard")


def cyclic2() -> GroupModel:
    return build_finite_group(np.array([[0, 1], [1, 0]]), [1], name="Z2")


def sign_rep(group: GroupModel) -> Representation:
    mats = np.array([[[1.0]], [[-1.0]]], dtype=complex)
    return matrix_representation(group, mats, label="sign")


def quaternion_group(quats, generators, name="") -> GroupModel:
    """Finite subgroup of SU(2) given by unit quaternions closed under product."""
    quats = np.asarray(quats, dtype=float)
    keys = {tuple(np.round(q, 9) + 0.0): i for i, q in enumerate(quats)}
    n = len(quats)
    prods = qmul(quats[:, None, :], quats[None, :, :])
    t = np.empty((n, n), dtype=int)
    for a in range(n):
        for b in range(n):
            k = tuple(np.round(prods[a, b], 9) + 0.0)
            if k not in keys:
                raise GroupError("quaternion set is not closed under multiplication")
            t[a, b] = keys[k]
    return build_finite_group(t, generators, name=name, quats=quats)


def quaternion8() -> GroupModel:
    """Q8 = {+-1, +-i, +-j, +-k} with word length over {i, j}."""
    units = np.eye(4)
    quats = np.concatenate([units, -units])
    # handles: 0:1 1:i 2:j 3:k 4:-1 5:-i 6:-j 7:-k
    return quaternion_group(quats, [1, 2], name="Q8")


def _rotation_to_z(a):
    a = a / np.linalg.norm(a)
    z = np.array([0.0, 0.0, 1.0])
    c = float(a @ z)
    if c > 1 - 1e-14:
        return np.array([1.0, 0, 0, 0])
    if c < -1 + 1e-14:
        return np.array([0.0, 1, 0, 0])
    axis = np.cross(a, z)
    axis /= np.linalg.norm(axis)
    th = np.arccos(c)
    return np.concatenate([[np.cos(th / 2)], np.sin(th / 2) * axis])


def binary_icosahedral() -> GroupModel:
    """The 120-element binary icosahedral group, a 5-fold axis along z.

    Word length is taken over the conjugacy class of order-10 elements
    with positive real part cos(pi/5), a conjugation-invariant generating set.
    """
    q = []
    for i in range(4):
        for s in (1.0, -1.0):
            v = np.zeros(4)
            v[i] = s
            q.append(v)
    for signs in product((0.5, -0.5), repeat=4):
        q.append(np.array(signs))
    base = (0.0, 0.5, 1 / (2 * PHI), PHI / 2)
    even = [p for p in permutations(range(4)) if _parity(p) == 0]
    for p in even:
        for signs in product((1.0, -1.0), repeat=3):
            vals = np.array(base)
            vals[1:] *= signs
            v = np.empty(4)
            v[list(p)] = vals
            q.append(v)
    q = np.unique(np.round(np.array(q), 12), axis=0)
    if len(q) != 120:
        raise GroupError("binary icosahedral construction failed")
    order10 = q[np.abs(q[:, 0] - PHI / 2) < 1e-9]
    r = _rotation_to_z(order10[0, 1:])
    q = qmul(qmul(r, q), qconj(r))
    q = q[np.lexsort(np.round(q, 9).T[::-1])]
    ident = np.flatnonzero(np.abs(q[:, 0] - 1) < 1e-9)[0]
    q = np.concatenate([q[[ident]], np.delete(q, ident, axis=0)])
    gens = np.flatnonzero(np.abs(q[:, 0] - PHI / 2) < 1e-9)
    return quaternion_group(q, gens, name="2I")


def _parity(p):
    p = list(p)
    n = 0
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            n += p[i] > p[j]
    return n % 2


def highest_weight_projection(dim: int) -> np.ndarray:
    P = np.zeros((dim, dim), dtype=complex)
    P[0, 0] = 1.0
    return P


BUILTINS = {
    "S3": symmetric3,
    "Z2": cyclic2,
    "Q8": quaternion8,
    "2I": binary_icosahedral,
}


def builtin_group(name: str) -> GroupModel:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise GroupError(f"unknown built-in group {name!r}; choose from {sorted(BUILTINS)}") from None


def builtin_rep(group: GroupModel, spin: float | None = None) -> Representation:
    """Default representation: spin-j for quaternion groups, else the standard irrep."""
    if group.quats is not None:
        return spin_representation(group, 0.5 if spin is None else spin)
    if group.name == "S3":
        return s3_standard_rep(group)
    if group.name == "Z2":
        return sign_rep(group)
    raise GroupError(f"no default representation for {group.name!r}")

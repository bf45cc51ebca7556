from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_herm
from qbridge.catalog import (
    binary_icosahedral,
    cyclic2,
    quaternion8,
    s3_standard_rep,
    sign_rep,
    symmetric3,
)
from qbridge.groups import (
    GroupError,
    build_finite_group,
    build_su2_grid,
    conjugation_action,
    commutant_dimension,
    coset_space,
    matrix_representation,
    qmul,
    quat_to_euler,
    quat_to_su2,
    spin_matrices,
    spin_representation,
    stability_subgroup,
    _euler_to_quat,
)


# --- finite groups ---------------------------------------------------------


def test_trivial_group():
    g = build_finite_group([[0]], [])
    assert g.size == 1 and g.length.tolist() == [0.0]


def test_z2_lengths():
    assert cyclic2().length.tolist() == [0.0, 1.0]


def _brute_word_length(table, gens, e):
    # enumerate all words of length <= 3 over gens and inverses
    n = len(table)
    inv = [int(np.flatnonzero(table[x] == e)[0]) for x in range(n)]
    letters = sorted(set(gens) | {inv[g] for g in gens})
    best = {e: 0}
    for k in range(1, 4):
        for word in product(letters, repeat=k):
            x = e
            for a in word:
                x = table[x, a]
            best.setdefault(int(x), k)
    return best


def test_s3_class_max_length_matches_brute_force():
    g = symmetric3()
    raw = _brute_word_length(g.table, [2, 3], g.identity)
    assert len(raw) == 6
    for cls in g.conjugacy_classes():
        m = max(raw[int(x)] for x in cls)
        assert np.all(g.length[cls] == m)
    # identity 0, three-cycles 1, transpositions 2
    assert sorted(g.length.tolist()) == [0, 1, 1, 2, 2, 2]


def test_table_validation_names_axiom():
    with pytest.raises(GroupError, match="latin"):
        build_finite_group([[0, 1], [0, 1]], [1])
    bad = np.array([[0, 1, 2], [1, 2, 0], [2, 1, 0]])
    with pytest.raises(GroupError):
        build_finite_group(bad, [1])
    with pytest.raises(GroupError, match="identity"):
        build_finite_group([[0, 2, 1], [2, 1, 0], [1, 0, 2]], [1])


def test_unreachable_generators():
    g = symmetric3()
    with pytest.raises(GroupError, match="unreachable"):
        build_finite_group(g.table, [3])


@pytest.mark.parametrize("factory", [symmetric3, quaternion8, binary_icosahedral, cyclic2])
def test_length_axioms_exact(factory):
    g = factory()
    t, l = g.table, g.length
    assert l[g.identity] == 0 and np.all(l[np.arange(g.size) != g.identity] > 0)
    assert np.array_equal(l[g.inverse], l)
    assert np.all(l[t] <= l[:, None] + l[None, :])
    # l(x y x^-1) = l(y)
    for x in range(g.size):
        assert np.array_equal(l[t[t[x], g.inverse[x]]], l)
    assert np.all(t[np.arange(g.size), g.inverse] == g.identity)
    assert abs(g.weights.sum() - 1) < 1e-12


def test_icosahedral_order():
    g = binary_icosahedral()
    assert g.size == 120
    assert len(g.conjugacy_classes()) == 9


# --- SU(2) grid --------------------------------------------------------------


def test_resolution_error():
    with pytest.raises(GroupError):
        build_su2_grid(1)


@pytest.mark.parametrize("r", [2, 5, 8])
def test_grid_basic_invariants(r):
    g = build_su2_grid(r)
    assert abs(g.weights.sum() - 1) < 1e-12
    assert g.length[g.identity] == 0
    assert np.allclose(g.length[g.inverse], g.length, atol=1e-12)
    assert np.allclose(qmul(g.quats, g.quats[g.inverse]), [1, 0, 0, 0], atol=1e-12)
    assert np.all(g.weights >= 0)


def test_haar_character_average_spin_half(su2_small):
    g = build_su2_grid(16)
    chi = 2 * g.quats[:, 0]  # tr of the 2x2 matrix
    assert abs(np.dot(g.weights, chi)) < 1e-3


def test_euler_roundtrip():
    rng = np.random.default_rng(3)
    q = rng.standard_normal((50, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a = quat_to_euler(q)
    assert np.allclose(_euler_to_quat(*a.T), q, atol=1e-12)


def test_compose_lookup(su2_24):
    g = su2_24
    x, y = 17, 4001
    z = g.compose(x, y)
    assert np.allclose(g.quats[z], qmul(g.quats[x], g.quats[y]), atol=1e-9)


# --- representations ---------------------------------------------------------


def test_spin_zero_trivial(su2_small):
    U = spin_representation(su2_small, 0).matrices
    assert U.shape[1:] == (1, 1) and np.allclose(U, 1)


def test_spin_half_is_defining(su2_small):
    rep = spin_representation(su2_small, 0.5)
    assert np.allclose(rep.matrices, quat_to_su2(su2_small.quats), atol=1e-12)


def test_spin_parameter_error(su2_small):
    with pytest.raises(GroupError):
        spin_representation(su2_small, 0.3)


def test_spin_one_pi_about_y_reverses_weights(su2_24):
    x = su2_24.index_of([0.0, 0.0, 1.0, 0.0])
    U = spin_representation(su2_24, 1).at([x])[0]
    assert np.allclose(np.abs(U), np.fliplr(np.eye(3)), atol=1e-12)
    # matrix exponential oracle
    from scipy.linalg import expm

    _, jy, _ = spin_matrices(1)
    assert np.allclose(U, expm(-1j * np.pi * jy), atol=1e-12)


def test_spin_one_cube_of_third_turn(su2_24):
    x = su2_24.index_of([np.cos(np.pi / 3), 0, 0, np.sin(np.pi / 3)])
    U = spin_representation(su2_24, 1).at([x])[0]
    assert np.allclose(np.linalg.matrix_power(U, 3), np.eye(3), atol=1e-10)


def test_pauli_z_to_x(su2_24):
    x = su2_24.index_of([np.cos(np.pi / 4), 0, np.sin(np.pi / 4), 0])
    rep = spin_representation(su2_24, 0.5)
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0, 1], [1, 0]])
    assert np.allclose(conjugation_action(rep, x, sz), sx, atol=1e-12)


@pytest.mark.parametrize("j", [0.5, 1, 1.5])
def test_spin_homomorphism_on_icosahedral(j):
    g = binary_icosahedral()
    U = spin_representation(g, j).matrices
    assert np.abs(U @ U.conj().transpose(0, 2, 1) - np.eye(U.shape[1])).max() < 1e-10
    assert np.abs(np.einsum("xab,ybc->xyac", U, U) - U[g.table]).max() < 1e-10


def test_apply_matches_matrices(su2_small):
    rep = spin_representation(su2_small, 1.5)
    v = np.arange(4) + 1j
    assert np.allclose(rep.apply(v), rep.at(np.arange(su2_small.size)) @ v, atol=1e-12)


def test_matrix_representation_validation():
    g = symmetric3()
    with pytest.raises(GroupError):
        matrix_representation(g, np.ones((6, 2, 2)))


def test_conjugation_identity_and_unit(s3):
    rep = s3.proj.rep
    T = random_herm(np.random.default_rng(0), 2)
    assert np.allclose(conjugation_action(rep, rep.group.identity, T), T)
    for x in range(6):
        assert np.allclose(conjugation_action(rep, x, np.eye(2)), np.eye(2))
    with pytest.raises(GroupError):
        conjugation_action(rep, 1, np.eye(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 5), st.integers(1, 3))
def test_conjugation_is_star_automorphism(seed, x, q):
    g = symmetric3()
    rep = s3_standard_rep(g)
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((2 * q, 2 * q)) + 1j * rng.standard_normal((2 * q, 2 * q))
    T = rng.standard_normal((2 * q, 2 * q)) + 1j * rng.standard_normal((2 * q, 2 * q))
    a = lambda M: conjugation_action(rep, x, M)
    assert np.allclose(a(S @ T), a(S) @ a(T), atol=1e-10)
    assert np.allclose(a(T.conj().T), a(T).conj().T, atol=1e-10)
    assert abs(np.trace(a(T)) - np.trace(T)) < 1e-10
    assert abs(np.linalg.norm(a(T), 2) - np.linalg.norm(T, 2)) < 1e-10


@pytest.mark.parametrize("which", ["s3", "q8", "icosa"])
def test_ergodic_haar_average_finite(which, s3, q8, icosa):
    rep = {"s3": s3.proj.rep, "q8": q8.proj.rep, "icosa": spin_representation(icosa, 1)}[which]
    T = random_herm(np.random.default_rng(1), rep.dim)
    U = rep.matrices
    avg = np.einsum("x,xab,bc,xdc->ad", rep.group.weights, U, T, U.conj())
    assert np.allclose(avg, np.trace(T) / rep.dim * np.eye(rep.dim), atol=1e-8)


@pytest.mark.parametrize("j", [0.5, 1, 2])
def test_ergodic_haar_average_grid(j):
    g = build_su2_grid(16)
    rep = spin_representation(g, j)
    T = random_herm(np.random.default_rng(2), rep.dim)
    U = rep.matrices
    avg = np.einsum("x,xab,bc,xdc->ad", g.weights, U, T, U.conj())
    assert np.abs(avg - np.trace(T) / rep.dim * np.eye(rep.dim)).max() < 1e-3


# --- stability and cosets --------------------------------------------------------


def test_trivial_group_stability():
    g = build_finite_group([[0]], [])
    rep = matrix_representation(g, [[[1.0]]])
    pd = stability_subgroup(rep, [[1.0]])
    assert pd.stability.tolist() == [0]
    c = coset_space(g, pd)
    assert c.npts == 1 and c.metric.tolist() == [[0.0]]


def test_s3_stability_and_cosets(s3):
    g = s3.coset.group
    pd = s3.proj
    assert len(pd.stability) == 2
    # exhaustive check over all six elements
    for x in range(6):
        moved = np.abs(conjugation_action(pd.rep, x, pd.P) - pd.P).max()
        assert (moved < 1e-12) == (x in pd.stability)
    c = s3.coset
    assert c.npts == 3
    # quotient metric by brute force over 6 * 2 products
    for i, xi in enumerate(c.reps):
        for j, xj in enumerate(c.reps):
            brute = min(g.length[g.table[g.table[g.inverse[xi], xj], h]] for h in pd.stability)
            assert c.metric[i, j] == brute
    assert np.allclose(c.metric, 1 - np.eye(3))


def test_not_a_projection(s3):
    with pytest.raises(GroupError):
        stability_subgroup(s3.proj.rep, np.eye(2))
    with pytest.raises(GroupError):
        stability_subgroup(s3.proj.rep, np.array([[1, 1], [0, 0]]))


def test_inconsistent_tolerance_detected():
    g = binary_icosahedral()
    rep = spin_representation(g, 0.5)
    P = np.zeros((2, 2))
    P[0, 0] = 1
    with pytest.raises(GroupError, match="smaller tol"):
        stability_subgroup(rep, P, tol=0.7)


def test_sign_rep_single_coset():
    g = cyclic2()
    pd = stability_subgroup(sign_rep(g), [[1.0]])
    c = coset_space(g, pd)
    assert c.npts == 1 and c.metric.tolist() == [[0.0]]


def test_trivial_stability_gives_all_points():
    g = symmetric3()
    perm = matrix_representation(g, np.array([np.eye(3)[list(p)].T for p in g._perms], dtype=complex))
    v = np.array([1.0, 2.0, 3.0]) / np.sqrt(14)
    pd = stability_subgroup(perm, np.outer(v, v))
    c = coset_space(g, pd)
    assert c.npts == 6
    for i, xi in enumerate(c.reps):
        for j, xj in enumerate(c.reps):
            assert c.metric[i, j] == g.length[g.table[g.inverse[xi], xj]]


@pytest.mark.parametrize("factory,j", [(quaternion8, 0.5), (binary_icosahedral, 0.5), (binary_icosahedral, 1)])
def test_quotient_metric_axioms(factory, j):
    g = factory()
    rep = spin_representation(g, j)
    P = np.zeros((rep.dim, rep.dim))
    P[0, 0] = 1
    c = coset_space(g, stability_subgroup(rep, P))
    M = c.metric
    assert np.array_equal(M, M.T) and np.all(np.diag(M) == 0)
    n = c.npts
    for a in range(n):
        assert np.all(M[a][:, None] <= M[a][None, :] + M + 1e-12)
    assert abs(c.weights.sum() - 1) < 1e-12


def test_su2_stability_is_z_circle(su2_24):
    rep = spin_representation(su2_24, 1)
    P = np.zeros((3, 3))
    P[0, 0] = 1
    pd = stability_subgroup(rep, P)
    q = su2_24.quats[pd.stability]
    assert np.allclose(q[:, 1:3], 0, atol=1e-12)  # rotations about z only
    c = coset_space(su2_24, pd)
    assert c.base_index == 0 and c.reps[0] == su2_24.identity
    M = c.metric
    assert np.allclose(M, M.T) and np.allclose(np.diag(M), 0)
    idx = np.random.default_rng(0).choice(c.npts, 40, replace=False)
    sub = M[np.ix_(idx, idx)]
    assert np.all(sub[:, :, None] <= sub[:, None, :] + sub[None, :, :] + 1e-10)
    assert abs(c.weights.sum() - 1) < 1e-12


def test_commutant_dimension():
    q8, ico = quaternion8(), binary_icosahedral()
    assert [commutant_dimension(spin_representation(q8, j)) for j in (0.5, 1)] == [1, 3]
    assert [commutant_dimension(spin_representation(ico, j)) for j in (0.5, 1, 2.5, 3)] == [1, 1, 1, 2]
    assert commutant_dimension(s3_standard_rep(symmetric3())) == 1

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_herm, spin_side
from qbridge.berezin import (
    cond_exp_A,
    cond_exp_B,
    contravariant_symbol,
    covariant_symbol,
    embed_A,
    embed_B,
    first_class,
    orbit_projections,
    phi_A,
    phi_B,
    phi_composites,
    pivot,
    second_class,
    verify_admissibility,
)
from qbridge.catalog import quaternion8
from qbridge.groups import GroupError, coset_space
from qbridge.seminorms import function_seminorm, operator_seminorm


def _rand_bridge(rng, spec, q):
    n = q * spec.fibre_dim
    A = rng.standard_normal((spec.npts, n, n)) + 1j * rng.standard_normal((spec.npts, n, n))
    return (A + np.conj(np.swapaxes(A, 1, 2))) / 2


def test_s3_symbols_by_hand(s3):
    # coherent projections at the three cosets of the 2-dim irrep
    P = orbit_projections(s3)
    assert P.shape == (3, 2, 2)
    assert np.allclose(P.sum(0), 1.5 * np.eye(2))  # frame: d sum_i w_i P_i = 1
    T = np.diag([1.0, 0.0])
    sig = covariant_symbol(s3, T)[:, 0, 0].real
    assert np.allclose(sorted(sig), [0, 0.75, 0.75])


@pytest.mark.parametrize("which", ["s3", "q8"])
def test_contravariant_of_one_is_one(which, s3, q8):
    spec = {"s3": s3, "q8": q8}[which]
    d = spec.proj.rep.dim
    assert np.allclose(contravariant_symbol(spec, np.ones(spec.npts)), np.eye(d), atol=1e-12)
    assert np.allclose(covariant_symbol(spec, np.eye(d)), 1, atol=1e-12)


def test_symbol_duality(s3):
    # <sigma_T, f> = d^-1 tr(T sigma-breve_f)
    rng = np.random.default_rng(0)
    T = random_herm(rng, 2)
    f = rng.standard_normal(3)
    lhs = np.dot(s3.coset.weights, covariant_symbol(s3, T)[:, 0, 0] * f)
    rhs = np.trace(T @ contravariant_symbol(s3, f)) / 2
    assert np.isclose(lhs, rhs, atol=1e-12)


def test_symbol_positivity(icosa_specs):
    spec = icosa_specs[1]
    rng = np.random.default_rng(1)
    v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    T = np.outer(v, v.conj())
    assert np.all(covariant_symbol(spec, T).real > -1e-12)
    f = np.abs(rng.standard_normal(spec.npts))
    assert np.linalg.eigvalsh(contravariant_symbol(spec, f)).min() > -1e-12


@pytest.mark.parametrize("q", [1, 2, 3])
def test_phi_maps_are_symbol_maps(s3, q):
    spec = s3.at_level(q)
    rng = np.random.default_rng(q)
    T = random_herm(rng, 2 * q)
    f = np.stack([random_herm(rng, q) for _ in range(3)])
    assert np.allclose(phi_A(spec, embed_B(spec, T)), covariant_symbol(spec, T), atol=1e-12)
    assert np.allclose(phi_B(spec, embed_A(spec, f)), contravariant_symbol(spec, f), atol=1e-12)


@pytest.mark.parametrize("which", ["s3", "q8", "ico_first", "ico_second"])
def test_conditional_expectation_laws(which, s3, q8, icosa_specs):
    spec = {"s3": s3, "q8": q8, "ico_first": icosa_specs[0], "ico_second": icosa_specs[2]}[which]
    rng = np.random.default_rng(7)
    sides = ["m", "n"] if spec.kind == "second" else [None]
    F = _rand_bridge(rng, spec, 1)
    f = np.stack([random_herm(rng, 1) for _ in range(spec.npts)])
    g = np.stack([random_herm(rng, 1) for _ in range(spec.npts)])
    eA = cond_exp_A(spec, F)
    # bimodularity, idempotence, unit
    assert np.allclose(cond_exp_A(spec, embed_A(spec, f) @ F @ embed_A(spec, g)), f @ eA @ g, atol=1e-10)
    assert np.allclose(cond_exp_A(spec, embed_A(spec, eA)), eA, atol=1e-10)
    assert np.allclose(cond_exp_A(spec, pivot(spec)), spec.r_omega, atol=1e-10)
    for s in sides:
        d = spec.side(s).rep.dim
        S, T = random_herm(rng, d), random_herm(rng, d)
        eB = cond_exp_B(spec, F, s)
        assert np.allclose(cond_exp_B(spec, embed_B(spec, S, s) @ F @ embed_B(spec, T, s), s), S @ eB @ T, atol=1e-10)
        assert np.allclose(cond_exp_B(spec, embed_B(spec, eB, s), s), eB, atol=1e-10)
        assert np.allclose(cond_exp_B(spec, pivot(spec), s), spec.r_omega * np.eye(d), atol=1e-10)
    # positivity on X* X
    X = F @ F
    assert np.all(np.linalg.eigvalsh(cond_exp_A(spec, X)) > -1e-10)
    for s in sides:
        assert np.linalg.eigvalsh(cond_exp_B(spec, X, s)).min() > -1e-10


def test_r_omega(icosa_specs, s3):
    assert s3.r_omega == 0.5
    assert icosa_specs[2].r_omega == pytest.approx(1 / 6)


def test_pivot_is_projection(icosa_specs):
    for spec in icosa_specs:
        om = pivot(spec.at_level(2))
        assert np.allclose(om @ om, om, atol=1e-12)
        assert np.allclose(om, np.conj(np.swapaxes(om, 1, 2)))


def test_second_class_composite_formula(icosa_specs):
    spec = icosa_specs[2]
    rng = np.random.default_rng(3)
    T = random_herm(rng, 3)
    # phi^m on B^n equals the m-contravariant symbol of the n-covariant symbol
    direct = phi_B(spec, embed_B(spec, T, "n"), "m")
    assert np.allclose(direct, phi_composites(spec, T, "m"), atol=1e-10)
    S = random_herm(rng, 2)
    assert np.allclose(phi_B(spec, embed_B(spec, S, "m"), "n"), phi_composites(spec, S, "n"), atol=1e-10)
    with pytest.raises(GroupError):
        phi_composites(spec, T, "x")


def test_second_class_duality(icosa_specs):
    spec = icosa_specs[2]
    rng = np.random.default_rng(4)
    S, T = random_herm(rng, 2), random_herm(rng, 3)
    lhs = np.trace(S @ phi_composites(spec, T, "m")) / 2
    rhs = np.trace(phi_composites(spec, S, "n") @ T) / 3
    assert np.isclose(lhs, rhs, atol=1e-12)


def test_second_class_rejects_mismatched_stabilizers(icosa):
    q8 = quaternion8()
    p = spin_side(icosa, 0.5)
    c = coset_space(icosa, p)
    with pytest.raises(GroupError):
        second_class(c, p, spin_side(q8, 0.5))
    with pytest.raises(GroupError):
        first_class(c, q=0)


def test_side_errors(s3, icosa_specs):
    with pytest.raises(GroupError):
        s3.side("m")
    with pytest.raises(GroupError):
        icosa_specs[2].side(None)
    with pytest.raises(GroupError):
        cond_exp_A(s3, np.zeros((4, 2, 2)))


def test_admissibility_detects_a_broken_map(s3):
    # quartering L^A makes Phi^B expand, so the check must report violations
    fA = function_seminorm(s3.coset)
    from qbridge.seminorms import Seminorm

    half = Seminorm("function-lip", lambda f: 0.25 * fA(f))
    r = verify_admissibility(s3, (half, operator_seminorm(s3.proj.rep)), trials=30)
    assert not r["pass"] and r["violations"]["B_from_A"] > 0


def test_admissibility_finite(q8):
    r = verify_admissibility(q8, (function_seminorm(q8.coset), operator_seminorm(q8.proj.rep)), trials=60)
    assert r["pass"] and r["equivariance_error"] < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3))
def test_phi_A_fixes_functions(seed, q):
    from qbridge.catalog import s3_standard_rep, symmetric3
    from qbridge.groups import stability_subgroup

    g = symmetric3()
    spec = first_class(coset_space(g, stability_subgroup(s3_standard_rep(g), np.diag([0.0, 1.0]))))
    rng = np.random.default_rng(seed)
    f = np.stack([random_herm(rng, q) for _ in range(3)])
    assert np.abs(phi_A(spec, embed_A(spec, f)) - f).max() < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_contravariant_is_unital_positive_contraction(seed):
    from qbridge.catalog import quaternion8

    g = quaternion8()
    spec = first_class(coset_space(g, spin_side(g, 0.5)))
    rng = np.random.default_rng(seed)
    f = rng.uniform(-1, 1, spec.npts)
    X = contravariant_symbol(spec, f)
    assert np.linalg.norm(X, 2) <= np.abs(f).max() + 1e-12

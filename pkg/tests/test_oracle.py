import numpy as np
import pytest

from conftest import random_herm
from qbridge.berezin import first_class
from qbridge.bounds import OptimizerSettings
from qbridge.groups import GroupError
from qbridge.oracle import (
    DState,
    _distance_to_hull,
    hausdorff_reach_oracle,
    height_oracle,
    mean_zero_basis,
    pushforward_A,
    pushforward_B,
    sample_ball,
    sample_pure_states,
    state_metric,
)
from qbridge.seminorms import function_seminorm, operator_seminorm


def test_mean_zero_basis():
    B = mean_zero_basis(4)
    assert B.shape == (3, 4)
    assert np.allclose(B @ B.T, np.eye(3)) and np.allclose(B.sum(1), 0)


def test_sample_ball_step_one_on_a_line(s3):
    L = function_seminorm(s3.coset)
    z = np.array([[1.0, -1.0, 0.0]])
    s = sample_ball(L, z, step=1.0)
    vals = sorted(float(m[0]) for m in s.members)
    # radial projections of -z, +z plus the origin; L(z) = 2
    assert len(vals) == 3 and vals[1] == 0 and np.isclose(vals[2], 0.5) and np.isclose(vals[0], -0.5)
    assert s.boundary.sum() == 2


def test_sample_ball_members_certified(s3):
    L = operator_seminorm(s3.proj.rep)
    s = sample_ball(L, 2, step=0.5)
    assert all(L(X) <= 1 for X in s.members)
    assert np.allclose([L(X) for X in s.members[s.boundary]], 1, atol=1e-9)
    r = sample_ball(L, 2, count=20, seed=3, interior=False)
    assert r.boundary.sum() == 20 and r.descriptor["mode"] == "random"


def test_sample_ball_errors(icosa_specs):
    L = operator_seminorm(icosa_specs[1].proj.rep)
    with pytest.raises(GroupError):
        sample_ball(L, 3, step=0.5)  # 8 search dimensions
    with pytest.raises(ValueError):
        sample_ball(L, 3)


def test_pure_states_grid():
    s = sample_pure_states(2, step=0.5)
    rho = s.states
    assert np.allclose(np.einsum("iaa->i", rho), 1)
    assert np.allclose(rho @ rho, rho)
    r = sample_pure_states(3, count=5, seed=1)
    assert r.states.shape == (5, 3, 3)


def test_point_mass_distance_is_metric(s3):
    c = s3.coset
    mu, nu = np.eye(3)[0], np.eye(3)[2]
    assert state_metric(None, mu, nu, coset=c).value == pytest.approx(c.metric[0, 2], abs=1e-7)
    assert state_metric(None, mu, mu, coset=c).value == 0


def test_state_metric_primal_dual_agree(s3, q8):
    # the SDP sup over the Lip-ball and the conic dual over transport plans meet
    for spec in (s3, q8):
        rep = spec.proj.rep
        rng = np.random.default_rng(0)
        for _ in range(3):
            a, b = random_herm(rng, 2), random_herm(rng, 2)
            mu = a @ a / np.trace(a @ a)
            nu = b @ b / np.trace(b @ b)
            primal = state_metric(None, mu, nu, rep=rep).value
            dual, _ = _distance_to_hull(rep, mu, nu[None])
            assert primal == pytest.approx(dual, abs=1e-6)


def test_state_metric_sampled_group_needs_settings(su2_spec_factory):
    spec = su2_spec_factory(0.5)
    rep = spec.proj.rep
    mu, nu = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    with pytest.raises(ValueError):
        state_metric(operator_seminorm(rep), mu, nu, rep=rep)
    v = state_metric(operator_seminorm(rep), mu, nu, OptimizerSettings(0, restarts=4, steps=100), rep=rep)
    assert v.provenance == "heuristic-lower" and 0 < v.value <= v.cap


def test_pushforwards_are_states(s3):
    mu = np.array([0.2, 0.5, 0.3])
    phi = pushforward_A(s3, mu)
    assert np.allclose(phi.restrict_A(), mu)
    nu = np.diag([0.3, 0.7])
    psi = pushforward_B(s3, nu)
    assert np.isclose(psi.p.sum(), 1) and np.all(psi.p >= 0)
    assert np.isclose(psi(np.broadcast_to(np.eye(2), (3, 2, 2))), 1)
    assert isinstance(psi, DState)


def test_oracles_need_finite_first_class(su2_spec_factory, icosa_specs):
    for spec in (su2_spec_factory(0.5), icosa_specs[2], icosa_specs[0].at_level(2)):
        with pytest.raises(GroupError):
            height_oracle(spec, sample_pure_states(2, step=1.0))


def test_reach_oracle_coarse_s3(s3):
    LA, LB = function_seminorm(s3.coset), operator_seminorm(s3.proj.rep)
    ballA = sample_ball(LA, mean_zero_basis(3), step=1.0, interior=False)
    ballB = sample_ball(LB, 2, step=1.0, interior=False)
    val = hausdorff_reach_oracle(s3, ballA, ballB)
    assert 0.5 < val <= 1.0 + 1e-6
    with pytest.raises(ValueError):
        hausdorff_reach_oracle(s3, ballA, type(ballB)(ballB.members[:0], ballB.boundary[:0]))


def test_height_oracle_coarse(q8):
    out = height_oracle(q8, sample_pure_states(2, step=1.0))
    assert set(out) == {"height", "A_side", "B_side", "pushforward_B"}
    assert 0 < out["height"] <= 1 / np.sqrt(2) + 1e-6
    # coherent states themselves are at distance 0 from the level-1 set
    P = q8.proj.P
    d, _ = _distance_to_hull(q8.proj.rep, P, np.array([P]))
    assert d == pytest.approx(0, abs=1e-7)


def test_single_coset_bridge_has_zero_height():
    from qbridge.catalog import cyclic2, sign_rep
    from qbridge.groups import coset_space, stability_subgroup

    g = cyclic2()
    spec = first_class(coset_space(g, stability_subgroup(sign_rep(g), [[1.0]])))
    assert spec.npts == 1
    out = height_oracle(spec, type(sample_pure_states(2, step=1.0))(np.ones((1, 1, 1))))
    assert out["height"] == pytest.approx(0, abs=1e-8)

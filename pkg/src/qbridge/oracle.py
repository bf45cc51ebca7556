"""Brute-force ground truth for tiny bridges.

Outer suprema are taken over finite samples of a Lip-ball or of the
state space, while each inner infimum is solved exactly as a convex
program (cvxpy).  The results are therefore lower estimates of the true
Hausdorff distances, which is what the dominance checks need.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import product

import cvxpy as cp
import numpy as np

from .berezin import BridgeSpec, orbit_projections, orbit_vectors
from .bounds import BoundValue, LinearNormObjective, OptimizerSettings, haar_mean_length, maximize_over_lip_ball
from .groups import GroupError, Representation
from .seminorms import Seminorm, ball_membership, hermitian_basis

__all__ = [
    "BallSample",
    "StateSample",
    "DState",
    "sample_ball",
    "sample_pure_states",
    "mean_zero_basis",
    "hausdorff_reach_oracle",
    "state_metric",
    "pushforward_A",
    "pushforward_B",
    "height_oracle",
]

SOLVER = "CLARABEL"


def _solve(prob) -> float:
    """Solve with Clarabel, falling back to tight SCS; nan if neither converges."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            prob.solve(solver=SOLVER)
        except cp.error.SolverError:
            pass
        if prob.status != "optimal":
            try:
                prob.solve(solver="SCS", eps=1e-10, max_iters=200000)
            except cp.error.SolverError:
                return float("nan")
    if prob.status not in ("optimal", "optimal_inaccurate"):
        return float("nan")
    return float(prob.value)


@dataclass
class BallSample:
    members: np.ndarray
    boundary: np.ndarray  # boolean mask of radially projected members
    descriptor: dict = field(default_factory=dict)


@dataclass
class StateSample:
    states: np.ndarray  # (n, d, d) density matrices or (n, npts) weight vectors
    descriptor: dict = field(default_factory=dict)


def mean_zero_basis(npts: int) -> np.ndarray:
    """Orthonormal basis (rows) of functions on npts points with zero sum."""
    Q, _ = np.linalg.qr(np.column_stack([np.ones(npts), np.eye(npts)[:, : npts - 1]]))
    return Q[:, 1:].T


def _cube_surface(k, step):
    n = int(round(2 / step))
    ticks = np.linspace(-1, 1, n + 1)
    pts = np.array(list(product(ticks, repeat=k)))
    on_face = np.isclose(np.abs(pts).max(axis=1), 1.0)
    return pts[on_face]


def sample_ball(seminorm: Seminorm, basis, step: float | None = None, count: int | None = None,
                seed: int = 0, interior: bool = True) -> BallSample:
    """Finite inner approximation of {X : X = X*, L(X) <= 1} in span(basis).

    Grid mode (``step``): lattice points of the cube surface [-1, 1]^k are
    scaled radially onto the ball boundary, and copies at radial levels
    0, s, 2s, ... < 1 with s = max(step, 1/4) fill the interior.  Random
    mode (``count``): Gaussian directions scaled to the boundary, plus the
    same radial levels.  Every member is re-certified.
    """
    if isinstance(basis, (int, np.integer)):
        basis = hermitian_basis(int(basis))
    basis = np.asarray(basis)
    k = len(basis)
    if step is not None:
        if k > 3:
            raise GroupError(f"grid mode needs at most 3 search dimensions, got {k}; use random mode")
        dirs = _cube_surface(k, step) if k else np.zeros((0, 0))
        desc = {"mode": "grid", "step": step}
        levels = np.arange(0, 1, max(step, 0.25))
    else:
        if count is None:
            raise ValueError("give a grid step or a sample count")
        rng = np.random.default_rng(seed)
        dirs = rng.standard_normal((count, k))
        desc = {"mode": "random", "count": count, "seed": seed}
        levels = np.arange(0, 1, 0.25)
    bnd = []
    for c in dirs:
        X = np.tensordot(c, basis, axes=(0, 0))
        L = seminorm(X)
        if L > 0:
            bnd.append(X / (L * (1 + 1e-12)))
    shape = basis.shape[1:]
    bnd = np.array(bnd).reshape((-1,) + shape)
    inner = [lv * bnd for lv in levels if lv > 0] if interior else []
    members = np.concatenate([bnd] + inner + [np.zeros((1,) + shape, dtype=bnd.dtype)])
    keep = np.array([_member(seminorm, X) for X in members])
    mask = np.zeros(len(members), dtype=bool)
    mask[: len(bnd)] = True
    desc["size"] = int(keep.sum())
    return BallSample(members[keep], mask[keep], desc)


def _member(seminorm, X):
    if X.ndim == 1:
        return bool(np.isrealobj(X) or np.abs(X.imag).max() <= 1e-10) and seminorm(X) <= 1
    return ball_membership(seminorm, X, 1.0)


def sample_pure_states(d: int, step: float | None = None, count: int | None = None, seed: int = 0) -> StateSample:
    """Pure states: a polar/azimuth Bloch-sphere grid for d = 2, random vectors otherwise."""
    if d == 2 and step is not None:
        thetas = np.arange(0, np.pi + 1e-12, step)
        vecs = []
        for th in thetas:
            nphi = max(1, int(round(2 * np.pi * np.sin(th) / step)))
            for ph in 2 * np.pi * np.arange(nphi) / nphi:
                vecs.append([np.cos(th / 2), np.exp(1j * ph) * np.sin(th / 2)])
        vecs = np.array(vecs)
        desc = {"mode": "bloch-grid", "step": step}
    else:
        rng = np.random.default_rng(seed)
        n = count or 200
        vecs = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        desc = {"mode": "random", "count": n, "seed": seed}
    return StateSample(np.einsum("ia,ib->iab", vecs, vecs.conj()), desc)


# ---------------------------------------------------------------------------
# reach


def _finite_only(spec: BridgeSpec):
    if spec.coset.group.kind != "finite":
        raise GroupError("oracle programs need a finite group")
    if spec.kind != "first" or spec.q != 1:
        raise GroupError("oracles cover first-class bridges at q = 1")


def _lip_constraints(rep: Representation, b):
    g = rep.group
    cons = []
    d = rep.dim
    for x in np.flatnonzero(g.length > 0):
        U = rep.at([x])[0]
        Dx = U @ b @ U.conj().T - b
        cons += [Dx << g.length[x] * np.eye(d), Dx >> -g.length[x] * np.eye(d)]
    return cons


class _InfOverB:
    """min over b in the operator Lip-ball of max_i ||a_i w_i - b w_i||."""

    def __init__(self, spec):
        rep = spec.proj.rep
        self.w = orbit_vectors(spec)
        self.aw = cp.Parameter((spec.npts, rep.dim), complex=True)
        b = cp.Variable((rep.dim, rep.dim), hermitian=True)
        t = cp.Variable()
        cons = _lip_constraints(rep, b)
        cons += [cp.norm(self.aw[i] - b @ self.w[i]) <= t for i in range(spec.npts)]
        self.prob = cp.Problem(cp.Minimize(t), cons)

    def __call__(self, a):
        self.aw.value = a[:, None] * self.w
        return _solve(self.prob)


class _InfOverA:
    """min over a in the function Lip-ball of max_i ||a_i w_i - b w_i||."""

    def __init__(self, spec):
        c = spec.coset
        self.w = orbit_vectors(spec)
        self.bw = cp.Parameter((spec.npts, self.w.shape[1]), complex=True)
        a = cp.Variable(spec.npts)
        t = cp.Variable()
        cons = []
        for i in range(c.npts):
            for j in range(i + 1, c.npts):
                cons += [cp.abs(a[i] - a[j]) <= c.metric[i, j]]
            cons += [cp.norm(a[i] * self.w[i] - self.bw[i]) <= t]
        self.prob = cp.Problem(cp.Minimize(t), cons)

    def __call__(self, b):
        self.bw.value = self.w @ b.T  # row i is b w_i
        return _solve(self.prob)


def hausdorff_reach_oracle(spec: BridgeSpec, ballA: BallSample, ballB: BallSample) -> float:
    """Lower estimate of the Hausdorff distance between L1_A omega and omega L1_B.

    For rank-one omega(x_i) = w_i w_i^*, ||a omega - omega b||_D equals
    max_i ||a_i w_i - b w_i||.  The sup over each sampled ball uses only its
    boundary members (the distance to a convex set is convex, so it peaks on
    the boundary); the inner infimum over the whole other ball is exact.
    """
    _finite_only(spec)
    if len(ballA.members) == 0 or len(ballB.members) == 0:
        raise ValueError("empty ball sample")
    infB, infA = _InfOverB(spec), _InfOverA(spec)
    A = ballA.members[ballA.boundary] if ballA.boundary.any() else ballA.members
    B = ballB.members[ballB.boundary] if ballB.boundary.any() else ballB.members
    # unsolved inner programs are dropped, which can only lower the estimate
    da = np.nanmax([infB(np.real(a)) for a in A] + [0.0])
    db = np.nanmax([infA(b) for b in B] + [0.0])
    return float(max(da, db))


# ---------------------------------------------------------------------------
# states


@dataclass
class DState:
    """phi(F) = sum_i p_i tr(rho_i F(x_i)), a state of C(G/H, B)."""

    p: np.ndarray
    rho: np.ndarray

    def __call__(self, F) -> complex:
        return complex(np.einsum("i,iab,iba->", self.p, self.rho, F))

    def restrict_A(self) -> np.ndarray:
        return self.p * np.real(np.einsum("iaa->i", self.rho))

    def restrict_B(self) -> np.ndarray:
        return np.einsum("i,iab->ab", self.p, self.rho)


def pushforward_A(spec: BridgeSpec, mu) -> DState:
    """phi_mu = mu o Phi^A for a probability vector mu on the coset points."""
    return DState(np.asarray(mu, dtype=float), orbit_projections(spec))


def pushforward_B(spec: BridgeSpec, nu) -> DState:
    """psi_nu = nu o Phi^B o Phi^A for a density matrix nu."""
    om = orbit_projections(spec)
    d = spec.proj.rep.dim
    p = d * spec.coset.weights * np.real(np.einsum("ab,iba->i", nu, om))
    return DState(p, om)


def state_metric(seminorm: Seminorm, mu, nu, settings: OptimizerSettings | None = None,
                 rep: Representation | None = None, coset=None) -> BoundValue:
    """sup{|mu(a) - nu(a)| : L(a) <= 1}.

    Exact convex programs for functions on a finite coset space (a linear
    program) and for operators of a finite group (a semidefinite program);
    otherwise seeded ascent, a lower value, with cap ||mu - nu||_1 * mean(l).
    """
    mu = np.asarray(mu)
    nu = np.asarray(nu)
    delta = mu - nu
    if np.abs(delta).max() == 0:
        return BoundValue(0.0, "exact")
    if coset is not None:
        a = cp.Variable(coset.npts)
        cons = [cp.abs(a[i] - a[j]) <= coset.metric[i, j]
                for i in range(coset.npts) for j in range(i + 1, coset.npts)]
        prob = cp.Problem(cp.Maximize(np.real(delta) @ a), cons + [a[0] == 0])
        return BoundValue(max(0.0, _solve(prob)), "exact")
    if rep is None:
        raise ValueError("operator state metrics need the representation")
    g = rep.group
    tnorm = float(np.abs(np.linalg.eigvalsh(delta)).sum())
    cap = tnorm * haar_mean_length(g)
    if g.kind == "finite":
        b = cp.Variable((rep.dim, rep.dim), hermitian=True)
        prob = cp.Problem(cp.Maximize(cp.real(cp.trace(delta @ b))), _lip_constraints(rep, b))
        return BoundValue(max(0.0, _solve(prob)), "exact", cap=cap)
    if settings is None:
        raise ValueError("sampled groups need optimizer settings")
    obj = LinearNormObjective(lambda T: np.array([[np.trace(delta @ T)]]))
    return maximize_over_lip_ball(seminorm, obj, rep.dim, settings, cap=cap)


def _distance_to_hull(rep: Representation, nu, coherent):
    """min over convex weights p of rho_B(nu, sum_i p_i P_i), by conic duality.

    rho_B(mu, nu) = min sum_x l(x) ||Z_x||_1 subject to
    sum_x (alpha_{x^-1}(Z_x) - Z_x) = mu - nu, with Z_x Hermitian.
    """
    g = rep.group
    d = rep.dim
    moving = np.flatnonzero(g.length > 0)
    p = cp.Variable(len(coherent), nonneg=True)
    Zp = [cp.Variable((d, d), hermitian=True) for _ in moving]
    Zm = [cp.Variable((d, d), hermitian=True) for _ in moving]
    total = 0
    cons = [cp.sum(p) == 1]
    for x, A, B in zip(moving, Zp, Zm):
        U = rep.at([g.inverse[x]])[0]
        Z = A - B
        total = total + U @ Z @ U.conj().T - Z
        cons += [A >> 0, B >> 0]
    hull = sum(p[i] * coherent[i] for i in range(len(coherent)))
    cons += [total == nu - hull]
    cost = sum(g.length[x] * cp.real(cp.trace(A + B)) for x, A, B in zip(moving, Zp, Zm))
    prob = cp.Problem(cp.Minimize(cost), cons)
    return _solve(prob), p.value


def height_oracle(spec: BridgeSpec, states: StateSample, functions: StateSample | None = None) -> dict:
    """Lower estimate of the bridge height from sampled states.

    B side: for each sampled state nu the exact distance to the restriction
    of the level-1 set of omega, which on B is the convex hull of the
    coherent states alpha_{x_i}(P).  A side: distances from sampled mu to
    the restriction of phi_mu, which is mu itself.  Also reports the
    distance from nu to the restriction of the pushforward psi_nu.
    """
    _finite_only(spec)
    rep = spec.proj.rep
    om = orbit_projections(spec)
    c = spec.coset
    LB = None
    b_side, push = 0.0, 0.0
    for nu in states.states:
        val, _ = _distance_to_hull(rep, nu, om)
        if np.isfinite(val):
            b_side = max(b_side, val)
        psi = pushforward_B(spec, nu).restrict_B()
        push = max(push, state_metric(LB, nu, psi, rep=rep).value)
    if functions is None:
        functions = StateSample(np.eye(c.npts), {"mode": "point-masses"})
    a_side = 0.0
    for mu in functions.states:
        phi = pushforward_A(spec, mu)
        a_side = max(a_side, state_metric(None, mu, phi.restrict_A(), coset=c).value)
    return {"height": max(a_side, b_side), "A_side": a_side, "B_side": b_side, "pushforward_B": push}

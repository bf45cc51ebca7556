"""Reach, height and length bounds for coherent-state bridges.

Every suprema over a Lip-ball is estimated by seeded multi-start ascent
(``heuristic-lower``) and paired with the analytic cap
2 * (Haar mean of the length function).  Integral quantities are exact for
finite groups and quadratures (with a resolution-doubling error estimate)
on sampled SU(2) grids.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .berezin import (
    BridgeSpec,
    contravariant_symbol,
    covariant_symbol,
    first_class,
    orbit_projections,
    orbit_vectors,
    phi_composites,
)
from .groups import build_su2_grid, coset_space, spin_representation, stability_subgroup
from .seminorms import Seminorm, function_seminorm, hermitian_basis, operator_seminorm

__all__ = [
    "BoundValue",
    "BoundReport",
    "TrekReport",
    "OptimizerSettings",
    "LinearNormObjective",
    "maximize_over_lip_ball",
    "haar_mean_length",
    "gamma_breve_A",
    "delta_tilde_A",
    "gamma_B",
    "delta_quantities",
    "gamma_direct",
    "bridge_gap",
    "gamin_gap",
    "bigineq_terms",
    "first_class_values",
    "assemble_first_class",
    "assemble_second_class",
    "trek_bounds",
]

PROVENANCES = ("exact", "quadrature", "heuristic-lower", "analytic-cap")
SU2_MEAN_ANGLE = np.pi / 2 + 2 / np.pi  # Haar mean of the SO(3) rotation angle


@dataclass
class BoundValue:
    value: float
    provenance: str
    quad_err: float | None = None
    cap: float | None = None
    witness: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "heuristic-lower":
            if self.cap is None:
                raise ValueError("heuristic-lower values need an analytic cap")
            if self.value > self.cap * (1 + 1e-12) + 1e-12:
                raise AssertionError(f"lower estimate {self.value} exceeds its cap {self.cap}")

    def as_dict(self) -> dict:
        d = {"value": self.value, "provenance": self.provenance}
        if self.quad_err is not None:
            d["quad_err"] = self.quad_err
        if self.cap is not None:
            d["cap"] = self.cap
        return d


@dataclass(frozen=True)
class OptimizerSettings:
    seed: int
    restarts: int = 64
    steps: int = 500
    step_size: float = 0.1


# ---------------------------------------------------------------------------
# optimizer


class LinearNormObjective:
    """X -> max_p ||A(X)_p|| for a linear map A with (stack of) matrix outputs."""

    def __init__(self, fmap, name: str = ""):
        self.fmap = fmap
        self.name = name

    def _stack(self, Y):
        Y = np.asarray(Y, dtype=complex)
        if Y.ndim < 2:
            Y = Y.reshape(-1, 1, 1)
        return Y.reshape((-1,) + Y.shape[-2:])

    def __call__(self, X) -> float:
        Y = self._stack(self.fmap(X))
        return float(np.linalg.svd(Y, compute_uv=False)[:, 0].max())

    def linearize(self, basis):
        imgs = np.array([self._stack(self.fmap(B)) for B in basis])

        def f(c):
            Y = np.tensordot(c, imgs, axes=(0, 0))
            U, s, Vh = np.linalg.svd(Y)
            p = int(np.argmax(s[:, 0]))
            u, v = U[p, :, 0], Vh[p, 0, :].conj()
            grad = np.real(np.einsum("a,kab,b->k", u.conj(), imgs[:, p], v))
            return float(s[p, 0]), grad

        return f


def _fd_linearize(func, basis, eps=1e-7):
    def f(c):
        X = np.tensordot(c, basis, axes=(0, 0))
        v = func(X)
        g = np.empty(len(c))
        for i in range(len(c)):
            g[i] = (func(X + eps * basis[i]) - v) / eps
        return float(v), g

    return f


def maximize_over_lip_ball(seminorm: Seminorm, objective, basis, settings: OptimizerSettings,
                           cap: float | None = None, unit=None) -> BoundValue:
    """Seeded multi-start ascent of objective(X) / seminorm(X).

    ``basis`` is an int d (traceless Hermitian d x d matrices) or an explicit
    real-coordinate basis.  Both functions are homogeneous of degree one,
    so maximizing their ratio and rescaling radially to seminorm(X) = 1 is
    the same as maximizing the objective over the unit ball.  Each restart
    r draws from its own stream default_rng([seed, r]); the best value is
    non-decreasing in the number of restarts.
    """
    if isinstance(basis, (int, np.integer)):
        unit = np.eye(int(basis)) if unit is None else unit
        basis = hermitian_basis(int(basis))
    basis = np.asarray(basis)
    k = len(basis)
    if k == 0:
        return BoundValue(0.0, "heuristic-lower", cap=0.0 if cap is None else cap)
    if unit is not None:
        rng = np.random.default_rng([settings.seed, 10**6])
        X = np.tensordot(rng.standard_normal(k), basis, axes=(0, 0))
        a, b = objective(X), objective(X + 0.731 * unit)
        if abs(a - b) > 1e-8 * max(1.0, abs(a)):
            raise ValueError("objective is not invariant under adding multiples of the unit")
    obj = objective.linearize(basis) if hasattr(objective, "linearize") else _fd_linearize(objective, basis)
    lip = seminorm.linearize(basis) if seminorm.linearize is not None else _fd_linearize(seminorm, basis)

    def ratio(c):
        o, go = obj(c)
        l, gl = lip(c)
        if l <= 1e-300:
            return 0.0, np.zeros(k), l
        return o / l, (go - (o / l) * gl) / l, l

    best, best_c = 0.0, None
    for r in range(settings.restarts):
        rng = np.random.default_rng([settings.seed, r])
        c = rng.standard_normal(k)
        R, g, l = ratio(c)
        if l > 0:
            c = c / l
            g = g * l
        h = settings.step_size
        for _ in range(settings.steps):
            gn = np.linalg.norm(g)
            cn = np.linalg.norm(c)
            moved = False
            for direction in ((g / gn) if gn > 0 else None, rng.standard_normal(k)):
                if direction is None:
                    continue
                direction = direction / np.linalg.norm(direction)
                cand = c + h * cn * direction
                R2, g2, l2 = ratio(cand)
                if R2 > R:
                    c, R, g = cand / l2, R2, g2 * l2
                    moved = True
                    break
            if not moved:
                h /= 2
                if h < 1e-9:
                    break
        if R > best or best_c is None:
            best, best_c = R, c
    if seminorm.constraints is not None and best_c is not None and best > 0:
        best, best_c = _polish(seminorm, obj, lip, basis, best_c, best)
    witness = np.tensordot(best_c, basis, axes=(0, 0))
    cap = np.inf if cap is None else cap
    return BoundValue(float(best), "heuristic-lower", cap=float(cap), witness=witness)


def _polish(seminorm, obj, lip, basis, c, best, rounds=20):
    """Successive linearization: maximize the objective's supporting linear
    functional exactly over the ball (a convex program), keep the result if
    the true ratio improves.  For convex homogeneous objectives each round
    cannot decrease the value."""
    import cvxpy as cp

    k = len(basis)
    x = cp.Variable(k)
    g = cp.Parameter(k)
    flat = basis.reshape(k, -1)
    X = cp.reshape(flat.T @ x, basis.shape[1:], order="C")
    prob = cp.Problem(cp.Maximize(g @ x), seminorm.constraints(X))
    for _ in range(rounds):
        o, go = obj(c)
        g.value = go
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                prob.solve(solver="CLARABEL")
        except cp.error.SolverError:
            break
        # the candidate is re-scored exactly below, so inaccurate solves are usable
        if x.value is None or prob.status not in ("optimal", "optimal_inaccurate"):
            break
        cand = np.asarray(x.value, dtype=float)
        o2, _ = obj(cand)
        l2, _ = lip(cand)
        if l2 <= 0:
            break
        R2 = o2 / l2
        if R2 <= best * (1 + 1e-14):
            break
        best, c = R2, cand / l2
    return best, c


# ---------------------------------------------------------------------------
# integral quantities


def haar_mean_length(group) -> float:
    """Haar mean of the length function (exact SO(3) value on SU(2) grids)."""
    if group.kind == "finite":
        return float(np.dot(group.weights, group.length))
    return float(SU2_MEAN_ANGLE)


@lru_cache(maxsize=8)
def _grid(resolution):
    return build_su2_grid(resolution)


def _overlaps(spec: BridgeSpec, side):
    pd = spec.side(side)
    w = orbit_vectors(spec, side)
    return np.abs(w @ pd.vector.conj()) ** 2  # tr(P alpha_{x_i}(P))


def _refined(spec: BridgeSpec, side):
    pd = spec.side(side)
    g = spec.coset.group
    g2 = _grid(2 * g.resolution)
    rep = spin_representation(g2, pd.rep.spin)
    pd2 = stability_subgroup(rep, pd.P, pd.tol)
    return first_class(coset_space(g2, pd2))


def _integral(spec, side, integrand, richardson):
    c = spec.coset
    value = float(np.dot(c.weights, integrand(spec, side)))
    if c.group.kind == "finite":
        return BoundValue(value, "exact")
    err = None
    if richardson and c.group.resolution is not None and spec.side(side).rep.spin is not None:
        fine = _refined(spec, side)
        err = abs(float(np.dot(fine.coset.weights, integrand(fine, None))) - value)
    return BoundValue(value, "quadrature", quad_err=err)


def _gba_integrand(spec, side):
    d = spec.side(side).rep.dim
    rho = spec.coset.metric[spec.coset.base_index]
    return d * rho * np.sqrt(_overlaps(spec, side))


def _dta_integrand(spec, side):
    d = spec.side(side).rep.dim
    rho = spec.coset.metric[spec.coset.base_index]
    return d * rho * _overlaps(spec, side)


def gamma_breve_A(spec: BridgeSpec, side: str | None = None, richardson: bool = True) -> BoundValue:
    """d sum_i w_i rho(base, x_i) ||P alpha_{x_i}(P)||, with ||P alpha(P)|| = sqrt(tr(P alpha(P)))."""
    return _integral(spec, side, _gba_integrand, richardson)


def delta_tilde_A(spec: BridgeSpec, side: str | None = None, richardson: bool = True) -> BoundValue:
    """sum_i w_i rho(base, x_i) d tr(P alpha_{x_i}(P))."""
    return _integral(spec, side, _dta_integrand, richardson)


# ---------------------------------------------------------------------------
# optimizer-backed quantities


def _cap(spec):
    return 2.0 * haar_mean_length(spec.coset.group)


def gamma_B(spec: BridgeSpec, settings: OptimizerSettings, side: str | None = None,
            seminorm: Seminorm | None = None) -> BoundValue:
    """sup ||P (tr(P T) 1 - T)|| over the Lip-ball of the operator side."""
    pd = spec.side(side)
    P = pd.P
    L = operator_seminorm(pd.rep) if seminorm is None else seminorm
    objective = LinearNormObjective(lambda T: P @ (np.trace(P @ T) * np.eye(len(P)) - T), "gamma_B")
    return maximize_over_lip_ball(L, objective, pd.rep.dim, settings, cap=_cap(spec))


def delta_quantities(spec: BridgeSpec, settings: OptimizerSettings, seminorm: Seminorm | None = None,
                     with_hat_A: bool | None = None) -> dict:
    """delta^A, delta^B, delta-hat^A, delta-hat^B, delta-tilde^B for a first-class bridge.

    For this class Phi^B restricted to B is exactly sigma-breve(sigma_T),
    so delta^B, delta-hat^B and delta-tilde^B share one objective and one
    optimizer run.  delta^A is exactly 0 since omega commutes with A.
    delta-hat^A (the Berezin transform on functions) is optimized only on
    finite groups unless requested.
    """
    if spec.kind != "first":
        raise ValueError("delta quantities are defined for first-class bridges")
    pd = spec.proj
    L = operator_seminorm(pd.rep) if seminorm is None else seminorm
    s1 = first_class(spec.coset)
    objective = LinearNormObjective(lambda T: T - phi_composites(s1, T), "delta_tilde_B")
    dB = maximize_over_lip_ball(L, objective, pd.rep.dim, settings, cap=_cap(spec))
    out = {
        "delta_A": BoundValue(0.0, "exact"),
        "delta_B": dB,
        "delta_hat_B": dB,
        "delta_tilde_B": dB,
    }
    if with_hat_A is None:
        with_hat_A = spec.coset.group.kind == "finite"
    if with_hat_A:
        c = spec.coset
        LA = function_seminorm(c)
        # orthonormal mean-zero scalar functions
        Q, _ = np.linalg.qr(np.column_stack([np.ones(c.npts), np.eye(c.npts)[:, : c.npts - 1]]))
        basis = Q[:, 1:].T
        berezin = LinearNormObjective(
            lambda f: np.asarray(f).reshape(-1, 1, 1) - covariant_symbol(s1, contravariant_symbol(s1, f)),
            "delta_hat_A",
        )
        out["delta_hat_A"] = maximize_over_lip_ball(LA, berezin, basis, settings, cap=_cap(spec),
                                                    unit=np.ones(c.npts))
    return out


def bridge_gap(spec: BridgeSpec, T, side: str | None = None) -> float:
    """||sigma_T omega - omega T||_D for T on the operator side (first class, any q)."""
    T = np.asarray(T, dtype=complex)
    pd = spec.side(side)
    q = T.shape[0] // pd.rep.dim
    om = orbit_projections(spec, side)
    sig = covariant_symbol(spec, T, side)
    Om = np.einsum("jk,iab->ijakb", np.eye(q), om).reshape(spec.npts, q * pd.rep.dim, q * pd.rep.dim)
    F = np.einsum("ijk,iab->ijakb", sig, om).reshape(Om.shape)
    return float(np.linalg.svd(F - Om @ T, compute_uv=False)[:, 0].max())


def gamin_gap(spec: BridgeSpec, f, side: str | None = None) -> float:
    """||f omega - omega sigma-breve_f||_D for a scalar function f (q = 1)."""
    f = np.asarray(f, dtype=complex).reshape(-1)
    om = orbit_projections(spec, side)
    S = contravariant_symbol(spec, f, side)
    return float(np.linalg.svd(f[:, None, None] * om - om @ S, compute_uv=False)[:, 0].max())


def _second_pivot(spec):
    from .berezin import pivot

    return pivot(spec.at_level(1))


def bigineq_terms(spec: BridgeSpec, T):
    """Pointwise norms of T omega - omega S, T omega - f omega and f omega - omega S.

    T lives on B^m, f = sigma^m_T and S = Phi^n(T) = sigma-breve^n(f).
    Returns three arrays over coset points.
    """
    from .berezin import embed_B

    om = _second_pivot(spec)
    f = covariant_symbol(spec, T, "m")[:, 0, 0]
    S = phi_composites(spec, T, "n")
    Tm = embed_B(spec.at_level(1), T, "m")
    Sn = embed_B(spec.at_level(1), S, "n")
    fom = f[:, None, None] * om
    norm = lambda Y: np.linalg.svd(Y, compute_uv=False)[:, 0]
    return norm(Tm @ om - om @ Sn), norm(Tm @ om - fom), norm(fom - om @ Sn)


def gamma_direct(spec: BridgeSpec, settings: OptimizerSettings, source: str = "m") -> BoundValue:
    """Direct estimate of sup ||T omega - omega Phi(T)|| over the Lip-ball of B^source."""
    from .berezin import embed_B

    if spec.kind != "second":
        raise ValueError("direct gamma estimates are for second-class bridges")
    target = "n" if source == "m" else "m"
    s1 = spec.at_level(1)
    om = _second_pivot(spec)
    pd = spec.side(source)

    def fmap(T):
        return embed_B(s1, T, source) @ om - om @ embed_B(s1, phi_composites(s1, T, target), target)

    return maximize_over_lip_ball(operator_seminorm(pd.rep), LinearNormObjective(fmap), pd.rep.dim, settings,
                                  cap=2 * _cap(spec))


# ---------------------------------------------------------------------------
# assembly


def spec_key(spec: BridgeSpec, side: str | None = None) -> tuple:
    g = spec.coset.group
    return (g.name, g.kind, g.size, g.resolution, tuple(np.sort(spec.coset.projection.stability)[:8]))


@dataclass
class BoundReport:
    klass: str
    q: int
    key: tuple
    m: float | None = None
    n: float | None = None
    values: dict = field(default_factory=dict)
    reach_bound: float = 0.0
    height_bound: float = 0.0
    length_bound: float = 0.0
    propinquity_bound: float = 0.0
    branches: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "class": self.klass,
            "m": self.m,
            "n": self.n,
            "q": self.q,
            "values": {k: v.as_dict() for k, v in self.values.items()},
            "reach_bound": self.reach_bound,
            "height_bound": self.height_bound,
            "length_bound": self.length_bound,
            "propinquity_bound": self.propinquity_bound,
            "branches": self.branches,
        }


def first_class_values(spec: BridgeSpec, settings: OptimizerSettings, richardson: bool = True) -> dict:
    """All q = 1 ingredients of the first-class bounds, keyed by quantity name."""
    vals = {
        "gamma_breve_A": gamma_breve_A(spec, richardson=richardson),
        "delta_tilde_A": delta_tilde_A(spec, richardson=richardson),
        "gamma_B": gamma_B(spec, settings),
    }
    vals.update(delta_quantities(spec, settings))
    vals["_key"] = spec_key(spec)
    return vals


def assemble_first_class(values: dict, q: int, m: float | None = None) -> BoundReport:
    """reach <= max(gamma-breve^A, c gamma^B), height <= c min(delta^B, delta-tilde^B).

    c = 1 at q = 1 and 2q otherwise; the A-side term never carries the
    factor.  length = max(reach, height) and the propinquity bound is the
    length bound.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    gA = values["gamma_breve_A"].value
    gB = values["gamma_B"].value
    dB = min(values["delta_B"].value, values["delta_tilde_B"].value)
    c = 1 if q == 1 else 2 * q
    reach = max(gA, c * gB)
    height = c * dB
    length = max(reach, height)
    rep = BoundReport("first", q, values.get("_key", ()), m=m,
                      values={k: v for k, v in values.items() if not k.startswith("_")})
    rep.reach_bound, rep.height_bound, rep.length_bound = reach, height, length
    rep.propinquity_bound = length
    rep.branches = {
        "reach": "gamma_breve_A" if gA >= c * gB else "gamma_B",
        "length": "reach" if reach >= height else "height",
    }
    return rep


def assemble_second_class(values_m: dict, values_n: dict, q: int, m=None, n=None,
                          direct: dict | None = None) -> BoundReport:
    """Sum-form bounds for the matrix-vs-matrix bridge from the two first-class parts.

    reach <= max(gamma-breve_m + gamma^{B^n}, gamma-breve_n + gamma^{B^m}),
    height <= max(delta-tilde^{B^n} + delta-tilde^A_m, delta-tilde^{B^m} + delta-tilde^A_n),
    both multiplied by 2q when q >= 2.
    """
    if values_m.get("_key") != values_n.get("_key"):
        raise ValueError("the two sides were computed on different groups or stability subgroups")
    if q < 1:
        raise ValueError("q must be >= 1")
    c = 1 if q == 1 else 2 * q
    r1 = values_m["gamma_breve_A"].value + values_n["gamma_B"].value
    r2 = values_n["gamma_breve_A"].value + values_m["gamma_B"].value
    h1 = values_n["delta_tilde_B"].value + values_m["delta_tilde_A"].value
    h2 = values_m["delta_tilde_B"].value + values_n["delta_tilde_A"].value
    rep = BoundReport("second", q, values_m.get("_key", ()), m=m, n=n)
    for tag, vals in (("m", values_m), ("n", values_n)):
        for k, v in vals.items():
            if not k.startswith("_"):
                rep.values[f"{k}[{tag}]"] = v
    if direct:
        rep.values.update(direct)
    rep.reach_bound = c * max(r1, r2)
    rep.height_bound = c * max(h1, h2)
    rep.length_bound = max(rep.reach_bound, rep.height_bound)
    rep.propinquity_bound = rep.length_bound
    rep.branches = {"reach_terms": [r1, r2], "height_terms": [h1, h2]}
    return rep


@dataclass
class TrekReport:
    m: float | None
    n: float | None
    reach: float
    height: float
    length: float
    alt_length: float
    direct_length: float | None
    smallest: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def trek_bounds(report_m: BoundReport, report_n: BoundReport, direct: BoundReport | None = None) -> TrekReport:
    """Two-bridge trek B^m -> A -> B^n from first-class q = 1 reports.

    length = sum of bridge lengths; the alternative length is
    max(sum of reaches, sum of heights), never larger.
    """
    for r in (report_m, report_n):
        if r.klass != "first" or r.q != 1:
            raise ValueError("trek bounds need first-class reports at q = 1")
    reach = report_m.reach_bound + report_n.reach_bound
    height = report_m.height_bound + report_n.height_bound
    length = report_m.length_bound + report_n.length_bound
    alt = max(reach, height)
    cands = {"trek": length, "alt_trek": alt}
    if direct is not None:
        cands["direct"] = direct.length_bound
    smallest = min(cands, key=lambda k: (cands[k], k))
    return TrekReport(report_m.m, report_n.m, reach, height, length, alt,
                      None if direct is None else direct.length_bound, smallest)

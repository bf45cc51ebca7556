"""Berezin symbols, slice-map conditional expectations and the Phi maps.

Array conventions (q is the amplification level, npts the number of coset
points, D the dimension of the fibre algebra):

* symbol function: (npts, q, q)
* operator on one side: (q d, q d), q x q blocks of d x d
* bridge element: (npts, q D, q D) with the q index outermost; for the
  second class the fibre is B^m (x) B^n with the m index before the n index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .groups import CosetSpace, GroupError, ProjectionData, _amplified_conj, commutant_dimension
from .seminorms import Seminorm, is_hermitian

__all__ = [
    "BridgeSpec",
    "first_class",
    "second_class",
    "orbit_vectors",
    "orbit_projections",
    "pivot",
    "cond_exp_A",
    "cond_exp_B",
    "embed_A",
    "embed_B",
    "phi_A",
    "phi_B",
    "covariant_symbol",
    "contravariant_symbol",
    "phi_composites",
    "verify_admissibility",
]


@dataclass(frozen=True, eq=False)
class BridgeSpec:
    """A bridge with conditional expectations built from coherent states.

    ``first``: A = C(G/H) against B = L(H), D = C(G/H, B).
    ``second``: B^m against B^n, D = C(G/H, B^m (x) B^n).
    """

    kind: str
    coset: CosetSpace
    proj: ProjectionData | None = None
    proj_m: ProjectionData | None = None
    proj_n: ProjectionData | None = None
    q: int = 1

    @property
    def r_omega(self) -> float:
        if self.kind == "first":
            return 1.0 / self.proj.rep.dim
        return 1.0 / (self.proj_m.rep.dim * self.proj_n.rep.dim)

    @property
    def fibre_dim(self) -> int:
        return int(round(1 / self.r_omega))

    @property
    def npts(self) -> int:
        return self.coset.npts

    def side(self, side: str | None) -> ProjectionData:
        if self.kind == "first":
            if side not in (None, "B"):
                raise GroupError("first-class bridges have a single operator side")
            return self.proj
        if side == "m":
            return self.proj_m
        if side == "n":
            return self.proj_n
        raise GroupError("second-class bridges need side 'm' or 'n'")

    def at_level(self, q: int) -> "BridgeSpec":
        return BridgeSpec(self.kind, self.coset, self.proj, self.proj_m, self.proj_n, q)


def _require_ergodic(pd: ProjectionData):
    k = commutant_dimension(pd.rep)
    if k != 1:
        raise GroupError(f"representation {pd.rep.label or pd.rep.dim} is reducible (commutant of dimension {k}), "
                         "so its Lip-norm vanishes on non-scalar operators")


def first_class(coset: CosetSpace, q: int = 1) -> BridgeSpec:
    if q < 1:
        raise GroupError("q must be >= 1")
    _require_ergodic(coset.projection)
    return BridgeSpec("first", coset, proj=coset.projection, q=q)


def second_class(coset: CosetSpace, proj_m: ProjectionData, proj_n: ProjectionData, q: int = 1) -> BridgeSpec:
    """Matrix-vs-matrix bridge; both projections must have the same stability subgroup."""
    if q < 1:
        raise GroupError("q must be >= 1")
    if proj_m.group is not proj_n.group or proj_m.group is not coset.group:
        raise GroupError("both sides must use the coset space's group")
    if not np.array_equal(np.sort(proj_m.stability), np.sort(proj_n.stability)):
        raise GroupError("stability subgroups of the two projections differ")
    if not np.array_equal(np.sort(coset.projection.stability), np.sort(proj_m.stability)):
        raise GroupError("coset space was built from a different stability subgroup")
    _require_ergodic(proj_m)
    _require_ergodic(proj_n)
    return BridgeSpec("second", coset, proj_m=proj_m, proj_n=proj_n, q=q)


# ---------------------------------------------------------------------------


def orbit_vectors(spec: BridgeSpec, side: str | None = None) -> np.ndarray:
    """Unit vectors U_{x_i} v spanning alpha_{x_i}(P), shape (npts, d)."""
    pd = spec.side(side)
    return pd.rep.apply(pd.vector, spec.coset.reps)


def orbit_projections(spec: BridgeSpec, side: str | None = None) -> np.ndarray:
    w = orbit_vectors(spec, side)
    return np.einsum("ia,ib->iab", w, w.conj())


def _kron_level(q, M):
    # 1_q (x) M for a stack of matrices
    eye = np.eye(q)
    return np.einsum("jk,...ab->...jakb", eye, M).reshape(M.shape[:-2] + (q * M.shape[-2], q * M.shape[-1]))


def pivot(spec: BridgeSpec) -> np.ndarray:
    """omega_q(x_i) = 1_q (x) alpha_{x_i}(P) (or of P^m (x) P^n)."""
    if spec.kind == "first":
        om = orbit_projections(spec)
    else:
        pm = orbit_projections(spec, "m")
        pn = orbit_projections(spec, "n")
        om = np.einsum("iab,icd->iacbd", pm, pn).reshape(spec.npts, spec.fibre_dim, spec.fibre_dim)
    return _kron_level(spec.q, om)


def _level_of(spec, X, D):
    n = X.shape[-1]
    if X.shape[-2] != n or n % D:
        raise GroupError(f"array of shape {X.shape} does not have blocks of size {D}")
    return n // D


def _bridge(spec, F):
    F = np.asarray(F, dtype=complex)
    if F.ndim == 2:
        F = np.broadcast_to(F, (spec.npts,) + F.shape)
    if F.ndim != 3 or F.shape[0] != spec.npts:
        raise GroupError(f"bridge element of shape {F.shape} does not live on {spec.npts} coset points")
    _level_of(spec, F, spec.fibre_dim)
    return F


def cond_exp_A(spec: BridgeSpec, F) -> np.ndarray:
    """Pointwise normalized trace over the fibre: (npts, q, q)."""
    F = _bridge(spec, F)
    D = spec.fibre_dim
    q = _level_of(spec, F, D)
    return np.einsum("ijaka->ijk", F.reshape(spec.npts, q, D, q, D)) / D


def cond_exp_B(spec: BridgeSpec, F, side: str | None = None) -> np.ndarray:
    """Integrate over G/H (after a partial normalized trace for the second class)."""
    F = _bridge(spec, F)
    D = spec.fibre_dim
    q = _level_of(spec, F, D)
    if spec.kind == "first":
        spec.side(side)
        G = F
    else:
        dm, dn = spec.proj_m.rep.dim, spec.proj_n.rep.dim
        F7 = F.reshape(spec.npts, q, dm, dn, q, dm, dn)
        if side == "m":
            G = np.einsum("ijabkcb->ijakc", F7).reshape(spec.npts, q * dm, q * dm) / dn
        elif side == "n":
            G = np.einsum("ijabkad->ijbkd", F7).reshape(spec.npts, q * dn, q * dn) / dm
        else:
            raise GroupError("second-class bridges need side 'm' or 'n'")
    return spec.coset.integrate(G)


def _as_symbol(spec, f):
    f = np.asarray(f)
    if f.ndim == 1:
        f = f[:, None, None]
    if f.ndim != 3 or f.shape[0] != spec.npts or f.shape[1] != f.shape[2]:
        raise GroupError(f"symbol function of shape {f.shape} does not live on {spec.npts} coset points")
    return f


def embed_A(spec: BridgeSpec, f) -> np.ndarray:
    """f (x) 1_D as a bridge element."""
    f = _as_symbol(spec, f)
    D = spec.fibre_dim
    return np.einsum("ijk,ab->ijakb", f, np.eye(D)).reshape(spec.npts, f.shape[1] * D, f.shape[1] * D)


def embed_B(spec: BridgeSpec, T, side: str | None = None) -> np.ndarray:
    """Constant bridge element T (first class) or T (x) 1 / 1 (x) T (second class)."""
    T = np.asarray(T, dtype=complex)
    pd = spec.side(side)
    d = pd.rep.dim
    q = _level_of(spec, T, d)
    if spec.kind == "first":
        F = T
    else:
        T4 = T.reshape(q, d, q, d)
        other = spec.proj_n.rep.dim if side == "m" else spec.proj_m.rep.dim
        I = np.eye(other)
        if side == "m":
            F = np.einsum("jakc,bd->jabkcd", T4, I)
        else:
            F = np.einsum("jbkd,ac->jabkcd", T4, I)
        F = F.reshape(q * spec.fibre_dim, q * spec.fibre_dim)
    return np.broadcast_to(F, (spec.npts,) + F.shape).copy()


def _sandwich(spec, F):
    F = _bridge(spec, F)
    q = _level_of(spec, F, spec.fibre_dim)
    om = pivot(spec.at_level(q))
    return om @ F @ om


def phi_A(spec: BridgeSpec, F) -> np.ndarray:
    """r_omega^-1 E^A(omega F omega)."""
    return cond_exp_A(spec, _sandwich(spec, F)) / spec.r_omega


def phi_B(spec: BridgeSpec, F, side: str | None = None) -> np.ndarray:
    """r_omega^-1 E^B(omega F omega) (E^m / E^n for the second class)."""
    return cond_exp_B(spec, _sandwich(spec, F), side) / spec.r_omega


# ---------------------------------------------------------------------------
# direct symbol formulas


def covariant_symbol(spec: BridgeSpec, T, side: str | None = None) -> np.ndarray:
    """sigma_T(x_i) = blockwise tr(T alpha_{x_i}(P)), shape (npts, q, q)."""
    T = np.asarray(T, dtype=complex)
    pd = spec.side(side)
    d = pd.rep.dim
    q = _level_of(spec, T, d)
    w = orbit_vectors(spec, side)
    return np.einsum("ia,jakb,ib->ijk", w.conj(), T.reshape(q, d, q, d), w)


def contravariant_symbol(spec: BridgeSpec, f, side: str | None = None) -> np.ndarray:
    """d sum_i w_i f_i (x) alpha_{x_i}(P), shape (q d, q d)."""
    f = _as_symbol(spec, f)
    pd = spec.side(side)
    d = pd.rep.dim
    q = f.shape[1]
    w = orbit_vectors(spec, side)
    wts = spec.coset.weights
    out = d * np.einsum("i,ijk,ia,ib->jakb", wts, f, w, w.conj())
    return out.reshape(q * d, q * d)


def phi_composites(spec: BridgeSpec, T, target: str | None = None) -> np.ndarray:
    """sigma-breve(sigma_T), the operator-side composite map.

    First class: T in M_q(B), returns sigma-breve(sigma_T).  Second class:
    ``target='m'`` takes T in M_q(B^n) to Phi^m(T) in M_q(B^m), and
    ``target='n'`` the other way.
    """
    if spec.kind == "first":
        return contravariant_symbol(spec, covariant_symbol(spec, T))
    source = {"m": "n", "n": "m"}.get(target)
    if source is None:
        raise GroupError("second-class composites need target 'm' or 'n'")
    return contravariant_symbol(spec, covariant_symbol(spec, T, source), target)


# ---------------------------------------------------------------------------


def _random_herm(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2


def _random_symbol(rng, npts, q):
    A = rng.standard_normal((npts, q, q)) + 1j * rng.standard_normal((npts, q, q))
    return (A + np.conj(np.swapaxes(A, 1, 2))) / 2


def verify_admissibility(spec: BridgeSpec, seminorms: tuple[Seminorm, Seminorm], trials: int = 200,
                         levels=(1, 2, 3), seed: int = 0, slack: float = 1e-9) -> dict:
    """Random-input check that both Phi maps are Lip-norm contractions.

    ``seminorms`` is (left, right): (L^A, L^B) for the first class, (L^m, L^n)
    for the second.  Also checks equivariance of the covariant symbol under
    translations for finite groups.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    left, right = seminorms
    worst = {"A_from_B": -np.inf, "B_from_A": -np.inf}
    violations = {"A_from_B": 0, "B_from_A": 0}
    levels = list(levels)
    for t in range(trials):
        q = levels[t % len(levels)]
        if spec.kind == "first":
            T = _random_herm(rng, q * spec.proj.rep.dim)
            lhs, rhs = left(covariant_symbol(spec, T)), right(T)
            f = _random_symbol(rng, spec.npts, q)
            lhs2, rhs2 = right(contravariant_symbol(spec, f)), left(f)
        else:
            T = _random_herm(rng, q * spec.proj_n.rep.dim)
            lhs, rhs = left(phi_composites(spec, T, "m")), right(T)
            S = _random_herm(rng, q * spec.proj_m.rep.dim)
            lhs2, rhs2 = right(phi_composites(spec, S, "n")), left(S)
        for key, a, b in (("A_from_B", lhs, rhs), ("B_from_A", lhs2, rhs2)):
            worst[key] = max(worst[key], a - b)
            violations[key] += int(a > b + slack)
    report = {
        "trials": trials,
        "violations": violations,
        "worst_slack": {k: float(v) for k, v in worst.items()},
        "pass": all(v == 0 for v in violations.values()),
    }
    g = spec.coset.group
    if g.table is not None:
        pd = spec.side("m" if spec.kind == "second" else None)
        T = _random_herm(rng, pd.rep.dim)
        sig = covariant_symbol(spec, T, "m" if spec.kind == "second" else None)
        err = 0.0
        for y in range(g.size):
            Ty = _amplified_conj(pd.rep.at([y])[0], T)
            lhs = covariant_symbol(spec, Ty, "m" if spec.kind == "second" else None)
            err = max(err, float(np.abs(lhs - sig[spec.coset.translate_permutation(y)]).max()))
        report["equivariance_error"] = err
        report["pass"] = report["pass"] and err <= 1e-10
    return report

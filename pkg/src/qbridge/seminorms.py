"""Lipschitz-type seminorms on operators and on functions over a coset space.

All seminorms accept inputs at any amplification level q: operators are
(q d) x (q d) block matrices, symbol functions are arrays of shape
(npts, q, q) (or (npts,) for q = 1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .groups import CosetSpace, GroupError, GroupModel, Representation, _amplified_conj

__all__ = [
    "Seminorm",
    "hermitian_basis",
    "is_hermitian",
    "spectral_norm",
    "lip_norm_operator",
    "lip_norm_infinitesimal",
    "lip_norm_function",
    "operator_seminorm",
    "function_seminorm",
    "check_matrix_slipnorm_axioms",
    "ball_membership",
]

HERM_TOL = 1e-10


def is_hermitian(X, tol=HERM_TOL) -> bool:
    X = np.asarray(X)
    if X.ndim == 1:
        return bool(np.abs(X.imag).max(initial=0) <= tol) if np.iscomplexobj(X) else True
    return bool(np.abs(X - np.conj(np.swapaxes(X, -1, -2))).max(initial=0) <= tol)


def spectral_norm(X) -> np.ndarray:
    """Operator norm over the last two axes (abs value for scalars)."""
    X = np.asarray(X)
    if X.ndim < 2:
        return np.abs(X)
    if X.shape[-1] == 1 and X.shape[-2] == 1:
        return np.abs(X[..., 0, 0])
    if is_hermitian(X, 1e-13):
        return np.abs(np.linalg.eigvalsh(X)).max(axis=-1)
    return np.linalg.svd(X, compute_uv=False)[..., 0]


def hermitian_basis(d: int, traceless: bool = True) -> np.ndarray:
    """Frobenius-orthonormal basis of (traceless) Hermitian d x d matrices."""
    out = []
    for a in range(d):
        for b in range(a + 1, d):
            E = np.zeros((d, d), dtype=complex)
            E[a, b] = E[b, a] = 1 / np.sqrt(2)
            out.append(E)
            E = np.zeros((d, d), dtype=complex)
            E[a, b] = -1j / np.sqrt(2)
            E[b, a] = 1j / np.sqrt(2)
            out.append(E)
    for k in range(1, d):
        diag = np.zeros(d)
        diag[:k] = 1.0
        diag[k] = -k
        out.append(np.diag(diag / np.linalg.norm(diag)).astype(complex))
    if not traceless:
        out.append(np.eye(d, dtype=complex) / np.sqrt(d))
    return np.array(out).reshape(-1, d, d)


def _top_pair(Y):
    """Largest-|eigenvalue| pair of a Hermitian matrix: (norm, sign, vector)."""
    ev, V = np.linalg.eigh(Y)
    i = int(np.argmax(np.abs(ev)))
    return abs(ev[i]), np.sign(ev[i]) or 1.0, V[:, i]


@dataclass(eq=False)
class Seminorm:
    """A seminorm with an evaluation closure and optional fast linearization.

    ``linearize(basis)`` returns a function ``c -> (value, gradient)`` for
    the seminorm restricted to real combinations of ``basis``.
    """

    kind: str
    evaluate: Callable
    provenance: str = "exact"
    block: int | None = None
    linearize: Callable | None = None
    name: str = ""
    constraints: Callable | None = None  # cvxpy constraints for {X : L(X) <= 1}

    def __call__(self, X) -> float:
        return float(self.evaluate(X))


# ---------------------------------------------------------------------------
# operator side


def _check_block(rep, X):
    X = np.asarray(X, dtype=complex)
    d = rep.dim
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] % d:
        raise GroupError(f"observable of shape {X.shape} does not match representation dimension {d}")
    return X


def _moving(group: GroupModel):
    return np.flatnonzero(group.length > 1e-12)


def lip_norm_operator(rep: Representation, group: GroupModel | None, X, chunk: int = 4096) -> float:
    """max over non-identity x of ||alpha_x(X) - X|| / l(x), blockwise at level q.

    Exact for finite groups; a lower estimate of the supremum on sampled grids.
    """
    group = rep.group if group is None else group
    if group is not rep.group:
        raise GroupError("group is not the representation's group")
    X = _check_block(rep, X)
    herm = is_hermitian(X, 1e-13)
    idx = _moving(group)
    best = 0.0
    for s in range(0, len(idx), chunk):
        sl = idx[s : s + chunk]
        D = _amplified_conj(rep.at(sl), X) - X
        if herm:
            n = np.abs(np.linalg.eigvalsh(D)).max(axis=-1)
        else:
            n = np.linalg.svd(D, compute_uv=False)[:, 0]
        best = max(best, float((n / group.length[sl]).max()))
    return best


def _fibonacci_sphere(n):
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (1 + 5**0.5) * k
    # antipodal directions give the same norm; keep the upper half
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return pts[z >= 0]


_SPHERE = _fibonacci_sphere(96)


def _sphere_max(H, iters=60, starts=3):
    """max over unit n in R^3 of ||sum_a n_a H_a|| for Hermitian H_a.

    Alternates between the top eigenvector psi of n.H and
    n = <psi,H psi>/|<psi,H psi>|, each step non-decreasing, started from
    the best points of a Fibonacci grid.
    """
    M = np.einsum("na,aij->nij", _SPHERE, H)
    vals = np.abs(np.linalg.eigvalsh(M)).max(axis=-1)
    best = (-1.0, None, None, None)
    for s in np.argsort(vals)[::-1][:starts]:
        n = _SPHERE[s]
        val = -1.0
        for _ in range(iters):
            v, sg, psi = _top_pair(np.einsum("a,aij->ij", n, H))
            e = np.real(np.einsum("i,aij,j->a", psi.conj(), H, psi))
            nrm = np.linalg.norm(e)
            if nrm == 0:
                break
            n = e / nrm
            if nrm <= val * (1 + 1e-14):
                val = max(val, nrm)
                break
            val = nrm
        v, sg, psi = _top_pair(np.einsum("a,aij->ij", n, H))
        if v > best[0]:
            best = (v, n, sg, psi)
    return best


def _generator_stack(rep, q):
    J = np.array(rep.generators())
    return np.array([np.kron(np.eye(q), Ja) for Ja in J])


def lip_norm_infinitesimal(rep: Representation, X) -> float:
    """Lip-norm of a spin representation with geodesic length, sup_n ||[n.J, X]||.

    For the rotation-angle length every element is exp(-i l(x) m.J) for
    some unit axis m, and ||alpha_x(X) - X|| <= l(x) ||[m.J, X]|| with
    equality in the limit l -> 0, so the supremum over the group equals
    the supremum of the commutator norm over the sphere of axes.
    """
    X = _check_block(rep, X)
    q = X.shape[0] // rep.dim
    Jq = _generator_stack(rep, q)
    C = 1j * (Jq @ X - X @ Jq)
    if not is_hermitian(C, 1e-12):
        # non-Hermitian input: reduce to Hermitian dilation of each commutator
        Z = np.zeros_like(C)
        C = np.block([[Z, C], [np.conj(np.swapaxes(C, -1, -2)), Z]])
    return float(_sphere_max(C)[0])


def operator_seminorm(rep: Representation, method: str = "auto") -> Seminorm:
    """Lip-norm family {L_q} on M_q(B) for a representation.

    method: ``exact`` (finite group maximum), ``grid`` (sampled-grid maximum,
    a lower estimate), ``infinitesimal`` (commutator form for spin
    representations) or ``auto`` (exact for finite groups, infinitesimal
    for spin representations on sampled grids).
    """
    g = rep.group
    if method == "auto":
        method = "exact" if g.kind == "finite" else "infinitesimal"
    if method == "exact" and g.kind != "finite":
        raise GroupError("exact operator Lip-norms need a finite group")
    if method == "infinitesimal":
        if rep.spin is None:
            raise GroupError("infinitesimal Lip-norm needs a spin representation")
        return Seminorm(
            "operator-lip",
            lambda X: lip_norm_infinitesimal(rep, X),
            provenance="infinitesimal",
            block=rep.dim,
            linearize=lambda basis: _linearize_infinitesimal(rep, basis),
            name=f"L[{rep.label}]",
        )
    if method in ("exact", "grid"):
        prov = "exact" if method == "exact" else "grid-lower"
        return Seminorm(
            "operator-lip",
            lambda X: lip_norm_operator(rep, None, X),
            provenance=prov,
            block=rep.dim,
            linearize=lambda basis: _linearize_group(rep, basis),
            name=f"L[{rep.label}]",
            constraints=(lambda X: _group_constraints(rep, X)) if method == "exact" else None,
        )
    raise GroupError(f"unknown Lip-norm method {method!r}")


def _group_constraints(rep, X):
    # ||alpha_x(X) - X|| <= l(x) for Hermitian X as two matrix inequalities
    g = rep.group
    d = X.shape[0]
    q = d // rep.dim
    cons = []
    for x in _moving(g):
        U = np.kron(np.eye(q), rep.at([x])[0])
        D = U @ X @ U.conj().T - X
        D = (D + D.H) / 2
        cons += [D << g.length[x] * np.eye(d), D >> -g.length[x] * np.eye(d)]
    return cons


def _linearize_group(rep, basis):
    basis = np.asarray(basis, dtype=complex)
    g = rep.group
    idx = _moving(g)
    if len(idx) * basis.size > 5e7:
        raise GroupError("grid too large for a linearized Lip-norm; use the infinitesimal form")
    U = rep.at(idx)
    D = np.stack([_amplified_conj(U, B) - B for B in basis], axis=1)
    D /= g.length[idx][:, None, None, None]

    def f(c):
        Y = np.einsum("i,xiab->xab", c, D)
        ev, V = np.linalg.eigh(Y)
        a = np.abs(ev)
        x, k = np.unravel_index(np.argmax(a), a.shape)
        u = V[x, :, k]
        grad = np.sign(ev[x, k]) * np.real(np.einsum("a,iab,b->i", u.conj(), D[x], u))
        return float(a[x, k]), grad

    return f


def _linearize_infinitesimal(rep, basis):
    basis = np.asarray(basis, dtype=complex)
    q = basis.shape[-1] // rep.dim
    Jq = _generator_stack(rep, q)
    C = 1j * (np.einsum("aij,kjl->akil", Jq, basis) - np.einsum("kij,ajl->akil", basis, Jq))

    def f(c):
        H = np.einsum("k,akij->aij", c, C)
        val, n, sg, psi = _sphere_max(H)
        if n is None:
            return 0.0, np.zeros(len(c))
        Cn = np.einsum("a,akij->kij", n, C)
        grad = sg * np.real(np.einsum("i,kij,j->k", psi.conj(), Cn, psi))
        return float(val), grad

    return f


# ---------------------------------------------------------------------------
# function side


def _as_function(coset: CosetSpace, f):
    f = np.asarray(f)
    if f.ndim == 1:
        f = f[:, None, None]
    if f.ndim != 3 or f.shape[0] != coset.npts or f.shape[1] != f.shape[2]:
        raise GroupError(f"symbol function of shape {f.shape} does not live on {coset.npts} coset points")
    return f


def lip_norm_function(coset: CosetSpace, f) -> float:
    """max over i != j of ||f_i - f_j|| / rho(x_i, x_j)."""
    f = _as_function(coset, f)
    n = coset.npts
    if n == 1:
        return 0.0
    iu, ju = np.triu_indices(n, 1)
    best = 0.0
    for s in range(0, len(iu), 200000):
        a, b = iu[s : s + 200000], ju[s : s + 200000]
        diff = f[a] - f[b]
        nrm = np.abs(diff[:, 0, 0]) if f.shape[1] == 1 else spectral_norm(diff)
        best = max(best, float((nrm / coset.metric[a, b]).max()))
    return best


def function_seminorm(coset: CosetSpace) -> Seminorm:
    """Lipschitz seminorm family {L^A_q} from the quotient metric."""

    def linearize(basis):
        # basis: (k, npts) real scalar functions
        basis = np.real(np.asarray(basis)).reshape(len(basis), -1)
        n = coset.npts
        iu, ju = np.triu_indices(n, 1)
        inv = 1.0 / coset.metric[iu, ju]

        def f(c):
            v = c @ basis
            r = (v[iu] - v[ju]) * inv
            p = int(np.argmax(np.abs(r)))
            grad = np.sign(r[p]) * (basis[:, iu[p]] - basis[:, ju[p]]) * inv[p]
            return float(abs(r[p])), grad

        return f

    def constraints(a):
        n = coset.npts
        return [a[i] - a[j] <= coset.metric[i, j] for i in range(n) for j in range(n) if i != j]

    return Seminorm(
        "function-lip",
        lambda f: lip_norm_function(coset, f),
        provenance="exact",
        block=None,
        linearize=linearize,
        name="L[G/H]",
        constraints=constraints,
    )


# ---------------------------------------------------------------------------


def _random_herm(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2


def check_matrix_slipnorm_axioms(family: Seminorm, trials: int = 100, levels=(1, 2, 3), seed: int = 0,
                                 block: int | None = None, tol: float = 1e-9) -> dict:
    """Empirical check of the matrix slip-norm axioms on random inputs.

    (1) L_m(a X b) <= ||a|| L_n(X) ||b|| for scalar a (m x n), b (n x m);
    (2) L_{m+n}(X (+) Y) = max(L_m(X), L_n(Y));
    (3) L_1(1) = 0.
    Returns per-axiom pass flags with the worst slack seen.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    d = family.block if block is None else block
    if d is None:
        raise ValueError("block size needed for function seminorm families")
    levels = list(levels)
    worst = {"compression": -np.inf, "direct_sum": 0.0, "unit": 0.0}
    one = np.eye(d)
    worst["unit"] = family(one)
    for t in range(trials):
        n = levels[t % len(levels)]
        m = levels[(t // len(levels)) % len(levels)]
        X = _random_herm(rng, n * d)
        if t % 3 == 1:
            X = X + 1j * _random_herm(rng, n * d)  # non-self-adjoint inputs too
        a = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        b = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        Y = np.kron(a, one) @ X @ np.kron(b, one)
        lhs = family(Y)
        rhs = np.linalg.norm(a, 2) * family(X) * np.linalg.norm(b, 2)
        worst["compression"] = max(worst["compression"], lhs - rhs)
        m2 = levels[(t + 1) % len(levels)]
        Z = _random_herm(rng, m2 * d)
        S = np.zeros(((n + m2) * d,) * 2, dtype=complex)
        S[: n * d, : n * d] = X
        S[n * d :, n * d :] = Z
        worst["direct_sum"] = max(worst["direct_sum"], abs(family(S) - max(family(X), family(Z))))
    return {
        "compression": {"pass": bool(worst["compression"] <= tol), "worst_slack": float(worst["compression"])},
        "direct_sum": {"pass": bool(worst["direct_sum"] <= tol), "worst_slack": float(worst["direct_sum"])},
        "unit": {"pass": bool(worst["unit"] <= tol), "worst_slack": float(worst["unit"])},
        "trials": trials,
    }


def ball_membership(seminorm: Seminorm, X, radius: float = 1.0) -> bool:
    """True iff X is self-adjoint (tol 1e-10) and seminorm(X) <= radius."""
    if not is_hermitian(X, HERM_TOL):
        return False
    return seminorm(X) <= radius

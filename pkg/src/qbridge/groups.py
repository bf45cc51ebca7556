"""Groups, length functions, unitary representations and coset spaces.

Two kinds of group model are supported:

* ``finite``: a Cayley table over integer handles ``0..n-1``.
* ``sampled-SU2``: a deterministic Euler-angle product grid of unit
  quaternions carrying Haar quadrature weights.

Element handles are plain integer indices into the model's arrays.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "GroupError",
    "GroupModel",
    "Representation",
    "ProjectionData",
    "CosetSpace",
    "build_finite_group",
    "build_su2_grid",
    "spin_matrices",
    "spin_representation",
    "matrix_representation",
    "conjugation_action",
    "commutant_dimension",
    "stability_subgroup",
    "coset_space",
    "qmul",
    "qconj",
    "qrotate",
    "quat_to_euler",
    "quat_to_su2",
]

FINITE = "finite"
SAMPLED = "sampled-SU2"


class GroupError(ValueError):
    """Invalid group, representation or coset data."""


# ---------------------------------------------------------------------------
# quaternion helpers; (w, x, y, z) with w + xi + yj + zk <-> w - i(x sx + y sy + z sz)


def qmul(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qconj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qrotate(q, v):
    """Rotate 3-vectors ``v`` by the SO(3) image of ``q``."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    w = q[..., :1]
    u = q[..., 1:]
    t = 2.0 * np.cross(u, v)
    return v + w * t + np.cross(u, t)


def quat_to_euler(q):
    """ZYZ Euler angles (alpha, beta, gamma) with q = qz(alpha) qy(beta) qz(gamma).

    beta lies in [0, pi]; alpha and gamma are returned in a range that
    reproduces ``q`` exactly (not merely up to sign).
    """
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    s = np.arctan2(z, w)
    d = np.arctan2(x, y)
    beta = 2.0 * np.arctan2(np.hypot(x, y), np.hypot(w, z))
    return np.stack([s - d, beta, s + d], axis=-1)


def _euler_to_quat(alpha, beta, gamma):
    a = np.asarray(alpha, dtype=float) / 2
    b = np.asarray(beta, dtype=float) / 2
    c = np.asarray(gamma, dtype=float) / 2
    return np.stack(
        [
            np.cos(b) * np.cos(a + c),
            np.sin(b) * np.sin(c - a),
            np.sin(b) * np.cos(c - a),
            np.cos(b) * np.sin(a + c),
        ],
        axis=-1,
    )


def quat_to_su2(q):
    """The 2x2 special unitary matrix of each quaternion."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = w - 1j * z
    out[..., 0, 1] = -1j * x - y
    out[..., 1, 0] = -1j * x + y
    out[..., 1, 1] = w + 1j * z
    return out


def _rotation_angle(q):
    # geodesic angle of the SO(3) image, 2 arccos|w|, computed stably
    q = np.asarray(q, dtype=float)
    return 2.0 * np.arctan2(np.linalg.norm(q[..., 1:], axis=-1), np.abs(q[..., 0]))


def _quat_keys(q, decimals=9):
    r = np.round(np.asarray(q, dtype=float), decimals) + 0.0
    return [tuple(row) for row in r]


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroupModel:
    """A finite group or a weighted sample grid of SU(2), with a length function."""

    kind: str
    identity: int
    inverse: np.ndarray
    weights: np.ndarray
    length: np.ndarray
    table: np.ndarray | None = None
    quats: np.ndarray | None = None
    name: str = ""
    resolution: int | None = None
    compose_tol: float = 1e-9

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def elements(self) -> np.ndarray:
        return np.arange(self.size)

    def __len__(self):
        return self.size

    @cached_property
    def _lookup(self):
        if self.quats is None:
            return None
        return {k: i for i, k in enumerate(_quat_keys(self.quats))}

    def index_of(self, q) -> int:
        """Handle of the stored element equal to quaternion ``q``."""
        key = _quat_keys(np.asarray(q)[None])[0]
        try:
            return self._lookup[key]
        except (KeyError, TypeError):
            raise GroupError(f"quaternion {np.asarray(q)} is not a stored element") from None

    def compose(self, x: int, y: int) -> int:
        if self.table is not None:
            return int(self.table[x, y])
        return self.index_of(qmul(self.quats[x], self.quats[y]))

    def compose_quat(self, x: int, y: int) -> np.ndarray:
        if self.quats is None:
            raise GroupError("group carries no quaternion data")
        return qmul(self.quats[x], self.quats[y])

    def conjugacy_classes(self) -> list[np.ndarray]:
        if self.table is None:
            raise GroupError("conjugacy classes need a Cayley table")
        seen = np.zeros(self.size, dtype=bool)
        out = []
        for y in range(self.size):
            if seen[y]:
                continue
            cls = np.unique(self.table[self.table[:, y], self.inverse])
            seen[cls] = True
            out.append(cls)
        return out

    @cached_property
    def mean_length(self) -> float:
        """Haar average of the length function."""
        return float(np.dot(self.weights, self.length))


def _validate_table(t: np.ndarray) -> tuple[int, np.ndarray]:
    n = t.shape[0]
    if t.ndim != 2 or t.shape != (n, n):
        raise GroupError("cayley table must be square")
    if t.min() < 0 or t.max() >= n:
        raise GroupError("cayley table entries out of range")
    for row in np.concatenate([t, t.T]):
        if len(set(row.tolist())) != n:
            raise GroupError("cayley table is not a latin square (cancellation fails)")
    ids = [e for e in range(n) if np.array_equal(t[e], np.arange(n)) and np.array_equal(t[:, e], np.arange(n))]
    if not ids:
        raise GroupError("cayley table has no identity element")
    e = ids[0]
    # associativity: (xy)z == x(yz) for all triples
    lhs = t[t[:, :, None], np.arange(n)[None, None, :]]
    rhs = t[np.arange(n)[:, None, None], t[None, :, :]]
    if not np.array_equal(lhs, rhs):
        raise GroupError("cayley table is not associative")
    inv = np.array([int(np.flatnonzero(t[x] == e)[0]) for x in range(n)])
    if not np.all(t[inv, np.arange(n)] == e):
        raise GroupError("cayley table lacks two-sided inverses")
    return e, inv


def _word_length(t, e, inv, generators):
    n = t.shape[0]
    gens = sorted(set(int(g) for g in generators) | set(int(inv[g]) for g in generators))
    dist = np.full(n, -1)
    dist[e] = 0
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = t[x, g]
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                queue.append(y)
    if (dist < 0).any():
        missing = np.flatnonzero(dist < 0).tolist()
        raise GroupError(f"generators do not generate the group; unreachable elements {missing}")
    return dist.astype(float)


def build_finite_group(cayley_table, generators, *, name: str = "", quats=None) -> GroupModel:
    """Finite group from a Cayley table with class-symmetrized word length.

    Word length is taken with respect to ``generators`` and their inverses,
    then replaced on each conjugacy class by its maximum there.  The
    symmetrized length is re-checked for subadditivity.
    """
    t = np.asarray(cayley_table, dtype=int)
    if t.ndim != 2:
        raise GroupError("cayley table must be square")
    e, inv = _validate_table(t)
    n = t.shape[0]
    length = _word_length(t, e, inv, generators) if n > 1 else np.zeros(1)
    model = GroupModel(
        kind=FINITE,
        identity=e,
        inverse=inv,
        weights=np.full(n, 1.0 / n),
        length=length,
        table=t,
        quats=None if quats is None else np.asarray(quats, dtype=float),
        name=name,
    )
    for cls in model.conjugacy_classes():
        length[cls] = length[cls].max()
    # subadditivity over all pairs
    if np.any(length[t] > length[:, None] + length[None, :] + 1e-12):
        raise GroupError("class-symmetrized word length is not subadditive")
    return model


def _lobatto(n: int):
    """Gauss-Lobatto-Legendre nodes and weights on [-1, 1] with ``n`` points."""
    from numpy.polynomial import legendre as L

    if n == 2:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    c = np.zeros(n)
    c[-1] = 1.0  # P_{n-1}
    interior = np.sort(L.legroots(L.legder(c)).real)
    x = np.concatenate([[-1.0], interior, [1.0]])
    w = 2.0 / (n * (n - 1) * L.legval(x, c) ** 2)
    return x, w


def build_su2_grid(resolution: int) -> GroupModel:
    """Euler-angle product grid on SU(2) with Haar quadrature weights.

    The polar angle uses ``resolution + 1`` Gauss-Lobatto nodes on
    [0, pi] weighted by sin(beta); the two azimuthal angles use uniform
    steps of 2 pi / resolution, alpha over [0, 2 pi) and gamma over
    [0, 4 pi).  Duplicate quaternions at the poles are merged, the set is
    closed under inversion, and weights are symmetrized over x <-> x^-1.
    """
    if int(resolution) != resolution or resolution < 2:
        raise GroupError("resolution must be an integer >= 2")
    r = int(resolution)
    xb, wb = _lobatto(r + 1)
    beta = np.pi * (xb + 1) / 2
    wbeta = wb * np.sin(beta)
    wbeta[[0, -1]] = 0.0
    alpha = 2 * np.pi * np.arange(r) / r
    gamma = 2 * np.pi * np.arange(2 * r) / r
    A, B, C = np.meshgrid(alpha, beta, gamma, indexing="ij")
    W = np.broadcast_to(wbeta[None, :, None], A.shape)
    q = _euler_to_quat(A.ravel(), B.ravel(), C.ravel())
    w = W.ravel().copy()

    # merge duplicates, then add missing inverses
    index: dict = {}
    quats, weights = [], []
    for key, qi, wi in zip(_quat_keys(q), q, w):
        if key in index:
            weights[index[key]] += wi
        else:
            index[key] = len(quats)
            quats.append(qi)
            weights.append(wi)
    for qi in list(quats):
        qc = qconj(qi)
        key = _quat_keys(qc[None])[0]
        if key not in index:
            index[key] = len(quats)
            quats.append(qc)
            weights.append(0.0)
    quats = np.array(quats)
    weights = np.array(weights)
    inv = np.array([index[k] for k in _quat_keys(qconj(quats))])
    weights = 0.5 * (weights + weights[inv])
    weights = weights / weights.sum()

    ident = index[_quat_keys(np.array([[1.0, 0, 0, 0]]))[0]]
    return GroupModel(
        kind=SAMPLED,
        identity=ident,
        inverse=inv,
        weights=weights,
        length=_rotation_angle(quats),
        quats=quats,
        name=f"SU2-grid-{r}",
        resolution=r,
    )


# ---------------------------------------------------------------------------


def spin_matrices(j: float):
    """(Jx, Jy, Jz) for spin ``j`` in the basis m = j, j-1, ..., -j."""
    two_j = int(round(2 * j))
    d = two_j + 1
    m = j - np.arange(d)
    jp = np.zeros((d, d), dtype=complex)
    for k in range(1, d):
        # J+ |m_k> = sqrt(j(j+1) - m_k(m_k+1)) |m_{k-1}>
        jp[k - 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] + 1))
    jx = (jp + jp.conj().T) / 2
    jy = (jp - jp.conj().T) / 2j
    jz = np.diag(m).astype(complex)
    return jx, jy, jz


@dataclass(eq=False)
class Representation:
    """Unitary matrices U_x for every element of ``group``."""

    group: GroupModel
    dim: int
    label: str
    spin: float | None = None
    _matrices: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self._dcache: dict = {}
        if self.spin is not None:
            _, jy, jz = spin_matrices(self.spin)
            self._m = np.real(np.diag(jz))
            self._ey, self._Vy = np.linalg.eigh(jy)

    def _d(self, betas):
        out = np.empty((len(betas), self.dim, self.dim), dtype=complex)
        keys = np.round(betas, 12)
        for k in np.unique(keys):
            if k not in self._dcache:
                self._dcache[k] = (self._Vy * np.exp(-1j * k * self._ey)) @ self._Vy.conj().T
            out[keys == k] = self._dcache[k]
        return out

    def _euler(self, idx):
        return quat_to_euler(self.group.quats[idx])

    def at(self, idx) -> np.ndarray:
        """Matrices U_x for the handles in ``idx`` (shape (k, d, d))."""
        idx = np.atleast_1d(np.asarray(idx, dtype=int))
        if self._matrices is not None:
            return self._matrices[idx]
        ang = self._euler(idx)
        left = np.exp(-1j * ang[:, :1] * self._m[None, :])
        right = np.exp(-1j * ang[:, 2:] * self._m[None, :])
        return left[:, :, None] * self._d(ang[:, 1]) * right[:, None, :]

    @property
    def matrices(self) -> np.ndarray:
        if self._matrices is None:
            self._matrices = self.at(np.arange(self.group.size))
        return self._matrices

    def apply(self, v, idx=None) -> np.ndarray:
        """U_x v for every handle (or those in ``idx``), shape (k, d)."""
        v = np.asarray(v, dtype=complex)
        if idx is None:
            idx = np.arange(self.group.size)
        idx = np.atleast_1d(np.asarray(idx, dtype=int))
        if self._matrices is not None:
            return self._matrices[idx] @ v
        out = np.empty((len(idx), self.dim), dtype=complex)
        for s in range(0, len(idx), 20000):
            sl = idx[s : s + 20000]
            ang = self._euler(sl)
            u = np.exp(-1j * ang[:, 2:] * self._m[None, :]) * v[None, :]
            u = np.einsum("kab,kb->ka", self._d(ang[:, 1]), u)
            out[s : s + 20000] = np.exp(-1j * ang[:, :1] * self._m[None, :]) * u
        return out

    def generators(self):
        """Hermitian generators (Jx, Jy, Jz) of a spin representation."""
        if self.spin is None:
            raise GroupError("infinitesimal generators exist only for spin representations")
        return spin_matrices(self.spin)


def spin_representation(group: GroupModel, j: float) -> Representation:
    """Spin-``j`` representation of a group whose elements are unit quaternions."""
    if group.quats is None:
        raise GroupError("spin representations need quaternion-valued elements")
    if j < 0 or abs(2 * j - round(2 * j)) > 1e-12:
        raise GroupError(f"spin must be a nonnegative half-integer, got {j}")
    j = round(2 * j) / 2
    return Representation(group=group, dim=int(round(2 * j)) + 1, label=f"spin-{j:g}", spin=j)


def matrix_representation(group: GroupModel, matrices, label: str = "", check: bool = True) -> Representation:
    """Representation from explicit matrices; checks unitarity and homomorphism."""
    U = np.asarray(matrices, dtype=complex)
    if U.ndim != 3 or U.shape[0] != group.size or U.shape[1] != U.shape[2]:
        raise GroupError("need one square matrix per group element")
    if check:
        d = U.shape[1]
        if np.abs(U @ U.conj().transpose(0, 2, 1) - np.eye(d)).max() > 1e-10:
            raise GroupError("representation matrices are not unitary")
        if group.table is not None:
            prod = np.einsum("xab,ybc->xyac", U, U)
            if np.abs(prod - U[group.table]).max() > 1e-10:
                raise GroupError("matrices do not satisfy U_xy = U_x U_y")
    return Representation(group=group, dim=U.shape[1], label=label, _matrices=U)


def commutant_dimension(rep: Representation) -> int:
    """Dimension of the fixed-point algebra of the conjugation action.

    Equals the Haar mean of |tr U_x|^2.  Spin representations of SU(2) are
    irreducible, so on a sampled grid this is 1 without summing.  The
    action is ergodic (its Lip-norm vanishes only on scalars) iff this is 1.
    """
    if rep.spin is not None and rep.group.kind != FINITE:
        return 1
    chi = np.einsum("xaa->x", rep.matrices)
    return int(round(float(np.dot(rep.group.weights, np.abs(chi) ** 2))))


def _amplified_conj(U, T):
    # blockwise U T_jk U^* for T viewed as q x q blocks of d x d
    d = U.shape[-1]
    q = T.shape[-1] // d
    if q > 1:
        U = np.einsum("jk,...ab->...jakb", np.eye(q), U).reshape(U.shape[:-2] + (q * d, q * d))
    return U @ T @ np.conj(np.swapaxes(U, -1, -2))


def conjugation_action(rep: Representation, x: int, T) -> np.ndarray:
    """alpha_x(T) = U_x T U_x^*, acting blockwise on q x q block matrices."""
    T = np.asarray(T, dtype=complex)
    d = rep.dim
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] % d:
        raise GroupError(f"matrix of shape {T.shape} does not match representation dimension {d}")
    U = rep.at([x])[0]
    return _amplified_conj(U, T)


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProjectionData:
    rep: Representation
    P: np.ndarray
    vector: np.ndarray
    stability: np.ndarray
    tol: float

    @property
    def group(self) -> GroupModel:
        return self.rep.group


def _unit_range_vector(P, tol):
    P = np.asarray(P, dtype=complex)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise GroupError("projection must be a square matrix")
    if np.abs(P - P.conj().T).max() > tol or np.abs(P @ P - P).max() > tol:
        raise GroupError("P is not an orthogonal projection")
    ev, V = np.linalg.eigh(P)
    if abs(np.trace(P).real - 1) > tol or np.sum(ev > 0.5) != 1:
        raise GroupError("P is not rank one")
    return V[:, -1]


def stability_subgroup(rep: Representation, P, tol: float = 1e-8) -> ProjectionData:
    """Elements x with ||alpha_x(P) - P|| <= tol."""
    P = np.asarray(P, dtype=complex)
    if P.shape != (rep.dim, rep.dim):
        raise GroupError("projection dimension does not match the representation")
    v = _unit_range_vector(P, max(tol, 1e-10))
    w = rep.apply(v)
    # for unit vectors, ||vv* - ww*|| = sqrt(1 - |<v,w>|^2)
    # = ||w - <v,w> v||, evaluated directly to avoid cancellation
    c = w @ v.conj()
    dist = np.linalg.norm(w - c[:, None] * v[None, :], axis=1)
    stab = np.flatnonzero(dist <= tol)
    g = rep.group
    if g.table is not None:
        inside = np.zeros(g.size, dtype=bool)
        inside[stab] = True
        if not inside[g.table[np.ix_(stab, stab)]].all():
            raise GroupError(
                f"stability set at tol={tol} is not closed under composition; try a smaller tol"
            )
    return ProjectionData(rep=rep, P=P, vector=v, stability=stab, tol=tol)


@dataclass(frozen=True, eq=False)
class CosetSpace:
    """Representatives of G/H with invariant weights and the quotient metric."""

    group: GroupModel
    projection: ProjectionData
    reps: np.ndarray
    weights: np.ndarray
    metric: np.ndarray
    base_index: int
    labels: np.ndarray  # coset index of every group element
    directions: np.ndarray | None = None

    @property
    def npts(self) -> int:
        return len(self.reps)

    def integrate(self, values) -> np.ndarray:
        """Integrate a sampled function against the invariant probability measure."""
        values = np.asarray(values)
        return np.tensordot(self.weights, values, axes=(0, 0))

    def translate_permutation(self, y: int) -> np.ndarray:
        """Permutation pi with (lambda_y f)_i = f_{pi[i]}, i.e. coset of y^-1 x_i."""
        g = self.group
        if g.table is None:
            raise GroupError("left translation is only tabulated for finite groups")
        yinv = g.inverse[y]
        return self.labels[g.table[yinv, self.reps]]


def coset_space(group: GroupModel, stability: ProjectionData) -> CosetSpace:
    """Partition ``group`` into cosets xH of the stability subgroup."""
    H = stability.stability
    if group.kind == FINITE:
        return _finite_cosets(group, stability, H)
    return _sampled_cosets(group, stability, H)


def _finite_cosets(group, stability, H):
    t = group.table
    n = group.size
    labels = np.full(n, -1)
    reps = []
    order = [group.identity] + [x for x in range(n) if x != group.identity]
    for x in order:
        if labels[x] >= 0:
            continue
        members = t[x, H]
        if (labels[members] >= 0).any():
            raise GroupError("coset partition failed: element lies in two cosets")
        labels[members] = len(reps)
        reps.append(x)
    reps = np.array(reps)
    weights = np.bincount(labels, weights=group.weights, minlength=len(reps))
    xinv = group.inverse[reps]
    # rho(x_i H, x_j H) = min_h l(x_i^-1 x_j h)
    prod = t[xinv[:, None, None], t[reps[None, :, None], H[None, None, :]]]
    metric = group.length[prod].min(axis=2)
    metric = np.minimum(metric, metric.T)
    return CosetSpace(group, stability, reps, weights / weights.sum(), metric, 0, labels)


def _sampled_cosets(group, stability, H):
    q = group.quats
    nontriv = H[group.length[H] > 1e-9]
    if len(H) == group.size:
        labels = np.zeros(group.size, dtype=int)
        return CosetSpace(
            group, stability, np.array([group.identity]), np.ones(1), np.zeros((1, 1)), 0, labels,
            directions=np.zeros((1, 3)),
        )
    if len(nontriv) == 0:
        raise GroupError("sampled coset spaces require a one-parameter stability subgroup")
    axes = q[nontriv, 1:] / np.linalg.norm(q[nontriv, 1:], axis=1, keepdims=True)
    axis = axes[0]
    if np.abs(np.abs(axes @ axis) - 1).max() > 1e-8:
        raise GroupError("sampled stability elements do not share a rotation axis")
    dirs = qrotate(q, np.broadcast_to(axis, (len(q), 3)))
    keys = np.round(dirs, 8) + 0.0
    uniq, labels = np.unique(keys, axis=0, return_inverse=True)
    labels = labels.ravel()
    base = labels[group.identity]
    # base coset first, otherwise lexicographic
    order = np.concatenate([[base], np.setdiff1d(np.arange(len(uniq)), [base])])
    remap = np.empty_like(order)
    remap[order] = np.arange(len(order))
    labels = remap[labels]
    first = np.full(len(order), -1)
    for idx in range(group.size - 1, -1, -1):
        first[labels[idx]] = idx
    first[0] = group.identity
    reps = first
    weights = np.bincount(labels, weights=group.weights, minlength=len(reps))
    d = dirs[reps]
    gap = np.linalg.norm(d[:, None, :] - d[None, :, :], axis=-1)
    np.fill_diagonal(gap, np.inf)
    if gap.min() < 1e-6:
        raise GroupError("coset partition failed: distinct cosets closer than tolerance")
    np.fill_diagonal(gap, 0.0)
    # exact minimum over the closed one-parameter subgroup: great-circle angle
    metric = 2 * np.arcsin(np.clip(gap / 2, 0, 1))
    return CosetSpace(group, stability, reps, weights / weights.sum(), metric, 0, labels, directions=d)

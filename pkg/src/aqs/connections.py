"""The canonical metric connection with torsion of an aqS structure.

``nabla_bar = nabla + H`` with ``H(X,Y) = eta(X) psi Y + eta(Y) psi X + g(X, psi Y) xi``.
Arrays follow the frame convention ``gamma[k, i, j] = (nabla_{e_i} e_j)^k``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import frame
from .frame import Field
from .lie import LieAlgebraData
from .structures import AcmStructure, Check, classify
from .tensor import (TensorError, inverse, matrix_rank, max_abs, nullspace, solve_sparse,
                     sym_eigen, to_rational, zeros_like_mode)


def h_tensor(s: AcmStructure) -> np.ndarray:
    """``H[k, i, j] = (H(e_i, e_j))^k``."""
    psi, eta, xi = s.psi.val, s.eta.val, s.xi.val
    return (np.einsum("i,kj->kij", eta, psi) + np.einsum("j,ki->kij", eta, psi)
            + np.einsum("ij,k->kij", s.Psi.val, xi))


def lower_first(g: np.ndarray, T: np.ndarray) -> np.ndarray:
    """``T[k, i, j]`` to ``T(e_i, e_j, e_z) = g(T(e_i, e_j), e_z)`` indexed ``[i, j, z]``."""
    return np.einsum("zk,kij->ijz", g, T)


@dataclass(frozen=True, eq=False)
class CanonicalConnection:
    structure: AcmStructure
    gamma: np.ndarray          # Levi-Civita
    H: np.ndarray
    gamma_bar: np.ndarray
    torsion: np.ndarray
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks.values())

    def nabla_bar(self, t: Field, sig: str) -> np.ndarray:
        """``nabla_bar t`` at the point, direction slot first."""
        s = self.structure
        return (frame.covariant(t, sig, s.geom.gamma).val
                + frame.connection_action(self.H, t.val, sig))


def canonical_connection(s: AcmStructure, require_aqs: bool = True) -> CanonicalConnection:
    if require_aqs and not classify(s)["anti_quasi_sasakian"]:
        raise TensorError(f"{s.name or 'structure'} is not anti-quasi-Sasakian")
    gamma = s.geom.gamma.val
    H = h_tensor(s)
    gbar = gamma + H
    c = s.geom.bracket
    T = gbar - np.transpose(gbar, (0, 2, 1)) - c
    xi, deta, g = s.xi.val, s.deta.val, s.g
    two = 2 if s.exact else 2.0
    conn = CanonicalConnection(s, gamma, H, gbar, T)
    T_low = lower_first(g, T)
    skew_D = s.horizontal(T_low + np.transpose(T_low, (0, 2, 1)))
    conn.checks.update({
        "torsion_2Psi_xi": s.compare(T, np.multiply.outer(xi, s.Psi.val) * two),
        "torsion_deta_xi": s.compare(T, np.multiply.outer(xi, deta)),
        "nabla_bar_g": s.compare(conn.nabla_bar(s.geom.metric, "ll")),
        "nabla_bar_phi": s.compare(conn.nabla_bar(s.phi, "ul")),
        "nabla_bar_xi": s.compare(conn.nabla_bar(s.xi, "u")),
        "torsion_xi_zero": s.compare(np.einsum("kij,i->kj", T, xi)),
        "torsion_skew_on_D": s.compare(skew_D),
        "contorsion_identity": contorsion_check(s, H, T),
    })
    return conn


def contorsion_check(s: AcmStructure, H: np.ndarray, T: np.ndarray) -> Check:
    """``2 H(X,Y,Z) = T(X,Y,Z) - T(Y,Z,X) + T(Z,X,Y)`` with ``T(X,Y,Z) = g(T(X,Y), Z)``."""
    g = s.g
    Hl, Tl = lower_first(g, H), lower_first(g, T)
    rhs = Tl - np.einsum("yzx->xyz", Tl) + np.einsum("zxy->xyz", Tl)
    two = 2 if s.exact else 2.0
    return s.compare(Hl * two, rhs)


def nijenhuis_skew_defect(s: AcmStructure):
    """``max |N(X,Y,Z) + N(X,Z,Y)|``: zero iff ``N`` is a 3-form."""
    Nl = lower_first(s.g, s.N)
    return max_abs(Nl + np.transpose(Nl, (0, 2, 1)))


# parallel torsion -----------------------------------------------------------

@dataclass(frozen=True)
class ParallelTorsion:
    ok: bool
    levi_civita_route: Check
    nabla_bar_route: Check


def parallel_torsion_test(c: CanonicalConnection) -> ParallelTorsion:
    """``nabla_bar psi = 0`` through ``(nabla_X psi) Y = -g(X, psi^2 Y) xi + eta(Y) psi^2 X``."""
    s = c.structure
    nab_psi = frame.covariant(s.psi, "ul", s.geom.gamma).val        # [x, k, y]
    P2, g, xi, eta = s.psi_sq, s.g, s.xi.val, s.eta.val
    rhs = -np.einsum("xa,ay,k->xky", g, P2, xi) + np.einsum("y,kx->xky", eta, P2)
    lc = s.compare(nab_psi, rhs)
    bar = s.compare(c.nabla_bar(s.psi, "ul"))
    if lc.ok != bar.ok:
        raise TensorError(f"parallel-torsion routes disagree ({lc.violation} vs {bar.violation})")
    return ParallelTorsion(lc.ok, lc, bar)


# uniqueness ----------------------------------------------------------------

@dataclass(frozen=True)
class Reconstruction:
    H: np.ndarray | None
    nullity: int
    consistent: bool
    matches_formula: Check | None

    @property
    def unique(self) -> bool:
        return self.consistent and self.nullity == 0


def _nz(vec):
    return [(i, v) for i, v in enumerate(vec) if v != 0]


def reconstruct_h(s: AcmStructure) -> Reconstruction:
    """Solve the linear conditions on ``H`` (metric, ``phi``- and ``xi``-parallel,
    torsion killing ``xi`` and totally skew on ``D``) and compare with ``h_tensor``."""
    n = s.dim
    if not s.exact:
        H, nullity, consistent = _float_solve(s)
        match = s.compare(H, h_tensor(s)) if consistent else None
        return Reconstruction(H if consistent else None, nullity, consistent, match)
    g, phi, xi = s.g, s.phi.val, s.xi.val
    nphi = s.nabla_phi.val
    nxi = s.nabla_xi.val
    B = s.horizontal_basis
    u = lambda k, i, j: (k * n + i) * n + j  # noqa: E731
    rows, rhs = [], []

    def emit(row, b):
        row = {k: v for k, v in row.items() if v != 0}
        if row or b != 0:
            rows.append(row)
            rhs.append(b)

    def acc(row, key, v):
        row[key] = row.get(key, 0) + v

    g_nz = [_nz(g[z]) for z in range(n)]
    phi_cols = [_nz(phi[:, j]) for j in range(n)]     # phi[a, j] != 0
    phi_rows = [_nz(phi[k]) for k in range(n)]        # phi[k, a] != 0
    xi_nz = _nz(xi)
    # metric compatibility: H_low[i, j, z] + H_low[i, z, j] = 0
    for i in range(n):
        for j in range(n):
            for z in range(j, n):
                row = {}
                for k, v in g_nz[z]:
                    acc(row, u(k, i, j), v)
                for k, v in g_nz[j]:
                    acc(row, u(k, i, z), v)
                emit(row, 0)
    # phi parallel: H(X, phi Y) - phi H(X, Y) = -(nabla_X phi) Y
    for i in range(n):
        for j in range(n):
            for k in range(n):
                row = {}
                for a, v in phi_cols[j]:
                    acc(row, u(k, i, a), v)
                for a, v in phi_rows[k]:
                    acc(row, u(a, i, j), -v)
                emit(row, -nphi[i, k, j])
    # xi parallel: H(X, xi) = -nabla_X xi
    for i in range(n):
        for k in range(n):
            row = {}
            for j, v in xi_nz:
                acc(row, u(k, i, j), v)
            emit(row, -nxi[i, k])
    # torsion vanishes on xi: H(xi, Y) - H(Y, xi) = 0
    for k in range(n):
        for j in range(n):
            row = {}
            for i, v in xi_nz:
                acc(row, u(k, i, j), v)
                acc(row, u(k, j, i), -v)
            emit(row, 0)
    # torsion totally skew on D: T(X,Y,Z) + T(X,Z,Y) = 0 for horizontal X, Y, Z
    cols = [_nz(B[:, a]) for a in range(B.shape[1])]

    def t_low(row, x, y, z, w):
        for k, v in g_nz[z]:
            acc(row, u(k, x, y), w * v)
            acc(row, u(k, y, x), -w * v)

    for a, b, c in itertools.product(range(B.shape[1]), repeat=3):
        if c < b:
            continue
        row = {}
        for (x, vx), (y, vy), (z, vz) in itertools.product(cols[a], cols[b], cols[c]):
            w = vx * vy * vz
            t_low(row, x, y, z, w)
            t_low(row, x, z, y, w)
        emit(row, 0)

    sol = solve_sparse(rows, rhs, n ** 3)
    H = zeros_like_mode((n, n, n), True)
    for col, val in sol.values.items():
        H[np.unravel_index(col, (n, n, n))] = val
    nullity, consistent = sol.nullity, sol.consistent
    match = s.compare(H, h_tensor(s)) if consistent else None
    return Reconstruction(H if consistent else None, nullity, consistent, match)


def _float_solve(s: AcmStructure):
    """Same constraints, assembled by applying them to a batch of unit tensors."""
    n = s.dim
    g, phi, xi = s.g, s.phi.val, s.xi.val
    B = s.horizontal_basis

    def lhs(H):
        Hl = np.einsum("zk,kij...->ijz...", g, H)
        Tl = Hl - np.swapaxes(Hl, 0, 1)
        skew = Tl + np.swapaxes(Tl, 1, 2)
        return [Hl + np.swapaxes(Hl, 1, 2),
                np.einsum("kia...,aj->kij...", H, phi) - np.einsum("ka,aij...->kij...", phi, H),
                np.einsum("kij...,j->ki...", H, xi),
                np.einsum("kij...,i->kj...", H, xi) - np.einsum("kji...,i->kj...", H, xi),
                np.einsum("xyz...,xa,yb,zc->abc...", skew, B, B, B, optimize=True)]

    N = n ** 3
    M = np.concatenate([b.reshape(-1, N) for b in lhs(np.eye(N).reshape(n, n, n, N))])
    z = np.zeros((n, n))
    rhs = [np.zeros((n, n, n)), -np.einsum("ikj->kij", s.nabla_phi.val), -s.nabla_xi.val.T,
           z, np.zeros((B.shape[1],) * 3)]
    b = np.concatenate([r.ravel() for r in rhs])
    x, *_ = np.linalg.lstsq(M, b, rcond=None)
    sv = np.linalg.svd(M, compute_uv=False)
    nullity = N - int(np.sum(sv > 1e-9 * sv[0])) if sv.size and sv[0] > 0 else N
    resid = float(np.max(np.abs(M @ x - b), initial=0.0))
    consistent = resid <= s.tol * max(1.0, float(np.max(np.abs(b), initial=0.0)))
    return x.reshape(n, n, n), nullity, consistent


# decomposition --------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    label: str
    basis: np.ndarray
    bracket_closed: bool
    nabla_closed: bool
    eigenvalue: object = None

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class Decomposition:
    kahler: Block
    aqs: Block
    eigen_blocks: tuple
    eigenvalues_constant: bool
    kahler_flat: bool
    kahler_phi_invariant: bool
    aqs_maximal_rank: bool

    @property
    def ok(self) -> bool:
        blocks = (self.kahler, self.aqs) + tuple(self.eigen_blocks)
        return all(b.bracket_closed and b.nabla_closed for b in blocks)


def _in_span(B: np.ndarray, w: np.ndarray, tol: float) -> bool:
    if B.shape[1] == 0:
        return bool(max_abs(w) == 0) if B.dtype == object else float(np.max(np.abs(w))) <= tol
    return matrix_rank(np.column_stack([B, w]), tol) == matrix_rank(B, tol)


def _closure(alg: LieAlgebraData, gamma: np.ndarray, B: np.ndarray, tol: float):
    br = nb = True
    for a in range(B.shape[1]):
        for b in range(B.shape[1]):
            u, v = B[:, a], B[:, b]
            if br and not _in_span(B, alg.bracket(u, v), tol):
                br = False
            if nb and not _in_span(B, np.einsum("kij,i,j->k", gamma, u, v), tol):
                nb = False
    return br, nb


def _exact_eigenspaces(M: np.ndarray, approx, tol: float):
    """Eigenspaces of ``M`` at rationalized eigenvalues; ``None`` if they do not fill the space."""
    n = M.shape[0]
    out = []
    for v, _ in approx:
        q = to_rational(Fraction(float(v)).limit_denominator(10 ** 6)) if M.dtype == object else v
        shift = M - np.eye(n, dtype=int) * q if M.dtype == object else M - q * np.eye(n)
        out.append((q, nullspace(shift, tol)))
    if sum(E.shape[1] for _, E in out) != n:
        return None
    return out


def decomposition_check(s: AcmStructure) -> Decomposition:
    alg = s.host
    if not isinstance(alg, LieAlgebraData):
        raise TensorError("decomposition needs a Lie-algebra host")
    conn = canonical_connection(s)
    if not parallel_torsion_test(conn).ok:
        raise TensorError("nabla_bar psi does not vanish")
    tol = s.tol
    gamma, psi, xi, g = s.geom.gamma.val, s.psi.val, s.xi.val, s.g
    E = nullspace(np.vstack([psi, s.eta.val.reshape(1, -1)]), tol)
    img = nullspace(np.vstack([E.T @ g, xi.reshape(1, -1) @ g]), tol)   # orthogonal complement of E + <xi>
    F = np.column_stack([xi.reshape(-1, 1), img])
    kb, kn = _closure(alg, gamma, E, tol)
    fb, fn = _closure(alg, gamma, F, tol)
    kahler = Block("E_kahler", E, kb, kn)
    aqs = Block("E_aqs", F, fb, fn)
    # eigenblocks <xi> + D_mu inside the aqS factor
    blocks = []
    constant = True
    if img.shape[1]:
        G = img.T @ g @ img
        M = inverse(G) @ (img.T @ g @ s.psi_sq @ img)
        approx = sym_eigen(s.psi_sq, metric=g).clusters
        approx = [(v, m) for v, m in approx if abs(float(v)) > 1e-9]
        spaces = _exact_eigenspaces(M, approx, tol)
        if spaces is None:
            constant = False
        else:
            for q, V in spaces:
                Bq = np.column_stack([xi.reshape(-1, 1), img @ V])
                b1, b2 = _closure(alg, gamma, Bq, tol)
                blocks.append(Block(f"xi+D({-q})", Bq, b1, b2, -q))
    R = s.geom.riemann.val
    if E.shape[1]:
        RE = np.einsum("lijk,ia,jb,kc->labc", R, E, E, E)
        flat = bool(s.compare(RE).ok)
        phi_inv = _in_span_all(E, s.phi.val @ E, tol)
    else:
        flat, phi_inv = True, True
    rank_F = matrix_rank(img.T @ s.deta.val @ img, tol) if img.shape[1] else 0
    return Decomposition(kahler, aqs, tuple(blocks), constant, flat, phi_inv,
                         rank_F == img.shape[1])


def _in_span_all(B, W, tol) -> bool:
    return all(_in_span(B, W[:, j], tol) for j in range(W.shape[1]))


# negative-result probes ----------------------------------------------------

@dataclass(frozen=True)
class SymmetryProbe:
    max_entry: object
    witness: tuple | None

    @property
    def locally_symmetric(self) -> bool:
        return self.witness is None


def local_symmetry_probe(alg: LieAlgebraData, tol: float = 1e-10) -> SymmetryProbe:
    """Largest entry of ``nabla R`` (``[m, l, i, j, k]``)."""
    geom = alg.geometry()
    nR = frame.covariant(geom.riemann, "ulll", geom.gamma).val
    top = max_abs(nR)
    if top == 0 or (not alg.exact and float(top) <= tol):
        return SymmetryProbe(top, None)
    idx = max(np.ndindex(nR.shape), key=lambda t: abs(nR[t]))
    return SymmetryProbe(top, tuple(int(i) for i in idx))


@dataclass(frozen=True)
class CurvatureProbe:
    found: bool
    witness: tuple | None      # (i, j, K)
    values: dict


def nonnegative_curvature_probe(s: AcmStructure) -> CurvatureProbe:
    """Sweep frame 2-planes for strictly negative sectional curvature."""
    rep = classify(s)
    if rep["cokahler"]:
        raise TensorError("probe requires a non-cokahler structure")
    if not rep["anti_quasi_sasakian"]:
        raise TensorError("probe requires an anti-quasi-Sasakian structure")
    if not parallel_torsion_test(canonical_connection(s)).ok:
        raise TensorError("probe requires nabla_bar psi = 0")
    R, g = s.geom.riemann.val, s.g
    n = s.dim
    eye = np.eye(n, dtype=int)
    vals = {}
    for i in range(n):
        for j in range(i + 1, n):
            vals[(i, j)] = frame.sectional(R, g, eye[i], eye[j])
    i, j = min(vals, key=lambda k: vals[k])
    K = vals[(i, j)]
    neg = K < 0 if s.exact else float(K) < -s.tol
    return CurvatureProbe(bool(neg), (i, j, K) if neg else None, vals)

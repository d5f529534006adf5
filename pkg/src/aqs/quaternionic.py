"""Sp(n) almost contact metric triples and the weighted Heisenberg algebra."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import frame
from .lie import LieAlgebraData
from .structures import (AcmStructure, Check, classify, nijenhuis, psi_spectrum)
from .tensor import Q, TensorError, exact_zeros, to_rational, wedge_arrays, zeros_like_mode

EVEN_PERMS = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


@dataclass(frozen=True, eq=False)
class SpnTriple:
    """Three structures sharing ``(xi, eta, g)``."""

    structures: tuple

    def __post_init__(self):
        if len(self.structures) != 3:
            raise TensorError("an Sp(n) triple has three structures")
        s0 = self.structures[0]
        for s in self.structures[1:]:
            same = (s.dim == s0.dim and np.all(s.xi.val == s0.xi.val)
                    and np.all(s.eta.val == s0.eta.val) and np.all(s.g == s0.g)
                    and np.all(s.geom.bracket == s0.geom.bracket))
            if not same:
                raise TensorError("structures of a triple must share the algebra, xi, eta and g")

    def __getitem__(self, i: int) -> AcmStructure:
        return self.structures[i]

    @property
    def dim(self) -> int:
        return self.structures[0].dim

    @property
    def n(self) -> int:
        return (self.dim - 1) // 4

    @cached_property
    def Phis(self) -> tuple:
        return tuple(s.Phi for s in self.structures)

    @cached_property
    def omegas(self) -> tuple:
        """``omega_i = -Phi_i`` (five-dimensional convention)."""
        return tuple(-P.val for P in self.Phis)


def heisenberg_algebra(weights) -> LieAlgebraData:
    """Frame ``(xi, tau_1..tau_4n)``; ``[tau_r, tau_3n+r] = [tau_n+r, tau_2n+r] = 2 lambda_r xi``."""
    lam = [to_rational(w) for w in weights]
    n = len(lam)
    if n == 0:
        raise TensorError("need at least one weight")
    entries = []
    for r in range(1, n + 1):
        two_l = 2 * lam[r - 1]
        entries.append((r, 3 * n + r, 0, two_l))
        entries.append((n + r, 2 * n + r, 0, two_l))
    return LieAlgebraData.from_brackets(4 * n + 1, entries)


def heisenberg_phis(n: int, exact: bool = True) -> list[np.ndarray]:
    """The three endomorphisms ``phi_1, phi_2, phi_3`` of the weighted Heisenberg frame."""
    dim = 4 * n + 1
    one = Q(1) if exact else 1.0
    maps = [
        # phi_1: t_r -> t_n+r, t_n+r -> -t_r, t_2n+r -> t_3n+r, t_3n+r -> -t_2n+r
        [(0, 1, 1), (1, 0, -1), (2, 3, 1), (3, 2, -1)],
        # phi_2: t_r -> t_2n+r, t_n+r -> -t_3n+r, t_2n+r -> -t_r, t_3n+r -> t_n+r
        [(0, 2, 1), (1, 3, -1), (2, 0, -1), (3, 1, 1)],
        # phi_3: t_r -> t_3n+r, t_n+r -> t_2n+r, t_2n+r -> -t_n+r, t_3n+r -> -t_r
        [(0, 3, 1), (1, 2, 1), (2, 1, -1), (3, 0, -1)],
    ]
    out = []
    for table in maps:
        phi = zeros_like_mode((dim, dim), exact)
        for r in range(1, n + 1):
            for src, dst, sign in table:
                phi[dst * n + r, src * n + r] = one * sign
        out.append(phi)
    return out


def build_weighted_heisenberg(weights) -> tuple[LieAlgebraData, SpnTriple]:
    alg = heisenberg_algebra(weights)
    n = len(weights)
    xi = exact_zeros(4 * n + 1)
    xi[0] = Q(1)
    structs = tuple(AcmStructure.on_lie(alg, phi, xi, xi.copy(), f"phi{i + 1}")
                    for i, phi in enumerate(heisenberg_phis(n)))
    return alg, SpnTriple(structs)


def triple_on(alg: LieAlgebraData, phis, xi, eta, names=("phi1", "phi2", "phi3"), tol=1e-8) -> SpnTriple:
    return SpnTriple(tuple(AcmStructure.on_lie(alg, p, xi, eta, nm, tol)
                           for p, nm in zip(phis, names)))


@dataclass(frozen=True)
class QuaternionicResult:
    ok: bool
    violation: object
    failed: tuple


def quaternionic_check(t: SpnTriple) -> QuaternionicResult:
    """``phi_i phi_j = phi_k = -phi_j phi_i`` for every even permutation."""
    s0 = t[0]
    fails, worst = [], 0
    for i, j, k in EVEN_PERMS:
        pi, pj, pk = (t[a].phi.val for a in (i, j, k))
        for label, lhs in ((f"phi{i + 1}phi{j + 1}=phi{k + 1}", pi @ pj),
                           (f"phi{j + 1}phi{i + 1}=-phi{k + 1}", -(pj @ pi))):
            c = s0.compare(lhs, pk)
            worst = max(worst, c.violation, key=float)
            if not c.ok:
                fails.append(label)
    return QuaternionicResult(not fails, worst, tuple(fails))


@dataclass(frozen=True)
class DoubleAqsResult:
    ok: bool
    checks: dict
    consequences: dict | None


def double_aqs_check(t: SpnTriple) -> DoubleAqsResult:
    """``dPhi_1 = dPhi_2 = 0`` and ``d eta = 2 Phi_3``; on success also the consequences."""
    s1, s2, s3 = t.structures
    two = 2 if s3.exact else 2.0
    checks = {
        "quaternionic": Check(quaternionic_check(t).ok, quaternionic_check(t).violation),
        "dPhi1_zero": s1.compare(s1.dPhi.val),
        "dPhi2_zero": s2.compare(s2.dPhi.val),
        "deta_2Phi3": s3.compare(s3.deta.val, s3.Phi.val * two),
    }
    ok = all(c.ok for c in checks.values())
    cons = None
    if ok:
        P3 = s3.Phi.val
        cons = {
            "phi1_aqs": classify(s1)["anti_quasi_sasakian"],
            "phi2_aqs": classify(s2)["anti_quasi_sasakian"],
            "phi3_sasakian": classify(s3)["sasakian"],
            "Phi3_phi3_invariant": s3.compare(s3.phi.val.T @ P3 @ s3.phi.val, P3).ok,
            "Phi3_phi1_anti_invariant": s3.compare(s1.phi.val.T @ P3 @ s1.phi.val, -P3).ok,
            "Phi3_phi2_anti_invariant": s3.compare(s2.phi.val.T @ P3 @ s2.phi.val, -P3).ok,
        }
    return DoubleAqsResult(ok, checks, cons)


def _aqs_shape(s: AcmStructure, B: np.ndarray) -> np.ndarray:
    """``2 eta(X) B Y + eta(Y) B X + g(X, B Y) xi`` indexed ``[x, k, y]``."""
    two = 2 if s.exact else 2.0
    eta, xi = s.eta.val, s.xi.val
    return (np.einsum("m,ki->mki", eta, B) * two + np.einsum("i,km->mki", eta, B)
            + np.einsum("mi,k->mki", s.g @ B, xi))


def structure_equations_check(t: SpnTriple) -> dict[str, Check]:
    s1, s2, s3 = t.structures
    p1, p2 = s1.phi.val, s2.phi.val
    out = {
        "i": s1.compare(s1.nabla_phi.val, _aqs_shape(s1, -p2)),
        "ii": s2.compare(s2.nabla_phi.val, _aqs_shape(s2, p1)),
        "iii": s3.compare(s3.nabla_phi.val,
                          np.einsum("mi,k->mki", s3.g, s3.xi.val)
                          - np.einsum("i,km->mki", s3.eta.val, s3.eye())),
    }
    return out


def two_imply_third(eqs: dict[str, Check]) -> bool:
    flags = [eqs[k].ok for k in ("i", "ii", "iii")]
    return sum(flags) != 2


def lemma_cmd_check(t: SpnTriple) -> Check:
    """``g(N_i(X,Y), phi_j Z) = dPhi_j(X,Y,Z) - dPhi_j(phi_i X, phi_i Y, Z)
    - dPhi_k(phi_i X, Y, Z) - dPhi_k(X, phi_i Y, Z)``."""
    worst, ok = 0, True
    for i, j, k in EVEN_PERMS:
        si, sj, sk = t[i], t[j], t[k]
        N = nijenhuis(si)
        pi, pj = si.phi.val, sj.phi.val
        dj, dk = sj.dPhi.val, sk.dPhi.val
        lhs = np.einsum("kxy,kb,bz->xyz", N, si.g, pj)
        rhs = (dj - np.einsum("ax,by,abz->xyz", pi, pi, dj)
               - np.einsum("ax,ayz->xyz", pi, dk) - np.einsum("by,xbz->xyz", pi, dk))
        c = si.compare(lhs, rhs)
        ok &= c.ok
        worst = max(worst, c.violation, key=float)
    return Check(bool(ok), worst)


@dataclass(frozen=True)
class HypoReport:
    su2_compatible: Check
    volume_nonzero: bool
    hypo: dict
    calabi_yau: dict
    lie_xi_phi1_zero: Check
    lie_xi_phi2_zero: Check
    k_contact_hypo: bool
    contact_calabi_yau: bool


def hypo_su2_check(t: SpnTriple) -> HypoReport:
    if t.dim != 5:
        raise TensorError("SU(2) conditions need dimension 5")
    s = t[0]
    c = s.geom.bracket
    w = t.omegas
    eta = s.eta.val
    v = wedge_arrays(w[0], w[0])
    comps = []
    for i in range(3):
        for j in range(i, 3):
            target = v if i == j else zeros_like_mode(v.shape, s.exact)
            comps.append(s.compare(wedge_arrays(w[i], w[j]), target))
    su2 = s.all_of(*comps)
    vol = wedge_arrays(eta, v)[0, 1, 2, 3, 4]
    two = 2 if s.exact else 2.0

    def d(form):
        return frame.ext_d(frame.const(form) if s.lie_hosted else frame.Field(form), c).val

    deta = s.deta.val
    deta_ok = s.compare(deta, -w[2] * two)
    hypo = {"d(eta^omega1)": s.compare(d(wedge_arrays(eta, w[0]))),
            "d(eta^omega2)": s.compare(d(wedge_arrays(eta, w[1]))),
            "deta=-2omega3": deta_ok}
    cy = {"domega1": s.compare(d(w[0])), "domega2": s.compare(d(w[1])), "deta=-2omega3": deta_ok}
    l1 = t[0].compare(t[0].lie(t[0].phi, "ul"))
    l2 = t[1].compare(t[1].lie(t[1].phi, "ul"))
    killing = s.compare(s.killing_form).ok
    return HypoReport(su2, bool(vol != 0), hypo, cy, l1, l2,
                      bool(killing and all(x.ok for x in hypo.values())),
                      bool(all(x.ok for x in cy.values())))


@dataclass(frozen=True)
class Promotion:
    triple: SpnTriple
    orientation: tuple
    quaternionic: QuaternionicResult
    double: DoubleAqsResult


def k1_promote(s: AcmStructure, atol: float = 1e-10) -> Promotion:
    """Turn an aqS structure with ``psi^2 = -I + eta (x) xi`` into the triple ``(A, phi, psi)``."""
    spec = psi_spectrum(s)
    want = {0: 1, -1: s.dim - 1}
    if not spec.matches(want, atol):
        raise TensorError(f"psi^2 spectrum {spec.clusters} is not {{0 (simple), -1}}")
    xi, eta = s.xi.val, s.eta.val
    alg = s.host
    names = ("A", "phi", "psi")
    mats = (s.A.val, s.phi.val, s.psi.val)
    if isinstance(alg, LieAlgebraData):
        structs = tuple(AcmStructure.on_lie(alg, m, xi, eta, nm, s.tol) for m, nm in zip(mats, names))
    else:
        raise TensorError("promotion is implemented for Lie-algebra hosts")
    triple = SpnTriple(structs)
    q = quaternionic_check(triple)
    orientation = names if q.ok else ()
    if not q.ok:
        for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
            cand = SpnTriple(tuple(structs[p] for p in perm))
            if quaternionic_check(cand).ok:
                triple, orientation, q = cand, tuple(names[p] for p in perm), quaternionic_check(cand)
                break
    double = double_aqs_check(triple)
    if not double.ok:
        raise TensorError("promoted triple is not double aqS-Sasakian")
    return Promotion(triple, orientation, q, double)


def hypo_sl2_aff() -> SpnTriple:
    """K-contact hypo structure on ``sl(2,R) + aff(R)`` that is not contact Calabi-Yau.

    With ``[f2,f3] = -f1, [f3,f1] = f2, [f1,f2] = f3``, ``[a,b] = b`` and
    ``eta = -2 f^1 + 2 b^*`` the frame ``(-f1/2, f2, a, b + f1, f3)`` is
    orthonormal and ``d eta`` matches the Heisenberg triple.  ``ad_xi`` rotates
    ``(tau1, tau4)`` only, so ``phi_3`` stays Sasakian while ``L_xi phi_1 != 0``.
    """
    h = Q(1, 2)
    entries = [(0, 1, 4, -h), (0, 4, 1, h), (1, 4, 0, 2), (1, 3, 4, -1),
               (3, 4, 1, -1), (2, 3, 3, 1), (2, 3, 0, 2)]
    alg = LieAlgebraData.from_brackets(5, entries)
    _, t0 = build_weighted_heisenberg([1])
    xi = t0[0].xi.val
    return triple_on(alg, [s.phi.val for s in t0.structures], xi, xi.copy())


def skewed_frame_triple(weights=(1,), eps: float = 0.1, seed: int = 0) -> SpnTriple:
    """Heisenberg triple written in the float frame ``e'_a = B e_a`` with ``B = I + eps S``.

    Same geometry, but the metric and every tensor become dense, which
    exercises the general-metric code paths in float mode.
    """
    alg, t = build_weighted_heisenberg(list(weights))
    n = alg.dim
    rng = np.random.default_rng(seed)
    B = np.eye(n) + eps * rng.normal(size=(n, n))
    Binv = np.linalg.inv(B)
    c = np.asarray(alg.structure, dtype=float)
    g = np.asarray(alg.metric, dtype=float)
    alg2 = LieAlgebraData(np.einsum("kl,lij,ia,jb->kab", Binv, c, B, B), B.T @ g @ B)
    xi = Binv @ np.asarray(t[0].xi.val, dtype=float)
    eta = np.asarray(t[0].eta.val, dtype=float) @ B
    phis = [Binv @ np.asarray(s.phi.val, dtype=float) @ B for s in t.structures]
    return triple_on(alg2, phis, xi, eta)


def flat_triple(n: int = 2, exact: bool = True) -> SpnTriple:
    """Constant Heisenberg-shaped ``phi_i`` on the abelian algebra of dimension ``4n+1``."""
    from .lie import abelian
    alg = abelian(4 * n + 1, exact)
    xi = zeros_like_mode(4 * n + 1, exact)
    xi[0] = 1 if not exact else Q(1)
    return triple_on(alg, heisenberg_phis(n, exact), xi, xi.copy())

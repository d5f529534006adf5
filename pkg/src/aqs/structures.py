"""Almost contact metric structures and their classification.

An ``AcmStructure`` lives at one point of a host: the identity of a Lie
algebra (left-invariant data, exact) or a sample point of a patch (floats with
jets).  Patch-wide answers come from ``over_patch``, which aggregates the
pointwise results over the sample set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import frame
from .frame import Field, FrameGeometry
from .lie import LieAlgebraData, abelian
from .tensor import (Q, Scalar, SymSpectrum, TensorError, as_float, eye_like_mode,
                     exact_array, inverse, is_exact, matrix_rank, max_abs, nullspace,
                     is_rational, sym_eigen, to_rational, zeros_like_mode)

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class Check:
    ok: bool
    violation: Scalar

    def __bool__(self):
        return self.ok


def _num(x):
    return x if is_rational(x) else float(x)


@dataclass(frozen=True, eq=False)
class AcmStructure:
    """``(phi, xi, eta, g)`` at one point of a host geometry."""

    geom: FrameGeometry
    phi: Field
    xi: Field
    eta: Field
    tol: float = DEFAULT_TOL
    name: str = ""
    host: object = None

    # constructors -----------------------------------------------------

    @classmethod
    def on_lie(cls, alg: LieAlgebraData, phi, xi, eta, name: str = "", tol: float = DEFAULT_TOL):
        conv = exact_array if alg.exact else as_float
        return cls(alg.geometry(), frame.const(conv(phi)), frame.const(conv(xi)),
                   frame.const(conv(eta)), tol, name, alg)

    @classmethod
    def on_patch(cls, ps, x, name: str = "", tol: float = DEFAULT_TOL):
        geom, phi, xi, eta = ps.fields_at(x)
        return cls(geom, phi, xi, eta, tol, name or ps.patch.name, (ps, tuple(np.asarray(x, float))))

    def with_tol(self, tol: float) -> "AcmStructure":
        return AcmStructure(self.geom, self.phi, self.xi, self.eta, tol, self.name, self.host)

    # basic data -------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.geom.dim

    @property
    def exact(self) -> bool:
        return self.geom.exact

    @property
    def g(self) -> np.ndarray:
        return self.geom.metric.val

    @property
    def lie_hosted(self) -> bool:
        return isinstance(self.host, LieAlgebraData)

    def zero(self, shape) -> np.ndarray:
        return zeros_like_mode(shape, self.exact)

    def eye(self) -> np.ndarray:
        return eye_like_mode(self.dim, self.exact)

    def compare(self, lhs, rhs=None) -> Check:
        """Exact equality, or ``max|lhs - rhs| <= tol * max(1, scale)`` for floats."""
        lhs = np.asarray(lhs)
        diff = lhs if rhs is None else lhs - np.asarray(rhs)
        viol = max_abs(diff)
        if self.exact and is_exact(diff):
            return Check(viol == 0, viol)
        scale = max(float(max_abs(lhs)), 0.0 if rhs is None else float(max_abs(rhs)))
        viol = float(viol)
        return Check(viol <= self.tol * max(1.0, scale), viol)

    def all_of(self, *checks: Check) -> Check:
        return Check(all(c.ok for c in checks), max((c.violation for c in checks), key=float))

    @cached_property
    def projector(self) -> np.ndarray:
        """``P = I - xi (x) eta`` onto the horizontal distribution."""
        return self.eye() - np.multiply.outer(self.xi.val, self.eta.val)

    def horizontal(self, arr: np.ndarray, lower_slots=None) -> np.ndarray:
        """Restrict lower slots (all by default) to horizontal arguments."""
        P = self.projector
        slots = range(arr.ndim) if lower_slots is None else lower_slots
        for s in slots:
            arr = np.moveaxis(np.tensordot(arr, P, axes=([s], [0])), -1, s)
        return arr

    @cached_property
    def horizontal_basis(self) -> np.ndarray:
        """Columns spanning ``D = ker eta``."""
        return nullspace(self.eta.val.reshape(1, -1))

    # derived tensors --------------------------------------------------

    @cached_property
    def nabla_xi(self) -> Field:
        """``nabla_xi.val[m, k] = (nabla_{e_m} xi)^k``."""
        return frame.covariant(self.xi, "u", self.geom.gamma)

    @cached_property
    def psi(self) -> Field:
        """``psi = -nabla xi`` as a (1,1) tensor."""
        return -frame.einsum1("mk->km", self.nabla_xi)

    @cached_property
    def A(self) -> Field:
        """``A = -phi o nabla xi = phi psi``."""
        return frame.einsum2("ka,am->km", self.phi, self.psi)

    @cached_property
    def Phi(self) -> Field:
        return frame.einsum2("xk,ky->xy", self.geom.metric, self.phi)

    @cached_property
    def Psi(self) -> Field:
        return frame.einsum2("xk,ky->xy", self.geom.metric, self.psi)

    @cached_property
    def Acal(self) -> Field:
        return frame.einsum2("xk,ky->xy", self.geom.metric, self.A)

    @cached_property
    def deta(self) -> Field:
        return frame.ext_d(self.eta, self.geom.bracket)

    @cached_property
    def dPhi(self) -> Field:
        return frame.ext_d(self.Phi, self.geom.bracket)

    @cached_property
    def nabla_phi(self) -> Field:
        """``nabla_phi.val[m, k, i] = ((nabla_{e_m} phi) e_i)^k``."""
        return frame.covariant(self.phi, "ul", self.geom.gamma)

    @cached_property
    def nabla_Phi(self) -> np.ndarray:
        """``alpha[x, y, z] = (nabla_{e_x} Phi)(e_y, e_z)``."""
        return frame.covariant(self.Phi, "ll", self.geom.gamma).val

    @cached_property
    def nijenhuis_nabla(self) -> np.ndarray:
        """``N[k, i, j]`` through the covariant-derivative expansion."""
        D, phi = self.nabla_phi.val, self.phi.val
        t1 = np.einsum("mi,mkj->kij", phi, D)
        t3 = np.einsum("ika,aj->kij", D, phi)
        nx = self.nabla_xi.val
        t5 = np.einsum("i,jk->kij", self.eta.val, nx)
        return (t1 - np.transpose(t1, (0, 2, 1)) + t3 - np.transpose(t3, (0, 2, 1))
                + t5 - np.transpose(t5, (0, 2, 1)))

    @cached_property
    def nijenhuis_bracket(self) -> np.ndarray:
        """``N = [phi, phi] + d eta (x) xi`` from brackets of frame fields."""
        c, phi = self.geom.bracket, self.phi.val
        dphi = self.phi.deriv(1, self.dim)
        b_pp = (np.einsum("kab,ai,bj->kij", c, phi, phi)
                + np.einsum("ai,kja->kij", phi, dphi) - np.einsum("aj,kia->kij", phi, dphi))
        b_ep = np.einsum("kib,bj->kij", c, phi) + np.einsum("kji->kij", dphi)   # [e_i, phi e_j]
        b_pe = np.einsum("kaj,ai->kij", c, phi) - np.einsum("kij->kij", dphi)   # [phi e_i, e_j]
        sq = phi @ phi
        out = (b_pp + np.einsum("ka,aij->kij", sq, c) - np.einsum("ka,aij->kij", phi, b_ep)
               - np.einsum("ka,aij->kij", phi, b_pe))
        return out + np.multiply.outer(self.xi.val, self.deta.val)

    @cached_property
    def N(self) -> np.ndarray:
        return self.nijenhuis_nabla

    @cached_property
    def killing_form(self) -> np.ndarray:
        """``(L_xi g)(e_x, e_y)``."""
        gn = self.nabla_xi.val @ self.g
        return gn + gn.T

    def lie(self, t: Field, sig: str) -> np.ndarray:
        return frame.lie_derivative(t, sig, self.xi, self.geom)

    @cached_property
    def psi_sq(self) -> np.ndarray:
        return self.psi.val @ self.psi.val

    @cached_property
    def psi_norm_sq(self):
        """``|psi|^2 = sum g(psi e_a, psi e_b) g^{ab}``."""
        gp = self.psi.val.T @ self.g @ self.psi.val
        return np.sum(gp * self.geom.ginv.val)

    def __repr__(self):
        return f"AcmStructure({self.name!r}, dim={self.dim}, {'exact' if self.exact else 'float'})"


# validity and torsion -------------------------------------------------------

@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    witnesses: dict
    failed: tuple


def validate(s: AcmStructure) -> ValidationResult:
    phi, xi, eta, g = s.phi.val, s.xi.val, s.eta.val, s.g
    checks = {
        "phi_squared": s.compare(phi @ phi, -s.eye() + np.multiply.outer(xi, eta)),
        "eta_xi": s.compare(np.array([eta @ xi]), np.array([1 if s.exact else 1.0])),
        "phi_xi": s.compare(phi @ xi),
        "eta_phi": s.compare(eta @ phi),
        "metric": s.compare(phi.T @ g @ phi, g - np.multiply.outer(eta, eta)),
        "eta_is_dual": s.compare(g @ xi, eta),
    }
    failed = tuple(k for k, c in checks.items() if not c.ok)
    return ValidationResult(not failed, {k: c.violation for k, c in checks.items()}, failed)


def nijenhuis(s: AcmStructure) -> np.ndarray:
    """Nijenhuis torsion; both computation routes must agree."""
    gap = s.compare(s.nijenhuis_nabla, s.nijenhuis_bracket)
    if not gap.ok:
        raise TensorError(f"Nijenhuis routes disagree (gap {gap.violation})")
    return s.N


# rank ------------------------------------------------------------------------

@dataclass(frozen=True)
class RankReport:
    p: int | None
    q: Scalar | None
    rk: int
    rank_deta: int
    rank_deta_D: int
    E: np.ndarray

    @property
    def dim_E(self) -> int:
        return self.E.shape[1]


def rank_of_eta(s: AcmStructure) -> RankReport:
    deta = s.deta.val
    B = s.horizontal_basis
    rd = matrix_rank(B.T @ deta @ B, s.tol)
    rfull = matrix_rank(deta, s.tol)
    rk = rfull + 1 if rd == rfull else rfull
    E = nullspace(np.vstack([deta, s.eta.val.reshape(1, -1)]), s.tol)
    p = rd // 4 if rd % 4 == 0 else None
    q = Q(s.dim - 1 - rd, 2)
    return RankReport(p, q, rk, rfull, rd, E)


# classification -------------------------------------------------------------

CG_CLASSES = ("C6", "C7", "C10", "C11", "C6+C7", "C10+C11", "C6+C7+C10+C11")


def cg_membership(s: AcmStructure) -> dict[str, Check]:
    """Chinea-Gonzalez membership from ``alpha = nabla Phi``."""
    a, phi, eta, xi = s.nabla_Phi, s.phi.val, s.eta.val, s.xi.val
    a_xi = np.einsum("xyz,z->xy", a, xi)                          # alpha(X, Y, xi)
    a_pp_xi = np.einsum("ax,bz,ab->xz", phi, phi, a_xi)           # alpha(phiX, phiZ, xi)
    a_xi_pp = np.einsum("by,cz,bc->yz", phi, phi, np.tensordot(xi, a, axes=(0, 0)))
    # alpha(xi, phiY, phiZ)
    t67 = (np.einsum("z,yx->xyz", eta, a_xi) - np.einsum("y,xz->xyz", eta, a_pp_xi))
    t10 = -t67
    t11 = -np.einsum("x,yz->xyz", eta, a_xi_pp)
    t_all = (np.einsum("z,xy->xyz", eta, a_xi) - np.einsum("y,zx->xyz", eta, a_pp_xi)
             + t11)
    c12 = np.sum(s.geom.ginv.val * a_xi)
    n = (s.dim - 1) // 2
    if n == 0:
        half_n = 0
    else:
        half_n = Q(1, 2 * n) if s.exact else 1.0 / (2 * n)
    g = s.g
    t6 = (np.einsum("xy,z->xyz", g, eta) - np.einsum("xz,y->xyz", g, eta)) * (c12 * half_n)
    zero = np.array([c12])
    out = {
        "C6": s.compare(a, t6),
        "C7": s.all_of(s.compare(a, t67), s.compare(zero)),
        "C10": s.compare(a, t10),
        "C11": s.compare(a, t11),
        "C6+C7": s.compare(a, t67),
        "C10+C11": s.compare(a, t10 + t11),
        "C6+C7+C10+C11": s.compare(a, t_all),
    }
    return out


def gqs_direct(s: AcmStructure) -> Check:
    """Killing Reeb field, and ``dPhi``, ``N(X,Y,Z)`` vanish on horizontal triples."""
    n_low = np.einsum("kxy,kz->xyz", s.N, s.g)
    return s.all_of(s.compare(s.killing_form),
                    s.compare(s.horizontal(s.dPhi.val)),
                    s.compare(s.horizontal(n_low)))


def gqs_and_transverse_checks(s: AcmStructure) -> dict[str, Check]:
    gqs = gqs_direct(s)
    table = cg_membership(s)["C6+C7+C10+C11"]
    lie_phi = s.compare(s.lie(s.phi, "ul"))
    trans = Check(gqs.ok and lie_phi.ok, max(gqs.violation, lie_phi.violation, key=float))
    return {"generalized_quasi_sasakian": gqs, "table2_identity": table,
            "lie_xi_phi_zero": lie_phi, "transversely_kahler": trans}


@dataclass
class ClassificationReport:
    flags: dict
    witnesses: dict
    rank: RankReport | None
    inconsistencies: list = field(default_factory=list)
    points: int = 1

    def __getitem__(self, key: str) -> bool:
        return self.flags[key]


def classify(s: AcmStructure) -> ClassificationReport:
    val = validate(s)
    deta, Phi, N, xi = s.deta.val, s.Phi.val, s.N, s.xi.val
    twice = 2 if s.exact else 2.0
    c = {
        "acm_valid": Check(val.ok, max(val.witnesses.values(), key=float)),
        "dPhi_zero": s.compare(s.dPhi.val),
        "deta_zero": s.compare(deta),
        "normal": s.compare(N),
        "anti_normal": s.compare(N, np.multiply.outer(xi, deta) * twice),
        "deta_2Phi": s.compare(deta, Phi * twice),
        "xi_killing": s.compare(s.killing_form),
        "lie_xi_phi_zero": s.compare(s.lie(s.phi, "ul")),
        "deta_phi_invariant": s.compare(s.phi.val.T @ deta @ s.phi.val, deta),
        "deta_phi_anti_invariant": s.compare(s.phi.val.T @ deta @ s.phi.val, -deta),
    }
    c["quasi_sasakian"] = s.all_of(c["normal"], c["dPhi_zero"])
    c["anti_quasi_sasakian"] = s.all_of(c["anti_normal"], c["dPhi_zero"])
    c["sasakian"] = s.all_of(c["normal"], c["deta_2Phi"])
    c["cokahler"] = s.all_of(c["normal"], c["deta_zero"], c["dPhi_zero"])
    c["k_contact"] = s.all_of(c["deta_2Phi"], c["xi_killing"])
    gt = gqs_and_transverse_checks(s)
    c["generalized_quasi_sasakian"] = gt["generalized_quasi_sasakian"]
    c["transversely_kahler"] = gt["transversely_kahler"]
    for k, v in cg_membership(s).items():
        c["cg_" + k] = v
    flags = {k: v.ok for k, v in c.items()}
    report = ClassificationReport(flags, {k: v.violation for k, v in c.items()}, rank_of_eta(s))
    report.inconsistencies = consistency_violations(flags)
    return report


def consistency_violations(flags: dict) -> list[str]:
    rules = [
        ("cokahler implies quasi_sasakian and anti_quasi_sasakian",
         not flags["cokahler"] or (flags["quasi_sasakian"] and flags["anti_quasi_sasakian"])),
        ("anti_quasi_sasakian implies C10+C11",
         not flags["anti_quasi_sasakian"] or flags["cg_C10+C11"]),
        ("quasi_sasakian and anti_quasi_sasakian imply deta = 0",
         not (flags["quasi_sasakian"] and flags["anti_quasi_sasakian"]) or flags["deta_zero"]),
        ("generalized quasi-Sasakian iff C6+C7+C10+C11",
         flags["generalized_quasi_sasakian"] == flags["cg_C6+C7+C10+C11"]),
        ("quasi_sasakian iff C6+C7", flags["quasi_sasakian"] == flags["cg_C6+C7"]),
    ]
    return [name for name, ok in rules if not ok]


# structure equations and derived operators ---------------------------------

def aqs_rhs(s: AcmStructure) -> np.ndarray:
    """``2 eta(X) A Y + eta(Y) A X + g(X, A Y) xi`` indexed ``[x, k, y]``."""
    A, eta, xi = s.A.val, s.eta.val, s.xi.val
    two = 2 if s.exact else 2.0
    return (np.einsum("m,ki->mki", eta, A) * two + np.einsum("i,km->mki", eta, A)
            + np.einsum("mi,k->mki", s.Acal.val, xi))


def sasakian_rhs(s: AcmStructure) -> np.ndarray:
    """``g(X, Y) xi - eta(Y) X`` indexed ``[x, k, y]``."""
    return (np.einsum("mi,k->mki", s.g, s.xi.val)
            - np.einsum("i,km->mki", s.eta.val, s.eye()))


def aqs_structure_equation(s: AcmStructure) -> dict[str, Check]:
    A = s.A.val
    out = {
        "structure_equation": s.compare(s.nabla_phi.val, aqs_rhs(s)),
        "A_skew": s.compare(s.Acal.val + s.Acal.val.T),
        "A_anticommutes_phi": s.compare(A @ s.phi.val + s.phi.val @ A),
    }
    out["ok"] = s.all_of(*out.values())
    return out


def sasakian_structure_equation(s: AcmStructure) -> Check:
    return s.compare(s.nabla_phi.val, sasakian_rhs(s))


@dataclass(frozen=True)
class DerivedOperators:
    A: np.ndarray
    psi: np.ndarray
    Psi: np.ndarray
    Acal: np.ndarray
    spectrum: SymSpectrum
    route_gap_A: Scalar
    route_gap_psi: Scalar
    kernel_matches: bool


def derived_operators(s: AcmStructure, strict: bool = True) -> DerivedOperators:
    """``A`` and ``psi`` from the Levi-Civita route and from ``d eta``."""
    half = Q(1, 2) if s.exact else 0.5
    ginv, deta, phi = s.geom.ginv.val, s.deta.val, s.phi.val
    A_eta = ginv @ (np.einsum("xa,az->zx", deta, phi) * half)
    psi_eta = ginv @ deta * half
    gap_A = s.compare(s.A.val, A_eta)
    gap_psi = s.compare(s.psi.val, psi_eta)
    if strict and not (gap_A.ok and gap_psi.ok):
        raise TensorError(f"A/psi routes disagree: {gap_A.violation}, {gap_psi.violation}")
    spec = sym_eigen(s.psi_sq, metric=s.g)
    rank = rank_of_eta(s)
    psi = s.psi.val
    ker_ok = (matrix_rank(psi, s.tol) == s.dim - 1 - rank.dim_E
              and s.compare(psi @ s.xi.val).ok
              and (rank.dim_E == 0 or s.compare(psi @ rank.E).ok))
    return DerivedOperators(s.A.val, psi, s.Psi.val, s.Acal.val, spec,
                            gap_A.violation, gap_psi.violation, bool(ker_ok))


def psi_spectrum(s: AcmStructure) -> SymSpectrum:
    return sym_eigen(s.psi_sq, metric=s.g)


def closed_triplet_check(s: AcmStructure) -> dict[str, Check]:
    two = 2 if s.exact else 2.0
    c = s.geom.bracket
    return {
        "dAcal_zero": s.compare(frame.ext_d(s.Acal, c).val),
        "dPhi_zero": s.compare(s.dPhi.val),
        "dPsi_zero": s.compare(frame.ext_d(s.Psi, c).val),
        "deta_2Psi": s.compare(s.deta.val, s.Psi.val * two),
    }


# deformations and products -------------------------------------------------

def homothetic_deform(s: AcmStructure, lam) -> AcmStructure:
    """``phi' = phi, xi' = xi / lam, eta' = lam eta, g' = lam^2 g``."""
    lam = to_rational(lam) if s.exact else float(lam)
    if not lam > 0:
        raise TensorError("homothety factor must be positive")
    host = s.host
    if isinstance(host, LieAlgebraData):
        host = LieAlgebraData(host.structure, host.metric * lam * lam)
        geom = host.geometry()
    else:
        geom = FrameGeometry(s.geom.metric.scaled(lam * lam), s.geom.bracket)
    inv = 1 / lam
    return AcmStructure(geom, s.phi, s.xi.scaled(inv), s.eta.scaled(lam), s.tol,
                        f"{s.name} (homothety {lam})", host)


def homothety_relations(s: AcmStructure, d: AcmStructure, lam) -> dict[str, Check]:
    lam = to_rational(lam) if s.exact else float(lam)
    return {"psi_scaled": d.compare(d.psi.val * lam, s.psi.val),
            "A_scaled": d.compare(d.A.val * lam, s.A.val)}


@dataclass(frozen=True, eq=False)
class KahlerFactor:
    """A flat Kaehler block ``(R^{2m}, h, J)``."""

    metric: np.ndarray
    J: np.ndarray

    @classmethod
    def standard(cls, dim: int, exact: bool = True) -> "KahlerFactor":
        if dim % 2:
            raise TensorError("a Kaehler factor has even dimension")
        m = dim // 2
        J = zeros_like_mode((dim, dim), exact)
        one = Q(1) if exact else 1.0
        for i in range(m):
            J[m + i, i] = one
            J[i, m + i] = -one
        return cls(eye_like_mode(dim, exact), J)

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    def check(self) -> Check:
        J, h = self.J, self.metric
        d = max_abs(J @ J + eye_like_mode(self.dim, is_exact(J)))
        d2 = max_abs(J.T @ h @ J - h)
        v = max(d, d2, key=float)
        ok = v == 0 if is_exact(J) else float(v) <= 1e-10
        return Check(bool(ok), v)


def product_with_kahler(s: AcmStructure, k: KahlerFactor) -> AcmStructure:
    """``(phi + J, (xi, 0), (eta, 0), g + h)`` on the direct sum with a flat Kaehler block."""
    if not isinstance(s.host, LieAlgebraData):
        raise TensorError("products are built on Lie-algebra hosts")
    if k.dim == 0:
        return s
    if not k.check().ok:
        raise TensorError("invalid Kaehler factor")
    n, m = s.dim, k.dim
    tot = n + m

    def block(a, b):
        out = zeros_like_mode((tot, tot), s.exact)
        out[:n, :n] = a
        out[n:, n:] = b
        return out

    c = zeros_like_mode((tot, tot, tot), s.exact)
    c[:n, :n, :n] = s.host.structure
    alg = LieAlgebraData(c, block(s.host.metric, k.metric))
    pad = zeros_like_mode(m, s.exact)
    return AcmStructure.on_lie(alg, block(s.phi.val, k.J), np.concatenate([s.xi.val, pad]),
                               np.concatenate([s.eta.val, pad]), f"{s.name} x flat{m}", s.tol)


# curvature-level checks -----------------------------------------------------

@dataclass(frozen=True)
class EtaEinsteinFit:
    mu: Scalar
    nu: Scalar
    residual: Scalar
    eta_einstein: bool


def eta_einstein_fit(s: AcmStructure) -> EtaEinsteinFit:
    """Least-squares ``Ric = mu g + nu eta (x) eta`` via the 2x2 normal equations."""
    ric = s.geom.ricci.val
    g = s.g
    ee = np.multiply.outer(s.eta.val, s.eta.val)
    gram = [[np.sum(g * g), np.sum(g * ee)], [np.sum(ee * g), np.sum(ee * ee)]]
    rhs = [np.sum(ric * g), np.sum(ric * ee)]
    det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0]
    if det == 0:
        raise TensorError("degenerate eta-Einstein system")
    mu = (rhs[0] * gram[1][1] - gram[0][1] * rhs[1]) / det
    nu = (gram[0][0] * rhs[1] - gram[1][0] * rhs[0]) / det
    res = s.compare(ric, g * mu + ee * nu)
    return EtaEinsteinFit(_num(mu), _num(nu), res.violation, res.ok)


def _curvature_model(g: np.ndarray) -> np.ndarray:
    """``R_1(X,Y)Z = g(Y,Z) X - g(X,Z) Y`` as ``[l, i, j, k]``."""
    n = g.shape[0]
    I = eye_like_mode(n, is_exact(g))
    return np.einsum("jk,li->lijk", g, I) - np.einsum("ik,lj->lijk", g, I)


@dataclass(frozen=True)
class ConstantCurvatureVerdict:
    constant: bool
    kappa: Scalar | None
    violation: Scalar
    cokahler: bool | None
    theorem_holds: bool


def constant_curvature_check(s: AcmStructure) -> ConstantCurvatureVerdict:
    """Is ``R = kappa R_1``?  For aqS structures constancy must force ``kappa = 0`` and cokahler."""
    R = s.geom.riemann.val
    model = _curvature_model(s.g)
    if s.dim < 2:
        return ConstantCurvatureVerdict(True, 0, 0, None, True)
    num = np.sum(R * model)
    den = np.sum(model * model)
    kappa = num / den
    chk = s.compare(R, model * kappa)
    rep = classify(s)
    cok = rep["cokahler"]
    holds = True
    if chk.ok and rep["anti_quasi_sasakian"]:
        holds = bool(s.compare(np.array([kappa])).ok and cok and s.compare(s.psi.val).ok)
    return ConstantCurvatureVerdict(chk.ok, _num(kappa) if chk.ok else None, chk.violation,
                                    cok, holds)


def sectional_xi(s: AcmStructure) -> list[tuple[Scalar, Scalar]]:
    """``(K(xi, X), |psi X|^2)`` for the unit-normalized horizontal basis vectors."""
    R, g, xi = s.geom.riemann.val, s.g, s.xi.val
    out = []
    for j in range(s.horizontal_basis.shape[1]):
        X = s.horizontal_basis[:, j]
        nrm = X @ g @ X
        K = frame.sectional(R, g, xi, X)
        pX = s.psi.val @ X
        out.append((K, (pX @ g @ pX) / nrm))
    return out


# identity suite ---------------------------------------------------------------

def identity_suite(s: AcmStructure) -> dict[str, Check]:
    """Every pointwise identity an aqS structure has to satisfy."""
    two = 2 if s.exact else 2.0
    phi, psi, A, xi, eta, g = s.phi.val, s.psi.val, s.A.val, s.xi.val, s.eta.val, s.g
    deta = s.deta.val
    geom = s.geom
    R = geom.riemann.val
    nab_psi = frame.covariant(s.psi, "ul", geom.gamma)
    nab_A = frame.covariant(s.A, "ul", geom.gamma)
    out: dict[str, Check] = {}
    out["deta_xi_zero"] = s.compare(xi @ deta)
    out["lie_xi_eta_zero"] = s.compare(s.lie(s.eta, "l"))
    out["lie_xi_phi_zero"] = s.compare(s.lie(s.phi, "ul"))
    out["lie_xi_psi_zero"] = s.compare(s.lie(s.psi, "ul"))
    out["lie_xi_A_zero"] = s.compare(s.lie(s.A, "ul"))
    out["deta_phi_anti_invariant"] = s.compare(phi.T @ deta @ phi, -deta)
    out["nabla_xi_phi_2A"] = s.compare(frame.along(s.nabla_phi, xi), A * two)
    out["nabla_xi_psi_zero"] = s.compare(frame.along(nab_psi, xi))
    out["nabla_xi_A"] = s.compare(frame.along(nab_A, xi), -(psi @ A) * two)
    out.update(closed_triplet_check(s))
    out["psi_sq_eq_A_sq"] = s.compare(s.psi_sq, A @ A)
    gps = g @ s.psi_sq
    out["psi_sq_self_adjoint"] = s.compare(gps, gps.T)
    spec = psi_spectrum(s)
    top = max(v for v, _ in spec.clusters)
    out["psi_sq_nonpositive"] = Check(top <= 1e-8 * max(1.0, float(max_abs(s.psi_sq))), _num(max(top, 0.0)))
    ops = derived_operators(s, strict=False)
    out["A_psi_routes_agree"] = Check(_zero(s, ops.route_gap_A) and _zero(s, ops.route_gap_psi),
                                      max(ops.route_gap_A, ops.route_gap_psi, key=float))
    out["kernel_psi"] = Check(ops.kernel_matches, 0)
    # (nabla_X psi) Y = R(xi, X) Y, with nab_psi[x, k, y]
    R_xi = np.einsum("lijk,i->ljk", R, xi)              # R(xi, e_j) e_k
    out["nabla_psi_curvature"] = s.compare(nab_psi.val, np.einsum("kxy->xky", R_xi))
    out["psi_sq_curvature"] = s.compare(s.psi_sq, np.einsum("kxy,y->kx", R_xi, xi))
    out.update(nabla_Psi_lemma(s))
    # Ricci identities
    ric = geom.ricci.val
    Qop = geom.ricci_operator.val
    nsq = s.psi_norm_sq
    out["ric_xi_xi"] = s.compare(np.array([xi @ ric @ xi]), np.array([nsq]))
    out["ric_xi_horizontal"] = s.compare(s.horizontal(ric @ xi))
    out["Q_xi"] = s.compare(Qop @ xi, xi * nsq)
    out["Q_phi_commute"] = s.compare(Qop @ phi, phi @ Qop)
    ks = sectional_xi(s)
    out["K_xi_psi"] = s.compare(np.array([k for k, _ in ks]), np.array([v for _, v in ks]))
    gt = gqs_and_transverse_checks(s)
    out["gqs_iff_table2"] = Check(gt["generalized_quasi_sasakian"].ok == gt["table2_identity"].ok,
                                  max(gt["generalized_quasi_sasakian"].violation,
                                      gt["table2_identity"].violation, key=float))
    return out


def _zero(s: AcmStructure, v) -> bool:
    return v == 0 if s.exact else float(v) <= s.tol * max(1.0, float(max_abs(s.A.val)))


def nabla_Psi_lemma(s: AcmStructure) -> dict[str, Check]:
    """The three covariant-derivative identities of ``Psi``."""
    NP = frame.covariant(s.Psi, "ll", s.geom.gamma).val     # NP[x, y, z]
    phi, eta, g = s.phi.val, s.eta.val, s.g
    two = 2 if s.exact else 2.0
    V = s.psi_sq.T @ g                                       # V[x, z] = g(psi^2 X, Z)
    W = V @ phi                                              # W[x, z] = g(psi^2 X, phi Z)
    l1 = np.einsum("xaz,ay->xyz", NP, phi) - np.einsum("xya,az->xyz", NP, phi)
    r1 = np.einsum("y,xz->xyz", eta, W) + np.einsum("z,xy->xyz", eta, W)
    l2 = np.einsum("xab,ay,bz->xyz", NP, phi, phi) + NP
    r2 = -np.einsum("y,xz->xyz", eta, V) + np.einsum("z,xy->xyz", eta, V)
    l3 = np.einsum("abz,ax,by->xyz", NP, phi, phi) + NP
    r3 = -np.einsum("y,xz->xyz", eta, V) + np.einsum("z,xy->xyz", eta, V) * two
    return {"nabla_Psi_1": s.compare(l1, r1), "nabla_Psi_2": s.compare(l2, r2),
            "nabla_Psi_3": s.compare(l3, r3)}


# patch aggregation ----------------------------------------------------------

class RankNotConstant(TensorError):
    pass


def over_patch(ps, fn: Callable, points=None, tol: float = DEFAULT_TOL) -> list:
    """Evaluate ``fn`` on the structure at every sample point, in sequence order."""
    pts = ps.samples if points is None else points
    return [fn(AcmStructure.on_patch(ps, x, tol=tol)) for x in pts]


def merge_checks(results: list[dict]) -> dict[str, Check]:
    keys = results[0].keys()
    return {k: Check(all(r[k].ok for r in results),
                     max((r[k].violation for r in results), key=float)) for k in keys}


def classify_patch(ps, points=None, tol: float = DEFAULT_TOL) -> ClassificationReport:
    reps = over_patch(ps, classify, points, tol)
    ranks = {(r.rank.rank_deta_D, r.rank.rank_deta) for r in reps}
    if len(ranks) != 1:
        raise RankNotConstant(f"rank of d eta varies over the sample set: {sorted(ranks)}")
    flags = {k: all(r.flags[k] for r in reps) for k in reps[0].flags}
    wit = {k: max((r.witnesses[k] for r in reps), key=float) for k in reps[0].witnesses}
    out = ClassificationReport(flags, wit, reps[0].rank, points=len(reps))
    out.inconsistencies = sorted({i for r in reps for i in r.inconsistencies})
    return out


def abelian_cokahler(dim: int = 5, exact: bool = True) -> AcmStructure:
    """Abelian algebra with the block-constant structure; ``e_0`` is the Reeb field."""
    if dim % 2 == 0:
        raise TensorError("odd dimension required")
    alg = abelian(dim, exact)
    m = (dim - 1) // 2
    phi = zeros_like_mode((dim, dim), exact)
    one = Q(1) if exact else 1.0
    for i in range(m):
        phi[1 + m + i, 1 + i] = one
        phi[1 + i, 1 + m + i] = -one
    xi = zeros_like_mode(dim, exact)
    xi[0] = one
    return AcmStructure.on_lie(alg, phi, xi, xi.copy(), "abelian")

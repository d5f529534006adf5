"""Left-invariant Riemannian geometry from structure constants."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import frame
from .frame import Field, FrameGeometry
from .tensor import (FrameTensor, Q, Scalar, TensorError, alternate, as_float,
                     canonical, exact_array, exact_zeros, is_exact, leading_minors,
                     max_abs, to_rational, within)

CONVENTION = "R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z"


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    """Structure constants ``c[k, i, j]`` (``[e_i, e_j] = c^k_ij e_k``) and an inner product."""

    structure: np.ndarray
    metric: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.structure)
        g = np.asarray(self.metric)
        n = g.shape[0]
        if c.shape != (n, n, n) or g.shape != (n, n):
            raise TensorError(f"inconsistent shapes {c.shape} / {g.shape}")
        if is_exact(c) != is_exact(g):
            raise TensorError("mixed scalar variants")
        c, g = canonical(c), canonical(g)
        if not within(c + np.transpose(c, (0, 2, 1)), 1e-12):
            raise TensorError("structure constants are not antisymmetric")
        if not within(g - g.T, 1e-12):
            raise TensorError("metric is not symmetric")
        if is_exact(g):
            if any(m <= 0 for m in leading_minors(g)):
                raise TensorError("metric is not positive definite")
        elif n and np.min(np.linalg.eigvalsh(g)) <= 0:
            raise TensorError("metric is not positive definite")
        object.__setattr__(self, "structure", c)
        object.__setattr__(self, "metric", g)

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    @property
    def exact(self) -> bool:
        return is_exact(self.metric)

    @classmethod
    def from_brackets(cls, dim: int, entries, metric=None, exact: bool = True):
        """``entries`` holds ``(i, j, k, value)`` meaning ``[e_i, e_j]`` has ``value e_k``."""
        c = exact_zeros((dim, dim, dim)) if exact else np.zeros((dim, dim, dim))
        for i, j, k, v in entries:
            v = to_rational(v) if exact else float(v)
            if i == j and v != 0:
                raise TensorError(f"bracket [e_{i}, e_{i}] must vanish")
            c[k, i, j] += v
            c[k, j, i] -= v
        if metric is None:
            metric = np.eye(dim, dtype=int)
        metric = exact_array(metric) if exact else as_float(metric)
        return cls(c, metric)

    def bracket(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.structure, u, v)

    def geometry(self) -> FrameGeometry:
        return self._geometry

    @cached_property
    def _geometry(self) -> FrameGeometry:
        return FrameGeometry(frame.const(self.metric), self.structure)


def abelian(dim: int, exact: bool = True) -> LieAlgebraData:
    return LieAlgebraData.from_brackets(dim, [], exact=exact)


@dataclass(frozen=True)
class JacobiResult:
    ok: bool
    worst: tuple | None
    violation: Scalar


def jacobi_check(alg: LieAlgebraData, tol: float = 1e-12) -> JacobiResult:
    c = alg.structure
    jac = (np.einsum("mij,lmk->lijk", c, c) + np.einsum("mjk,lmi->lijk", c, c)
           + np.einsum("mki,lmj->lijk", c, c))
    worst, viol = None, max_abs(jac)
    if viol != 0:
        idx = max(np.ndindex(jac.shape), key=lambda t: abs(jac[t]))
        worst = tuple(int(x) for x in idx[1:])
    ok = viol == 0 if alg.exact else viol <= tol
    return JacobiResult(bool(ok), worst if not ok else None, viol)


def d_invariant_form(alg: LieAlgebraData, omega) -> FrameTensor:
    """Exterior derivative of a left-invariant form."""
    arr = omega.comp if isinstance(omega, FrameTensor) else np.asarray(omega)
    if arr.ndim >= 2 and not within(alternate(arr) - arr, 1e-12):
        raise TensorError("form is not alternating")
    out = frame.ext_d(frame.const(arr), alg.structure).val
    return FrameTensor(out, "l" * out.ndim)


@dataclass(frozen=True, eq=False)
class ConnectionData:
    """``gamma[k, i, j] = (nabla_{e_i} e_j)^k`` plus torsion and compatibility flags."""

    gamma: np.ndarray
    torsion: np.ndarray
    metric_compatible: bool
    torsion_free: bool


def connection_data(alg: LieAlgebraData, gamma: np.ndarray) -> ConnectionData:
    torsion = gamma - np.transpose(gamma, (0, 2, 1)) - alg.structure
    nabla_g = frame.connection_action(gamma, alg.metric, "ll")
    return ConnectionData(gamma, torsion, within(nabla_g, 1e-12), within(torsion, 1e-12))


def levi_civita(alg: LieAlgebraData) -> ConnectionData:
    return connection_data(alg, alg.geometry().gamma.val)


@dataclass(frozen=True, eq=False)
class CurvatureData:
    R: np.ndarray            # R[l, i, j, k] = (R(e_i, e_j) e_k)^l
    ric: np.ndarray
    Q: np.ndarray
    s: Scalar
    convention: str = CONVENTION


def curvature_from(gamma: np.ndarray, structure: np.ndarray, ginv: np.ndarray) -> CurvatureData:
    R = frame.curvature_tensor(frame.const(gamma), structure).val
    ric = np.einsum("iijk->jk", R)
    Q = ginv @ ric
    return CurvatureData(R, ric, Q, np.trace(Q))


def curvature(alg: LieAlgebraData, conn: ConnectionData) -> CurvatureData:
    geom = alg.geometry()
    return curvature_from(conn.gamma, alg.structure, geom.ginv.val)


def sectional(curv: CurvatureData, u, v, metric) -> Scalar:
    u = u.comp if isinstance(u, FrameTensor) else np.asarray(u)
    v = v.comp if isinstance(v, FrameTensor) else np.asarray(v)
    return frame.sectional(curv.R, np.asarray(metric), u, v)


def covariant_derivative(conn: ConnectionData, t: FrameTensor) -> FrameTensor:
    """Adds a lower slot in front: ``out[m, ...] = (nabla_{e_m} t)[...]``."""
    out = frame.connection_action(conn.gamma, t.comp, t.sig)
    return FrameTensor(out, "l" + t.sig)


def frame_vector(dim: int, i: int, exact: bool = True) -> np.ndarray:
    v = exact_zeros(dim) if exact else np.zeros(dim)
    v[i] = Q(1) if exact else 1.0
    return v


def as_field(arr) -> Field:
    return frame.const(np.asarray(arr))

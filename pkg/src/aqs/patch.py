"""Coordinate-patch geometry with second-order forward-mode jets.

Builtins are trivial circle bundles ``U x S^1`` over a Kaehler chart ``U``
with real coordinates ``(x_1..x_m, y_1..y_m, t)``, ``J d/dx_i = d/dy_i``,
connection form ``eta = dt + beta`` and metric ``g = k + eta (x) eta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import frame
from .frame import Field, FrameGeometry
from .lie import CurvatureData, curvature_from
from .tensor import TensorError


class Jet:
    """Value, gradient and Hessian of a scalar function at a point."""

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val: float, grad: np.ndarray, hess: np.ndarray):
        self.val = float(val)
        self.grad = grad
        self.hess = hess

    @classmethod
    def variable(cls, x: float, i: int, n: int) -> "Jet":
        g = np.zeros(n)
        g[i] = 1.0
        return cls(x, g, np.zeros((n, n)))

    @classmethod
    def constant(cls, x: float, n: int) -> "Jet":
        return cls(x, np.zeros(n), np.zeros((n, n)))

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(float(other), len(self.grad))

    def __add__(self, other):
        o = self._lift(other)
        return Jet(self.val + o.val, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            s = float(other)
            return Jet(self.val * s, self.grad * s, self.hess * s)
        cross = np.outer(self.grad, other.grad)
        return Jet(self.val * other.val,
                   self.grad * other.val + self.val * other.grad,
                   self.hess * other.val + self.val * other.hess + cross + cross.T)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        v = self.val
        if v == 0:
            raise ZeroDivisionError("reciprocal of a vanishing jet")
        return Jet(1 / v, -self.grad / v**2,
                   -self.hess / v**2 + 2 * np.outer(self.grad, self.grad) / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1 / float(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * float(other)

    def __pow__(self, p):
        p = float(p)
        v = self.val
        f1 = p * v ** (p - 1)
        f2 = p * (p - 1) * v ** (p - 2) if p != 1 else 0.0
        return Jet(v**p, f1 * self.grad, f1 * self.hess + f2 * np.outer(self.grad, self.grad))

    def __repr__(self):
        return f"Jet({self.val!r})"


def jets_to_field(data, n: int) -> Field:
    """Nested lists of jets (or plain numbers) to a float field with two derivative orders."""
    arr = np.asarray(data, dtype=object)
    val = np.zeros(arr.shape)
    d1 = np.zeros(arr.shape + (n,))
    d2 = np.zeros(arr.shape + (n, n))
    for idx in np.ndindex(arr.shape):
        x = arr[idx]
        if isinstance(x, Jet):
            val[idx], d1[idx], d2[idx] = x.val, x.grad, x.hess
        else:
            val[idx] = float(x)
    return Field(val, d1, d2)


@dataclass(frozen=True, eq=False)
class PatchGeometry:
    """A chart with a metric field given as a function of coordinate jets."""

    dim: int
    metric_fn: Callable
    domain: Callable[[np.ndarray], bool]
    samples: np.ndarray
    name: str = "patch"

    def coords(self, x) -> list[Jet]:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise TensorError(f"point must have {self.dim} coordinates")
        if not self.domain(x):
            raise PatchDomainError(f"point {x.tolist()} outside the domain of {self.name}")
        return [Jet.variable(x[i], i, self.dim) for i in range(self.dim)]

    def evaluate(self, fn: Callable, x) -> Field:
        return jets_to_field(fn(self.coords(x)), self.dim)

    def frame_geometry(self, x) -> FrameGeometry:
        g = self.evaluate(self.metric_fn, x)
        if not np.all(np.isfinite(g.val)):
            raise TensorError(f"metric not finite at {list(x)}")
        if np.min(np.linalg.eigvalsh(g.val)) <= 1e-12:
            raise TensorError(f"metric singular or indefinite at {list(x)}")
        return FrameGeometry(g, np.zeros((self.dim,) * 3))


class PatchDomainError(TensorError):
    pass


def christoffel_at(p: PatchGeometry, x) -> np.ndarray:
    """``gamma[k, i, j] = (nabla_{d_i} d_j)^k`` at ``x``."""
    return p.frame_geometry(x).gamma.val


def curvature_at(p: PatchGeometry, x) -> CurvatureData:
    geom = p.frame_geometry(x)
    return curvature_from_field(geom)


def curvature_from_field(geom: FrameGeometry) -> CurvatureData:
    R = geom.riemann.val
    ric = np.einsum("iijk->jk", R)
    Q = geom.ginv.val @ ric
    return CurvatureData(R, ric, Q, float(np.trace(Q)))


def d_form_at(p: PatchGeometry, omega_fn: Callable, x) -> Field:
    """Exterior derivative at ``x`` of a form given by its coordinate components."""
    w = p.evaluate(omega_fn, x)
    return frame.ext_d(w, np.zeros((p.dim,) * 3))


@dataclass(frozen=True, eq=False)
class PatchStructure:
    """Almost contact metric tensor fields over a patch."""

    patch: PatchGeometry
    phi_fn: Callable
    xi_fn: Callable
    eta_fn: Callable
    params: dict = field(default_factory=dict)

    def fields_at(self, x):
        p = self.patch
        return (p.frame_geometry(x), p.evaluate(self.phi_fn, x),
                p.evaluate(self.xi_fn, x), p.evaluate(self.eta_fn, x))

    @property
    def samples(self) -> np.ndarray:
        return self.patch.samples


def sample_points(dim: int, count: int, seed: int, box=1.0, accept=None) -> np.ndarray:
    """Deterministic scrambled-Halton points in ``[-box, box]^dim`` passing ``accept``."""
    sampler = qmc.Halton(d=dim, scramble=True, seed=seed)
    pts = []
    while len(pts) < count:
        for u in sampler.random(max(64, 2 * count)):
            x = (2 * u - 1) * box
            if accept is None or accept(x):
                pts.append(x)
                if len(pts) == count:
                    break
    return np.array(pts)


def _bundle(m: int, base_metric: Callable, beta: Callable, domain, samples, name, params):
    """Trivial circle bundle over a 2m-real-dimensional Kaehler chart."""
    dim = 2 * m + 1

    def eta_fn(u):
        return list(beta(u[:2 * m])) + [1.0]

    def metric_fn(u):
        k = base_metric(u[:2 * m])
        e = eta_fn(u)
        return [[(k[a][b] if a < 2 * m and b < 2 * m else 0.0) + e[a] * e[b]
                 for b in range(dim)] for a in range(dim)]

    def phi_fn(u):
        e = eta_fn(u)
        out = [[0.0] * dim for _ in range(dim)]
        for i in range(m):
            x, y = i, m + i
            # phi(d/dx) = d/dy - eta(d/dy) d/dt, phi(d/dy) = -d/dx + eta(d/dx) d/dt
            out[y][x] = 1.0
            out[dim - 1][x] = -e[y]
            out[x][y] = -1.0
            out[dim - 1][y] = e[x]
        return out

    def xi_fn(u):
        return [0.0] * (dim - 1) + [1.0]

    patch = PatchGeometry(dim, metric_fn, domain, samples, name)
    return patch, PatchStructure(patch, phi_fn, xi_fn, eta_fn, params)


def ball_metric(c: float, m: int) -> Callable:
    """Kaehler metric of constant holomorphic sectional curvature ``c < 0`` on the unit ball."""

    def metric(z):
        x, y = z[:m], z[m:]
        rho = 1.0 - sum(v * v for v in z)
        a = -4.0 / c * (rho ** -2)
        k = [[0.0] * (2 * m) for _ in range(2 * m)]
        for i in range(m):
            for j in range(m):
                re = a * (rho * float(i == j) + x[i] * x[j] + y[i] * y[j])
                im = a * (x[i] * y[j] - y[i] * x[j])
                k[i][j] = re
                k[m + i][m + j] = re
                k[i][m + j] = im
                k[m + i][j] = -1.0 * im
        return k

    return metric


def _check_c(c) -> float:
    c = float(Fraction(c)) if isinstance(c, (str, Fraction)) else float(c)
    if not c < 0:
        raise TensorError(f"curvature constant must be negative, got {c}")
    return c


def disc_beta(m: int, p: int) -> Callable:
    """``beta = sum_{i<=p} x_i dx_{n+i} - y_i dy_{n+i}`` with ``m = 2n``."""
    n = m // 2

    def beta(z):
        out = [0.0] * (2 * m)
        for i in range(p):
            out[n + i] = z[i]
            out[m + n + i] = -1.0 * z[m + i]
        return out

    return beta


def _in_ball(radius: float, m: int):
    return lambda x: float(np.sum(np.asarray(x[:2 * m]) ** 2)) < radius ** 2


def builtin_disc_bundle(c=-4, points: int = 32, seed: int = 0, omega: bool = True):
    """Circle bundle over the complex 2-ball of holomorphic curvature ``c``.

    Coordinates are ``(x1, x2, y1, y2, t)`` and ``beta = x1 dx2 - y1 dy2``;
    ``omega=False`` drops the connection term (product metric).
    """
    c = _check_c(c)
    m = 2
    beta = disc_beta(m, 1) if omega else (lambda z: [0.0] * (2 * m))
    samples = sample_points(2 * m + 1, points, seed, accept=_in_ball(0.9, m))
    name = "disc_bundle" if omega else "disc_product"
    return _bundle(m, ball_metric(c, m), beta, _in_ball(1.0, m), samples, name,
                   {"c": c, "points": points, "seed": seed, "omega": omega})


def builtin_disc_base(c=-1, points: int = 32, seed: int = 0):
    """The Kaehler 2-ball alone, with its complex structure matrix ``J``."""
    c = _check_c(c)
    m = 2
    samples = sample_points(2 * m, points, seed, accept=_in_ball(0.9, m))
    patch = PatchGeometry(2 * m, ball_metric(c, m), _in_ball(1.0, m), samples, "disc_base")
    J = np.zeros((2 * m, 2 * m))
    for i in range(m):
        J[m + i, i] = 1.0
        J[i, m + i] = -1.0
    return patch, J


def builtin_flat_disco(n: int = 1, p: int = 1, points: int = 32, seed: int = 0):
    """Circle bundle over flat ``C^{2n}`` with ``beta`` of rank ``4p``."""
    if not 1 <= p <= n:
        raise TensorError(f"need 1 <= p <= n, got n={n}, p={p}")
    m = 2 * n
    flat = lambda z: [[float(a == b) for b in range(2 * m)] for a in range(2 * m)]  # noqa: E731
    samples = sample_points(2 * m + 1, points, seed)
    return _bundle(m, flat, disc_beta(m, p), lambda x: True, samples, "flat_disco",
                   {"n": n, "p": p, "points": points, "seed": seed})


def disc_lambda_sq(c: float, x) -> float:
    """``lambda^2 = c^2 (1 - |z|^2)^3 / 64`` for the disc bundle."""
    rho = 1.0 - float(np.sum(np.asarray(x)[:4] ** 2))
    return c * c * rho**3 / 64.0

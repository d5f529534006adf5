"""Frame calculus shared by Lie-algebra and coordinate-patch hosts.

A ``Field`` is a tensor evaluated at one point together with its first and
second frame derivatives, stored on trailing axes: ``d1[..., m]`` is
``e_m(T)`` and ``d2[..., m, n]`` is ``e_n(e_m(T))``.  Left-invariant data on a
Lie algebra is marked ``const`` and carries no derivative arrays.

Covariant derivatives put the direction slot first: ``nabla[m, ...]`` is
``(nabla_{e_m} T)[...]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .tensor import Q, TensorError, alternate, inverse, is_exact, is_rational, zeros_like_mode

_SLOTS = "abcdefghijkl"


@dataclass(frozen=True, eq=False)
class Field:
    val: np.ndarray
    d1: np.ndarray | None = None
    d2: np.ndarray | None = None
    const: bool = False

    @property
    def order(self) -> int:
        if self.const or self.d2 is not None:
            return 2
        return 1 if self.d1 is not None else 0

    @property
    def exact(self) -> bool:
        return is_exact(self.val)

    def deriv(self, k: int, dim: int) -> np.ndarray:
        """Derivative array of order ``k`` (zeros for constant fields)."""
        if self.const:
            return zeros_like_mode(self.val.shape + (dim,) * k, self.exact)
        arr = self.d1 if k == 1 else self.d2
        if arr is None:
            raise TensorError(f"field carries no order-{k} derivatives")
        return arr

    def __add__(self, other: "Field") -> "Field":
        return _combine(self, other, 1)

    def __sub__(self, other: "Field") -> "Field":
        return _combine(self, other, -1)

    def __neg__(self) -> "Field":
        return self.scaled(-1)

    def scaled(self, s) -> "Field":
        return Field(self.val * s,
                     None if self.d1 is None else self.d1 * s,
                     None if self.d2 is None else self.d2 * s,
                     self.const)

    def truncate(self, order: int) -> "Field":
        if self.const or order >= self.order:
            return self
        return Field(self.val, self.d1 if order >= 1 else None, None)


def const(val) -> Field:
    return Field(np.asarray(val), const=True)


def _combine(a: Field, b: Field, sign: int) -> Field:
    val = a.val + b.val if sign > 0 else a.val - b.val
    if a.const and b.const:
        return Field(val, const=True)
    order = min(a.order, b.order)
    out = [val]
    for k in (1, 2):
        if order < k:
            out.append(None)
            continue
        parts = [f.d1 if k == 1 else f.d2 for f in (a, b)]
        if a.const:
            out.append(parts[1] * sign)
        elif b.const:
            out.append(parts[0])
        else:
            out.append(parts[0] + parts[1] * sign)
    return Field(out[0], out[1], out[2])


def einsum1(subs: str, f: Field) -> Field:
    """Apply a linear index map (transpose, trace, ...) to a field."""
    ins, out = subs.split("->")
    ext = f"{ins}...->{out}..."
    return Field(np.einsum(subs, f.val),
                 None if f.d1 is None else np.einsum(ext, f.d1),
                 None if f.d2 is None else np.einsum(ext, f.d2),
                 f.const)


def einsum2(subs: str, a: Field, b: Field) -> Field:
    """Bilinear contraction with the Leibniz rule through second order."""
    ins, out = subs.split("->")
    sa, sb = ins.split(",")
    val = np.einsum(subs, a.val, b.val)
    if a.const and b.const:
        return Field(val, const=True)
    order = min(a.order, b.order)
    d1 = d2 = None
    if order >= 1:
        parts = []
        if not a.const:
            parts.append(np.einsum(f"{sa}...,{sb}->{out}...", a.d1, b.val))
        if not b.const:
            parts.append(np.einsum(f"{sa},{sb}...->{out}...", a.val, b.d1))
        d1 = parts[0] if len(parts) == 1 else parts[0] + parts[1]
    if order >= 2:
        parts = []
        if not a.const:
            parts.append(np.einsum(f"{sa}...,{sb}->{out}...", a.d2, b.val))
        if not b.const:
            parts.append(np.einsum(f"{sa},{sb}...->{out}...", a.val, b.d2))
        if not a.const and not b.const:
            cross = np.einsum(f"{sa}Y,{sb}Z->{out}YZ", a.d1, b.d1)
            parts.append(cross + np.swapaxes(cross, -1, -2))
        d2 = parts[0]
        for p in parts[1:]:
            d2 = d2 + p
    return Field(val, d1, d2)


def field_inverse(g: Field) -> Field:
    """Matrix inverse with derivatives (first order suffices for Christoffels)."""
    inv = inverse(g.val)
    if g.const:
        return Field(inv, const=True)
    d1 = None
    if g.d1 is not None:
        d1 = -np.einsum("ab,bcm,cd->adm", inv, g.d1, inv)
    return Field(inv, d1)


def _half(exact: bool):
    return Q(1, 2) if exact else 0.5


def koszul_lower(metric: Field, bracket: np.ndarray) -> Field:
    """``K[i, j, k] = g(nabla_{e_i} e_j, e_k)`` from the Koszul formula."""
    half = _half(metric.exact)

    def koszul(dg, g):
        # dg[a, b, m] = e_m(g_ab)
        deriv = (np.einsum("jki->ijk", dg) + np.einsum("ikj->ijk", dg)
                 - np.einsum("ijk->ijk", dg))
        alg = (np.einsum("pij,pk->ijk", bracket, g)
               - np.einsum("pjk,pi->ijk", bracket, g)
               + np.einsum("pki,pj->ijk", bracket, g))
        return (deriv + alg) * half

    n = metric.val.shape[0]
    if metric.const:
        return Field(koszul(metric.deriv(1, n), metric.val), const=True)
    val = koszul(metric.d1, metric.val)
    d1 = None
    if metric.d2 is not None:
        d1 = np.stack([koszul(metric.d2[..., :, m], metric.d1[..., m]) for m in range(n)], axis=-1)
    return Field(val, d1)


@dataclass(frozen=True, eq=False)
class FrameGeometry:
    """Metric, Levi-Civita connection and brackets of a frame at one point."""

    metric: Field
    bracket: np.ndarray

    @property
    def dim(self) -> int:
        return self.metric.val.shape[0]

    @property
    def exact(self) -> bool:
        return self.metric.exact

    @cached_property
    def ginv(self) -> Field:
        return field_inverse(self.metric)

    @cached_property
    def gamma(self) -> Field:
        """``gamma[k, i, j] = (nabla_{e_i} e_j)^k``."""
        low = koszul_lower(self.metric, self.bracket)
        return einsum2("kl,ijl->kij", self.ginv, low)

    @cached_property
    def riemann(self) -> Field:
        return curvature_tensor(self.gamma, self.bracket)

    @cached_property
    def ricci(self) -> Field:
        return einsum1("iijk->jk", self.riemann)

    @cached_property
    def ricci_operator(self) -> Field:
        return einsum2("ab,bc->ac", self.ginv.truncate(0), self.ricci)

    @cached_property
    def scalar_curvature(self):
        return np.trace(self.ricci_operator.val)

    def lower(self, vec: np.ndarray) -> np.ndarray:
        return self.metric.val @ vec

    def inner(self, u: np.ndarray, v: np.ndarray):
        return u @ self.metric.val @ v


def _deriv_first(f: Field, n: int) -> np.ndarray:
    return np.moveaxis(f.deriv(1, n), -1, 0)


def connection_action(G: np.ndarray, T: np.ndarray, sig: str) -> np.ndarray:
    """Algebraic part of ``nabla_{e_m} T``; output has the direction first."""
    k = len(sig)
    letters = _SLOTS[:k]
    out = None
    for s, var in enumerate(sig):
        targ = letters[:s] + "y" + letters[s + 1:]
        if var == "u":
            term = np.einsum(f"{letters[s]}xy,{targ}->x{letters}", G, T)
        else:
            term = -np.einsum(f"yx{letters[s]},{targ}->x{letters}", G, T)
        out = term if out is None else out + term
    if out is None:
        out = zeros_like_mode((G.shape[0],), is_exact(T))
    return out


def covariant(t: Field, sig: str, gamma: Field) -> Field:
    """Covariant derivative; direction slot first, lower variance."""
    n = gamma.val.shape[0]
    if t.const and gamma.const:
        return Field(connection_action(gamma.val, t.val, sig), const=True)
    val = _deriv_first(t, n) + connection_action(gamma.val, t.val, sig)
    if t.order < 2 or gamma.order < 1:
        return Field(val)
    dG = gamma.deriv(1, n)
    dT = t.deriv(1, n)
    d2T = t.deriv(2, n)
    cols = []
    for m in range(n):
        dd = np.moveaxis(d2T[..., :, m], -1, 0)
        cols.append(dd + connection_action(dG[..., m], t.val, sig)
                    + connection_action(gamma.val, dT[..., m], sig))
    return Field(val, np.stack(cols, axis=-1))


def along(nabla_t: Field, vec: np.ndarray) -> np.ndarray:
    """Contract the direction slot (first) of a covariant derivative with ``vec``."""
    return np.tensordot(vec, nabla_t.val, axes=(0, 0))


def _ext_d_arrays(D: np.ndarray, w: np.ndarray, bracket: np.ndarray) -> np.ndarray:
    """``D[a0, a1..ak] = e_{a0}(w[a1..ak])``; returns the (k+1)-form."""
    k = w.ndim
    out = alternate(D) * (k + 1)
    if k >= 1:
        rest = _SLOTS[2:k + 1]
        B = np.einsum(f"pxy,p{rest}->xy{rest}", bracket, w)
        out = out - alternate(B) * ((k + 1) * k // 2)
    return out


def ext_d(w: Field, bracket: np.ndarray) -> Field:
    """Exterior derivative of a form field (determinant convention)."""
    n = bracket.shape[0]
    if w.const:
        zero = zeros_like_mode((n,) + w.val.shape, w.exact)
        return Field(_ext_d_arrays(zero, w.val, bracket), const=True)
    val = _ext_d_arrays(_deriv_first(w, n), w.val, bracket)
    if w.order < 2:
        return Field(val)
    cols = [_ext_d_arrays(np.moveaxis(w.d2[..., :, m], -1, 0), w.d1[..., m], bracket)
            for m in range(n)]
    return Field(val, np.stack(cols, axis=-1))


def vector_bracket(V: Field, W: Field, bracket: np.ndarray) -> np.ndarray:
    """``[V, W]`` at the point (value only)."""
    n = bracket.shape[0]
    out = np.einsum("kab,a,b->k", bracket, V.val, W.val)
    out = out + W.deriv(1, n) @ V.val - V.deriv(1, n) @ W.val
    return out


def lie_derivative(t: Field, sig: str, xi: Field, geom: FrameGeometry) -> np.ndarray:
    """``L_xi T`` at the point via a torsion-free connection."""
    nab_t = covariant(t, sig, geom.gamma)
    S = covariant(xi, "u", geom.gamma).val.T     # S[k, j] = (nabla_{e_j} xi)^k
    out = along(nab_t, xi.val)
    k = len(sig)
    letters = _SLOTS[:k]
    for s, var in enumerate(sig):
        targ = letters[:s] + "y" + letters[s + 1:]
        if var == "u":
            out = out - np.einsum(f"{letters[s]}y,{targ}->{letters}", S, t.val)
        else:
            out = out + np.einsum(f"y{letters[s]},{targ}->{letters}", S, t.val)
    return out


def curvature_tensor(gamma: Field, bracket: np.ndarray) -> Field:
    """``R[l, i, j, k] = (R(e_i, e_j) e_k)^l`` with ``R = [nabla, nabla] - nabla_[,]``."""
    G = gamma.val
    n = G.shape[0]
    alg = (np.einsum("lim,mjk->lijk", G, G) - np.einsum("ljm,mik->lijk", G, G)
           - np.einsum("mij,lmk->lijk", bracket, G))
    if gamma.const:
        return Field(alg, const=True)
    dG = gamma.deriv(1, n)
    return Field(np.einsum("ljki->lijk", dG) - np.einsum("likj->lijk", dG) + alg)


def sectional(R: np.ndarray, g: np.ndarray, u: np.ndarray, v: np.ndarray):
    """``K(u, v) = g(R(u,v)v, u) / (g(u,u) g(v,v) - g(u,v)^2)``."""
    gram = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
    if gram == 0 or (not is_rational(gram) and abs(gram) < 1e-14):
        raise TensorError("sectional curvature of a degenerate pair")
    num = u @ g @ np.einsum("lijk,i,j,k->l", R, u, v, v)
    return num / gram

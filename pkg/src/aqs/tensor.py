"""Scalars and dense frame tensors.

Two scalar backends share one interface: exact rationals (``gmpy2.mpq``
entries in object arrays, handed out as ``Fraction``) and doubles (``float64``
arrays).  Every tensor is a dense numpy array over a fixed frame.  Upper (contravariant) slots come
first in the array, so a (1,1) tensor ``M`` has ``M[k, i] = (M e_i)^k`` and a
(1,2) tensor ``T`` has ``T[k, i, j] = (T(e_i, e_j))^k``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
from gmpy2 import mpq as Q

QType = type(Q(0))
Scalar = Fraction | QType | float

EIG_OFFDIAG = 1e-12
EIG_CLUSTER = 1e-8


class TensorError(ValueError):
    pass


def is_rational(x) -> bool:
    return isinstance(x, (QType, Fraction))


def to_rational(x):
    """Exact conversion to the internal rational type; floats are refused."""
    if isinstance(x, QType):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TensorError(f"not a rational value: {x!r}")
    if isinstance(x, np.integer):
        return Q(int(x))
    if isinstance(x, Rational):
        return Q(int(x.numerator), int(x.denominator))
    if isinstance(x, str):
        try:
            return Q(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise TensorError(f"not a fraction string: {x!r}") from exc
    raise TensorError(f"not a rational value: {x!r}")


def to_fraction(x) -> Fraction:
    """Public exact value: a reduced ``Fraction``."""
    x = to_rational(x)
    return Fraction(int(x.numerator), int(x.denominator))


def exact_array(data) -> np.ndarray:
    a = np.asarray(data, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx in np.ndindex(a.shape):
        out[idx] = to_rational(a[idx])
    return out


def exact_zeros(shape) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Q(0))
    return out


def exact_eye(n: int) -> np.ndarray:
    out = exact_zeros((n, n))
    for i in range(n):
        out[i, i] = Q(1)
    return out


def is_exact(a: np.ndarray) -> bool:
    return np.asarray(a).dtype == object


def zeros_like_mode(shape, exact: bool) -> np.ndarray:
    return exact_zeros(shape) if exact else np.zeros(shape)


def eye_like_mode(n: int, exact: bool) -> np.ndarray:
    return exact_eye(n) if exact else np.eye(n)


def canonical(a: np.ndarray) -> np.ndarray:
    """Normalize exact arrays so every entry is an internal rational."""
    if not is_exact(a):
        return np.asarray(a, dtype=float)
    out = np.empty(a.shape, dtype=object)
    for idx in np.ndindex(a.shape):
        v = a[idx]
        out[idx] = v if isinstance(v, QType) else to_rational(v)
    return out


def max_abs(a) -> Scalar:
    a = np.asarray(a)
    if a.size == 0:
        return Q(0) if is_exact(a) else 0.0
    if is_exact(a):
        return max(abs(to_rational(v)) for v in a.flat)
    return float(np.max(np.abs(a)))


def within(diff, tol: float, scale=None) -> bool:
    """Zero test: exact arrays must vanish, floats use ``tol * max(1, scale)``."""
    diff = np.asarray(diff)
    if is_exact(diff):
        return all(v == 0 for v in diff.flat)
    s = 1.0 if scale is None else max(1.0, float(scale))
    return float(max_abs(diff)) <= tol * s


def as_float(a) -> np.ndarray:
    return np.asarray(np.asarray(a), dtype=float)


@dataclass(frozen=True, eq=False)
class FrameTensor:
    """Dense tensor over a frame; ``sig`` has one ``'u'``/``'l'`` per slot."""

    comp: np.ndarray
    sig: str

    def __post_init__(self):
        comp = np.asarray(self.comp)
        if comp.dtype != object:
            comp = np.asarray(comp, dtype=float)
        if comp.ndim != len(self.sig):
            raise TensorError(f"signature {self.sig!r} does not match {comp.ndim} slots")
        if set(self.sig) - {"u", "l"}:
            raise TensorError(f"bad signature {self.sig!r}")
        if comp.ndim and len(set(comp.shape)) != 1:
            raise TensorError(f"non-square component array {comp.shape}")
        if comp.dtype == object:
            comp = canonical(comp)
        object.__setattr__(self, "comp", comp)

    @property
    def dim(self) -> int:
        return self.comp.shape[0] if self.comp.ndim else 0

    @property
    def exact(self) -> bool:
        return is_exact(self.comp)

    def __eq__(self, other):
        if not isinstance(other, FrameTensor):
            return NotImplemented
        return (self.sig == other.sig and self.exact == other.exact
                and self.comp.shape == other.comp.shape
                and bool(np.all(self.comp == other.comp)))

    __hash__ = None

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"FrameTensor(sig={self.sig!r}, dim={self.dim}, {mode})"


def _same_kind(a: FrameTensor, b: FrameTensor):
    if a.dim != b.dim:
        raise TensorError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.exact != b.exact:
        raise TensorError("mixed scalar variants")


def add(a: FrameTensor, b: FrameTensor) -> FrameTensor:
    _same_kind(a, b)
    if a.sig != b.sig:
        raise TensorError(f"slot-variance mismatch: {a.sig} vs {b.sig}")
    return FrameTensor(a.comp + b.comp, a.sig)


def sub(a: FrameTensor, b: FrameTensor) -> FrameTensor:
    return add(a, scale(b, -1))


def scale(a: FrameTensor, s) -> FrameTensor:
    s = to_rational(s) if a.exact else float(s)
    return FrameTensor(a.comp * s, a.sig)


def tensor_product(a: FrameTensor, b: FrameTensor) -> FrameTensor:
    _same_kind(a, b)
    return FrameTensor(np.multiply.outer(a.comp, b.comp), a.sig + b.sig)


def contract(t: FrameTensor, i: int, j: int) -> FrameTensor:
    if i == j or {t.sig[i], t.sig[j]} != {"u", "l"}:
        raise TensorError("contraction needs one upper and one lower slot")
    comp = np.trace(t.comp, axis1=i, axis2=j)
    sig = "".join(s for k, s in enumerate(t.sig) if k not in (i, j))
    return FrameTensor(comp, sig)


def compose(a: FrameTensor, b: FrameTensor) -> FrameTensor:
    """Endomorphism composition ``a o b``."""
    _same_kind(a, b)
    if a.sig != "ul" or b.sig != "ul":
        raise TensorError("compose needs two (1,1) tensors")
    return FrameTensor(a.comp @ b.comp, "ul")


def alternate(arr: np.ndarray) -> np.ndarray:
    """Alternation with the 1/k! normalization (a projection)."""
    k = arr.ndim
    if k < 2:
        return arr.copy()
    total = None
    for perm in itertools.permutations(range(k)):
        term = np.transpose(arr, perm)
        if _perm_sign(perm) < 0:
            term = -term
        total = term if total is None else total + term
    n = math.factorial(k)
    return total * Q(1, n) if is_exact(arr) else total / n


def _perm_sign(perm) -> int:
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def antisymmetrize(t: FrameTensor) -> FrameTensor:
    if "u" in t.sig:
        raise TensorError("antisymmetrize needs all slots lower")
    return FrameTensor(alternate(t.comp), t.sig)


def wedge_arrays(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Determinant convention: a^b = (k+l)!/(k! l!) Alt(a (x) b)."""
    k, l = a.ndim, b.ndim
    coeff = math.factorial(k + l) // (math.factorial(k) * math.factorial(l))
    return alternate(np.multiply.outer(a, b)) * coeff


def wedge(a: FrameTensor, b: FrameTensor) -> FrameTensor:
    _same_kind(a, b)
    if "u" in a.sig + b.sig:
        raise TensorError("wedge needs forms")
    return FrameTensor(wedge_arrays(a.comp, b.comp), a.sig + b.sig)


def _as_matrix(m) -> np.ndarray:
    if isinstance(m, FrameTensor):
        m = m.comp
    m = np.asarray(m)
    if m.ndim != 2:
        raise TensorError(f"expected a two-slot tensor, got {m.ndim} slots")
    return m


def _bareiss_rank(m: np.ndarray) -> int:
    # scale each row to integers so the elimination stays in Z
    rows = []
    for r in m:
        fr = [to_rational(v) for v in r]
        den = math.lcm(*(int(f.denominator) for f in fr)) if fr else 1
        rows.append([int(f * den) for f in fr])
    nrow, ncol = len(rows), (len(rows[0]) if rows else 0)
    rank, prev = 0, 1
    for col in range(ncol):
        piv = next((r for r in range(rank, nrow) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        p = rows[rank][col]
        for r in range(rank + 1, nrow):
            for c in range(col + 1, ncol):
                rows[r][c] = (rows[r][c] * p - rows[r][col] * rows[rank][c]) // prev
            rows[r][col] = 0
        prev = p
        rank += 1
    return rank


def _float_rank(m: np.ndarray, tol: float) -> int:
    a = np.array(m, dtype=float)
    rank, largest = 0, None
    nrow, ncol = a.shape
    while rank < min(nrow, ncol):
        sub_ = np.abs(a[rank:, rank:])
        i, j = np.unravel_index(np.argmax(sub_), sub_.shape)
        pivot = sub_[i, j]
        if largest is None:
            largest = pivot
        if largest == 0 or pivot <= tol * largest:
            break
        i += rank
        j += rank
        a[[rank, i]] = a[[i, rank]]
        a[:, [rank, j]] = a[:, [j, rank]]
        a[rank + 1:] -= np.outer(a[rank + 1:, rank] / a[rank, rank], a[rank])
        rank += 1
    return rank


def matrix_rank(m, tol: float = 1e-9) -> int:
    """Exact: fraction-free elimination.  Float: full pivoting, pivots above tol x largest."""
    m = _as_matrix(m)
    if m.size == 0:
        return 0
    return _bareiss_rank(m) if is_exact(m) else _float_rank(m, tol)


def determinant(m) -> Scalar:
    m = _as_matrix(m)
    if not is_exact(m):
        return float(np.linalg.det(m.astype(float)))
    a = [[to_rational(v) for v in r] for r in m]
    n, det = len(a), Q(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Q(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def leading_minors(m) -> list[Scalar]:
    m = _as_matrix(m)
    return [determinant(m[:k, :k]) for k in range(1, m.shape[0] + 1)]


def _rref(rows: list[list]):
    rows = [r[:] for r in rows]
    pivots, r0 = [], 0
    ncol = len(rows[0]) if rows else 0
    for col in range(ncol):
        piv = next((r for r in range(r0, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[r0], rows[piv] = rows[piv], rows[r0]
        p = rows[r0][col]
        rows[r0] = [x / p for x in rows[r0]]
        for r in range(len(rows)):
            if r != r0 and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[r0])]
        pivots.append(col)
        r0 += 1
    return rows, pivots


def nullspace(m, tol: float = 1e-9) -> np.ndarray:
    """Columns spanning the kernel (exact RREF basis, or SVD basis for floats)."""
    m = _as_matrix(m)
    n = m.shape[1]
    if not is_exact(m):
        from scipy.linalg import null_space
        scale_ = max(1.0, float(max_abs(m)))
        return null_space(m.astype(float), rcond=tol * scale_ / max(scale_, 1e-300))
    rows, pivots = _rref([[to_rational(v) for v in r] for r in m])
    free = [c for c in range(n) if c not in pivots]
    basis = exact_zeros((n, len(free)))
    for k, f in enumerate(free):
        basis[f, k] = Q(1)
        for r, pc in enumerate(pivots):
            basis[pc, k] = -rows[r][f]
    return basis


def inverse(m) -> np.ndarray:
    m = _as_matrix(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise TensorError("inverse of a non-square matrix")
    if not is_exact(m):
        a = m.astype(float)
        if np.linalg.cond(a) > 1e13:
            raise TensorError("singular matrix")
        return np.linalg.inv(a)
    aug = [[to_rational(v) for v in r] + [Q(int(i == j)) for j in range(n)]
           for i, r in enumerate(m)]
    rows, pivots = _rref(aug)
    if pivots[:n] != list(range(n)):
        raise TensorError("singular matrix")
    return exact_array([r[n:] for r in rows])


@dataclass(frozen=True)
class SparseSolution:
    values: dict          # column -> value (free columns set to 0)
    nullity: int
    consistent: bool


def solve_sparse(rows, rhs, ncols: int) -> SparseSolution:
    """Exact Gauss-Jordan on rows given as ``{column: coefficient}`` dicts."""
    pivots: dict[int, tuple[dict, object]] = {}
    consistent = True
    for row, b in zip(rows, rhs):
        row = {c: to_rational(v) for c, v in row.items() if v != 0}
        b = to_rational(b)
        for c in [c for c in row if c in pivots]:
            f = row.get(c, 0)
            if f == 0:
                continue
            prow, pb = pivots[c]
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv == 0:
                    row.pop(k, None)
                else:
                    row[k] = nv
            b -= f * pb
        if not row:
            consistent = consistent and b == 0
            continue
        p = min(row)
        inv = 1 / row[p]
        row = {k: v * inv for k, v in row.items()}
        b *= inv
        for c, (prow, pb) in list(pivots.items()):
            f = prow.get(p, 0)
            if f == 0:
                continue
            for k, v in row.items():
                nv = prow.get(k, 0) - f * v
                if nv == 0:
                    prow.pop(k, None)
                else:
                    prow[k] = nv
            pivots[c] = (prow, pb - f * b)
        pivots[p] = (row, b)
    values = {c: pb for c, (_, pb) in pivots.items()}
    return SparseSolution(values, ncols - len(pivots), consistent)


@dataclass(frozen=True)
class SymSpectrum:
    """Real spectrum of a symmetric operator, clustered into multiplicities."""

    values: np.ndarray          # ascending, repeated by multiplicity
    vectors: np.ndarray         # columns, orthonormal in the metric used
    clusters: tuple             # ((value, multiplicity), ...)
    tol: float = EIG_CLUSTER

    @property
    def dim(self) -> int:
        return len(self.values)

    def matches(self, expected: dict, atol: float = 1e-10) -> bool:
        """Compare with ``{value: multiplicity}``."""
        if len(expected) != len(self.clusters):
            return False
        for (v, mult) in self.clusters:
            hits = [e for e in expected if abs(float(e) - v) <= atol]
            if len(hits) != 1 or expected[hits[0]] != mult:
                return False
        return True


def _jacobi(a: np.ndarray, max_sweeps: int = 100):
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    scale_ = max(1.0, float(np.max(np.abs(a)))) if n else 1.0
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= EIG_OFFDIAG * scale_:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1 / math.hypot(1.0, t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
                v = v @ rot
    else:
        raise TensorError("Jacobi iteration did not converge")
    return np.diag(a).copy(), v


def sym_eigen(m, sym_tol: float = 1e-9, metric=None) -> SymSpectrum:
    """Spectrum by cyclic Jacobi rotations.

    Without ``metric`` the matrix itself must be symmetric.  With a metric ``g``
    the input is a (1,1) operator that is g-self-adjoint; it is conjugated to a
    symmetric matrix through the Cholesky factor of ``g``.
    """
    m = as_float(_as_matrix(m))
    if metric is None:
        sym = m
    else:
        lower = np.linalg.cholesky(as_float(metric))
        sym = lower.T @ m @ np.linalg.inv(lower.T)
    asym = float(np.max(np.abs(sym - sym.T))) if sym.size else 0.0
    if asym > sym_tol * max(1.0, float(np.max(np.abs(sym))) if sym.size else 1.0):
        raise TensorError(f"matrix not symmetric (max asymmetry {asym:.3g})")
    vals, vecs = _jacobi((sym + sym.T) / 2)
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    if metric is not None:
        vecs = np.linalg.inv(lower.T) @ vecs
    clusters = []
    for x in vals:
        if clusters and abs(x - clusters[-1][0]) <= EIG_CLUSTER:
            v0, k = clusters[-1]
            clusters[-1] = ((v0 * k + x) / (k + 1), k + 1)
        else:
            clusters.append((float(x), 1))
    return SymSpectrum(vals, vecs, tuple(clusters))

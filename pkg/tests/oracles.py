"""Brute-force reference computations that share no code with the package.

Everything here works on nested lists of ``Fraction`` (or floats) with plain
loops, so agreement with the vectorized implementation is meaningful.
"""
from fractions import Fraction
from itertools import combinations, permutations

import numpy as np
import sympy
from sympy.combinatorics import Permutation


def frac(x):
    if isinstance(x, float):
        return x
    return Fraction(int(x.numerator), int(x.denominator)) if hasattr(x, "numerator") else Fraction(x)


def as_lists(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return frac(a.item())
    return [as_lists(v) for v in a]


def inverse(g):
    m = sympy.Matrix(len(g), len(g), lambda i, j: sympy.Rational(str(g[i][j])))
    inv = m.inv()
    return [[Fraction(str(inv[i, j])) for j in range(len(g))] for i in range(len(g))]


def _support(u):
    return [i for i, a in enumerate(u) if a]


def bracket(c, u, v):
    pairs = [(i, j) for i in _support(u) for j in _support(v)]
    return [sum(c[k][i][j] * u[i] * v[j] for i, j in pairs) for k in range(len(u))]


def inner(g, u, v):
    return sum(g[i][j] * u[i] * v[j] for i in _support(u) for j in _support(v))


def unit(n, i):
    return [Fraction(int(a == i)) for a in range(n)]


def koszul_gamma(c, g):
    """``gamma[k][i][j]`` with ``nabla_{e_i} e_j = gamma[k][i][j] e_k`` for a left-invariant metric."""
    n = len(g)
    E = [unit(n, i) for i in range(n)]
    low = [[[Fraction(1, 2) * (inner(g, bracket(c, E[i], E[j]), E[k])
                               - inner(g, bracket(c, E[j], E[k]), E[i])
                               + inner(g, bracket(c, E[k], E[i]), E[j]))
             for k in range(n)] for j in range(n)] for i in range(n)]
    gi = inverse(g)
    return [[[sum(gi[k][m] * low[i][j][m] for m in range(n)) for j in range(n)]
             for i in range(n)] for k in range(n)]


def nabla(gamma, i, v):
    n = len(v)
    return [sum(gamma[k][i][m] * v[m] for m in range(n)) for k in range(n)]


def nabla_dir(gamma, u, v):
    n = len(v)
    out = [0] * n
    for i in range(n):
        if u[i]:
            w = nabla(gamma, i, v)
            out = [a + u[i] * b for a, b in zip(out, w)]
    return out


def riemann(c, gamma):
    """``R[l][i][j][k] = (R(e_i, e_j) e_k)^l``."""
    n = len(c)
    E = [unit(n, i) for i in range(n)]
    R = [[[[0] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            cij = bracket(c, E[i], E[j])
            for k in range(n):
                a = nabla(gamma, i, nabla(gamma, j, E[k]))
                b = nabla(gamma, j, nabla(gamma, i, E[k]))
                d = nabla_dir(gamma, cij, E[k])
                for l in range(n):
                    R[l][i][j][k] = a[l] - b[l] - d[l]
    return R


def ricci(R):
    n = len(R)
    return [[sum(R[i][i][j][k] for i in range(n)) for k in range(n)] for j in range(n)]


def sectional(R, g, u, v):
    n = len(u)
    Ruvv = [sum(R[l][i][j][k] * u[i] * v[j] * v[k] for i in range(n) for j in range(n)
                for k in range(n)) for l in range(n)]
    return inner(g, Ruvv, u) / (inner(g, u, u) * inner(g, v, v) - inner(g, u, v) ** 2)


def d_invariant(c, omega, k):
    """Exterior derivative of a left-invariant ``k``-form given as a function on frame indices."""
    n = len(c)

    def d(*idx):
        total = 0
        for a, b in combinations(range(k + 1), 2):
            br = bracket(c, unit(n, idx[a]), unit(n, idx[b]))
            rest = [idx[m] for m in range(k + 1) if m not in (a, b)]
            val = sum(br[p] * omega(p, *rest) for p in range(n) if br[p])
            total += (-1) ** (a + b) * val
        return total

    return d


def wedge_value(alpha, k, beta, l, idx):
    """``(alpha ^ beta)(idx)`` by the determinant (shuffle) convention."""
    total = 0
    for perm in permutations(range(k + l)):
        if any(perm[i] > perm[i + 1] for i in range(k - 1)) or \
           any(perm[i] > perm[i + 1] for i in range(k, k + l - 1)):
            continue
        sign = Permutation(list(perm)).signature()
        total += sign * alpha(*[idx[p] for p in perm[:k]]) * beta(*[idx[p] for p in perm[k:]])
    return total


def nijenhuis(c, phi, xi, eta):
    """``N(e_i, e_j) = phi^2 [X,Y] + [phiX, phiY] - phi[phiX, Y] - phi[X, phiY] + d eta(X,Y) xi``."""
    n = len(c)

    def ap(m, v):
        return [sum(m[a][b] * v[b] for b in range(n)) for a in range(n)]

    N = [[[0] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            X, Y = unit(n, i), unit(n, j)
            pX, pY = ap(phi, X), ap(phi, Y)
            t = ap(phi, ap(phi, bracket(c, X, Y)))
            t = [a + b for a, b in zip(t, bracket(c, pX, pY))]
            t = [a - b for a, b in zip(t, ap(phi, bracket(c, pX, Y)))]
            t = [a - b for a, b in zip(t, ap(phi, bracket(c, X, pY)))]
            deta = -sum(eta[p] * bracket(c, X, Y)[p] for p in range(n))
            for k in range(n):
                N[k][i][j] = t[k] + deta * xi[k]
    return N


def rank(m) -> int:
    return sympy.Matrix([[sympy.Rational(str(v)) for v in r] for r in m]).rank()


def det(m):
    return Fraction(str(sympy.Matrix([[sympy.Rational(str(v)) for v in r] for r in m]).det()))


def fd_christoffel(metric_fn, x, h=1e-5):
    """Christoffel symbols of a coordinate metric by central differences."""
    x = np.asarray(x, dtype=float)
    n = len(x)

    def g(p):
        return np.array(metric_fn(list(p)), dtype=float)

    dg = np.zeros((n, n, n))          # dg[a, i, j] = d_a g_ij
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        dg[a] = (g(x + e) - g(x - e)) / (2 * h)
    gi = np.linalg.inv(g(x))
    low = 0.5 * (np.einsum("ijl->ijl", dg) + np.einsum("jil->ijl", dg) - np.einsum("lij->ijl", dg))
    return np.einsum("kl,ijl->kij", gi, low)

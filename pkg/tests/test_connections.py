from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from aqs.connections import (canonical_connection, contorsion_check, decomposition_check,
                             h_tensor, local_symmetry_probe, lower_first, nijenhuis_skew_defect,
                             nonnegative_curvature_probe, parallel_torsion_test, reconstruct_h)
from aqs.patch import builtin_disc_bundle, builtin_flat_disco
from aqs.quaternionic import build_weighted_heisenberg, skewed_frame_triple
from aqs.structures import (AcmStructure, KahlerFactor, abelian_cokahler, homothetic_deform,
                            product_with_kahler)
from aqs.tensor import TensorError


def heis(*w):
    return build_weighted_heisenberg(list(w))[1]


def h_oracle(s):
    """``H(e_i, e_j)`` by loops from ``eta(X) psi Y + eta(Y) psi X + g(X, psi Y) xi``."""
    psi = oracles.as_lists(s.psi.val)
    eta = oracles.as_lists(s.eta.val)
    xi = oracles.as_lists(s.xi.val)
    g = oracles.as_lists(s.g)
    n = len(xi)
    out = [[[0] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            psi_j = [psi[k][j] for k in range(n)]
            g_i_psi_j = sum(g[i][m] * psi_j[m] for m in range(n))
            for k in range(n):
                out[k][i][j] = eta[i] * psi[k][j] + eta[j] * psi[k][i] + g_i_psi_j * xi[k]
    return out


@pytest.mark.parametrize("weights", [(1,), (1, 2), (1, 1)])
def test_heisenberg_canonical_connection_is_flat_frame(weights):
    for s in heis(*weights).structures[:2]:
        c = canonical_connection(s)
        assert c.ok
        assert all(v == 0 for v in c.gamma_bar.ravel())
        assert oracles.as_lists(h_tensor(s)) == h_oracle(s)


def test_torsion_is_totally_skew_on_horizontal():
    s = heis(1, 2)[1]
    c = canonical_connection(s)
    Tl = lower_first(s.g, c.torsion)
    D = s.horizontal_basis
    TD = np.einsum("ijz,ia,jb,zc->abc", Tl, D, D, D)
    assert np.all(TD + np.transpose(TD, (0, 2, 1)) == 0)
    assert contorsion_check(s, c.H, c.torsion).ok


def test_rejects_non_aqs():
    s = heis(1, 2)[2]
    with pytest.raises(TensorError):
        canonical_connection(s)
    # H only sees (psi, xi, eta, g), which phi3 shares with phi1
    c = canonical_connection(s, require_aqs=False)
    assert np.all(c.gamma_bar == canonical_connection(heis(1, 2)[0]).gamma_bar)


@given(st.fractions(min_value=Fraction(1, 4), max_value=4, max_denominator=6))
def test_homothetic_deformation_keeps_canonical_connection(lam):
    d = homothetic_deform(heis(1)[0], lam)
    c = canonical_connection(d)
    assert c.ok and parallel_torsion_test(c).ok
    r = reconstruct_h(d)
    assert r.unique and r.matches_formula.ok


def test_nijenhuis_is_not_a_three_form_for_aqs():
    assert nijenhuis_skew_defect(heis(1)[0]) == 4
    assert nijenhuis_skew_defect(abelian_cokahler()) == 0


def test_reconstruction_exact_and_float():
    for s in [heis(1, 2)[0], abelian_cokahler(5),
              product_with_kahler(heis(1)[0], KahlerFactor.standard(2))]:
        r = reconstruct_h(s)
        assert r.unique and r.consistent and r.matches_formula.ok
    s = skewed_frame_triple((1,), seed=3)[1].with_tol(1e-8)
    r = reconstruct_h(s)
    assert r.unique and r.matches_formula.ok


def test_parallel_torsion_routes():
    assert parallel_torsion_test(canonical_connection(heis(1, 2)[0])).ok
    _, ps = builtin_disc_bundle(-4, points=3)
    for x in ps.samples:
        c = canonical_connection(AcmStructure.on_patch(ps, x))
        assert c.ok
        assert not parallel_torsion_test(c).ok
    _, fd = builtin_flat_disco(1, 1, points=3)
    for x in fd.samples:
        assert parallel_torsion_test(canonical_connection(AcmStructure.on_patch(fd, x))).ok


@pytest.mark.parametrize("weights,aqs_dim,kahler_dim,eigs", [
    ((1,), 5, 0, [1]),
    ((1, 2), 9, 0, [1, 4]),
    ((1, 0), 5, 4, [1]),
    ((2, 0, 1), 9, 4, [1, 4]),
])
def test_decomposition(weights, aqs_dim, kahler_dim, eigs):
    d = decomposition_check(heis(*weights)[0])
    assert d.ok
    assert (d.aqs.dim, d.kahler.dim) == (aqs_dim, kahler_dim)
    assert sorted(b.eigenvalue for b in d.eigen_blocks) == eigs
    assert all(b.dim == 5 and b.bracket_closed and b.nabla_closed for b in d.eigen_blocks)


def test_decomposition_of_cokahler_is_all_kahler():
    d = decomposition_check(abelian_cokahler(5))
    assert d.ok and d.kahler.dim == 4 and d.aqs.dim == 1


def test_probes():
    sym = local_symmetry_probe(heis(1)[0].host)
    assert not sym.locally_symmetric and sym.witness is not None
    assert local_symmetry_probe(abelian_cokahler().host).locally_symmetric
    pr = nonnegative_curvature_probe(heis(1, 2)[0])
    i, j, K = pr.witness
    assert pr.found and K < 0 and len(pr.values) > 0
    with pytest.raises(TensorError):
        nonnegative_curvature_probe(abelian_cokahler())
    with pytest.raises(TensorError):
        nonnegative_curvature_probe(heis(1)[2])
    _, ps = builtin_disc_bundle(-4, points=1)
    with pytest.raises(TensorError):
        nonnegative_curvature_probe(AcmStructure.on_patch(ps, ps.samples[0]))

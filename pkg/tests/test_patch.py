import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from aqs.lie import sectional
from aqs.patch import (Jet, PatchDomainError, builtin_disc_base, builtin_disc_bundle,
                       builtin_flat_disco, christoffel_at, curvature_at, d_form_at,
                       disc_lambda_sq, sample_points)
from aqs.structures import AcmStructure, psi_spectrum, validate
from aqs.tensor import TensorError

coord = st.floats(-0.6, 0.6, allow_nan=False)


def f_jet(x, y):
    return (x * y + 2.0) / (1.0 + x * x) - y ** 3 + (x - y) ** -2


def f_num(p):
    x, y = p
    return (x * y + 2.0) / (1.0 + x * x) - y ** 3 + (x - y) ** -2


@given(coord, coord)
def test_jet_matches_finite_differences(x, y):
    if abs(x - y) < 0.2:
        return
    j = f_jet(Jet.variable(x, 0, 2), Jet.variable(y, 1, 2))
    p, h = np.array([x, y]), 1e-4
    grad = [(f_num(p + h * e) - f_num(p - h * e)) / (2 * h) for e in np.eye(2)]
    hess = [[(f_num(p + h * a + h * b) - f_num(p + h * a - h * b)
              - f_num(p - h * a + h * b) + f_num(p - h * a - h * b)) / (4 * h * h)
             for b in np.eye(2)] for a in np.eye(2)]
    assert np.isclose(j.val, f_num(p))
    assert np.allclose(j.grad, grad, rtol=1e-6, atol=1e-6)
    assert np.allclose(j.hess, hess, rtol=1e-4, atol=1e-4)


@pytest.mark.parametrize("c", [-1, -4])
def test_christoffel_matches_finite_differences(c):
    patch, _ = builtin_disc_bundle(c, points=4, seed=3)
    for x in patch.samples:
        want = oracles.fd_christoffel(patch.metric_fn, x)
        assert np.allclose(christoffel_at(patch, x), want, atol=1e-7)


@pytest.mark.parametrize("c", [-1, -2.5, -8])
def test_ball_has_constant_holomorphic_curvature(c):
    patch, J = builtin_disc_base(c, points=6, seed=2)
    rng = np.random.default_rng(0)
    for x in patch.samples:
        curv = curvature_at(patch, x)
        g = patch.frame_geometry(x).metric.val
        X = rng.normal(size=4)
        assert np.isclose(float(sectional(curv, X, J @ X, g)), c, rtol=1e-8)


def test_domain_and_parameter_errors():
    patch, _ = builtin_disc_bundle(-4, points=2)
    with pytest.raises(PatchDomainError):
        christoffel_at(patch, [0.9, 0.5, 0.0, 0.0, 0.0])
    with pytest.raises(TensorError):
        christoffel_at(patch, [0.0, 0.0])
    with pytest.raises(TensorError):
        builtin_disc_bundle(0)
    with pytest.raises(TensorError):
        builtin_flat_disco(1, 2)


def test_samples_deterministic_and_inside():
    a = sample_points(5, 16, seed=7)
    b = sample_points(5, 16, seed=7)
    assert np.array_equal(a, b) and a.shape == (16, 5)
    assert not np.array_equal(a, sample_points(5, 16, seed=8))
    _, ps = builtin_disc_bundle(-1, points=32)
    assert np.all(np.sum(ps.samples[:, :4] ** 2, axis=1) < 0.81)


def test_structure_fields_are_acm_everywhere():
    _, ps = builtin_disc_bundle(-4, points=8)
    for x in ps.samples:
        assert validate(AcmStructure.on_patch(ps, x, tol=1e-10)).ok


@pytest.mark.parametrize("c", [-1, -4, -8])
def test_disc_spectrum_formula(c):
    _, ps = builtin_disc_bundle(c, points=6, seed=5)
    for x in ps.samples:
        lam2 = disc_lambda_sq(c, x)
        spec = psi_spectrum(AcmStructure.on_patch(ps, x))
        assert spec.matches({0.0: 1, -lam2: 4}, atol=1e-9 * max(1, lam2))


def test_d_eta_is_closed_horizontal_form():
    patch, ps = builtin_disc_bundle(-4, points=3)
    for x in patch.samples:
        deta = d_form_at(patch, ps.eta_fn, x).val
        # beta = x1 dx2 - y1 dy2 so d eta = dx1^dx2 - dy1^dy2
        want = np.zeros((5, 5))
        want[0, 1], want[1, 0], want[2, 3], want[3, 2] = 1, -1, -1, 1
        assert np.allclose(deta, want)


def test_flat_disco_rank():
    _, ps = builtin_flat_disco(2, 1, points=3)
    s = AcmStructure.on_patch(ps, ps.samples[0])
    spec = psi_spectrum(s)
    assert spec.matches({0.0: 5, -0.25: 4})

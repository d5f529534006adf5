from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from aqs.patch import _bundle, builtin_disc_bundle, builtin_flat_disco
from aqs.quaternionic import build_weighted_heisenberg, hypo_sl2_aff, skewed_frame_triple
from aqs.structures import (AcmStructure, KahlerFactor, RankNotConstant, abelian_cokahler,
                            aqs_structure_equation, cg_membership, classify, classify_patch,
                            closed_triplet_check, consistency_violations,
                            constant_curvature_check, derived_operators, eta_einstein_fit,
                            gqs_and_transverse_checks, gqs_direct, homothetic_deform,
                            homothety_relations, identity_suite, nabla_Psi_lemma, nijenhuis,
                            product_with_kahler, rank_of_eta, validate)
from aqs.tensor import TensorError, exact_array


def heis(*w):
    return build_weighted_heisenberg(list(w))[1]


def exact_fixtures():
    t = heis(1, 2)
    return [t[0], t[1], t[2], heis(1, 1)[2], abelian_cokahler(5), hypo_sl2_aff()[0],
            hypo_sl2_aff()[2], heis(1, 0)[0]]


def test_validate_reports_broken_axioms():
    s = heis(1)[0]
    assert validate(s).ok
    phi = s.phi.val.copy()
    phi[1, 2] += 1
    bad = AcmStructure.on_lie(s.host, phi, s.xi.val, s.eta.val)
    res = validate(bad)
    assert not res.ok and "phi_squared" in res.failed
    eta = s.eta.val * 2
    assert "eta_xi" in validate(AcmStructure.on_lie(s.host, s.phi.val, s.xi.val, eta)).failed


@pytest.mark.parametrize("idx", range(8))
def test_nijenhuis_matches_oracle(idx):
    s = exact_fixtures()[idx]
    c = oracles.as_lists(s.host.structure)
    want = oracles.nijenhuis(c, oracles.as_lists(s.phi.val), oracles.as_lists(s.xi.val),
                             oracles.as_lists(s.eta.val))
    assert oracles.as_lists(nijenhuis(s)) == want


def test_heisenberg_classification():
    t = heis(1, 2)
    for s in t.structures[:2]:
        r = classify(s)
        assert r["anti_quasi_sasakian"] and r["anti_normal"] and not r["normal"]
        assert r["cg_C10+C11"] and not r["cg_C6+C7"]
        assert r["deta_phi_anti_invariant"] and not r["deta_phi_invariant"]
        assert not r.inconsistencies
    r3 = classify(t[2])
    assert r3["quasi_sasakian"] and r3["cg_C6+C7"] and not r3["sasakian"]
    assert classify(heis(1, 1)[2])["sasakian"] and classify(heis(1, 1)[2])["k_contact"]


def test_cokahler_is_both():
    r = classify(abelian_cokahler(7))
    assert r["cokahler"] and r["quasi_sasakian"] and r["anti_quasi_sasakian"] and r["deta_zero"]
    with pytest.raises(TensorError):
        abelian_cokahler(4)


def test_hypo_fixture_is_gqs_but_not_transversely_kahler():
    t = hypo_sl2_aff()
    r1 = classify(t[0])
    assert r1["generalized_quasi_sasakian"] and not r1["transversely_kahler"]
    assert r1["cg_C10+C11"] and not r1["anti_quasi_sasakian"]
    assert not r1["lie_xi_phi_zero"]
    assert classify(t[2])["sasakian"]


@pytest.mark.parametrize("idx", range(8))
def test_gqs_direct_matches_table_identity(idx):
    s = exact_fixtures()[idx]
    g = gqs_and_transverse_checks(s)
    assert bool(gqs_direct(s).ok) == bool(g["table2_identity"].ok)
    assert not classify(s).inconsistencies


def test_consistency_rules_fire():
    flags = classify(heis(1)[0]).flags.copy()
    assert consistency_violations(flags) == []
    flags["cg_C10+C11"] = False
    assert consistency_violations(flags) == ["anti_quasi_sasakian implies C10+C11"]


def test_rank_reports():
    r = rank_of_eta(heis(1, 2)[0])
    assert (r.p, r.q, r.rk, r.dim_E) == (2, 0, 9, 0)
    r = rank_of_eta(heis(1, 0)[0])
    assert (r.p, r.q, r.rk, r.dim_E) == (1, 2, 5, 4)
    r = rank_of_eta(abelian_cokahler(5))
    assert r.p == 0 and r.rk == 1


def test_structure_equation_and_derived_operators():
    s = heis(1, 2)[0]
    eq = aqs_structure_equation(s)
    assert all(c.ok for c in eq.values())
    d = derived_operators(s)
    assert d.route_gap_A == 0 and d.route_gap_psi == 0 and d.kernel_matches
    assert all(c.ok for c in closed_triplet_check(s).values())
    # the two routes only need xi Killing, so the quasi-Sasakian phi3 agrees too
    d3 = derived_operators(heis(1, 2)[2])
    assert d3.route_gap_A == 0 and d3.route_gap_psi == 0


@given(st.fractions(min_value=Fraction(1, 5), max_value=5))
def test_homothety_preserves_aqs(lam):
    s = heis(1)[0]
    d = homothetic_deform(s, lam)
    assert classify(d)["anti_quasi_sasakian"]
    assert all(c.ok for c in homothety_relations(s, d, lam).values())


def test_homothety_rejects_nonpositive():
    with pytest.raises(TensorError):
        homothetic_deform(heis(1)[0], 0)


def test_product_with_flat_kahler():
    k = KahlerFactor.standard(4)
    assert k.check().ok
    p = product_with_kahler(heis(1)[0], k)
    r = classify(p)
    assert p.dim == 9 and r["anti_quasi_sasakian"]
    rk = rank_of_eta(p)
    assert (rk.p, rk.q) == (1, 2)


def test_eta_einstein_and_constant_curvature_negative_cases():
    s = heis(1, 2)[0]
    fit = eta_einstein_fit(s)
    assert not fit.eta_einstein and fit.residual > 0
    v = constant_curvature_check(s)
    assert not v.constant and v.theorem_holds
    v = constant_curvature_check(abelian_cokahler(5))
    assert v.constant and v.kappa == 0


@pytest.mark.parametrize("weights", [(1,), (1, 2), (2, 3)])
def test_identity_suite_exact(weights):
    for s in heis(*weights).structures[:2]:
        bad = [k for k, c in identity_suite(s).items() if not c.ok]
        assert not bad
        assert all(c.ok for c in nabla_Psi_lemma(s).values())


@given(st.integers(0, 10_000), st.floats(0.01, 0.2))
def test_identity_suite_invariant_under_frame_change(seed, eps):
    t = skewed_frame_triple((1,), eps=eps, seed=seed)
    s = t[0].with_tol(1e-8)
    assert validate(s).ok
    r = classify(s)
    assert r["anti_quasi_sasakian"] and not r["normal"]
    assert all(c.ok for c in identity_suite(s).values())


def test_cg_membership_keys():
    m = cg_membership(heis(1)[2])
    assert m["C6+C7"].ok and not m["C10+C11"].ok


def test_classify_patch_disc_and_rank_change():
    _, ps = builtin_disc_bundle(-4, points=6)
    rep = classify_patch(ps, tol=1e-8)
    assert rep["anti_quasi_sasakian"] and rep.points == 6 and rep.rank.p == 1
    _, fd = builtin_flat_disco(1, 1, points=4)
    assert classify_patch(fd)["anti_quasi_sasakian"]

    flat = lambda z: [[float(a == b) for b in range(4)] for a in range(4)]  # noqa: E731

    def beta(z):
        return [0.0, z[0] * z[0], 0.0, 0.0]

    samples = np.array([[0.0, 0.1, 0.2, 0.3, 0.0], [0.5, 0.1, 0.2, 0.3, 0.0]])
    _, bent = _bundle(2, flat, beta, lambda x: True, samples, "bent", {})
    with pytest.raises(RankNotConstant):
        classify_patch(bent)


def test_exact_inputs_reject_floats():
    alg = heis(1)[0].host
    with pytest.raises(TensorError):
        AcmStructure.on_lie(alg, np.eye(5) * 0.5, exact_array([1, 0, 0, 0, 0]),
                            exact_array([1, 0, 0, 0, 0]))

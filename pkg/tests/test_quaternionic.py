from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aqs.quaternionic import (SpnTriple, build_weighted_heisenberg, double_aqs_check,
                              flat_triple, heisenberg_algebra, hypo_sl2_aff, hypo_su2_check,
                              k1_promote, lemma_cmd_check, quaternionic_check,
                              skewed_frame_triple, structure_equations_check, two_imply_third)
from aqs.structures import abelian_cokahler, classify
from aqs.lie import jacobi_check
from aqs.tensor import TensorError

weights = st.lists(st.fractions(min_value=Fraction(1, 3), max_value=3, max_denominator=4),
                   min_size=1, max_size=2)


@given(weights)
def test_weighted_heisenberg_triple_properties(w):
    alg, t = build_weighted_heisenberg(w)
    assert jacobi_check(alg).ok
    assert quaternionic_check(t).ok
    assert lemma_cmd_check(t).ok
    eqs = structure_equations_check(t)
    assert two_imply_third(eqs)
    all_one = all(x == 1 for x in w)
    assert double_aqs_check(t).ok == all_one
    assert all(c.ok for c in eqs.values()) == all_one
    assert classify(t[0])["anti_quasi_sasakian"] and classify(t[1])["anti_quasi_sasakian"]


def test_double_aqs_consequences():
    d = double_aqs_check(build_weighted_heisenberg([1, 1])[1])
    assert d.ok and all(d.consequences.values())
    d = double_aqs_check(build_weighted_heisenberg([1, 2])[1])
    assert not d.ok and d.consequences is None and not d.checks["deta_2Phi3"].ok


def test_triple_requires_shared_data():
    t = build_weighted_heisenberg([1])[1]
    with pytest.raises(TensorError):
        SpnTriple((t[0], t[1]))
    with pytest.raises(TensorError):
        SpnTriple((t[0], t[1], abelian_cokahler(5)))
    with pytest.raises(TensorError):
        heisenberg_algebra([])


def test_quaternionic_failure_is_reported():
    t = build_weighted_heisenberg([1])[1]
    swapped = SpnTriple((t[1], t[0], t[2]))
    q = quaternionic_check(swapped)
    assert not q.ok and q.failed


def test_heisenberg_hypo_and_calabi_yau():
    h = hypo_su2_check(build_weighted_heisenberg([1])[1])
    assert h.su2_compatible.ok and h.volume_nonzero
    assert h.k_contact_hypo and h.contact_calabi_yau
    h2 = hypo_su2_check(build_weighted_heisenberg([2])[1])
    assert not h2.k_contact_hypo and not h2.contact_calabi_yau
    assert not h2.hypo["deta=-2omega3"].ok
    with pytest.raises(TensorError):
        hypo_su2_check(build_weighted_heisenberg([1, 1])[1])


def test_hypo_not_calabi_yau_fixture():
    t = hypo_sl2_aff()
    assert jacobi_check(t[0].host).ok
    h = hypo_su2_check(t)
    assert h.su2_compatible.ok and h.k_contact_hypo and not h.contact_calabi_yau
    assert not h.lie_xi_phi1_zero.ok
    r = classify(t[0])
    assert r["generalized_quasi_sasakian"] and not r["transversely_kahler"]
    assert r["cg_C10+C11"]
    assert classify(t[2])["sasakian"]
    eqs = structure_equations_check(t)
    assert eqs["iii"].ok and not eqs["i"].ok and not eqs["ii"].ok


def test_k1_promotion():
    s = build_weighted_heisenberg([1])[1][0]
    p = k1_promote(s)
    assert p.quaternionic.ok and p.double.ok
    assert set(p.orientation) == {"A", "phi", "psi"}
    with pytest.raises(TensorError):
        k1_promote(build_weighted_heisenberg([1, 2])[1][0])


def test_flat_triple_is_cokahler_not_double():
    t = flat_triple(1)
    assert quaternionic_check(t).ok and not double_aqs_check(t).ok
    assert all(classify(s)["cokahler"] for s in t.structures)


def test_skewed_triple_matches_exact_invariants():
    ex = build_weighted_heisenberg([1, 2])[1]
    fl = skewed_frame_triple((1, 2), eps=0.15, seed=4)
    assert quaternionic_check(fl).ok
    for a, b in zip(ex.structures, fl.structures):
        ra, rb = classify(a), classify(b.with_tol(1e-8))
        assert ra.flags == rb.flags
    assert np.isclose(float(fl[0].psi_norm_sq), float(ex[0].psi_norm_sq))

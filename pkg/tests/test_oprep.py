import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modnr import calg
from modnr.harness import gen_operator
from modnr.hmodule import inner_product, random_frame
from modnr.oprep import (ModuleOperator, adjoint, amplify, identity_operator, imag_part,
                         is_nilpotent2, is_normal, is_self_adjoint, left_mult, op_norm,
                         real_part, spectral_radius, zero_operator)

shapes = st.sampled_from([([2], 1), ([3], 2), ([2, 3], 2), ([1, 2], 3)])


def eig_radius(t):
    return max(np.abs(np.linalg.eigvals(np.asarray(b))).max() for b in t.blocks)


@settings(max_examples=40, deadline=None)
@given(shape=shapes, seed=st.integers(0, 2**32 - 1))
def test_adjoint_relation(shape, seed):
    sig, k = shape
    rng = np.random.default_rng(seed)
    t = gen_operator(sig, k, "generic", rng)
    x, y = random_frame(sig, k, rng), random_frame(sig, k, rng)
    assert inner_product(t @ x, y).allclose(inner_product(x, adjoint(t) @ y))


@settings(max_examples=40, deadline=None)
@given(shape=shapes, seed=st.integers(0, 2**32 - 1))
def test_c_star_identity_on_operators(shape, seed):
    t = gen_operator(*shape, "generic", seed)
    assert op_norm(adjoint(t) @ t) == pytest.approx(op_norm(t) ** 2, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(shape=shapes, seed=st.integers(0, 2**32 - 1))
def test_spectral_radius_matches_eigenvalues(shape, seed):
    t = gen_operator(*shape, "generic", seed)
    assert spectral_radius(t) == pytest.approx(eig_radius(t), abs=1e-6)
    assert spectral_radius(t) <= op_norm(t) + 1e-12


def test_spectral_radius_lemma_element(lemma):
    # eigenvalues of a are {1, 0}
    assert spectral_radius(lemma["T2"]) == pytest.approx(1.0, abs=1e-6)
    assert spectral_radius(lemma["T1"]) == 0.0


def test_spectral_radius_large_and_small_scales():
    m = np.array([[3.0, 1.0], [0.0, -2.0]])
    for s in (1e-150, 1.0, 1e150):
        t = ModuleOperator.from_matrix(s * m)
        assert spectral_radius(t) == pytest.approx(3 * s, rel=1e-6)


def test_spectral_radius_rejects_nan():
    t = ModuleOperator.from_matrix(np.array([[np.nan, 0], [0, 1]]))
    with pytest.raises(ValueError):
        spectral_radius(t)


def test_nilpotent_spectral_radius_zero():
    for seed in range(20):
        t = gen_operator([2, 3], 2, "nilpotent2", seed)
        assert spectral_radius(t) <= 1e-6 * op_norm(t)


def test_left_mult_is_star_homomorphism(rng):
    a, b = calg.random_element([2, 3], rng), calg.random_element([2, 3], rng)
    for k in (1, 2):
        la, lb = left_mult(a, k), left_mult(b, k)
        lab = left_mult(a * b, k)
        for p, q in zip((la @ lb).blocks, lab.blocks):
            np.testing.assert_allclose(p, q, atol=1e-12)
        for p, q in zip(adjoint(la).blocks, left_mult(calg.adjoint(a), k).blocks):
            np.testing.assert_allclose(p, q, atol=1e-12)
        assert op_norm(la) == pytest.approx(calg.norm(a), rel=1e-12)


def test_left_mult_acts_slotwise(rng):
    a = calg.random_element([2], rng)
    x = random_frame([2], 3, rng)
    y = left_mult(a, 3) @ x
    for i in range(3):
        assert y.component(i).allclose(a * x.component(i))


def test_real_imag_parts(rng):
    t = gen_operator([2, 3], 2, "generic", rng)
    re, im = real_part(t), imag_part(t)
    assert is_self_adjoint(re) and is_self_adjoint(im)
    back = re + im * 1j
    for p, q in zip(back.blocks, t.blocks):
        np.testing.assert_allclose(p, q, atol=1e-14)


@pytest.mark.parametrize("kind,pred", [("selfadjoint", is_self_adjoint), ("normal", is_normal),
                                       ("nilpotent2", is_nilpotent2)])
def test_predicates_on_families(kind, pred):
    for seed in range(10):
        assert pred(gen_operator([2, 3], 2, kind, seed), tol=1e-10)
    assert not pred(gen_operator([3], 2, "generic", 0), tol=1e-10)


def test_amplify_preserves_norm_and_radius(rng):
    t = gen_operator([2, 3], 2, "generic", rng)
    amp = amplify(t, 3)
    assert amp.k == 6
    assert op_norm(amp) == pytest.approx(op_norm(t), rel=1e-12)
    assert spectral_radius(amp) == pytest.approx(spectral_radius(t), abs=1e-9)
    with pytest.raises(ValueError):
        amplify(t, 0)


def test_identity_and_zero():
    assert op_norm(identity_operator([2, 3], 2)) == 1.0
    assert op_norm(zero_operator([2, 3], 2)) == 0.0
    assert spectral_radius(zero_operator([2], 1)) == 0.0


def test_shape_mismatch_raises():
    with pytest.raises(ValueError):
        identity_operator([2], 1) + identity_operator([2], 2)
    with pytest.raises(ValueError):
        ModuleOperator(calg.AlgebraSignature((2,)), 2, (np.eye(2),))

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsparq.kernels import JITTER, KernelSpec, cross, evaluate, gram

FAMILIES = [KernelSpec.matern(0.5, 0.3), KernelSpec.matern(1.5, 0.3),
            KernelSpec.matern(2.5, 0.3), KernelSpec.se(0.3)]

coord = st.floats(-3, 3, allow_nan=False)
point = st.lists(coord, min_size=2, max_size=2).map(np.array)


def test_zero_lag_equals_output_scale():
    assert evaluate(KernelSpec.matern(1.5, 1.0), [0.3], [0.3]) == 1.0
    assert evaluate(KernelSpec.matern(2.5, 0.4, 2.5), [0.1, 7.0], [0.1, 7.0]) == 2.5


def test_closed_form_values_at_unit_distance():
    assert evaluate(KernelSpec.matern(0.5, 1.0), [0.0], [1.0]) == pytest.approx(0.367879, abs=1e-6)
    assert evaluate(KernelSpec.se(1.0), [0.0], [1.0]) == pytest.approx(0.606531, abs=1e-6)


def test_matern_closed_forms_against_bessel_definition():
    # general-nu Matern written with the modified Bessel function
    from scipy.special import gamma, kv

    def bessel_matern(nu, r, ls):
        z = math.sqrt(2 * nu) * r / ls
        return 2 ** (1 - nu) / gamma(nu) * z**nu * kv(nu, z)

    for nu in (0.5, 1.5, 2.5):
        spec = KernelSpec.matern(nu, 0.7)
        for r in (0.05, 0.3, 1.0, 2.4):
            assert evaluate(spec, [0.0], [r]) == pytest.approx(bessel_matern(nu, r, 0.7), rel=1e-10)


def test_rejects_unsupported_hyperparameters():
    with pytest.raises(ValueError):
        KernelSpec.matern(1.0, 0.2)
    with pytest.raises(ValueError):
        KernelSpec.matern(1.5, 0.0)
    with pytest.raises(ValueError):
        KernelSpec.se(0.2, -1.0)


def test_gram_small_cases():
    spec = KernelSpec.matern(1.5, 0.2, 0.7)
    np.testing.assert_array_equal(gram(spec, [[0.4]]), [[0.7]])
    np.testing.assert_array_equal(gram(spec, [[0.4], [0.4]]), np.full((2, 2), 0.7))


def test_gram_matches_pairwise_eval():
    spec = KernelSpec.matern(0.5, 0.25)
    X = np.array([[0.0], [0.13], [0.9]])
    G = gram(spec, X)
    for i in range(3):
        for j in range(3):
            assert G[i, j] == pytest.approx(evaluate(spec, X[i], X[j]), abs=1e-15)


def test_cross_vector():
    spec = KernelSpec.se(0.4)
    rng = np.random.default_rng(3)
    X = rng.uniform(0, 1, size=(4, 2))
    x = rng.uniform(0, 1, size=2)
    c = cross(spec, X, x)
    np.testing.assert_allclose(c, [evaluate(spec, xi, x) for xi in X], atol=1e-15)
    assert cross(spec, X, X[2])[2] == spec.output_scale
    assert cross(spec, X[:1], x).shape == (1,)


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: f"{s.family.value}-{s.nu}")
@settings(max_examples=60, deadline=None)
@given(x=point, y=point, shift=point)
def test_symmetry_and_translation_invariance(spec, x, y, shift):
    k = evaluate(spec, x, y)
    assert k == evaluate(spec, y, x)
    assert evaluate(spec, x + shift, y + shift) == pytest.approx(k, abs=1e-12)


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: f"{s.family.value}-{s.nu}")
@settings(max_examples=40, deadline=None)
@given(pts=st.lists(st.lists(coord, min_size=2, max_size=2), min_size=1, max_size=20))
def test_gram_plus_jitter_is_cholesky_factorizable(spec, pts):
    G = gram(spec, np.array(pts))
    np.linalg.cholesky(G + JITTER * np.eye(len(pts)))


@pytest.mark.parametrize("spec", FAMILIES, ids=lambda s: f"{s.family.value}-{s.nu}")
def test_monotone_decay_in_distance(spec):
    r = np.linspace(0, 5, 2001)
    k = spec.from_distance(r)
    assert np.all(np.diff(k) <= 0)

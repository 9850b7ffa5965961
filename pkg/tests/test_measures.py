import numpy as np
import pytest
from hypothesis import given, strategies as st

from obliqueframes import (
    DiscreteMeasure,
    SupportOutsideSubspace,
    classify_probabilistic_frame,
    dirac,
    linear_pushforward,
    measure_frame_operator,
    orthogonal_projection,
    psd_pinv_sqrt,
    pseudoinverse,
    pushforward,
    second_moment,
    spectral_norm,
    uniform_atoms,
    weak_equal,
)
from obliqueframes.gallery import (
    full_space,
    line,
    mercedes_benz_measure,
    random_measure_on,
    random_subspace,
    skew_line_measures,
    skew_line_subspaces,
)


class TestDiscreteMeasure:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            DiscreteMeasure([[1.0], [0.0]], [0.5, 0.4])

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            DiscreteMeasure([[1.0], [0.0]], [1.5, -0.5])

    def test_zero_weight_atoms_are_not_support(self):
        mu = DiscreteMeasure([[1.0], [2.0]], [1.0, 0.0])
        assert mu.support().shape == (1, 1)


class TestWeakEquality:
    def test_permutation_invariance(self):
        a = DiscreteMeasure([[0.0, 1.0], [1.0, 0.0]], [0.25, 0.75])
        b = DiscreteMeasure([[1.0, 0.0], [0.0, 1.0]], [0.75, 0.25])
        assert weak_equal(a, b)

    def test_split_atoms_aggregate(self):
        a = DiscreteMeasure([[1.0], [1.0], [2.0]], [0.25, 0.25, 0.5])
        b = DiscreteMeasure([[2.0], [1.0]], [0.5, 0.5])
        assert weak_equal(a, b)

    def test_position_tolerance(self):
        a = dirac([1.0, 0.0])
        b = dirac([1.0 + 1e-12, 0.0])
        c = dirac([1.0 + 1e-6, 0.0])
        assert weak_equal(a, b)
        assert not weak_equal(a, c)

    def test_weight_mismatch_detected(self):
        a = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
        b = DiscreteMeasure([[0.0], [1.0]], [0.6, 0.4])
        assert not weak_equal(a, b)


class TestFrameOperator:
    def test_dirac_on_the_axis(self):
        assert np.allclose(measure_frame_operator(dirac([1.0, 0.0])),
                           np.diag([1.0, 0.0]))

    def test_uniform_standard_basis(self):
        mu = uniform_atoms(np.eye(2))
        assert np.allclose(measure_frame_operator(mu), 0.5 * np.eye(2))

    def test_two_atom_measure(self):
        mu = DiscreteMeasure([[0.0, 0.0], [2.0, 2.0]], [0.5, 0.5])
        assert np.allclose(measure_frame_operator(mu),
                           [[2.0, 2.0], [2.0, 2.0]])

    def test_mercedes_benz_is_half_identity(self):
        S = measure_frame_operator(mercedes_benz_measure())
        assert np.allclose(S, 0.5 * np.eye(2), atol=1e-12)


class TestClassify:
    def test_dirac_is_parseval_on_its_line(self):
        rep = classify_probabilistic_frame(dirac([1.0, 0.0]), line([1.0, 0.0]))
        assert rep.is_frame and rep.is_tight and rep.is_parseval
        assert rep.bounds == pytest.approx((1.0, 1.0))

    def test_mercedes_benz_is_tight_half(self):
        rep = classify_probabilistic_frame(mercedes_benz_measure(),
                                           full_space(2))
        assert rep.is_frame and rep.is_tight and not rep.is_parseval
        assert rep.bounds == pytest.approx((0.5, 0.5), abs=1e-12)

    def test_dirac_is_not_a_frame_for_the_plane(self):
        rep = classify_probabilistic_frame(dirac([1.0, 0.0]), full_space(2))
        assert not rep.is_frame
        assert rep.bounds is None

    def test_support_outside_subspace_raises(self):
        with pytest.raises(SupportOutsideSubspace):
            classify_probabilistic_frame(dirac([1.0, 0.5]), line([1.0, 0.0]))

    def test_zero_weight_atom_outside_is_tolerated(self):
        mu = DiscreteMeasure([[1.0, 0.0], [0.0, 1.0]], [1.0, 0.0])
        rep = classify_probabilistic_frame(mu, line([1.0, 0.0]))
        assert rep.is_frame

    def test_second_moment(self):
        _, nu, _ = skew_line_measures()
        rep = classify_probabilistic_frame(nu, skew_line_subspaces()[1])
        assert rep.second_moment == pytest.approx(4.0)  # 0.5 * ||(2,2)||^2


class TestPushforward:
    def test_identity_map(self):
        mu = mercedes_benz_measure()
        assert weak_equal(pushforward(mu, lambda x: x), mu)

    def test_images_are_not_merged(self):
        mu = DiscreteMeasure([[1.0], [2.0]], [0.5, 0.5])
        nu = pushforward(mu, lambda x: np.zeros(1))
        assert nu.num_atoms == 2
        assert weak_equal(nu, dirac([0.0]))

    def test_scaling_transforms_the_operator_quadratically(self):
        mu = mercedes_benz_measure()
        nu = linear_pushforward(mu, 3.0 * np.eye(2))
        assert np.allclose(measure_frame_operator(nu),
                           9.0 * measure_frame_operator(mu), atol=1e-12)


class TestFrameProjectionIdentities:
    @given(st.integers(0, 5_000))
    def test_pseudoinverse_products_are_the_projection(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        d = int(rng.integers(1, n + 1))
        W = random_subspace(rng, n, d)
        mu = random_measure_on(rng, W, int(rng.integers(d, 2 * d + 3)))
        S = measure_frame_operator(mu)
        S_pinv = pseudoinverse(S)
        P = orthogonal_projection(W)
        assert spectral_norm(S @ S_pinv - P) <= 1e-9
        assert spectral_norm(S_pinv @ S - P) <= 1e-9
        root = psd_pinv_sqrt(S)
        assert spectral_norm(root @ S @ root - P) <= 1e-9

    @given(st.integers(0, 5_000))
    def test_canonical_parseval_pushforward(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        d = int(rng.integers(1, n + 1))
        W = random_subspace(rng, n, d)
        mu = random_measure_on(rng, W, int(rng.integers(d, 2 * d + 3)))
        root = psd_pinv_sqrt(measure_frame_operator(mu))
        rep = classify_probabilistic_frame(linear_pushforward(mu, root), W)
        assert rep.is_parseval


def test_second_moment_of_mercedes_benz():
    assert second_moment(mercedes_benz_measure()) == pytest.approx(1.0)

import math

import numpy as np
import pytest

from simplexgrad.errors import InvalidInput
from simplexgrad.geometry import SampleSet
from simplexgrad.oracle import (
    ROSENBROCK_NU_GRAD,
    ROSENBROCK_NU_HESS,
    NoiseMode,
    NoiseModel,
    affine,
    builtin_registry,
    cubic1d,
    evaluate_noisy,
    fvalues_for,
    lookup,
    quadratic,
    sum_exp,
)
from simplexgrad.schemes import build

from oracles import rosenbrock_hessian_sup, rosenbrock_third_derivative_sup


def sample_in_ball(rng, tf, count=10):
    n = tf.dim
    radius = min(tf.radius, 1.0)
    pts = []
    while len(pts) < count:
        v = rng.uniform(-1, 1, n)
        if np.linalg.norm(v) <= 1:
            pts.append(tf.center + radius * v)
    return pts


@pytest.mark.parametrize("tf", builtin_registry(), ids=lambda t: t.name)
class TestDerivativeConsistency:
    h = 1e-5

    def test_gradient(self, tf):
        rng = np.random.default_rng(0)
        for x in sample_in_ball(rng, tf):
            fd = np.array([(tf(x + self.h * e) - tf(x - self.h * e)) / (2 * self.h) for e in np.eye(tf.dim)])
            # Rosenbrock values are O(100); scale the absolute tolerance to the function size
            tol = 1e-6 * max(1.0, abs(tf(x)))
            np.testing.assert_allclose(fd, tf.gradient(x), atol=tol)

    def test_hessian(self, tf):
        rng = np.random.default_rng(1)
        for x in sample_in_ball(rng, tf):
            fd = np.array([(tf.gradient(x + self.h * e) - tf.gradient(x - self.h * e)) / (2 * self.h)
                           for e in np.eye(tf.dim)])
            tol = 1e-6 * max(1.0, float(np.abs(tf.hessian(x)).max()))
            np.testing.assert_allclose(fd, tf.hessian(x), atol=tol)


class TestRegistry:
    def test_affine(self):
        tf = affine([3.0, 4.0])
        np.testing.assert_array_equal(tf.gradient([7.0, -1.0]), [3.0, 4.0])
        assert tf.nu_grad == 0.0

    def test_square(self):
        tf = quadratic([[2.0]])
        assert tf([3.0]) == 9.0
        assert (tf.nu_grad, tf.nu_hess) == (2.0, 0.0)

    def test_cubic(self):
        assert cubic1d().nu_hess == 6.0
        assert cubic1d(center=2.0, radius=0.5).nu_grad == 15.0

    def test_sum_exp_constant(self):
        tf = sum_exp(3, [0.1, -0.2, 0.4], 0.3)
        assert tf.nu_hess == pytest.approx(math.exp(0.7))

    def test_sum_exp_constant_is_a_hessian_bound_on_the_ball(self):
        tf = sum_exp(2, [0.0, 0.0], 0.5)
        rng = np.random.default_rng(3)
        for x in sample_in_ball(rng, tf, 50):
            assert np.linalg.norm(tf.hessian(x), 2) <= tf.nu_grad

    def test_rosenbrock_constants_bound_sampled_sups(self):
        assert rosenbrock_hessian_sup() <= ROSENBROCK_NU_GRAD
        assert rosenbrock_third_derivative_sup() <= ROSENBROCK_NU_HESS
        # and are not loose by more than a few percent
        assert rosenbrock_hessian_sup() >= 0.95 * ROSENBROCK_NU_GRAD
        assert rosenbrock_third_derivative_sup() >= 0.95 * ROSENBROCK_NU_HESS

    def test_lookup(self):
        assert lookup("rosenbrock").dim == 2
        assert lookup("sumexp", dim=4).dim == 4
        assert lookup("cubic1d", center=[2.0], radius=0.1).center[0] == 2.0

    def test_lookup_unknown(self):
        with pytest.raises(InvalidInput):
            lookup("nope")

    def test_lookup_wrong_dimension(self):
        with pytest.raises(InvalidInput):
            lookup("rosenbrock", dim=3)

    def test_quadratic_must_be_symmetric(self):
        with pytest.raises(InvalidInput):
            quadratic([[1.0, 2.0], [0.0, 1.0]])

    def test_contains(self):
        tf = sum_exp(2, [0.0, 0.0], 1.0)
        assert tf.contains([[0.5, 0.5]])
        assert not tf.contains([[1.0, 1.0]])


class TestNoise:
    def test_off_is_exact(self):
        tf = sum_exp(2)
        assert evaluate_noisy(tf, [0.3, 0.1], NoiseModel(1e-3, "off")) == tf([0.3, 0.1])

    def test_fixed_plus(self):
        tf = affine([0.0], 1.0)
        assert evaluate_noisy(tf, [0.0], NoiseModel(1e-3, "fixed_plus")) == pytest.approx(1.001, rel=1e-15)

    def test_alternating_signs(self):
        nm = NoiseModel(1e-2, NoiseMode.FIXED_ALTERNATING)
        assert [nm.epsilon(i) for i in range(4)] == [1e-2, -1e-2, 1e-2, -1e-2]

    def test_uniform_reproducible(self):
        a = NoiseModel(1e-3, "uniform_random", seed=5)
        b = NoiseModel(1e-3, "uniform_random", seed=5)
        assert [a.epsilon(i) for i in range(20)] == [b.epsilon(i) for i in range(20)]

    def test_uniform_order_independent(self):
        nm = NoiseModel(1e-3, "uniform_random", seed=5)
        forward = [nm.epsilon(i) for i in range(10)]
        backward = [nm.epsilon(i) for i in reversed(range(10))][::-1]
        assert forward == backward

    def test_uniform_depends_on_seed(self):
        a = NoiseModel(1e-3, "uniform_random", seed=1)
        b = NoiseModel(1e-3, "uniform_random", seed=2)
        assert [a.epsilon(i) for i in range(5)] != [b.epsilon(i) for i in range(5)]

    def test_uniform_fills_the_interval(self):
        nm = NoiseModel(1.0, "uniform_random", seed=0)
        e = np.array([nm.epsilon(i) for i in range(2000)])
        assert e.min() < -0.9 and e.max() > 0.9
        assert abs(e.mean()) < 0.05

    def test_additive(self):
        tf = affine([0.0], 0.0)
        assert evaluate_noisy(tf, [0.0], NoiseModel(1e-3, "fixed_plus", additive=True)) == 1e-3

    def test_negative_level(self):
        with pytest.raises(InvalidInput):
            NoiseModel(-1.0, "fixed_plus")

    @pytest.mark.parametrize("mode", list(NoiseMode))
    def test_relative_bound(self, mode):
        nm = NoiseModel(1e-4, mode, seed=3)
        rng = np.random.default_rng(4)
        for tf in builtin_registry():
            for i, x in enumerate(sample_in_ball(rng, tf, 5)):
                assert abs(evaluate_noisy(tf, x, nm, i) - tf(x)) <= 1e-4 * abs(tf(x)) * (1 + 1e-12)


class TestFValues:
    def test_order_and_exactness(self):
        tf = affine([1.0, 2.0], 0.5)
        sch = build("GCSG", SampleSet([0, 0], np.eye(2)))
        np.testing.assert_array_equal(fvalues_for(sch, tf), [0.5, 1.5, 2.5, -0.5, -1.5])

    def test_fixed_plus_scales_every_entry(self):
        tf = sum_exp(2)
        sch = build("GSG", SampleSet([0.1, 0.2], np.eye(2)))
        exact = fvalues_for(sch, tf)
        np.testing.assert_allclose(fvalues_for(sch, tf, NoiseModel(1e-5, "fixed_plus")), exact * (1 + 1e-5),
                                   rtol=1e-15)

    def test_dimension_mismatch(self):
        sch = build("GSG", SampleSet([0.0], [0.1]))
        with pytest.raises(InvalidInput):
            fvalues_for(sch, sum_exp(2))

    def test_perturbation_norm_inequality(self):
        rng = np.random.default_rng(6)
        for trial in range(300):
            n = rng.integers(1, 4)
            tf = sum_exp(n, rng.uniform(-1, 1, n), 1.0)
            kind = ["GSG", "GCSG", "GACSG"][trial % 3]
            sch = build(kind, SampleSet(tf.center, rng.normal(size=(rng.integers(1, n + 2), n)) * 0.1))
            eps = 10.0 ** -rng.integers(4, 9)
            nm = NoiseModel(eps, "uniform_random", seed=trial)
            f, fbar = fvalues_for(sch, tf), fvalues_for(sch, tf, nm)
            bound = math.sqrt(sch.q + 1) * np.abs(f).max() * eps
            assert np.linalg.norm(fbar - f) <= bound * (1 + 1e-12)

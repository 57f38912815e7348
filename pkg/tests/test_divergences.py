import math

import numpy as np
import pytest

from fdivbounds.distributions import DiscreteDistribution
from fdivbounds.divergences import (
    DivergenceGenerator,
    builtin_generator,
    default_generators,
    eval_divergence,
    squared_hellinger,
    total_variation,
    uniform_divergence_floor,
    uniform_divergence_floor_derivative,
)


def dist(*vals):
    return DiscreteDistribution(np.array(vals))


class TestGeneratorCatalog:
    @pytest.mark.parametrize(
        "name,f_at_zero",
        [
            ("kl", 0.0),
            ("chi2", -1.0),
            ("hellinger_half", 1.0),
            ("hellinger_sq", 1.0),
            ("tv", 0.5),
            ("reverse_kl", math.inf),
            ("power:3", -1.0),
        ],
    )
    def test_boundary_values(self, name, f_at_zero):
        gen = builtin_generator(name)
        assert gen.f_at_zero == f_at_zero
        assert float(gen.f(np.array([1.0]))[0]) == 0.0

    def test_power_needs_exponent_above_one(self):
        with pytest.raises(ValueError):
            builtin_generator("power:1")

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown generator"):
            builtin_generator("renyi")

    def test_user_generator_accepted_when_convex(self):
        gen = DivergenceGenerator(
            name="exp_centered",
            f=lambda x: np.exp(x) - np.e * x,
            f_at_zero=1.0,
            derivative=lambda x: np.exp(x) - np.e,
        )
        assert eval_divergence(gen, dist(0.5, 0.5), dist(0.5, 0.5)) == 0.0

    def test_user_generator_rejected_when_concave(self):
        with pytest.raises(ValueError, match="convexity"):
            DivergenceGenerator(name="sqrt", f=lambda x: np.sqrt(x) - x, f_at_zero=0.0)

    def test_f_at_one_must_vanish(self):
        with pytest.raises(ValueError, match="f\\(1\\)"):
            DivergenceGenerator(name="shifted", f=lambda x: x, f_at_zero=0.0)


class TestEvalDivergence:
    def test_chi2_direct_summation(self):
        # 0.25*(2^2-1) + 0.75*((2/3)^2-1)
        val = eval_divergence(builtin_generator("chi2"), dist(0.5, 0.5), dist(0.25, 0.75))
        assert val == pytest.approx(1.0 / 3.0, abs=1e-15)

    @pytest.mark.parametrize("name", [g.name for g in default_generators()])
    def test_identical_arguments_give_zero(self, name):
        gen = builtin_generator(name)
        p = dist(0.3, 0.2, 0.5)
        assert eval_divergence(gen, p, p) == 0.0

    def test_absolute_continuity_failure_is_infinite(self):
        val = eval_divergence(builtin_generator("kl"), dist(1.0, 0.0), dist(0.0, 1.0))
        assert math.isinf(val)

    def test_zero_mass_point_uses_boundary_value(self):
        # p=(0,1), q=(0.5,0.5): term q*f(0) at the first point
        val = eval_divergence(builtin_generator("chi2"), dist(0.0, 1.0), dist(0.5, 0.5))
        assert val == pytest.approx(0.5 * (-1.0) + 0.5 * 3.0, abs=1e-15)

    def test_reverse_kl_swaps_arguments(self):
        p, q = dist(0.3, 0.7), dist(0.6, 0.4)
        rev = eval_divergence(builtin_generator("reverse_kl"), p, q)
        fwd = eval_divergence(builtin_generator("kl"), q, p)
        assert rev == pytest.approx(fwd, abs=1e-14)

    def test_support_mismatch(self):
        with pytest.raises(ValueError, match="support"):
            eval_divergence(builtin_generator("kl"), dist(1.0), dist(0.5, 0.5))

    def test_nonnegative_on_random_pairs(self):
        rng = np.random.default_rng(3)
        worst = math.inf
        for _ in range(300):
            s = int(rng.integers(2, 17))
            p = DiscreteDistribution(rng.dirichlet(np.ones(s)))
            q = DiscreteDistribution(rng.dirichlet(np.ones(s)))
            for gen in default_generators():
                v = eval_divergence(gen, p, q)
                assert v >= 0.0
                worst = min(worst, v)
        assert worst >= 0.0

    def test_hellinger_forms_differ_by_factor_two(self):
        rng = np.random.default_rng(4)
        half = builtin_generator("hellinger_half")
        full = builtin_generator("hellinger_sq")
        for _ in range(50):
            p = DiscreteDistribution(rng.dirichlet(np.ones(5)))
            q = DiscreteDistribution(rng.dirichlet(np.ones(5)))
            assert eval_divergence(full, p, q) == pytest.approx(
                2.0 * eval_divergence(half, p, q), abs=1e-12
            )
            assert eval_divergence(full, p, q) == pytest.approx(
                squared_hellinger(p, q), abs=1e-12
            )

    def test_tv_generator_matches_plain_tv_on_shared_support(self):
        rng = np.random.default_rng(5)
        gen = builtin_generator("tv")
        for _ in range(50):
            p = DiscreteDistribution(rng.dirichlet(np.ones(4)))
            q = DiscreteDistribution(rng.dirichlet(np.ones(4)))
            assert eval_divergence(gen, p, q) == pytest.approx(
                total_variation(p, q), abs=1e-14
            )


class TestUniformDivergenceFloor:
    def test_chi2_closed_form(self):
        # N^3/(N-1) (1 - 1/N - a)^2 for the quadratic generator
        val = uniform_divergence_floor(builtin_generator("chi2"), 2, 0.25)
        assert val == pytest.approx(8.0 * 0.25**2, abs=1e-14)

    @pytest.mark.parametrize("name", ["kl", "chi2", "tv", "power:3"])
    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_vanishes_at_maximal_risk(self, name, n):
        val = uniform_divergence_floor(builtin_generator(name), n, 1.0 - 1.0 / n)
        assert val == pytest.approx(0.0, abs=1e-12)

    def test_kl_at_zero_risk(self):
        val = uniform_divergence_floor(builtin_generator("kl"), 2, 0.0)
        assert val == pytest.approx(2.0 * math.log(2.0), abs=1e-14)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            uniform_divergence_floor(builtin_generator("kl"), 2, 0.6)

    @pytest.mark.parametrize("name", [g.name for g in default_generators()])
    @pytest.mark.parametrize("n", [2, 4, 6])
    def test_non_increasing_and_midpoint_convex(self, name, n):
        gen = builtin_generator(name)
        grid = np.linspace(0.0, 1.0 - 1.0 / n, 41)
        vals = [uniform_divergence_floor(gen, n, a) for a in grid]
        for a, b in zip(vals, vals[1:]):
            if math.isfinite(b):
                assert b <= a + 1e-12
        for i in range(0, 39, 2):
            mid = uniform_divergence_floor(gen, n, (grid[i] + grid[i + 2]) / 2.0)
            if math.isfinite(vals[i]) and math.isfinite(vals[i + 2]):
                assert mid <= (vals[i] + vals[i + 2]) / 2.0 + 1e-12

    def test_derivative_matches_finite_differences(self):
        gen = builtin_generator("chi2")
        for n in (2, 4):
            for a in (0.1, 0.3):
                step = 1e-6
                numeric = (
                    uniform_divergence_floor(gen, n, a + step)
                    - uniform_divergence_floor(gen, n, a - step)
                ) / (2 * step)
                assert uniform_divergence_floor_derivative(gen, n, a) == pytest.approx(
                    numeric, rel=1e-6
                )

    def test_derivative_requires_differentiable_generator(self):
        with pytest.raises(ValueError, match="derivative"):
            uniform_divergence_floor_derivative(builtin_generator("tv"), 2, 0.1)


class TestClassicalPairInequalities:
    """Pinsker, the mixture-KL bound, and the Hellinger-TV bound."""

    def test_random_pair_sweep(self):
        rng = np.random.default_rng(11)
        kl = builtin_generator("kl")
        for _ in range(400):
            s = int(rng.integers(2, 17))
            p1 = DiscreteDistribution(rng.dirichlet(np.ones(s)))
            p2 = DiscreteDistribution(rng.dirichlet(np.ones(s)))
            v = total_variation(p1, p2)
            assert eval_divergence(kl, p1, p2) >= 2.0 * v * v - 1e-12
            mix = DiscreteDistribution((p1.pmf + p2.pmf) / 2.0)
            lhs = eval_divergence(kl, p1, mix) + eval_divergence(kl, p2, mix)
            rhs = (1 + v) * math.log1p(v) + (1 - v) * math.log1p(-v)
            assert lhs >= rhs - 1e-12
            h = math.sqrt(squared_hellinger(p1, p2))
            assert v <= h * math.sqrt(1.0 - h * h / 4.0) + 1e-12

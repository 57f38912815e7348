import math

import numpy as np
import pytest

from fdivbounds.distributions import DiscreteDistribution, Ensemble
from fdivbounds.divergences import builtin_generator, default_generators, total_variation
from fdivbounds.mixture_bounds import (
    implicit_risk_bound,
    map_reference_mass,
    named_bound,
    named_bound_from_ensemble,
    tangent_risk_bound,
    two_point_target,
    two_point_witness,
    weighted_divergence_floor,
    weighted_divergence_sum,
)
from fdivbounds.testing_risk import bayes_risk_exact
from fdivbounds.verify import check_weighted_soundness, minimize_two_point

KL = builtin_generator("kl")
CHI2 = builtin_generator("chi2")


class TestWeightedDivergenceFloor:
    def test_quadratic_hand_value(self):
        # 0.5 f(1.5) + 0.5 f(0.5) for f = x^2 - 1
        assert weighted_divergence_floor(CHI2, 0.5, 0.25) == pytest.approx(0.25, abs=1e-15)

    def test_zero_when_both_ratios_are_one(self):
        for gen in default_generators():
            n = 4
            val = weighted_divergence_floor(gen, 1.0 / n, 1.0 - 1.0 / n)
            assert val == pytest.approx(0.0, abs=1e-12)

    def test_kl_at_zero_risk(self):
        assert weighted_divergence_floor(KL, 0.5, 0.0) == pytest.approx(
            math.log(2.0), abs=1e-15
        )

    @pytest.mark.parametrize("w", [0.0, 1.0, -0.1, 1.1])
    def test_degenerate_mass_rejected(self, w):
        with pytest.raises(ValueError):
            weighted_divergence_floor(KL, w, 0.2)

    def test_soundness_sweep(self):
        """The central inequality on random ensembles, priors, references,
        and every built-in generator."""
        result = check_weighted_soundness(seed=0, trials=300)
        assert result["pass"], result

    def test_soundness_infinite_lhs_cases(self):
        # reference missing mass where a member has it: the sum is infinite
        ens = Ensemble(
            members=(
                DiscreteDistribution(np.array([0.5, 0.5, 0.0])),
                DiscreteDistribution(np.array([0.0, 0.5, 0.5])),
            )
        )
        q = DiscreteDistribution(np.array([1.0, 0.0, 0.0]))
        assert math.isinf(weighted_divergence_sum(KL, ens, q))

    def test_map_reference_mass_uniform_prior(self):
        ens = Ensemble(
            members=(
                DiscreteDistribution(np.array([0.75, 0.25])),
                DiscreteDistribution(np.array([0.25, 0.75])),
            )
        )
        q = DiscreteDistribution(np.array([0.3, 0.7]))
        # uniform prior: w_{T(x)} = 1/2 everywhere
        assert map_reference_mass(ens, q) == pytest.approx(0.5, abs=1e-15)


class TestImplicitRiskBound:
    def test_quadratic_inversion(self):
        # solves 8 (0.5 - a)^2 = 0.5
        assert implicit_risk_bound(CHI2, 2, 0.5) == pytest.approx(0.25, abs=1e-9)

    @pytest.mark.parametrize("name", ["kl", "chi2", "hellinger_half", "power:3"])
    def test_zero_sum_gives_maximal_risk(self, name):
        gen = builtin_generator(name)
        assert implicit_risk_bound(gen, 4, 0.0) == pytest.approx(0.75, abs=1e-12)

    def test_bracket_end_exact(self):
        # the floor at a=0 equals the sum exactly: the bound collapses to 0
        assert implicit_risk_bound(KL, 2, 2.0 * math.log(2.0)) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_huge_sum_gives_zero(self):
        assert implicit_risk_bound(KL, 3, 1e6) == 0.0

    def test_infinite_floor_at_zero_is_handled(self):
        rev = builtin_generator("reverse_kl")
        val = implicit_risk_bound(rev, 2, 5.0)
        assert 0.0 <= val <= 0.5


class TestTangentRiskBound:
    def test_zero_correction_returns_anchor(self):
        floor = 8.0 * (0.5 - 0.25) ** 2
        assert tangent_risk_bound(CHI2, 2, floor, 0.25) == pytest.approx(0.25, abs=1e-12)

    def test_never_beats_implicit_inversion(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            n = int(rng.integers(2, 7))
            name = ("kl", "chi2", "power:3", "hellinger_half")[int(rng.integers(0, 4))]
            gen = builtin_generator(name)
            total = float(rng.uniform(0.0, 3.0))
            a = float(rng.uniform(0.0, 1.0 - 1.0 / n - 1e-9))
            implicit = implicit_risk_bound(gen, n, total)
            tangent = tangent_risk_bound(gen, n, total, a)
            assert tangent <= implicit + 1e-9

    def test_implicit_inversion_sound_against_exact_risk(self):
        """Inverting the floor at the exact informativity sum never beats
        the exact uniform-prior Bayes risk."""
        from fdivbounds.informativity import informativity_closed_form

        rng = np.random.default_rng(31)
        for t in range(150):
            n = int(rng.integers(2, 6))
            s = int(rng.integers(2, 9))
            ens = Ensemble(
                members=tuple(
                    DiscreteDistribution(rng.dirichlet(np.ones(s))) for _ in range(n)
                )
            )
            name = ("kl", "chi2", "hellinger_half", "power:3")[t % 4]
            total = n * informativity_closed_form(name, ens).value
            bound = implicit_risk_bound(builtin_generator(name), n, total)
            assert bound <= bayes_risk_exact(ens) + 1e-9

    def test_fano_anchor_reproduces_log_form(self):
        """At the anchor (N-1)/(2N-1) the tangent bound collapses to
        1 - (log((2N-1)/N) + avg) / log N."""
        for n in (3, 8, 16):
            for avg in (0.2, 0.9, 2.0):
                a0 = (n - 1.0) / (2.0 * n - 1.0)
                got = tangent_risk_bound(KL, n, n * avg, a0)
                sharp = 1.0 - (math.log((2.0 * n - 1.0) / n) + avg) / math.log(n)
                assert got == pytest.approx(max(0.0, sharp), abs=1e-12)
                # the named form relaxes log((2N-1)/N) to log 2
                assert named_bound("fano", n=n, avg_kl=avg).lower_bound <= got + 1e-12

    def test_requires_derivative(self):
        with pytest.raises(ValueError, match="derivative"):
            tangent_risk_bound(builtin_generator("tv"), 2, 0.1, 0.1)


class TestNamedBounds:
    def test_fano_value(self):
        rep = named_bound("fano", n=16, avg_kl=1.0)
        assert rep.lower_bound == pytest.approx(
            1.0 - (math.log(2.0) + 1.0) / math.log(16.0), abs=1e-12
        )

    def test_chi2_identical_members(self):
        rep = named_bound("chi2", n=2, divergence_sum=0.0)
        assert rep.lower_bound == 0.5

    @pytest.mark.parametrize(
        "h_sq,expected",
        [(1.0, 0.0), (0.5, 0.5 - 0.5 * math.sqrt(0.75)), (0.0, 0.5)],
    )
    def test_hellinger_two_member_values(self, h_sq, expected):
        rep = named_bound("hellinger", n=2, h_sq=h_sq)
        assert rep.lower_bound == pytest.approx(expected, abs=1e-12)

    def test_power_l_value(self):
        rep = named_bound("power_l", n=2, exponent=3.0, divergence_sum=0.0)
        assert rep.lower_bound == pytest.approx(1.0 - 0.25 ** (1.0 / 3.0), abs=1e-12)

    def test_tv_mutually_singular(self):
        rep = named_bound("tv", n=2, divergence_sum=1.0)
        assert rep.lower_bound == 0.0
        assert rep.vacuous

    def test_reverse_kl_tv_is_an_upper_bound_report(self):
        rep = named_bound("reverse_kl_tv", divergence_sum=0.5)
        assert rep.lower_bound == pytest.approx(math.sqrt(1.0 - math.exp(-0.5)), abs=1e-12)
        assert "upper bound" in rep.notes[0]

    def test_vacuous_flagged_not_suppressed(self):
        rep = named_bound("fano", n=2, avg_kl=5.0)
        assert rep.lower_bound == 0.0
        assert rep.vacuous

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown bound family"):
            named_bound("assouad", n=2)

    def test_soundness_from_exact_statistics(self):
        rng = np.random.default_rng(21)
        families = ("fano", "chi2", "hellinger", "tv", "power_l")
        for _ in range(60):
            n = int(rng.integers(2, 5))
            s = int(rng.integers(2, 7))
            ens = Ensemble(
                members=tuple(
                    DiscreteDistribution(rng.dirichlet(np.ones(s))) for _ in range(n)
                )
            )
            rbar = bayes_risk_exact(ens)
            for family in families:
                rep = named_bound_from_ensemble(family, ens)
                assert rep.lower_bound <= rbar + 1e-9, (family, rep.to_json())

    def test_reverse_kl_tv_from_ensemble_bounds_tv(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            p1 = DiscreteDistribution(rng.dirichlet(np.ones(4)))
            p2 = DiscreteDistribution(rng.dirichlet(np.ones(4)))
            ens = Ensemble(members=(p1, p2))
            rep = named_bound_from_ensemble("reverse_kl_tv", ens)
            assert total_variation(p1, p2) <= rep.lower_bound + 1e-6


class TestTwoPointWitness:
    @pytest.mark.parametrize(
        "v,gen_name,expected",
        [
            (0.3, "chi2", 0.18),
            (0.0, "kl", 0.0),
            (1.0, "kl", 2.0 * math.log(2.0)),
        ],
    )
    def test_achieved_values(self, v, gen_name, expected):
        p1, p2, q, achieved = two_point_witness(v, builtin_generator(gen_name))
        assert achieved == pytest.approx(expected, abs=1e-12)
        assert total_variation(p1, p2) == pytest.approx(v, abs=1e-12)
        assert np.allclose(q.pmf, [0.5, 0.5])

    def test_witness_matches_target_formula(self):
        for v in np.linspace(0.0, 1.0, 11):
            for name in ("kl", "chi2", "power:3"):
                gen = builtin_generator(name)
                _, _, _, achieved = two_point_witness(float(v), gen)
                assert achieved == pytest.approx(
                    two_point_target(float(v), gen), abs=1e-12
                )

    def test_numeric_minimum_cannot_go_below_target(self):
        for v in (0.2, 0.5, 0.9):
            for name in ("kl", "chi2"):
                gen = builtin_generator(name)
                numeric = minimize_two_point(gen, v)
                target = two_point_target(v, gen)
                assert numeric >= target - 1e-9
                assert numeric == pytest.approx(target, abs=1e-6)

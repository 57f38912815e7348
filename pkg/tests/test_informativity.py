import math

import numpy as np
import pytest

from fdivbounds.distributions import DiscreteDistribution, Ensemble
from fdivbounds.divergences import builtin_generator, eval_divergence
from fdivbounds.informativity import (
    CoveringFamily,
    covering_approx_error,
    covering_specialization,
    covering_upper_bound,
    informativity_closed_form,
    informativity_numeric,
    informativity_tv_exact,
    simple_upper_chain,
)
from fdivbounds.verify import grid_informativity

SINGULAR_PAIR = Ensemble(
    members=(
        DiscreteDistribution(np.array([1.0, 0.0])),
        DiscreteDistribution(np.array([0.0, 1.0])),
    )
)


def random_ensemble(rng, n_max=4, s_max=4):
    n = int(rng.integers(2, n_max + 1))
    s = int(rng.integers(2, s_max + 1))
    return Ensemble(
        members=tuple(DiscreteDistribution(rng.dirichlet(np.ones(s))) for _ in range(n))
    )


class TestClosedForms:
    def test_chi2_singular_pair(self):
        res = informativity_closed_form("chi2", SINGULAR_PAIR)
        assert res.value == pytest.approx(1.0, abs=1e-14)
        assert np.allclose(res.minimizer.pmf, [0.5, 0.5])

    def test_kl_singular_pair(self):
        res = informativity_closed_form("kl", SINGULAR_PAIR)
        assert res.value == pytest.approx(math.log(2.0), abs=1e-14)

    def test_hellinger_singular_pair(self):
        res = informativity_closed_form("hellinger_half", SINGULAR_PAIR)
        assert res.value == pytest.approx(1.0 - math.sqrt(0.5), abs=1e-14)
        assert np.allclose(res.minimizer.pmf, [0.5, 0.5])

    @pytest.mark.parametrize(
        "name", ["kl", "chi2", "hellinger_half", "hellinger_sq", "power:3"]
    )
    def test_identical_members_give_zero(self, name):
        member = DiscreteDistribution(np.array([0.3, 0.7]))
        ens = Ensemble(members=(member, member, member))
        res = informativity_closed_form(name, ens)
        assert res.value == pytest.approx(0.0, abs=1e-12)

    def test_minimizer_is_stationary_value(self):
        """The closed-form minimizer's objective value equals the closed-form
        value (consistency of the two formulas)."""
        rng = np.random.default_rng(7)
        for name in ("kl", "chi2", "hellinger_half", "power:3"):
            gen = builtin_generator(name)
            for _ in range(25):
                ens = random_ensemble(rng)
                res = informativity_closed_form(name, ens)
                direct = sum(
                    eval_divergence(gen, m, res.minimizer) for m in ens.members
                ) / ens.size
                assert direct == pytest.approx(res.value, abs=1e-10)

    def test_hellinger_forms_related_by_factor_two(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            ens = random_ensemble(rng)
            half = informativity_closed_form("hellinger_half", ens).value
            full = informativity_closed_form("hellinger_sq", ens).value
            assert full == pytest.approx(2.0 * half, abs=1e-12)

    def test_no_closed_form_for_tv(self):
        with pytest.raises(ValueError, match="no closed form"):
            informativity_closed_form("tv", SINGULAR_PAIR)


class TestNumericSolver:
    @pytest.mark.parametrize("name", ["kl", "chi2", "hellinger_half", "power:3"])
    def test_matches_closed_forms(self, name):
        rng = np.random.default_rng(10)
        gen = builtin_generator(name)
        for _ in range(30):
            ens = random_ensemble(rng)
            closed = informativity_closed_form(name, ens).value
            res = informativity_numeric(gen, ens, tol=1e-9)
            assert res.value == pytest.approx(closed, abs=1e-6)
            assert res.duality_gap <= 1e-9

    def test_identical_members(self):
        member = DiscreteDistribution(np.array([0.3, 0.7]))
        ens = Ensemble(members=(member, member))
        res = informativity_numeric(builtin_generator("power:3"), ens)
        assert res.value == pytest.approx(0.0, abs=1e-9)

    def test_singular_pair_matches_grid_oracle(self):
        gen = builtin_generator("power:3")
        res = informativity_numeric(gen, ens=SINGULAR_PAIR, tol=1e-9)
        oracle = grid_informativity(gen, SINGULAR_PAIR, step=1e-3)
        assert res.value == pytest.approx(oracle, abs=2e-3)

    def test_reverse_kl_restricts_to_common_support(self):
        # members share no common support: the infimum is infinite
        res = informativity_numeric(builtin_generator("reverse_kl"), SINGULAR_PAIR)
        assert math.isinf(res.value)

    def test_tv_routes_to_exact_lp(self):
        res = informativity_numeric(builtin_generator("tv"), SINGULAR_PAIR)
        assert res.method == "lp"
        assert res.value == pytest.approx(0.5, abs=1e-9)

    def test_tv_lp_against_fine_grid(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            ens = random_ensemble(rng, n_max=3, s_max=3)
            lp = informativity_tv_exact(ens)
            oracle = grid_informativity(builtin_generator("tv"), ens, step=1e-3)
            assert lp.value <= oracle + 1e-9
            assert lp.value == pytest.approx(oracle, abs=2e-3)


class TestSimpleUpperChain:
    def test_identical_members(self):
        member = DiscreteDistribution(np.array([0.3, 0.7]))
        ens = Ensemble(members=(member, member))
        assert simple_upper_chain(builtin_generator("kl"), ens) == (0.0, 0.0, 0.0)

    def test_chi2_pairwise_average(self):
        ens = Ensemble(
            members=(
                DiscreteDistribution(np.array([0.75, 0.25])),
                DiscreteDistribution(np.array([0.25, 0.75])),
            )
        )
        _, pair_avg, pair_max = simple_upper_chain(builtin_generator("chi2"), ens)
        assert pair_avg == pytest.approx((4.0 / 3.0 + 4.0 / 3.0) / 4.0, abs=1e-12)
        assert pair_max == pytest.approx(4.0 / 3.0, abs=1e-12)

    def test_singular_pair_infinities(self):
        chain = simple_upper_chain(builtin_generator("kl"), SINGULAR_PAIR)
        assert chain[0] == pytest.approx(math.log(2.0), abs=1e-14)
        assert math.isinf(chain[1]) and math.isinf(chain[2])

    def test_chain_is_nested_and_dominates_value(self):
        rng = np.random.default_rng(12)
        for _ in range(60):
            ens = random_ensemble(rng, n_max=5, s_max=6)
            for name in ("kl", "chi2", "hellinger_half"):
                chain = simple_upper_chain(builtin_generator(name), ens)
                assert chain[0] <= chain[1] + 1e-12 <= chain[2] + 2e-12
                value = informativity_closed_form(name, ens).value
                assert chain[0] >= value - 1e-9
                if name == "kl":
                    assert chain[0] == pytest.approx(value, abs=1e-12)


class TestCoveringBounds:
    def test_kl_self_cover_is_log_size(self):
        fam = CoveringFamily(candidates=SINGULAR_PAIR.members, assignment=(0, 1))
        val = covering_upper_bound(builtin_generator("kl"), SINGULAR_PAIR, fam)
        assert val == pytest.approx(math.log(2.0), abs=1e-14)

    def test_chi2_single_candidate_tight(self):
        fam = CoveringFamily(
            candidates=(DiscreteDistribution(np.array([0.5, 0.5])),)
        )
        val = covering_upper_bound(builtin_generator("chi2"), SINGULAR_PAIR, fam)
        assert val == pytest.approx(1.0, abs=1e-14)  # equals the informativity

    def test_identical_members_self_candidate(self):
        member = DiscreteDistribution(np.array([0.3, 0.7]))
        ens = Ensemble(members=(member, member))
        fam = CoveringFamily(candidates=(member,))
        assert covering_upper_bound(builtin_generator("chi2"), ens, fam) == 0.0

    def test_uncovered_mass_is_infinite(self):
        fam = CoveringFamily(candidates=(DiscreteDistribution(np.array([1.0, 0.0])),))
        val = covering_upper_bound(builtin_generator("kl"), SINGULAR_PAIR, fam)
        assert math.isinf(val)

    @pytest.mark.parametrize(
        "kind,m,err,expected",
        [
            ("kl", 1, 0.0, 0.0),
            ("chi2", 4, 1.0, 7.0),
            ("hellinger_sq", 4, 0.0, 1.0),
            ("power_l", 4, 1.0, 31.0),  # l=3: 16*2 - 1
        ],
    )
    def test_specialization_values(self, kind, m, err, expected):
        assert covering_specialization(kind, m, err, l=3.0) == pytest.approx(
            expected, abs=1e-12
        )

    def test_validity_sweep(self):
        """Generic and specialized covering bounds dominate the exact
        informativity, and specializations dominate the generic form."""
        rng = np.random.default_rng(13)
        kinds = (
            ("kl", "kl", 2.0),
            ("chi2", "chi2", 2.0),
            ("power_l", "power:3", 3.0),
            ("hellinger_sq", "hellinger_sq", 2.0),
        )
        for t in range(200):
            ens = random_ensemble(rng, n_max=5, s_max=6)
            fam = CoveringFamily(
                candidates=tuple(
                    DiscreteDistribution(rng.dirichlet(np.ones(ens.support_size)))
                    for _ in range(int(rng.integers(1, 5)))
                )
            )
            kind, gen_name, l = kinds[t % 4]
            gen = builtin_generator(gen_name)
            exact = informativity_closed_form(gen_name, ens).value
            generic = covering_upper_bound(gen, ens, fam)
            err, _ = covering_approx_error(gen, ens, fam)
            special = covering_specialization(kind, fam.size, err, l=l)
            assert generic >= exact - 1e-9
            assert special >= generic - 1e-12

    def test_kl_generic_identity(self):
        """For the log generator the generic bound collapses exactly to
        log M + average assigned divergence."""
        rng = np.random.default_rng(14)
        gen = builtin_generator("kl")
        for _ in range(40):
            ens = random_ensemble(rng)
            fam = CoveringFamily(
                candidates=tuple(
                    DiscreteDistribution(rng.dirichlet(np.ones(ens.support_size)))
                    for _ in range(3)
                )
            )
            _, assignment = covering_approx_error(gen, ens, fam)
            avg = float(
                np.mean(
                    [
                        eval_divergence(gen, m, fam.candidates[j])
                        for m, j in zip(ens.members, assignment)
                    ]
                )
            )
            generic = covering_upper_bound(gen, ens, fam)
            assert generic == pytest.approx(math.log(fam.size) + avg, abs=1e-9)

    def test_compensation_identity(self):
        rng = np.random.default_rng(15)
        kl = builtin_generator("kl")
        for _ in range(100):
            ens = random_ensemble(rng, n_max=5, s_max=8)
            q = DiscreteDistribution(rng.dirichlet(np.ones(ens.support_size)))
            mix = DiscreteDistribution(ens.pmf_matrix().mean(axis=0))
            lhs = sum(eval_divergence(kl, m, q) for m in ens.members)
            rhs = sum(eval_divergence(kl, m, mix) for m in ens.members)
            rhs += ens.size * eval_divergence(kl, mix, q)
            assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_bad_covering_inputs(self):
        with pytest.raises(ValueError):
            CoveringFamily(candidates=())
        with pytest.raises(ValueError):
            CoveringFamily(
                candidates=(DiscreteDistribution(np.array([1.0, 0.0])),),
                assignment=(2,),
            )
        with pytest.raises(ValueError):
            covering_specialization("kl", 0, 0.0)

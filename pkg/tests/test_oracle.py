import math

import numpy as np
import pytest

from qmphase import oracle
from qmphase.core import MIXED, X_UP, Z_UP, ModelParams
from qmphase.dp import afm_distribution, fm_distribution, total_variation
from qmphase.errors import ParameterError, SizeLimitError


def binomial(n):
    return np.array([math.comb(n, k) for k in range(n + 1)]) / 2.0**n


class TestBruteForce:
    @pytest.mark.parametrize("theta, omega", [(0.3, 0.2), (1.0, 2.0), (math.pi / 2, math.pi / 2)])
    def test_single_step(self, theta, omega):
        outcomes, vectors = oracle.enumerate_records(ModelParams(theta, omega), n=1)
        p_up = vectors[outcomes[:, 0] == 1, 0][0]
        assert p_up == pytest.approx(0.5 * (1 - math.sin(theta) * math.sin(omega)), abs=1e-15)

    def test_projective_single_step(self):
        outcomes, vectors = oracle.enumerate_records(ModelParams(math.pi / 2, math.pi / 2), n=1)
        probs = dict(zip(outcomes[:, 0].tolist(), vectors[:, 0]))
        assert probs[1] == pytest.approx(0.0, abs=1e-16)
        assert probs[-1] == pytest.approx(1.0, abs=1e-16)

    @pytest.mark.parametrize("n", [2, 6, 12])
    def test_total_probability(self, n):
        for p0 in (X_UP, MIXED, Z_UP):
            params = ModelParams(0.9, 2.2, 0.0, n, p0)
            assert abs(oracle.brute_force_fm(params).total() - 1) <= 1e-13
            assert abs(oracle.brute_force_afm(params).total() - 1) <= 1e-13

    def test_matches_dp(self):
        params = ModelParams(0.7, 0.9, 0.0, 10, X_UP)
        assert np.abs(oracle.brute_force_fm(params).table - fm_distribution(params).table).max() <= 1e-12
        assert np.abs(oracle.brute_force_afm(params).table - afm_distribution(params).table).max() <= 1e-12

    def test_records_are_distinct(self):
        outcomes, _ = oracle.enumerate_records(ModelParams(0.5, 0.5, n_meas=6))
        assert len({tuple(r) for r in outcomes.tolist()}) == 64

    def test_afm_index(self):
        rec = np.array([[1, -1, -1, 1, 1, 1], [1, -1, 1, -1, -1, -1]])
        assert oracle.afm_index(rec).tolist() == [0, 2]

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            oracle.brute_force_fm(ModelParams(0.5, 0.5, n_meas=22))


class TestMonteCarlo:
    PARAMS = ModelParams(2 * math.pi / 5, 0.5)

    def test_deterministic(self):
        a = oracle.monte_carlo_sample(self.PARAMS, 500, seed=42)
        b = oracle.monte_carlo_sample(self.PARAMS, 500, seed=42)
        np.testing.assert_array_equal(a.fm_counts, b.fm_counts)
        np.testing.assert_array_equal(a.afm_counts, b.afm_counts)

    def test_independent_of_chunking_and_workers(self):
        a = oracle.monte_carlo_sample(self.PARAMS, 700, seed=9, workers=1, chunk=700)
        b = oracle.monte_carlo_sample(self.PARAMS, 700, seed=9, workers=2, chunk=64)
        np.testing.assert_array_equal(a.fm_counts, b.fm_counts)
        np.testing.assert_array_equal(a.afm_counts, b.afm_counts)

    def test_seed_changes_sample(self):
        a = oracle.monte_carlo_sample(self.PARAMS, 500, seed=1)
        b = oracle.monte_carlo_sample(self.PARAMS, 500, seed=2)
        assert not np.array_equal(a.fm_counts, b.fm_counts)

    def test_unbiased_coin(self):
        n_traj = 100_000
        r = oracle.monte_carlo_sample(ModelParams(0.0, 0.7), n_traj, seed=3)
        mean = (np.arange(101) * r.fm_counts).sum() / n_traj
        sigma = math.sqrt(100 / 4) / math.sqrt(n_traj)
        assert abs(mean - 50) <= 3 * sigma

    def test_converges_to_dp(self):
        exact = fm_distribution(self.PARAMS)
        tvs = [
            total_variation(oracle.monte_carlo_sample(self.PARAMS, n, seed=11).fm_histogram(), exact)
            for n in (1_000, 10_000, 100_000)
        ]
        assert tvs[0] > tvs[1] > tvs[2]
        # five seeds at 1e5 trajectories gave TV in [0.0093, 0.0113]
        assert tvs[2] <= 0.02

    def test_counts_sum(self):
        r = oracle.monte_carlo_sample(self.PARAMS, 321, seed=0)
        assert r.fm_counts.sum() == r.afm_counts.sum() == 321
        rows = list(r.rows("FM"))
        assert rows[0][3:] == (321, 0)

    @pytest.mark.parametrize("kwargs", [dict(n_traj=0, seed=1), dict(n_traj=10, seed=-1), dict(n_traj=10, seed=2**64)])
    def test_bad_arguments(self, kwargs):
        with pytest.raises(ParameterError):
            oracle.monte_carlo_sample(self.PARAMS, **kwargs)


class TestProjective:
    def test_no_field_freezes(self):
        d = oracle.projective_distribution(0.0, MIXED, 10)
        expected = np.zeros(11)
        expected[0] = expected[10] = 0.5
        np.testing.assert_allclose(d.probabilities, expected, atol=1e-16)

    def test_quarter_turn_is_binomial(self):
        d = oracle.projective_distribution(math.pi / 2, MIXED, 12)
        np.testing.assert_allclose(d.probabilities, binomial(12), atol=1e-15)
        # from sigma_x the first outcome is certainly -1, the remaining 11 are fair
        d = oracle.projective_distribution(math.pi / 2, X_UP, 12)
        np.testing.assert_allclose(d.probabilities, np.append(binomial(11), 0.0), atol=1e-15)

    def test_matches_enumeration(self):
        params = ModelParams(math.pi / 2, 0.8, 0.0, 10, X_UP)
        brute = oracle.brute_force_fm(params)
        assert np.abs(oracle.projective_distribution(0.8, X_UP, 10).table - brute.table).max() <= 1e-12


class TestNearestNeighbourIsing:
    def test_zero_coupling_binomial(self):
        assert oracle.nn_coupling(math.pi / 2) == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(oracle.ising_nn_distribution(math.pi / 2, 10).probabilities, binomial(10), atol=1e-15)

    @pytest.mark.parametrize("omega", [0.5, 1.0, 2.0, 2.6])
    def test_equals_projective_chain(self, omega):
        gibbs = oracle.ising_nn_distribution(omega, 8)
        chain = oracle.projective_distribution(omega, MIXED, 8)
        assert np.abs(gibbs.probabilities - chain.probabilities).max() <= 1e-12

    @pytest.mark.parametrize("omega", [0.3, 1.2, 2.5])
    def test_coupling_round_trip(self, omega):
        assert math.tanh(oracle.nn_coupling(omega)) == pytest.approx(math.cos(omega), abs=1e-15)

    def test_singular_limits(self):
        frozen = oracle.ising_nn_distribution(0.0, 6).probabilities
        assert frozen[0] == frozen[6] == 0.5
        alternating = oracle.ising_nn_distribution(math.pi, 6).probabilities
        assert alternating[3] == 1.0
        with pytest.raises(ParameterError):
            oracle.nn_coupling(0.0)

    def test_matches_enumerated_gibbs(self):
        # same chain written as a coupling matrix and summed over all 2^N configurations
        n, k = 9, oracle.nn_coupling(1.1)
        j = np.zeros((n, n))
        for i in range(n - 1):
            j[i, i + 1] = j[i + 1, i] = k
        enumerated = oracle.gibbs_enumerate_fm(oracle.IsingSpec(n, couplings=j))
        np.testing.assert_allclose(oracle.ising_nn_distribution(1.1, n).probabilities, enumerated, atol=1e-14)


class TestLongRange:
    def test_zero_theta_binomial(self):
        np.testing.assert_allclose(oracle.long_range_gibbs(0.0, 0.7, 10).probabilities, binomial(10), atol=1e-15)

    def test_zero_field_uniform_couplings(self):
        j, _ = oracle.coupling_profile(0.05, 0.0, 8)
        off = j[~np.eye(8, dtype=bool)]
        np.testing.assert_allclose(off, 0.05**2)

    def test_closer_for_weaker_measurement(self):
        dp = lambda th: fm_distribution(ModelParams(th, 0.4, 0.0, 12, MIXED))  # noqa: E731
        tv_05 = total_variation(dp(0.05), oracle.long_range_gibbs(0.05, 0.4, 12))
        tv_10 = total_variation(dp(0.1), oracle.long_range_gibbs(0.1, 0.4, 12))
        assert tv_05 < tv_10

    @pytest.mark.parametrize("omega", [0.2, 0.8])
    def test_monotone_convergence(self, omega):
        tvs = [
            total_variation(
                fm_distribution(ModelParams(th, omega, 0.0, 12, MIXED)), oracle.long_range_gibbs(th, omega, 12)
            )
            for th in (0.1, 0.05, 0.02)
        ]
        assert tvs[0] > tvs[1] > tvs[2]

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            oracle.long_range_gibbs(0.1, 0.1, 21)


class TestCouplingProfile:
    def test_period_n100(self):
        _, period = oracle.coupling_profile(0.1, 0.3, 100)
        assert period == pytest.approx(2 * math.pi / 98)
        assert period == pytest.approx(0.0641, abs=5e-5)
        assert abs(period - 0.063) < 0.002

    def test_period_n1000(self):
        _, period = oracle.coupling_profile(0.1, 0.3, 1000)
        assert period == pytest.approx(0.0063, abs=5e-6)

    def test_longest_range_sign_flip(self):
        n, theta = 50, 0.2
        _, period = oracle.coupling_profile(theta, 0.0, n)
        j, _ = oracle.coupling_profile(theta, period / 2, n)
        assert j[0, n - 1] == pytest.approx(-(theta**2), abs=1e-15)

    def test_structure(self):
        j, _ = oracle.coupling_profile(0.3, 1.7, 15)
        np.testing.assert_array_equal(j, j.T)
        assert np.all(np.diag(j) == 0)
        assert np.abs(j).max() <= 0.09 + 1e-15
        assert j[0, 1] == pytest.approx(0.09)

    def test_ising_spec_validation(self):
        with pytest.raises(ParameterError):
            oracle.IsingSpec(3)
        with pytest.raises(ParameterError):
            oracle.IsingSpec(2, couplings=[[0.0, 1.0], [0.5, 0.0]])

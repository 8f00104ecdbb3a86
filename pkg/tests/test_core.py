import math
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmphase.core import (
    MIXED,
    X_UP,
    ModelParams,
    StateVector,
    branch_probability,
    evolving_matrix,
    precess,
    step,
)
from qmphase.errors import DegenerateStateError, ParameterError

thetas = st.floats(0.0, math.pi / 2)
omegas = st.floats(0.0, math.pi)
r_taus = st.floats(0.0, 2.0)


@st.composite
def bloch_states(draw, rho0=None):
    r = draw(st.floats(0.0, 1.0))
    phi = draw(st.floats(0.0, 2 * math.pi))
    w = draw(st.floats(1e-3, 1.0)) if rho0 is None else rho0
    return StateVector(w, w * r * math.cos(phi), w * r * math.sin(phi))


def params(theta, omega, r_tau=0.0, n=2, initial=X_UP):
    return ModelParams(theta, omega, r_tau, n, initial)


def assert_state(p, expected, atol=1e-15):
    np.testing.assert_allclose(p.as_array(), expected, atol=atol, rtol=0)


class TestPrecess:
    def test_identity(self):
        assert_state(precess(StateVector(1, 0, 1), 0.0), [1, 0, 1])

    def test_quarter_turn(self):
        assert_state(precess(StateVector(1, 0, 1), math.pi / 2), [1, -1, 0])

    @given(omegas)
    def test_norm_preserved(self, omega):
        out = precess(StateVector(1.0, 0.6, 0.8), omega)
        assert out.rho0 == 1.0
        assert abs(out.bloch_norm2 - 1.0) <= 1e-12


class TestEvolvingMatrix:
    def test_projective_no_field(self):
        m = evolving_matrix(params(math.pi / 2, 0.0), +1).entries
        np.testing.assert_allclose(m, 0.5 * np.array([[1, 1, 0], [1, 1, 0], [0, 0, 0]]), atol=1e-16)

    @pytest.mark.parametrize("alpha", [1, -1])
    def test_no_measurement_is_half_rotation(self, alpha):
        w = 0.73
        m = evolving_matrix(params(0.0, w), alpha).entries
        c, s = math.cos(w), math.sin(w)
        np.testing.assert_allclose(m, 0.5 * np.array([[1, 0, 0], [0, c, -s], [0, s, c]]), atol=1e-16)

    def test_relaxation_damps_bloch_columns(self):
        m0 = evolving_matrix(params(0.4, 0.9), 1).entries
        m1 = evolving_matrix(params(0.4, 0.9, r_tau=0.3), 1).entries
        np.testing.assert_allclose(m1[:, 0], m0[:, 0])
        np.testing.assert_allclose(m1[:, 1:], m0[:, 1:] * math.exp(-0.3))

    @given(thetas, omegas, r_taus)
    def test_branch_sum_first_row(self, theta, omega, r_tau):
        p = params(theta, omega, r_tau)
        total = evolving_matrix(p, 1).entries + evolving_matrix(p, -1).entries
        assert total[0].tolist() == [1.0, 0.0, 0.0]
        assert np.abs(evolving_matrix(p, 1).entries).max() <= 1.0

    def test_entries_read_only(self):
        m = evolving_matrix(params(0.4, 0.9), 1)
        with pytest.raises(ValueError):
            m.entries[0, 0] = 2.0

    def test_rejects_bad_alpha(self):
        with pytest.raises(ParameterError):
            evolving_matrix(params(0.4, 0.9), 0)


class TestStep:
    def test_projective_up_impossible(self):
        assert_state(step(StateVector(1, 0, 1), params(math.pi / 2, math.pi / 2), +1), [0, 0, 0])

    def test_projective_down_certain(self):
        assert_state(step(StateVector(1, 0, 1), params(math.pi / 2, math.pi / 2), -1), [1, -1, 0])

    @given(thetas, omegas, r_taus)
    def test_mixed_state_unbiased(self, theta, omega, r_tau):
        assert step(MIXED, params(theta, omega, r_tau), +1).rho0 == 0.5

    @given(thetas, omegas, r_taus, bloch_states(rho0=1.0))
    def test_probability_conserved(self, theta, omega, r_tau, p):
        pr = params(theta, omega, r_tau)
        total = step(p, pr, 1).rho0 + step(p, pr, -1).rho0
        assert abs(total - 1.0) <= 1e-14

    @given(thetas, omegas, r_taus, bloch_states())
    def test_bloch_cone_preserved(self, theta, omega, r_tau, p):
        for alpha in (1, -1):
            out = step(p, params(theta, omega, r_tau), alpha)
            assert out.bloch_norm2 <= out.rho0**2 + 1e-12
            assert out.rho0 >= -1e-15

    @given(thetas, omegas, r_taus, bloch_states())
    def test_spin_flip_covariance(self, theta, omega, r_tau, p):
        pr = params(theta, omega, r_tau)
        for alpha in (1, -1):
            lhs = step(p.flipped(), pr, -alpha)
            rhs = step(p, pr, alpha).flipped()
            np.testing.assert_allclose(lhs.as_array(), rhs.as_array(), atol=1e-15)

    @given(omegas, bloch_states(rho0=1.0))
    def test_projective_probability(self, omega, p):
        pr = params(math.pi / 2, omega)
        for alpha in (1, -1):
            expected = 0.5 * (1 + alpha * (p.rhoz * math.cos(omega) - p.rhox * math.sin(omega)))
            assert abs(step(p, pr, alpha).rho0 - expected) <= 1e-15

    def test_conservation_over_many_steps(self):
        rng = np.random.default_rng(5)
        pr = params(0.9, 1.3, 0.01)
        p = X_UP
        total = 1.0
        # weight of the summed branches stays exactly 1 along a sampled path
        for _ in range(1000):
            up, down = step(p, pr, 1), step(p, pr, -1)
            total = up.rho0 + down.rho0
            nxt = up if rng.random() < up.rho0 else down
            p = StateVector.from_array(nxt.as_array() / nxt.rho0)
        assert abs(total - 1.0) <= 1e-10


class TestBranchProbability:
    def test_deterministic_branch(self):
        pr = params(math.pi / 2, math.pi / 2)
        assert branch_probability(StateVector(1, 0, 1), pr, -1) == pytest.approx(1.0, abs=1e-15)

    def test_mixed_symmetric(self):
        pr = params(1.1, 0.4)
        assert branch_probability(MIXED, pr, 1) == 0.5
        assert branch_probability(MIXED, pr, -1) == 0.5

    @settings(max_examples=1000)
    @given(thetas, omegas, r_taus, bloch_states())
    def test_sums_to_one(self, theta, omega, r_tau, p):
        pr = params(theta, omega, r_tau)
        assert abs(branch_probability(p, pr, 1) + branch_probability(p, pr, -1) - 1) <= 1e-12

    def test_degenerate(self):
        with pytest.raises(DegenerateStateError):
            branch_probability(StateVector(0.0, 0.0, 0.0), params(0.3, 0.3), 1)


class TestModelParams:
    @pytest.mark.parametrize(
        "kwargs, message",
        [
            (dict(theta=-0.1, omega=0.5), "theta must lie in"),
            (dict(theta=1.6, omega=0.5), "theta must lie in"),
            (dict(theta=0.1, omega=4.0), "omega must lie in [0, pi]"),
            (dict(theta=0.1, omega=0.5, r_tau=-1.0), "r_tau"),
            (dict(theta=0.1, omega=0.5, n_meas=101), "n must be even"),
            (dict(theta=0.1, omega=0.5, n_meas=0), "n must be >= 2"),
            (dict(theta=0.1, omega=0.5, initial=StateVector(0.5, 0, 0)), "rho0 = 1"),
            (dict(theta=0.1, omega=0.5, initial=StateVector(1, 1, 1)), "rhoz^2 + rhox^2"),
        ],
    )
    def test_invalid(self, kwargs, message):
        with pytest.raises(ParameterError, match=re.escape(message)):
            ModelParams(**kwargs)

    def test_hashable_and_replace(self):
        p = ModelParams(0.3, 0.4)
        assert p.replace(omega=0.5).omega == 0.5
        assert hash(p) == hash(ModelParams(0.3, 0.4))

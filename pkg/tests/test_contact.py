import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactopt.contact import (
    ContactHamiltonian,
    ContactState,
    PointMap,
    Tangent,
    check_hamiltonian_gradients,
    conformal_factor,
    contact_field_std1,
    contact_field_std2,
    dissipation_residual,
    eta_std1,
    eta_std2,
    map_F,
    map_F_jacobian,
    reference_integrate,
)
from contactopt.integrators import RelativisticParams, crgd_hamiltonian
from contactopt.objectives import make_random_quadratic


def state_of(x, p, s=0.0, t=1.0):
    return ContactState(X=np.atleast_1d(np.asarray(x, float)),
                        P=np.atleast_1d(np.asarray(p, float)), S=s, t=t)


def random_states(seed, n, dim):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield ContactState(
            X=rng.standard_normal(dim),
            P=rng.standard_normal(dim),
            S=float(rng.standard_normal()),
            t=float(rng.uniform(0.5, 3.0)),
        )


class TestContactState:
    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ContactState(X=np.ones(3), P=np.ones(2), S=0.0, t=0.0)

    def test_arrays_are_frozen_copies(self):
        x = np.ones(2)
        s = ContactState(X=x, P=np.zeros(2), S=0.0, t=0.0)
        x[0] = 99.0
        assert s.X[0] == 1.0
        with pytest.raises(ValueError):
            s.X[0] = 5.0

    def test_coords_roundtrip(self):
        s = state_of([1.0, 2.0], [3.0, 4.0], s=5.0, t=0.7)
        z = s.coords()
        np.testing.assert_array_equal(z, [1.0, 2.0, 3.0, 4.0, 5.0])
        back = ContactState.from_coords(z, 0.7)
        np.testing.assert_array_equal(back.X, s.X)
        np.testing.assert_array_equal(back.P, s.P)
        assert back.S == s.S and back.t == s.t

    def test_is_finite(self):
        assert state_of([1.0], [2.0]).is_finite()
        assert not state_of([np.inf], [2.0]).is_finite()

    def test_tangent_length_checked_by_forms(self):
        s = state_of([1.0, 2.0], [0.0, 0.0])
        v = Tangent(dX=np.ones(3), dP=np.ones(3), dS=0.0)
        with pytest.raises(ValueError):
            eta_std1(s, v)


class TestContactForms:
    def test_std1_reduces_to_ds_at_zero_momentum(self):
        s = state_of([3.0, -1.0], [0.0, 0.0])
        v = Tangent(dX=np.array([7.0, 2.0]), dP=np.array([1.0, 1.0]), dS=1.0)
        assert eta_std1(s, v) == 1.0

    def test_std1_momentum_pairing(self):
        s = state_of([0.0], [2.0])
        v = Tangent(dX=np.array([3.0]), dP=np.array([0.0]), dS=0.0)
        assert eta_std1(s, v) == -6.0

    def test_std2_at_origin(self):
        s = state_of([0.0], [0.0])
        v = Tangent(dX=np.array([4.0]), dP=np.array([5.0]), dS=2.5)
        assert eta_std2(s, v) == 2.5

    def test_std2_antisymmetric_cancellation(self):
        s = state_of([1.0], [1.0])
        v = Tangent(dX=np.array([1.0]), dP=np.array([1.0]), dS=0.0)
        assert eta_std2(s, v) == 0.0

    @given(st.floats(-10, 10), st.floats(-10, 10))
    @settings(max_examples=30, deadline=None)
    def test_linearity_in_tangent(self, a, b):
        rng = np.random.default_rng(3)
        s = next(iter(random_states(8, 1, 3)))
        v = Tangent(dX=rng.standard_normal(3), dP=rng.standard_normal(3),
                    dS=float(rng.standard_normal()))
        w = Tangent(dX=rng.standard_normal(3), dP=rng.standard_normal(3),
                    dS=float(rng.standard_normal()))
        combo = Tangent(dX=a * v.dX + b * w.dX, dP=a * v.dP + b * w.dP,
                        dS=a * v.dS + b * w.dS)
        for eta in (eta_std1, eta_std2):
            lhs = eta(s, combo)
            rhs = a * eta(s, v) + b * eta(s, w)
            assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(rhs)))


class TestMapF:
    def test_origin_fixed_point(self):
        out = map_F(state_of([0.0], [0.0]))
        assert out.X[0] == 0.0 and out.P[0] == 0.0 and out.S == 0.0

    def test_hand_value(self):
        out = map_F(state_of([1.0], [1.0]))
        assert out.X[0] == 2.0
        assert out.P[0] == 0.0
        assert out.S == -0.5

    def test_time_passes_through(self):
        out = map_F(state_of([1.0], [1.0], t=4.5))
        assert out.t == 4.5

    def test_pullback_identity_pointwise(self):
        # eta_std2 after the map, applied to the pushed tangent, equals
        # eta_std1 before the map
        rng = np.random.default_rng(12)
        for s in random_states(12, 50, 3):
            v = np.concatenate([rng.standard_normal(6), rng.standard_normal(1)])
            j = map_F_jacobian(s)
            w = j @ v
            tv = Tangent(dX=v[:3], dP=v[3:6], dS=float(v[6]))
            tw = Tangent(dX=w[:3], dP=w[3:6], dS=float(w[6]))
            assert eta_std2(map_F(s), tw) == pytest.approx(
                eta_std1(s, tv), abs=1e-12
            )

    def test_conformal_factor_is_one(self):
        pm = PointMap("map_F", map_F, map_F_jacobian)
        for s in random_states(21, 50, 4):
            lam, res = conformal_factor(pm, "std2", s, source_form="std1")
            assert lam == pytest.approx(1.0, abs=1e-12)
            assert res < 1e-10

    def test_conformal_factor_without_declared_jacobian(self):
        # differenced Jacobian is coarser but must stay inside the blanket
        # certification tolerance
        for s in random_states(22, 20, 4):
            lam, res = conformal_factor(map_F, "std2", s, source_form="std1")
            assert lam == pytest.approx(1.0, abs=1e-8)
            assert res < 1e-8


def quadratic_hamiltonian():
    # H = (|P|^2 + |X|^2) / 2, S- and t-independent
    return ContactHamiltonian(
        value=lambda x, p, s, t: 0.5 * float(p @ p + x @ x),
        grad_X=lambda x, p, s, t: x,
        grad_P=lambda x, p, s, t: p,
        dS=lambda x, p, s, t: 0.0,
        dt=lambda x, p, s, t: 0.0,
    )


class TestContactFields:
    def test_std1_s_independent_gives_hamilton_equations(self):
        ham = quadratic_hamiltonian()
        for s in random_states(4, 10, 3):
            v = contact_field_std1(ham, s)
            np.testing.assert_allclose(v.dX, s.P, atol=1e-14)
            np.testing.assert_allclose(v.dP, -s.X, atol=1e-14)
            assert v.dS == pytest.approx(
                float(s.P @ s.P) - ham.at(s), abs=1e-12
            )

    def test_std1_linear_s_term_damps_momentum(self):
        c = 0.7
        ham = ContactHamiltonian(
            value=lambda x, p, s, t: 0.5 * float(p @ p + x @ x) + c * s,
            grad_X=lambda x, p, s, t: x,
            grad_P=lambda x, p, s, t: p,
            dS=lambda x, p, s, t: c,
            dt=lambda x, p, s, t: 0.0,
        )
        for s in random_states(5, 10, 2):
            v = contact_field_std1(ham, s)
            np.testing.assert_allclose(v.dP, -s.X - c * s.P, atol=1e-14)

    def test_std2_quadratic_field_matrix(self):
        # H = (|P|^2 + |X|^2) / 2 under the symmetric form:
        # dX = P - 0, dP = -X - 0, dS = (<X, X> + <P, P>)/2 - H = H - H... 0
        ham = quadratic_hamiltonian()
        for s in random_states(6, 10, 2):
            v = contact_field_std2(ham, s)
            np.testing.assert_allclose(v.dX, s.P, atol=1e-14)
            np.testing.assert_allclose(v.dP, -s.X, atol=1e-14)
            assert v.dS == pytest.approx(0.0, abs=1e-12)

    def test_std2_anchored_linear_terms(self):
        # H = H0 + <x*, P> - <p*, X> + 2 S  =>  dX = grad_P H0 + x* - X,
        # dP = -grad_X H0 + p* - P
        x_star = np.array([0.3, -1.1])
        p_star = np.array([0.8, 0.2])
        ham = ContactHamiltonian(
            value=lambda x, p, s, t: 0.5 * float(p @ p + x @ x)
            + float(x_star @ p) - float(p_star @ x) + 2.0 * s,
            grad_X=lambda x, p, s, t: x - p_star,
            grad_P=lambda x, p, s, t: p + x_star,
            dS=lambda x, p, s, t: 2.0,
            dt=lambda x, p, s, t: 0.0,
        )
        for s in random_states(7, 10, 2):
            v = contact_field_std2(ham, s)
            np.testing.assert_allclose(v.dX, s.P + x_star - s.X, atol=1e-12)
            np.testing.assert_allclose(v.dP, -s.X + p_star - s.P, atol=1e-12)

    def test_declared_gradients_match_value(self):
        obj = make_random_quadratic(11, 3, 0.1, 2.0)
        ham = crgd_hamiltonian(
            obj, RelativisticParams(m=1.2, c=0.8, gamma=0.3, schedule="nag_like")
        )
        for s in random_states(9, 10, 3):
            assert check_hamiltonian_gradients(ham, s) < 1e-5


class TestReferenceIntegrate:
    def test_free_particle_exact(self):
        ham = ContactHamiltonian(
            value=lambda x, p, s, t: 0.5 * float(p @ p),
            grad_X=lambda x, p, s, t: np.zeros_like(x),
            grad_P=lambda x, p, s, t: p,
            dS=lambda x, p, s, t: 0.0,
            dt=lambda x, p, s, t: 0.0,
        )
        s0 = state_of([0.0, 1.0], [0.5, -0.25], t=0.0)
        traj = reference_integrate(ham, "std1", s0, 1e-3, 1000)
        assert not traj.diverged
        end = traj[-1]
        np.testing.assert_allclose(end.X, s0.X + s0.P * 1.0, atol=1e-10)
        np.testing.assert_allclose(end.P, s0.P, atol=1e-12)

    def test_harmonic_energy_drift(self):
        ham = quadratic_hamiltonian()
        s0 = state_of([1.0], [0.0], t=0.0)
        n = int(round(10 * 2 * math.pi / 1e-3))
        traj = reference_integrate(ham, "std1", s0, 1e-3, n)
        h = [ham.at(s) for s in traj]
        assert max(abs(v - h[0]) for v in h) < 1e-8

    def test_self_convergence_fourth_order(self):
        obj = make_random_quadratic(2, 2, 0.2, 1.5)
        ham = crgd_hamiltonian(obj, RelativisticParams(gamma=0.1, schedule="constant"))
        s0 = ContactState(X=np.array([1.0, -0.5]), P=np.array([0.2, 0.1]), S=0.0, t=0.0)
        ref = reference_integrate(ham, "std1", s0, 1e-3, 2000)[-1]
        errs = []
        for dt in (0.1, 0.05, 0.025):
            end = reference_integrate(ham, "std1", s0, dt, int(round(2.0 / dt)))[-1]
            errs.append(float(np.max(np.abs(end.coords() - ref.coords()))))
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        for o in orders:
            assert 3.8 <= o <= 4.2

    def test_divergence_flag_truncates(self):
        # cubic feedback blows up fast from a large start
        ham = ContactHamiltonian(
            value=lambda x, p, s, t: 0.0,
            grad_X=lambda x, p, s, t: -(x**3),
            grad_P=lambda x, p, s, t: p**3,
            dS=lambda x, p, s, t: 0.0,
            dt=lambda x, p, s, t: 0.0,
        )
        s0 = state_of([5.0], [5.0], t=0.0)
        traj = reference_integrate(ham, "std1", s0, 0.5, 50)
        assert traj.diverged
        assert len(traj) < 51
        assert all(s.is_finite() for s in traj)

    def test_argument_validation(self):
        ham = quadratic_hamiltonian()
        s0 = state_of([1.0], [0.0])
        with pytest.raises(ValueError):
            reference_integrate(ham, "std3", s0, 0.1, 10)
        with pytest.raises(ValueError):
            reference_integrate(ham, "std1", s0, -0.1, 10)
        with pytest.raises(ValueError):
            reference_integrate(ham, "std1", s0, 0.1, 0)


class TestDissipation:
    def test_conserved_when_s_and_t_independent(self):
        ham = quadratic_hamiltonian()
        traj = reference_integrate(ham, "std1", state_of([1.0], [0.3], t=0.0), 1e-3, 500)
        assert dissipation_residual(ham, traj) < 1e-6

    def test_pure_s_hamiltonian_decays_exponentially(self):
        c = 0.7
        ham = ContactHamiltonian(
            value=lambda x, p, s, t: c * s,
            grad_X=lambda x, p, s, t: np.zeros_like(x),
            grad_P=lambda x, p, s, t: np.zeros_like(p),
            dS=lambda x, p, s, t: c,
            dt=lambda x, p, s, t: 0.0,
        )
        s0 = state_of([0.0], [0.0], s=2.0, t=0.0)
        traj = reference_integrate(ham, "std1", s0, 1e-3, 1000)
        h0 = ham.at(traj[0])
        for i, s in enumerate(traj):
            expected = h0 * math.exp(-c * i * 1e-3)
            assert ham.at(s) == pytest.approx(expected, rel=1e-6)

    def test_short_trajectory_rejected(self):
        ham = quadratic_hamiltonian()
        traj = reference_integrate(ham, "std1", state_of([1.0], [0.0], t=0.0), 0.1, 1)
        with pytest.raises(ValueError):
            dissipation_residual(ham, traj)


class TestConformalFactor:
    def test_identity_map(self):
        for s in random_states(30, 5, 3):
            lam, res = conformal_factor(lambda st: st, "std1", s)
            assert lam == pytest.approx(1.0, abs=1e-10)
            assert res < 1e-9

    def test_degenerate_map_reported(self):
        target = state_of([0.0, 0.0], [0.0, 0.0])
        s = next(iter(random_states(31, 1, 2)))
        with pytest.raises(ValueError, match="degenerate"):
            conformal_factor(lambda st: target, "std1", s)

"""Desingularized quadratures, algebraic closures, sessile/pendant DAEs."""

import math

import numpy as np
import pytest

from capillary.errors import DesingularizationError, RegimeError
from capillary.quasistatic import (
    DtController,
    J_of,
    PendantDae,
    QuasiStaticState,
    SessileDae,
    cm_bound,
    compatible_pendant_data,
    compatible_sessile_data,
    dae_step_sessile,
    desingularized_b,
    desingularized_volume,
    equilibrium_sessile,
    lambda_from_apex,
    profile_energy,
    reconstruct_profile,
    solve_algebraic,
    state_volume,
)

TH_IN = 1.3 * math.pi / 8
TH_Y = 3.9 * math.pi / 8
KAPPA = 0.1
SIGMA = -math.cos(TH_Y)


class TestJ:
    def test_at_zero(self):
        assert J_of(0.0, 1.0, 0.3, 0.7, 0.1) == pytest.approx(math.cos(0.7))

    def test_apex_constraint(self):
        u_m, theta, kappa = 0.8, 0.9, 0.4
        lam = lambda_from_apex(u_m, theta, kappa)
        assert J_of(u_m, u_m, lam, theta, kappa) == pytest.approx(1.0, abs=1e-14)

    def test_direct_value(self):
        # kappa=0, lam=1, theta=pi/2, u=0.5 -> 0.5
        assert J_of(0.5, 1.0, 1.0, math.pi / 2, 0.0) == pytest.approx(0.5, abs=1e-15)


class TestDesingularizedQuadratures:
    def test_quarter_circle(self):
        # kappa=0, theta=pi/2, lam=1/u_m: arc of radius u_m, b = u_m
        u_m = 0.73
        b = desingularized_b(u_m, 1.0 / u_m, math.pi / 2, 0.0, 2000)
        assert b == pytest.approx(u_m, abs=1e-6)

    def test_cap_radius_relation(self):
        # kappa=0, theta=pi/3: b = R sin(theta) with R = 1/lam
        u_m = 0.5
        lam = lambda_from_apex(u_m, math.pi / 3, 0.0)
        b = desingularized_b(u_m, lam, math.pi / 3, 0.0, 2000)
        assert b == pytest.approx(math.sin(math.pi / 3) / lam, abs=1e-6)

    def test_half_volume_quarter_circle(self):
        # theta=pi/2 cap: V = (pi/2) b^2, so half volume = (pi/4) b^2
        u_m = 0.73
        hv = desingularized_volume(u_m, 1.0 / u_m, math.pi / 2, 0.0, 2000)
        assert hv == pytest.approx(0.25 * math.pi * u_m**2, abs=1e-6)

    def test_vanishing_apex(self):
        hv = desingularized_volume(1e-8, lambda_from_apex(1e-8, 0.3, 0.0), 0.3, 0.0, 200)
        assert abs(hv) < 1e-8

    def test_refinement_order_two(self):
        u_m = 0.73
        exact_b = u_m
        errs = [
            abs(desingularized_b(u_m, 1.0 / u_m, math.pi / 2, 0.0, n) - exact_b)
            for n in (250, 500, 1000)
        ]
        rates = -np.diff(np.log(errs)) / math.log(2.0)
        assert np.all(rates > 1.9)
        exact_v = 0.25 * math.pi * u_m**2
        errs = [
            abs(desingularized_volume(u_m, 1.0 / u_m, math.pi / 2, 0.0, n) - exact_v)
            for n in (250, 500, 1000)
        ]
        rates = -np.diff(np.log(errs)) / math.log(2.0)
        assert np.all(rates > 1.9)

    def test_radicand_guard(self):
        # lam chosen so 2 lam - kappa (u_m + u) < 0 somewhere
        with pytest.raises(DesingularizationError):
            desingularized_b(1.0, 0.4, 0.5, 1.0, 100)


class TestSolveAlgebraic:
    def test_round_trip(self):
        u_m, theta = 1.0, TH_IN
        lam = lambda_from_apex(u_m, theta, KAPPA)
        volume = 2.0 * desingularized_volume(u_m, lam, theta, KAPPA, 20000)
        b = desingularized_b(u_m, lam, theta, KAPPA, 20000)
        u_m2, lam2, theta2 = solve_algebraic(b, KAPPA, volume, 20000)
        assert u_m2 == pytest.approx(u_m, abs=1e-9)
        assert theta2 == pytest.approx(theta, abs=1e-9)
        assert lam2 == pytest.approx(lam, abs=1e-9)

    def test_published_initial_boundary(self):
        # solving at the published b(0) recovers u_m = 1
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 20000)
        volume = state_volume(st0, KAPPA, 20000)
        u_m, _, theta = solve_algebraic(4.532141803665366, KAPPA, volume, 20000)
        assert u_m == pytest.approx(1.0, abs=1e-6)
        assert theta == pytest.approx(TH_IN, abs=1e-6)

    def test_apex_height_decreases_with_b(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 4000)
        volume = state_volume(st0, KAPPA, 4000)
        bs = np.linspace(st0.b * 0.96, st0.b * 1.04, 7)
        u_ms = [solve_algebraic(float(b), KAPPA, volume, 4000)[0] for b in bs]
        assert np.all(np.diff(u_ms) < 0.0)

    def test_sessile_needs_positive_kappa(self):
        with pytest.raises(RegimeError):
            solve_algebraic(1.0, -0.1, 1.0)


class TestCompatibleData:
    def test_matches_published_text_value(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 20000)
        assert st0.b == pytest.approx(4.532141803665366, abs=1e-8)

    def test_kappa_zero_limit_is_published_caption_value(self):
        # the caption's b(0) is the kappa = 0 spherical cap with u_m = 1
        st0 = compatible_sessile_data(1.0, TH_IN, 0.0, 20000)
        assert st0.b == pytest.approx(3.832203449327490, abs=1e-8)


class TestSessileDae:
    def test_stationary_at_young_angle(self):
        dae_equil = equilibrium_sessile(SIGMA, KAPPA, math.pi, 4000)
        dae = SessileDae(SIGMA, KAPPA, math.pi, 4000)
        dae._guess = (dae_equil.u_m, math.cos(dae_equil.theta))
        rhs = dae.rhs(0.0, np.array([dae_equil.b]))
        assert abs(rhs[0]) < 1e-9

    def test_endpoint_b1(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 20000)
        vol = state_volume(st0, KAPPA, 20000)
        dae = SessileDae(SIGMA, KAPPA, vol, 20000)
        traj = dae.integrate(st0, 1.0, rtol=1e-12, atol=1e-12)
        assert traj[-1].b == pytest.approx(3.747880231652922, abs=1e-8)

    def test_tolerance_refinement(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 8000)
        vol = state_volume(st0, KAPPA, 8000)
        dae = SessileDae(SIGMA, KAPPA, vol, 8000)
        b_a = dae.integrate(st0, 1.0, rtol=1e-10, atol=1e-10)[-1].b
        dae2 = SessileDae(SIGMA, KAPPA, vol, 8000)
        b_b = dae2.integrate(st0, 1.0, rtol=5e-11, atol=5e-11)[-1].b
        assert abs(b_a - b_b) < 1e-9

    def test_single_step_interface(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 2000)
        vol = state_volume(st0, KAPPA, 2000)
        ctrl = DtController(dt=1e-3)
        st1 = dae_step_sessile(st0, SIGMA, KAPPA, vol, ctrl, 2000)
        assert st1.t > st0.t
        assert st1.b < st0.b  # receding toward equilibrium

    def test_cos_theta_increasing_in_b(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 4000)
        vol = state_volume(st0, KAPPA, 4000)
        dae = SessileDae(SIGMA, KAPPA, vol, 4000)
        traj = dae.integrate(st0, 1.0)
        bs = np.array([s.b for s in traj])
        cths = np.cos([s.theta for s in traj])
        order = np.argsort(bs)
        assert np.all(np.diff(cths[order]) > 0.0)

    def test_algebraic_residuals_along_trajectory(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 4000)
        vol = state_volume(st0, KAPPA, 4000)
        dae = SessileDae(SIGMA, KAPPA, vol, 4000)
        for st in dae.integrate(st0, 0.5):
            assert J_of(st.u_m, st.u_m, st.lam, st.theta, KAPPA) == pytest.approx(1.0, abs=1e-10)
            hv = desingularized_volume(st.u_m, st.lam, st.theta, KAPPA, 4000)
            assert hv == pytest.approx(0.5 * vol, abs=1e-10 * max(1.0, vol))
            bq = desingularized_b(st.u_m, st.lam, st.theta, KAPPA, 4000)
            assert bq == pytest.approx(st.b, abs=1e-10 * max(1.0, st.b))

    def test_energy_non_increasing(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 4000)
        vol = state_volume(st0, KAPPA, 4000)
        dae = SessileDae(SIGMA, KAPPA, vol, 4000)
        traj = dae.integrate(st0, 2.0)
        energies = [profile_energy(s, SIGMA, KAPPA, 4000) for s in traj]
        assert np.all(np.diff(energies) <= 1e-8)

    def test_cm_bound_along_trajectory(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 4000)
        vol = state_volume(st0, KAPPA, 4000)
        dae = SessileDae(SIGMA, KAPPA, vol, 4000)
        traj = dae.integrate(st0, 1.0)
        for s0, s1 in zip(traj, traj[1:]):
            if abs(s1.b - s0.b) < 1e-12:
                continue
            slope = abs(math.cos(s1.theta) - math.cos(s0.theta)) / abs(s1.b - s0.b)
            cm = cm_bound(max(s0.b, s1.b), max(s0.u_m, s1.u_m), vol, KAPPA)
            assert slope <= cm * (1.0 + 1e-6)


class TestEquilibrium:
    def test_young_angle_in_small_kappa_limit(self):
        eq = equilibrium_sessile(-0.5, 1e-6, math.pi, 4000)
        assert eq.theta == pytest.approx(math.acos(0.5), abs=1e-9)

    def test_fixed_point_of_stepping(self):
        eq = equilibrium_sessile(SIGMA, KAPPA, math.pi, 4000)
        ctrl = DtController(dt=1e-2)
        nxt = dae_step_sessile(eq._replace_t(0.0) if hasattr(eq, "_replace_t") else
                               QuasiStaticState(eq.b, eq.u_m, eq.theta, eq.lam, 0.0),
                               SIGMA, KAPPA, math.pi, ctrl, 4000)
        assert abs(nxt.b - eq.b) <= 1e-12

    def test_matches_long_time_dae_limit(self):
        st0 = compatible_sessile_data(1.0, TH_IN, KAPPA, 8000)
        vol = state_volume(st0, KAPPA, 8000)
        eq = equilibrium_sessile(SIGMA, KAPPA, vol, 8000)
        dae = SessileDae(SIGMA, KAPPA, vol, 8000)
        traj = dae.integrate(st0, 60.0)
        assert traj[-1].b == pytest.approx(eq.b, abs=1e-6)


class TestReconstructProfile:
    def test_circle_oracle(self):
        # kappa = 0 arc: X(u) = sqrt(R^2 - (u - u*)^2) exactly
        u_m, theta = 0.6, math.pi / 3
        lam = lambda_from_apex(u_m, theta, 0.0)
        radius = 1.0 / lam
        st = QuasiStaticState(b=0.0, u_m=u_m, theta=theta, lam=lam, t=0.0)
        u, X = reconstruct_profile(st, 0.0, 2000)
        centre = u_m - radius
        X_exact = np.sqrt(np.maximum(radius**2 - (u - centre) ** 2, 0.0))
        assert np.max(np.abs(X - X_exact)) <= 1e-6

    def test_apex_anchored(self):
        st = compatible_sessile_data(1.0, TH_IN, KAPPA, 500)
        u, X = reconstruct_profile(st, KAPPA, 500)
        assert u[-1] == pytest.approx(st.u_m)
        assert X[-1] == 0.0
        assert X[0] == pytest.approx(st.b, abs=1e-5)

    def test_monotone_decreasing_in_u(self):
        st = compatible_sessile_data(1.0, TH_IN, KAPPA, 1000)
        _, X = reconstruct_profile(st, KAPPA, 1000)
        assert np.all(np.diff(X) < 0.0)  # u ascending -> X strictly decreasing

    def test_trapezoid_volume_matches(self):
        st = compatible_sessile_data(1.0, TH_IN, KAPPA, 4000)
        vol = state_volume(st, KAPPA, 4000)
        u, X = reconstruct_profile(st, KAPPA, 4000)
        quad = 0.5 * float(np.sum(np.diff(u) * (X[:-1] + X[1:])))
        assert quad == pytest.approx(0.5 * vol, abs=1e-6 * max(1.0, vol))


class TestCmBound:
    def test_direct_value(self):
        assert cm_bound(1.0, 1.0, math.pi, 0.0) == pytest.approx(
            6 * math.pi / (math.pi - 1.0), rel=1e-12
        )

    def test_regime_guard(self):
        with pytest.raises(RegimeError):
            cm_bound(4.0, 1.0, 2.0, 0.1)


class TestPendant:
    def test_bulge_published_values(self):
        st0, vol = compatible_pendant_data(0.3, 3 * math.pi / 16, -28.028)
        assert st0.b == pytest.approx(0.37045, abs=5e-4)
        dae = PendantDae(-math.cos(2.7 * math.pi / 8), -28.028, vol)
        traj = dae.integrate(st0, 4.0)
        assert traj[-1].b == pytest.approx(0.17438, abs=1e-3)

    def test_lightbulb_published_values(self):
        st0, vol = compatible_pendant_data(0.3, 5 * math.pi / 16, -15.05)
        assert st0.b == pytest.approx(0.36172, abs=5e-4)
        dae = PendantDae(-math.cos(4.7 * math.pi / 8), -15.05, vol)
        traj = dae.integrate(st0, 4.0)
        assert traj[-1].b == pytest.approx(0.05020, abs=1e-3)

    def test_stationary_at_young_angle(self):
        # sigma = -cos(theta(0)): contact point does not move
        st0, vol = compatible_pendant_data(0.3, 3 * math.pi / 16, -28.028)
        dae = PendantDae(-math.cos(st0.theta), -28.028, vol)
        traj = dae.integrate(st0, 0.5)
        assert abs(traj[-1].b - st0.b) < 1e-9

    def test_bond_numbers(self):
        _, vol_b = compatible_pendant_data(0.3, 3 * math.pi / 16, -28.028)
        _, vol_l = compatible_pendant_data(0.3, 5 * math.pi / 16, -15.05)
        assert 28.028 * vol_b / math.pi == pytest.approx(1.213, abs=2e-3)
        assert 15.05 * vol_l / math.pi == pytest.approx(0.708, abs=2e-3)

    def test_reconstructed_profiles(self):
        for th_in, th_y, kappa in (
            (3 * math.pi / 16, 2.7 * math.pi / 8, -28.028),
            (5 * math.pi / 16, 4.7 * math.pi / 8, -15.05),
        ):
            st0, vol = compatible_pendant_data(0.3, th_in, kappa)
            dae = PendantDae(-math.cos(th_y), kappa, vol)
            final = dae.integrate(st0, 4.0)[-1]
            u, X = reconstruct_profile(final, kappa, 2000)
            assert np.all(np.isfinite(X))
            assert X[-1] == 0.0  # X(u_m) = 0
            quad = 0.5 * float(np.sum(np.diff(u) * (X[:-1] + X[1:])))
            assert abs(quad - 0.5 * vol) <= 1e-4 * vol

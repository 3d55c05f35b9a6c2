"""Acceptance criteria, one pass/fail line per criterion (run with -s to see them).

Expensive runs (convergence sweep, breathing pair, teapot pair, groove) are
module-scoped fixtures shared across criteria.
"""

import math

import numpy as np
import pytest

import capillary.quasistatic as qs
from capillary.core import volume_of
from capillary.exact import BreathingSpec, breathing_b
from capillary.harness import (
    PAPER_SESSILE,
    build_scenario,
    convergence_study,
    sessile_compatible,
    sessile_reference,
)
from capillary.schemes import run_simulation
from capillary.substrate import FlatSubstrate

# published Table values (the printed 1.173E-5 third error of the second-order
# column is inconsistent with its own order column; 1.173E-6 is used)
TABLE_FIRST_ERRORS = (1.528e-3, 7.613e-4, 3.799e-4, 1.897e-4)
TABLE_FIRST_ORDERS = (1.0052, 1.0029, 1.0015)
TABLE_SECOND_ERRORS = (1.799e-5, 4.623e-6, 1.173e-6, 2.963e-7)
TABLE_SECOND_ORDERS = (1.9606, 1.9792, 1.9845)
M_LIST = [40, 80, 160, 320]


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def table2_study():
    import time

    t0 = time.perf_counter()
    tables = convergence_study("table2", M_LIST, ("first", "second"))
    return tables, time.perf_counter() - t0


@pytest.fixture(scope="module")
def sessile_trajectory():
    st0, vol = sessile_compatible()
    dae = qs.SessileDae(
        sigma=-math.cos(PAPER_SESSILE["theta_young"]),
        kappa=PAPER_SESSILE["kappa"],
        volume=vol,
        n_quad=20000,
    )
    return dae.integrate(st0, 1.0, rtol=1e-12, atol=1e-12), vol


@pytest.fixture(scope="module")
def breathing_runs():
    runs = {}
    for steps in (1500, 3000):
        sc = build_scenario("breathing", steps_per_span=steps)
        runs[steps] = (
            sc,
            run_simulation(sc.initial, sc.substrate, sc.params, sc.config, sc.schedule),
        )
    return runs


@pytest.fixture(scope="module")
def teapot_runs():
    runs = {}
    for sigma, T in ((-0.8, 16.0), (-0.6, 6.0)):
        sc = build_scenario("teapot", sigma=sigma, final_time=T)
        runs[sigma] = (
            sc,
            run_simulation(sc.initial, sc.substrate, sc.params, sc.config, sc.schedule),
        )
    return runs


@pytest.fixture(scope="module")
def groove_run():
    sc = build_scenario("groove")
    return sc, run_simulation(sc.initial, sc.substrate, sc.params, sc.config, sc.schedule)


class TestTable2Reproduction:
    def test_first_order_orders(self, table2_study):
        tables, _ = table2_study
        alphas = tables["first"].alphas()
        dev = max(abs(a - e) for a, e in zip(alphas, TABLE_FIRST_ORDERS))
        report(
            "table2 first-order empirical orders within +-0.05",
            dev <= 0.05,
            f"orders={[f'{a:.4f}' for a in alphas]} vs {TABLE_FIRST_ORDERS}",
        )

    def test_second_order_orders(self, table2_study):
        tables, _ = table2_study
        alphas = tables["second"].alphas()
        dev = max(abs(a - e) for a, e in zip(alphas, TABLE_SECOND_ORDERS))
        report(
            "table2 second-order empirical orders within +-0.1",
            dev <= 0.1,
            f"orders={[f'{a:.4f}' for a in alphas]} vs {TABLE_SECOND_ORDERS}",
        )

    def test_first_order_errors_within_factor_3(self, table2_study):
        tables, _ = table2_study
        errs = tables["first"].errors()
        ratios = [e / p for e, p in zip(errs, TABLE_FIRST_ERRORS)]
        ok = all(1 / 3 <= r <= 3 for r in ratios)
        report(
            "table2 first-order errors within factor 3 of published",
            ok,
            f"errors={[f'{e:.3e}' for e in errs]} ratios={[f'{r:.2f}' for r in ratios]}",
        )

    def test_second_order_errors_within_factor_3(self, table2_study):
        tables, _ = table2_study
        errs = tables["second"].errors()
        ratios = [e / p for e, p in zip(errs, TABLE_SECOND_ERRORS)]
        ok = all(1 / 3 <= r <= 3 for r in ratios)
        report(
            "table2 second-order errors within factor 3 of published",
            ok,
            f"errors={[f'{e:.3e}' for e in errs]} ratios={[f'{r:.2f}' for r in ratios]}",
        )

    def test_compatible_b0_matches_text_print(self):
        st0, _ = sessile_compatible()
        matches = abs(st0.b - PAPER_SESSILE["b0_text"]) < 1e-6
        report(
            "table2 compatible b(0) matches a printed value (text)",
            matches,
            f"b0={st0.b:.15f} text={PAPER_SESSILE['b0_text']} "
            f"caption={PAPER_SESSILE['b0_caption']} (caption = kappa=0 cap)",
        )

    def test_runtime_under_two_minutes(self, table2_study):
        _, wall = table2_study
        report("table2 study runtime under 2 minutes", wall < 120.0, f"{wall:.1f}s")


class TestSessileDaeEndpoint:
    def test_b1(self, sessile_trajectory):
        traj, _ = sessile_trajectory
        b1 = traj[-1].b
        err = abs(b1 - PAPER_SESSILE["b1"])
        report(
            "sessile DAE b(1) within 1e-8 of published",
            err <= 1e-8,
            f"b(1)={b1:.15f} err={err:.2e}",
        )

    def test_equilibrium_matches_long_time_limit(self, sessile_trajectory):
        traj, vol = sessile_trajectory
        sigma = -math.cos(PAPER_SESSILE["theta_young"])
        eq = qs.equilibrium_sessile(sigma, PAPER_SESSILE["kappa"], vol, 20000)
        dae = qs.SessileDae(sigma, PAPER_SESSILE["kappa"], vol, 20000)
        late = dae.integrate(traj[-1], 80.0)[-1]
        err = abs(late.b - eq.b)
        report(
            "equilibrium solve agrees with large-T DAE limit to 1e-6",
            err <= 1e-6,
            f"b_eq={eq.b:.10f} b(T=80)={late.b:.10f} err={err:.2e}",
        )


class TestPendantDaeEndpoints:
    @pytest.mark.parametrize("shape,b4", [("bulge", 0.17438), ("lightbulb", 0.05020)])
    def test_endpoint(self, shape, b4):
        sc = build_scenario("pendant", shape=shape)
        dae = qs.PendantDae(sc.params.sigma, sc.params.kappa, sc.params.volume,
                            sc.dae_n_quad)
        traj = dae.integrate(sc.dae_initial, 4.0)
        err = abs(traj[-1].b - b4)
        report(
            f"pendant {shape} b(4) within 1e-3 of published",
            err <= 1e-3,
            f"b(4)={traj[-1].b:.6f} err={err:.2e}",
        )
        u, X = qs.reconstruct_profile(traj[-1], sc.params.kappa, 2000)
        quad = 0.5 * float(np.sum(np.diff(u) * (X[:-1] + X[1:])))
        vol_err = abs(quad - 0.5 * sc.params.volume)
        ok = np.all(np.isfinite(X)) and X[-1] == 0.0 and vol_err <= 1e-4 * sc.params.volume
        report(
            f"pendant {shape} reconstructed profile finite, anchored, volume-exact",
            bool(ok),
            f"X(u_m)={X[-1]} trapezoid-volume err={vol_err:.2e}",
        )

    def test_initial_contact_points(self):
        for shape, b0 in (("bulge", 0.37045), ("lightbulb", 0.36172)):
            sc = build_scenario("pendant", shape=shape)
            err = abs(sc.dae_initial.b - b0)
            report(
                f"pendant {shape} compatible b(0) within 5e-4 of published",
                err <= 5e-4,
                f"b(0)={sc.dae_initial.b:.6f} err={err:.2e}",
            )


def _sup_deviation(series, spec, volume, t_star):
    snap = [s for s in series.snapshots if abs(s.t - t_star) < 1e-9][0]
    th = spec.theta(t_star)
    b_ex = breathing_b(spec, volume, t_star)
    radius = b_ex / math.sin(th)
    u = np.zeros_like(snap.x)
    inside = np.abs(snap.x) < b_ex
    u[inside] = -radius * math.cos(th) + np.sqrt(radius**2 - snap.x[inside] ** 2)
    return float(np.max(np.abs(snap.h - u)))


class TestBreathingLongTime:
    def test_sup_norm_at_29_pi(self, breathing_runs):
        import time

        t0 = time.perf_counter()
        sc, series = breathing_runs[1500]
        spec = BreathingSpec(theta_in=3 * math.pi / 16, amplitude=0.2, beta=0.1)
        vol = sc.manifest_extras["analytic_volume"]
        dev = _sup_deviation(series, spec, vol, 29.0 * math.pi)
        report(
            "breathing sup-norm deviation at t=29pi <= 0.05",
            dev <= 0.05,
            f"deviation={dev:.5f}",
        )
        wall = time.perf_counter() - t0
        report("breathing criterion evaluation under 5 minutes", wall < 300.0, f"{wall:.1f}s")

    def test_first_order_decrease_under_dt_halving(self, breathing_runs):
        spec = BreathingSpec(theta_in=3 * math.pi / 16, amplitude=0.2, beta=0.1)
        devs = {}
        for steps, (sc, series) in breathing_runs.items():
            devs[steps] = _sup_deviation(
                series, spec, sc.manifest_extras["analytic_volume"], 29.0 * math.pi
            )
        ratio = devs[3000] / devs[1500]
        report(
            "breathing deviation decreases ~first order when dt halves",
            ratio <= 0.75,
            f"dev(dt)={devs[1500]:.5f} dev(dt/2)={devs[3000]:.5f} ratio={ratio:.3f}",
        )

    def test_period_recurrence_of_contact_point(self, breathing_runs):
        _, series = breathing_runs[1500]
        drift = abs(series.rows[-1].b - 3.0)
        report(
            "breathing b returns to within 1e-2 of b(0) at t=30pi",
            drift <= 1e-2,
            f"b(30pi)={series.rows[-1].b:.6f} drift={drift:.2e}",
        )


class TestPropertySuite:
    def test_volume_conservation_all_scenarios(self, breathing_runs, teapot_runs, groove_run):
        worst = {}
        for label, (sc, series) in (
            ("breathing", breathing_runs[1500]),
            ("teapot(-0.8)", teapot_runs[-0.8]),
            ("teapot(-0.6)", teapot_runs[-0.6]),
            ("groove", groove_run),
        ):
            drift = float(np.max(np.abs(series.column("volume")[1:] - sc.params.volume)))
            worst[label] = drift
        ok = all(v <= 1e-9 for v in worst.values())
        report(
            "volume conservation <= 1e-9 per step on all scenarios",
            ok,
            " ".join(f"{k}:{v:.1e}" for k, v in worst.items()),
        )

    def test_flat_substrate_bounds_and_symmetry(self, breathing_runs):
        # the runner asserts the per-step/cumulative bounds internally on
        # flat substrates; re-check symmetry preservation on the series
        _, series = breathing_runs[1500]
        a = series.column("a")
        b = series.column("b")
        asym = float(np.max(np.abs(a + b) / np.maximum(np.abs(b), 1.0)))
        report(
            "symmetry a = -b preserved to 1e-11 on symmetric flat runs",
            asym <= 1e-11,
            f"max |a+b|/max(|b|,1) = {asym:.2e}",
        )

    def test_lambda_nonnegative_quasi_static(self, table2_study=None):
        sc = build_scenario("table2", order="first", M=40)
        series = run_simulation(sc.initial, sc.substrate, sc.params, sc.config)
        lam_min = float(np.min(series.column("lambda")[1:]))
        report(
            "lambda >= -1e-10 on quasi-static runs with kappa > 0",
            lam_min >= -1e-10,
            f"min lambda = {lam_min:.3e}",
        )

    def test_bordered_solver_dense_oracle(self):
        from tests_support_dense import run_dense_comparison

        worst = run_dense_comparison(500)
        report(
            "bordered solver matches dense oracle to 1e-12 on 500 systems",
            worst <= 1e-12,
            f"worst relative deviation = {worst:.2e}",
        )

    def test_desingularized_quadratures_arc_oracle(self):
        u_m = 0.73
        b_err = abs(qs.desingularized_b(u_m, 1.0 / u_m, math.pi / 2, 0.0, 2000) - u_m)
        v_err = abs(
            qs.desingularized_volume(u_m, 1.0 / u_m, math.pi / 2, 0.0, 2000)
            - 0.25 * math.pi * u_m**2
        )
        errs_b = [
            abs(qs.desingularized_b(u_m, 1.0 / u_m, math.pi / 2, 0.0, n) - u_m)
            for n in (500, 1000, 2000)
        ]
        rates = -np.diff(np.log(errs_b)) / math.log(2.0)
        ok = b_err <= 1e-6 and v_err <= 1e-6 and bool(np.all(rates > 1.9))
        report(
            "desingularized quadratures match arc closed form (1e-6, order 2)",
            ok,
            f"b_err={b_err:.1e} v_err={v_err:.1e} rates={[f'{r:.2f}' for r in rates]}",
        )

    def test_cos_theta_monotone_and_energy_dissipation(self, sessile_trajectory):
        traj, vol = sessile_trajectory
        bs = np.array([s.b for s in traj])
        cths = np.cos([s.theta for s in traj])
        order = np.argsort(bs)
        monotone = bool(np.all(np.diff(cths[order]) > 0.0))
        report(
            "cos(theta) monotone increasing in b along sessile trajectory",
            monotone,
            f"{len(traj)} accepted steps",
        )
        sigma = -math.cos(PAPER_SESSILE["theta_young"])
        energies = [
            qs.profile_energy(s, sigma, PAPER_SESSILE["kappa"], 4000) for s in traj
        ]
        increments = np.diff(energies)
        report(
            "free energy non-increasing (<= 1e-8/step) along sessile trajectory",
            bool(np.all(increments <= 1e-8)),
            f"max increment = {np.max(increments):.2e}",
        )


class TestDirectionalChecks:
    def test_teapot_rolls_down_at_sigma_08(self, teapot_runs):
        sc, series = teapot_runs[-0.8]
        a0, b0 = 2.4, 2.9
        r = series.rows[-1]
        ok = r.a < a0 and r.b < b0 and r.b < b0 - 0.3
        report(
            "teapot sigma=-0.8 endpoints displaced down-slope (b < b0 - 0.3)",
            ok,
            f"a: {a0} -> {r.a:.3f}, b: {b0} -> {r.b:.3f}",
        )

    def test_teapot_rises_at_sigma_06(self, teapot_runs):
        sc, series = teapot_runs[-0.6]
        r = series.rows[-1]
        ok = r.b > 2.9
        report(
            "teapot sigma=-0.6 endpoints displaced up-slope (capillary rise)",
            ok,
            f"b: 2.9 -> {r.b:.3f} (a: 2.4 -> {r.a:.3f})",
        )

    def test_groove_pinning_signature(self, groove_run):
        sc, series = groove_run
        ok_steps = len(series.rows) - 1 == 1200
        changes = {}
        for name in ("a", "b"):
            v = np.diff(series.column(name))
            v = v[np.abs(v) > 1e-14]
            changes[name] = int(np.sum(np.diff(np.sign(v)) != 0))
        ok = ok_steps and (changes["a"] > 0 or changes["b"] > 0)
        report(
            "groove run completes 1200 steps with endpoint speed sign changes",
            ok,
            f"sign changes: a={changes['a']} b={changes['b']}",
        )

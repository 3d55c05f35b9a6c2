"""Scenario registry, convergence-order studies and file output.

Named scenarios freeze the experiment parameter blocks (accuracy study,
breathing droplet, teapot, groove, sessile/pendant quasi-static runs).
``run_scenario`` executes one and writes deterministic CSVs plus a JSON run
manifest; ``convergence_study`` runs the accuracy configuration across a
list of temporal resolutions M (with N = 8 M moving-grid intervals) against
the quasi-static DAE reference and tabulates errors and empirical orders.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import os
import time as _time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import quasistatic as qs
from .core import (
    DropletState,
    PhysicalParams,
    TimeSeries,
    format_float,
    snapshot_of,
    volume_of,
)
from .errors import UnknownScenarioError
from .exact import BreathingSpec, breathing_state, breathing_params, breathing_volume
from .harness_config import load_config_file  # re-exported for CLI use
from .schemes import SchemeConfig, run_simulation
from .substrate import (
    FlatSubstrate,
    GrooveSubstrate,
    SubstrateProfile,
    substrate_from_config,
    teapot_profile,
)

__all__ = [
    "Scenario",
    "OrderTable",
    "build_scenario",
    "scenario_names",
    "run_scenario",
    "convergence_study",
    "emit_profiles",
    "emit_timeseries",
    "sessile_reference",
    "PAPER_SESSILE",
    "PAPER_PENDANT",
]

# Printed reference values of the quasi-static accuracy experiment.  The two
# published b(0) figures disagree; the compatible-data solve decides (the
# kappa = 0.1 value), and the manifest records which one was matched.
PAPER_SESSILE = {
    "theta_in": 1.3 * math.pi / 8,
    "theta_young": 3.9 * math.pi / 8,
    "kappa": 0.1,
    "u_m0": 1.0,
    "b0_text": 4.532141803665366,
    "b0_caption": 3.832203449327490,
    "b1": 3.747880231652922,
    "T": 1.0,
}

PAPER_PENDANT = {
    "bulge": {
        "theta_in": 3 * math.pi / 16,
        "u_m0": 0.3,
        "theta_young": 2.7 * math.pi / 8,
        "kappa": -28.028,
        "b0": 0.37045,
        "b4": 0.17438,
        "T": 4.0,
    },
    "lightbulb": {
        "theta_in": 5 * math.pi / 16,
        "u_m0": 0.3,
        "theta_young": 4.7 * math.pi / 8,
        "kappa": -15.05,
        "b0": 0.36172,
        "b4": 0.05020,
        "T": 4.0,
    },
}

#: quadrature resolution for reference-quality DAE runs
REFERENCE_N_QUAD = 20000


@dataclass(frozen=True)
class Scenario:
    """A fully resolved run: state, substrate, params, stepping config."""

    name: str
    kind: str  # "pde" | "dae-sessile" | "dae-pendant"
    params: PhysicalParams
    substrate: SubstrateProfile
    initial: DropletState | None
    config: SchemeConfig | None
    schedule: Callable[[float], PhysicalParams] | None = None
    dae_initial: Any = None
    dae_n_quad: int = qs.DEFAULT_N_QUAD
    final_time: float = 0.0
    manifest_extras: dict = field(default_factory=dict)
    substrate_spec: dict = field(default_factory=dict)


@dataclass
class OrderTable:
    """Rows (M, error, alpha); alpha is defined from the second row on."""

    order_label: str
    rows: list[tuple[int, float, float | None]] = field(default_factory=list)

    @staticmethod
    def from_errors(order_label: str, m_list: list[int], errors: list[float]) -> "OrderTable":
        rows: list[tuple[int, float, float | None]] = []
        for i, (m, e) in enumerate(zip(m_list, errors)):
            if i == 0:
                rows.append((m, e, None))
            else:
                alpha = math.log(errors[i - 1] / e) / math.log(m / m_list[i - 1])
                rows.append((m, e, alpha))
        return OrderTable(order_label=order_label, rows=rows)

    def alphas(self) -> list[float]:
        return [r[2] for r in self.rows if r[2] is not None]

    def errors(self) -> list[float]:
        return [r[1] for r in self.rows]


def _cap_initial(b0: float, theta_in: float, n_grid: int, lam: float = math.nan) -> DropletState:
    radius = b0 / math.sin(theta_in)
    x = np.linspace(-b0, b0, n_grid + 1)
    h = -radius * math.cos(theta_in) + np.sqrt(np.maximum(radius**2 - x**2, 0.0))
    h[0] = h[-1] = 0.0
    return DropletState(a=-b0, b=b0, heights=h, lam=lam, time=0.0)


def _lifted_initial(
    a0: float, b0: float, n_grid: int, bulk: Callable[[np.ndarray], np.ndarray], substrate
) -> DropletState:
    """h(x,0) = bulk(x) + w(a0) + [w(b0) - w(a0)] (x - a0)/(b0 - a0)."""
    x = np.linspace(a0, b0, n_grid + 1)
    w_a = float(substrate.w(a0))
    w_b = float(substrate.w(b0))
    h = bulk(x) + w_a + (w_b - w_a) * (x - a0) / (b0 - a0)
    h[0] = w_a
    h[-1] = w_b
    return DropletState(a=a0, b=b0, heights=h, lam=math.nan, time=0.0)


_sessile_cache: dict[tuple, tuple[qs.QuasiStaticState, float]] = {}


def sessile_compatible(n_quad: int = REFERENCE_N_QUAD) -> tuple[qs.QuasiStaticState, float]:
    """Compatible initial data (state, volume) of the accuracy experiment."""
    key = ("sessile", n_quad)
    if key not in _sessile_cache:
        st = qs.compatible_sessile_data(
            PAPER_SESSILE["u_m0"], PAPER_SESSILE["theta_in"], PAPER_SESSILE["kappa"], n_quad
        )
        vol = qs.state_volume(st, PAPER_SESSILE["kappa"], n_quad)
        _sessile_cache[key] = (st, vol)
    return _sessile_cache[key]


_reference_cache: dict[tuple, float] = {}


def sessile_reference(T: float = 1.0, n_quad: int = REFERENCE_N_QUAD) -> float:
    """b(T) of the quasi-static DAE reference trajectory."""
    key = ("ref", T, n_quad)
    if key not in _reference_cache:
        st0, vol = sessile_compatible(n_quad)
        dae = qs.SessileDae(
            sigma=-math.cos(PAPER_SESSILE["theta_young"]),
            kappa=PAPER_SESSILE["kappa"],
            volume=vol,
            n_quad=n_quad,
        )
        traj = dae.integrate(st0, T, rtol=1e-12, atol=1e-12)
        _reference_cache[key] = traj[-1].b
    return _reference_cache[key]


def _matched_print(b0: float) -> str:
    if abs(b0 - PAPER_SESSILE["b0_text"]) < 1e-6:
        return "text"
    if abs(b0 - PAPER_SESSILE["b0_caption"]) < 1e-6:
        return "caption"
    return "neither"


def table2_scenario(order: str = "first", M: int = 40, n_quad: int = REFERENCE_N_QUAD) -> Scenario:
    """Quasi-static accuracy configuration: beta = 0, dt = T/M, N = 8M.

    The volume constraint uses the DAE-compatible volume (the initial cap is
    only volume-compatible in the continuum limit); the first profile solve
    therefore lands exactly on the quasi-static branch the DAE follows.
    """
    st0, vol = sessile_compatible(n_quad)
    T = PAPER_SESSILE["T"]
    params = PhysicalParams(
        beta=0.0,
        kappa=PAPER_SESSILE["kappa"],
        sigma=-math.cos(PAPER_SESSILE["theta_young"]),
        volume=vol,
        theta0=0.0,
    )
    config = SchemeConfig(
        dt=T / M, n_grid=8 * M, order=order, final_time=T
    )
    initial = _cap_initial(st0.b, PAPER_SESSILE["theta_in"], 8 * M)
    return Scenario(
        name="table2",
        kind="pde",
        params=params,
        substrate=FlatSubstrate(),
        initial=initial,
        config=config,
        final_time=T,
        manifest_extras={
            "b0_compatible": st0.b,
            "b0_matches_printed": _matched_print(st0.b),
            "lambda0": st0.lam,
            "dae_volume": vol,
        },
        substrate_spec={"substrate": "flat"},
    )


def breathing_scenario(
    n_grid: int = 1000, n_periods: float = 15.0, steps_per_span: int = 1500
) -> Scenario:
    """Breathing droplet: first-order scheme, time-dependent (kappa, sigma).

    T = 2 pi n_periods with dt = T/steps_per_span (the published dt = 0.0628
    is T/1500 rounded); initial cap on [-3, 3].
    """
    spec = BreathingSpec(theta_in=3 * math.pi / 16, amplitude=0.2, beta=0.1)
    T = 2.0 * math.pi * n_periods
    dt = T / steps_per_span
    volume = breathing_volume(spec, 3.0)
    initial = breathing_state(spec, volume, 0.0, n_grid)
    substrate = FlatSubstrate()
    k0, _, s0 = breathing_params(spec, volume, 0.0)
    discrete_volume = volume_of(initial, substrate)
    base = PhysicalParams(
        beta=spec.beta, kappa=k0, sigma=s0, volume=discrete_volume, theta0=0.0
    )

    def schedule(t: float) -> PhysicalParams:
        # sigma(t) may transiently leave (-1, 1): skip range validation
        kap, _, sig = breathing_params(spec, volume, t)
        return PhysicalParams.unchecked(
            beta=base.beta, kappa=kap, sigma=sig,
            volume=base.volume, theta0=base.theta0,
        )

    config = SchemeConfig(
        dt=dt, n_grid=n_grid, order="first", final_time=T,
        snapshot_cadence=math.pi / 2,
    )
    return Scenario(
        name="breathing",
        kind="pde",
        params=base,
        substrate=substrate,
        initial=initial,
        config=config,
        schedule=schedule,
        final_time=T,
        manifest_extras={
            "theta_in": spec.theta_in,
            "amplitude": spec.amplitude,
            "analytic_volume": volume,
            "discrete_volume": discrete_volume,
            "compare_time": 29.0 * math.pi,
        },
        substrate_spec={"substrate": "flat"},
    )


def teapot_scenario(sigma: float = -0.8, final_time: float = 16.0, n_grid: int = 600) -> Scenario:
    """Droplet in the teapot: second-order scheme, kappa = 5, beta = 3."""
    substrate = teapot_profile()
    a0, b0 = 2.4, 2.9
    initial = _lifted_initial(
        a0, b0, n_grid, lambda x: 5.2 * (x - a0) * (b0 - x), substrate
    )
    vol = volume_of(initial, substrate)
    params = PhysicalParams(beta=3.0, kappa=5.0, sigma=sigma, volume=vol, theta0=0.0)
    config = SchemeConfig(
        dt=0.002, n_grid=n_grid, order="second", final_time=final_time,
        snapshot_cadence=final_time / 8.0,
    )
    # effective Bond number with the published approximate inclination
    bo = 5.0 * (vol / math.pi) * math.cos(0.226 * math.pi)
    return Scenario(
        name="teapot",
        kind="pde",
        params=params,
        substrate=substrate,
        initial=initial,
        config=config,
        final_time=final_time,
        manifest_extras={"bond_number": bo, "a0": a0, "b0": b0},
        substrate_spec={"substrate": "teapot"},
    )


def groove_scenario(final_time: float = 96.0, n_grid: int = 1000) -> Scenario:
    """Inclined groove-textured surface: contact-angle hysteresis run."""
    substrate = GrooveSubstrate(A=0.1, k=5.0)
    a0, b0 = -3.0, 3.0
    initial = _lifted_initial(
        a0, b0, n_grid,
        lambda x: 0.08 * (x - a0) * (b0 - x) * (x**2 + 1.5 * x + 1.0),
        substrate,
    )
    vol = volume_of(initial, substrate)
    params = PhysicalParams(beta=0.3, kappa=0.3, sigma=-0.95, volume=vol, theta0=0.3)
    # the contact line crosses ~16 cells per step here; the exactly-solved
    # trapezoidal corrector propagates the injected grid-scale curvature
    # kinks undamped (CN-type amplification -> -1), so this scenario runs
    # the corrector in its linearized single-sweep mode
    config = SchemeConfig(
        dt=0.08, n_grid=n_grid, order="second", final_time=final_time,
        snapshot_cadence=final_time / 8.0, picard_corrector=True,
    )
    bo = 0.3 * (vol / math.pi) * math.cos(0.3)
    return Scenario(
        name="groove",
        kind="pde",
        params=params,
        substrate=substrate,
        initial=initial,
        config=config,
        final_time=final_time,
        manifest_extras={"bond_number": bo, "A": 0.1, "k": 5.0},
        substrate_spec={"substrate": "groove", "A": 0.1, "k": 5.0},
    )


def sessile_dae_scenario(final_time: float = 1.0, n_quad: int = REFERENCE_N_QUAD) -> Scenario:
    st0, vol = sessile_compatible(n_quad)
    params = PhysicalParams(
        beta=0.0,
        kappa=PAPER_SESSILE["kappa"],
        sigma=-math.cos(PAPER_SESSILE["theta_young"]),
        volume=vol,
    )
    return Scenario(
        name="sessile",
        kind="dae-sessile",
        params=params,
        substrate=FlatSubstrate(),
        initial=None,
        config=None,
        dae_initial=st0,
        dae_n_quad=n_quad,
        final_time=final_time,
        manifest_extras={
            "b0_compatible": st0.b,
            "b0_matches_printed": _matched_print(st0.b),
            "paper_b1": PAPER_SESSILE["b1"],
        },
        substrate_spec={"substrate": "flat"},
    )


def pendant_scenario(shape: str = "bulge", final_time: float | None = None,
                     n_quad: int = qs.DEFAULT_N_QUAD) -> Scenario:
    if shape not in PAPER_PENDANT:
        raise UnknownScenarioError(f"unknown pendant shape {shape!r}")
    row = PAPER_PENDANT[shape]
    st0, vol = qs.compatible_pendant_data(row["u_m0"], row["theta_in"], row["kappa"], n_quad)
    params = PhysicalParams(
        beta=0.0,
        kappa=row["kappa"],
        sigma=-math.cos(row["theta_young"]),
        volume=vol,
    )
    T = final_time if final_time is not None else row["T"]
    return Scenario(
        name=f"pendant-{shape}",
        kind="dae-pendant",
        params=params,
        substrate=FlatSubstrate(),
        initial=None,
        config=None,
        dae_initial=st0,
        dae_n_quad=n_quad,
        final_time=T,
        manifest_extras={
            "shape": shape,
            "b0_compatible": st0.b,
            "paper_b0": row["b0"],
            "paper_b4": row["b4"],
            "bond_number": abs(row["kappa"]) * vol / math.pi,
        },
        substrate_spec={"substrate": "flat"},
    )


_BUILDERS: dict[str, Callable[..., Scenario]] = {
    "table2": table2_scenario,
    "breathing": breathing_scenario,
    "teapot": teapot_scenario,
    "groove": groove_scenario,
    "sessile": sessile_dae_scenario,
    "pendant": pendant_scenario,
}


def scenario_names() -> list[str]:
    return sorted(_BUILDERS)


def build_scenario(name: str, **overrides: Any) -> Scenario:
    if name not in _BUILDERS:
        raise UnknownScenarioError(
            f"unknown scenario {name!r}", known=scenario_names()
        )
    return _BUILDERS[name](**overrides)


# ---------------------------------------------------------------------------
# output files


def _out_root(out_dir: str | os.PathLike | None) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    return Path(os.environ.get("CAPILLARY_OUT_DIR", "capillary_out"))


def emit_timeseries(series: TimeSeries, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        series.write_rows(fh)
    return path


def emit_profiles(series: TimeSeries, path: str | os.PathLike) -> Path:
    """Snapshot profiles as CSV (header-only when no snapshots exist)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        series.write_snapshots(fh)
    return path


def _config_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _params_dict(p: PhysicalParams) -> dict:
    return {
        "beta": p.beta, "kappa": p.kappa, "sigma": p.sigma,
        "theta0": p.theta0, "volume": p.volume,
    }


def run_scenario(
    name: str,
    overrides: dict | None = None,
    out_dir: str | os.PathLike | None = None,
) -> dict:
    """Execute a named scenario; write CSVs and a JSON manifest.

    Returns the manifest dictionary (with an ``outputs`` path map).
    """
    overrides = dict(overrides or {})
    scenario = build_scenario(name, **overrides)
    root = _out_root(out_dir) / scenario.name
    t0 = _time.perf_counter()
    outputs: dict[str, str] = {}

    if scenario.kind == "pde":
        series = run_simulation(
            scenario.initial, scenario.substrate, scenario.params,
            scenario.config, scenario.schedule,
        )
        outputs["timeseries"] = str(emit_timeseries(series, root / "timeseries.csv"))
        outputs["profiles"] = str(emit_profiles(series, root / "profiles.csv"))
        final = {"a": series.rows[-1].a, "b": series.rows[-1].b, "t": series.rows[-1].t}
    else:
        kappa = scenario.params.kappa
        sigma = scenario.params.sigma
        vol = scenario.params.volume
        if scenario.kind == "dae-sessile":
            dae = qs.SessileDae(sigma, kappa, vol, scenario.dae_n_quad)
        else:
            dae = qs.PendantDae(sigma, kappa, vol, scenario.dae_n_quad)
        traj = dae.integrate(scenario.dae_initial, scenario.final_time)
        outputs["trajectory"] = str(_emit_dae_trajectory(traj, root / "trajectory.csv"))
        u, X = qs.reconstruct_profile(traj[-1], kappa, scenario.dae_n_quad)
        outputs["profile"] = str(_emit_dae_profile(u, X, root / "profile.csv"))
        final = {"b": traj[-1].b, "u_m": traj[-1].u_m, "theta": traj[-1].theta,
                 "t": traj[-1].t}

    wall = _time.perf_counter() - t0
    config_payload = {
        "scenario": name,
        "overrides": {k: overrides[k] for k in sorted(overrides)},
        "params": _params_dict(scenario.params),
        "substrate": scenario.substrate_spec,
        "final_time": scenario.final_time,
    }
    if scenario.config is not None:
        config_payload["scheme"] = {
            "order": scenario.config.order,
            "dt": scenario.config.dt,
            "n_grid": scenario.config.n_grid,
            "slope_source": scenario.config.slope_source,
        }
    manifest = {
        **config_payload,
        "derived": scenario.manifest_extras,
        "final": final,
        "config_hash": _config_hash(config_payload),
        "wall_time_s": wall,
        "outputs": outputs,
    }
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=float)
        fh.write("\n")
    manifest["manifest_path"] = str(root / "manifest.json")
    return manifest


def _emit_dae_trajectory(traj, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("t,b,u_m,theta,lambda\n")
        for st in traj:
            fh.write(
                ",".join(
                    format_float(v) for v in (st.t, st.b, st.u_m, st.theta, st.lam)
                )
                + "\n"
            )
    return path


def _emit_dae_profile(u: np.ndarray, X: np.ndarray, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("u,X\n")
        for ui, xi in zip(u, X):
            fh.write(f"{format_float(ui)},{format_float(xi)}\n")
    return path


# ---------------------------------------------------------------------------
# convergence study


def _table2_endpoint(order: str, M: int) -> float:
    sc = table2_scenario(order=order, M=M)
    series = run_simulation(sc.initial, sc.substrate, sc.params, sc.config)
    return series.rows[-1].b


def convergence_study(
    scenario: str = "table2",
    m_list: list[int] = (40, 80, 160, 320),
    orders: tuple[str, ...] = ("first", "second"),
    max_workers: int | None = None,
) -> dict[str, OrderTable]:
    """Temporal-order study against the DAE reference (dt = T/M, N = 8M).

    Independent runs fan out across worker threads; aggregation is sorted by
    M, so the result is order-independent and deterministic.
    """
    if scenario != "table2":
        raise UnknownScenarioError(
            f"convergence study is defined for 'table2', got {scenario!r}"
        )
    m_list = sorted(int(m) for m in m_list)
    b_ref = sessile_reference(PAPER_SESSILE["T"])
    jobs = [(order, M) for order in orders for M in m_list]
    results: dict[tuple[str, int], float] = {}
    workers = max_workers or min(len(jobs), os.cpu_count() or 1)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futs = {pool.submit(_table2_endpoint, o, m): (o, m) for o, m in jobs}
        for fut in concurrent.futures.as_completed(futs):
            results[futs[fut]] = fut.result()
    tables: dict[str, OrderTable] = {}
    for order in orders:
        errors = [abs(results[(order, M)] - b_ref) for M in m_list]
        tables[order] = OrderTable.from_errors(order, list(m_list), errors)
    return tables


def write_order_tables(tables: dict[str, OrderTable], path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write("order,M,error,alpha\n")
        for label in sorted(tables):
            for m, err, alpha in tables[label].rows:
                alpha_s = "" if alpha is None else format_float(alpha)
                fh.write(f"{label},{m},{format_float(err)},{alpha_s}\n")
    return path

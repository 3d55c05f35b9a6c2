"""Config-file front end (JSON or TOML) for fully custom runs.

Schema::

    {
      "order": "first" | "second",
      "dt": 0.01, "n_grid": 400, "final_time": 2.0,
      "slope_source": "previous",          # optional
      "snapshot_cadence": 0.5,             # optional
      "params": {"beta": 1.0, "kappa": 0.5, "sigma": -0.6, "theta0": 0.0},
      "substrate": {"substrate": "flat" | "groove" | "teapot", "A": ..., "k": ...},
      "initial": {"scenario": "teapot"}    # reuse a named scenario's state
            or  {"a0": -1.0, "b0": 1.0, "coefficients": [c0, c1, ...]},
      "out_dir": "runs/custom"             # optional
    }

The polynomial initial profile is the relative height u(x) = sum c_i x^i,
linearly corrected so u(a0) = u(b0) = 0, then lifted onto the substrate.
``params.volume`` defaults to the rectangle-rule volume of the initial
profile and may be overridden explicitly.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np

from .core import DropletState, PhysicalParams, volume_of
from .schemes import SchemeConfig
from .substrate import substrate_from_config

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised only on 3.10
    import tomli as tomllib

__all__ = ["load_config_file", "resolve_config"]


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            return json.load(fh)
    if path.suffix.lower() == ".toml":
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    raise ValueError(f"config file must be .json or .toml, got {path.suffix!r}")


def _polynomial_initial(spec: dict, substrate) -> DropletState:
    a0 = float(spec["a0"])
    b0 = float(spec["b0"])
    coeffs = [float(c) for c in spec["coefficients"]]
    n_grid = int(spec.get("n_grid", 0))
    if n_grid <= 0:
        raise ValueError("initial profile needs a positive n_grid (set top-level n_grid)")
    x = np.linspace(a0, b0, n_grid + 1)
    u = np.polynomial.polynomial.polyval(x, coeffs)
    u_a, u_b = u[0], u[-1]
    u = u - (u_a + (u_b - u_a) * (x - a0) / (b0 - a0))
    w = np.asarray(substrate.w(x), dtype=float)
    return DropletState(a=a0, b=b0, heights=u + w, lam=math.nan, time=0.0)


def resolve_config(cfg: dict) -> dict[str, Any]:
    """Turn a config dict into run_simulation inputs.

    Returns {"initial", "substrate", "params", "config", "out_dir"}.
    """
    substrate = substrate_from_config(cfg.get("substrate", {"substrate": "flat"}))
    init_spec = dict(cfg.get("initial", {}))
    if "scenario" in init_spec:
        from .harness import build_scenario  # local import: avoid cycle

        base = build_scenario(init_spec["scenario"])
        if base.initial is None:
            raise ValueError(
                f"scenario {init_spec['scenario']!r} has no PDE initial profile"
            )
        initial = base.initial
        substrate = base.substrate
    else:
        init_spec.setdefault("n_grid", cfg.get("n_grid"))
        initial = _polynomial_initial(init_spec, substrate)

    p = dict(cfg.get("params", {}))
    p.setdefault("volume", volume_of(initial, substrate))
    params = PhysicalParams(
        beta=float(p.get("beta", 0.0)),
        kappa=float(p.get("kappa", 0.0)),
        sigma=float(p.get("sigma", -0.5)),
        volume=float(p["volume"]),
        theta0=float(p.get("theta0", 0.0)),
    )
    config = SchemeConfig(
        dt=float(cfg["dt"]),
        n_grid=initial.n_intervals,
        order=cfg.get("order", "first"),
        slope_source=cfg.get("slope_source", "previous"),
        final_time=float(cfg.get("final_time", 0.0)),
        snapshot_cadence=cfg.get("snapshot_cadence"),
    )
    return {
        "initial": initial,
        "substrate": substrate,
        "params": params,
        "config": config,
        "out_dir": cfg.get("out_dir"),
    }

#!/usr/bin/env python3
"""Breathing droplet: long-time validation against the exact oscillating cap.

The manufactured coefficients (kappa(t), sigma(t)) keep the exact solution a
volume-preserving spherical cap with theta(t) = theta_in + A sin t; the
first-order scheme runs 15 periods and is compared at t = 29 pi.
"""

import math

import numpy as np

from capillary.exact import BreathingSpec, breathing_b, breathing_params
from capillary.harness import build_scenario
from capillary.schemes import run_simulation

scenario = build_scenario("breathing")
spec = BreathingSpec(theta_in=3 * math.pi / 16, amplitude=0.2, beta=0.1)
volume = scenario.manifest_extras["analytic_volume"]

kap, lam, sig = breathing_params(spec, volume, 0.7)
print(f"coefficients at t=0.7: kappa={kap:.4f} sigma={sig:.4f} lambda={lam:.4f}")

series = run_simulation(
    scenario.initial, scenario.substrate, scenario.params,
    scenario.config, scenario.schedule,
)
print(f"ran {len(series.rows) - 1} steps to T = 30 pi "
      f"({len(series.snapshots)} snapshots at pi/2 cadence)")

t_star = 29 * math.pi
snap = [s for s in series.snapshots if abs(s.t - t_star) < 1e-9][0]
theta = spec.theta(t_star)
b_ex = breathing_b(spec, volume, t_star)
radius = b_ex / math.sin(theta)
u_exact = np.zeros_like(snap.x)
inside = np.abs(snap.x) < b_ex
u_exact[inside] = -radius * math.cos(theta) + np.sqrt(radius**2 - snap.x[inside] ** 2)

print(f"sup-norm deviation from the exact cap at t = 29 pi: "
      f"{np.max(np.abs(snap.h - u_exact)):.5f}")
print(f"contact point recurrence: b(30 pi) = {series.rows[-1].b:.6f} (b(0) = 3)")
print(f"volume drift over the run: "
      f"{np.max(np.abs(series.column('volume')[1:] - scenario.params.volume)):.2e}")

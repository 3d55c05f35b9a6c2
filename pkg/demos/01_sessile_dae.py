#!/usr/bin/env python3
"""Quasi-static sessile droplet via the desingularized DAE.

Builds compatible initial data from (u_m(0), theta(0)), integrates the
index-1 reduced contact-point ODE with Newton closure, and compares the
endpoint and the two published b(0) prints.
"""

import math

from capillary.quasistatic import (
    SessileDae,
    compatible_sessile_data,
    equilibrium_sessile,
    state_volume,
)

theta_in = 1.3 * math.pi / 8
theta_young = 3.9 * math.pi / 8
kappa = 0.1
n_quad = 20000

st0 = compatible_sessile_data(1.0, theta_in, kappa, n_quad)
volume = state_volume(st0, kappa, n_quad)
print(f"compatible data: b(0) = {st0.b:.15f}, lambda(0) = {st0.lam:.10f}, V = {volume:.10f}")
print("published prints: text 4.532141803665366 (this), caption 3.832203449327490 (kappa=0 cap)")

kz = compatible_sessile_data(1.0, theta_in, 0.0, n_quad)
print(f"zero-gravity cap with the same u_m: b = {kz.b:.15f}")

dae = SessileDae(sigma=-math.cos(theta_young), kappa=kappa, volume=volume, n_quad=n_quad)
traj = dae.integrate(st0, 1.0, rtol=1e-12, atol=1e-12)
print(f"\nintegrated {len(traj) - 1} accepted steps to T = 1")
print(f"b(1) = {traj[-1].b:.15f}   (published 3.747880231652922)")
print(f"theta(1) = {traj[-1].theta:.6f} rad -> heading to theta_Y = {theta_young:.6f}")

eq = equilibrium_sessile(-math.cos(theta_young), kappa, volume, n_quad)
print(f"\nequilibrium: b = {eq.b:.10f}, u_m = {eq.u_m:.10f}, theta = {eq.theta:.10f}")

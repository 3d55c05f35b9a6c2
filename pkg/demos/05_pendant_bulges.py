#!/usr/bin/env python3
"""Kelvin pendant droplets (kappa < 0): bulge and lightbulb shapes.

Integrates the horizontal-graph DAE and writes the reconstructed X(u)
profiles (mirror about x = 0 for the full droplet outline).
"""

import math
from pathlib import Path

import numpy as np

from capillary.quasistatic import PendantDae, compatible_pendant_data, reconstruct_profile

ROWS = {
    "bulge": dict(theta_in=3 * math.pi / 16, theta_young=2.7 * math.pi / 8, kappa=-28.028),
    "lightbulb": dict(theta_in=5 * math.pi / 16, theta_young=4.7 * math.pi / 8, kappa=-15.05),
}

out = Path("capillary_out/pendant_demo")
out.mkdir(parents=True, exist_ok=True)

for name, row in ROWS.items():
    st0, volume = compatible_pendant_data(0.3, row["theta_in"], row["kappa"])
    print(f"{name}: b(0)={st0.b:.6f}  V={volume:.6f}  "
          f"Bo={abs(row['kappa']) * volume / math.pi:.3f}")
    dae = PendantDae(-math.cos(row["theta_young"]), row["kappa"], volume)
    traj = dae.integrate(st0, 4.0)
    final = traj[-1]
    print(f"  b(4)={final.b:.6f}  u_m(4)={final.u_m:.6f}  theta(4)={final.theta:.4f}")
    u, X = reconstruct_profile(final, row["kappa"], 2000)
    path = out / f"{name}_profile.csv"
    with open(path, "w") as fh:
        fh.write("u,X\n")
        for ui, xi in zip(u, X):
            fh.write(f"{ui:.17g},{xi:.17g}\n")
    widest = float(np.max(X))
    print(f"  widest half-width {widest:.4f} at u = {float(u[np.argmax(X)]):.4f}; "
          f"profile -> {path}")

"""Domain types, moving-grid stencils and droplet diagnostics.

Conventions used throughout the package:

- The capillary surface is the absolute height ``h(x) = u(x) + w(x)`` with
  ``u >= 0`` the relative height above the substrate ``w``.
- A droplet state stores ``h`` at the N+1 equispaced nodes
  ``x_j = a + j*tau``, ``tau = (b - a)/N``, endpoints pinned to the substrate
  (``h_0 = w(a)``, ``h_N = w(b)``).
- Contact angles are measured inside the droplet; at the right endpoint the
  surface slope enters with a sign flip (the droplet lies to the left of b).
- All values are dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np

__all__ = [
    "PhysicalParams",
    "DropletState",
    "AngleReadout",
    "TimeSeries",
    "one_sided_slope",
    "interior_derivatives",
    "grid_slopes",
    "volume_of",
    "energy_of",
    "contact_angles",
]

# 17 significant digits round-trip any float64 exactly.
_FLOAT_FMT = "{:.17g}"

TIMESERIES_HEADER = "t,a,b,lambda,theta_a,theta_b,volume,energy"
PROFILE_HEADER = "t,x,h,w"


@dataclass(frozen=True, slots=True)
class PhysicalParams:
    """Dimensionless coefficients of the droplet dynamics.

    Attributes
    ----------
    beta : float
        Capillary-surface friction number; ``beta = 0`` is the quasi-static
        limit.
    kappa : float
        Bond-type gravity coefficient; negative for pendant configurations.
    sigma : float
        Relative adhesion coefficient, ``|sigma| < 1``; the Young angle is
        ``arccos(-sigma)``.
    theta0 : float
        Effective inclination of the coordinate frame, in (-pi/2, pi/2).
    volume : float
        Prescribed 2D volume enforced by the Lagrange multiplier.
    """

    beta: float
    kappa: float
    sigma: float
    volume: float
    theta0: float = 0.0

    def __post_init__(self):
        if not (self.beta >= 0.0):
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not (abs(self.sigma) < 1.0):
            raise ValueError(f"|sigma| must be < 1, got {self.sigma}")
        if not (abs(self.theta0) < math.pi / 2):
            raise ValueError(f"|theta0| must be < pi/2, got {self.theta0}")
        if not (self.volume > 0.0):
            raise ValueError(f"volume must be > 0, got {self.volume}")
        for name in ("beta", "kappa", "sigma", "theta0", "volume"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def young_angle(self) -> float:
        """Equilibrium contact angle theta_Y = arccos(-sigma), in (0, pi)."""
        if not abs(self.sigma) < 1.0:
            raise ValueError(f"no Young angle for |sigma| >= 1 (sigma={self.sigma})")
        return math.acos(-self.sigma)

    @classmethod
    def unchecked(
        cls, beta: float, kappa: float, sigma: float, volume: float, theta0: float = 0.0
    ) -> "PhysicalParams":
        """Construct without range validation.

        Manufactured time-dependent coefficient schedules (breathing droplet)
        legitimately push sigma(t) outside (-1, 1) for parts of the period.
        """
        obj = object.__new__(cls)
        for name, val in (
            ("beta", beta), ("kappa", kappa), ("sigma", sigma),
            ("volume", volume), ("theta0", theta0),
        ):
            object.__setattr__(obj, name, float(val))
        return obj


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DropletState:
    """Immutable snapshot of the moving-grid droplet.

    ``heights`` holds the absolute surface h at the N+1 grid nodes; ``lam``
    is the volume multiplier produced by the solve that built this state
    (NaN when none has run yet).
    """

    a: float
    b: float
    heights: np.ndarray
    lam: float = math.nan
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "heights", _readonly(self.heights))
        if self.heights.ndim != 1 or self.heights.size < 3:
            raise ValueError("heights must be a 1-D array with at least 3 nodes")
        if not (self.a < self.b):
            raise ValueError(f"need a < b, got a={self.a}, b={self.b}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("endpoints must be finite")
        if not np.all(np.isfinite(self.heights)):
            raise ValueError("heights must be finite")

    @property
    def n_intervals(self) -> int:
        return self.heights.size - 1

    @property
    def tau(self) -> float:
        return (self.b - self.a) / self.n_intervals

    def grid(self) -> np.ndarray:
        return self.a + self.tau * np.arange(self.heights.size)


@dataclass(frozen=True, slots=True)
class AngleReadout:
    """Instantaneous contact angles and local substrate slopes (radians)."""

    theta_a: float
    theta_b: float
    theta_0a: float
    theta_0b: float


def one_sided_slope(heights: np.ndarray, tau: float, end: str) -> float:
    """Second-order one-sided derivative of nodal data at a grid end.

    left:  (4 h_1 - h_2 - 3 h_0) / (2 tau)
    right: (-4 h_{N-1} + h_{N-2} + 3 h_N) / (2 tau)
    """
    h = np.asarray(heights, dtype=float)
    if h.ndim != 1 or h.size < 3:
        raise ValueError("one_sided_slope needs at least 3 nodes")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if end == "left":
        return (4.0 * h[1] - h[2] - 3.0 * h[0]) / (2.0 * tau)
    if end == "right":
        return (-4.0 * h[-2] + h[-3] + 3.0 * h[-1]) / (2.0 * tau)
    raise ValueError(f"end must be 'left' or 'right', got {end!r}")


def interior_derivatives(heights: np.ndarray, tau: float, j: int) -> tuple[float, float]:
    """Centered first and second derivatives at interior node j."""
    h = np.asarray(heights, dtype=float)
    if not 1 <= j <= h.size - 2:
        raise IndexError(f"j must be in [1, {h.size - 2}], got {j}")
    first = (h[j + 1] - h[j - 1]) / (2.0 * tau)
    second = (h[j + 1] - 2.0 * h[j] + h[j - 1]) / tau**2
    return first, second


def grid_slopes(heights: np.ndarray, tau: float) -> np.ndarray:
    """Nodal slopes: centered in the interior, one-sided at both ends."""
    h = np.asarray(heights, dtype=float)
    s = np.empty_like(h)
    s[1:-1] = (h[2:] - h[:-2]) / (2.0 * tau)
    s[0] = one_sided_slope(h, tau, "left")
    s[-1] = one_sided_slope(h, tau, "right")
    return s


def volume_of(state: DropletState, substrate) -> float:
    """Interior-node rectangle rule Sum_{j=1}^{N-1} (h_j - w(x_j)) * tau.

    This is bit-compatible with the constraint row of the scheme's linear
    systems, so conservation checks see exactly what the solver enforced.
    """
    x = state.grid()
    w = substrate.w(x[1:-1])
    return state.tau * float(np.sum(state.heights[1:-1] - w))


def _trapezoid(f: np.ndarray, dx: float) -> float:
    return dx * (float(np.sum(f)) - 0.5 * (float(f[0]) + float(f[-1])))


def energy_of(state: DropletState, substrate, params: PhysicalParams) -> float:
    """Free energy on the moving grid (trapezoid quadrature).

    arclength(h) + sigma * arclength(w) + kappa * Int_a^b Int_w^h
    (y cos(theta0) + x sin(theta0)) dy dx, with the inner integral in closed
    form: ((h^2 - w^2)/2) cos(theta0) + x (h - w) sin(theta0).
    """
    x = state.grid()
    h = state.heights
    tau = state.tau
    w = substrate.w(x)
    sh = grid_slopes(h, tau)
    sw = substrate.w_prime(x)
    arc = _trapezoid(np.sqrt(1.0 + sh**2), tau)
    wet = params.sigma * _trapezoid(np.sqrt(1.0 + np.asarray(sw, dtype=float) ** 2), tau)
    grav = params.kappa * _trapezoid(
        0.5 * (h**2 - w**2) * math.cos(params.theta0)
        + x * (h - w) * math.sin(params.theta0),
        tau,
    )
    return arc + wet + grav


def contact_angles(state: DropletState, substrate) -> AngleReadout:
    """Contact angles from one-sided surface slopes and the substrate slope.

    tan(theta_0a + theta_a) = dh/dx|_a and tan(theta_0b + theta_b) = -dh/dx|_b
    with tan(theta_0a) = w'(a), tan(theta_0b) = -w'(b).
    """
    tau = state.tau
    sa = one_sided_slope(state.heights, tau, "left")
    sb = one_sided_slope(state.heights, tau, "right")
    wa = float(substrate.w_prime(state.a, side="right"))
    wb = float(substrate.w_prime(state.b, side="left"))
    theta_0a = math.atan(wa)
    theta_0b = math.atan(-wb)
    theta_a = math.atan(sa) - theta_0a
    theta_b = -math.atan(sb) - theta_0b
    return AngleReadout(theta_a=theta_a, theta_b=theta_b, theta_0a=theta_0a, theta_0b=theta_0b)


@dataclass(frozen=True, slots=True)
class TimeSeriesRow:
    t: float
    a: float
    b: float
    lam: float
    theta_a: float
    theta_b: float
    volume: float
    energy: float


@dataclass(frozen=True, slots=True)
class ProfileSnapshot:
    t: float
    x: np.ndarray
    h: np.ndarray
    w: np.ndarray


@dataclass
class TimeSeries:
    """Ordered per-step diagnostics plus optional full-profile snapshots."""

    rows: list[TimeSeriesRow] = field(default_factory=list)
    snapshots: list[ProfileSnapshot] = field(default_factory=list)

    def append(self, row: TimeSeriesRow) -> None:
        if self.rows and not (row.t > self.rows[-1].t):
            raise ValueError(
                f"rows must be strictly increasing in t: {row.t} after {self.rows[-1].t}"
            )
        self.rows.append(row)

    def add_snapshot(self, snap: ProfileSnapshot) -> None:
        self.snapshots.append(snap)

    # -- CSV serialization (17 significant digits, deterministic bytes) ------

    def write_rows(self, stream: TextIO) -> None:
        stream.write(TIMESERIES_HEADER + "\n")
        for r in self.rows:
            vals = (r.t, r.a, r.b, r.lam, r.theta_a, r.theta_b, r.volume, r.energy)
            stream.write(",".join(_FLOAT_FMT.format(v) for v in vals) + "\n")

    def write_snapshots(self, stream: TextIO) -> None:
        stream.write(PROFILE_HEADER + "\n")
        for s in self.snapshots:
            for xi, hi, wi in zip(s.x, s.h, s.w):
                stream.write(
                    ",".join(_FLOAT_FMT.format(v) for v in (s.t, xi, hi, wi)) + "\n"
                )

    @staticmethod
    def parse_rows(lines: Iterable[str]) -> "TimeSeries":
        """Re-parse a rows CSV produced by :meth:`write_rows`."""
        it = iter(lines)
        header = next(it).strip()
        if header != TIMESERIES_HEADER:
            raise ValueError(f"unexpected header {header!r}")
        ts = TimeSeries()
        for line in it:
            line = line.strip()
            if not line:
                continue
            vals = [float(tok) for tok in line.split(",")]
            ts.append(TimeSeriesRow(*vals))
        return ts

    # -- convenience accessors ------------------------------------------------

    def column(self, name: str) -> np.ndarray:
        if name == "lambda":  # CSV header name for the `lam` field
            name = "lam"
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def format_float(v: float) -> str:
    """The 17-significant-digit format used by every CSV writer."""
    return _FLOAT_FMT.format(v)


def snapshot_of(state: DropletState, substrate) -> ProfileSnapshot:
    x = state.grid()
    return ProfileSnapshot(t=state.time, x=x, h=np.array(state.heights), w=np.asarray(substrate.w(x), dtype=float))

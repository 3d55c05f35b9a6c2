"""Closed-form references: spherical caps and the breathing droplet.

The breathing droplet prescribes an oscillating contact angle
theta(t) = theta_in + A sin t and reverse-engineers time-dependent
coefficients (kappa(t), sigma(t), lambda(t)) so that the exact
volume-preserving cap

    u(x, t) = -R(t) cos theta(t) + sqrt(R(t)^2 - x^2),
    b(t) = sin theta(t) sqrt(2V / (2 theta - sin 2 theta)),  R = b / sin theta

solves the dynamic equations on a flat level substrate.  It provides a
long-time oracle for the moving-boundary schemes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DropletState
from .errors import DomainError

__all__ = [
    "cap_volume_2d",
    "cap_volume_3d",
    "BreathingSpec",
    "breathing_volume",
    "breathing_b",
    "breathing_state",
    "breathing_params",
]


def cap_volume_2d(theta: float) -> float:
    """2D cap volume ratio V / X(0)^2 = theta/sin^2(theta) - cos/sin."""
    if not 0.0 < theta < math.pi:
        raise DomainError("theta must lie in (0, pi)", theta=theta)
    s = math.sin(theta)
    return theta / s**2 - math.cos(theta) / s


def cap_volume_3d(theta: float) -> float:
    """3D spherical-cap volume ratio V / b^3."""
    if not 0.0 < theta < math.pi:
        raise DomainError("theta must lie in (0, pi)", theta=theta)
    s = math.sin(theta)
    return (math.pi / 3.0) * (2.0 - 3.0 * math.cos(theta) + math.cos(theta) ** 3) / s**3


@dataclass(frozen=True, slots=True)
class BreathingSpec:
    """Oscillating contact angle theta(t) = theta_in + amplitude * sin t.

    theta(t) must stay inside (0, pi/2) for the single-graph cap to exist.
    """

    theta_in: float
    amplitude: float
    beta: float

    def theta(self, t: float) -> float:
        return self.theta_in + self.amplitude * math.sin(t)

    def theta_dot(self, t: float) -> float:
        return self.amplitude * math.cos(t)


def breathing_volume(spec: BreathingSpec, b0: float) -> float:
    """Volume implied by the initial cap (theta(0), b(0))."""
    return b0**2 * cap_volume_2d(spec.theta(0.0))


def breathing_b(spec: BreathingSpec, volume: float, t: float) -> float:
    th = spec.theta(t)
    if not 0.0 < th < math.pi / 2:
        raise DomainError("theta(t) left (0, pi/2)", theta=th, t=t)
    return math.sin(th) * math.sqrt(2.0 * volume / (2.0 * th - math.sin(2.0 * th)))


def breathing_state(spec: BreathingSpec, volume: float, t: float, n_grid: int) -> DropletState:
    """Exact cap state at time t sampled on n_grid+1 moving nodes."""
    th = spec.theta(t)
    b = breathing_b(spec, volume, t)
    radius = b / math.sin(th)
    x = np.linspace(-b, b, n_grid + 1)
    u = -radius * math.cos(th) + np.sqrt(np.maximum(radius**2 - x**2, 0.0))
    u[0] = 0.0
    u[-1] = 0.0
    _, lam, _ = breathing_params(spec, volume, t)
    return DropletState(a=-b, b=b, heights=u, lam=lam, time=t)


def breathing_params(spec: BreathingSpec, volume: float, t: float) -> tuple[float, float, float]:
    """Time-dependent coefficients (kappa, lambda, sigma) of the construction."""
    th = spec.theta(t)
    thd = spec.theta_dot(t)
    b = breathing_b(spec, volume, t)
    beta = spec.beta
    kappa = -beta * thd * (b**2 * math.cos(th) / volume + math.sin(th))
    lam = beta * b * thd * (-(b**2) * math.sin(th) / volume + math.cos(th)) + math.sin(th) / b
    sigma = b * thd * (b**2 / volume - 1.0 / math.tan(th)) - math.cos(th)
    return kappa, lam, sigma

"""Desingularized quasi-static dynamics as index-1 DAEs.

The quasi-static profile in horizontal-graph form X(u) satisfies
X_u = -J / sqrt(1 - J^2) with the quadratic J(u) = -kappa u^2/2 + lam u +
cos(theta) and the apex condition J(u_m) = 1.  The substitution
psi = sqrt(u_m - u) removes the X_u = -inf apex singularity through the
identity 1 - J = psi^2 (lam - kappa (2 u_m - psi^2)/2), leaving smooth
integrands evaluated by the midpoint rule on a uniform psi-grid.

Sessile droplets (kappa > 0, symmetric contact points a = -b) close the
dynamics with two relations in (u_m, cos theta) after eliminating lam;
pendant droplets (kappa < 0) keep (u_m, cos theta, lam) and close with
three relations.  Both reduce the motion to a scalar ODE for the contact
point, b' = -sigma - cos(theta(b)), integrated by adaptive RK45 with a
warm-started Newton closure at every stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DesingularizationError,
    NonConvergenceError,
    RegimeError,
)
from .ode import integrate_rk45

__all__ = [
    "QuasiStaticState",
    "PendantState",
    "J_of",
    "lambda_from_apex",
    "desingularized_b",
    "desingularized_volume",
    "solve_algebraic",
    "compatible_sessile_data",
    "equilibrium_sessile",
    "reconstruct_profile",
    "profile_energy",
    "cm_bound",
    "SessileDae",
    "PendantDae",
    "compatible_pendant_data",
    "dae_step_sessile",
    "dae_step_pendant",
]

DEFAULT_N_QUAD = 2000


@dataclass(frozen=True, slots=True)
class QuasiStaticState:
    """Sessile DAE state: contact half-width b (a = -b), apex height u_m,
    contact angle theta, multiplier lam, time t."""

    b: float
    u_m: float
    theta: float
    lam: float
    t: float = 0.0


@dataclass(frozen=True, slots=True)
class PendantState:
    """Pendant DAE state; b = X(0) is the contact point, kappa < 0 runs."""

    b: float
    u_m: float
    theta: float
    lam: float
    t: float = 0.0


def J_of(u, u_m: float, lam: float, theta: float, kappa: float):
    """J(u) = -kappa u^2/2 + lam u + cos(theta); J(u_m) = 1 at the apex."""
    u = np.asarray(u, dtype=float)
    out = -0.5 * kappa * u * u + lam * u + math.cos(theta)
    return float(out) if out.ndim == 0 else out


def lambda_from_apex(u_m: float, theta: float, kappa: float) -> float:
    """Multiplier from the apex condition J(u_m) = 1."""
    return (1.0 - math.cos(theta) + 0.5 * kappa * u_m**2) / u_m


def _psi_midpoints(u_m: float, n_quad: int) -> tuple[float, np.ndarray, np.ndarray]:
    if u_m <= 0.0:
        raise RegimeError("apex height must be positive", u_m=u_m)
    tau = math.sqrt(u_m) / n_quad
    psi = (np.arange(n_quad) + 0.5) * tau
    return tau, psi, u_m - psi * psi


def _desing_factors(u_m, lam, theta, kappa, n_quad):
    """Midpoint nodes plus the common factor 1/(sqrt(2lam-kappa(u_m+u)) sqrt(1+J))."""
    tau, psi, u = _psi_midpoints(u_m, n_quad)
    J = J_of(u, u_m, lam, theta, kappa)
    rad = 2.0 * lam - kappa * (u_m + u)
    if np.any(rad <= 0.0):
        raise DesingularizationError(
            "2 lam - kappa (u_m + u) is not positive on the psi-grid",
            u_m=u_m, lam=lam, min_radicand=float(np.min(rad)),
        )
    one_plus = 1.0 + J
    if np.any(one_plus <= 0.0):
        raise DesingularizationError(
            "1 + J is not positive on the psi-grid (profile left the graph regime)",
            min_one_plus_J=float(np.min(one_plus)),
        )
    return tau, psi, u, J, 1.0 / (np.sqrt(rad) * np.sqrt(one_plus))


def desingularized_b(
    u_m: float, lam: float, theta: float, kappa: float, n_quad: int = DEFAULT_N_QUAD
) -> float:
    """Contact point b = X(0) by the desingularized midpoint rule."""
    tau, _, _, J, g = _desing_factors(u_m, lam, theta, kappa, n_quad)
    return 2.0 * math.sqrt(2.0) * tau * float(np.sum(J * g))


def desingularized_volume(
    u_m: float, lam: float, theta: float, kappa: float, n_quad: int = DEFAULT_N_QUAD
) -> float:
    """Half volume V/2 = Int_0^{u_m} u J / sqrt(1 - J^2) du, desingularized."""
    tau, _, u, J, g = _desing_factors(u_m, lam, theta, kappa, n_quad)
    return 2.0 * math.sqrt(2.0) * tau * float(np.sum(u * J * g))


def _moment_integral(u_m, lam, theta, kappa, n_quad: int = DEFAULT_N_QUAD) -> float:
    """Int_0^{u_m} (u_m - u) J / sqrt(1 - J^2) du = u_m b - V/2, desingularized."""
    tau, psi, _, J, g = _desing_factors(u_m, lam, theta, kappa, n_quad)
    return 2.0 * math.sqrt(2.0) * tau * float(np.sum(psi * psi * J * g))


def _cap_guess(b: float, volume: float) -> tuple[float, float]:
    """Zero-gravity circular-cap (u_m, cos theta) for a given (b, V)."""
    ratio = volume / b**2
    lo, hi = 1e-6, math.pi / 2
    for _ in range(80):
        th = 0.5 * (lo + hi)
        val = th / math.sin(th) ** 2 - math.cos(th) / math.sin(th)
        if val < ratio:
            lo = th
        else:
            hi = th
    th = 0.5 * (lo + hi)
    radius = b / math.sin(th)
    return radius * (1.0 - math.cos(th)), math.cos(th)


def solve_algebraic(
    b: float,
    kappa: float,
    volume: float,
    n_quad: int = DEFAULT_N_QUAD,
    initial: tuple[float, float] | None = None,
    tol: float = 1e-11,
    max_iter: int = 60,
) -> tuple[float, float, float]:
    """Close the sessile relations for a given contact point b.

    Newton in (u_m, cos theta) with lam eliminated through the apex
    condition; residuals are the desingularized volume and contact-point
    relations.  Returns (u_m, lam, theta).  Regime: kappa > 0 sessile with
    theta in (0, pi/2] (single vertical graph).
    """
    if kappa <= 0.0:
        raise RegimeError("sessile closure requires kappa > 0", kappa=kappa)
    u_m, cth = initial if initial is not None else _cap_guess(b, volume)
    scale = max(1.0, volume, abs(b))

    def residual(u_m: float, cth: float) -> np.ndarray:
        theta = math.acos(min(1.0, max(-1.0, cth)))
        lam = lambda_from_apex(u_m, theta, kappa)
        return np.array(
            [
                desingularized_volume(u_m, lam, theta, kappa, n_quad) - 0.5 * volume,
                desingularized_b(u_m, lam, theta, kappa, n_quad) - b,
            ]
        )

    r = residual(u_m, cth)
    nrm = float(np.max(np.abs(r)))
    for it in range(max_iter):
        if nrm <= tol * scale:
            break
        jac = np.empty((2, 2))
        du = 1e-7 * max(1.0, abs(u_m))
        dc = 1e-7
        jac[:, 0] = (residual(u_m + du, cth) - r) / du
        jac[:, 1] = (residual(u_m, cth + dc) - r) / dc
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise NonConvergenceError("singular Jacobian in sessile closure") from exc
        lam_bt = 1.0
        while True:
            u_try = u_m + lam_bt * step[0]
            c_try = cth + lam_bt * step[1]
            if u_try > 0.0 and -0.2 <= c_try <= 1.0 - 1e-14:
                try:
                    r_try = residual(u_try, c_try)
                except DesingularizationError:
                    r_try = None
                if r_try is not None and float(np.max(np.abs(r_try))) < nrm:
                    break
            if lam_bt < 2**-24:
                raise NonConvergenceError(
                    "sessile closure stalled", residual=nrm, iterations=it
                )
            lam_bt *= 0.5
        u_m, cth, r = u_try, c_try, r_try
        nrm = float(np.max(np.abs(r)))
    else:
        raise NonConvergenceError(
            "sessile closure did not converge", residual=nrm, iterations=max_iter
        )
    if cth < -1e-10:
        raise RegimeError(
            "contact angle left (0, pi/2]: vertical-graph breakdown", cos_theta=cth
        )
    theta = math.acos(min(1.0, max(0.0, cth)))
    return u_m, lambda_from_apex(u_m, theta, kappa), theta


def compatible_sessile_data(
    u_m0: float, theta_in: float, kappa: float, n_quad: int = DEFAULT_N_QUAD
) -> QuasiStaticState:
    """Initial data (b, lam, V) compatible with prescribed (u_m, theta).

    The returned state's volume is exposed through :func:`state_volume`.
    """
    lam = lambda_from_apex(u_m0, theta_in, kappa)
    b = desingularized_b(u_m0, lam, theta_in, kappa, n_quad)
    return QuasiStaticState(b=b, u_m=u_m0, theta=theta_in, lam=lam, t=0.0)


def state_volume(state, kappa: float, n_quad: int = DEFAULT_N_QUAD) -> float:
    """Volume of the quasi-static profile implied by a DAE state."""
    return 2.0 * desingularized_volume(state.u_m, state.lam, state.theta, kappa, n_quad)


def equilibrium_sessile(
    sigma: float, kappa: float, volume: float, n_quad: int = DEFAULT_N_QUAD
) -> QuasiStaticState:
    """Steady sessile state: theta = theta_Y = arccos(-sigma) with F1 = 0."""
    if kappa <= 0.0:
        raise RegimeError("equilibrium solve requires kappa > 0", kappa=kappa)
    if not -1.0 < sigma <= 0.0:
        raise RegimeError("sessile equilibrium requires sigma in (-1, 0]", sigma=sigma)
    theta = math.acos(-sigma)
    # kappa -> 0 cap as the starting guess
    radius = math.sqrt(volume / (theta - math.sin(theta) * math.cos(theta)))
    u_m = radius * (1.0 - math.cos(theta))

    def f1(u_m: float) -> float:
        lam = lambda_from_apex(u_m, theta, kappa)
        return desingularized_volume(u_m, lam, theta, kappa, n_quad) - 0.5 * volume

    r = f1(u_m)
    for it in range(60):
        if abs(r) <= 1e-12 * max(1.0, volume):
            break
        du = 1e-7 * max(1.0, u_m)
        deriv = (f1(u_m + du) - r) / du
        step = -r / deriv
        while u_m + step <= 0.0:
            step *= 0.5
        u_m += step
        r = f1(u_m)
    else:
        raise NonConvergenceError("equilibrium solve did not converge", residual=r)
    lam = lambda_from_apex(u_m, theta, kappa)
    b = desingularized_b(u_m, lam, theta, kappa, n_quad)
    return QuasiStaticState(b=b, u_m=u_m, theta=theta, lam=lam, t=math.inf)


def reconstruct_profile(
    state, kappa: float, n_quad: int = DEFAULT_N_QUAD
) -> tuple[np.ndarray, np.ndarray]:
    """Sampled horizontal profile X(u) on the uniform psi-grid.

    Returns (u, X) with u ascending from 0 to u_m; X(u_m) = 0 exactly by
    construction and X(0) reproduces b to quadrature tolerance.
    """
    u_m, lam, theta = state.u_m, state.lam, state.theta
    tau, _, _, J, g = _desing_factors(u_m, lam, theta, kappa, n_quad)
    increments = 2.0 * math.sqrt(2.0) * tau * J * g
    X = np.concatenate(([0.0], np.cumsum(increments)))
    psi_nodes = tau * np.arange(n_quad + 1)
    u_nodes = u_m - psi_nodes**2
    u_nodes[-1] = max(u_nodes[-1], 0.0)
    return u_nodes[::-1].copy(), X[::-1].copy()


def profile_energy(state, sigma: float, kappa: float, n_quad: int = DEFAULT_N_QUAD) -> float:
    """Dimensionless free energy of the symmetric quasi-static profile.

    arclength + sigma * wetted length + kappa * Int u^2/2 dx, all expressed
    through the horizontal graph: arclength = 2 Int du / sqrt(1 - J^2)
    (desingularized) and Int u^2/2 dx = Int_0^{u_m} 2 u X(u) du.
    """
    u_m, lam, theta = state.u_m, state.lam, state.theta
    tau, _, u, J, g = _desing_factors(u_m, lam, theta, kappa, n_quad)
    arc = 2.0 * 2.0 * math.sqrt(2.0) * tau * float(np.sum(g))
    b = 2.0 * math.sqrt(2.0) * tau * float(np.sum(J * g))
    u_nodes, X = reconstruct_profile(state, kappa, n_quad)
    f = u_nodes * X
    grav = kappa * 2.0 * 0.5 * float(np.sum(np.diff(u_nodes) * (f[:-1] + f[1:])))
    return arc + sigma * 2.0 * b + grav


def cm_bound(b: float, u_m: float, volume: float, kappa: float) -> float:
    """Bound on d(cos theta)/db: (6V/u_m + kappa u_m^3) / (V - b u_m)."""
    if volume <= b * u_m:
        raise RegimeError("bound requires V > b*u_m", volume=volume, b=b, u_m=u_m)
    return (6.0 * volume / u_m + kappa * u_m**3) / (volume - b * u_m)


@dataclass
class DtController:
    """Adaptive step-size state for the single-step DAE interfaces."""

    dt: float = 1e-3
    rtol: float = 1e-10
    atol: float = 1e-10
    dt_min: float = 1e-12


class SessileDae:
    """Index-1 reduction of the sessile quasi-static DAE.

    Every right-hand-side evaluation re-solves (u_m, theta, lam) from the
    algebraic relations given b, warm-started from the last closure.
    """

    def __init__(self, sigma: float, kappa: float, volume: float, n_quad: int = DEFAULT_N_QUAD):
        self.sigma = sigma
        self.kappa = kappa
        self.volume = volume
        self.n_quad = n_quad
        self._guess: tuple[float, float] | None = None

    def closure(self, b: float) -> tuple[float, float, float]:
        u_m, lam, theta = solve_algebraic(
            b, self.kappa, self.volume, self.n_quad, initial=self._guess
        )
        self._guess = (u_m, math.cos(theta))
        return u_m, lam, theta

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        _, _, theta = self.closure(float(y[0]))
        return np.array([-self.sigma - math.cos(theta)])

    def state_at(self, b: float, t: float) -> QuasiStaticState:
        u_m, lam, theta = self.closure(b)
        return QuasiStaticState(b=b, u_m=u_m, theta=theta, lam=lam, t=t)

    def integrate(
        self,
        initial: QuasiStaticState,
        t_final: float,
        rtol: float = 1e-10,
        atol: float = 1e-10,
    ) -> list[QuasiStaticState]:
        """Integrate to t_final; returns the accepted-step states."""
        self._guess = (initial.u_m, math.cos(initial.theta))
        ts, ys = integrate_rk45(
            self.rhs, initial.t, t_final, np.array([initial.b]), rtol=rtol, atol=atol
        )
        return [self.state_at(float(bk[0]), float(tk)) for tk, bk in zip(ts, ys)]


def dae_step_sessile(
    state: QuasiStaticState,
    sigma: float,
    kappa: float,
    volume: float,
    controller: DtController,
    n_quad: int = DEFAULT_N_QUAD,
) -> QuasiStaticState:
    """One accepted adaptive step of the sessile DAE (controller is updated)."""
    dae = SessileDae(sigma, kappa, volume, n_quad)
    dae._guess = (state.u_m, math.cos(state.theta))
    ts, ys = integrate_rk45(
        dae.rhs,
        state.t,
        state.t + controller.dt,
        np.array([state.b]),
        rtol=controller.rtol,
        atol=controller.atol,
        first_step=controller.dt,
    )
    controller.dt = max(controller.dt_min, float(ts[1] - ts[0]))
    return dae.state_at(float(ys[1][0]), float(ts[1]))


class PendantDae:
    """Pendant quasi-static DAE (kappa < 0) in horizontal-graph form.

    The closure solves the three relations (apex condition, contact-point
    relation, volume relation) for (u_m, cos theta, lam) by damped Newton
    with finite-difference Jacobian.
    """

    def __init__(self, sigma: float, kappa: float, volume: float, n_quad: int = DEFAULT_N_QUAD):
        self.sigma = sigma
        self.kappa = kappa
        self.volume = volume
        self.n_quad = n_quad
        self._guess: np.ndarray | None = None

    def _residual(self, p: np.ndarray, b: float) -> np.ndarray:
        u_m, cth, lam = p
        if u_m <= 0.0:
            raise DesingularizationError("apex height became non-positive", u_m=u_m)
        theta = math.acos(min(1.0, max(-1.0, cth)))
        moment = _moment_integral(u_m, lam, theta, self.kappa, self.n_quad)
        halfvol = desingularized_volume(u_m, lam, theta, self.kappa, self.n_quad)
        return np.array(
            [
                -0.5 * self.kappa * u_m**2 + lam * u_m + cth - 1.0,
                (0.5 * self.volume + moment) / u_m - b,
                halfvol - 0.5 * self.volume,
            ]
        )

    def closure(self, b: float) -> tuple[float, float, float]:
        if self._guess is None:
            raise NonConvergenceError("pendant closure needs a seeded guess")
        p = self._guess.copy()
        scale = max(1.0, self.volume, abs(b))
        r = self._residual(p, b)
        nrm = float(np.max(np.abs(r)))
        for it in range(80):
            if nrm <= 1e-12 * scale:
                break
            jac = np.empty((3, 3))
            for kcol in range(3):
                dp = np.zeros(3)
                dp[kcol] = 1e-8 * max(1.0, abs(p[kcol]))
                jac[:, kcol] = (self._residual(p + dp, b) - r) / dp[kcol]
            try:
                step = np.linalg.solve(jac, -r)
            except np.linalg.LinAlgError as exc:
                raise NonConvergenceError("singular Jacobian in pendant closure") from exc
            lam_bt = 1.0
            while True:
                try:
                    r_try = self._residual(p + lam_bt * step, b)
                except DesingularizationError:
                    r_try = None
                if r_try is not None and float(np.max(np.abs(r_try))) < nrm:
                    break
                if lam_bt < 2**-24:
                    raise NonConvergenceError(
                        "pendant closure stalled", residual=nrm, iterations=it
                    )
                lam_bt *= 0.5
            p = p + lam_bt * step
            r = r_try
            nrm = float(np.max(np.abs(r)))
        else:
            raise NonConvergenceError(
                "pendant closure did not converge", residual=nrm, iterations=80
            )
        self._guess = p.copy()
        u_m, cth, lam = p
        return float(u_m), float(lam), math.acos(min(1.0, max(-1.0, cth)))

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        _, _, theta = self.closure(float(y[0]))
        return np.array([-math.cos(theta) - self.sigma])

    def seed(self, state: PendantState) -> None:
        self._guess = np.array([state.u_m, math.cos(state.theta), state.lam])

    def state_at(self, b: float, t: float) -> PendantState:
        u_m, lam, theta = self.closure(b)
        return PendantState(b=b, u_m=u_m, theta=theta, lam=lam, t=t)

    def integrate(
        self,
        initial: PendantState,
        t_final: float,
        rtol: float = 1e-10,
        atol: float = 1e-10,
    ) -> list[PendantState]:
        self.seed(initial)
        ts, ys = integrate_rk45(
            self.rhs, initial.t, t_final, np.array([initial.b]), rtol=rtol, atol=atol
        )
        return [self.state_at(float(bk[0]), float(tk)) for tk, bk in zip(ts, ys)]


def compatible_pendant_data(
    u_m0: float, theta_in: float, kappa: float, n_quad: int = DEFAULT_N_QUAD
) -> tuple[PendantState, float]:
    """Pendant initial data: (state, volume) from prescribed (u_m, theta).

    lam is seeded from the apex condition; the volume and contact point then
    follow from the desingularized relations.
    """
    lam = lambda_from_apex(u_m0, theta_in, kappa)
    if abs(kappa * u_m0 - lam) < 1e-12 * max(1.0, abs(lam)):
        raise DesingularizationError(
            "kappa u_m = lam apex degeneracy", kappa=kappa, u_m=u_m0, lam=lam
        )
    halfvol = desingularized_volume(u_m0, lam, theta_in, kappa, n_quad)
    moment = _moment_integral(u_m0, lam, theta_in, kappa, n_quad)
    volume = 2.0 * halfvol
    b0 = (0.5 * volume + moment) / u_m0
    return PendantState(b=b0, u_m=u_m0, theta=theta_in, lam=lam, t=0.0), volume


def dae_step_pendant(
    state: PendantState,
    sigma: float,
    kappa: float,
    volume: float,
    controller: DtController,
    n_quad: int = DEFAULT_N_QUAD,
) -> PendantState:
    """One accepted adaptive step of the pendant DAE (controller is updated)."""
    dae = PendantDae(sigma, kappa, volume, n_quad)
    dae.seed(state)
    ts, ys = integrate_rk45(
        dae.rhs,
        state.t,
        state.t + controller.dt,
        np.array([state.b]),
        rtol=controller.rtol,
        atol=controller.atol,
        first_step=controller.dt,
    )
    controller.dt = max(controller.dt_min, float(ts[1] - ts[0]))
    return dae.state_at(float(ys[1][0]), float(ts[1]))

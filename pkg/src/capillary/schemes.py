"""First- and second-order moving-boundary schemes for the droplet dynamics.

Both schemes follow the same three-move pattern per step: an explicit
contact-line update (unconditionally stable: the normalized flux
(1 + h_x w_x)/sqrt(1 + h_x^2) is bounded), a semi-Lagrangian transfer of the
profile onto the new uniform grid, and a volume-constrained profile solve on
that grid.

- First order: forward-Euler boundary update, first-order Taylor transport,
  semi-implicit solve (curvature denominator frozen at the previous or the
  rescaled slopes, per ``slope_source``).
- Second order: predictor-corrector.  Predictor = first-order boundary
  update + fully implicit nonlinear elliptic solve; corrector = trapezoidal
  boundary update + averaged-slope semi-Lagrangian transfer + trapezoidal
  implicit profile solve.  In the quasi-static limit (beta = 0) the
  trapezoidal profile equation degenerates (no time derivative is left to
  damp the initial profile's residual), so the corrector profile is the
  static constrained elliptic solve on the corrected domain, which is the
  algebraic closure the predictor-corrector construction assumes.

Time-dependent coefficients (breathing droplet) enter through a schedule
``t -> PhysicalParams``: the first-order scheme evaluates it at t_n, the
second-order averages pair t_n with t_{n+1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .core import (
    DropletState,
    PhysicalParams,
    TimeSeries,
    TimeSeriesRow,
    contact_angles,
    energy_of,
    grid_slopes,
    one_sided_slope,
    snapshot_of,
    volume_of,
)
from .errors import (
    ConstraintViolationError,
    DomainExitError,
    DropletCollapseError,
    NegativeHeightError,
    NonConvergenceError,
    StabilityBoundError,
)
from .linsolve import (
    BorderedTridiag,
    _elliptic_residual_floor,
    damped_newton_bordered,
    newton_elliptic,
    solve_bordered_tridiag,
)
from .substrate import FlatSubstrate

__all__ = [
    "SchemeConfig",
    "boundary_update_first",
    "boundary_update_second",
    "rescale_first",
    "rescale_second",
    "step_first",
    "step_second",
    "run_simulation",
]

ParamsSchedule = Callable[[float], PhysicalParams]

#: height may undershoot the substrate by at most this much before aborting
_HEIGHT_TOL = 1e-8
#: volume-constraint residual allowed after a profile solve
_VOLUME_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class SchemeConfig:
    """Run parameters for the time steppers."""

    dt: float
    n_grid: int
    order: str = "first"
    slope_source: str = "previous"
    final_time: float = 0.0
    snapshot_cadence: float | None = None
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    picard_corrector: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_grid < 4:
            raise ValueError(f"n_grid must be >= 4, got {self.n_grid}")
        if self.order not in ("first", "second"):
            raise ValueError(f"order must be 'first' or 'second', got {self.order!r}")
        if self.slope_source not in ("previous", "rescaled"):
            raise ValueError(f"slope_source must be 'previous' or 'rescaled'")
        if self.final_time < 0:
            raise ValueError("final_time must be >= 0")


def _endpoint_fluxes(state: DropletState, substrate, sigma: float) -> tuple[float, float]:
    """Signed contact-line speeds at a and b from one-sided slopes."""
    tau = state.tau
    s0 = one_sided_slope(state.heights, tau, "left")
    sN = one_sided_slope(state.heights, tau, "right")
    wa = float(substrate.w_prime(state.a, side="right"))
    wb = float(substrate.w_prime(state.b, side="left"))
    va = sigma * math.sqrt(1.0 + wa**2) + (1.0 + s0 * wa) / math.sqrt(1.0 + s0**2)
    vb = -sigma * math.sqrt(1.0 + wb**2) - (1.0 + sN * wb) / math.sqrt(1.0 + sN**2)
    return va, vb


def _check_endpoints(a: float, b: float, substrate, step: int | None = None) -> None:
    if b <= a:
        raise DropletCollapseError("moving boundaries crossed", a=a, b=b, step=step)
    if not (substrate.contains(a) and substrate.contains(b)):
        raise DomainExitError(
            "contact point left the substrate domain",
            a=a, b=b, domain=list(substrate.domain), step=step,
        )


def boundary_update_first(
    state: DropletState, substrate, params: PhysicalParams, dt: float
) -> tuple[float, float]:
    """Explicit forward-Euler contact-line update."""
    va, vb = _endpoint_fluxes(state, substrate, params.sigma)
    a_next = state.a + dt * va
    b_next = state.b + dt * vb
    _check_endpoints(a_next, b_next, substrate)
    return a_next, b_next


def boundary_update_second(
    state: DropletState,
    predictor: DropletState,
    substrate,
    params: PhysicalParams,
    dt: float,
    params_next: PhysicalParams | None = None,
) -> tuple[float, float]:
    """Trapezoidal contact-line update averaging state and predictor fluxes."""
    p1 = params_next if params_next is not None else params
    va0, vb0 = _endpoint_fluxes(state, substrate, params.sigma)
    va1, vb1 = _endpoint_fluxes(predictor, substrate, p1.sigma)
    a_next = state.a + 0.5 * dt * (va0 + va1)
    b_next = state.b + 0.5 * dt * (vb0 + vb1)
    _check_endpoints(a_next, b_next, substrate)
    return a_next, b_next


def _displacements(state: DropletState, a_next: float, b_next: float) -> np.ndarray:
    n = state.n_intervals
    tau_next = (b_next - a_next) / n
    j = np.arange(n + 1)
    return (a_next - state.a) + j * (tau_next - state.tau)


def rescale_first(state: DropletState, a_next: float, b_next: float) -> np.ndarray:
    """First-order Taylor transport of h onto the new uniform grid.

    The affine grid map sends new node j exactly to old node j, so the
    transported value is h_j + h_x|_j * (x_j^{new} - x_j^{old}).
    """
    if not a_next < b_next:
        raise DropletCollapseError("rescale target interval is empty", a=a_next, b=b_next)
    slopes = grid_slopes(state.heights, state.tau)
    return np.asarray(state.heights) + slopes * _displacements(state, a_next, b_next)


def rescale_second(
    state: DropletState,
    predictor: DropletState,
    a_next: float,
    b_next: float,
) -> np.ndarray:
    """Averaged-slope semi-Lagrangian transfer onto the corrector grid.

    Interior nodes implement

        h*_j = h^n_j + (1/8) (1/tau' + 1/tau) (h^n_{j+1} - h^n_{j-1}
               + hp_{j+1} - hp_{j-1}) [(a' - a) + j (tau' - tau)]

    with hp the predictor profile on its own grid; one-sided stencils
    replace the centered differences at j = 0, N.
    """
    n = state.n_intervals
    if predictor.n_intervals != n:
        raise ValueError("state and predictor must share the grid size")
    tau0 = state.tau
    tau1 = (b_next - a_next) / n
    s0 = grid_slopes(state.heights, tau0)
    s1 = grid_slopes(predictor.heights, predictor.tau)
    num = 2.0 * tau0 * s0 + 2.0 * predictor.tau * s1
    disp = _displacements(state, a_next, b_next)
    return np.asarray(state.heights) + 0.125 * (1.0 / tau1 + 1.0 / tau0) * num * disp


def _assemble_first_order(
    heights_star: np.ndarray,
    alpha: np.ndarray,
    a_next: float,
    b_next: float,
    substrate,
    params: PhysicalParams,
    dt: float,
) -> BorderedTridiag:
    """Semi-implicit bordered system on the new grid.

    Row j: -h_{j-1} + (2 + beta tau^2/dt a_j + kappa cos(theta0) tau^2
    a_j^{3/2}) h_j - h_{j+1} - a_j^{3/2} tau^2 lam = f_j; the border unknown
    is mu = -tau^2 lam and the constraint row enforces the rectangle-rule
    volume.
    """
    n = heights_star.size - 2
    tau = (b_next - a_next) / (n + 1)
    x = a_next + tau * np.arange(n + 2)
    cos0, sin0 = math.cos(params.theta0), math.sin(params.theta0)
    al32 = alpha**1.5
    diag = 2.0 + (params.beta * tau**2 / dt) * alpha + params.kappa * cos0 * tau**2 * al32
    f = (params.beta * tau**2 / dt) * heights_star[1:-1] * alpha
    f = f - params.kappa * sin0 * x[1:-1] * tau**2 * al32
    w_a = float(substrate.w(a_next))
    w_b = float(substrate.w(b_next))
    f[0] += w_a
    f[-1] += w_b
    w_int = np.asarray(substrate.w(x[1:-1]), dtype=float)
    rhs_border = float(np.sum(w_int)) + params.volume / tau
    return BorderedTridiag(
        sub=np.full(n, -1.0),
        diag=diag,
        sup=np.full(n, -1.0),
        col=al32,
        row=np.ones(n),
        rhs_interior=f,
        rhs_border=rhs_border,
    )


def _validated_state(
    a: float,
    b: float,
    heights: np.ndarray,
    lam: float,
    time: float,
    substrate,
    params: PhysicalParams,
    step: int | None = None,
) -> DropletState:
    state = DropletState(a=a, b=b, heights=heights, lam=lam, time=time)
    x = state.grid()
    w = np.asarray(substrate.w(x), dtype=float)
    undershoot = float(np.min(state.heights - w))
    if undershoot < -_HEIGHT_TOL:
        raise NegativeHeightError(
            "capillary surface dipped below the substrate",
            undershoot=undershoot, step=step, time=time,
        )
    vol_resid = abs(volume_of(state, substrate) - params.volume)
    if vol_resid > _VOLUME_TOL * max(1.0, params.volume):
        raise ConstraintViolationError(
            "volume constraint violated after solve",
            residual=vol_resid, step=step, time=time,
        )
    return state


def step_first(
    state: DropletState,
    substrate,
    params: PhysicalParams,
    config: SchemeConfig,
) -> DropletState:
    """One step of the first-order scheme."""
    dt = config.dt
    a1, b1 = boundary_update_first(state, substrate, params, dt)
    h_star = rescale_first(state, a1, b1)
    tau1 = (b1 - a1) / state.n_intervals
    if config.slope_source == "previous":
        s = grid_slopes(state.heights, state.tau)[1:-1]
    else:
        s = grid_slopes(h_star, tau1)[1:-1]
    alpha = 1.0 + s * s
    system = _assemble_first_order(h_star, alpha, a1, b1, substrate, params, dt)
    h_int, mu = solve_bordered_tridiag(system)
    lam = -mu / tau1**2
    heights = np.concatenate(
        ([float(substrate.w(a1))], h_int, [float(substrate.w(b1))])
    )
    return _validated_state(a1, b1, heights, lam, state.time + dt, substrate, params)


def _corrector_solve(
    state: DropletState,
    h_star: np.ndarray,
    a1: float,
    b1: float,
    substrate,
    params: PhysicalParams,
    params_next: PhysicalParams,
    config: SchemeConfig,
    guess: np.ndarray,
    lam_guess: float,
) -> tuple[np.ndarray, float]:
    """Trapezoidal implicit profile solve of the corrector (beta > 0)."""
    n_nodes = state.heights.size
    N = n_nodes - 1
    dt = config.dt
    tau0 = state.tau
    tau1 = (b1 - a1) / N
    x0 = state.grid()
    x1 = a1 + tau1 * np.arange(n_nodes)
    w_a = float(substrate.w(a1))
    w_b = float(substrate.w(b1))
    w_int = np.asarray(substrate.w(x1[1:-1]), dtype=float)
    beta = params.beta
    k0, k1 = params.kappa, params_next.kappa
    cos0, sin0 = math.cos(params.theta0), math.sin(params.theta0)

    h_old = np.asarray(state.heights)
    s_old = (h_old[2:] - h_old[:-2]) / (2.0 * tau0)
    al_old = 1.0 + s_old**2
    d2_old = (h_old[2:] - 2.0 * h_old[1:-1] + h_old[:-2]) / tau0**2
    fixed = (
        -0.5 * d2_old / al_old**1.5
        + 0.5 * k0 * (h_old[1:-1] * cos0 + x0[1:-1] * sin0)
    )
    inv_sq_old = 1.0 / np.sqrt(al_old)
    hs_int = np.asarray(h_star)[1:-1]

    def full(h_int: np.ndarray) -> np.ndarray:
        return np.concatenate(([w_a], h_int, [w_b]))

    def assemble(h_int: np.ndarray, lam: float) -> tuple[np.ndarray, float]:
        h = full(h_int)
        s = (h[2:] - h[:-2]) / (2.0 * tau1)
        al = 1.0 + s * s
        d2 = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / tau1**2
        r = (
            beta * (h_int - hs_int) / (2.0 * dt) * (inv_sq_old + 1.0 / np.sqrt(al))
            - 0.5 * d2 / al**1.5
            + 0.5 * k1 * (h_int * cos0 + x1[1:-1] * sin0)
            + fixed
            - lam
        )
        r_con = tau1 * float(np.sum(h_int - w_int)) - params.volume
        return r, r_con

    def jacobian(h_int: np.ndarray, lam: float) -> BorderedTridiag:
        h = full(h_int)
        s = (h[2:] - h[:-2]) / (2.0 * tau1)
        al = 1.0 + s * s
        d2 = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / tau1**2
        diag = (
            beta / (2.0 * dt) * (inv_sq_old + 1.0 / np.sqrt(al))
            + 1.0 / (tau1**2 * al**1.5)
            + 0.5 * k1 * cos0
        )
        off = -0.5 / (tau1**2 * al**1.5)
        skew = 0.75 * d2 * s / (tau1 * al**2.5)
        tskew = beta * (h_int - hs_int) * s / (4.0 * dt * tau1 * al**1.5)
        n = h_int.size
        return BorderedTridiag(
            sub=off - skew + tskew,
            diag=diag,
            sup=off + skew - tskew,
            col=np.full(n, -1.0),
            row=np.full(n, tau1),
            rhs_interior=np.zeros(n),
            rhs_border=0.0,
        )

    def picard(h_int: np.ndarray, lam: float) -> tuple[np.ndarray, float]:
        # linearized sweep with the slope factors frozen at the iterate
        h = full(h_int)
        s = (h[2:] - h[:-2]) / (2.0 * tau1)
        al = 1.0 + s * s
        al32 = al**1.5
        coef = beta / (2.0 * dt) * (inv_sq_old + 1.0 / np.sqrt(al))
        off = -0.5 / (tau1**2 * al32)
        f = coef * hs_int - 0.5 * k1 * sin0 * x1[1:-1] - fixed
        f[0] -= off[0] * w_a
        f[-1] -= off[-1] * w_b
        system = BorderedTridiag(
            sub=off,
            diag=coef + 1.0 / (tau1**2 * al32) + 0.5 * k1 * cos0,
            sup=off,
            col=np.full(h_int.size, -1.0),
            row=np.full(h_int.size, tau1),
            rhs_interior=f,
            rhs_border=tau1 * float(np.sum(w_int)) + params.volume,
        )
        return solve_bordered_tridiag(system)

    floor = _elliptic_residual_floor(h_old, tau1, max(abs(k0), abs(k1)), beta, dt)
    if config.picard_corrector:
        h_int, lam = picard(guess, lam_guess)
        return full(h_int), lam
    h_int, lam, _ = damped_newton_bordered(
        guess, lam_guess, assemble, jacobian,
        tol=config.newton_tol, max_iter=config.newton_max_iter, floor=floor,
        picard=picard,
    )
    return full(h_int), lam


def step_second(
    state: DropletState,
    substrate,
    params: PhysicalParams,
    config: SchemeConfig,
    params_next: PhysicalParams | None = None,
) -> DropletState:
    """One step of the second-order predictor-corrector scheme."""
    dt = config.dt
    p1 = params_next if params_next is not None else params
    # predictor: first-order boundary + fully implicit elliptic solve
    at, bt = boundary_update_first(state, substrate, params, dt)
    h_star_pred = rescale_first(state, at, bt)
    quasi_static = params.beta == 0.0
    pred_seed = DropletState(
        a=at, b=bt, heights=_newton_seed(h_star_pred, substrate, at, bt),
        lam=state.lam, time=state.time + dt,
    )
    predictor, _ = newton_elliptic(
        pred_seed,
        a=at,
        b=bt,
        params=params,
        substrate=substrate,
        h_star=None if quasi_static else h_star_pred,
        dt=None if quasi_static else dt,
        tol=config.newton_tol,
        max_iter=config.newton_max_iter,
        time=state.time + dt,
    )
    # corrector boundary update
    a1, b1 = boundary_update_second(state, predictor, substrate, params, dt, p1)
    if quasi_static:
        # beta = 0: the profile is the static constrained elliptic solve on
        # the corrected domain (the predictor-corrector algebraic closure)
        h_star = rescale_first(state, a1, b1)
        seed = DropletState(
            a=a1, b=b1, heights=_newton_seed(h_star, substrate, a1, b1),
            lam=predictor.lam, time=state.time + dt,
        )
        solved, _ = newton_elliptic(
            seed, a=a1, b=b1, params=p1, substrate=substrate,
            tol=config.newton_tol, max_iter=config.newton_max_iter,
            time=state.time + dt,
        )
        return _validated_state(
            a1, b1, solved.heights, solved.lam, state.time + dt, substrate, p1
        )
    h_star = rescale_second(state, predictor, a1, b1)
    guess = _newton_seed(np.asarray(predictor.heights), substrate, a1, b1)[1:-1]
    heights, lam = _corrector_solve(
        state, h_star, a1, b1, substrate, params, p1, config, guess, predictor.lam
    )
    return _validated_state(a1, b1, heights, lam, state.time + dt, substrate, p1)


def _pin(heights: np.ndarray, substrate, a: float, b: float) -> np.ndarray:
    out = np.array(heights, dtype=float)
    out[0] = float(substrate.w(a))
    out[-1] = float(substrate.w(b))
    return out


def _newton_seed(heights: np.ndarray, substrate, a: float, b: float) -> np.ndarray:
    """Initial guess for the implicit solves: pinned and substrate-clipped.

    Large contact-line moves can drag the Taylor-transported profile below
    the substrate near an endpoint; seeding Newton there converges onto a
    spurious slope-saturated root.  Clipping only alters the *guess*; the
    transported profile itself enters the residual unmodified.
    """
    out = _pin(heights, substrate, a, b)
    n = out.size
    x = np.linspace(a, b, n)
    w = np.asarray(substrate.w(x), dtype=float)
    np.maximum(out, w, out=out)
    out[0] = w[0]
    out[-1] = w[-1]
    return out


def _initial_lambda(
    state: DropletState, substrate, params: PhysicalParams, config: SchemeConfig
) -> float:
    """Diagnostic multiplier for the t=0 row (never consumed by the schemes).

    A quasi-static solve on the initial domain; falls back to the
    least-squares constant if the solve does not converge.
    """
    try:
        solved, _ = newton_elliptic(
            state, a=state.a, b=state.b, params=params, substrate=substrate,
            tol=max(config.newton_tol, 1e-10), max_iter=config.newton_max_iter,
            time=state.time,
        )
        return solved.lam
    except Exception:
        h = np.asarray(state.heights)
        tau = state.tau
        x = state.grid()
        s = (h[2:] - h[:-2]) / (2.0 * tau)
        d2 = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / tau**2
        lam_j = -d2 / (1.0 + s * s) ** 1.5 + params.kappa * (
            h[1:-1] * math.cos(params.theta0) + x[1:-1] * math.sin(params.theta0)
        )
        return float(np.mean(lam_j))


def _row_for(
    state: DropletState, substrate, params: PhysicalParams, lam: float | None = None
) -> TimeSeriesRow:
    ang = contact_angles(state, substrate)
    return TimeSeriesRow(
        t=state.time,
        a=state.a,
        b=state.b,
        lam=state.lam if lam is None else lam,
        theta_a=ang.theta_a,
        theta_b=ang.theta_b,
        volume=volume_of(state, substrate),
        energy=energy_of(state, substrate, params),
    )


def run_simulation(
    initial: DropletState,
    substrate,
    params: PhysicalParams,
    config: SchemeConfig,
    schedule: ParamsSchedule | None = None,
) -> TimeSeries:
    """Advance the selected scheme to ``config.final_time``.

    Diagnostics are recorded every step; full profiles at the snapshot
    cadence (in time units, t = 0 included).  On flat substrates the
    per-step and cumulative contact-line bounds

        sigma dt <= a^{n+1} - a^n <= (sigma + 1) dt   (mirrored for b)

    are asserted each step; violations raise
    :class:`~capillary.errors.StabilityBoundError` with the step index.
    """
    dt = config.dt
    if config.final_time == 0.0:
        n_steps = 0
    else:
        n_steps = int(round(config.final_time / dt))
        if abs(n_steps * dt - config.final_time) > 1e-8 * max(1.0, config.final_time):
            raise ValueError("final_time must be an integer multiple of dt")

    def params_at(t: float) -> PhysicalParams:
        return schedule(t) if schedule is not None else params

    flat = isinstance(substrate, FlatSubstrate)
    series = TimeSeries()
    p0 = params_at(initial.time)
    state = initial
    if not math.isfinite(state.lam):
        state = replace(state, lam=_initial_lambda(state, substrate, p0, config))
    series.append(_row_for(state, substrate, p0))

    next_snap = state.time if config.snapshot_cadence is not None else math.inf
    if config.snapshot_cadence is not None:
        series.add_snapshot(snapshot_of(state, substrate))
        next_snap = state.time + config.snapshot_cadence

    # cumulative flat-substrate bounds (Prop-style envelope, exact arithmetic
    # in the constant-sigma case, per-step sigma sums otherwise)
    lo_a = hi_a = state.a
    lo_b = hi_b = state.b

    for step_idx in range(n_steps):
        t_n = state.time
        # time-dependent coefficients: the first-order step samples the
        # schedule at the step midpoint (cancels the leading coefficient-
        # sampling drift over oscillation periods); trapezoidal averages of
        # the second-order step pair t_n with t_{n+1}
        pn = params_at(t_n + 0.5 * dt) if config.order == "first" else params_at(t_n)
        try:
            if config.order == "first":
                new_state = step_first(state, substrate, pn, config)
            else:
                new_state = step_second(
                    state, substrate, pn, config, params_at(t_n + dt)
                )
        except (DropletCollapseError, NegativeHeightError, ConstraintViolationError) as exc:
            exc.detail.setdefault("step", step_idx)
            raise
        if flat:
            if config.order == "first":
                sig_lo = sig_hi = pn.sigma
            else:
                sig_next = params_at(t_n + dt).sigma
                sig_lo, sig_hi = min(pn.sigma, sig_next), max(pn.sigma, sig_next)
            slack = 1e-12 * max(1.0, abs(state.a), abs(state.b))
            da = new_state.a - state.a
            db = new_state.b - state.b
            if not (sig_lo * dt - slack <= da <= (sig_hi + 1.0) * dt + slack):
                raise StabilityBoundError(
                    "left endpoint violated the per-step bound",
                    step=step_idx, delta=da, lo=sig_lo * dt, hi=(sig_hi + 1.0) * dt,
                )
            if not (-(sig_hi + 1.0) * dt - slack <= db <= -sig_lo * dt + slack):
                raise StabilityBoundError(
                    "right endpoint violated the per-step bound",
                    step=step_idx, delta=db, lo=-(sig_hi + 1.0) * dt, hi=-sig_lo * dt,
                )
            lo_a += sig_lo * dt
            hi_a += (sig_hi + 1.0) * dt
            lo_b -= (sig_hi + 1.0) * dt
            hi_b -= sig_lo * dt
            if not (lo_a - slack <= new_state.a <= hi_a + slack) or not (
                lo_b - slack <= new_state.b <= hi_b + slack
            ):
                raise StabilityBoundError(
                    "endpoint violated the cumulative bound",
                    step=step_idx, a=new_state.a, b=new_state.b,
                )
        state = new_state
        p_row = params_at(state.time)
        series.append(_row_for(state, substrate, p_row))
        if state.time >= next_snap - 0.5 * dt:
            series.add_snapshot(snapshot_of(state, substrate))
            next_snap += config.snapshot_cadence
    return series

"""Bordered tridiagonal saddle systems and the damped-Newton elliptic solver.

The volume-constrained solves all reduce to

    [ A  c ] [ y  ]   [ f ]
    [ e' 0 ] [ mu ] = [ g ]

with A tridiagonal (N-1 x N-1).  Block elimination needs two tridiagonal
solves (A z1 = f, A z2 = c) and a scalar Schur complement for the border
unknown: mu = (e'z1 - g) / (e'z2), y = z1 - mu z2 -- O(N) work and exact up
to factorization roundoff.  The Schur pivot is checked explicitly rather
than assuming definiteness (kappa < 0 runs can lose diagonal dominance).

Raw nonlinear residuals contain a second-difference term whose evaluation
roundoff is ~eps*|h|/tau^2, so Newton convergence is declared at
``max(tol, roundoff_floor)``; demanding 1e-12 verbatim would be unreachable
on fine grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .core import DropletState, PhysicalParams
from .errors import NonConvergenceError, NumericalBlowupError, SingularSystemError

__all__ = [
    "BorderedTridiag",
    "solve_bordered_tridiag",
    "damped_newton_bordered",
    "newton_elliptic",
]

_EPS = float(np.finfo(float).eps)

#: relative residual below which block elimination is considered broken
_RESIDUAL_GUARD = 1e-9


@dataclass(frozen=True)
class BorderedTridiag:
    """Bordered tridiagonal system; ``sub[0]`` and ``sup[-1]`` are unused.

    Unknowns are (y_1..y_n, mu) where mu multiplies the border column.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    col: np.ndarray
    row: np.ndarray
    rhs_interior: np.ndarray
    rhs_border: float

    def __post_init__(self):
        n = self.diag.size
        for name in ("sub", "sup", "col", "row", "rhs_interior"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have shape ({n},), got {arr.shape}")


def _tridiag_solve_two(sub, diag, sup, b1, b2):
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = sup[:-1]
    ab[1, :] = diag
    ab[2, :-1] = sub[1:]
    B = np.column_stack([b1, b2])
    Z = solve_banded((1, 1), ab, B, overwrite_ab=True, overwrite_b=True, check_finite=False)
    return Z[:, 0], Z[:, 1]


def solve_bordered_tridiag(system: BorderedTridiag) -> tuple[np.ndarray, float]:
    """Solve the saddle system by block elimination; returns (y, mu)."""
    for name in ("sub", "diag", "sup", "col", "row", "rhs_interior"):
        if not np.all(np.isfinite(getattr(system, name))):
            raise ValueError(f"non-finite entries in {name}")
    if not math.isfinite(system.rhs_border):
        raise ValueError("non-finite rhs_border")

    z1, z2 = _tridiag_solve_two(
        system.sub, system.diag, system.sup, system.rhs_interior, system.col
    )
    if not (np.all(np.isfinite(z1)) and np.all(np.isfinite(z2))):
        raise SingularSystemError("tridiagonal factorization produced non-finite values")
    denom = float(system.row @ z2)
    scale = float(np.max(np.abs(system.row)) * np.max(np.abs(z2)) + 1.0)
    if abs(denom) <= 1e3 * _EPS * scale:
        raise SingularSystemError("singular Schur complement", pivot=denom)
    mu = (float(system.row @ z1) - system.rhs_border) / denom
    y = z1 - mu * z2

    # a-posteriori residual guard against silent breakdown; the threshold is
    # condition-aware (backward-stable solves leave eps * ||A|| * ||y||)
    r_int = (
        system.diag * y
        + np.concatenate(([0.0], system.sub[1:] * y[:-1]))
        + np.concatenate((system.sup[:-1] * y[1:], [0.0]))
        + system.col * mu
        - system.rhs_interior
    )
    r_bor = float(system.row @ y) - system.rhs_border
    amax = float(
        np.max(np.abs(system.sub) + np.abs(system.diag) + np.abs(system.sup))
        + np.max(np.abs(system.col))
    )
    ynorm = max(float(np.max(np.abs(y))), abs(mu), 1.0)
    fscale = max(
        float(np.max(np.abs(system.rhs_interior), initial=0.0)),
        abs(system.rhs_border),
        float(np.sum(np.abs(system.row))) * ynorm,
        amax * ynorm,
        1.0,
    )
    resid = max(float(np.max(np.abs(r_int))), abs(r_bor))
    if resid > 1e4 * _EPS * fscale:
        raise SingularSystemError(
            "bordered solve residual too large", residual=resid, scale=fscale
        )
    return y, mu


def damped_newton_bordered(
    y0: np.ndarray,
    mu0: float,
    assemble: Callable[[np.ndarray, float], tuple[np.ndarray, float]],
    jacobian: Callable[[np.ndarray, float], BorderedTridiag],
    tol: float,
    max_iter: int,
    floor: float = 0.0,
    picard: Callable[[np.ndarray, float], tuple[np.ndarray, float]] | None = None,
) -> tuple[np.ndarray, float, int]:
    """Newton with residual-halving backtracking on a bordered-tridiagonal Jacobian.

    ``assemble`` returns (interior residual, constraint residual); ``jacobian``
    returns the linearization at the same point with rhs fields ignored.
    Convergence: residual max-norm <= max(tol, floor).

    When the line search cannot reduce the residual (steep-slope kinked
    iterates make the raw-residual landscape locally non-descendable even
    along exact Newton directions), one ``picard`` sweep -- the frozen-slope
    linear solve whose fixed point is the same nonlinear solution -- is used
    as a rescue step; Newton then resumes for the quadratic finish.
    """
    y = np.array(y0, dtype=float)
    mu = float(mu0)
    r_int, r_con = assemble(y, mu)
    if not (np.all(np.isfinite(r_int)) and math.isfinite(r_con)):
        raise NumericalBlowupError("non-finite residual at initial guess")
    nrm = max(float(np.max(np.abs(r_int))), abs(r_con))
    target = max(tol, floor)
    for it in range(max_iter):
        if nrm <= target:
            return y, mu, it
        jac = jacobian(y, mu)
        system = BorderedTridiag(
            sub=jac.sub,
            diag=jac.diag,
            sup=jac.sup,
            col=jac.col,
            row=jac.row,
            rhs_interior=-r_int,
            rhs_border=-r_con,
        )
        dy, dmu = solve_bordered_tridiag(system)
        accepted = False
        step = 1.0
        while step > 2**-24:
            y_new = y + step * dy
            mu_new = mu + step * dmu
            r_int_new, r_con_new = assemble(y_new, mu_new)
            if np.all(np.isfinite(r_int_new)) and math.isfinite(r_con_new):
                nrm_new = max(float(np.max(np.abs(r_int_new))), abs(r_con_new))
                if nrm_new < nrm:
                    accepted = True
                    break
            step *= 0.5
        # rescue when the line search fails outright or crawls (heavily
        # damped steps with <10% progress mean Newton is fighting a kink)
        slow = accepted and step < 2**-4 and nrm_new > 0.9 * nrm
        if picard is not None and (not accepted or slow):
            # fixed-point rescue: iterate frozen-slope sweeps (globally
            # contracting toward the same solution), keep the best point
            if accepted:
                y_c, mu_c = y_new, mu_new
                best = (nrm_new, y_new.copy(), mu_new, r_int_new, r_con_new)
            else:
                y_c, mu_c = y, mu
                best = None
            for _ in range(100):
                y_c, mu_c = picard(y_c, mu_c)
                r_i, r_c = assemble(y_c, mu_c)
                if not (np.all(np.isfinite(r_i)) and math.isfinite(r_c)):
                    break
                n_c = max(float(np.max(np.abs(r_i))), abs(r_c))
                if best is None or n_c < best[0]:
                    best = (n_c, y_c.copy(), mu_c, r_i, r_c)
                if n_c <= target:
                    break
            if best is not None and best[0] < nrm:
                nrm_new, y_new, mu_new, r_int_new, r_con_new = best
                accepted = True
        if not accepted:
            raise NonConvergenceError(
                "Newton line search stalled", residual=nrm, iterations=it, target=target
            )
        y, mu, r_int, r_con, nrm = y_new, mu_new, r_int_new, r_con_new, nrm_new
    if nrm <= target:
        return y, mu, max_iter
    raise NonConvergenceError(
        "Newton failed to reach tolerance", residual=nrm, iterations=max_iter, target=target
    )


def _elliptic_residual_floor(h: np.ndarray, tau: float, kappa: float, beta: float, dt: float | None) -> float:
    """Roundoff floor of the raw residual evaluation."""
    hmax = float(np.max(np.abs(h))) + 1.0
    floor = 16.0 * _EPS * (hmax / tau**2 + abs(kappa) * hmax + 1.0)
    if beta > 0.0 and dt:
        floor += 16.0 * _EPS * beta * hmax / dt
    return floor


def newton_elliptic(
    initial: DropletState,
    *,
    a: float,
    b: float,
    params: PhysicalParams,
    substrate,
    h_star: np.ndarray | None = None,
    dt: float | None = None,
    tol: float = 1e-12,
    max_iter: int = 50,
    time: float = 0.0,
) -> tuple[DropletState, int]:
    """Fully implicit nonlinear elliptic solve on the grid of [a, b].

    Solves, for (h_1..h_{N-1}, lam),

        beta (h - h*) / (dt sqrt(1+h_x^2)) = h_xx/(1+h_x^2)^{3/2}
            - kappa (h cos theta0 + x sin theta0) + lam,
        h(a) = w(a), h(b) = w(b),  tau * Sum (h_j - w_j) = V,

    with centered stencils.  ``beta = 0`` (or ``dt=None``) drops the time
    term and yields the quasi-static profile.  The Jacobian is assembled
    analytically as a bordered tridiagonal system.
    """
    n_nodes = initial.heights.size
    N = n_nodes - 1
    tau = (b - a) / N
    x = a + tau * np.arange(n_nodes)
    w_a = float(substrate.w(a))
    w_b = float(substrate.w(b))
    w_int = np.asarray(substrate.w(x[1:-1]), dtype=float)
    kappa, beta, th0 = params.kappa, params.beta, params.theta0
    cos0, sin0 = math.cos(th0), math.sin(th0)
    V = params.volume
    use_time = beta > 0.0 and dt is not None
    if use_time and h_star is None:
        raise ValueError("h_star is required when beta > 0 and dt is given")
    hs = None if not use_time else np.asarray(h_star, dtype=float)

    def full(h_int: np.ndarray) -> np.ndarray:
        return np.concatenate(([w_a], h_int, [w_b]))

    def assemble(h_int: np.ndarray, lam: float) -> tuple[np.ndarray, float]:
        h = full(h_int)
        s = (h[2:] - h[:-2]) / (2.0 * tau)
        al = 1.0 + s * s
        d2 = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / tau**2
        r = -d2 / al**1.5 + kappa * (h_int * cos0 + x[1:-1] * sin0) - lam
        if use_time:
            r += beta * (h_int - hs[1:-1]) / (dt * np.sqrt(al))
        r_con = tau * float(np.sum(h_int - w_int)) - V
        return r, r_con

    def jacobian(h_int: np.ndarray, lam: float) -> BorderedTridiag:
        h = full(h_int)
        s = (h[2:] - h[:-2]) / (2.0 * tau)
        al = 1.0 + s * s
        d2 = (h[2:] - 2.0 * h[1:-1] + h[:-2]) / tau**2
        diag = 2.0 / (tau**2 * al**1.5) + kappa * cos0
        off = -1.0 / (tau**2 * al**1.5)
        skew = 1.5 * d2 * s / (tau * al**2.5)
        sup = off + skew
        sub = off - skew
        if use_time:
            diag = diag + beta / (dt * np.sqrt(al))
            tskew = beta * (h_int - hs[1:-1]) * s / (2.0 * dt * tau * al**1.5)
            sup = sup - tskew
            sub = sub + tskew
        n = h_int.size
        return BorderedTridiag(
            sub=sub,
            diag=diag,
            sup=sup,
            col=np.full(n, -1.0),
            row=np.full(n, tau),
            rhs_interior=np.zeros(n),
            rhs_border=0.0,
        )

    def picard(h_int: np.ndarray, lam: float) -> tuple[np.ndarray, float]:
        # frozen-slope sweep in the tau^2 alpha^{3/2}-scaled form; its fixed
        # point is the nonlinear solution
        h = full(h_int)
        s = (h[2:] - h[:-2]) / (2.0 * tau)
        al = 1.0 + s * s
        al32 = al**1.5
        diag = 2.0 + kappa * cos0 * tau**2 * al32
        f = -kappa * sin0 * x[1:-1] * tau**2 * al32
        if use_time:
            diag = diag + (beta * tau**2 / dt) * al
            f = f + (beta * tau**2 / dt) * hs[1:-1] * al
        f[0] += w_a
        f[-1] += w_b
        n = h_int.size
        system = BorderedTridiag(
            sub=np.full(n, -1.0),
            diag=diag,
            sup=np.full(n, -1.0),
            col=al32,
            row=np.ones(n),
            rhs_interior=f,
            rhs_border=float(np.sum(w_int)) + V / tau,
        )
        h_new, mu = solve_bordered_tridiag(system)
        return h_new, -mu / tau**2

    floor = _elliptic_residual_floor(initial.heights, tau, kappa, beta, dt)
    lam0 = initial.lam if math.isfinite(initial.lam) else 0.0
    h_int, lam, iters = damped_newton_bordered(
        np.asarray(initial.heights[1:-1], dtype=float),
        lam0,
        assemble,
        jacobian,
        tol=tol,
        max_iter=max_iter,
        floor=floor,
        picard=picard,
    )
    state = DropletState(a=a, b=b, heights=full(h_int), lam=lam, time=time)
    return state, iters

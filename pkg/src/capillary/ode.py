"""Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).

The quasi-static DAE reduces to a smooth, non-stiff scalar ODE once the
algebraic unknowns are closed by Newton at every stage, so an explicit
embedded pair with standard step control is sufficient.  A right-hand side
may raise :class:`~capillary.errors.NonConvergenceError` or
:class:`~capillary.errors.DesingularizationError` to reject the step; the
step is then retried at half size until ``h_min``.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import DesingularizationError, NonConvergenceError, NumericalBlowupError

__all__ = ["integrate_rk45"]

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_REJECTABLE = (NonConvergenceError, DesingularizationError)


def integrate_rk45(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    t1: float,
    y0: np.ndarray,
    rtol: float = 1e-10,
    atol: float = 1e-10,
    max_step: float = math.inf,
    first_step: float | None = None,
    callback: Callable[[float, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate y' = f(t, y) from t0 to t1 (t1 > t0), hitting t1 exactly.

    Returns the accepted-step times and states, including both endpoints.
    ``callback`` runs after every accepted step.
    """
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    t = float(t0)
    span = t1 - t0
    h_min = 1e-12 * max(span, 1.0)
    h = first_step if first_step is not None else min(span / 100.0, max_step)
    ts = [t]
    ys = [y.copy()]
    k1 = f(t, y)
    while t < t1:
        h = min(h, t1 - t, max_step)
        if h < h_min:
            raise NonConvergenceError("step size underflow", t=t, h=h)
        try:
            k = [np.atleast_1d(np.asarray(k1, dtype=float))]
            for i in range(1, 7):
                yi = y + h * sum(aij * kj for aij, kj in zip(_A[i], k))
                k.append(np.atleast_1d(np.asarray(f(t + _C[i] * h, yi), dtype=float)))
        except _REJECTABLE:
            h *= 0.5
            continue
        y5 = y + h * sum(b * kj for b, kj in zip(_B5, k))
        y4 = y + h * sum(b * kj for b, kj in zip(_B4, k))
        if not np.all(np.isfinite(y5)):
            raise NumericalBlowupError("non-finite state in RK45", t=t)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.max(np.abs(y5 - y4) / scale))
        if err <= 1.0:
            t += h
            y = y5
            k1 = k[6]  # FSAL
            ts.append(t)
            ys.append(y.copy())
            if callback is not None:
                callback(t, y)
            factor = _MAX_FACTOR if err == 0.0 else _SAFETY * err**-0.2
            h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err**-0.2)
    return np.array(ts), np.array(ys)

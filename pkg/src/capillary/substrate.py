"""Rough-substrate profiles w(x) with exact derivative evaluation.

Three concrete profiles are provided:

- :class:`FlatSubstrate`: w = 0 (inclination is handled by ``theta0`` in the
  governing equations, not here);
- :class:`GrooveSubstrate`: w(x) = A (sin kx + sin(kx/2) + cos 2kx);
- :class:`BezierSubstrate`: piecewise cubic Bezier graph, used for the Utah
  teapot cross-section via :func:`teapot_profile`.

Bezier segments must have x(l) strictly increasing so the inverse l(x)
exists; w' at an interior corner is double-valued and callers choose a side
(``side="left" | "right"``), the default being the average of the two.
Evaluating outside the declared domain raises :class:`~capillary.errors.DomainError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "SubstrateProfile",
    "FlatSubstrate",
    "GrooveSubstrate",
    "CubicBezierSegment",
    "BezierSubstrate",
    "groove_eval",
    "bezier_eval",
    "bezier_inverse",
    "teapot_profile",
    "TEAPOT_POINTS",
    "substrate_from_config",
]

_JOINT_TOL = 1e-12


class SubstrateProfile:
    """Evaluable pair (w, w') over a declared domain; immutable, reentrant."""

    #: inclusive evaluation domain; infinite for analytic profiles
    domain: tuple[float, float] = (-math.inf, math.inf)

    def w(self, x):
        raise NotImplementedError

    def w_prime(self, x, side: str | None = None):
        raise NotImplementedError

    def contains(self, x: float) -> bool:
        lo, hi = self.domain
        return lo <= x <= hi


class FlatSubstrate(SubstrateProfile):
    """Perfectly flat substrate, w = 0."""

    def w(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def w_prime(self, x, side=None):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class GrooveSubstrate(SubstrateProfile):
    """Groove-textured substrate w(x) = A (sin kx + sin(kx/2) + cos 2kx)."""

    A: float
    k: float

    def w(self, x):
        x = np.asarray(x, dtype=float)
        k = self.k
        return self.A * (np.sin(k * x) + np.sin(0.5 * k * x) + np.cos(2.0 * k * x))

    def w_prime(self, x, side=None):
        x = np.asarray(x, dtype=float)
        k = self.k
        return self.A * (
            k * np.cos(k * x) + 0.5 * k * np.cos(0.5 * k * x) - 2.0 * k * np.sin(2.0 * k * x)
        )


def groove_eval(A: float, k: float, x: float) -> tuple[float, float]:
    """Groove w and its exact derivative at a point."""
    s = GrooveSubstrate(A, k)
    return float(s.w(x)), float(s.w_prime(x))


@dataclass(frozen=True)
class CubicBezierSegment:
    """One cubic Bezier segment from four control points.

    x(l) must be strictly increasing on [0, 1]; this is validated at
    construction by minimizing the quadratic x'(l) exactly.
    """

    xs: tuple[float, float, float, float]
    ys: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.xs) != 4 or len(self.ys) != 4:
            raise ValueError("a cubic segment needs exactly 4 control points")
        if self._min_dx_dl() <= 0.0:
            raise DomainError(
                "segment x(l) is not strictly monotone increasing",
                xs=list(self.xs),
            )

    # Bernstein basis: B1=(1-l)^3, B2=3(1-l)^2 l, B3=3(1-l) l^2, B4=l^3.

    def point(self, ell):
        ell = np.asarray(ell, dtype=float)
        b = _bernstein(ell)
        return sum(bi * xi for bi, xi in zip(b, self.xs)), sum(
            bi * yi for bi, yi in zip(b, self.ys)
        )

    def dx_dl(self, ell):
        return _bezier_derivative(self.xs, ell)

    def dy_dl(self, ell):
        return _bezier_derivative(self.ys, ell)

    @property
    def x_range(self) -> tuple[float, float]:
        return self.xs[0], self.xs[3]

    def _min_dx_dl(self) -> float:
        # x'(l)/3 = d1 (1-l)^2 + 2 d2 (1-l) l + d3 l^2: quadratic in l,
        # minimum over [0,1] at the endpoints or the interior stationary point.
        d1 = self.xs[1] - self.xs[0]
        d2 = self.xs[2] - self.xs[1]
        d3 = self.xs[3] - self.xs[2]
        cand = [d1, d3]
        a = d1 - 2.0 * d2 + d3
        if abs(a) > 0.0:
            lstar = (d1 - d2) / a
            if 0.0 < lstar < 1.0:
                cand.append(
                    d1 * (1 - lstar) ** 2 + 2 * d2 * (1 - lstar) * lstar + d3 * lstar**2
                )
        return 3.0 * min(cand)

    def inverse(self, x, tol_scale: float = 1e-13):
        """Solve x(l) = x on [0, 1] by bisection-safeguarded Newton.

        Accepts scalars or arrays; |x(l) - x| is driven below
        ``tol_scale * segment width`` (Newton is locally quadratic on the
        monotone cubic, the bisection bracket guarantees termination).
        """
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        x0, x1 = self.x_range
        width = x1 - x0
        pad = 1e-12 * max(width, 1.0)
        if np.any(x_arr < x0 - pad) or np.any(x_arr > x1 + pad):
            raise DomainError(
                "x outside segment range",
                x_min=x0,
                x_max=x1,
                x_bad=float(x_arr[np.argmax((x_arr < x0 - pad) | (x_arr > x1 + pad))]),
            )
        xc = np.clip(x_arr, x0, x1)
        lo = np.zeros_like(xc)
        hi = np.ones_like(xc)
        ell = (xc - x0) / width
        tol = tol_scale * max(width, 1.0)
        for _ in range(100):
            fx = self._x_of(ell) - xc
            done = np.abs(fx) <= tol
            if np.all(done):
                break
            lo = np.where(fx < 0.0, ell, lo)
            hi = np.where(fx > 0.0, ell, hi)
            d = self.dx_dl(ell)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(d > 0.0, fx / np.where(d > 0.0, d, 1.0), 0.0)
            nxt = ell - step
            bad = (nxt <= lo) | (nxt >= hi) | (d <= 0.0)
            nxt = np.where(bad, 0.5 * (lo + hi), nxt)
            ell = np.where(done, ell, nxt)
        return ell if np.ndim(x) else float(ell[0])

    def _x_of(self, ell):
        b = _bernstein(ell)
        return sum(bi * xi for bi, xi in zip(b, self.xs))


def _bernstein(ell):
    one = 1.0 - ell
    return one**3, 3.0 * one**2 * ell, 3.0 * one * ell**2, ell**3


def _bezier_derivative(pts, ell):
    ell = np.asarray(ell, dtype=float)
    one = 1.0 - ell
    d1 = pts[1] - pts[0]
    d2 = pts[2] - pts[1]
    d3 = pts[3] - pts[2]
    return 3.0 * (d1 * one**2 + 2.0 * d2 * one * ell + d3 * ell**2)


def bezier_eval(segment: CubicBezierSegment, ell) -> tuple[float, float]:
    """Evaluate (x(l), y(l)); l outside [0, 1] is a domain error."""
    e = np.asarray(ell, dtype=float)
    if np.any(e < 0.0) or np.any(e > 1.0):
        raise DomainError("Bezier parameter outside [0, 1]", ell=float(np.max(e)))
    x, y = segment.point(e)
    if np.ndim(ell) == 0:
        return float(x), float(y)
    return x, y


def bezier_inverse(segment: CubicBezierSegment, x):
    """Inverse parametrization l(x) of the monotone segment."""
    return segment.inverse(x)


class BezierSubstrate(SubstrateProfile):
    """Piecewise-cubic-Bezier substrate graph over consecutive segments.

    ``inverse_method="newton"`` (default) inverts x(l) to solver tolerance;
    ``"sampled"`` reproduces the dense-sample linear interpolation for
    bit-comparison studies (``n_samples`` knots per segment).
    """

    def __init__(
        self,
        segments: Sequence[CubicBezierSegment],
        inverse_method: str = "newton",
        n_samples: int = 4096,
    ):
        if not segments:
            raise ValueError("need at least one segment")
        for s0, s1 in zip(segments, segments[1:]):
            if abs(s0.xs[3] - s1.xs[0]) > _JOINT_TOL:
                raise ValueError("segments must be x-contiguous")
        if inverse_method not in ("newton", "sampled"):
            raise ValueError(f"unknown inverse_method {inverse_method!r}")
        self.segments = tuple(segments)
        self.inverse_method = inverse_method
        self.domain = (segments[0].xs[0], segments[-1].xs[3])
        # interior joint abscissae, for corner side-handling
        self._breaks = np.array([s.xs[0] for s in segments[1:]], dtype=float)
        self._edges = np.array([s.xs[3] for s in segments[:-1]], dtype=float)
        if inverse_method == "sampled":
            ls = np.linspace(0.0, 1.0, n_samples)
            self._tables = [(np.asarray(s.point(ls)[0]), ls) for s in segments]

    def _segment_index(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self._edges, x, side="right")

    def _check_domain(self, x: np.ndarray) -> None:
        lo, hi = self.domain
        pad = 1e-12 * max(hi - lo, 1.0)
        if np.any(x < lo - pad) or np.any(x > hi + pad):
            raise DomainError(
                "x outside substrate domain", x_min=lo, x_max=hi,
                x_bad=float(x[np.argmax((x < lo - pad) | (x > hi + pad))]),
            )

    def _ell_of(self, x: np.ndarray, idx: np.ndarray) -> np.ndarray:
        ell = np.empty_like(x)
        for k, seg in enumerate(self.segments):
            m = idx == k
            if not np.any(m):
                continue
            xm = np.clip(x[m], seg.xs[0], seg.xs[3])
            if self.inverse_method == "newton":
                ell[m] = seg.inverse(xm)
            else:
                xs_tab, ls_tab = self._tables[k]
                ell[m] = np.interp(xm, xs_tab, ls_tab)
        return ell

    def w(self, x):
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_domain(x_arr)
        idx = self._segment_index(x_arr)
        ell = self._ell_of(x_arr, idx)
        out = np.empty_like(x_arr)
        for k, seg in enumerate(self.segments):
            m = idx == k
            if np.any(m):
                out[m] = seg.point(ell[m])[1]
        return out if np.ndim(x) else float(out[0])

    def w_prime(self, x, side: str | None = None):
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        self._check_domain(x_arr)
        idx = self._segment_index(x_arr)
        # at an interior joint the two one-sided slopes differ (corner);
        # resolve per the requested approach side, defaulting to the average
        if self._breaks.size:
            at_joint = np.abs(x_arr[:, None] - self._breaks[None, :]) <= _JOINT_TOL
            joint_of = np.argmax(at_joint, axis=1)
            on_joint = at_joint.any(axis=1)
        else:
            on_joint = np.zeros(x_arr.shape, dtype=bool)
            joint_of = np.zeros(x_arr.shape, dtype=int)
        ell = self._ell_of(x_arr, idx)
        out = np.empty_like(x_arr)
        for k, seg in enumerate(self.segments):
            m = idx == k
            if np.any(m):
                out[m] = seg.dy_dl(ell[m]) / seg.dx_dl(ell[m])
        if np.any(on_joint):
            for i in np.flatnonzero(on_joint):
                k = int(joint_of[i])  # joint between segments k and k+1
                left = float(self.segments[k].dy_dl(1.0) / self.segments[k].dx_dl(1.0))
                right = float(self.segments[k + 1].dy_dl(0.0) / self.segments[k + 1].dx_dl(0.0))
                if side == "left":
                    out[i] = left
                elif side == "right":
                    out[i] = right
                else:
                    out[i] = 0.5 * (left + right)
        return out if np.ndim(x) else float(out[0])


#: Control points of the teapot bottom and mouth (x_i, y_i), i = 1..10.
TEAPOT_POINTS: tuple[tuple[float, float], ...] = (
    (-2.0, 0.78),
    (-4.0 / 3.0, 0.0),
    (-2.0 / 3.0, 0.0),
    (0.0, 0.0),
    (2.0 / 3.0, 0.0),
    (4.0 / 3.0, 0.0),
    (2.0, 0.78),
    (2.655, 1.142),
    (2.846, 2.146),
    (4.0, 2.5),
)


def teapot_profile(inverse_method: str = "newton") -> BezierSubstrate:
    """Three-segment teapot cross-section over x in [-2, 4].

    Segments use points 1-4 and 4-7 (bottom) and 7-10 (mouth); the governing
    equations keep theta0 = 0 for this substrate (no frame rotation).
    """
    pts = TEAPOT_POINTS
    segs = []
    for i0 in (0, 3, 6):
        quad = pts[i0 : i0 + 4]
        segs.append(
            CubicBezierSegment(
                xs=tuple(p[0] for p in quad), ys=tuple(p[1] for p in quad)
            )
        )
    return BezierSubstrate(segs, inverse_method=inverse_method)


def substrate_from_config(cfg: dict) -> SubstrateProfile:
    """Build a substrate from ``{"substrate": "flat" | "groove" | "teapot", ...}``."""
    kind = cfg.get("substrate", "flat")
    if kind == "flat":
        return FlatSubstrate()
    if kind == "groove":
        return GrooveSubstrate(A=float(cfg["A"]), k=float(cfg["k"]))
    if kind == "teapot":
        return teapot_profile(inverse_method=cfg.get("inverse_method", "newton"))
    raise ValueError(f"unknown substrate kind {kind!r}")

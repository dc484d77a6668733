"""Uniform polynomial approximation on an interval.

Two constructions are offered: interpolation at Chebyshev nodes (cheap,
near-minimax) and the Remez exchange algorithm (equioscillating, minimax up
to grid resolution). Both return monomial coefficients in the original
variable together with the uniform error measured on a dense grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from numpy.polynomial import chebyshev as C

from inspectre.errors import ConfigurationError

ERROR_GRID_POINTS = 10_000


def entropy_term(x):
    """``x ln(1/x)`` with the continuous extension 0 at x = 0."""
    x = np.asarray(x, dtype=np.float64)
    safe = np.where(x > 0, x, 1.0)
    return np.where(x > 0, -x * np.log(safe), 0.0)


@dataclass(frozen=True)
class PolyApprox:
    """Degree-``degree`` approximation of ``f`` on ``[lo, hi]``.

    ``scaled`` holds monomial coefficients in ``y = (x - lo) / (hi - lo)``,
    the well-conditioned form; ``coeffs`` is the same polynomial expanded
    in powers of ``x``.
    """

    degree: int
    lo: float
    hi: float
    scaled: np.ndarray
    coeffs: np.ndarray
    error: float
    method: str

    def __call__(self, x):
        y = (np.asarray(x, dtype=np.float64) - self.lo) / (self.hi - self.lo)
        return np.polynomial.polynomial.polyval(y, self.scaled)


def _pad(c: np.ndarray, size: int) -> np.ndarray:
    return np.pad(c, (0, max(0, size - c.size)))[:size]


def _finish(f, degree, lo, hi, cheb_u, method) -> PolyApprox:
    # cheb_u: Chebyshev coefficients in u = 2y - 1 on [-1, 1].
    scaled = Chebyshev(cheb_u, domain=[0.0, 1.0]).convert(kind=Polynomial).coef
    coeffs = Chebyshev(cheb_u, domain=[lo, hi]).convert(kind=Polynomial).coef
    approx = PolyApprox(
        degree, lo, hi, _pad(scaled, degree + 1), _pad(coeffs, degree + 1), 0.0, method
    )
    xs = np.linspace(lo, hi, ERROR_GRID_POINTS)
    err = float(np.max(np.abs(f(xs) - approx(xs))))
    return PolyApprox(degree, lo, hi, approx.scaled, approx.coeffs, err, method)


def _interp_u(f, degree, lo, hi) -> np.ndarray:
    return C.chebinterpolate(lambda u: f(lo + (hi - lo) * (u + 1) / 2), degree)


def chebyshev_interpolant(f: Callable, degree: int, lo: float, hi: float) -> PolyApprox:
    """Interpolate ``f`` at ``degree + 1`` Chebyshev points of ``[lo, hi]``."""
    _check(degree, lo, hi)
    return _finish(f, degree, lo, hi, _interp_u(f, degree, lo, hi), "chebyshev")


def remez(
    f: Callable,
    degree: int,
    lo: float,
    hi: float,
    *,
    grid_points: int = 20_001,
    max_iter: int = 60,
    tol: float = 1e-9,
) -> PolyApprox:
    """Best uniform approximation by the Remez exchange algorithm.

    Extrema are searched on a fixed cosine-spaced grid, so the result is
    minimax over that grid. The first reference comes from the error
    extrema of the Chebyshev interpolant.
    """
    _check(degree, lo, hi)
    need = degree + 2
    # Cosine spacing puts points near both ends, where x ln x is hardest.
    u = -np.cos(np.linspace(0.0, np.pi, grid_points))
    fu = f(lo + (hi - lo) * (u + 1) / 2)
    cheb = _interp_u(f, degree, lo, hi)
    ref = _alternant(fu - C.chebval(u, cheb), need)
    if ref is None:
        ref = np.round(np.linspace(0, grid_points - 1, need)).astype(int)
    signs = (-1.0) ** np.arange(need)
    for _ in range(max_iter):
        A = np.column_stack([C.chebvander(u[ref], degree), signs])
        sol = np.linalg.solve(A, fu[ref])
        cheb, level = sol[:-1], abs(sol[-1])
        err = fu - C.chebval(u, cheb)
        peak = float(np.max(np.abs(err)))
        new = _alternant(err, need)
        if new is None or peak - level <= tol * peak:
            break
        ref = new
    return _finish(f, degree, lo, hi, cheb, "remez")


def _alternant(err: np.ndarray, need: int):
    """Pick ``need`` alternating-sign error extrema, keeping the largest."""
    sign = np.where(err >= 0, 1, -1)
    cut = np.flatnonzero(np.diff(sign)) + 1
    starts = np.concatenate(([0], cut))
    ends = np.concatenate((cut, [err.size]))
    pts = [s + int(np.argmax(np.abs(err[s:e]))) for s, e in zip(starts, ends)]
    if len(pts) < need:
        return None
    mag = lambda i: abs(err[pts[i]])  # noqa: E731
    while len(pts) > need:
        j = min(range(len(pts)), key=mag)
        if j in (0, len(pts) - 1) or len(pts) - need == 1:
            pts.pop(0 if mag(0) <= mag(len(pts) - 1) else len(pts) - 1)
        else:
            # Dropping an interior point leaves two same-sign neighbours.
            nb = j - 1 if mag(j - 1) <= mag(j + 1) else j + 1
            for i in sorted((j, nb), reverse=True):
                pts.pop(i)
    return np.asarray(pts)


def _check(degree, lo, hi):
    if degree < 0:
        raise ConfigurationError("degree must be non-negative")
    if not hi > lo:
        raise ConfigurationError("interval must have hi > lo")

# grids.py
"""Uniform radial and spectral grids with fixed-weight quadrature.

Everything downstream (wave solves, transforms, oscillatory kernels) runs on
these two grids, so their conventions are pinned here once:

* :class:`RadialGrid` -- nodes ``r_i = i*h`` with ``h = r_max / n_points``,
  i.e. ``n_points`` counts *intervals* and there are ``n_points + 1`` nodes
  including both endpoints.
* :class:`KGrid` -- ``n_points`` uniformly spaced *nodes* on
  ``[kappa_min, kappa_max]`` with ``kappa_min > 0`` (the transforms divide
  by kappa).

Quadrature weights are plain composite Simpson (with a 3/8 patch when the
interval count is odd), exposed as a fixed weight vector so hot loops can do
``w @ f`` instead of calling an integrator.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import GuardError

# Phase-resolution rule for sampling oscillations sin(kappa*r) on step h.
RESOLUTION_LIMIT = 0.15


def composite_weights(n_nodes: int, h: float) -> np.ndarray:
    """Fixed 4th-order quadrature weights for a uniform grid.

    Composite Simpson when ``n_nodes`` is odd (even interval count);
    otherwise Simpson up to the last three intervals and a 3/8 rule on the
    remainder.  Either way ``w @ f`` approximates the integral with O(h^4)
    error for smooth f.
    """
    if n_nodes < 4:
        raise ValueError("need at least 4 quadrature nodes")
    w = np.zeros(n_nodes)
    if n_nodes % 2 == 1:
        w[0] = w[-1] = 1.0
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w *= h / 3.0
    else:
        # Simpson on the first n_nodes - 4 intervals, 3/8 on the last three.
        w[: n_nodes - 3] = composite_weights(n_nodes - 3, h)
        w[n_nodes - 4 :] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return w


@lru_cache(maxsize=64)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights mapped to ``[a, b]``."""
    x, w = _leggauss(int(n))
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid on ``[0, r_max]``.

    Attributes
    ----------
    r_max : float
        Outer radius.
    n_points : int
        Number of intervals; the grid has ``n_points + 1`` nodes
        ``r_i = i * h`` with ``h = r_max / n_points``.
    """

    r_max: float
    n_points: int

    def __post_init__(self):
        if self.r_max <= 0:
            raise ValueError("r_max must be positive")
        if self.n_points < 8:
            raise ValueError("n_points too small")

    @property
    def h(self) -> float:
        return self.r_max / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_points + 1) * self.h

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights for ``integral f(r) dr`` over ``[0, r_max]``."""
        return composite_weights(self.n_points + 1, self.h)

    @cached_property
    def volume_weights(self) -> np.ndarray:
        """Weights for the radial volume integral ``integral f r^2 dr``."""
        return self.weights * self.nodes**2

    def integrate(self, values: np.ndarray) -> complex:
        return values @ self.weights

    def index_of(self, r: float) -> int:
        """Nearest node index for radius ``r`` (must lie on the grid)."""
        i = int(round(r / self.h))
        if i < 0 or i > self.n_points:
            raise ValueError(f"radius {r} outside grid")
        return i

    def check_resolution(self, kappa_max: float) -> None:
        """Phase-resolution guard ``h * kappa_max <= 0.15``."""
        if self.h * kappa_max > RESOLUTION_LIMIT + 1e-12:
            raise GuardError(
                "resolution",
                f"h*kappa_max = {self.h * kappa_max:.3g} exceeds {RESOLUTION_LIMIT}",
            )

    def check_free_tail(self, r_cut: float, kappa_min: float) -> None:
        """Require a potential-free matching tail: ``r_max >= r_cut + 4/kappa_min``."""
        need = r_cut + 4.0 / kappa_min
        if self.r_max < need - 1e-12:
            raise GuardError(
                "tail not free",
                f"r_max = {self.r_max:.4g} < r_cut + 4/kappa_min = {need:.4g}",
            )


@dataclass(frozen=True)
class KGrid:
    """Uniform spectral grid on ``[kappa_min, kappa_max]``.

    ``n_points`` counts nodes (linspace convention).  ``kappa_min`` must stay
    positive; the suite default is 0.05.
    """

    kappa_min: float
    kappa_max: float
    n_points: int

    def __post_init__(self):
        if self.kappa_min <= 0:
            raise ValueError("kappa_min must be positive")
        if self.kappa_max <= self.kappa_min:
            raise ValueError("kappa_max must exceed kappa_min")
        if self.n_points < 8:
            raise ValueError("n_points too small")

    @property
    def spacing(self) -> float:
        return (self.kappa_max - self.kappa_min) / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.kappa_min, self.kappa_max, self.n_points)

    @cached_property
    def weights(self) -> np.ndarray:
        return composite_weights(self.n_points, self.spacing)

    @cached_property
    def volume_weights(self) -> np.ndarray:
        """Weights for ``integral g kappa^2 dkappa``."""
        return self.weights * self.nodes**2

    def index_of(self, kappa: float) -> int:
        i = int(round((kappa - self.kappa_min) / self.spacing))
        if i < 0 or i >= self.n_points or abs(self.nodes[i] - kappa) > 1e-9 * max(1.0, kappa):
            raise ValueError(f"kappa = {kappa} is not a grid node")
        return i

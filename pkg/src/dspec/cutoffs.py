# cutoffs.py
"""Smooth dyadic cutoffs and their half-line oscillatory transform.

The base profile ``phi`` is an even C-infinity bump equal to 1 on
``|x| <= 5/4`` and vanishing for ``|x| >= 8/5``, built from the classical
``exp(-1/t)`` partition function.  Dyadic rescalings ``phi(x / 2^J)`` give
low-pass windows, consecutive differences give shells, and telescoping a
ladder of shells onto the smallest window reproduces the largest window
exactly.  That telescoping identity is what the singular-fit machinery
leans on, so it is kept exact by construction rather than asserted.

The transform ``chi_hat(xi) = integral_0^inf exp(i r xi) phi(r) dr`` shows up
in closed-form references for collinear kernels and in the mollified Dirac /
principal-value profiles produced by truncating a shell sum at scale
``R = 2^(J_max)``:

    K_R(lam) = integral_0^inf exp(-i r lam) phi(r/R) dr
             = R * conj(chi_hat(R lam))
             = pi * delta_profile(lam, R) - i * pv_profile(lam, R)

with ``delta_profile -> delta(lam)`` and ``pv_profile -> 1/lam`` as
``R lam -> inf``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import gauss_legendre

PLATEAU = 1.25
SUPPORT = 1.6
_RAMP = SUPPORT - PLATEAU  # 0.35


def _theta(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(over="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly monotone between."""
    t = np.asarray(t, dtype=float)
    num = _theta(t)
    den = num + _theta(1.0 - t)
    # den > 0 everywhere except limiting regions handled by the clip
    out = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return np.clip(out, 0.0, 1.0)


def bump(x) -> np.ndarray:
    """Even bump: 1 on |x| <= 5/4, 0 for |x| >= 8/5, smooth ramp between."""
    x = np.abs(np.asarray(x, dtype=float))
    return 1.0 - smooth_step((x - PLATEAU) / _RAMP)


@dataclass(frozen=True)
class DyadicCutoffFamily:
    """Dyadic low-pass windows, shells, and fit window ladders.

    All members are rescalings of one fixed bump; ``plateau`` and ``support``
    record its shape (1 on ``|x| <= plateau * 2^J``, 0 outside
    ``|x| >= support * 2^J``).
    """

    plateau: float = PLATEAU
    support: float = SUPPORT

    def low_pass(self, x, J: int) -> np.ndarray:
        return bump(np.asarray(x, dtype=float) / 2.0**J)

    def low_pass_scaled(self, x, scale: float) -> np.ndarray:
        """Low-pass window at an arbitrary (non-dyadic) scale."""
        return bump(np.asarray(x, dtype=float) / scale)

    def shell(self, x, J: int) -> np.ndarray:
        """Dyadic shell ``phi(x/2^J) - phi(x/2^(J-1))``."""
        x = np.asarray(x, dtype=float)
        return bump(x / 2.0**J) - bump(x / 2.0 ** (J - 1))

    def shell_support(self, J: int) -> tuple[float, float]:
        return self.plateau * 2.0 ** (J - 1), self.support * 2.0**J

    def window_members(self, J_min: int, J_max: int):
        """Window ladder: first the low-pass at ``J_min``, then shells up to
        ``J_max``.  Summing every member reproduces ``low_pass(., J_max)``
        exactly (telescoping)."""
        if J_max < J_min:
            raise ValueError("J_max must be >= J_min")
        members = [("low_pass", J_min, lambda x, J=J_min: self.low_pass(x, J))]
        for J in range(J_min + 1, J_max + 1):
            members.append(("shell", J, lambda x, J=J: self.shell(x, J)))
        return members

    # ---- oscillatory transform of the base bump --------------------------

    def chi_hat(self, xi) -> np.ndarray:
        """``integral_0^support exp(i r xi) bump(r) dr`` for real xi.

        Panelled Gauss-Legendre sized so each 32-node panel sees at most
        ~25 radians of phase; accurate to ~1e-13 over the xi ranges used.
        """
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        ximax = float(np.max(np.abs(xi))) if xi.size else 0.0
        n_panels = max(12, int(np.ceil(self.support * ximax / 25.0)))
        edges = np.linspace(0.0, self.support, n_panels + 1)
        nodes = []
        weights = []
        for a, b in zip(edges[:-1], edges[1:]):
            x, w = gauss_legendre(32, a, b)
            nodes.append(x)
            weights.append(w)
        r = np.concatenate(nodes)
        w = np.concatenate(weights) * bump(r)
        out = np.empty(xi.shape, dtype=complex)
        # chunk the outer product to bound memory at large xi counts
        step = max(1, int(4e6 / max(1, r.size)))
        for i in range(0, xi.size, step):
            block = xi[i : i + step]
            out[i : i + step] = np.exp(1j * np.outer(block, r)) @ w
        return out

    def delta_profile(self, lam, R: float) -> np.ndarray:
        """Mollified Dirac profile from the truncated shell resummation."""
        lam = np.asarray(lam, dtype=float)
        return (R / np.pi) * np.real(self.chi_hat(R * lam))

    def pv_profile(self, lam, R: float) -> np.ndarray:
        """Mollified principal-value kernel; tends to 1/lam for R*lam >> 1."""
        lam = np.asarray(lam, dtype=float)
        return R * np.imag(self.chi_hat(R * lam))

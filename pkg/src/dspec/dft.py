# dft.py
"""Distorted Fourier transforms on the s-wave continuum.

For radial profiles the transform pair diagonalizing ``H = -Delta + V`` is

    F f(kappa)  = (2 pi)^(-3/2) 4 pi  integral conj(phi0(r,kappa)) f(r) r^2 dr
    F^-1 g(r)   = (2 pi)^(-3/2) 4 pi  integral phi0(r,kappa) g(kappa) kappa^2 dkappa

with ``phi0 = e^{i delta0} u0 / (kappa r)`` the s-wave eigenfunction from an
:class:`~dspec.radialwave.EigenfunctionTable`.  At V = 0 this collapses to
the radial (sine-kernel) Fourier transform, implemented separately as
``flat_forward`` / ``flat_inverse`` so the collapse can be asserted to
machine precision.  The free/interacting pair also gives the wave operator
``W = F^-1 Fhat`` and its adjoint.

``decay_scan`` propagates radial data under ``exp(i t kappa^2)`` on a dense
spectral grid and measures sup and L6 norms of ``u(t)``.  Outside ``r_cut``
the s-wave is exactly ``[e^{2 i delta0} e^{i kappa r} - e^{-i kappa r}]
/ (2 i kappa r)``, so the far field is two half-line Fourier sums evaluated
for *all* radii at once with one padded FFT per phase branch; only radii
inside the potential need a direct (and much smaller) kernel matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GuardError, ToolkitWarning
from .grids import KGrid, RadialGrid, composite_weights
from .potential import eval_potential

DFT_CONST = 4.0 * np.pi * (2.0 * np.pi) ** (-1.5)
TAIL_REL = 1e-8


@dataclass(frozen=True)
class ProfileGrid:
    """Radial profile ``f(r)`` sampled on a :class:`RadialGrid`."""

    grid: RadialGrid
    values: np.ndarray


@dataclass(frozen=True)
class SpectralProfile:
    """Spectral profile ``g(kappa)`` sampled on a :class:`KGrid`."""

    kgrid: KGrid
    values: np.ndarray


def _values(f) -> np.ndarray:
    if isinstance(f, (ProfileGrid, SpectralProfile)):
        return np.asarray(f.values)
    return np.asarray(f)


def _phi0_block(table, sl: slice) -> np.ndarray:
    """Rows ``phi0(kappa, r)`` for kappa indices in ``sl`` (computed on the
    fly; the full matrix can be large for dense spectral tables)."""
    r = table.grid.nodes
    kk = table.kgrid.nodes[sl]
    phase = np.exp(1j * table.delta[0, sl])
    block = np.empty((kk.size, r.size), dtype=complex)
    block[:, 1:] = (phase[:, None] * table.swave[sl, 1:]) / (kk[:, None] * r[1:])
    block[:, 0] = phase * table._swave_origin_slope()[sl] / kk
    return block


def forward_dft(table, f, check_tail: bool = True) -> SpectralProfile:
    """Distorted transform of a radial profile on the table's grids."""
    vals = _values(f).astype(complex)
    grid = table.grid
    if vals.shape != grid.nodes.shape:
        raise ValueError("profile shape does not match the radial grid")
    if check_tail:
        _warn_physical_tail(grid, vals)
    wf = grid.volume_weights * vals
    n_k = table.kgrid.n_points
    out = np.empty(n_k, dtype=complex)
    step = max(1, int(6e6 / max(1, grid.n_points)))
    for i in range(0, n_k, step):
        sl = slice(i, min(i + step, n_k))
        out[sl] = np.conj(_phi0_block(table, sl)) @ wf
    return SpectralProfile(table.kgrid, DFT_CONST * out)


def inverse_dft(table, g, check_tail: bool = True) -> ProfileGrid:
    """Inverse distorted transform of a spectral profile."""
    vals = _values(g).astype(complex)
    kgrid = table.kgrid
    if vals.shape != kgrid.nodes.shape:
        raise ValueError("profile shape does not match the spectral grid")
    if check_tail:
        _warn_spectral_tail(vals)
    wg = kgrid.volume_weights * vals
    out = np.zeros(table.grid.n_points + 1, dtype=complex)
    n_k = kgrid.n_points
    step = max(1, int(6e6 / max(1, table.grid.n_points)))
    for i in range(0, n_k, step):
        sl = slice(i, min(i + step, n_k))
        out += _phi0_block(table, sl).T @ wg[sl]
    return ProfileGrid(table.grid, DFT_CONST * out)


def _warn_physical_tail(grid, vals):
    w = grid.volume_weights
    i0 = int(0.9 * grid.n_points)
    tail = float(np.real((np.abs(vals[i0:]) ** 2) @ w[i0:]))
    total = float(np.real((np.abs(vals) ** 2) @ w))
    if total > 0 and tail > TAIL_REL * total:
        warnings.warn(
            ToolkitWarning(f"tail mass: outer-10% share {tail / total:.2e} of the data"),
            stacklevel=3,
        )


def _warn_spectral_tail(vals):
    peak = float(np.max(np.abs(vals))) if vals.size else 0.0
    if peak > 0 and float(np.abs(vals[-1])) > TAIL_REL * peak:
        warnings.warn(
            ToolkitWarning(
                f"tail mass: spectral profile still {abs(vals[-1]) / peak:.2e} "
                "relative at kappa_max"
            ),
            stacklevel=3,
        )


# ---------------------------------------------------------------------------
# flat (V = 0) radial transforms and wave operators
# ---------------------------------------------------------------------------


def flat_forward(grid: RadialGrid, kgrid: KGrid, f) -> np.ndarray:
    """Radial Fourier transform ``sqrt(2/pi) (1/kappa) int sin(kappa r) f r dr``."""
    vals = _values(f).astype(complex)
    kernel = np.sin(np.outer(kgrid.nodes, grid.nodes))
    wf = grid.weights * grid.nodes * vals
    return np.sqrt(2.0 / np.pi) * (kernel @ wf) / kgrid.nodes


def flat_inverse(grid: RadialGrid, kgrid: KGrid, g) -> np.ndarray:
    """Inverse of :func:`flat_forward` (same kernel, swapped roles); the
    r = 0 value is filled by the kappa -> 0-safe limit ``sinc`` form."""
    vals = _values(g).astype(complex)
    wg = kgrid.weights * kgrid.nodes * vals
    out = np.empty(grid.n_points + 1, dtype=complex)
    kernel = np.sin(np.outer(grid.nodes[1:], kgrid.nodes))
    out[1:] = np.sqrt(2.0 / np.pi) * (kernel @ wg) / grid.nodes[1:]
    out[0] = np.sqrt(2.0 / np.pi) * np.sum(wg * kgrid.nodes)
    return out


def wave_operator_apply(table, f, direction: str = "forward"):
    """Wave operator ``W = F^-1 Fhat`` ("forward") or ``W* = Fhat^-1 F``
    ("adjoint") applied to a radial profile."""
    vals = _values(f)
    if direction == "forward":
        flat = flat_forward(table.grid, table.kgrid, vals)
        return inverse_dft(table, flat, check_tail=False)
    if direction == "adjoint":
        g = forward_dft(table, vals, check_tail=False)
        return ProfileGrid(table.grid, flat_inverse(table.grid, table.kgrid, g.values))
    raise ValueError("direction must be 'forward' or 'adjoint'")


def apply_H(p, grid: RadialGrid, f) -> np.ndarray:
    """Apply ``H = -f'' - (2/r) f' + V f`` by centered differences.

    At r = 0 the radial Laplacian of a smooth even profile is ``3 f''(0)``;
    the outer boundary uses one-sided second-order stencils.
    """
    vals = _values(f).astype(complex)
    h = grid.h
    r = grid.nodes
    v = eval_potential(p, r)
    d1 = np.empty_like(vals)
    d2 = np.empty_like(vals)
    d1[1:-1] = (vals[2:] - vals[:-2]) / (2 * h)
    d2[1:-1] = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / (h * h)
    # even extension across r = 0
    d2[0] = 2.0 * (vals[1] - vals[0]) / (h * h)
    d1[-1] = (3 * vals[-1] - 4 * vals[-2] + vals[-3]) / (2 * h)
    d2[-1] = (2 * vals[-1] - 5 * vals[-2] + 4 * vals[-3] - vals[-4]) / (h * h)
    out = np.empty_like(vals)
    out[1:] = -d2[1:] - (2.0 / r[1:]) * d1[1:] + v[1:] * vals[1:]
    out[0] = -3.0 * d2[0] + v[0] * vals[0]
    return out


def linear_propagate(table, g, t: float):
    """Spectral solution of the linear flow: multiply by ``exp(i t kappa^2)``
    and return both the propagated spectral profile and its physical field."""
    vals = _values(g).astype(complex)
    prop = np.exp(1j * t * table.kgrid.nodes**2) * vals
    spec = SpectralProfile(table.kgrid, prop)
    return spec, inverse_dft(table, prop, check_tail=False)


# ---------------------------------------------------------------------------
# dispersive decay scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayScanResult:
    times: np.ndarray
    sup_values: np.ndarray
    l6_values: np.ndarray
    sup_exponent: float
    l6_exponent: float
    fit_mask: np.ndarray


def decay_scan(table, f0, times) -> DecayScanResult:
    """Linear-flow decay of radial data: sup and L6 norms over time.

    ``times`` needs at least 5 increasing entries inside [2, 200].  Fitted
    exponents are least-squares slopes of log-norm against log-time over the
    later half of the window (in log t).
    """
    times = np.asarray(times, dtype=float)
    if times.size < 5:
        raise GuardError("window too short", "need at least 5 scan times")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    if times[0] < 2.0 - 1e-12 or times[-1] > 200.0 + 1e-12:
        raise ValueError("scan times must lie in [2, 200]")

    spec = forward_dft(table, _values(f0))
    kg = table.kgrid
    t_max = float(times[-1])

    # dense spectral grid: resolve the chirp phase 2 t kappa (<= 0.3 rad/node)
    dk = 0.3 / (2.0 * t_max * kg.kappa_max)
    n_dense = int(np.ceil((kg.kappa_max - kg.kappa_min) / dk)) + 1
    kd = np.linspace(kg.kappa_min, kg.kappa_max, n_dense)
    f_dense = CubicSpline(kg.nodes, spec.values.real)(kd) + 1j * CubicSpline(
        kg.nodes, spec.values.imag
    )(kd)
    delta_dense = CubicSpline(kg.nodes, table.delta_unwrapped[0])(kd)
    w_dense = composite_weights(n_dense, kd[1] - kd[0])

    # radius where the spectral envelope and therefore the group velocity cut off
    mags = np.abs(f_dense)
    keep = np.nonzero(mags > 1e-9 * mags.max())[0]
    k_hi = kd[keep[-1]] if keep.size else kg.kappa_max

    # FFT geometry for the far-field phase branches
    dk_d = kd[1] - kd[0]
    r_need = 2.0 * k_hi * t_max + 60.0
    n_fft = 1 << int(np.ceil(np.log2(max(2.0 * np.pi / (dk_d * 0.1), r_need / 0.1))))
    dr_fft = 2.0 * np.pi / (n_fft * dk_d)

    p_zero = table.potential.is_zero
    r_inner = 0.0 if p_zero else table.potential.r_cut + 2.0
    j_lo = max(1, int(np.ceil(r_inner / dr_fft)))

    interior = None
    if not p_zero:
        r_int = np.arange(0.0, r_inner + 0.1, 0.1)
        interior = (r_int, _interior_kernel(table, r_int, kd))

    base_plus = w_dense * f_dense * kd * np.exp(2j * delta_dense) / 2j
    base_minus = w_dense * f_dense * kd / 2j

    sup_vals = np.empty(times.size)
    l6_vals = np.empty(times.size)
    for n, t in enumerate(times):
        chirp = np.exp(1j * t * kd * kd)
        b_plus = base_plus * chirp
        b_minus = base_minus * chirp
        j_hi = min(n_fft - 1, int((2.0 * k_hi * t + 60.0) / dr_fft))
        I_plus = n_fft * np.fft.ifft(b_plus, n_fft)[j_lo : j_hi + 1]
        I_minus = np.conj(n_fft * np.fft.ifft(np.conj(b_minus), n_fft))[j_lo : j_hi + 1]
        r_far = (j_lo + np.arange(I_plus.size)) * dr_fft
        phase0 = np.exp(1j * kd[0] * r_far)
        u_far = DFT_CONST * (phase0 * I_plus - np.conj(phase0) * I_minus) / r_far

        if interior is None:
            u0 = DFT_CONST * np.sum(w_dense * f_dense * chirp * kd * kd)
            sup_t, l6_t = _norms_from_segments(
                [(np.array([0.0]), np.array([u0])), (r_far, u_far)]
            )
        else:
            r_int, kernel = interior
            u_int = kernel @ (w_dense * f_dense * chirp * kd * kd) * DFT_CONST
            sup_t, l6_t = _norms_from_segments([(r_int, u_int), (r_far, u_far)])
        sup_vals[n] = sup_t
        l6_vals[n] = l6_t

    log_t = np.log(times)
    cut = 0.5 * (log_t[0] + log_t[-1])
    mask = log_t >= cut - 1e-12
    sup_exp = _fit_slope(log_t[mask], np.log(sup_vals[mask]))
    l6_exp = _fit_slope(log_t[mask], np.log(l6_vals[mask]))
    return DecayScanResult(
        times=times, sup_values=sup_vals, l6_values=l6_vals,
        sup_exponent=sup_exp, l6_exponent=l6_exp, fit_mask=mask,
    )


def _interior_kernel(table, r_int, kd):
    """phi0(r, kappa) on interior radii x the dense kappa grid, splined in
    kappa from the table rows (phi0 is smooth in kappa at fixed small r)."""
    kk = table.kgrid.nodes
    phase = np.exp(1j * table.delta[0])
    rows = np.empty((r_int.size, kd.size), dtype=complex)
    slope = table._swave_origin_slope()
    for i, r in enumerate(r_int):
        if r == 0.0:
            row = phase * slope / kk
        else:
            idx = table.grid.index_of(round(r / table.grid.h) * table.grid.h)
            row = phase * table.swave[:, idx] / (kk * r)
        rows[i] = CubicSpline(kk, row.real)(kd) + 1j * CubicSpline(kk, row.imag)(kd)
    return rows


def _norms_from_segments(segments):
    sup = 0.0
    l6_acc = 0.0
    for r, u in segments:
        a = np.abs(u)
        if a.size == 0:
            continue
        i = int(np.argmax(a))
        peak = a[i]
        if 0 < i < a.size - 1:
            # parabolic refinement of the sampled maximum
            y0, y1, y2 = a[i - 1], a[i], a[i + 1]
            den = y0 - 2 * y1 + y2
            if den < 0:
                peak = y1 - 0.125 * (y2 - y0) ** 2 / den
        sup = max(sup, float(peak))
        if r.size >= 4:
            w = composite_weights(r.size, r[1] - r[0])
            l6_acc += float((a**6 * r**2) @ w)
    return sup, (4.0 * np.pi * l6_acc) ** (1.0 / 6.0)


def _fit_slope(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(sol[0])

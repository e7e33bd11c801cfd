# radialwave.py
"""Generalized eigenfunctions of ``-Delta + V`` by partial waves.

The continuum eigenfunction at wave vector ``k`` (``|k| = kappa``) is built
from regular radial solutions of

    -u'' + [ l(l+1)/r^2 + V(r) ] u = kappa^2 u,      u(0) = 0, u ~ r^(l+1),

integrated outward with Numerov and matched, beyond ``r_cut``, to the free
Riccati-Bessel pair to read off the phase shift ``delta_l``.  The normalized
wave obeys ``u ~ sin(kappa r - l pi/2 + delta_l)`` up to the complex factor
``exp(i delta_l)`` carried in ``norm_factor``, and the full eigenfunction is
the plane wave plus the scattered partial-wave series

    psi(x, k) = exp(i kappa r c)
              + sum_l (2l+1) i^l [ e^{i delta_l} u_l/(kappa r) - j_l(kappa r) ] P_l(c)

with ``c`` the cosine between ``x`` and ``k``.  Splitting off the plane wave
keeps the series error purely in the scattered part, which dies once
``l >> kappa * r_eff``; the same series sampled at every radius is therefore
accurate on the whole grid, not only where the series for the bare
exponential would converge.

The scattered amplitude enters downstream through two reductions:

* ``psi1(x, k) = -4 pi r e^{-i kappa r} (psi - e^{i k.x})``, the outgoing
  profile, bounded with all its angular derivatives;
* ``g0(c, kappa) = integral e^{-i kappa w.y} V psi dy``, its far-field limit
  along direction cosine ``c`` (no prefactor in this convention).

Zero potentials short-circuit to the exact free formulas so downstream
flat-limit identities collapse to machine precision instead of solver
tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import j0 as bessel_j0
from scipy.special import spherical_jn, spherical_yn

from .errors import GuardError
from .grids import KGrid, RadialGrid, composite_weights, gauss_legendre
from .potential import RadialPotential, eval_potential

# extra angular headroom on top of the geometric rule l_max >= kappa*r_eff
L_MARGIN = 8
# target phase separation (radians) between the two tail matching nodes
MATCH_PHASE = 0.9
SERIES_TOL = 1e-5
MATCH_TOL = 1e-6


def suggest_l_max(p: RadialPotential, kappa_max: float) -> int:
    """Truncation rule ``ceil(kappa_max * r_eff) + 8``."""
    return int(math.ceil(kappa_max * p.effective_range())) + L_MARGIN


def _legendre_matrix(c: np.ndarray, l_max: int) -> np.ndarray:
    """P_l(c) for l = 0..l_max by upward recurrence, shape (l_max+1, len(c))."""
    c = np.asarray(c, dtype=float)
    out = np.empty((l_max + 1, c.size))
    out[0] = 1.0
    if l_max >= 1:
        out[1] = c
    for ell in range(1, l_max):
        out[ell + 1] = ((2 * ell + 1) * c * out[ell] - ell * out[ell - 1]) / (ell + 1)
    return out


@dataclass(frozen=True)
class PartialWaveSolution:
    """One channel ``(l, kappa)``: normalized wave, phase shift, diagnostics.

    ``u_values`` carries the complex normalization
    ``u ~ sin(kappa r - l pi/2 + delta) * exp(i delta)``; ``norm_factor`` is
    the factor ``exp(i delta)`` multiplying the real normalized solution.
    ``match_residual`` is the relative mismatch against the free tail at a
    third node, a direct check that the tail really is free.
    """

    ell: int
    kappa: float
    grid: RadialGrid
    u_values: np.ndarray
    phase_shift: float
    norm_factor: complex
    match_residual: float


@dataclass(frozen=True)
class Psi1Sample:
    r: float
    c: float
    kappa: float
    value: complex


@dataclass(frozen=True)
class SymbolCoefficient:
    """Tabulated angular symbol (order 0 = far-field amplitude g0).

    ``values[i, j] = g(c_nodes[i], kappa_nodes[j])``; ``class_order`` records
    how many angular derivatives the table has been certified against.
    """

    order: int
    c_nodes: np.ndarray
    kappa_nodes: np.ndarray
    values: np.ndarray
    class_order: int = 1


# ---------------------------------------------------------------------------
# Numerov sweep (vectorized over (l, kappa) columns)
# ---------------------------------------------------------------------------


def _numerov_block(p, grid, ll, kk):
    """Integrate all (l, kappa) columns outward; return raw real waves.

    Returns ``U`` with shape (n_cols, n_nodes).  Columns are rescaled when
    they grow past 1e280; only the overall (positive) scale is affected,
    which the tail match normalizes away.
    """
    r = grid.nodes
    h = grid.h
    n = r.size
    v = eval_potential(p, r)
    v0 = float(eval_potential(p, np.array([0.0]))[0])
    ll = np.asarray(ll, dtype=float)
    kk = np.asarray(kk, dtype=float)
    ncols = ll.size

    cent = ll * (ll + 1.0)
    k2 = kk * kk
    U = np.zeros((ncols, n))
    c2 = (v0 - k2) / (4.0 * ll + 6.0)
    # series start r^(l+1)(1 + c2 r^2); underflow for very large l is benign
    with np.errstate(under="ignore"):
        U[:, 1] = r[1] ** (ll + 1.0) * (1.0 + c2 * r[1] ** 2)
        U[:, 2] = r[2] ** (ll + 1.0) * (1.0 + c2 * r[2] ** 2)

    h2_12 = h * h / 12.0
    inv_r2 = np.empty_like(r)
    inv_r2[0] = 0.0
    inv_r2[1:] = 1.0 / r[1:] ** 2

    def w_at(i):
        return 1.0 - h2_12 * (cent * inv_r2[i] + (v[i] - k2))

    w_prev = w_at(1)
    w_cur = w_at(2)
    for i in range(2, n - 1):
        w_next = w_at(i + 1)
        U[:, i + 1] = ((12.0 - 10.0 * w_cur) * U[:, i] - w_prev * U[:, i - 1]) / w_next
        w_prev, w_cur = w_cur, w_next
        if i % 256 == 0:
            peak = np.abs(U[:, i + 1])
            big = peak > 1e280
            if np.any(big):
                U[big, : i + 2] /= peak[big, None]
    return U


def _match_tail(grid, p, ll, kk, U):
    """Match raw waves to the free Riccati-Bessel pair beyond r_cut.

    Returns (delta, scale, sign, i3, residual): the normalized real wave is
    ``sign * U / scale`` and carries asymptote sin(kappa r - l pi/2 + delta).
    """
    r = grid.nodes
    h = grid.h
    n = r.size
    ll = np.asarray(ll)
    kk = np.asarray(kk, dtype=float)

    i_free = int(np.ceil(p.r_cut / h)) + 2
    # two matching nodes plus a third for the residual check, all in the free
    # region, separated by ~MATCH_PHASE radians of kappa*r.  Matching as close
    # to r_cut as possible keeps accumulated phase drift out of delta.
    s = np.maximum(1, np.round(MATCH_PHASE / (kk * h)).astype(int))
    s = np.minimum(s, (n - 1 - i_free) // 2)
    if np.any(s < 1):
        raise GuardError("tail not free", "no room for matching nodes beyond r_cut")
    i1 = np.full(ll.shape, i_free, dtype=int)
    i2 = i1 + s
    i3 = i2 + s

    cols = np.arange(ll.size)
    u1, u2, u3 = U[cols, i1], U[cols, i2], U[cols, i3]
    x1, x2, x3 = kk * r[i1], kk * r[i2], kk * r[i3]
    lli = ll.astype(int)

    def riccati(x):
        return x * spherical_jn(lli, x), -x * spherical_yn(lli, x)

    S1, C1 = riccati(x1)
    S2, C2 = riccati(x2)
    S3, C3 = riccati(x3)
    det = S1 * C2 - C1 * S2
    A = (u1 * C2 - C1 * u2) / det
    B = (S1 * u2 - u1 * S2) / det

    sign = np.where(A < 0, -1.0, 1.0)
    A, B = A * sign, B * sign
    amp = np.hypot(A, B)
    if np.any(amp == 0):
        raise GuardError("resolution", "degenerate tail match (vanishing amplitude)")
    delta = np.arctan2(B, A)
    resid = np.abs(A * S3 + B * C3 - sign * u3) / amp
    return delta, amp, sign, resid


# ---------------------------------------------------------------------------
# Eigenfunction table
# ---------------------------------------------------------------------------


class EigenfunctionTable:
    """Solved continuum data for one potential on one (r, kappa) grid pair.

    Stores phase shifts for every channel, the s-wave radial profile at
    every kappa node (enough for the radial transforms), and the full
    partial-wave stack at the declared *assembly* kappa nodes (enough to
    evaluate the eigenfunction, psi1 and g0 there).  Kappa lookups are
    strict: values must sit on grid nodes.
    """

    def __init__(self, potential, grid, kgrid, l_max, delta, delta_unwrapped,
                 match_residuals, swave, assembly_indices, full_waves, v0):
        self.potential = potential
        self.grid = grid
        self.kgrid = kgrid
        self.l_max = l_max
        self.delta = delta
        self.delta_unwrapped = delta_unwrapped
        self.match_residuals = match_residuals
        self.swave = swave
        self.assembly_indices = tuple(int(i) for i in assembly_indices)
        self.full_waves = full_waves
        self.v0 = v0
        self._phi0 = None

    # -- lookups ----------------------------------------------------------

    def kappa_index(self, kappa: float) -> int:
        return self.kgrid.index_of(kappa)

    def assembly_slot(self, kappa: float) -> int:
        ik = self.kappa_index(kappa)
        try:
            return self.assembly_indices.index(ik)
        except ValueError:
            raise ValueError(
                f"kappa = {kappa} is not an assembly node of this table"
            ) from None

    def phase_shift(self, ell: int, kappa: float) -> float:
        return float(self.delta[ell, self.kappa_index(kappa)])

    def wave(self, ell: int, kappa: float) -> PartialWaveSolution:
        """Materialize one stored channel (kappa must be an assembly node,
        or ell = 0)."""
        ik = self.kappa_index(kappa)
        if ell == 0:
            u_real = self.swave[ik]
        else:
            u_real = self.full_waves[ell, self.assembly_slot(kappa)]
        d = float(self.delta[ell, ik])
        nf = complex(np.exp(1j * d))
        return PartialWaveSolution(
            ell=ell, kappa=float(self.kgrid.nodes[ik]), grid=self.grid,
            u_values=nf * u_real, phase_shift=d, norm_factor=nf,
            match_residual=float(self.match_residuals[ell, ik]),
        )

    # -- derived matrices -------------------------------------------------

    def phi0_matrix(self) -> np.ndarray:
        """s-wave eigenfunction ``phi0(r, kappa) = e^{i delta0} u0/(kappa r)``
        as a (n_kappa, n_r) complex matrix, with the series limit at r = 0."""
        if self._phi0 is None:
            r = self.grid.nodes
            kk = self.kgrid.nodes
            mat = np.empty((kk.size, r.size), dtype=complex)
            phase = np.exp(1j * self.delta[0])
            mat[:, 1:] = (phase[:, None] * self.swave[:, 1:]) / (kk[:, None] * r[1:])
            a0 = self._swave_origin_slope()
            mat[:, 0] = phase * a0 / kk
            self._phi0 = mat
        return self._phi0

    def _swave_origin_slope(self) -> np.ndarray:
        r1 = self.grid.nodes[1]
        c2 = (self.v0 - self.kgrid.nodes**2) / 6.0
        return self.swave[:, 1] / r1 / (1.0 + c2 * r1 * r1)

    def scattered_radial_terms(self, kappa: float, r_indices, incoming=False):
        """T_l(r) = e^{+-i delta_l} u_l/(kappa r) - j_l(kappa r) at the given
        radial node indices, shape (n_r, l_max+1)."""
        ik = self.kappa_index(kappa)
        slot = self.assembly_slot(kappa)
        r_indices = np.asarray(r_indices, dtype=int)
        kap = float(self.kgrid.nodes[ik])
        r = self.grid.nodes[r_indices]
        ells = np.arange(self.l_max + 1)
        sgn = -1.0 if incoming else 1.0
        phase = np.exp(1j * sgn * self.delta[:, ik])

        u = self.full_waves[:, slot, :][:, r_indices]  # (L+1, n_r)
        T = np.empty((r_indices.size, self.l_max + 1), dtype=complex)
        pos = r_indices > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            rad = np.where(r[None, :] > 0, u / np.where(r, r, 1.0)[None, :] / kap, 0.0)
        jl = spherical_jn(ells[:, None], kap * r[None, :])
        T[pos, :] = (phase[:, None] * rad - jl)[:, pos].T
        if np.any(~pos):
            # r = 0: only the s-wave term survives, via the series slope
            col = np.zeros(self.l_max + 1, dtype=complex)
            a0 = self._swave_origin_slope()[ik]
            col[0] = phase[0] * a0 / kap - 1.0
            T[~pos, :] = col
        return T

    def series_tail_estimate(self, T: np.ndarray) -> float:
        """Size of the last three scattered terms (series truncation gauge)."""
        ells = np.arange(self.l_max + 1)
        w = (2 * ells + 1)[None, -3:]
        return float(np.max(np.sum(w * np.abs(T[:, -3:]), axis=1)))


def build_eigenfunction_table(
    p: RadialPotential,
    grid: RadialGrid,
    kgrid: KGrid,
    l_max: int | None = None,
    assembly_kappas=(),
    chunk: int = 2000,
    radial_only: bool = False,
) -> EigenfunctionTable:
    """Solve every channel (l <= l_max, kappa on the grid) and pack a table.

    ``assembly_kappas`` lists the kappa nodes at which the full partial-wave
    stack is stored (required by assemble/psi1/g0).  ``radial_only`` solves
    just the s-wave, enough for the scalar transforms; assembly-type calls
    on such a table fail the series guard by construction.  Chunking bounds
    the working set; the raw sweep for a chunk is freed once its tail data
    and any stored rows are extracted.
    """
    if radial_only:
        if assembly_kappas:
            raise ValueError("radial_only tables cannot store assembly nodes")
        l_max = 0
    else:
        rule = suggest_l_max(p, kgrid.kappa_max)
        if l_max is None:
            l_max = rule
        if l_max < rule:
            raise GuardError(
                "l_max rule",
                f"l_max = {l_max} below ceil(kappa_max*r_eff)+{L_MARGIN} = {rule}",
            )
    grid.check_resolution(kgrid.kappa_max)
    grid.check_free_tail(p.r_cut, kgrid.kappa_min)

    n_k = kgrid.n_points
    n_r = grid.n_points + 1
    kk_nodes = kgrid.nodes
    a_idx = sorted({kgrid.index_of(k) for k in assembly_kappas})
    v0 = float(eval_potential(p, np.array([0.0]))[0])

    delta = np.zeros((l_max + 1, n_k))
    resid = np.zeros((l_max + 1, n_k))
    swave = np.empty((n_k, n_r))
    full = np.zeros((l_max + 1, len(a_idx), n_r))

    if p.is_zero:
        x = np.outer(kk_nodes, grid.nodes)
        swave[:] = np.sin(x)
        for j, ik in enumerate(a_idx):
            xk = kk_nodes[ik] * grid.nodes
            for ell in range(l_max + 1):
                full[ell, j] = xk * spherical_jn(ell, xk)
    else:
        ll_all, kk_all = np.meshgrid(np.arange(l_max + 1), np.arange(n_k), indexing="ij")
        ll_flat = ll_all.ravel()
        ik_flat = kk_all.ravel()
        for start in range(0, ll_flat.size, chunk):
            sl = slice(start, start + chunk)
            ll = ll_flat[sl]
            iks = ik_flat[sl]
            kk = kk_nodes[iks]
            U = _numerov_block(p, grid, ll, kk)
            d, amp, sign, res = _match_tail(grid, p, ll, kk, U)
            U *= (sign / amp)[:, None]
            delta[ll, iks] = d
            resid[ll, iks] = res
            is_s = ll == 0
            if np.any(is_s):
                swave[iks[is_s]] = U[is_s]
            for j, ik in enumerate(a_idx):
                hit = iks == ik
                if np.any(hit):
                    full[ll[hit], j] = U[hit]
            del U
        if len(a_idx):
            full[0] = swave[a_idx]

    unwrapped = np.unwrap(delta, axis=1, period=np.pi) if n_k > 1 else delta.copy()
    return EigenfunctionTable(
        potential=p, grid=grid, kgrid=kgrid, l_max=l_max,
        delta=delta, delta_unwrapped=unwrapped, match_residuals=resid,
        swave=swave, assembly_indices=a_idx, full_waves=full, v0=v0,
    )


def solve_partial_wave(
    p: RadialPotential, grid: RadialGrid, ell: int, kappa: float
) -> PartialWaveSolution:
    """Solve one channel on the grid and normalize by tail matching."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    grid.check_resolution(kappa)
    grid.check_free_tail(p.r_cut, kappa)

    if p.is_zero:
        x = kappa * grid.nodes
        u = x * spherical_jn(ell, x)
        return PartialWaveSolution(
            ell=ell, kappa=kappa, grid=grid, u_values=u.astype(complex),
            phase_shift=0.0, norm_factor=1.0 + 0.0j, match_residual=0.0,
        )

    ll = np.array([ell])
    kk = np.array([kappa])
    U = _numerov_block(p, grid, ll, kk)
    d, amp, sign, res = _match_tail(grid, p, ll, kk, U)
    u_real = U[0] * (sign[0] / amp[0])
    nf = complex(np.exp(1j * d[0]))
    return PartialWaveSolution(
        ell=ell, kappa=kappa, grid=grid, u_values=nf * u_real,
        phase_shift=float(d[0]), norm_factor=nf, match_residual=float(res[0]),
    )


# ---------------------------------------------------------------------------
# Eigenfunction assembly and the scattered reductions
# ---------------------------------------------------------------------------


def _check_series(table, T):
    est = table.series_tail_estimate(T)
    if est > SERIES_TOL:
        raise GuardError(
            "series not converged",
            f"last angular terms ~ {est:.2e} exceed {SERIES_TOL}",
        )


def scattered_field(table, kappa, r_indices, c_nodes, incoming=False):
    """Scattered part of psi on the outer product (r_indices) x (c_nodes)."""
    T = table.scattered_radial_terms(kappa, r_indices, incoming=incoming)
    _check_series(table, T)
    ells = np.arange(table.l_max + 1)
    coeff = (2 * ells + 1) * (1j) ** ells
    P = _legendre_matrix(np.asarray(c_nodes, dtype=float), table.l_max)
    return (T * coeff[None, :]) @ P


def assemble_eigenfunction(table, r, c, kappa, incoming=False):
    """Evaluate psi(x, k) at paired samples (r_i, c_i) for one kappa node.

    ``incoming=True`` flips the normalization to incoming spherical waves
    (coefficient ``e^{-i delta_l}``); the two families are exchanged by
    time reversal: psi_out(x, -k) = conj(psi_in(x, k)).
    """
    r_arr, c_arr = np.broadcast_arrays(
        np.atleast_1d(np.asarray(r, dtype=float)),
        np.atleast_1d(np.asarray(c, dtype=float)),
    )
    shape = r_arr.shape
    r_flat = r_arr.ravel()
    c_flat = c_arr.ravel()
    idx = np.array([table.grid.index_of(x) for x in r_flat], dtype=int)

    T = table.scattered_radial_terms(kappa, idx, incoming=incoming)
    _check_series(table, T)
    ells = np.arange(table.l_max + 1)
    coeff = (2 * ells + 1) * (1j) ** ells
    P = _legendre_matrix(c_flat, table.l_max)  # (L+1, n)
    scattered = np.einsum("nl,ln->n", T * coeff[None, :], P)
    psi = np.exp(1j * kappa * table.grid.nodes[idx] * c_flat) + scattered
    out = psi.reshape(shape)
    return out if out.shape else complex(out)


def extract_psi1(table, r, c, kappa, incoming=False):
    """Outgoing profile ``psi1 = -4 pi r e^{-i kappa r} (psi - e^{i k.x})``.

    Computed straight from the scattered series, so there is no large-r
    cancellation between psi and the plane wave.  The incoming branch
    strips ``e^{+i kappa r}`` instead, matching its incoming spherical
    asymptote; with that convention ``conj(psi1(r, c))`` equals the
    incoming profile at ``-c``.
    """
    r_arr, c_arr = np.broadcast_arrays(
        np.atleast_1d(np.asarray(r, dtype=float)),
        np.atleast_1d(np.asarray(c, dtype=float)),
    )
    shape = r_arr.shape
    r_flat = r_arr.ravel()
    c_flat = c_arr.ravel()
    idx = np.array([table.grid.index_of(x) for x in r_flat], dtype=int)
    T = table.scattered_radial_terms(kappa, idx, incoming=incoming)
    _check_series(table, T)
    ells = np.arange(table.l_max + 1)
    coeff = (2 * ells + 1) * (1j) ** ells
    P = _legendre_matrix(c_flat, table.l_max)
    scattered = np.einsum("nl,ln->n", T * coeff[None, :], P)
    rr = table.grid.nodes[idx]
    sgn = 1.0 if incoming else -1.0
    vals = -4.0 * np.pi * rr * np.exp(sgn * 1j * kappa * rr) * scattered
    out = vals.reshape(shape)
    return out if out.shape else complex(out)


def psi1_field(table, kappa, r_indices, c_nodes, incoming=False, conjugate=False):
    """psi1 on (r_indices) x (c_nodes); optionally the complex conjugate."""
    S = scattered_field(table, kappa, r_indices, c_nodes, incoming=incoming)
    rr = table.grid.nodes[np.asarray(r_indices, dtype=int)]
    sgn = 1.0 if incoming else -1.0
    field = -4.0 * np.pi * rr[:, None] * np.exp(sgn * 1j * kappa * rr)[:, None] * S
    return np.conj(field) if conjugate else field


def extract_g0(table, c, kappa):
    """Far-field amplitude ``g0(c, kappa)`` by 2D quadrature of V psi.

    Reduces the 3D integral with the exact azimuthal average (Bessel J0
    factor) and integrates radially on the table grid restricted to the
    support of V; a stride-2 subgrid must agree to 1e-6 or the quadrature
    is declared stalled.
    """
    c_in = np.atleast_1d(np.asarray(c, dtype=float))
    kap = float(kappa)
    grid = table.grid
    i_cut = min(int(np.ceil(table.potential.r_cut / grid.h)), grid.n_points)
    if i_cut % 2 == 1:
        i_cut += 1
    r_idx = np.arange(i_cut + 1)
    rho = grid.nodes[r_idx]
    vrho = eval_potential(table.potential, rho)

    n_gl = max(64, table.l_max + 40)
    chat, what = gauss_legendre(n_gl, -1.0, 1.0)
    S = scattered_field(table, kap, r_idx, chat)
    psi = np.exp(1j * kap * np.outer(rho, chat)) + S  # (n_rho, n_gl)

    out = np.empty(c_in.shape, dtype=complex)
    for m, cc in enumerate(c_in):
        beta = np.sqrt(max(0.0, 1.0 - cc * cc)) * np.sqrt(1.0 - chat**2)
        kernel = np.exp(-1j * kap * np.outer(rho, chat * cc)) * bessel_j0(
            kap * rho[:, None] * beta[None, :]
        )
        ang = (kernel * psi) @ what  # (n_rho,)
        f = rho**2 * vrho * ang

        def quad(stride):
            sel = slice(0, i_cut + 1, stride)
            w = composite_weights(f[sel].size, grid.h * stride)
            return 2.0 * np.pi * (f[sel] @ w)

        val, coarse = quad(1), quad(2)
        if abs(val - coarse) > 1e-6 * max(1.0, abs(val)):
            raise GuardError(
                "quadrature stalled",
                f"radial refinement moved g0 by {abs(val - coarse):.2e}",
            )
        out[m] = val
    if np.ndim(c) == 0:
        return complex(out[0])
    return out


def g0_partial_wave(table, c, kappa):
    """Independent route: ``-(4 pi/kappa) sum (2l+1) e^{i delta} sin(delta) P_l``."""
    ik = table.kappa_index(kappa)
    d = table.delta[:, ik]
    coeff = (2 * np.arange(table.l_max + 1) + 1) * np.exp(1j * d) * np.sin(d)
    P = _legendre_matrix(np.atleast_1d(np.asarray(c, dtype=float)), table.l_max)
    vals = -(4.0 * np.pi / kappa) * (coeff @ P)
    return vals if np.ndim(c) else complex(vals[0])


def build_symbol_table(table, c_nodes, kappas, class_order=1) -> SymbolCoefficient:
    """Tabulate g0 over direction cosines x kappa assembly nodes."""
    c_nodes = np.asarray(c_nodes, dtype=float)
    kappas = np.asarray(kappas, dtype=float)
    vals = np.empty((c_nodes.size, kappas.size), dtype=complex)
    for j, kap in enumerate(kappas):
        vals[:, j] = extract_g0(table, c_nodes, float(kap))
    return SymbolCoefficient(
        order=0, c_nodes=c_nodes, kappa_nodes=kappas, values=vals,
        class_order=class_order,
    )


# ---------------------------------------------------------------------------
# Born iterates and the defining-equation residual
# ---------------------------------------------------------------------------


def born_eigenfunction(p, r, c, kappa, order=2, n_rho=4096, l_max=None):
    """Born iterate of the scattering integral equation (order 0, 1 or 2).

    Iterates ``psi -> e^{i k.x} - (1/4 pi) integral e^{i kappa |x-y|}/|x-y|
    V psi dy`` starting from the plane wave, reduced channel by channel: the
    kernel's partial-wave form turns each step into outgoing-Green radial
    integrals ``i kappa integral j_l(kappa r_<) h_l(kappa r_>) V R_l rho^2``.
    Radial quadrature is checked by step-halving ("quadrature stalled").
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    if l_max is None:
        l_max = suggest_l_max(p, kappa)
    r = float(r)
    c = float(c)
    kap = float(kappa)
    plane = np.exp(1j * kap * r * c)
    if order == 0 or p.is_zero:
        return plane

    def evaluate(n):
        rho = np.linspace(0.0, p.r_cut, n + 1)
        v = eval_potential(p, rho)
        total = 0.0 + 0.0j
        P = _legendre_matrix(np.array([c]), l_max)[:, 0]
        for ell in range(l_max + 1):
            jl = spherical_jn(ell, kap * rho)
            hl = jl.astype(complex)
            hl[1:] += 1j * spherical_yn(ell, kap * rho[1:])
            hl[0] = 0.0  # rho = 0 carries zero volume weight anyway
            R = jl.astype(complex)
            for _ in range(order):
                fed = R
                scat = -1j * kap * _green_apply(rho, v, jl, hl, fed)
                R = jl + scat
            if r <= p.r_cut:
                # linear interp sits within the trapezoid budget checked by
                # the caller's halving
                s_r = np.interp(r, rho, scat.real) + 1j * np.interp(r, rho, scat.imag)
            else:
                # outside the support only the outgoing branch survives
                f_j = v * fed * rho**2 * jl
                h_step = rho[1] - rho[0]
                I_all = np.sum(0.5 * (f_j[1:] + f_j[:-1]) * h_step)
                hr = spherical_jn(ell, kap * r) + 1j * spherical_yn(ell, kap * r)
                s_r = -1j * kap * hr * I_all
            total += (2 * ell + 1) * (1j) ** ell * s_r * P[ell]
        return plane + total

    fine = evaluate(n_rho)
    coarse = evaluate(n_rho // 2)
    if abs(fine - coarse) > 1e-4 * max(1.0, abs(fine)):
        raise GuardError(
            "quadrature stalled",
            f"Born radial quadrature moved by {abs(fine - coarse):.2e}",
        )
    return fine


def _green_apply(rho, v, jl, hl, R):
    """Outgoing-Green action integral j(r_<) h(r_>) V R rho^2 on the rho grid
    (cumulative trapezoid; accuracy guarded by the caller's step halving)."""
    f_j = v * R * rho**2 * jl
    f_h = v * R * rho**2 * hl
    h = rho[1] - rho[0]
    cum_j = np.concatenate(([0.0], np.cumsum(0.5 * (f_j[1:] + f_j[:-1]) * h)))
    total_h = np.concatenate(([0.0], np.cumsum(0.5 * (f_h[1:] + f_h[:-1]) * h)))
    cum_h_tail = total_h[-1] - total_h
    return hl * cum_j + jl * cum_h_tail


def lippmann_schwinger_residual(table, samples):
    """Residual of the defining integral equation at sample points.

    Each sample is ``(r, c, kappa)`` with kappa an assembly node and r a
    grid radius.  The potential integral is reduced exactly over azimuth
    (Legendre addition theorem) and the angular kernel integral is taken in
    the distance variable, where the integrand is smooth; what remains is a
    radial quadrature on the table grid.  Returns (max_residual, residuals).
    """
    grid = table.grid
    res = np.empty(len(samples))
    i_cut = min(int(np.ceil(table.potential.r_cut / grid.h)), grid.n_points)
    if i_cut % 2 == 1:
        i_cut += 1
    rho_idx = np.arange(1, i_cut + 1)  # rho = 0 has zero volume weight
    rho = grid.nodes[rho_idx]
    v = eval_potential(table.potential, rho)
    w_rho = composite_weights(i_cut + 1, grid.h)[1:]
    ells = np.arange(table.l_max + 1)
    coeff = (2 * ells + 1) * (1j) ** ells

    for n, (r, c, kappa) in enumerate(samples):
        kap = float(kappa)
        ik = table.kappa_index(kap)
        T = table.scattered_radial_terms(kap, rho_idx)
        # radial coefficients of psi: e^{i delta} u/(kappa rho) = T + j_l
        jl = spherical_jn(ells[:, None], kap * rho[None, :])
        rad = (T.T + jl)  # (L+1, n_rho)

        r = float(r)
        n_d = 24 + int(np.ceil(kap * (r + table.potential.r_cut) / 1.5))
        lo = np.abs(r - rho)
        hi = r + rho
        x_gl, w_gl = gauss_legendre(n_d, 0.0, 1.0)
        D = lo[:, None] + (hi - lo)[:, None] * x_gl[None, :]
        Wd = (hi - lo)[:, None] * w_gl[None, :]
        s_of_d = (r * r + rho[:, None] ** 2 - D * D) / (2.0 * r * rho[:, None])
        s_of_d = np.clip(s_of_d, -1.0, 1.0)
        P_d = _legendre_matrix(s_of_d.ravel(), table.l_max).reshape(
            table.l_max + 1, *s_of_d.shape
        )
        kern = np.exp(1j * kap * D) * Wd
        # angular kernel integral per channel and rho
        ang = np.einsum("rd,lrd->lr", kern, P_d) / (r * rho[None, :])
        P_c = _legendre_matrix(np.array([c]), table.l_max)[:, 0]
        mix = coeff * P_c
        integrand = np.einsum("l,lr,lr->r", mix, rad, ang)
        # 2 pi from the exact azimuthal integral (addition theorem)
        I = 2.0 * np.pi * ((rho**2 * v * integrand) @ w_rho)

        psi = assemble_eigenfunction(table, r, c, kap)
        lhs = psi - np.exp(1j * kap * r * c) + (1.0 / (4.0 * np.pi)) * I
        res[n] = abs(lhs) / max(1.0, abs(psi))
    return float(np.max(res)), res


def psi1_bound_report(table, kappa, n_c=257):
    """Desk-scale boundedness report for psi1 at one assembly node."""
    c = np.linspace(-1.0, 1.0, n_c)
    r_idx = np.arange(0, table.grid.n_points + 1, max(1, table.grid.n_points // 512))
    F = psi1_field(table, kappa, r_idx, c)
    dc = c[1] - c[0]
    d_dc = np.gradient(F, dc, axis=1)
    kbar = np.hypot(1.0, kappa)
    return {
        "sup_abs": float(np.max(np.abs(F))),
        "sup_dc_over_k": float(np.max(np.abs(d_dc)) / kbar),
    }

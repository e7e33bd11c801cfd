# bilinear.py
"""Phase algebra, Littlewood-Paley projections, annulus-restricted bilinear
operators, and empirical operator-norm scaling.

The quadratic interaction phases

    Phi  = |l|^2 + 2 k.l + |m|^2          (output-frequency form)
    Psi  = -|k|^2 + |l|^2 + 2 l.m + 2|m|^2

admit exact algebraic identities against the good-vectorfield derivative
``XPhi = 2 k.l/|l| + 2|l| + 2|m|`` and the auxiliary quadratics c, d; these
are checked to machine precision on random samples, and give the
near-diagonal lower bound |Phi| >= |l|^2/4 on the sampled region where
both ||l|-|m|| and |XPhi| are small compared to |l|.

The bilinear operators act on flat radial spectral data in normal form,

    B_j(g,h)^(k) = (2 pi)^(-3/2) int g^(l) h^(k-l) b(k,l,k-l)
                                       chi(2^j (|l|-|k-l|)) dl,

so that b == 1, chi == 1 reduces exactly to the spectral side of a physical
product.  For radial inputs the 3D convolution collapses to

    (2 pi)^(-3/2) (2 pi / k) int lam g(lam)
            int_{|k-lam|}^{k+lam} nu h(nu) b chi(2^j(lam-nu)) dnu dlam,

which is what the quadrature evaluates.  Input norms for scaling ratios are
taken on the spectral side (L2 with the 4 pi kappa^2 measure, sup for the
infinity norm); the annulus gain is then proportional to its volume:
ratio ~ 2^{-j} 2^{2L}.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .cutoffs import DyadicCutoffFamily, bump
from .dft import ProfileGrid, flat_inverse
from .errors import GuardError, ToolkitWarning
from .grids import KGrid, RadialGrid, composite_weights, gauss_legendre

__all__ = [
    "REGULARITY_CONSTANT", "PhasePoint", "PhaseAlgebra", "AnnulusOperatorSpec",
    "OperatorNormEstimate", "phase_algebra", "phase_identity_residuals",
    "sample_near_diagonal", "lp_project", "apply_annulus_operator",
    "estimate_operator_scaling", "apply_regular_symbol_operator",
    "spectral_norm",
]

# regularity-loss bookkeeping constant; recorded for symbol metadata only
REGULARITY_CONSTANT = 65


@dataclass(frozen=True)
class PhasePoint:
    k: np.ndarray
    l: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        for name in ("k", "l", "m"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,):
                raise ValueError(f"{name} must be a 3-vector")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class PhaseAlgebra:
    phi: float
    phi0: float
    psi: float
    x_phi: float
    xplus_phi: float
    c: float
    d: float


def phase_algebra(pt: PhasePoint) -> PhaseAlgebra:
    """All phase quantities at one frequency triple.

    Directions degenerate when l = 0: the good vectorfield divides by |l|.
    """
    k, l, m = pt.k, pt.l, pt.m
    nk, nl, nm = np.linalg.norm(k), np.linalg.norm(l), np.linalg.norm(m)
    if nl == 0.0:
        raise GuardError("degenerate direction", "XPhi needs |l| > 0")
    kl = float(k @ l)
    phi = nl**2 + 2.0 * kl + nm**2
    phi0 = -(nk**2) + nl**2 + nm**2
    psi = -(nk**2) + nl**2 + 2.0 * float(l @ m) + 2.0 * nm**2
    x_phi = 2.0 * kl / nl + 2.0 * nl + 2.0 * nm
    radial = np.sqrt(nl**2 + nm**2)
    xplus_phi = (2.0 * nl**2 + 2.0 * kl + 2.0 * nm**2) / radial if radial > 0 else 0.0
    c = nl**2 + 2.0 * nm * nl - nm**2
    d = -(nl - nk) * (nl + nk) + 2.0 * nm**2
    return PhaseAlgebra(phi=float(phi), phi0=float(phi0), psi=float(psi),
                        x_phi=float(x_phi), xplus_phi=float(xplus_phi),
                        c=float(c), d=float(d))


def phase_identity_residuals(k, l, m):
    """Residuals of the four exact identities, vectorized over (n, 3) input.

    1. |l| XPhi - Phi = c
    2. Psi - m.(2l + 4m) + d = 0
    3. sqrt(|l|^2+|m|^2) X+Phi = Phi + |l|^2 + |m|^2
    4. (3l - k).grad_l Phi0flat = 2(|l|^2+|k|^2) + 5 Phi0flat, where the
       flat phase substitutes m = k - l.
    """
    k = np.atleast_2d(np.asarray(k, dtype=float))
    l = np.atleast_2d(np.asarray(l, dtype=float))
    m = np.atleast_2d(np.asarray(m, dtype=float))
    nk = np.linalg.norm(k, axis=1)
    nl = np.linalg.norm(l, axis=1)
    nm = np.linalg.norm(m, axis=1)
    kl = np.einsum("ij,ij->i", k, l)
    lm = np.einsum("ij,ij->i", l, m)

    phi = nl**2 + 2 * kl + nm**2
    psi = -(nk**2) + nl**2 + 2 * lm + 2 * nm**2
    x_phi = 2 * kl / nl + 2 * nl + 2 * nm
    c = nl**2 + 2 * nm * nl - nm**2
    d = -(nl - nk) * (nl + nk) + 2 * nm**2

    r1 = nl * x_phi - phi - c
    r2 = psi - np.einsum("ij,ij->i", m, 2 * l + 4 * m) + d
    rad = np.sqrt(nl**2 + nm**2)
    xplus = (2 * nl**2 + 2 * kl + 2 * nm**2) / rad
    r3 = rad * xplus - (phi + nl**2 + nm**2)
    # flat phase: m = k - l
    mk = k - l
    phi0f = -(nk**2) + nl**2 + np.einsum("ij,ij->i", mk, mk)
    grad = 4 * l - 2 * k
    r4 = np.einsum("ij,ij->i", 3 * l - k, grad) - (2 * (nl**2 + nk**2) + 5 * phi0f)
    return {"phi_vectorfield": r1, "psi_split": r2, "radial_direction": r3,
            "flat_scaling": r4}


def sample_near_diagonal(rng, n, l_scale=(0.5, 2.0)):
    """Random triples on the near-diagonal region: ||l|-|m|| < |l|/8 and
    |XPhi| < |l|/8.

    |XPhi| small pins k's component along l, so k-parallel is constructed
    from a uniformly drawn target XPhi and only the transverse part of k is
    free.  Returns (k, l, m) arrays of shape (n, 3).
    """
    def unit(v):
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    l_hat = unit(rng.standard_normal((n, 3)))
    m_hat = unit(rng.standard_normal((n, 3)))
    nl = rng.uniform(l_scale[0], l_scale[1], n)
    nm = nl * (1.0 + rng.uniform(-1 / 8, 1 / 8, n) * 0.999)
    l = l_hat * nl[:, None]
    m = m_hat * nm[:, None]
    target = nl * rng.uniform(-1 / 8, 1 / 8, n) * 0.999
    k_par = 0.5 * target - nl - nm  # solves XPhi = target
    k_perp = rng.standard_normal((n, 3))
    k_perp -= np.einsum("ij,ij->i", k_perp, l_hat)[:, None] * l_hat
    k = l_hat * k_par[:, None] + k_perp * rng.uniform(0, 2, n)[:, None]
    return k, l, m


# ---------------------------------------------------------------------------
# Littlewood-Paley and bilinear operators on flat radial spectral data
# ---------------------------------------------------------------------------


def lp_project(kgrid: KGrid, values, K: int, family=None) -> np.ndarray:
    """Dyadic shell projection: multiply by phi(|.|/2^K) - phi(|.|/2^(K-1))."""
    fam = family or DyadicCutoffFamily()
    return np.asarray(values) * fam.shell(kgrid.nodes, K)


@dataclass(frozen=True)
class AnnulusOperatorSpec:
    """Annulus-restricted bilinear operator: thickness 2^-j around the
    equal-radius diagonal |l| = |k-l|, first input in dyadic shell L.

    ``symbol`` is a radial-arguments handle b(k, lam, nu) or None for the
    constant 1; ``symbol_meta`` carries declared support/regularity data so
    hypothesis checks can probe it.  ``chi_shift`` displaces the annulus
    (used by the empty-intersection tests).
    """

    j: int
    shell_l: int
    symbol: object = None
    symbol_meta: dict = field(default_factory=dict)
    chi_shift: float = 0.0
    family: DyadicCutoffFamily = field(default_factory=DyadicCutoffFamily)

    def __post_init__(self):
        # standing assumption: the shell sits far above the annulus width
        if self.shell_l <= -self.j:
            raise ValueError("annulus spec needs L >> -j")

    def chi(self, lam_minus_nu):
        return bump((np.asarray(lam_minus_nu) - self.chi_shift) * 2.0**self.j)


@dataclass(frozen=True)
class OperatorNormEstimate:
    j_values: np.ndarray
    ratios: np.ndarray
    fitted_slope: float
    residual: float
    details: dict = field(default_factory=dict)


def spectral_norm(kgrid: KGrid, values, p) -> float:
    """L^p norm of a radial spectral profile in the 4 pi kappa^2 measure
    (p = inf gives the sup)."""
    v = np.abs(np.asarray(values))
    if p in ("inf", np.inf):
        return float(np.max(v))
    p = float(p)
    return float((4.0 * np.pi * np.sum(kgrid.weights * kgrid.nodes**2 * v**p)) ** (1.0 / p))


def _radial_bilinear(kgrid, g, h, b, chi_fn, out_idx, n_lam, n_gl,
                     lam_range=None, chi_band=None):
    """Radial reduction of the normal-form bilinear integral.

    Evaluates (2pi)^(-3/2) (2pi/k) int lam g int nu h b chi dnu dlam at the
    given output nodes.  ``chi_fn(lam - nu)`` may be None (regular symbols);
    ``b(k, lam, nu)`` may be None for the constant 1.  When ``chi_band =
    (shift, half_width)`` is given the nu interval is clipped to the support
    of chi around ``lam - shift`` so the Gauss nodes resolve the annulus
    rather than the whole convolution range.
    """
    kk = kgrid.nodes
    gv = np.asarray(g, dtype=complex)
    hv = np.asarray(h, dtype=complex)
    g_re = CubicSpline(kk, gv.real)
    g_im = CubicSpline(kk, gv.imag)
    h_re = CubicSpline(kk, hv.real)
    h_im = CubicSpline(kk, hv.imag)

    sup = np.abs(gv) > 1e-300
    if lam_range is None:
        if not np.any(sup):
            return np.zeros(out_idx.size, dtype=complex)
        lam_lo = max(kgrid.kappa_min, kk[sup][0] - 2 * kgrid.spacing)
        lam_hi = min(kgrid.kappa_max, kk[sup][-1] + 2 * kgrid.spacing)
    else:
        lam_lo, lam_hi = lam_range
    if n_lam % 2 == 0:
        n_lam += 1
    lam = np.linspace(lam_lo, lam_hi, n_lam)
    w_lam = composite_weights(n_lam, lam[1] - lam[0])
    g_lam = g_re(lam) + 1j * g_im(lam)
    x_gl, w_gl = gauss_legendre(n_gl, -1.0, 1.0)

    out = np.empty(out_idx.size, dtype=complex)
    for n, ik in enumerate(out_idx):
        k = kk[ik]
        lo = np.abs(k - lam)
        hi = np.minimum(k + lam, kgrid.kappa_max)
        lo = np.maximum(lo, kgrid.kappa_min)
        if chi_band is not None:
            shift, bw = chi_band
            lo = np.maximum(lo, lam - shift - bw)
            hi = np.minimum(hi, lam - shift + bw)
        width = 0.5 * (hi - lo)
        good = width > 0
        mid = 0.5 * (hi + lo)
        nu = mid[:, None] + width[:, None] * x_gl[None, :]
        h_nu = h_re(nu) + 1j * h_im(nu)
        fac = nu * h_nu
        if b is not None:
            fac = fac * b(k, lam[:, None], nu)
        if chi_fn is not None:
            fac = fac * chi_fn(lam[:, None] - nu)
        inner = width * (fac @ w_gl)
        inner[~good] = 0.0
        total = np.sum(w_lam * lam * g_lam * inner)
        out[n] = (2.0 * np.pi) ** (-1.5) * (2.0 * np.pi / k) * total
    return out


def apply_annulus_operator(spec: AnnulusOperatorSpec, kgrid: KGrid, g, h,
                           grid: RadialGrid, refine: int = 1):
    """Annulus-restricted bilinear operator on flat radial spectral data.

    Returns (physical ProfileGrid via the flat inverse transform, spectral
    values on the output subgrid, output KGrid).  ``refine`` multiplies the
    internal quadrature density (the refinement oracle uses 2).
    """
    if kgrid.spacing > 2.0 ** (-spec.j) / 8.0 + 1e-15:
        raise GuardError(
            "annulus under-resolved",
            f"kappa spacing {kgrid.spacing:.2e} exceeds 2^-j/8 = "
            f"{2.0 ** (-spec.j) / 8.0:.2e}",
        )
    fam = spec.family
    shell_mask = fam.shell(kgrid.nodes, spec.shell_l) > 1e-12
    gv = np.asarray(g, dtype=complex)
    stray = np.abs(gv)[~shell_mask]
    if stray.size and np.max(stray) > 1e-8 * max(np.max(np.abs(gv)), 1e-300):
        raise ValueError("g must be supported in the declared shell L")

    lam_sup = kgrid.nodes[np.abs(gv) > 1e-300]
    width = 1.6 * 2.0**spec.shell_l
    # lambda resolution must follow the annulus width, nu follows its band
    n_lam = refine * max(257, int(4 * width * 2.0**spec.j) + 1)
    n_gl = refine * 24

    stride = max(1, int(np.floor(0.01 * 2.0**spec.shell_l / kgrid.spacing)))
    out_idx = np.arange(0, kgrid.n_points, stride)
    spectral = _radial_bilinear(
        kgrid, gv, np.asarray(h, dtype=complex),
        spec.symbol, spec.chi, out_idx, n_lam, n_gl,
        chi_band=(spec.chi_shift, fam.support * 2.0 ** (-spec.j)),
    )
    out_kgrid = KGrid(kgrid.nodes[out_idx[0]], kgrid.nodes[out_idx[-1]],
                      out_idx.size)
    phys = flat_inverse(grid, out_kgrid, spectral)
    return ProfileGrid(grid, phys), spectral, out_kgrid


def estimate_operator_scaling(specs, kgrid: KGrid, g, h, grid: RadialGrid,
                              norms=(2, "inf")) -> OperatorNormEstimate:
    """Measured ratios ||B_j(g,h)||_2 / (||g||_p ||h||_q) over a j-family,
    with the least-squares slope of log2 ratio against j."""
    specs = list(specs)
    if len(specs) < 4:
        raise ValueError("need at least 4 annulus thickness values")
    Ls = {s.shell_l for s in specs}
    if len(Ls) != 1:
        raise ValueError("scaling family must share the shell L")
    denom = spectral_norm(kgrid, g, norms[0]) * spectral_norm(kgrid, h, norms[1])
    js = np.array([s.j for s in specs], dtype=float)
    ratios = np.empty(js.size)
    for i, s in enumerate(specs):
        _, spectral, okg = apply_annulus_operator(s, kgrid, g, h, grid)
        ratios[i] = spectral_norm(okg, spectral, 2) / denom
    order = np.argsort(js)
    js, ratios = js[order], ratios[order]
    diffs = np.diff(np.log2(ratios))
    if np.any(diffs > 0.15):
        warnings.warn(
            f"nonmonotone: annulus ratios rise along j (max step {np.max(diffs):.2f})",
            ToolkitWarning, stacklevel=2,
        )
    A = np.vstack([js, np.ones_like(js)]).T
    sol, res, *_ = np.linalg.lstsq(A, np.log2(ratios), rcond=None)
    resid = float(np.sqrt(res[0] / js.size)) if res.size else 0.0
    return OperatorNormEstimate(
        j_values=js.astype(int), ratios=ratios, fitted_slope=float(sol[0]),
        residual=resid, details={"intercept": float(sol[1]), "norms": norms},
    )


def apply_regular_symbol_operator(b, shells, kgrid: KGrid, g, h,
                                  grid: RadialGrid, family=None, refine: int = 1):
    """Paraproduct-type operator with output shell K, inputs in shells L, M
    and no annulus factor: P_K applied to the normal-form pairing of P_L g
    and P_M h.

    Returns (physical ProfileGrid, spectral values on the output subgrid,
    output KGrid).
    """
    K, L, M = shells
    fam = family or DyadicCutoffFamily()
    gp = lp_project(kgrid, g, L, fam)
    hp = lp_project(kgrid, h, M, fam)

    finest = min(0, K, L, M)
    if kgrid.spacing > 2.0**finest * 0.1:
        raise GuardError("under-resolved", "kappa spacing too coarse for the shells")
    n_lam = refine * 513
    n_gl = refine * 32
    stride = max(1, int(np.floor(0.01 * 2.0**min(K, L, M) / kgrid.spacing)))
    out_idx = np.arange(0, kgrid.n_points, stride)
    out_kappa = kgrid.nodes[out_idx]
    keep = fam.shell(out_kappa, K) > 1e-14
    spectral = np.zeros(out_idx.size, dtype=complex)
    if np.any(keep) and np.any(np.abs(gp) > 0):
        spectral[keep] = _radial_bilinear(
            kgrid, gp, hp, b, None, out_idx[keep], n_lam, n_gl,
        )
        spectral *= fam.shell(out_kappa, K)
    out_kgrid = KGrid(out_kappa[0], out_kappa[-1], out_idx.size)
    phys = flat_inverse(grid, out_kgrid, spectral)
    return ProfileGrid(grid, phys), spectral, out_kgrid

# acceptance.py
"""Verification battery: ten independent criteria, one verdict each.

Every criterion freezes its own potential, grids and tolerances, so the
battery gives the same verdict regardless of the run configuration that
invoked it.  Criteria share expensive intermediates (solved tables, the
high-frequency toggle pair) through a context dict; timing is attributed
to the criterion that built the object.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bilinear import (AnnulusOperatorSpec, DyadicCutoffFamily,
                       apply_annulus_operator, estimate_operator_scaling,
                       phase_identity_residuals, sample_near_diagonal,
                       spectral_norm)
from .dft import apply_H, decay_scan, flat_forward, forward_dft, inverse_dft
from .evolve import (EvolveConfig, bootstrap_report, gaussian_data,
                     integrate_profile, split_step, window_data)
from .grids import KGrid, RadialGrid
from .nsd import (CollinearConfig, building_block, building_block_closed_form,
                  building_block_expansion, fit_singular_structure, mu2_sample,
                  mu3_sample, nu1_regularized, product_route_identity)
from .potential import RadialPotential
from .radialwave import (build_eigenfunction_table, extract_g0,
                         lippmann_schwinger_residual, psi1_field)

__all__ = ["CriterionResult", "run_all", "CRITERIA"]

DEFAULT_POTENTIAL = RadialPotential("gaussian", 1.0, 1.0, 12.0)
ZERO_POTENTIAL = RadialPotential("zero", 0.0, 1.0, 1.0)

# shared large-grid pair: free tail down to kappa_min = 0.0125 and phase
# resolution up to kappa_max = 9 on one radial grid
WIDE_RGRID = (336.0, 20160)
WIDE_KGRID = (0.0125, 9.0, 1440)


@dataclass
class CriterionResult:
    id: int
    title: str
    passed: bool
    seconds: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"criterion {self.id:2d} {tag} {self.seconds:7.1f}s  {self.title}"


def _spec_l2(kgrid, v) -> float:
    return float(np.sqrt(np.sum(kgrid.volume_weights * np.abs(v) ** 2)))


def _window_probe(kgrid, center_frac, width_frac):
    from .cutoffs import smooth_step
    kk = kgrid.nodes
    span = kgrid.kappa_max - kgrid.kappa_min
    lo = smooth_step((kk - kgrid.kappa_min) / (0.12 * span))
    hi = smooth_step((kgrid.kappa_max - kk) / (0.15 * span))
    c = kgrid.kappa_min + center_frac * span
    return np.exp(-0.5 * ((kk - c) / (width_frac * span)) ** 2) * lo * hi + 0j


# ---------------------------------------------------------------------------
# 1. zero potential: every perturbative object collapses
# ---------------------------------------------------------------------------


def criterion_1(ctx) -> CriterionResult:
    grid = RadialGrid(56.0, 1246)
    kgrid = KGrid(0.1, 3.0, 256)
    nodes = kgrid.nodes
    ia, ib, ic = 35, 40, 44   # magnitudes near 0.5: collinear step rule holds
    assembly = (nodes[ia], nodes[ib], nodes[ic])
    tab = build_eigenfunction_table(ZERO_POTENTIAL, grid, kgrid,
                                    assembly_kappas=assembly)

    r = grid.nodes
    probes = [np.exp(-0.5 * r**2) + 0j, r**2 * np.exp(-r**2 / 3.0) + 0j]
    dft_err = 0.0
    for f in probes:
        a = forward_dft(tab, f, check_tail=False).values
        b = flat_forward(grid, kgrid, f)
        dft_err = max(dft_err, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))

    phase_err = float(np.max(np.abs(tab.delta)))

    r_idx = np.arange(1, 400, 7)
    c_nodes = np.linspace(-1.0, 1.0, 9)
    psi1_err = float(np.max(np.abs(psi1_field(tab, assembly[1], r_idx, c_nodes))))
    g0_err = float(np.max(np.abs(extract_g0(tab, c_nodes, assembly[1]))))

    win = (0, 4)   # shells above scale 4 leave this radial window
    pair = CollinearConfig((assembly[0], assembly[1]), (1, 1))
    triple = CollinearConfig(assembly, (1, 1, 1))
    kernel_err = max(
        abs(nu1_regularized(tab, pair, window=win).value),
        abs(mu2_sample(tab, triple, variant=1, window=win).value),
        abs(mu2_sample(tab, triple, variant=2, window=win).value),
        abs(mu3_sample(tab, triple, window=win).value),
    )
    vanish_err = max(psi1_err, g0_err, float(kernel_err))

    g = _window_probe(kgrid, 0.4, 0.15)
    h = _window_probe(kgrid, 0.55, 0.1)
    _, conv_err = product_route_identity(tab, g, h)

    checks = {
        "flat_transform": dft_err < 1e-8,
        "phase_shifts": phase_err < 1e-10,
        "perturbative_objects": vanish_err < 1e-6,
        "product_route": conv_err < 1e-4,
    }
    return CriterionResult(1, "zero-potential collapse", all(checks.values()),
                           0.0, {"dft_vs_flat": dft_err,
                                 "max_phase_shift": phase_err,
                                 "max_perturbative": vanish_err,
                                 "product_route_resid": conv_err,
                                 "checks": checks})


# ---------------------------------------------------------------------------
# 2. eigenfunction fidelity against the defining integral equation
# ---------------------------------------------------------------------------


def criterion_2(ctx) -> CriterionResult:
    pot = RadialPotential("gaussian", 2.0, 1.0, 12.0)
    kgrid = KGrid(0.2, 5.0, 241)
    rng = np.random.default_rng(20260825)
    idx = np.sort(rng.choice(kgrid.n_points, size=20, replace=False))
    kappas = kgrid.nodes[idx]
    # sample radii live on the coarse lattice, which the halved grid shares
    h_coarse = 56.0 / 4032
    samples = [(round(rng.uniform(0.3, 24.0) / h_coarse) * h_coarse,
                float(rng.uniform(-1.0, 1.0)), k)
               for k in kappas]

    residuals = {}
    for n_r in (4032, 8064):
        # samples reach r = 24, well past the potential; the angular series
        # needs channels beyond the assembly rule to clear its tail guard,
        # and the base step must keep solver noise under that gauge at
        # kappa = 5
        tab = build_eigenfunction_table(pot, RadialGrid(56.0, n_r), kgrid,
                                        l_max=44, assembly_kappas=kappas)
        residuals[n_r], _ = lippmann_schwinger_residual(tab, samples)

    improvement = residuals[4032] / max(residuals[8064], 1e-300)
    checks = {"residual": residuals[4032] < 1e-4,
              "halving_gain": improvement >= 4.0}
    return CriterionResult(2, "eigenfunction fidelity", all(checks.values()),
                           0.0, {"max_residual": residuals[4032],
                                 "max_residual_halved": residuals[8064],
                                 "halving_gain": improvement,
                                 "checks": checks})


# ---------------------------------------------------------------------------
# 3. transform suite on the wide grid pair
# ---------------------------------------------------------------------------


def _wide_table(ctx, pot):
    key = ("wide_table", pot.kind, pot.amplitude)
    if key not in ctx:
        ctx[key] = build_eigenfunction_table(
            pot, RadialGrid(*WIDE_RGRID), KGrid(*WIDE_KGRID), radial_only=True)
    return ctx[key]


def criterion_3(ctx) -> CriterionResult:
    tab = _wide_table(ctx, DEFAULT_POTENTIAL)
    kg, grid = tab.kgrid, tab.grid
    probes = [_window_probe(kg, 0.4, 0.15), _window_probe(kg, 0.55, 0.08)]

    roundtrip = plancherel = 0.0
    for g0 in probes:
        f = inverse_dft(tab, g0, check_tail=False)
        g1 = forward_dft(tab, f, check_tail=False)
        roundtrip = max(roundtrip, _spec_l2(kg, g1.values - g0) / _spec_l2(kg, g0))
        phys = float(np.sqrt(np.sum(grid.volume_weights * np.abs(f.values) ** 2)))
        plancherel = max(plancherel, abs(phys - _spec_l2(kg, g0)) / _spec_l2(kg, g0))

    f = inverse_dft(tab, probes[0], check_tail=False)
    lhs = forward_dft(tab, apply_H(DEFAULT_POTENTIAL, grid, f.values),
                      check_tail=False).values
    rhs = kg.nodes**2 * probes[0]
    diag = _spec_l2(kg, lhs - rhs) / _spec_l2(kg, rhs)

    checks = {"plancherel": plancherel < 1e-4, "roundtrip": roundtrip < 1e-4,
              "diagonalization": diag < 1e-3}
    return CriterionResult(3, "transform suite", all(checks.values()), 0.0,
                           {"plancherel_err": plancherel,
                            "roundtrip_err": roundtrip, "diag_err": diag,
                            "checks": checks})


# ---------------------------------------------------------------------------
# 4. dispersive decay of the linear flow
# ---------------------------------------------------------------------------


def criterion_4(ctx) -> CriterionResult:
    times = np.geomspace(5.0, 100.0, 9)
    details = {}
    checks = {}
    for name, pot in (("free", ZERO_POTENTIAL), ("default", DEFAULT_POTENTIAL)):
        tab = _wide_table(ctx, pot)
        u0 = np.exp(-0.5 * tab.grid.nodes**2).astype(complex)
        scan = decay_scan(tab, u0, times)
        details[name] = {"sup_exponent": scan.sup_exponent,
                         "l6_exponent": scan.l6_exponent}
        checks[f"{name}_sup"] = -1.7 <= scan.sup_exponent <= -1.3
        checks[f"{name}_l6"] = -1.15 <= scan.l6_exponent <= -0.85
    checks["free_exact"] = abs(details["free"]["sup_exponent"] + 1.5) <= 0.05
    details["checks"] = checks
    return CriterionResult(4, "dispersive decay", all(checks.values()), 0.0,
                           details)


# ---------------------------------------------------------------------------
# 5. principal-value structure across the collinear locus
# ---------------------------------------------------------------------------

FIT_LADDER = (0.1, 0.05, 0.025, 0.0125)


def _fit_table(amplitude):
    pot = RadialPotential("gaussian", amplitude, 1.0, 12.0)
    kg = KGrid(0.875, 1.125, 21)
    need = {1.0}
    for e in FIT_LADDER:
        need.update((1.0 - e, 1.0 + e))
    return build_eigenfunction_table(pot, RadialGrid(832.0, 17920), kg,
                                     assembly_kappas=sorted(need))


def criterion_5(ctx) -> CriterionResult:
    fit = fit_singular_structure(_fit_table(1.0), 1.0, FIT_LADDER,
                                 window=(0, 8))
    # linearity in the coupling is an asymptotic statement; measure the
    # halving defect where quadratic corrections are already small
    fit_q = fit_singular_structure(_fit_table(0.25), 1.0, FIT_LADDER,
                                   window=(0, 8))
    fit_e = fit_singular_structure(_fit_table(0.125), 1.0, FIT_LADDER,
                                   window=(0, 8))
    linearity = abs(2.0 * fit_e.pv_coefficient / fit_q.pv_coefficient - 1.0)
    checks = {"pv_vs_prediction": fit.relative_error <= 0.05,
              "richardson": fit.richardson_spread <= 0.25,
              "weak_coupling_linearity": linearity <= 0.10}
    return CriterionResult(5, "singular-structure extraction",
                           all(checks.values()), 0.0,
                           {"relative_error": fit.relative_error,
                            "richardson_spread": fit.richardson_spread,
                            "linearity_defect": float(linearity),
                            "pv_coefficient": [fit.pv_coefficient.real,
                                               fit.pv_coefficient.imag],
                            "checks": checks})


# ---------------------------------------------------------------------------
# 6. constant-symbol building block against its closed form
# ---------------------------------------------------------------------------


def criterion_6(ctx) -> CriterionResult:
    # difference frequency 0.05 sits near the top window scale, where the
    # resonant branch carries almost all of the block
    cfg = CollinearConfig((1.0, 1.05), (1, 1))
    closed_err = 0.0
    for J in (2, 4, 6, 8):
        num = building_block(None, J, cfg)
        ref = building_block_closed_form(J, cfg)
        closed_err = max(closed_err, abs(num - ref) / abs(ref))
    exp = building_block_expansion(8, cfg)
    checks = {"closed_form": closed_err < 1e-6,
              "leading_term": exp["remainder_ratio"] <= 0.10}
    return CriterionResult(6, "building-block closed form",
                           all(checks.values()), 0.0,
                           {"closed_form_err": closed_err,
                            "remainder_ratio": exp["remainder_ratio"],
                            "checks": checks})


# ---------------------------------------------------------------------------
# 7. annulus operator norm scaling
# ---------------------------------------------------------------------------


def criterion_7(ctx) -> CriterionResult:
    fam = DyadicCutoffFamily()
    kgrid = KGrid(0.05, 3.6, 7296)
    grid = RadialGrid(64.0, 1280)
    g = fam.shell(kgrid.nodes, 0).astype(complex)
    specs = [AnnulusOperatorSpec(j=j, shell_l=0) for j in range(3, 9)]
    est = estimate_operator_scaling(specs, kgrid, g, g, grid)

    # shell-doubling at fixed j: operator mass scales like the shell measure
    kg2 = KGrid(0.05, 6.6, 1702)
    grid2 = RadialGrid(64.0, 2816)
    ratios = []
    for L in (0, 1):
        gl = fam.shell(kg2.nodes, L).astype(complex)
        _, spectral, okg = apply_annulus_operator(
            AnnulusOperatorSpec(j=5, shell_l=L), kg2, gl, gl, grid2)
        denom = spectral_norm(kg2, gl, 2) * spectral_norm(kg2, gl, "inf")
        ratios.append(spectral_norm(okg, spectral, 2) / denom)
    doubling = ratios[1] / ratios[0]

    checks = {"slope": -1.25 <= est.fitted_slope <= -0.75,
              "shell_doubling": 2.0 <= doubling <= 6.0}
    return CriterionResult(7, "annulus operator scaling", all(checks.values()),
                           0.0, {"fitted_slope": est.fitted_slope,
                                 "doubling_factor": float(doubling),
                                 "ratios": [float(x) for x in est.ratios],
                                 "checks": checks})


# ---------------------------------------------------------------------------
# 8. phase algebra identities
# ---------------------------------------------------------------------------


def criterion_8(ctx) -> CriterionResult:
    rng = np.random.default_rng(31337)
    n = 100_000
    k = rng.standard_normal((n, 3))
    l = rng.standard_normal((n, 3))
    m = rng.standard_normal((n, 3))
    res = phase_identity_residuals(k, l, m)
    worst = {name: float(np.max(np.abs(v))) for name, v in res.items()}
    identity_err = max(worst.values())

    kd, ld, md = sample_near_diagonal(rng, 20_000)
    nl = np.linalg.norm(ld, axis=1)
    nm = np.linalg.norm(md, axis=1)
    phi = nl**2 + 2.0 * np.einsum("ij,ij->i", kd, ld) + nm**2
    margin = float(np.min(np.abs(phi) / (nl**2 / 4.0)))

    checks = {"identities": identity_err < 1e-12,
              "near_diagonal_bound": margin >= 1.0}
    return CriterionResult(8, "phase algebra", all(checks.values()), 0.0,
                           {"max_identity_resid": identity_err,
                            "per_identity": worst,
                            "near_diagonal_margin": margin,
                            "checks": checks})


# ---------------------------------------------------------------------------
# 9 and 10. nonlinear evolution and high-frequency inertness
# ---------------------------------------------------------------------------

EPS0 = 1e-2
EVOLVE_RGRID = (96.0, 2134)
EVOLVE_KGRID = (0.05, 3.0, 768)
# spectrally localized data for the truncation toggle and the solver
# cross-check: a window bump keeps every scale inside the resolved band
SPECTRAL_CENTER = 0.35
SPECTRAL_WIDTH = 0.1


def _hf_toggle_gap(ctx):
    """Final-profile change under the high-frequency truncation toggle,
    on spectrally localized data; cached for the inertness criterion."""
    if "hf_toggle_rel" in ctx:
        return ctx["hf_toggle_rel"]
    tab = ctx.get("evolve_table")
    if tab is None:
        tab = build_eigenfunction_table(
            DEFAULT_POTENTIAL, RadialGrid(*EVOLVE_RGRID),
            KGrid(*EVOLVE_KGRID), radial_only=True)
        ctx["evolve_table"] = tab
    u0 = window_data(tab, EPS0, center=SPECTRAL_CENTER, width=SPECTRAL_WIDTH)
    finals = []
    for toggle in (False, True):
        cfg = EvolveConfig(eps0=EPS0, dt=0.04, t_final=50.0, delta_N=0.2,
                           hf_truncation=toggle, snapshot_dt=1.0)
        traj = integrate_profile(tab, u0, cfg)
        finals.append(traj.snapshots[-1][1].values)
    kg = tab.kgrid
    rel = _spec_l2(kg, finals[1] - finals[0]) / _spec_l2(kg, finals[0])
    ctx["hf_toggle_rel"] = rel
    return rel


def criterion_9(ctx) -> CriterionResult:
    tab = build_eigenfunction_table(
        DEFAULT_POTENTIAL, RadialGrid(*EVOLVE_RGRID), KGrid(*EVOLVE_KGRID),
        radial_only=True)
    ctx["evolve_table"] = tab
    u0 = gaussian_data(tab.grid, EPS0, width=1.0)
    cfg = EvolveConfig(eps0=EPS0, dt=0.04, t_final=50.0, delta_N=0.2,
                       snapshot_dt=1.0)
    rep = bootstrap_report(integrate_profile(tab, u0, cfg))

    # independent integrator pair at fine dt on the localized data class
    tab2 = build_eigenfunction_table(
        DEFAULT_POTENTIAL, RadialGrid(92.0, 2044), KGrid(0.05, 3.0, 512),
        radial_only=True)
    u0w = window_data(tab2, EPS0, center=SPECTRAL_CENTER, width=SPECTRAL_WIDTH)
    cfg2 = EvolveConfig(eps0=EPS0, dt=1e-3, t_final=1.0, delta_N=0.2,
                        snapshot_dt=1.0)
    fa = integrate_profile(tab2, u0w, cfg2).snapshots[-1][1].values
    fb = split_step(tab2, u0w, cfg2).snapshots[-1][1].values
    gap = _spec_l2(tab2.kgrid, fa - fb) / _spec_l2(tab2.kgrid, fa)

    toggle_rel = _hf_toggle_gap(ctx)   # shared with criterion 10

    checks = dict(rep.passes)
    checks["cross_solver"] = gap < 1e-3
    return CriterionResult(9, "nonlinear evolution", all(checks.values()), 0.0,
                           {"sobolev_ratio": rep.sobolev_ratio,
                            "w1_ratio": rep.w1_ratio,
                            "w2_growth_exponent": rep.w2_growth_exponent,
                            "sup_decay_exponent": rep.sup_decay_exponent,
                            "scattering_differences":
                                [float(x) for x in rep.scattering_differences],
                            "cross_solver_gap": float(gap),
                            "hf_toggle_rel": float(toggle_rel),
                            "checks": checks})


def criterion_10(ctx) -> CriterionResult:
    rel = _hf_toggle_gap(ctx)
    checks = {"toggle_inert": rel < 1e-4}
    return CriterionResult(10, "high-frequency inertness",
                           all(checks.values()), 0.0,
                           {"hf_toggle_rel": float(rel), "checks": checks})


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10)


def run_all(progress=None, criteria=None):
    """Run the battery in order; returns a list of CriterionResult.

    ``progress`` receives one formatted line per finished criterion.
    ``criteria`` restricts to a subset of criterion ids (shared objects are
    still built on demand).
    """
    ctx = {}
    results = []
    for fn in CRITERIA:
        cid = int(fn.__name__.rsplit("_", 1)[1])
        if criteria is not None and cid not in criteria:
            continue
        t0 = time.perf_counter()
        res = fn(ctx)
        res.seconds = time.perf_counter() - t0
        results.append(res)
        if progress is not None:
            progress(res.line())
    return results

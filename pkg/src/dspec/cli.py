# cli.py
"""Command-line front end: config loading, table caching, report emission.

JSON configs in, CSV/JSON/SVG artifacts out.  Every emitted file starts
with a metadata line carrying the resolved-config hash, and identical
config + seed reproduce every artifact byte for byte.

Exit codes: 0 all invoked checks pass, 1 a check failed, 2 config or
guard violation (machine-readable error JSON goes to stderr).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bilinear import AnnulusOperatorSpec, estimate_operator_scaling
from .cache import file_hash, load_table, save_table, table_header
from .cutoffs import DyadicCutoffFamily
from .dft import apply_H, decay_scan, forward_dft, inverse_dft
from .errors import GuardError
from .evolve import (EvolveConfig, gaussian_data, integrate_profile,
                     split_step, window_data)
from .grids import KGrid, RadialGrid
from .nsd import (CollinearConfig, fit_singular_structure, mu2_sample,
                  mu3_sample, nu1_regularized)
from .potential import RadialPotential, decay_moments, detect_bound_states
from .radialwave import build_eigenfunction_table, suggest_l_max
from .svg import write_svg

__all__ = ["main", "load_config", "config_hash", "RunConfig"]

DEFAULT_CONFIG = {
    "potential": {"kind": "gaussian", "amplitude": 1.0, "width": 1.0,
                  "r_cut": 12.0},
    "grids": {"r_max": 56.0, "n_r": 1246, "kappa_min": 0.1, "kappa_max": 3.0,
              "n_k": 256, "l_max": None, "assembly_kappas": []},
    "nsd": {"j_min": 0, "j_max": 8,
            "eps_ladder": [0.1, 0.05, 0.025, 0.0125]},
    "evolve": {"eps0": 0.01, "dt": 0.04, "t_final": 10.0,
               "method": "duhamel-rk4", "delta_N": 0.1, "sobolev_s": 4.0,
               "hf_truncation": False, "snapshot_dt": 1.0,
               "data": {"kind": "window", "center": 1.2, "width": 0.4}},
    "output_dir": "out",
    "seed": 7,
}


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------


def _canonical(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(payload) -> str:
    """12-hex digest of the resolved config; stamped into every artifact."""
    return hashlib.sha256(_canonical(payload).encode()).hexdigest()[:12]


@dataclass(frozen=True)
class RunConfig:
    """Resolved run configuration: constructed objects plus the raw payload."""

    potential: RadialPotential
    grid: RadialGrid
    kgrid: KGrid
    l_max: int | None
    assembly_kappas: tuple
    nsd_window: tuple
    eps_ladder: tuple
    evolve: EvolveConfig
    data: dict
    output_dir: Path
    seed: int
    payload: dict

    @property
    def hash(self) -> str:
        return config_hash(self.payload)


def load_config(path=None) -> RunConfig:
    """Parse and validate a run config, filling defaults section by section.

    Every grid guard runs here so violations surface as named hard errors
    before any subcommand does real work.
    """
    payload = {k: (dict(v) if isinstance(v, dict) else v)
               for k, v in DEFAULT_CONFIG.items()}
    if path is not None:
        with open(path) as f:
            user = json.load(f)
        if not isinstance(user, dict):
            raise ValueError("config root must be a JSON object")
        for key, val in user.items():
            if isinstance(val, dict) and isinstance(payload.get(key), dict):
                payload[key].update(val)
            else:
                payload[key] = val

    pot = RadialPotential(**payload["potential"])
    g = payload["grids"]
    grid = RadialGrid(float(g["r_max"]), int(g["n_r"]))
    kgrid = KGrid(float(g["kappa_min"]), float(g["kappa_max"]), int(g["n_k"]))
    grid.check_resolution(kgrid.kappa_max)
    grid.check_free_tail(pot.r_cut, kgrid.kappa_min)
    l_max = g.get("l_max")
    if l_max is not None:
        l_max = int(l_max)
        rule = suggest_l_max(pot, kgrid.kappa_max)
        if l_max < rule:
            raise GuardError("l_max rule",
                             f"configured l_max = {l_max} below {rule}")
    assembly = tuple(float(k) for k in g.get("assembly_kappas", ()))
    for kap in assembly:
        kgrid.index_of(kap)   # strict node semantics; raises if off-grid

    nsd = payload["nsd"]
    window = (int(nsd["j_min"]), int(nsd["j_max"]))
    if not 0 <= window[0] < window[1]:
        raise ValueError("nsd window needs 0 <= j_min < j_max")
    ladder = tuple(sorted((float(e) for e in nsd["eps_ladder"]), reverse=True))
    if len(ladder) < 4:
        raise GuardError("fit unstable", "epsilon ladder needs >= 4 rungs")

    ev = dict(payload["evolve"])
    data = dict(ev.pop("data"))
    evolve_cfg = EvolveConfig(**ev)
    if evolve_cfg.dt * kgrid.kappa_max**2 > 0.5 + 1e-12:
        raise GuardError(
            "resolution",
            f"dt*kappa_max^2 = {evolve_cfg.dt * kgrid.kappa_max**2:.3f} > 0.5")
    if data.get("kind", "window") not in ("window", "gaussian"):
        raise ValueError(f"unknown data kind {data.get('kind')!r}")

    return RunConfig(potential=pot, grid=grid, kgrid=kgrid, l_max=l_max,
                     assembly_kappas=assembly, nsd_window=window,
                     eps_ladder=ladder, evolve=evolve_cfg, data=data,
                     output_dir=Path(payload["output_dir"]),
                     seed=int(payload["seed"]), payload=payload)


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


def write_report(path, payload: dict, h: str) -> None:
    """JSON report whose first line carries the config hash."""
    body = json.dumps(_jsonable(payload), indent=1)
    if body == "{}":
        text = '{"config_hash": "%s"}' % h
    else:
        text = '{"config_hash": "%s",\n' % h + body[2:]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(text + "\n")


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.12g" % float(v)


def write_csv(path, columns, rows, h: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(f"# config {h}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_cell(v) for v in row) + "\n")


def _emit(payload: dict) -> None:
    print(json.dumps(_jsonable(payload)))


# ---------------------------------------------------------------------------
# cached eigenfunction tables
# ---------------------------------------------------------------------------


def _table_matches(tab, cfg: RunConfig, l_max: int, assembly: tuple) -> bool:
    hdr = table_header(tab)
    want = {"kind": cfg.potential.kind, "amplitude": cfg.potential.amplitude,
            "width": cfg.potential.width, "r_cut": cfg.potential.r_cut}
    if hdr["potential"] != want or hdr["l_max"] != l_max:
        return False
    if hdr["grid"] != {"r_max": cfg.grid.r_max, "n_points": cfg.grid.n_points}:
        return False
    if hdr["kgrid"] != {"kappa_min": cfg.kgrid.kappa_min,
                        "kappa_max": cfg.kgrid.kappa_max,
                        "n_points": cfg.kgrid.n_points}:
        return False
    idx = sorted(cfg.kgrid.index_of(k) for k in assembly)
    return list(hdr["assembly_indices"]) == idx


def cached_table(cfg: RunConfig, path: Path):
    """Load the table cache at ``path`` if it matches the config, else build
    and save.  Returns (table, was_cached)."""
    l_max = cfg.l_max
    if l_max is None:
        l_max = suggest_l_max(cfg.potential, cfg.kgrid.kappa_max)
    if path.exists():
        tab = load_table(path)   # raises on version mismatch (hard error)
        if _table_matches(tab, cfg, l_max, cfg.assembly_kappas):
            return tab, True
    tab = build_eigenfunction_table(cfg.potential, cfg.grid, cfg.kgrid,
                                    l_max=l_max,
                                    assembly_kappas=cfg.assembly_kappas)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_table(path, tab)
    return tab, False


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_potential_check(cfg: RunConfig, args) -> int:
    rep = decay_moments(cfg.potential)
    diag = detect_bound_states(cfg.potential, 2, cfg.grid)
    finite = all(np.isfinite(v) for v in rep.moments.values())
    passed = bool(diag.is_generic and finite and not rep.diverged)
    payload = {
        "potential": cfg.payload["potential"],
        "moments": {str(n): v for n, v in rep.moments.items()},
        "derivative_sup": {str(n): v for n, v in rep.derivative_sup.items()},
        "moments_diverged": rep.diverged,
        "bound_state_counts": list(diag.bound_state_counts),
        "s_wave_slope_indicator": diag.s_wave_slope_indicator,
        "is_generic": diag.is_generic,
        "passed": passed,
    }
    out = args.out or cfg.output_dir / "potential_check.json"
    write_report(out, payload, cfg.hash)
    _emit({"config_hash": cfg.hash, "passed": passed, "report": str(out)})
    return 0 if passed else 1


def cmd_eigen_table(cfg: RunConfig, args) -> int:
    path = Path(args.out) if args.out else cfg.output_dir / "table.dspec"
    t0 = time.perf_counter()
    tab, cached = cached_table(cfg, path)
    _emit({"config_hash": cfg.hash, "path": str(path),
           "table_hash": file_hash(path), "cached": cached,
           "l_max": tab.l_max, "n_kappa": tab.kgrid.n_points,
           "seconds": round(time.perf_counter() - t0, 3)})
    return 0


def _window_probe(table, center, width):
    """Spectral bump with tapered window edges, as transform test data."""
    kg = table.kgrid
    kk = kg.nodes
    span = kg.kappa_max - kg.kappa_min
    from .cutoffs import smooth_step
    lo = smooth_step((kk - kg.kappa_min) / (0.12 * span))
    hi = smooth_step((kg.kappa_max - kk) / (0.15 * span))
    return np.exp(-0.5 * ((kk - center) / width) ** 2) * lo * hi + 0j


def cmd_dft_check(cfg: RunConfig, args) -> int:
    tab = build_eigenfunction_table(cfg.potential, cfg.grid, cfg.kgrid,
                                    radial_only=True)
    kg, grid = tab.kgrid, tab.grid
    span = kg.kappa_max - kg.kappa_min
    probes = [
        _window_probe(tab, kg.kappa_min + 0.4 * span, 0.15 * span),
        _window_probe(tab, kg.kappa_min + 0.55 * span, 0.08 * span),
    ]

    def spec_l2(v):
        return float(np.sqrt(np.sum(kg.volume_weights * np.abs(v) ** 2)))

    def phys_l2(v):
        return float(np.sqrt(np.sum(grid.volume_weights * np.abs(v) ** 2)))

    roundtrip = plancherel = 0.0
    for g0 in probes:
        f = inverse_dft(tab, g0, check_tail=False)
        g1 = forward_dft(tab, f, check_tail=False)
        roundtrip = max(roundtrip,
                        spec_l2(g1.values - g0) / spec_l2(g0))
        plancherel = max(plancherel,
                         abs(phys_l2(f.values) - spec_l2(g0)) / spec_l2(g0))

    # diagonalization on the physical image of the first probe
    f = inverse_dft(tab, probes[0], check_tail=False)
    hf = apply_H(cfg.potential, grid, f.values)
    lhs = forward_dft(tab, hf, check_tail=False).values
    rhs = kg.nodes**2 * probes[0]
    diag = spec_l2(lhs - rhs) / spec_l2(rhs)

    times = np.geomspace(5.0, 100.0, 9)
    u0 = np.exp(-0.5 * grid.nodes**2).astype(complex)
    scan = decay_scan(tab, u0, times)

    checks = {
        "roundtrip": roundtrip < 1e-4,
        "plancherel": plancherel < 1e-4,
        "diagonalization": diag < 1e-3,
        "sup_decay": -1.7 <= scan.sup_exponent <= -1.3,
        "l6_decay": -1.15 <= scan.l6_exponent <= -0.85,
    }
    payload = {
        "plancherel_err": plancherel,
        "roundtrip_err": roundtrip,
        "diag_err": diag,
        "decay_exponents": {"sup": scan.sup_exponent,
                            "l6": scan.l6_exponent},
        "checks": checks,
        "passed": all(checks.values()),
    }
    out = args.out or cfg.output_dir / "dft_check.json"
    write_report(out, payload, cfg.hash)
    if args.dump_spectrum:
        rows = [(k, v.real, v.imag) for k, v in zip(kg.nodes, probes[0])]
        write_csv(args.dump_spectrum, ("kappa", "re", "im"), rows, cfg.hash)
    _emit({"config_hash": cfg.hash, "passed": payload["passed"],
           "report": str(out)})
    return 0 if payload["passed"] else 1


# collinear magnitude layouts per scan kind: nu1 pairs (p, q), the
# lower-order kernels take three frequencies off the singular loci
_SCAN_ARITY = {"nu1": 2, "nu2_1": 3, "nu2_2": 3, "mu3": 3}


def _scan_magnitudes(kind: str, center: float, eps: float) -> tuple:
    if kind == "nu1":
        return (center, center + eps)
    return (center, center + eps, center + 2.0 * eps)


def _nsd_table(cfg: RunConfig, center: float, ladder: tuple, pad_rungs: int,
               nodes_needed: set, arity: int = 2):
    """Dedicated fine-spacing table around ``center`` for collinear sampling.

    The ladder's smallest rung sets the node spacing (strict node semantics:
    every sampled magnitude must be a grid node) and the worst-case frequency
    sum sets the radial step.  Cached per parameter set under the run's
    output directory.
    """
    eps_min = ladder[-1]
    for e in ladder:
        if abs(e / eps_min - round(e / eps_min)) > 1e-9:
            raise ValueError("ladder rungs must be multiples of the smallest")
    half = int(round(ladder[0] / eps_min)) * pad_rungs + 2
    kg = KGrid(center - half * eps_min, center + half * eps_min, 2 * half + 1)
    if kg.kappa_min <= 0:
        raise ValueError("ladder too wide: kappa window hits zero")
    j_max = cfg.nsd_window[1]
    r_need = 2.0 ** (j_max + 1) * 1.6
    r_max = max(64.0, float(16 * int(np.ceil(r_need / 16.0))))
    sum_cap = (arity * center + arity * (arity - 1) / 2 * ladder[0]
               if arity == 3 else 2.0 * center + ladder[0])
    h_target = 0.09 / sum_cap
    n_r = 2 * int(np.ceil(r_max / h_target / 2.0))
    grid = RadialGrid(r_max, n_r)
    key = config_hash({"potential": cfg.payload["potential"],
                       "center": center, "ladder": list(ladder),
                       "window": list(cfg.nsd_window), "pad": pad_rungs,
                       "grid": [r_max, n_r]})
    path = cfg.output_dir / f"nsd_table_{key}.dspec"
    sub = RunConfig(potential=cfg.potential, grid=grid, kgrid=kg, l_max=None,
                    assembly_kappas=tuple(sorted(nodes_needed)),
                    nsd_window=cfg.nsd_window, eps_ladder=ladder,
                    evolve=cfg.evolve, data=cfg.data,
                    output_dir=cfg.output_dir, seed=cfg.seed,
                    payload=cfg.payload)
    tab, _ = cached_table(sub, path)
    return tab


def cmd_nsd_scan(cfg: RunConfig, args) -> int:
    kind = args.kind
    center = args.center
    ladder = cfg.eps_ladder
    if args.eps_ladder:
        ladder = tuple(sorted((float(x) for x in
                               args.eps_ladder.split(",")), reverse=True))
    nodes = set()
    for e in ladder:
        nodes.update(_scan_magnitudes(kind, center, e))
    if args.fit_out:
        for e in ladder:
            nodes.update((center - e, center + e))
    tab = _nsd_table(cfg, center, ladder, pad_rungs=3 if kind != "nu1" else 2,
                     nodes_needed=nodes, arity=_SCAN_ARITY[kind])

    j_lo, j_hi = cfg.nsd_window
    rows = []
    for e in ladder:
        mags = _scan_magnitudes(kind, center, e)
        cc = CollinearConfig(mags, (1,) * len(mags))
        if kind == "nu1":
            samp = nu1_regularized(tab, cc, window=cfg.nsd_window)
        elif kind == "mu3":
            samp = mu3_sample(tab, cc, window=cfg.nsd_window)
        else:
            samp = mu2_sample(tab, cc, variant=int(kind[-1]),
                              window=cfg.nsd_window)
        shell_cols = [abs(samp.shell_values.get(J, 0.0))
                      for J in range(j_lo, j_hi + 1)]
        m3 = mags[2] if len(mags) == 3 else ""
        rows.append((e, mags[0], mags[1], m3, samp.value.real,
                     samp.value.imag, abs(samp.value), samp.tail_estimate,
                     samp.singular_flag, *shell_cols))

    cols = ("eps", "m1", "m2", "m3", "re", "im", "abs", "tail_estimate",
            "singular_flag",
            *(f"shell_{J}" for J in range(j_lo, j_hi + 1)))
    out = args.out or cfg.output_dir / f"nsd_scan_{kind}.csv"
    write_csv(out, cols, rows, cfg.hash)
    result = {"config_hash": cfg.hash, "kind": kind, "center": center,
              "rows": len(rows), "out": str(out)}

    code = 0
    if args.fit_out:
        fit = fit_singular_structure(tab, center, ladder,
                                     window=cfg.nsd_window)
        code = _write_fit(fit, args.fit_out, cfg)
        result["fit"] = str(args.fit_out)
    _emit(result)
    return code


def _write_fit(fit, out, cfg: RunConfig) -> int:
    passes = {"pv_match": fit.relative_error <= 0.05,
              "richardson": fit.richardson_spread <= 0.25}
    payload = {
        "kappa_center": fit.kappa_center,
        "eps_values": fit.eps_values,
        "pv_coefficient": fit.pv_coefficient,
        "delta_coefficient": fit.delta_coefficient,
        "b0_predicted": fit.b0_predicted,
        "relative_error": fit.relative_error,
        "delta_relative_error": fit.delta_relative_error,
        "richardson_spread": fit.richardson_spread,
        "passes": passes,
        "passed": all(passes.values()),
    }
    write_report(out, payload, cfg.hash)
    return 0 if payload["passed"] else 1


def cmd_nsd_fit(cfg: RunConfig, args) -> int:
    center = args.center
    ladder = cfg.eps_ladder
    nodes = {center}
    for e in ladder:
        nodes.update((center - e, center + e))
    tab = _nsd_table(cfg, center, ladder, pad_rungs=2, nodes_needed=nodes)
    fit = fit_singular_structure(tab, center, ladder, window=cfg.nsd_window)
    out = args.out or cfg.output_dir / "fit.json"
    code = _write_fit(fit, out, cfg)
    _emit({"config_hash": cfg.hash, "center": center,
           "relative_error": fit.relative_error,
           "richardson_spread": fit.richardson_spread,
           "passed": code == 0, "report": str(out)})
    return code


def _parse_norms(text: str) -> tuple:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        out.append("inf" if tok in ("inf", "oo") else float(tok))
    if len(out) != 2:
        raise ValueError("--norms wants two comma-separated entries, e.g. 2,inf")
    return tuple(out)


def cmd_bilinear_bench(cfg: RunConfig, args) -> int:
    j_lo, j_hi = (int(x) for x in args.j_range.split(":"))
    if not 0 < j_lo < j_hi:
        raise ValueError("--j-range wants lo:hi with 0 < lo < hi")
    L = args.shell
    norms = _parse_norms(args.norms)

    fam = DyadicCutoffFamily()
    k_min, k_max = 0.05, 3.6 * 2.0**L
    thresh = 2.0 ** (-j_hi) / 8.0
    n_k = int(np.ceil((k_max - k_min) / thresh)) + 1
    kgrid = KGrid(k_min, k_max, n_k)
    n_r = 2 * int(np.ceil(64.0 * kgrid.kappa_max / 0.15 / 2.0))
    grid = RadialGrid(64.0, n_r)
    g = fam.shell(kgrid.nodes, L).astype(complex)

    specs = [AnnulusOperatorSpec(j=j, shell_l=L) for j in range(j_lo, j_hi + 1)]
    t0 = time.perf_counter()
    est = estimate_operator_scaling(specs, kgrid, g, g, grid, norms=norms)
    seconds = time.perf_counter() - t0

    rows = []
    js = np.asarray(est.j_values, dtype=float)
    logr = np.log2(est.ratios)
    for i, j in enumerate(js):
        part = (float(np.polyfit(js[:i + 1], logr[:i + 1], 1)[0])
                if i >= 1 else float("nan"))
        rows.append((int(j), est.ratios[i], part))
    out = args.out or cfg.output_dir / "slopes.csv"
    write_csv(out, ("j", "ratio", "slope-so-far"), rows, cfg.hash)

    passed = -1.25 <= est.fitted_slope <= -0.75
    _emit({"config_hash": cfg.hash, "shell": L, "j_range": [j_lo, j_hi],
           "fitted_slope": est.fitted_slope, "residual": est.residual,
           "passed": passed, "seconds": round(seconds, 2), "out": str(out)})
    return 0 if passed else 1


def _initial_data(cfg: RunConfig, table):
    d = cfg.data
    if d.get("kind", "window") == "gaussian":
        return gaussian_data(table.grid, cfg.evolve.eps0,
                             width=float(d.get("width", 1.0)))
    return window_data(table, cfg.evolve.eps0,
                       center=float(d.get("center", 1.2)),
                       width=float(d.get("width", 0.4)))


def cmd_evolve(cfg: RunConfig, args) -> int:
    tab = build_eigenfunction_table(cfg.potential, cfg.grid, cfg.kgrid,
                                    radial_only=True)
    u0 = _initial_data(cfg, tab)
    runner = (split_step if cfg.evolve.method == "split-step-strang"
              else integrate_profile)
    t0 = time.perf_counter()
    traj = runner(tab, u0, cfg.evolve)
    seconds = time.perf_counter() - t0

    tr = traj.norm_trace
    rows = list(zip(tr.times, tr.sobolev, tr.w1, tr.w2, tr.sup_u, tr.l6_u))
    out = args.out or cfg.output_dir / "traj.csv"
    write_csv(out, ("t", "sobolev", "w1", "w2", "sup_u", "l6_u"), rows,
              cfg.hash)

    if args.snapshots:
        snapdir = Path(args.snapshots)
        snapdir.mkdir(parents=True, exist_ok=True)
        for t, prof in traj.snapshots:
            srows = [(k, v.real, v.imag)
                     for k, v in zip(prof.kgrid.nodes, prof.values)]
            write_csv(snapdir / f"snapshot_{t:010.4f}.csv",
                      ("kappa", "re", "im"), srows, cfg.hash)

    if args.svg:
        series = [(name, tr.times, getattr(tr, name))
                  for name in ("sobolev", "w1", "w2", "sup_u", "l6_u")]
        write_svg(args.svg, series, title="norm history",
                  config_hash=cfg.hash, log_x=True, log_y=True,
                  x_label="t", y_label="norm")

    _emit({"config_hash": cfg.hash, "method": cfg.evolve.method,
           "t_final": cfg.evolve.t_final, "rows": len(rows),
           "sup_decay_exponent": tr.sup_decay_exponent,
           "seconds": round(seconds, 2), "out": str(out)})
    return 0


def cmd_acceptance(cfg: RunConfig, args) -> int:
    from .acceptance import run_all
    results = run_all(progress=lambda line: print(line, flush=True))
    payload = {
        "criteria": [{"id": r.id, "title": r.title, "passed": r.passed,
                      "seconds": round(r.seconds, 2), "details": r.details}
                     for r in results],
        "all_passed": all(r.passed for r in results),
        "total_seconds": round(sum(r.seconds for r in results), 2),
    }
    out = args.out or cfg.output_dir / "acceptance.json"
    write_report(out, payload, cfg.hash)
    _emit({"config_hash": cfg.hash, "all_passed": payload["all_passed"],
           "total_seconds": payload["total_seconds"], "report": str(out)})
    return 0 if payload["all_passed"] else 1


def cmd_dump_eigenfunctions(cfg: RunConfig, args) -> int:
    path = Path(args.table) if args.table else cfg.output_dir / "table.dspec"
    tab, _ = cached_table(cfg, path)
    out = args.out or cfg.output_dir / "eigenfunctions.csv"

    if args.waves_at is not None:
        ik = tab.kappa_index(args.waves_at)
        slot = tab.assembly_slot(args.waves_at)
        rr = tab.grid.nodes
        stride = max(1, int(args.r_stride))
        rows = []
        for ell in range(tab.l_max + 1):
            delta = tab.delta[ell, ik]
            w = np.exp(1j * delta) * tab.full_waves[ell, slot]
            for ir in range(0, rr.size, stride):
                rows.append((ell, tab.kgrid.nodes[ik], delta, rr[ir],
                             w[ir].real, w[ir].imag))
        write_csv(out, ("ell", "kappa", "phase_shift", "r", "re", "im"),
                  rows, cfg.hash)
    else:
        rows = [(ell, kap, tab.delta[ell, ik])
                for ell in range(tab.l_max + 1)
                for ik, kap in enumerate(tab.kgrid.nodes)]
        write_csv(out, ("ell", "kappa", "phase_shift"), rows, cfg.hash)

    _emit({"config_hash": cfg.hash, "rows": len(rows), "out": str(out)})
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dspec",
        description="Distorted-Fourier spectral toolkit command line.")
    p.add_argument("--config", default=None,
                   help="JSON run config (defaults fill missing sections)")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("potential-check",
                        help="decay moments and bound-state screen")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("eigen-table",
                        help="build (or load cached) eigenfunction table")
    sp.add_argument("--out", default=None, help="cache path (.dspec)")

    sp = sub.add_parser("dft-check",
                        help="transform invariants and decay exponents")
    sp.add_argument("--out", default=None)
    sp.add_argument("--dump-spectrum", default=None,
                    help="CSV of the probe spectrum (kappa, re, im)")

    sp = sub.add_parser("nsd-scan", help="collinear kernel scan over epsilon")
    sp.add_argument("--kind", choices=sorted(_SCAN_ARITY), default="nu1")
    sp.add_argument("--center", type=float, default=1.0)
    sp.add_argument("--eps-ladder", default=None,
                    help='comma list, e.g. "0.1,0.05,0.025,0.0125"')
    sp.add_argument("--out", default=None)
    sp.add_argument("--fit-out", default=None,
                    help="also run the singular fit, write fit JSON here")

    sp = sub.add_parser("nsd-fit",
                        help="principal-value / Dirac coefficient extraction")
    sp.add_argument("--center", type=float, default=1.0)
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("bilinear-bench",
                        help="annulus operator norm scaling in j")
    sp.add_argument("--j-range", default="3:8")
    sp.add_argument("--shell", type=int, default=0)
    sp.add_argument("--norms", default="2,inf")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("evolve", help="time-integrate the quadratic flow")
    sp.add_argument("--out", default=None, help="norm trace CSV")
    sp.add_argument("--snapshots", default=None, help="snapshot directory")
    sp.add_argument("--svg", default=None, help="norm history SVG")

    sp = sub.add_parser("acceptance",
                        help="run the full acceptance suite, emit verdict")
    sp.add_argument("--out", default=None)

    sp = sub.add_parser("dump-eigenfunctions",
                        help="CSV of phase shifts (optionally radial waves)")
    sp.add_argument("--out", default=None)
    sp.add_argument("--table", default=None, help="table cache path")
    sp.add_argument("--waves-at", type=float, default=None,
                    help="emit per-radius wave values at this assembly node")
    sp.add_argument("--r-stride", type=int, default=8)

    return p


_COMMANDS = {
    "potential-check": cmd_potential_check,
    "eigen-table": cmd_eigen_table,
    "dft-check": cmd_dft_check,
    "nsd-scan": cmd_nsd_scan,
    "nsd-fit": cmd_nsd_fit,
    "bilinear-bench": cmd_bilinear_bench,
    "evolve": cmd_evolve,
    "acceptance": cmd_acceptance,
    "dump-eigenfunctions": cmd_dump_eigenfunctions,
}


def _error_json(exc: Exception, code: int) -> None:
    info = {"type": type(exc).__name__, "exit_code": code}
    if isinstance(exc, GuardError):
        info["guard"] = exc.guard
        if exc.detail:
            info["detail"] = exc.detail
    else:
        info["detail"] = str(exc)
    print(json.dumps({"error": info}), file=sys.stderr)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, args)
    except (GuardError, ValueError, OSError, KeyError) as exc:
        _error_json(exc, 2)
        return 2


if __name__ == "__main__":
    sys.exit(main())

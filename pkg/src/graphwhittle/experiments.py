"""Monte-Carlo harness: build the experiment from a config, run replicates in
a worker pool, and emit diffable report files.

Outputs (written atomically, temp file + rename):
  replicates.csv  one row per (replicate, kind): seed, theta_hat, std_error,
                  z, status
  summary.json    per-kind mean/sd/KS of z plus run metadata
  histogram.csv   40 equal bins of z over [-4, 4] plus overflow rows, for the
                  first requested kind; additional kinds get histogram_<kind>.csv
  config.json     echo sufficient to re-run the experiment exactly
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import kstest

from .config import ExperimentConfig, config_json
from .covariance import correction_matrix, pair_classes
from .errors import ConfigError, GraphWhittleError, InvalidParameterError
from .families import ParametricDensity, family_from_config
from .graphs import Graph, ball_radius_for_volume, build_graph, nested_subgraphs, normalize_weights
from .measures import SpectralMeasure, empirical_spectral_measure
from .sampling import GaussianSample, factorize_covariance, standard_normals
from .whittle import EstimationContext, fisher_information, maximize_likelihood

_HIST_LO, _HIST_HI, _HIST_BINS = -4.0, 4.0, 40


def build_host(cfg: ExperimentConfig) -> Graph:
    kind, size = cfg.graph_kind, cfg.graph_size
    if kind in ("path", "cycle"):
        g = build_graph(kind, length=size)
    elif kind in ("grid2d", "torus2d"):
        g = build_graph(kind, side=size)
    elif kind == "rhombus_chain":
        g = build_graph(kind, k=size)
    else:
        raise ConfigError(f"graph kind {kind!r} needs a programmatic builder")
    return normalize_weights(g)


def default_center(g: Graph) -> int:
    meta = g.meta
    if meta.get("kind") == "rhombus_chain":
        return 4 * (meta["k"] // 2)  # a left vertex, where balls hit 724 exactly
    if meta.get("kind") in ("grid2d", "torus2d"):
        s = meta["side"]
        return (s // 2) * s + s // 2
    return g.n_vertices // 2


def observation_window(cfg: ExperimentConfig, host: Graph):
    """The vertex window for estimation, plus a human-readable description."""
    if cfg.subgraph_kind == "ball":
        center = cfg.center if cfg.center >= 0 else default_center(host)
        if cfg.radii:
            radius = max(cfg.radii)
        else:
            radius, _ = ball_radius_for_volume(host, center, cfg.target_volume)
        subs = nested_subgraphs(host, "ball", center=center, radii=[radius])
        desc = f"ball(center={center}, radius={radius})"
    else:
        sides = list(cfg.radii) if cfg.radii else [int(round(math.sqrt(cfg.target_volume)))]
        subs = nested_subgraphs(host, "box", sides=sides)
        desc = f"box(side={max(sides)})"
    return subs.levels[-1], desc


_PROXY_OF = {"grid2d": "torus2d", "path": "cycle"}


def proxy_graph(cfg: ExperimentConfig) -> Graph:
    """A no-boundary (or negligible-boundary) stand-in for the infinite graph."""
    kind = _PROXY_OF.get(cfg.graph_kind, cfg.graph_kind)
    n = cfg.proxy_size
    if kind in ("path", "cycle"):
        g = build_graph(kind, length=n)
    elif kind in ("grid2d", "torus2d"):
        g = build_graph(kind, side=max(3, int(round(math.sqrt(n)))))
    elif kind == "rhombus_chain":
        g = build_graph(kind, k=max(1, n // 4))
    else:
        raise ConfigError(f"no spectral proxy rule for graph kind {kind!r}")
    return normalize_weights(g)


def spectral_proxy_measure(cfg: ExperimentConfig) -> SpectralMeasure:
    proxy = proxy_graph(cfg)
    return empirical_spectral_measure(proxy, np.arange(proxy.n_vertices),
                                      method=cfg.measure_method,
                                      moment_order=cfg.moment_order)


def build_family(cfg: ExperimentConfig) -> ParametricDensity:
    rho = None if cfg.rho == 0.0 else cfg.rho
    return family_from_config(cfg.family_kind, cfg.theta_min, cfg.theta_max,
                              cfg.truncation_order, rho)


@dataclass(eq=False)
class MonteCarloReport:
    config: ExperimentConfig
    m_n: int
    window_desc: str
    j_theta0: float
    z_scale: float
    rows: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    histograms: dict = field(default_factory=dict)
    warnings: tuple = ()

    def z_values(self, kind: str) -> np.ndarray:
        return np.array([r["z"] for r in self.rows
                         if r["kind"] == kind and r["status"] == "ok"])

    def theta_hats(self, kind: str) -> np.ndarray:
        return np.array([r["theta_hat"] for r in self.rows
                         if r["kind"] == kind and r["status"] == "ok"])

    def std_errors(self, kind: str) -> np.ndarray:
        return np.array([r["std_error"] for r in self.rows
                         if r["kind"] == kind and r["status"] == "ok"])


def _histogram(z: np.ndarray) -> list:
    edges = np.linspace(_HIST_LO, _HIST_HI, _HIST_BINS + 1)
    counts, _ = np.histogram(z, bins=edges)
    rows = [(-math.inf, _HIST_LO, int((z < _HIST_LO).sum()), 0.0)]
    for k in range(_HIST_BINS):
        mid = 0.5 * (edges[k] + edges[k + 1])
        dens = math.exp(-0.5 * mid * mid) / math.sqrt(2.0 * math.pi)
        rows.append((float(edges[k]), float(edges[k + 1]), int(counts[k]), dens))
    rows.append((_HIST_HI, math.inf, int((z > _HIST_HI).sum()), 0.0))
    return rows


def monte_carlo_context(cfg: ExperimentConfig):
    """Everything deterministic and replicate-independent, built once."""
    cfg.validate()
    host = build_host(cfg)
    window, desc = observation_window(cfg, host)
    family = build_family(cfg)
    mu = spectral_proxy_measure(cfg)

    correction = None
    warnings: list[str] = []
    if "unbiased" in cfg.kinds:
        radius = cfg.correction_radius or family.correction_radius
        if radius is None:
            raise ConfigError("unbiased estimation needs model.correction_radius "
                              "for families without AR/MA structure")
        sig_order = cfg.signature_order or (2 * radius + 4)
        classes = pair_classes(host, window, radius, sig_order)
        correction = correction_matrix(classes)

    ctx = EstimationContext(family=family, host=host, subset=window, mu=mu,
                            correction=correction)
    warnings.extend(ctx.warnings)

    k0 = ctx.covariance_at(cfg.theta0)
    factor = factorize_covariance(k0)
    if factor.jitter:
        warnings.append(f"covariance factorization used jitter {factor.jitter:g}")
    if correction is not None:
        ctx._delta_tables()  # build before threads share the context

    j0 = fisher_information(family, cfg.theta0, mu)
    info_scale = j0 if not cfg.legacy_section6_normalization else 2.0 * j0
    z_scale = math.sqrt(window.size * info_scale)
    return host, window, desc, family, mu, correction, ctx, factor, j0, z_scale, warnings


def run_monte_carlo(cfg: ExperimentConfig) -> MonteCarloReport:
    (_, window, desc, _, _, _, ctx, factor, j0, z_scale,
     warnings) = monte_carlo_context(cfg)
    m = window.size

    def one_replicate(r: int) -> list:
        z = standard_normals(cfg.seed, r, m)
        x = GaussianSample(values=factor.lower @ z, seed=cfg.seed, replicate=r,
                           theta0=cfg.theta0, factorization_jitter=factor.jitter)
        out = []
        for kind in cfg.kinds:
            row = {"replicate": r, "seed": cfg.seed, "kind": kind}
            try:
                res = maximize_likelihood(kind, x, ctx, tol=cfg.tol)
                row.update(theta_hat=res.theta_hat, std_error=res.std_error,
                           z=z_scale * (res.theta_hat - cfg.theta0), status="ok")
            except GraphWhittleError as exc:
                row.update(theta_hat=math.nan, std_error=math.nan, z=math.nan,
                           status=f"failed:{type(exc).__name__}")
            out.append(row)
        return out

    n_workers = cfg.workers or (os.cpu_count() or 1)
    rows: list = []
    if cfg.replicates:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for chunk in pool.map(one_replicate, range(cfg.replicates)):
                rows.extend(chunk)
    rows.sort(key=lambda row: (row["replicate"], cfg.kinds.index(row["kind"])))

    report = MonteCarloReport(config=cfg, m_n=m, window_desc=desc, j_theta0=j0,
                              z_scale=z_scale, rows=rows, warnings=tuple(warnings))
    for kind in cfg.kinds:
        z = report.z_values(kind)
        failed = sum(1 for r in rows if r["kind"] == kind and r["status"] != "ok")
        entry = {"kind": kind, "n_ok": int(z.size), "n_failed": failed,
                 "mean_z": float(z.mean()) if z.size else math.nan,
                 "sd_z": float(z.std(ddof=1)) if z.size > 1 else math.nan,
                 "ks_z": float(kstest(z, "norm").statistic) if z.size else math.nan}
        report.summary[kind] = entry
        report.histograms[kind] = _histogram(z)
    return report


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _float(x) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def emit_report(report: MonteCarloReport, fmt: str = "csv", out_dir: str | None = None) -> list:
    """Write the report file set; returns the paths written."""
    if fmt not in ("csv", "json"):
        raise InvalidParameterError(f"unknown report format {fmt!r}")
    out = out_dir if out_dir is not None else report.config.out_dir
    os.makedirs(out, exist_ok=True)
    paths = []

    header = "replicate,seed,kind,theta_hat,std_error,z,status"
    if fmt == "csv":
        lines = [header]
        for r in report.rows:
            lines.append(f"{r['replicate']},{r['seed']},{r['kind']},"
                         f"{_float(r['theta_hat'])},{_float(r['std_error'])},"
                         f"{_float(r['z'])},{r['status']}")
        rep_path = os.path.join(out, "replicates.csv")
        _atomic_write(rep_path, "\n".join(lines) + "\n")
    else:
        rep_path = os.path.join(out, "replicates.json")
        _atomic_write(rep_path, json.dumps(report.rows, indent=1))
    paths.append(rep_path)

    summary = {
        "m_n": report.m_n,
        "window": report.window_desc,
        "j_theta0": report.j_theta0,
        "z_scale": report.z_scale,
        "replicates": report.config.replicates,
        "kinds": list(report.config.kinds),
        "per_kind": report.summary,
        "warnings": list(report.warnings),
    }
    sum_path = os.path.join(out, "summary.json")
    _atomic_write(sum_path, json.dumps(summary, indent=2, sort_keys=True))
    paths.append(sum_path)

    hist_header = "bin_lo,bin_hi,count,normal_density_at_mid"
    for pos, kind in enumerate(report.config.kinds):
        lines = [hist_header]
        for lo, hi, count, dens in report.histograms[kind]:
            lines.append(f"{_float(lo)},{_float(hi)},{count},{_float(dens)}")
        name = "histogram.csv" if pos == 0 else f"histogram_{kind}.csv"
        hist_path = os.path.join(out, name)
        _atomic_write(hist_path, "\n".join(lines) + "\n")
        paths.append(hist_path)

    cfg_path = os.path.join(out, "config.json")
    _atomic_write(cfg_path, config_json(report.config))
    paths.append(cfg_path)
    return paths


def parse_replicates_csv(path) -> list:
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            vals = line.strip().split(",")
            row = dict(zip(header, vals))
            row["replicate"] = int(row["replicate"])
            row["seed"] = int(row["seed"])
            for key in ("theta_hat", "std_error", "z"):
                row[key] = float(row[key])
            rows.append(row)
    return rows


def reproduce_reference_experiment(out_dir: str = "out", replicates: int = 500,
                                   seed: int = 20260811, workers: int = 0,
                                   proxy_size: int = 10000,
                                   legacy_normalization: bool = False) -> MonteCarloReport:
    """The reference study: rhombus chain, theta0 = 1/2, ball of 724 vertices,
    15 series coefficients, ~10^4-vertex spectral proxy, tilde and unbiased."""
    cfg = ExperimentConfig(kinds=("tilde", "unbiased"), replicates=replicates,
                           seed=seed, workers=workers, out_dir=out_dir,
                           proxy_size=proxy_size,
                           legacy_section6_normalization=legacy_normalization).validate()
    report = run_monte_carlo(cfg)
    if report.m_n != cfg.target_volume:
        report.warnings = report.warnings + (
            f"window volume {report.m_n} differs from target {cfg.target_volume}",)
    emit_report(report, "csv", out_dir)
    return report

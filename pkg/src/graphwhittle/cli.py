"""Command-line driver.

Subcommands: graph, simulate, estimate, mc, verify, reproduce-ref.
Exit codes: 0 ok, 2 config error, 3 numerical error, 4 IO error.
Errors print a single machine-parsable line 'error[<category>]: <message>'.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import experiments
from .config import ExperimentConfig, load_config, replace
from .errors import ConfigError, GraphWhittleError, InvalidParameterError
from .graphs import save_graph
from .sampling import GaussianSample, factorize_covariance, sample_field, save_samples_csv
from .suites import standard_suite
from .verification import save_reports_jsonl
from .whittle import maximize_likelihood

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphwhittle")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("graph", "simulate", "estimate", "mc", "verify", "reproduce-ref"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None, help="TOML config file")
        p.add_argument("--seed", type=int, default=None, help="64-bit master seed")
        p.add_argument("--replicates", type=int, default=None)
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--kind", action="append", default=None,
                       choices=("exact", "bar", "tilde", "unbiased"))
        p.add_argument("--legacy-section6-normalization", action="store_true")
        if name == "estimate":
            p.add_argument("--samples", type=str, required=True,
                           help="samples CSV produced by the simulate command")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig().validate()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.replicates is not None:
        changes["replicates"] = args.replicates
    if args.out is not None:
        changes["out_dir"] = args.out
    if args.workers is not None:
        changes["workers"] = args.workers
    if args.kind:
        changes["kinds"] = tuple(dict.fromkeys(args.kind))
    if args.legacy_section6_normalization:
        changes["legacy_section6_normalization"] = True
    return replace(cfg, **changes) if changes else cfg


def _cmd_graph(cfg: ExperimentConfig) -> int:
    host = experiments.build_host(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    save_graph(host, os.path.join(cfg.out_dir, "graph.txt"))
    mu = experiments.spectral_proxy_measure(cfg)
    mu.save_csv(os.path.join(cfg.out_dir, "spectral_measure.csv"))
    print(f"wrote graph ({host.n_vertices} vertices) and spectral measure "
          f"({mu.n_atoms} atoms) to {cfg.out_dir}")
    return EXIT_OK


def _cmd_simulate(cfg: ExperimentConfig) -> int:
    host = experiments.build_host(cfg)
    window, desc = experiments.observation_window(cfg, host)
    family = experiments.build_family(cfg)
    from .whittle import EstimationContext
    ctx = EstimationContext(family=family, host=host, subset=window)
    factor = factorize_covariance(ctx.covariance_at(cfg.theta0))
    samples = sample_field(factor, cfg.seed, cfg.replicates, theta0=cfg.theta0)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "samples.csv")
    save_samples_csv(samples, window, path)
    print(f"wrote {cfg.replicates} field replicates over {desc} (m={window.size}) to {path}")
    return EXIT_OK


def _cmd_estimate(cfg: ExperimentConfig, samples_path: str) -> int:
    (_, window, _, _, _, _, ctx, factor, _, _, _) = experiments.monte_carlo_context(cfg)
    rows = np.loadtxt(samples_path, delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[1] != window.size + 1:
        raise InvalidParameterError(
            f"samples have {rows.shape[1] - 1} columns, window has {window.size}")
    os.makedirs(cfg.out_dir, exist_ok=True)
    out_path = os.path.join(cfg.out_dir, "estimates.jsonl")
    with open(out_path, "w") as fh:
        for row in rows:
            x = GaussianSample(values=row[1:], seed=cfg.seed, replicate=int(row[0]),
                               theta0=None, factorization_jitter=factor.jitter)
            for kind in cfg.kinds:
                res = maximize_likelihood(kind, x, ctx, tol=cfg.tol)
                record = {"replicate": int(row[0])} | res.to_dict()
                fh.write(json.dumps(record) + "\n")
    print(f"wrote estimates for {rows.shape[0]} replicates x {len(cfg.kinds)} kinds "
          f"to {out_path}")
    return EXIT_OK


def _cmd_mc(cfg: ExperimentConfig) -> int:
    report = experiments.run_monte_carlo(cfg)
    paths = experiments.emit_report(report, "csv", cfg.out_dir)
    for kind, entry in report.summary.items():
        print(f"kind={kind} m={report.m_n} ok={entry['n_ok']} "
              f"mean_z={entry['mean_z']:.4f} sd_z={entry['sd_z']:.4f} "
              f"ks={entry['ks_z']:.4f}")
    print("wrote " + ", ".join(paths))
    return EXIT_OK


def _cmd_verify(cfg: ExperimentConfig) -> int:
    reports = standard_suite(seed=cfg.seed)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "lemma_reports.jsonl")
    save_reports_jsonl(reports, path)
    n_fail = sum(not r.passed for r in reports)
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        print(f"{status} {r.lemma_id:<14} measured={r.measured:.3e} "
              f"bound={r.bound:.3e} ({r.instance})")
    print(f"wrote {len(reports)} reports to {path}")
    if n_fail:
        print(f"error[numerical]: {n_fail} lemma checks failed", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_reproduce(cfg: ExperimentConfig) -> int:
    report = experiments.reproduce_reference_experiment(
        out_dir=cfg.out_dir, replicates=cfg.replicates, seed=cfg.seed,
        workers=cfg.workers, proxy_size=cfg.proxy_size,
        legacy_normalization=cfg.legacy_section6_normalization)
    for kind, entry in report.summary.items():
        print(f"kind={kind} m={report.m_n} mean_z={entry['mean_z']:.4f} "
              f"sd_z={entry['sd_z']:.4f} ks={entry['ks_z']:.4f}")
    for warning in report.warnings:
        print(f"warning: {warning}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "graph":
            return _cmd_graph(cfg)
        if args.command == "simulate":
            return _cmd_simulate(cfg)
        if args.command == "estimate":
            return _cmd_estimate(cfg, args.samples)
        if args.command == "mc":
            return _cmd_mc(cfg)
        if args.command == "verify":
            return _cmd_verify(cfg)
        if args.command == "reproduce-ref":
            cfg = replace(cfg, kinds=("tilde", "unbiased"))
            return _cmd_reproduce(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return EXIT_IO
    except GraphWhittleError as exc:
        print(f"error[numerical]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

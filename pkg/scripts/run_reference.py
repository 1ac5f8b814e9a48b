#!/usr/bin/env python3
"""Run the reference rhombus-chain study and print the per-kind summaries.

Equivalent to `graphwhittle reproduce-ref`; kept as a script for quick edits
to replicate count, seed, or proxy size during exploratory runs.
"""

import argparse

from graphwhittle.experiments import reproduce_reference_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/reference")
    ap.add_argument("--replicates", type=int, default=500)
    ap.add_argument("--seed", type=int, default=20260811)
    ap.add_argument("--workers", type=int, default=0)
    ap.add_argument("--proxy-size", type=int, default=10000)
    ap.add_argument("--legacy-normalization", action="store_true")
    args = ap.parse_args()

    report = reproduce_reference_experiment(
        out_dir=args.out, replicates=args.replicates, seed=args.seed,
        workers=args.workers, proxy_size=args.proxy_size,
        legacy_normalization=args.legacy_normalization)
    print(f"window: {report.window_desc}  m_n={report.m_n}  "
          f"J(theta0)={report.j_theta0:.5f}")
    for kind, s in report.summary.items():
        print(f"{kind:>8}: mean_z={s['mean_z']:+.4f}  sd_z={s['sd_z']:.4f}  "
              f"KS={s['ks_z']:.4f}  ok={s['n_ok']}")
    for w in report.warnings:
        print(f"warning: {w}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Run the full trace-bound verification suite and write JSONL reports."""

import argparse
import sys

from graphwhittle.suites import standard_suite
from graphwhittle.verification import save_reports_jsonl


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/lemma_reports.jsonl")
    ap.add_argument("--seed", type=int, default=20260811)
    args = ap.parse_args()

    reports = standard_suite(seed=args.seed)
    save_reports_jsonl(reports, args.out)
    failures = 0
    for r in reports:
        mark = "pass" if r.passed else "FAIL"
        failures += not r.passed
        print(f"{mark}  {r.lemma_id:<14} measured={r.measured:.4e} "
              f"bound={r.bound:.4e}  {r.instance}")
    print(f"{len(reports)} checks, {failures} failures -> {args.out}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

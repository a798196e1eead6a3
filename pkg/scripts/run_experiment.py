"""Run one benchmark experiment and write results/<name>.json.

Usage: python scripts/run_experiment.py NAME [--reps N] [--seed S] [--out DIR]
"""

import argparse
import sys

from sqls.experiments import EXPERIMENTS, run_experiment


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("name", choices=sorted(EXPERIMENTS))
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    args = p.parse_args()
    report = run_experiment(args.name, args.reps, args.seed, log=lambda s: print(s, flush=True))
    exp = EXPERIMENTS[args.name]
    path = report.save(f"{args.out}/{args.name}.json")
    print(f"{args.name}: {report.successes}/{len(report.runs)} successful "
          f"(need {exp.required}); {'PASS' if report.passed() else 'FAIL'}; wrote {path}")
    return 0 if report.passed() else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``solve``, ``resources``, ``shadow-bench``, ``decompose``."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .ansatz import build
from .cost import contract_observable, raw_term_count
from .hadamard import circuits_per_step_preprocessed, circuits_per_step_sqls, circuits_per_step_vqls
from .pauli import PauliString, PauliSum, decompose_dense, format_pauli_sum, to_dense
from .problems import PROBLEMS, LinearProblem, get_problem, random_k_local_strings, split_to_pauli, unitary_split
from .shadows import collect_histogram, default_batches, estimate_all, shadow_size
from .simulator import expectations
from .solver import SolverConfig, parse_schedule, solve

# per-problem defaults matching the reference experiments
DEFAULT_OPTIMIZER = {"iqlsp": "powell"}
DEFAULT_ANSATZ = {"rqlsp1": "hwe", "rqlsp2": "hwe"}


class CliError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """``"4..2500"`` (log-spaced, 25 points), ``"4:100:8"`` (step) or ``"4,8,16"``."""
    if ".." in text:
        lo, hi = (int(v) for v in text.split(".."))
        pts = np.unique(np.round(np.geomspace(lo, hi, 25)).astype(int))
        return [int(v) for v in pts]
    if ":" in text:
        lo, hi, step = (int(v) for v in text.split(":"))
        return list(range(lo, hi + 1, step))
    return [int(v) for v in text.split(",")]


def load_problem(spec: str) -> LinearProblem:
    if spec in PROBLEMS:
        return get_problem(spec)
    path = Path(spec)
    if path.is_dir():
        return LinearProblem.load(path)
    raise CliError(f"unknown problem {spec!r}; choose from {sorted(PROBLEMS)} or give a bundle directory")


def read_dense(path) -> np.ndarray:
    """First line ``dim``, then ``dim*dim`` row-major ``re im`` pairs (whitespace separated)."""
    try:
        tokens = Path(path).read_text().split()
        dim = int(tokens[0])
        vals = np.array([float(t) for t in tokens[1:]])
    except (ValueError, IndexError) as e:
        raise CliError(f"cannot parse matrix file {path}: {e}") from None
    if dim < 1 or vals.size != 2 * dim * dim:
        raise CliError(f"matrix file {path}: expected {2 * dim * dim} numbers after dim, got {vals.size}")
    return (vals[0::2] + 1j * vals[1::2]).reshape(dim, dim)


def write_dense(m: np.ndarray, path) -> None:
    lines = [str(m.shape[0])]
    for row in m:
        lines.append(" ".join(f"{float(v.real)!r} {float(v.imag)!r}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


# solve ---------------------------------------------------------------------------

def _run_one(job):
    problem, family, layers, config, out = job
    result = solve(problem, build(family, problem.n, layers), config)
    result.save(out)
    return [out.name, result.evaluations, int(result.converged),
            result.trace_distance_final, result.fidelity_final]


def cmd_solve(args) -> int:
    problem = load_problem(args.problem)
    name = problem.label
    optimizer = args.optimizer or DEFAULT_OPTIMIZER.get(name, "adam")
    family = args.ansatz or DEFAULT_ANSATZ.get(name, "real")
    if args.reps < 1:
        raise CliError("--reps must be at least 1")
    schedule = parse_schedule(args.schedule) if args.schedule else None
    seeds = np.random.SeedSequence(args.seed).generate_state(args.reps)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for r, seed in enumerate(seeds):
        config = SolverConfig(
            optimizer=optimizer, eps_shadow=args.eps_shadow, schedule=schedule,
            shadow_constant=args.shadow_constant, batches=args.batches,
            learning_rate=args.lr, max_iterations=args.max_iter, max_evaluations=args.max_evals,
            termination=args.termination, eps=args.eps, exact=args.exact,
            preprocess=not args.no_preprocess, seed=int(seed),
        )
        jobs.append((problem, family, args.layers, config, out / f"run_{r:03d}"))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_run_one, jobs))
    else:
        rows = [_run_one(j) for j in jobs]
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "evaluations", "converged", "final_td", "final_fid"])
        w.writerows(rows)
    conv = sum(r[2] for r in rows)
    print(f"{name}: {conv}/{len(rows)} runs reached trace distance <= {args.eps}; summary in {out / 'summary.csv'}")
    return 0


# resources ---------------------------------------------------------------------------

def _random_pp_counts(n, L, k, systems, shots, eps, rng):
    """Mean N_PP-based counts over random ``L``-term, k-local systems with ``U = H^n``."""
    W = PauliSum.from_terms([(1.0, PauliString.single(n, q, "X")) for q in range(n)], n)
    vq, sq = [], []
    for _ in range(systems):
        strings = random_k_local_strings(n, L, k, rng)
        A = PauliSum.from_terms(list(zip(rng.uniform(-1, 1, L), strings)), n)
        table = contract_observable(A, W, raw_term_count(L, 1, n))
        vq.append(circuits_per_step_preprocessed(table.n_pp, shots, "hadamard"))
        sq.append(circuits_per_step_preprocessed(table.n_pp, eps, "shadow", k))
    return float(np.mean(vq)), float(np.mean(sq))


def cmd_resources(args) -> int:
    ks = [int(v) for v in args.k.split(",")]
    Ls = parse_range(args.L)
    rng = np.random.default_rng(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "resources.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["L", "k", "vqls", "sqls", "vqls_pp", "sqls_pp"])
        for k in ks:
            for L in Ls:
                row = [L, k, circuits_per_step_vqls(L, args.n, args.shots),
                       circuits_per_step_sqls(L, args.n, k, args.eps), "", ""]
                if args.random_systems and not args.no_preprocess:
                    vq, sq = _random_pp_counts(args.n, L, k, args.random_systems, args.shots,
                                               args.eps, rng)
                    row[4:] = [vq, sq]
                w.writerow(row)
    print(f"wrote {path}")
    return 0


# shadow-bench -----------------------------------------------------------------------

def _random_state(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


def cmd_shadow_bench(args) -> int:
    """Median absolute estimator error against the exact value over random states and strings."""
    rng = np.random.default_rng(args.seed)
    n = args.n
    ks = [int(v) for v in args.k.split(",")]
    eps_list = [float(v) for v in args.eps_list.split(",")]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "shadow_bench.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["M", "k", "eps", "budget", "empirical_err"])
        for k in ks:
            for eps in eps_list:
                budget = shadow_size(args.M, k, eps, args.shadow_constant)
                batches = args.batches or default_batches(args.M)
                errs = []
                for _ in range(args.trials):
                    state = _random_state(n, rng)
                    strings = ([PauliString.identity(n)] if k == 0 else
                               random_k_local_strings(n, min(args.M, 3 ** k), k, rng))
                    xs = [p.x for p in strings]
                    zs = [p.z for p in strings]
                    exact = expectations(state, xs, zs).real
                    h = collect_histogram(state, budget, batches, rng)
                    idx = [_index(p) for p in strings]
                    est = estimate_all(h)[idx]
                    errs.append(float(np.max(np.abs(est - exact))))
                w.writerow([args.M, k, eps, budget, float(np.median(errs))])
    print(f"wrote {path}")
    return 0


def _index(p: PauliString) -> int:
    from .pauli import pauli_index

    return int(pauli_index(p.n, p.x, p.z))


# decompose -------------------------------------------------------------------------

def cmd_decompose(args) -> int:
    m = read_dense(args.matrix)
    dim = m.shape[0]
    if dim & (dim - 1):
        raise CliError(f"matrix dimension {dim} is not a power of two")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    split = unitary_split(m)
    A = split_to_pauli(split)
    (out / "A.pauli").write_text(format_pauli_sum(A))
    for name, f in zip(("U_B", "V_B", "U_C", "V_C"), split.factors):
        (out / f"{name}.pauli").write_text(format_pauli_sum(decompose_dense(f)))
    report = {
        "dim": dim,
        "terms": len(A),
        "split_residual": float(np.abs(split.reconstruct() - m).max()),
        "pauli_residual": float(np.abs(to_dense(A) - m).max()),
        "factor_unitarity": [float(np.abs(f.conj().T @ f - np.eye(dim)).max()) for f in split.factors],
    }
    (out / "report.json").write_text(json.dumps(report, indent=2))
    print(f"{len(A)} Pauli terms; reconstruction residual {report['pauli_residual']:.3e}")
    return 0


# parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for repetitions")
    common.add_argument("--out", default="runs", help="output directory")
    common.add_argument("--no-preprocess", action="store_true", help="skip term contraction")
    common.add_argument("--exact", action="store_true", help="exact (oracle) cost instead of shadows")

    p = argparse.ArgumentParser(prog="sqls", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="run seeded variational solves")
    s.add_argument("--problem", required=True, help=f"one of {sorted(PROBLEMS)} or a bundle directory")
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--optimizer", choices=("adam", "powell"))
    s.add_argument("--ansatz", choices=("hwe", "real"))
    s.add_argument("--layers", type=int, default=4)
    s.add_argument("--eps", type=float, default=0.01, help="trace-distance (or gamma) threshold")
    s.add_argument("--eps-shadow", type=float, default=0.01)
    s.add_argument("--schedule", help='staged eps_shadow, e.g. "0:0.1,250:0.01"')
    s.add_argument("--shadow-constant", type=float, default=1.0)
    s.add_argument("--batches", type=int)
    s.add_argument("--lr", type=float, default=0.1)
    s.add_argument("--max-iter", type=int, default=1000)
    s.add_argument("--max-evals", type=int)
    s.add_argument("--termination", choices=("trace_distance", "gamma", "plateau"),
                   default="trace_distance")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("resources", parents=[common], help="circuits-per-step curves")
    r.add_argument("--n", type=int, default=50)
    r.add_argument("--k", default="2,3,5,7")
    r.add_argument("--L", default="4..2500")
    r.add_argument("--eps", type=float, default=0.01)
    r.add_argument("--shots", type=int, default=10000)
    r.add_argument("--random-systems", type=int, default=0,
                   help="random systems per point for the pre-processed columns")
    r.set_defaults(func=cmd_resources)

    b = sub.add_parser("shadow-bench", parents=[common], help="estimator error versus budget")
    b.add_argument("--n", type=int, default=4)
    b.add_argument("--k", default="1,2,3")
    b.add_argument("--M", type=int, default=16)
    b.add_argument("--eps-list", default="0.2,0.1,0.05")
    b.add_argument("--trials", type=int, default=20)
    b.add_argument("--batches", type=int)
    b.add_argument("--shadow-constant", type=float, default=1.0)
    b.set_defaults(func=cmd_shadow_bench)

    d = sub.add_parser("decompose", parents=[common], help="four-unitary split and Pauli decomposition")
    d.add_argument("matrix", help="dense matrix file")
    d.set_defaults(func=cmd_decompose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, ArithmeticError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

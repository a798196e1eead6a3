"""Variational solve loop: shadow (or exact) cost estimates driving Adam or Powell."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .ansatz import AnsatzCircuit, build, init_params, prepare_state
from .cost import (
    CostTermTable,
    CostValue,
    UnstableDenominatorError,
    build_terms,
    contract_terms,
    evaluate_exact,
    evaluate_shadow,
    termination_gamma,
)
from .pauli import DimensionError
from .problems import LinearProblem
from .shadows import collect_histogram, default_batches, shadow_size

OPTIMIZERS = ("adam", "powell")
TERMINATIONS = ("trace_distance", "gamma", "plateau")
MAX_DENOMINATOR_RETRIES = 6


@dataclass
class SolverConfig:
    optimizer: str = "adam"
    eps_shadow: float = 0.01
    schedule: tuple[tuple[int, float], ...] | None = None  # (iteration, eps_shadow) stages
    shadow_constant: float = 1.0
    batches: int | None = None          # median-of-means batches; None -> default_batches(N_PP)
    learning_rate: float = 0.1
    lr_floor: float = 0.001
    decay_window: int = 50
    decay_threshold: float = 0.01       # relative improvement that counts as progress
    max_iterations: int = 1000
    max_evaluations: int | None = None
    termination: str = "trace_distance"
    eps: float = 0.01                   # terminator threshold
    exact: bool = False                 # oracle cost instead of shadows
    preprocess: bool = True
    init_sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")
        if self.termination not in TERMINATIONS:
            raise ValueError(f"termination must be one of {TERMINATIONS}")
        if self.schedule is not None:
            self.schedule = tuple(sorted((int(i), float(e)) for i, e in self.schedule))
            if not self.schedule or self.schedule[0][0] != 0:
                raise ValueError("schedule must start at iteration 0")
        for e in self.eps_values():
            if not 0 < e <= 1:
                raise ValueError(f"eps_shadow {e} outside (0, 1]")
        if not 0 < self.lr_floor <= self.learning_rate:
            raise ValueError("need 0 < lr_floor <= learning_rate")
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    def eps_values(self) -> list[float]:
        return [e for _, e in self.schedule] if self.schedule else [self.eps_shadow]

    def eps_at(self, iteration: int) -> float:
        if not self.schedule:
            return self.eps_shadow
        current = self.schedule[0][1]
        for start, e in self.schedule:
            if iteration >= start:
                current = e
        return current


def parse_schedule(text: str) -> tuple[tuple[int, float], ...]:
    """``"0:0.1,250:0.01"`` -> ``((0, 0.1), (250, 0.01))``."""
    stages = []
    for part in text.split(","):
        it, _, eps = part.partition(":")
        if not eps:
            raise ValueError(f"bad schedule stage {part!r}; expected ITER:EPS")
        stages.append((int(it), float(eps)))
    return tuple(stages)


@dataclass
class TraceRow:
    iteration: int
    cost: float
    eps_shadow: float
    budget: int
    cumulative_circuits: int
    trace_distance: float


@dataclass
class SolveResult:
    params_opt: np.ndarray
    state: np.ndarray
    cost_trace: list[TraceRow]
    trace_distance_final: float
    fidelity_final: float
    iterations: int
    evaluations: int
    gradient_evaluations: int
    converged: bool
    best_trace_distance: float = field(default=math.inf)

    def save(self, directory) -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        with open(d / "trace.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "cost", "eps_shadow", "budget", "cumulative_circuits",
                        "trace_distance"])
            for r in self.cost_trace:
                w.writerow([r.iteration, repr(r.cost), r.eps_shadow, r.budget,
                            r.cumulative_circuits, repr(r.trace_distance)])
        meta = {
            "params_opt": [float(v) for v in self.params_opt],
            "trace_distance_final": self.trace_distance_final,
            "fidelity_final": self.fidelity_final,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "gradient_evaluations": self.gradient_evaluations,
            "converged": self.converged,
        }
        (d / "result.json").write_text(json.dumps(meta, indent=2))
        with open(d / "solution.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "re", "im"])
            for i, a in enumerate(self.state):
                w.writerow([i, repr(float(a.real)), repr(float(a.imag))])
        return d


# state metrics -------------------------------------------------------------

def _check_pair(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"state sizes differ: {a.shape} vs {b.shape}")


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    _check_pair(a, b)
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Pure-state trace distance ``sqrt(1 - |<a|b>|**2)``."""
    return math.sqrt(max(0.0, 1.0 - fidelity(a, b)))


# cost estimation -------------------------------------------------------------

@dataclass
class Estimator:
    """Evaluates the cost at a parameter point, exactly or from a fresh shadow."""

    table: CostTermTable
    circuit: AnsatzCircuit
    rng: np.random.Generator
    exact: bool = False
    shadow_constant: float = 1.0
    batches: int | None = None
    evaluations: int = 0
    circuits: int = 0  # snapshots drawn so far, retries included

    def budget(self, eps: float) -> int:
        return shadow_size(max(self.table.n_pp, 1), self.table.max_locality, eps,
                           self.shadow_constant)

    def value(self, params, eps: float) -> CostValue:
        self.evaluations += 1
        state = prepare_state(self.circuit, params)
        if self.exact:
            return evaluate_exact(self.table, state)
        size = self.budget(eps)
        batches = self.batches or default_batches(self.table.n_pp)
        for _ in range(MAX_DENOMINATOR_RETRIES):
            h = collect_histogram(state, size, batches, self.rng)
            self.circuits += size
            try:
                return evaluate_shadow(self.table, h)
            except UnstableDenominatorError:
                size *= 2
        raise UnstableDenominatorError("omega estimate stayed non-positive after retries")


def cost_table(problem: LinearProblem, preprocess: bool = True) -> CostTermTable:
    if preprocess:
        return contract_terms(problem.A, problem.U)
    return build_terms(problem.A, problem.U)


def gradient(table: CostTermTable, circuit: AnsatzCircuit, params, estimator: Estimator,
             eps: float = 0.01) -> np.ndarray:
    """Parameter-shift gradient of the cost via the quotient rule.

    ``mu`` and ``omega`` are evaluated at ``theta_j +- pi/2`` (one fresh shadow
    per shifted point in shadow mode) and at ``theta`` itself.
    """
    params = np.asarray(params, dtype=float)
    n = table.n
    centre = estimator.value(params, eps)
    grad = np.empty(params.shape[0])
    for j in range(params.shape[0]):
        shift = np.zeros_like(params)
        shift[j] = np.pi / 2
        plus = estimator.value(params + shift, eps)
        minus = estimator.value(params - shift, eps)
        dmu = (plus.mu - minus.mu) / 2
        domega = (plus.omega - minus.omega) / 2
        grad[j] = -(dmu * centre.omega - centre.mu * domega) / (2 * n * centre.omega ** 2)
    return grad


# optimizers -----------------------------------------------------------------

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size))


def adam_step(state: AdamState, params, grad, lr: float) -> np.ndarray:
    """One canonical Adam update; ``state`` moments are updated in place."""
    grad = np.asarray(grad, dtype=float)
    state.t += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1 - state.beta2) * grad ** 2
    m_hat = state.m / (1 - state.beta1 ** state.t)
    v_hat = state.v / (1 - state.beta2 ** state.t)
    return np.asarray(params, dtype=float) - lr * m_hat / (np.sqrt(v_hat) + state.eps)


class _Stop(Exception):
    pass


@dataclass
class PowellOutcome:
    params: np.ndarray
    value: float
    evaluations: int
    stopped: bool      # halted by the caller's stop test
    exhausted: bool    # evaluation budget used up


def powell_search(cost, params0, max_evaluations: int = 5000, xtol: float = 1e-4,
                  ftol: float = 1e-4, should_stop=None, restarts: bool = True) -> PowellOutcome:
    """Gradient-free direction-set minimization (scipy's modified Powell).

    Every call of ``cost`` is counted. ``should_stop(params, value)`` is asked
    after each evaluation and halts the search when true. With ``restarts``
    the search is relaunched from its best point while budget remains.
    """
    x0 = np.asarray(params0, dtype=float).copy()
    count = 0
    best = (math.inf, x0)

    def f(x):
        nonlocal count, best
        if count >= max_evaluations:
            raise _Stop("budget")
        count += 1
        val = float(cost(x))
        if val < best[0]:
            best = (val, np.array(x, dtype=float))
        if should_stop is not None and should_stop(x, val):
            best = (val, np.array(x, dtype=float))
            raise _Stop("converged")
        return val

    start = x0
    while True:
        before = count
        try:
            res = minimize(f, start, method="Powell",
                           options={"xtol": xtol, "ftol": ftol, "maxfev": max_evaluations - count})
        except _Stop as e:
            return PowellOutcome(best[1], best[0], count, str(e) == "converged",
                                 str(e) == "budget")
        start = np.asarray(res.x, dtype=float)
        if not restarts or count >= max_evaluations or count - before <= 2 * len(x0) + 1:
            return PowellOutcome(best[1], best[0], count, False, count >= max_evaluations)


# driver ------------------------------------------------------------------------

def solve(problem: LinearProblem, circuit: AnsatzCircuit | None = None,
          config: SolverConfig | None = None, params0=None) -> SolveResult:
    """Minimize the local cost over ``circuit`` parameters for ``problem``."""
    config = config or SolverConfig()
    circuit = circuit or build("real", problem.n, 4)
    if circuit.n != problem.n:
        raise DimensionError("ansatz and problem sizes differ")
    rng = np.random.default_rng(config.seed)
    table = cost_table(problem, config.preprocess)
    target = problem.exact_solution
    kappa = problem.kappa
    gamma = termination_gamma(problem.n, kappa, config.eps)
    est = Estimator(table, circuit, rng, config.exact, config.shadow_constant, config.batches)
    params = (np.asarray(params0, dtype=float) if params0 is not None
              else init_params(circuit, rng, config.init_sigma))

    trace: list[TraceRow] = []
    best_td = math.inf

    def record(it, cost, eps, x):
        nonlocal best_td
        td = trace_distance(prepare_state(circuit, x), target)
        best_td = min(best_td, td)
        trace.append(TraceRow(it, float(cost), eps, est.budget(eps), est.circuits, td))
        return td

    def done(td, cost):
        if config.termination == "trace_distance":
            return td <= config.eps
        if config.termination == "gamma":
            return cost <= gamma
        return False

    converged = False
    grad_evals = 0
    iterations = 0

    if config.optimizer == "powell":
        budget = config.max_evaluations or 5000

        def cost_fn(x):
            eps = config.eps_at(est.evaluations)
            c = est.value(x, eps).cost
            record(est.evaluations, c, eps, x)
            return c

        out = powell_search(cost_fn, params, budget,
                            should_stop=lambda x, c: done(trace[-1].trace_distance, c))
        params = out.params
        converged = out.stopped
        iterations = out.evaluations
    else:
        adam = AdamState.zeros(circuit.param_count)
        lr = config.learning_rate
        costs: list[float] = []
        since_decay = 0
        budget = config.max_evaluations
        for it in range(config.max_iterations):
            eps = config.eps_at(it)
            c = est.value(params, eps).cost
            td = record(it, c, eps, params)
            # schedule decisions read the oracle cost, like the trace-distance terminator
            costs.append(c if config.exact else evaluate_exact(table, prepare_state(circuit, params)).cost)
            iterations = it + 1
            if done(td, c):
                converged = True
                break
            if config.termination == "plateau" and lr <= config.lr_floor and _stalled(costs, config):
                converged = True
                break
            if budget is not None and est.evaluations >= budget:
                break
            g = gradient(table, circuit, params, est, eps)
            grad_evals += 2 * circuit.param_count + 1
            params = adam_step(adam, params, g, lr)
            since_decay += 1
            if since_decay >= config.decay_window and _stalled(costs, config):
                lr = max(config.lr_floor, lr / 10)
                since_decay = 0

    state = prepare_state(circuit, params)
    td = trace_distance(state, target)
    return SolveResult(params, state, trace, td, fidelity(state, target), iterations,
                       est.evaluations - grad_evals, grad_evals, converged, best_td)


def _stalled(costs: list[float], config: SolverConfig) -> bool:
    w = config.decay_window
    if len(costs) < 2 * w:
        return False
    before = min(costs[:-w])
    recent = min(costs[-w:])
    return before - recent < config.decay_threshold * abs(before)


def config_dict(config: SolverConfig) -> dict:
    return asdict(config)

"""Variational quantum linear solver with classical-shadow cost estimation.

State-vector simulation, Pauli-string algebra, the local cost in Pauli form,
a shadow estimator, a Hadamard-test baseline and the benchmark problems.
"""

from .ansatz import build, init_params, prepare_state
from .cost import build_terms, contract_terms, evaluate_exact, evaluate_shadow, preprocess
from .pauli import PauliString, PauliSum, decompose_dense, parse_pauli_sum, to_dense
from .problems import LinearProblem, get_problem, unitary_split
from .shadows import collect, collect_histogram, shadow_size
from .solver import SolverConfig, SolveResult, solve

__all__ = [
    "LinearProblem", "PauliString", "PauliSum", "SolveResult", "SolverConfig",
    "build", "build_terms", "collect", "collect_histogram", "contract_terms", "decompose_dense",
    "evaluate_exact", "evaluate_shadow", "get_problem", "init_params", "parse_pauli_sum",
    "prepare_state", "preprocess", "shadow_size", "solve", "to_dense", "unitary_split",
]

"""Hadamard-test baseline: ancilla-interferometric estimates of beta and delta terms,
the symmetry-reduced cost evaluation built on them, and circuits-per-step models.

Every Hadamard test simulates the ``n + 1`` qubit circuit exactly (ancilla is
qubit index ``n``, the least significant bit) and samples the ancilla marginal.
With the ancilla prepared in ``|+>`` the probability of reading 0 is
``(1 + Re<W>)/2``; preparing ``S^dag H |0>`` instead gives ``(1 + Im<W>)/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzCircuit, prepare_state
from .cost import CostValue, _assemble
from .pauli import DimensionError, PauliString, PauliSum
from .shadows import shadow_size
from .simulator import (
    apply_1q,
    apply_controlled_matrix,
    apply_controlled_pauli,
    _FIXED,
)

PARTS = ("real", "imag")


@dataclass(frozen=True)
class HadamardJob:
    kind: str            # "beta" or "delta"
    indices: tuple       # (i, j) or (i, j, l, p, r) with r 1-based
    part: str            # "real" or "imag"
    shots: int

    def __post_init__(self):
        if self.kind not in ("beta", "delta"):
            raise ValueError(f"unknown job kind {self.kind!r}")
        if self.part not in PARTS:
            raise ValueError(f"part must be one of {PARTS}")
        if self.shots < 1:
            raise ValueError("shots must be at least 1")
        if self.kind == "delta" and self.indices[4] < 1:
            raise ValueError("delta qubit index r is 1-based")


def _extend(p: PauliString) -> PauliString:
    """Same string on ``n + 1`` qubits, identity on the trailing ancilla."""
    return PauliString(p.n + 1, p.x << 1, p.z << 1)


def _controlled(state: np.ndarray, op, n: int) -> np.ndarray:
    if isinstance(op, PauliString):
        if op.n != n:
            raise DimensionError(f"{op.n}-qubit operator in an {n}-qubit test")
        return apply_controlled_pauli(state, _extend(op), n)
    op = np.asarray(op)
    if op.shape != (1 << n, 1 << n):
        raise DimensionError(f"operator shape {op.shape} does not fit {n} qubits")
    return apply_controlled_matrix(state, op, n, tuple(range(n)))


def _adjoint(op):
    # Hermitian Pauli strings are their own adjoint
    return op if isinstance(op, PauliString) else np.asarray(op).conj().T


def ancilla_zero_probability(state: np.ndarray, ops, part: str = "real") -> float:
    """Exact ancilla P(0) of the Hadamard test for ``W = ops[-1] ... ops[0]`` on ``state``."""
    if part not in PARTS:
        raise ValueError(f"part must be one of {PARTS}")
    n = state.shape[0].bit_length() - 1
    anc = np.array([1.0, 0.0], dtype=complex)
    anc = _FIXED["H"] @ anc
    if part == "imag":
        anc = _FIXED["Sdag"] @ anc
    full = np.kron(state, anc)
    for op in ops:
        full = _controlled(full, op, n)
    full = apply_1q(full, _FIXED["H"], n)
    p0 = float(np.sum(np.abs(full[0::2]) ** 2))
    return min(max(p0, 0.0), 1.0)


def _sample_estimate(p0: float, shots: int, rng: np.random.Generator) -> float:
    if shots < 1:
        raise ValueError("shots must be at least 1")
    zeros = rng.binomial(shots, p0)
    return 2.0 * zeros / shots - 1.0


def hadamard_beta(circuit: AnsatzCircuit, params, A_i, A_j, shots: int,
                  rng: np.random.Generator, part: str = "real") -> float:
    """Estimate Re (or Im) of ``beta_ij = <x| A_j^dag A_i |x>``."""
    state = prepare_state(circuit, params)
    p0 = ancilla_zero_probability(state, [A_i, _adjoint(A_j)], part)
    return _sample_estimate(p0, shots, rng)


def _z_string(n: int, r: int) -> PauliString:
    if not 1 <= r <= n:
        raise IndexError(f"r={r} outside 1..{n}")
    return PauliString(n, 0, 1 << (n - r))


def delta_ops(n: int, A_i, A_j, U_l, U_p, r: int) -> list:
    """Controlled-operation order ``A_i, U_l^dag, Z_r, U_p, A_j^dag``."""
    return [A_i, _adjoint(U_l), _z_string(n, r), U_p, _adjoint(A_j)]


def hadamard_delta(circuit: AnsatzCircuit, params, A_i, A_j, U_l, U_p, r: int, shots: int,
                   rng: np.random.Generator, part: str = "real") -> float:
    """Estimate Re (or Im) of ``delta_ijlp^r = <x| A_j^dag U_p Z_r U_l^dag A_i |x>``."""
    state = prepare_state(circuit, params)
    p0 = ancilla_zero_probability(state, delta_ops(circuit.n, A_i, A_j, U_l, U_p, r), part)
    return _sample_estimate(p0, shots, rng)


# symmetry-reduced cost ------------------------------------------------------

def _is_real(c: complex) -> bool:
    return complex(c).imag == 0.0


def vqls_jobs(A: PauliSum, U: PauliSum, shots: int, paranoid: bool = False) -> list[HadamardJob]:
    """Jobs needed for one cost evaluation.

    ``beta_ii = 1`` is never measured. Of each conjugate pair only one member
    is measured: ``(i, j)`` with ``i < j`` for beta and the lexicographically
    smaller of ``(i, j, l, p)`` and ``(j, i, p, l)`` for delta. The imaginary
    part is measured only when the pair's coefficient product is complex
    (always, with ``paranoid``).
    """
    if A.n != U.n:
        raise DimensionError("A and U act on different qubit counts")
    n, LA, LU = A.n, len(A), len(U)
    a, u = A.coeffs, U.coeffs
    jobs = []
    for i in range(LA):
        for j in range(i + 1, LA):
            c = a[i] * np.conj(a[j])
            jobs.append(HadamardJob("beta", (i, j), "real", shots))
            if paranoid or not _is_real(c):
                jobs.append(HadamardJob("beta", (i, j), "imag", shots))
    for r in range(1, n + 1):
        for i in range(LA):
            for j in range(LA):
                for l in range(LU):
                    for p in range(LU):
                        if (i, l) > (j, p):
                            continue  # (j, i, p, l) is measured instead
                        c = a[i] * np.conj(a[j]) * u[p] * np.conj(u[l])
                        jobs.append(HadamardJob("delta", (i, j, l, p, r), "real", shots))
                        self_pair = (i, l) == (j, p)
                        if not self_pair and (paranoid or not _is_real(c)):
                            jobs.append(HadamardJob("delta", (i, j, l, p, r), "imag", shots))
    return jobs


def _term(U: PauliSum, idx: int) -> PauliString:
    return PauliString(U.n, int(U.xs[idx]), int(U.zs[idx]))


def evaluate_cost_vqls(A: PauliSum, U: PauliSum, circuit: AnsatzCircuit, params, shots: int,
                       rng: np.random.Generator, paranoid: bool = False) -> CostValue:
    """Cost assembled from sampled Hadamard tests, one test per job of :func:`vqls_jobs`."""
    if circuit.n != A.n:
        raise DimensionError("circuit and system sizes differ")
    n = A.n
    a, u = A.coeffs, U.coeffs
    state = prepare_state(circuit, params)
    Ai = [_term(A, i) for i in range(len(A))]
    Ul = [_term(U, l) for l in range(len(U))]

    measured: dict[tuple, complex] = {}
    for job in vqls_jobs(A, U, shots, paranoid):
        if job.kind == "beta":
            i, j = job.indices
            ops = [Ai[i], Ai[j]]
        else:
            i, j, l, p, r = job.indices
            ops = delta_ops(n, Ai[i], Ai[j], Ul[l], Ul[p], r)
        est = _sample_estimate(ancilla_zero_probability(state, ops, job.part), shots, rng)
        key = (job.kind, job.indices)
        measured[key] = measured.get(key, 0.0) + (est if job.part == "real" else 1j * est)

    omega = float(np.sum(np.abs(a) ** 2))  # beta_ii = 1
    mu = 0.0
    for (kind, idx), val in measured.items():
        if kind == "beta":
            i, j = idx
            omega += 2.0 * (a[i] * np.conj(a[j]) * val).real
        else:
            i, j, l, p, r = idx
            c = a[i] * np.conj(a[j]) * u[p] * np.conj(u[l])
            weight = 1.0 if (i, l) == (j, p) else 2.0
            mu += weight * (c * val).real
    return _assemble(n, mu, omega, exact=False)


# circuits-per-step models -----------------------------------------------------

def _check_positive(**kw):
    for k, v in kw.items():
        if v <= 0:
            raise ValueError(f"{k} must be positive")


def vqls_term_count(L: int, n: int) -> int:
    """``L(L-1) + n L**2``, the polynomial inside both count models."""
    return L * (L - 1) + n * L * L


def circuits_per_step_vqls(L: int, n: int, shots: int) -> int:
    """``ceil(shots/2 * (L(L-1) + n L**2))``."""
    _check_positive(L=L, n=n, shots=shots)
    return math.ceil(shots * vqls_term_count(L, n) / 2)


def circuits_per_step_sqls(L: int, n: int, k: int, eps: float) -> int:
    """Worst-case shadow count ``ceil(log2(L(L-1) + n L**2) * 3**(2k+1) / eps**2)``."""
    _check_positive(L=L, n=n, eps=eps)
    if k < 0:
        raise ValueError("k must be non-negative")
    return math.ceil(math.log2(vqls_term_count(L, n)) * 3 ** (2 * k + 1) / eps ** 2)


def circuits_per_step_preprocessed(N_PP: int, shots_or_eps: float, mode: str, k: int = 2) -> int:
    """Counts after pre-processing: ``N_PP * shots`` (Hadamard) or a shadow budget
    for ``N_PP`` observables of worst-case locality ``2k + 1``."""
    if N_PP < 1:
        raise ValueError("N_PP must be at least 1")
    if mode == "hadamard":
        return int(N_PP * shots_or_eps)
    if mode == "shadow":
        return shadow_size(N_PP, 2 * k + 1, shots_or_eps, 1.0)
    raise ValueError(f"mode must be 'hadamard' or 'shadow', got {mode!r}")

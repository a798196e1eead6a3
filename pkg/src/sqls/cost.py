"""Local cost function of the linear-system ansatz as weighted Pauli expectations.

With ``A = sum_i a_i A_i`` and ``U = sum_l u_l U_l`` (Pauli strings), writing the
single-qubit projector as ``|0><0| = (I + Z) / 2`` turns the local Hamiltonian
into ``A^dag A / 2 - (1/2n) sum_r A^dag U Z_r U^dag A``, hence::

    C_L = 1/2 - mu / (2 n omega)
    mu    = sum_r <x| A^dag U Z_r U^dag A |x>
    omega = <x| A^dag A |x>

Both are expectations of Hermitian Pauli sums. ``build_terms`` enumerates the
individual products index by index (folding each conjugate pair into one real
term); ``preprocess`` contracts equal strings; ``contract_terms`` produces the
contracted table directly without materializing the raw enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .pauli import DROP_TOL, DimensionError, PauliSum, pauli_index, simplify, to_dense
from .shadows import ClassicalShadow, ShadowHistogram, estimate_all
from .simulator import expectations, num_qubits

OMEGA_FLOOR = 1e-14
RAW_TERM_LIMIT = 20_000_000


class SingularSystemError(ArithmeticError):
    """The denominator omega vanished (A|x> == 0)."""


class UnstableDenominatorError(ArithmeticError):
    """A shadow estimate of omega came out non-positive; enlarge the shadow."""


@dataclass(frozen=True)
class CostValue:
    cost: float
    mu: float
    omega: float


@dataclass(frozen=True)
class CostTermTable:
    n: int
    mu: PauliSum
    omega: PauliSum
    preprocessed: bool = False
    raw_count: int | None = field(default=None, compare=False)

    @property
    def n_pp(self) -> int:
        return len(self.mu) + len(self.omega)

    @property
    def max_locality(self) -> int:
        return max(self.mu.max_locality(), self.omega.max_locality())

    @cached_property
    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        return to_dense(self.mu), to_dense(self.omega)

    def to_text(self) -> str:
        return "[mu]\n" + self.mu.to_text() + "[omega]\n" + self.omega.to_text()


def raw_term_count(L_A: int, L_U: int, n: int) -> int:
    """Entries of the folded raw enumeration: mu over (r, i, j, l, p) plus omega over (i, j)."""
    mu = n * (L_A * L_A * L_U * L_U + L_A * L_U) // 2
    omega = (L_A * L_A + L_A) // 2
    return mu + omega


def _fold(prod: PauliSum, partner: np.ndarray) -> PauliSum:
    idx = np.arange(len(prod))
    keep = idx <= partner
    scale = np.where(idx == partner, 1.0, 2.0)
    return PauliSum(prod.n, prod.xs[keep], prod.zs[keep], (scale * prod.coeffs.real)[keep])


def _z(n, r):
    return PauliSum(n, [0], [1 << (n - 1 - r)], [1.0])


def build_terms(A: PauliSum, U: PauliSum) -> CostTermTable:
    """Raw term table: one entry per index tuple, conjugate pairs folded.

    omega holds ``conj(a_j) a_i A_j A_i`` for ``j <= i``; mu holds
    ``a_i conj(a_j) u_p conj(u_l) A_j U_p Z_r U_l A_i`` for tuples not above their
    conjugate partner ``(j, i, p, l)``. Folded coefficients are real.
    """
    if A.n != U.n:
        raise DimensionError("A and U act on different qubit counts")
    if len(A) == 0:
        raise ValueError("A has no terms")
    n, LA, LU = A.n, len(A), len(U)
    if n * LA * LA * LU * LU > RAW_TERM_LIMIT:
        raise MemoryError(f"raw enumeration of {n * LA * LA * LU * LU} products exceeds "
                          f"{RAW_TERM_LIMIT}; use contract_terms")
    Ad = A.dagger()
    om = Ad @ A  # flattened index j * LA + i
    j, i = np.divmod(np.arange(LA * LA), LA)
    omega = _fold(om, i * LA + j)

    jj, pp, ll, ii = np.unravel_index(np.arange(LA * LU * LU * LA), (LA, LU, LU, LA))
    partner = np.ravel_multi_index((ii, ll, pp, jj), (LA, LU, LU, LA))
    left = Ad @ U
    right_base = U.dagger() @ A
    parts = []
    for r in range(n):
        prod = (left @ _z(n, r)) @ right_base
        parts.append(_fold(prod, partner))
    mu = parts[0]
    for p in parts[1:]:
        mu = mu + p
    return CostTermTable(n, mu, omega, preprocessed=False, raw_count=len(mu) + len(omega))


def preprocess(t: CostTermTable, tol: float = DROP_TOL) -> CostTermTable:
    """Merge equal strings within each list and drop negligible coefficients."""
    return CostTermTable(t.n, simplify(t.mu, tol), simplify(t.omega, tol), preprocessed=True,
                         raw_count=t.raw_count if t.raw_count is not None else t.n_pp)


def local_observable(U: PauliSum, tol: float = DROP_TOL) -> PauliSum:
    """``W = sum_r U Z_r U^dag``, simplified."""
    n = U.n
    Ud = U.dagger()
    W = PauliSum(n)
    for r in range(n):
        W = simplify(W + simplify((U @ _z(n, r)) @ Ud, tol), tol)
    return W


def contract_observable(A: PauliSum, W: PauliSum, raw_count: int | None = None,
                        tol: float = DROP_TOL) -> CostTermTable:
    """Contracted table from ``A`` and a precomputed ``W``: ``mu = A^dag W A``, ``omega = A^dag A``."""
    if A.n != W.n:
        raise DimensionError("A and W act on different qubit counts")
    if len(A) == 0:
        raise ValueError("A has no terms")
    n = A.n
    Ad = A.dagger()
    mu = simplify(Ad @ simplify(W @ A, tol), tol)
    omega = simplify(Ad @ A, tol)
    mu = PauliSum(n, mu.xs, mu.zs, mu.coeffs.real)
    omega = PauliSum(n, omega.xs, omega.zs, omega.coeffs.real)
    return CostTermTable(n, mu, omega, preprocessed=True, raw_count=raw_count)


def contract_terms(A: PauliSum, U: PauliSum, tol: float = DROP_TOL) -> CostTermTable:
    """Contracted table built in factored order.

    ``W = sum_r U Z_r U^dag`` is simplified first, then ``A^dag W A``; the result
    equals ``preprocess(build_terms(A, U))`` but never holds the raw tuples.
    """
    if A.n != U.n:
        raise DimensionError("A and U act on different qubit counts")
    return contract_observable(A, local_observable(U, tol),
                               raw_term_count(len(A), len(U), A.n), tol)


def _assemble(n: int, mu: complex, omega: complex, *, exact: bool) -> CostValue:
    if abs(complex(mu).imag) > 1e-9 or abs(complex(omega).imag) > 1e-9:
        raise ArithmeticError(f"mu/omega not real: {mu}, {omega}")
    mu, omega = float(np.real(mu)), float(np.real(omega))
    if exact and omega <= OMEGA_FLOOR:
        raise SingularSystemError(f"omega = {omega:.3e}: A|x> vanishes")
    if not exact and omega <= 0:
        raise UnstableDenominatorError(f"shadow estimate of omega = {omega:.3e}")
    cost = 0.5 - mu / (2 * n * omega)
    if exact and not -1e-9 <= cost <= 1 + 1e-9:
        raise ArithmeticError(f"exact cost {cost} outside [0, 1]")
    return CostValue(cost, mu, omega)


def evaluate_exact(t: CostTermTable, state: np.ndarray) -> CostValue:
    """Cost from exact Pauli expectations of ``state``."""
    if num_qubits(state) != t.n:
        raise DimensionError("state and table sizes differ")
    if t.n <= 10:
        Mmu, Mom = t.dense
        mu = np.vdot(state, Mmu @ state)
        omega = np.vdot(state, Mom @ state)
    else:
        mu = np.dot(t.mu.coeffs, expectations(state, t.mu.xs, t.mu.zs))
        omega = np.dot(t.omega.coeffs, expectations(state, t.omega.xs, t.omega.zs))
    return _assemble(t.n, mu, omega, exact=True)


def evaluate_from_estimates(t: CostTermTable, estimates: np.ndarray) -> CostValue:
    """Cost from a full ``4**n`` vector of Pauli estimates (pauli_index order)."""
    mu = np.dot(t.mu.coeffs, estimates[pauli_index(t.n, t.mu.xs, t.mu.zs)])
    omega = np.dot(t.omega.coeffs, estimates[pauli_index(t.n, t.omega.xs, t.omega.zs)])
    return _assemble(t.n, mu, omega, exact=False)


def evaluate_shadow(t: CostTermTable, shadow: ClassicalShadow | ShadowHistogram,
                    batches: int = 1) -> CostValue:
    """Cost with every distinct string estimated once from one shared shadow."""
    h = shadow if isinstance(shadow, ShadowHistogram) else shadow.histogram(batches)
    if h.n != t.n:
        raise DimensionError("shadow and table sizes differ")
    if h.size == 0:
        raise ValueError("empty shadow")
    return evaluate_from_estimates(t, estimate_all(h))


def termination_gamma(n: int, kappa: float, eps: float) -> float:
    """Lower bound ``eps**2 / (n kappa**2)`` on the cost outside the eps ball."""
    if n <= 0 or kappa <= 0 or eps <= 0:
        raise ValueError("n, kappa and eps must be positive")
    return eps ** 2 / (n * kappa ** 2)

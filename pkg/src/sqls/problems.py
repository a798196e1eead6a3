"""Benchmark linear systems as (A, U) Pauli-sum pairs with dense reference data."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import brentq

from .pauli import PauliString, PauliSum, decompose_dense, format_pauli_sum, parse_pauli_sum, simplify, to_dense

# Golden fixtures, written exactly as the published coefficients.
IQLSP_TEXT = """\
0.0123 0.0 ZZII
-0.0123 0.0 IZZI
-0.0123 0.0 IIZZ
0.123 0.0 XIII
0.123 0.0 IXII
0.123 0.0 IIXI
0.123 0.0 IIIX
0.508 0.0 IIII
"""
RQLSP1_TEXT = """\
-0.0513 0.0 IXXI
-0.366 0.0 IIYY
-0.0352 0.0 XXII
0.144 0.0 IXIZ
0.55 0.0 IIII
"""
RQLSP2_TEXT = """\
0.242 0.0 ZZII
-0.0817 0.0 IZZI
0.183 0.0 XIIX
-0.078 0.0 IZIY
0.55 0.0 IIII
"""

PGLS_DIAG = 0.22941573
PGLS_OFF = -0.05735393
LAPLACE16_DIAG = 0.0562544
LAPLACE16_OFF = -0.0140636
# diagonal value after normalization, per grid side
_GRID_SCALE = {4: (PGLS_DIAG, PGLS_OFF), 16: (LAPLACE16_DIAG, LAPLACE16_OFF)}


class NormError(ValueError):
    """Matrix spectral norm exceeds 1."""


class InfeasibleKappaError(ValueError):
    """No spectrum shift reaches the requested condition number."""


@dataclass(frozen=True)
class LinearProblem:
    n: int
    A: PauliSum
    U: PauliSum
    label: str
    meta: dict = field(default_factory=dict, compare=False)

    @cached_property
    def A_dense(self) -> np.ndarray:
        return to_dense(self.A)

    @cached_property
    def U_dense(self) -> np.ndarray:
        return to_dense(self.U)

    @property
    def b(self) -> np.ndarray:
        return self.U_dense[:, 0].copy()

    @property
    def exact_solution(self) -> np.ndarray:
        x = np.linalg.solve(self.A_dense, self.b)
        return x / np.linalg.norm(x)

    @property
    def kappa(self) -> float:
        return condition_number(self.A_dense)

    def check(self, tol: float = 1e-9, norm_tol: float = 1e-9) -> None:
        """Assert the structural invariants: norm bound, unitary U, exact residual.

        Published fixtures carry 3-figure coefficients and overshoot the unit norm
        by up to 1e-3; check them with a looser ``norm_tol``.
        """
        A, U = self.A_dense, self.U_dense
        if np.linalg.norm(A, 2) > 1 + norm_tol:
            raise NormError(f"||A||_2 = {np.linalg.norm(A, 2)} > 1")
        if not np.allclose(U.conj().T @ U, np.eye(len(U)), atol=tol):
            raise ValueError("U is not unitary")
        x = self.exact_solution
        y = A @ x
        resid = np.linalg.norm(y / np.linalg.norm(y) - self.b * np.vdot(self.b, y) / abs(np.vdot(self.b, y)))
        if resid > tol:
            raise ValueError(f"exact solution residual {resid}")

    # serialization ------------------------------------------------------
    def save(self, directory) -> Path:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "A.pauli").write_text(format_pauli_sum(self.A))
        (d / "U.pauli").write_text(format_pauli_sum(self.U))
        meta = {"label": self.label, "n": self.n, "kappa": self.kappa, **_jsonable(self.meta)}
        (d / "meta").write_text(json.dumps(meta, indent=2, sort_keys=True))
        return d

    @classmethod
    def load(cls, directory) -> "LinearProblem":
        d = Path(directory)
        A = parse_pauli_sum((d / "A.pauli").read_text())
        U = parse_pauli_sum((d / "U.pauli").read_text())
        meta = json.loads((d / "meta").read_text())
        label = meta.pop("label")
        meta.pop("n", None)
        meta.pop("kappa", None)
        return cls(A.n, A, U, label, meta)


def _jsonable(meta: dict) -> dict:
    out = {}
    for k, v in meta.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        out[k] = v
    return out


# helpers -----------------------------------------------------------------

def condition_number(m: np.ndarray) -> float:
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if s[-1] <= s[0] * 1e-15:
        raise ArithmeticError("matrix is singular (infinite condition number)")
    return float(s[0] / s[-1])


def hadamard_sum(n: int, qubits) -> PauliSum:
    """Pauli form of H on ``qubits`` and identity elsewhere."""
    qubits = list(qubits)
    terms = PauliSum.identity(n)
    for q in qubits:
        h = PauliSum.from_terms([(2 ** -0.5, PauliString.single(n, q, "X")),
                                 (2 ** -0.5, PauliString.single(n, q, "Z"))])
        terms = terms @ h
    return simplify(terms)


def tune_kappa(base: PauliSum | np.ndarray, target: float, n: int | None = None) -> tuple[float, float]:
    """Find ``(eta, zeta)`` so that ``(base + eta I) / zeta`` has condition number ``target``
    and unit spectral norm.

    Bisection (Brent) on the spectrum shift ``eta``; ``zeta`` is the norm after the shift.
    """
    if target <= 1:
        raise InfeasibleKappaError("target condition number must exceed 1")
    M = to_dense(base) if isinstance(base, PauliSum) else np.asarray(base, dtype=complex)
    eye = np.eye(len(M))
    herm = (M + M.conj().T) / 2
    lam = np.linalg.eigvalsh(herm)
    spread = max(lam[-1] - lam[0], 1e-12)

    def kappa(eta):
        s = np.linalg.svd(M + eta * eye, compute_uv=False)
        return s[0] / s[-1] if s[-1] > 0 else np.inf

    lo = -lam[0] + 1e-12 * spread
    while not kappa(lo) > target:
        lo -= 0.1 * spread  # non-normal base: walk back toward the singular shift
        if lo < -lam[-1]:
            raise InfeasibleKappaError(f"no shift reaches kappa={target}")
    hi = -lam[0] + spread
    while kappa(hi) > target:
        hi += 2 * (hi - lo)
        if hi > 1e12 * spread:
            raise InfeasibleKappaError(f"no shift reaches kappa={target}")
    eta = brentq(lambda e: kappa(e) - target, lo, hi, xtol=1e-14 * spread, rtol=1e-14, maxiter=500)
    zeta = float(np.linalg.norm(M + eta * eye, 2))
    return float(eta), zeta


def _shift_scale(base: PauliSum, eta: float, zeta: float) -> PauliSum:
    return simplify((base + PauliSum.identity(base.n, eta)) / zeta)


# problem constructors ------------------------------------------------------

def identity_problem(n: int) -> LinearProblem:
    return LinearProblem(n, PauliSum.identity(n), PauliSum.identity(n), f"identity{n}")


def ising_problem() -> LinearProblem:
    """The published 4-qubit Ising-inspired system (kappa close to 60)."""
    A = parse_pauli_sum(IQLSP_TEXT)
    return LinearProblem(4, A, hadamard_sum(4, range(4)), "iqlsp")


def ising_base(n: int, J: float) -> PauliSum:
    terms = [(1.0, PauliString.single(n, q, "X")) for q in range(n)]
    for q in range(n - 1):
        p = PauliString(n, 0, (1 << (n - 1 - q)) | (1 << (n - 2 - q)))
        terms.append((J, p))
    return simplify(PauliSum.from_terms(terms, n))


def ising_family(n: int, J: float, eta: float, zeta: float) -> LinearProblem:
    """``(sum_j X_j + J sum_j Z_j Z_{j+1} + eta I) / zeta`` with ``U = H^n``."""
    if n < 2:
        raise ValueError("Ising family needs n >= 2")
    A = _shift_scale(ising_base(n, J), eta, zeta)
    return LinearProblem(n, A, hadamard_sum(n, range(n)), f"ising{n}",
                         {"J": J, "eta": eta, "zeta": zeta})


def ising_tuned(n: int = 4, J: float = 0.1, kappa: float = 60.0) -> LinearProblem:
    eta, zeta = tune_kappa(ising_base(n, J), kappa)
    return ising_family(n, J, eta, zeta)


def random_k_local_strings(n: int, L: int, k: int, rng: np.random.Generator) -> list[PauliString]:
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    from math import comb

    if L > comb(n, k) * 3 ** k:
        raise ValueError(f"only {comb(n, k) * 3 ** k} distinct {k}-local strings on {n} qubits")
    seen: set[tuple[int, int]] = set()
    out = []
    while len(out) < L:
        qubits = rng.choice(n, size=k, replace=False)
        x = z = 0
        for q in qubits:
            letter = "XYZ"[rng.integers(3)]
            s = PauliString.single(n, int(q), letter)
            x |= s.x
            z |= s.z
        if (x, z) not in seen:
            seen.add((x, z))
            out.append(PauliString(n, x, z))
    return out


def random_problem(n: int, L: int, k: int, kappa_target: float, rng: np.random.Generator,
                   label: str = "random") -> LinearProblem:
    """``L`` distinct k-local strings with uniform [-1, 1] weights, shifted and scaled to
    condition number ``kappa_target`` and unit norm; ``U = H^n``."""
    if L < 1:
        raise ValueError("L must be positive")
    strings = random_k_local_strings(n, L, k, rng)
    coeffs = rng.uniform(-1, 1, size=L)
    base = PauliSum.from_terms(list(zip(coeffs, strings)), n)
    eta, zeta = tune_kappa(base, kappa_target)
    A = _shift_scale(base, eta, zeta)
    return LinearProblem(n, A, hadamard_sum(n, range(n)), label,
                         {"L": L, "k": k, "kappa_target": kappa_target, "eta": eta, "zeta": zeta})


def rqlsp1() -> LinearProblem:
    return LinearProblem(4, parse_pauli_sum(RQLSP1_TEXT), hadamard_sum(4, range(4)), "rqlsp1")


def rqlsp2() -> LinearProblem:
    return LinearProblem(4, parse_pauli_sum(RQLSP2_TEXT), hadamard_sum(4, range(4)), "rqlsp2")


def grid_matrix(side: int, diag: float = 4.0, off: float = -1.0, coupling: str = "literal") -> np.ndarray:
    """Five-point stencil on a ``side x side`` grid, row-major.

    ``literal`` couples every ``|i - j| in {1, side}`` pair, including the pairs
    that wrap from the end of one grid row to the start of the next.
    ``grid`` drops those wrap pairs (the Dirichlet finite-difference Laplacian).
    """
    N = side * side
    m = np.diag(np.full(N, diag))
    i = np.arange(N - 1)
    horiz = np.full(N - 1, off)
    if coupling == "grid":
        horiz[(i + 1) % side == 0] = 0.0
    elif coupling != "literal":
        raise ValueError(f"unknown coupling {coupling!r}")
    m[i, i + 1] = horiz
    m[i + 1, i] = horiz
    j = np.arange(N - side)
    m[j, j + side] = off
    m[j + side, j] = off
    return m


def laplace_grid(side: int, coupling: str = "literal", via_split: bool = True) -> LinearProblem:
    """Normalized potential-grid system: top-boundary potential on the first ``side`` entries.

    The matrix is scaled to the published diagonal/off-diagonal values; ``b`` is
    uniform on indices ``0 .. side-1``, prepared by ``I^(n/2) (x) H^(n/2)``.
    """
    if side not in _GRID_SCALE:
        raise ValueError(f"side must be one of {sorted(_GRID_SCALE)}")
    diag, off = _GRID_SCALE[side]
    m = grid_matrix(side, diag, off, coupling)
    n = 2 * (side.bit_length() - 1)
    if via_split:
        A = split_to_pauli(unitary_split(m))
    else:
        A = decompose_dense(m)
    A = PauliSum(n, A.xs, A.zs, A.coeffs.real)
    U = hadamard_sum(n, range(n // 2, n))
    label = "pgls" if side == 4 else f"laplace{side}"
    return LinearProblem(n, A, U, label, {"side": side, "coupling": coupling,
                                          "diag": diag, "off": off, "V0_raw": 0.25})


def potential_grid_4x4(coupling: str = "literal") -> LinearProblem:
    return laplace_grid(4, coupling, via_split=False)


# four-unitary split --------------------------------------------------------

@dataclass(frozen=True)
class UnitarySplit:
    U_B: np.ndarray
    V_B: np.ndarray
    U_C: np.ndarray
    V_C: np.ndarray
    weights: tuple[complex, complex, complex, complex] = (0.5, 0.5, 0.5j, 0.5j)

    @property
    def factors(self):
        return (self.U_B, self.V_B, self.U_C, self.V_C)

    def reconstruct(self) -> np.ndarray:
        return sum(w * f for w, f in zip(self.weights, self.factors))


def _psd_sqrt(h: np.ndarray, clamp: float = 1e-12) -> np.ndarray:
    w, v = eigh(h)
    if w.min() < -clamp:
        raise NormError(f"I - B^2 has eigenvalue {w.min():.3e}; ||B||_2 > 1")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def unitary_split(m: np.ndarray) -> UnitarySplit:
    """``m = U_B/2 + V_B/2 + i U_C/2 + i V_C/2`` with unitary factors and
    ``V_B = U_B^dag``, ``V_C = U_C^dag``. Requires ``||m||_2 <= 1``."""
    m = np.asarray(m, dtype=complex)
    if np.linalg.norm(m, 2) > 1 + 1e-12:
        raise NormError(f"||m||_2 = {np.linalg.norm(m, 2):.6g} > 1")
    eye = np.eye(len(m))
    B = (m + m.conj().T) / 2
    C = (m - m.conj().T) / 2j
    SB = _psd_sqrt(eye - B @ B)
    SC = _psd_sqrt(eye - C @ C)
    return UnitarySplit(B + 1j * SB, B - 1j * SB, C + 1j * SC, C - 1j * SC)


def split_to_pauli(split: UnitarySplit) -> PauliSum:
    total = None
    for w, f in zip(split.weights, split.factors):
        term = decompose_dense(f, tol=0.0) * w
        total = term if total is None else total + term
    return simplify(total)


# registry used by the CLI ----------------------------------------------------

PROBLEMS = {
    "iqlsp": ising_problem,
    "rqlsp1": rqlsp1,
    "rqlsp2": rqlsp2,
    "pgls": potential_grid_4x4,
    "pgls-grid": lambda: potential_grid_4x4("grid"),
    "laplace16": lambda: laplace_grid(16),
    "laplace16-grid": lambda: laplace_grid(16, "grid"),
    "identity4": lambda: identity_problem(4),
}


def get_problem(name: str) -> LinearProblem:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None

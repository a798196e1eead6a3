"""Dense state-vector simulation.

States are plain complex numpy vectors of length ``2**n``. Qubit 0 is the most
significant bit of the basis index, matching the Pauli label convention.
Rotations follow ``R_P(theta) = exp(-i theta P / 2)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .pauli import MAX_DENSE_QUBITS, DimensionError, PauliString, ScaleError, _PHASES, _popcount

MAX_QUBITS = MAX_DENSE_QUBITS

_SQ2 = 1 / np.sqrt(2)
_FIXED = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "Sdag": np.array([[1, 0], [0, -1j]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "I": np.eye(2, dtype=complex),
}
ROTATIONS = ("RX", "RY", "RZ")
SINGLE = tuple(_FIXED) + ROTATIONS
KINDS = SINGLE + ("CNOT", "CPAULI", "CU")


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
    raise ValueError(f"not a rotation: {kind}")


@dataclass(frozen=True)
class Gate:
    """One circuit instruction.

    ``CPAULI`` applies ``pauli`` (identity on the control) when ``control`` is 1;
    ``CU`` applies the dense ``matrix`` to ``targets`` under the same condition.
    """

    kind: str
    targets: tuple[int, ...]
    angle: float | None = None
    control: int | None = None
    pauli: PauliString | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if (self.kind in ROTATIONS) != (self.angle is not None):
            raise ValueError(f"{self.kind} takes {'one' if self.kind in ROTATIONS else 'no'} angle")
        if self.kind == "CNOT" and len(self.targets) != 2:
            raise ValueError("CNOT targets are (control, target)")

    def matrix_1q(self) -> np.ndarray:
        if self.kind in ROTATIONS:
            return rotation_matrix(self.kind, self.angle)
        return _FIXED[self.kind]


def num_qubits(state: np.ndarray) -> int:
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if (1 << n) != dim:
        raise DimensionError(f"state length {dim} is not a power of two")
    return n


def zero_state(n: int) -> np.ndarray:
    if not 1 <= n <= MAX_QUBITS:
        raise ScaleError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")
    s = np.zeros(1 << n, dtype=np.complex128)
    s[0] = 1.0
    return s


def basis_state(n: int, index: int) -> np.ndarray:
    s = zero_state(n)
    s[0] = 0.0
    s[index] = 1.0
    return s


def _check_qubits(qubits, n):
    for q in qubits:
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")


def apply_1q(state: np.ndarray, m: np.ndarray, q: int) -> np.ndarray:
    n = num_qubits(state)
    _check_qubits([q], n)
    s = state.reshape(1 << q, 2, -1)
    return np.einsum("ij,ajb->aib", m, s).reshape(-1)


@lru_cache(maxsize=256)
def _cnot_perm(n: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << n)
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    return np.where(idx & cbit, idx ^ tbit, idx)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    n = num_qubits(state)
    _check_qubits([control, target], n)
    if control == target:
        raise ValueError("CNOT control and target coincide")
    return state[_cnot_perm(n, control, target)]


def apply_pauli(state: np.ndarray, p: PauliString) -> np.ndarray:
    """Return ``P|state>``."""
    n = num_qubits(state)
    if p.n != n:
        raise DimensionError(f"{p.n}-qubit string on a {n}-qubit state")
    k = np.arange(1 << n, dtype=np.int64)
    src = k ^ p.x
    sign = 1 - 2 * (_popcount(src & p.z) & 1)
    return _PHASES[_popcount(p.x & p.z) % 4] * sign * state[src]


def _control_mask(n: int, control: int) -> np.ndarray:
    return (np.arange(1 << n) >> (n - 1 - control)) & 1 == 1


def apply_controlled_pauli(state: np.ndarray, p: PauliString, control: int) -> np.ndarray:
    n = num_qubits(state)
    _check_qubits([control], n)
    if (p.x | p.z) >> (n - 1 - control) & 1:
        raise ValueError("controlled string must act as identity on its control")
    return np.where(_control_mask(n, control), apply_pauli(state, p), state)


def apply_on_qubits(state: np.ndarray, m: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    """Apply a ``2**k`` square matrix to the listed qubits (first listed = most significant)."""
    n = num_qubits(state)
    _check_qubits(qubits, n)
    k = len(qubits)
    if m.shape != (1 << k, 1 << k):
        raise DimensionError(f"matrix shape {m.shape} does not fit {k} qubits")
    t = state.reshape((2,) * n)
    mt = m.reshape((2,) * (2 * k))
    out = np.tensordot(mt, t, axes=(list(range(k, 2 * k)), list(qubits)))
    out = np.moveaxis(out, list(range(k)), list(qubits))
    return out.reshape(-1)


def apply_controlled_matrix(state, m, control: int, targets: tuple[int, ...]) -> np.ndarray:
    n = num_qubits(state)
    if control in targets:
        raise ValueError("control qubit is also a target")
    moved = apply_on_qubits(state, m, targets)
    return np.where(_control_mask(n, control), moved, state)


def apply_gate(state: np.ndarray, g: Gate) -> np.ndarray:
    if g.kind in SINGLE:
        return apply_1q(state, g.matrix_1q(), g.targets[0])
    if g.kind == "CNOT":
        return apply_cnot(state, *g.targets)
    if g.kind == "CPAULI":
        return apply_controlled_pauli(state, g.pauli, g.control)
    return apply_controlled_matrix(state, g.matrix, g.control, g.targets)


def run_circuit(gates, state: np.ndarray) -> np.ndarray:
    for g in gates:
        state = apply_gate(state, g)
    return state


def apply_matrix(state: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Plain ``m @ state``; the result need not be normalized."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[1] != state.shape[0]:
        raise DimensionError(f"matrix {m.shape} incompatible with state of length {state.shape[0]}")
    return m @ state


def expectations(state: np.ndarray, xs, zs) -> np.ndarray:
    """``<state|P|state>`` for many strings given by mask arrays. Returns complex values."""
    n = num_qubits(state)
    xs = np.asarray(xs, dtype=np.int64).reshape(-1, 1)
    zs = np.asarray(zs, dtype=np.int64).reshape(-1, 1)
    k = np.arange(1 << n, dtype=np.int64)[None, :]
    src = k ^ xs
    sign = 1 - 2 * (_popcount(src & zs) & 1)
    phase = _PHASES[_popcount(xs & zs).ravel() % 4]
    return phase * np.einsum("tk,tk->t", state.conj()[None, :] * sign, state[src])


def expectation(state: np.ndarray, p: PauliString) -> float:
    n = num_qubits(state)
    if p.n != n:
        raise DimensionError(f"{p.n}-qubit string on a {n}-qubit state")
    val = expectations(state, [p.x], [p.z])[0]
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"Pauli expectation has imaginary part {val.imag}")
    return float(val.real)


def probabilities(state: np.ndarray) -> np.ndarray:
    p = np.abs(state) ** 2
    return p / p.sum()


def sample(state: np.ndarray, rng: np.random.Generator, shots: int | None = None):
    """Draw computational-basis indices with probability ``|a_i|**2``."""
    p = probabilities(state)
    if shots is None:
        return int(rng.choice(len(p), p=p))
    return rng.choice(len(p), size=shots, p=p)


def norm(state: np.ndarray) -> float:
    return float(np.linalg.norm(state))


def dump_csv(state: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for i, a in enumerate(state):
            w.writerow([i, repr(float(a.real)), repr(float(a.imag))])

"""Independent dense references: Kronecker-built Pauli matrices and the local Hamiltonian."""

from functools import reduce

import numpy as np

_LETTER = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_label(label: str) -> np.ndarray:
    return reduce(np.kron, [_LETTER[c] for c in label])


def dense_sum(terms) -> np.ndarray:
    """``terms`` is an iterable of ``(coeff, label)``."""
    terms = list(terms)
    n = len(terms[0][1])
    out = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for c, lab in terms:
        out += c * kron_label(lab)
    return out


def local_hamiltonian(A: np.ndarray, U: np.ndarray) -> np.ndarray:
    """``A^dag U (I - (1/n) sum_j |0_j><0_j| (x) I) U^dag A``."""
    dim = A.shape[0]
    n = dim.bit_length() - 1
    proj = np.zeros((dim, dim), dtype=complex)
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    for j in range(n):
        ops = [np.eye(2)] * n
        ops[j] = p0
        proj += reduce(np.kron, ops)
    middle = np.eye(dim) - proj / n
    return A.conj().T @ U @ middle @ U.conj().T @ A


def local_cost(A: np.ndarray, U: np.ndarray, x: np.ndarray) -> float:
    psi = A @ x
    return float((np.vdot(x, local_hamiltonian(A, U) @ x) / np.vdot(psi, psi)).real)


def random_state(n: int, rng, real: bool = False) -> np.ndarray:
    v = rng.normal(size=2 ** n)
    if not real:
        v = v + 1j * rng.normal(size=2 ** n)
    return v / np.linalg.norm(v)


def random_labels(n: int, count: int, rng) -> list[str]:
    return ["".join(rng.choice(list("IXYZ"), size=n)) for _ in range(count)]


def random_unitary(dim: int, rng) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))

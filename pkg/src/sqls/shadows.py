"""Random single-qubit Pauli-basis classical shadows.

Each snapshot picks a basis in {X, Y, Z} per qubit uniformly at random, rotates
into it (X: H, Y: H S^dagger, Z: nothing) and records one computational-basis
outcome. The inverted snapshot for one qubit is ``3 U^dag |b><b| U - I``, so
``Tr(P rho_hat)`` factorizes into ``3 * (-1)**b`` on every qubit where the
letter of ``P`` matches the basis, 1 on identity letters, and 0 otherwise.

Two storage forms share one estimator:

``ClassicalShadow``
    explicit per-snapshot bases and outcomes (uint8 arrays).
``ShadowHistogram``
    counts of (basis pattern, outcome) per median-of-means batch. Estimation
    only depends on these counts, and drawing them as nested multinomials is
    equal in distribution to drawing the snapshots one by one. Memory is
    ``batches * 3**n * 2**n`` regardless of the shadow size, which is what
    makes budgets of 10**6 - 10**8 snapshots per cost evaluation affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pauli import DimensionError, PauliString, ScaleError, pauli_index
from .simulator import num_qubits

BASES = "XYZ"
_SQ2 = 1 / np.sqrt(2)
# rotation into the computational basis, indexed by basis code X=0, Y=1, Z=2
_ROT = np.array([
    [[_SQ2, _SQ2], [_SQ2, -_SQ2]],
    [[_SQ2, -1j * _SQ2], [_SQ2, 1j * _SQ2]],  # H @ Sdag
    [[1, 0], [0, 1]],
], dtype=complex)
# per-qubit map (basis, outcome) -> snapshot factor for letters I, X, Y, Z
_FACTOR = np.zeros((4, 3, 2))
_FACTOR[0] = 1.0
for _b in range(3):
    _FACTOR[_b + 1, _b] = [3.0, -3.0]
_FACTOR6 = _FACTOR.reshape(4, 6)

MAX_DENSITY_QUBITS = 6
MAX_HISTOGRAM_QUBITS = 10


def shadow_size(M: int, k: int, eps: float, constant: float = 1.0) -> int:
    """Snapshot budget ``ceil(constant * log2(M) * 3**k / eps**2)``, at least 1."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if M < 1 or k < 0:
        raise ValueError("need M >= 1 and k >= 0")
    return max(1, math.ceil(constant * math.log2(M) * 3 ** k / eps ** 2))


def default_batches(M: int) -> int:
    """Median-of-means batch count ``max(1, floor(2 log2(2M)))``."""
    return max(1, int(math.floor(2 * math.log2(2 * M))))


@dataclass(frozen=True)
class ClassicalShadow:
    n: int
    bases: np.ndarray     # (N, n) uint8, codes X=0, Y=1, Z=2
    outcomes: np.ndarray  # (N, n) uint8

    def __len__(self):
        return self.bases.shape[0]

    @property
    def snapshots(self):
        for b, o in zip(self.bases, self.outcomes):
            yield Snapshot("".join(BASES[i] for i in b), tuple(int(v) for v in o))

    def histogram(self, batches: int = 1) -> "ShadowHistogram":
        if len(self) == 0:
            raise ValueError("empty shadow")
        if batches < 1 or batches > len(self):
            raise ValueError(f"need 1 <= batches <= {len(self)} snapshots")
        pat = _pattern_index(self.bases, 3)
        out = _pattern_index(self.outcomes, 2)
        counts = np.zeros((batches, 3 ** self.n, 2 ** self.n), dtype=np.int64)
        for b, chunk in enumerate(np.array_split(np.arange(len(self)), batches)):
            np.add.at(counts[b], (pat[chunk], out[chunk]), 1)
        return ShadowHistogram(self.n, counts)


@dataclass(frozen=True)
class Snapshot:
    bases: str
    outcomes: tuple[int, ...]

    def __post_init__(self):
        if len(self.bases) != len(self.outcomes):
            raise DimensionError("bases and outcomes differ in length")


@dataclass(frozen=True)
class ShadowHistogram:
    n: int
    counts: np.ndarray  # (batches, 3**n, 2**n) int64

    @property
    def batches(self) -> int:
        return self.counts.shape[0]

    @property
    def size(self) -> int:
        return int(self.counts.sum())


def _pattern_index(codes: np.ndarray, base: int) -> np.ndarray:
    idx = np.zeros(codes.shape[0], dtype=np.int64)
    for q in range(codes.shape[1]):
        idx = idx * base + codes[:, q]
    return idx


def rotated_probabilities(state: np.ndarray) -> np.ndarray:
    """Outcome distribution for every basis pattern, shape ``(3**n, 2**n)``."""
    n = num_qubits(state)
    if n > MAX_HISTOGRAM_QUBITS:
        raise ScaleError(f"rotated-probability table capped at {MAX_HISTOGRAM_QUBITS} qubits")
    arr = state.reshape((2,) * n)
    # layout: q basis axes followed by n state axes
    for q in range(n):
        arr = np.tensordot(arr, _ROT, axes=([2 * q], [2]))
        arr = np.moveaxis(arr, [-2, -1], [q, 2 * q + 1])
    p = np.abs(arr.reshape(3 ** n, 2 ** n)) ** 2
    return p / p.sum(axis=1, keepdims=True)


def collect(state: np.ndarray, count: int, rng: np.random.Generator) -> ClassicalShadow:
    """Draw ``count`` explicit snapshots of ``state``."""
    if count < 1:
        raise ValueError("count must be at least 1")
    n = num_qubits(state)
    probs = rotated_probabilities(state)
    cdf = np.cumsum(probs, axis=1)
    bases = rng.integers(0, 3, size=(count, n), dtype=np.uint8)
    pat = _pattern_index(bases, 3)
    u = rng.random(count)
    outcome_idx = np.empty(count, dtype=np.int64)
    step = max(1, (1 << 22) >> n)
    for s in range(0, count, step):
        sl = slice(s, s + step)
        outcome_idx[sl] = (u[sl, None] > cdf[pat[sl]]).sum(axis=1)
    np.minimum(outcome_idx, 2 ** n - 1, out=outcome_idx)
    shifts = np.arange(n - 1, -1, -1)
    outcomes = ((outcome_idx[:, None] >> shifts) & 1).astype(np.uint8)
    return ClassicalShadow(n, bases, outcomes)


def collect_histogram(state: np.ndarray, count: int, batches: int,
                      rng: np.random.Generator) -> ShadowHistogram:
    """Draw a ``count``-snapshot shadow directly in histogram form."""
    if count < 1 or batches < 1:
        raise ValueError("need count >= 1 and batches >= 1")
    batches = min(batches, count)
    n = num_qubits(state)
    probs = rotated_probabilities(state)
    npat = 3 ** n
    sizes = [count // batches + (1 if b < count % batches else 0) for b in range(batches)]
    counts = np.empty((batches, npat, 2 ** n), dtype=np.int64)
    uniform = np.full(npat, 1.0 / npat)
    for b, size in enumerate(sizes):
        per_pattern = rng.multinomial(size, uniform)
        counts[b] = rng.multinomial(per_pattern, probs)
    return ShadowHistogram(n, counts)


def snapshot_estimate(s: Snapshot, p: PauliString) -> float:
    """``Tr(P rho_hat)`` for a single snapshot."""
    if len(s.bases) != p.n:
        raise DimensionError("snapshot and string sizes differ")
    value = 1.0
    for letter, basis, bit in zip(p.letters, s.bases, s.outcomes):
        if letter == "I":
            continue
        if letter != basis:
            return 0.0
        value *= -3.0 if bit else 3.0
    return value


def batch_means(h: ShadowHistogram) -> np.ndarray:
    """Per-batch mean snapshot estimate for all ``4**n`` strings, shape ``(batches, 4**n)``.

    Columns follow :func:`sqls.pauli.pauli_index` ordering.
    """
    n = h.n
    out = np.empty((h.batches, 4 ** n))
    for b in range(h.batches):
        c = h.counts[b].reshape((3,) * n + (2,) * n).astype(float)
        # interleave to (basis_0, outcome_0, basis_1, outcome_1, ...) then merge pairs
        order = [a for q in range(n) for a in (q, n + q)]
        arr = np.transpose(c, order).reshape((6,) * n)
        for q in range(n):
            arr = np.moveaxis(np.tensordot(_FACTOR6, arr, axes=([1], [q])), 0, q)
        total = h.counts[b].sum()
        out[b] = arr.reshape(-1) / max(total, 1)
    return out


def estimate_all(h: ShadowHistogram) -> np.ndarray:
    """Median over batches of the batch means, clamped to [-1, 1], for every string."""
    means = batch_means(h)
    est = means[0] if h.batches == 1 else np.median(means, axis=0)
    est = np.clip(est, -1.0, 1.0)
    est[0] = 1.0  # identity string
    return est


def estimate_pauli(shadow: ClassicalShadow | ShadowHistogram, p: PauliString,
                   batches: int = 1) -> float:
    """Median-of-means estimate of ``<P>``; ``batches=1`` is the plain mean."""
    h = _as_histogram(shadow, batches)
    if h.n != p.n:
        raise DimensionError("shadow and string sizes differ")
    if h.size == 0:
        raise ValueError("empty shadow")
    if p.x == 0 and p.z == 0:
        return 1.0
    return float(estimate_many(h, [p.x], [p.z])[0])


def estimate_many(h: ShadowHistogram, xs, zs) -> np.ndarray:
    """Estimates for selected strings given as mask arrays."""
    idx = pauli_index(h.n, xs, zs)
    return estimate_all(h)[idx]


def _as_histogram(shadow, batches):
    if isinstance(shadow, ShadowHistogram):
        return shadow
    return shadow.histogram(batches)


def snapshot_matrix(bases: str, outcomes) -> np.ndarray:
    """Dense inverted snapshot ``kron_j (3 U_j^dag |b_j><b_j| U_j - I)``."""
    m = np.ones((1, 1), dtype=complex)
    for basis, bit in zip(bases, outcomes):
        u = _ROT[BASES.index(basis)]
        ket = u.conj().T[:, int(bit)]
        local = 3 * np.outer(ket, ket.conj()) - np.eye(2)
        m = np.kron(m, local)
    return m


def reconstruct_density(shadow: ClassicalShadow) -> np.ndarray:
    """Average of inverted snapshots; Hermitian with unit trace."""
    n = shadow.n
    if n > MAX_DENSITY_QUBITS:
        raise ScaleError(f"density reconstruction capped at {MAX_DENSITY_QUBITS} qubits")
    if len(shadow) == 0:
        raise ValueError("empty shadow")
    h = shadow.histogram(1).counts[0]
    rho = np.zeros((2 ** n, 2 ** n), dtype=complex)
    pats, outs = np.nonzero(h)
    for pat, out in zip(pats, outs):
        bases = "".join(BASES[(pat // 3 ** (n - 1 - q)) % 3] for q in range(n))
        bits = [(out >> (n - 1 - q)) & 1 for q in range(n)]
        rho += h[pat, out] * snapshot_matrix(bases, bits)
    return rho / len(shadow)

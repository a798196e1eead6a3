"""Pauli strings and weighted Pauli sums in the symplectic (x, z) bit representation.

Qubit 0 is the leftmost letter of a label and the most significant bit of the
computational-basis index, so ``"ZZII"`` acts with Z on the two high-order qubits.
A string with masks ``(x, z)`` denotes the Hermitian operator
``i**popcount(x & z) * X**x Z**z``; the ``(1, 1)`` letter is therefore Y itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

MAX_DENSE_QUBITS = 12
MAX_MASK_QUBITS = 62  # masks are int64
DROP_TOL = 1e-12

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {v: k for k, v in _LETTER_BITS.items()}
_PHASES = np.array([1, 1j, -1, -1j])


class DimensionError(ValueError):
    """Operands act on incompatible numbers of qubits or dimensions."""


class ScaleError(ValueError):
    """Requested a dense object beyond the desk-scale qubit cap."""


def _popcount(a):
    if isinstance(a, (int, np.integer)):
        return int(a).bit_count()
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("a Pauli string needs at least one qubit")
        if self.x >> self.n or self.z >> self.n:
            raise DimensionError("mask wider than the qubit count")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        label = label.strip().upper()
        x = z = 0
        for ch in label:
            if ch not in _LETTER_BITS:
                raise ValueError(f"unknown Pauli letter {ch!r} in {label!r}")
            bx, bz = _LETTER_BITS[ch]
            x = (x << 1) | bx
            z = (z << 1) | bz
        return cls(len(label), x, z)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        bx, bz = _LETTER_BITS[letter]
        shift = n - 1 - qubit
        return cls(n, bx << shift, bz << shift)

    @property
    def letters(self) -> str:
        out = []
        for q in range(self.n):
            shift = self.n - 1 - q
            out.append(_BITS_LETTER[((self.x >> shift) & 1, (self.z >> shift) & 1)])
        return "".join(out)

    @property
    def locality(self) -> int:
        return locality(self)

    def __str__(self):
        return self.letters

    def __matmul__(self, other: "PauliString"):
        return multiply(self, other)


def locality(p: PauliString) -> int:
    """Number of non-identity letters."""
    return (p.x | p.z).bit_count()


def _product_phase(x1, z1, x2, z2):
    # exponent of i picked up by P(x1,z1) P(x2,z2) = i**e P(x1^x2, z1^z2)
    e = (_popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2)
         - _popcount((x1 ^ x2) & (z1 ^ z2)))
    return e % 4


def multiply(p: PauliString, q: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, r)`` with ``p @ q == phase * r`` as matrices."""
    if p.n != q.n:
        raise DimensionError(f"cannot multiply {p.n}- and {q.n}-qubit strings")
    e = _product_phase(p.x, p.z, q.x, q.z)
    return complex(_PHASES[e]), PauliString(p.n, p.x ^ q.x, p.z ^ q.z)


def pauli_index(n: int, x, z):
    """Base-4 index with letter codes I=0, X=1, Y=2, Z=3, qubit 0 most significant.

    Sorting by this index is lexicographic order of the labels.
    """
    x = np.asarray(x, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    idx = np.zeros(np.broadcast(x, z).shape, dtype=np.int64)
    for q in range(n):
        shift = n - 1 - q
        bx = (x >> shift) & 1
        bz = (z >> shift) & 1
        code = np.where(bx == 1, 1 + bz, 3 * bz)
        idx = idx * 4 + code
    return idx


def index_to_masks(n: int, idx):
    """Inverse of :func:`pauli_index`."""
    idx = np.asarray(idx, dtype=np.int64)
    x = np.zeros_like(idx)
    z = np.zeros_like(idx)
    for q in range(n):
        code = (idx >> (2 * (n - 1 - q))) & 3
        x = (x << 1) | (code == 1) | (code == 2)
        z = (z << 1) | (code == 2) | (code == 3)
    return x, z


class PauliSum:
    """A weighted sum of n-qubit Pauli strings.

    Terms are held as parallel arrays ``xs``, ``zs`` (int64 masks) and ``coeffs``
    (complex128). Instances are treated as immutable.
    """

    __slots__ = ("n", "xs", "zs", "coeffs")

    def __init__(self, n: int, xs=(), zs=(), coeffs=()):
        if not 1 <= n <= MAX_MASK_QUBITS:
            raise DimensionError(f"Pauli sums support 1..{MAX_MASK_QUBITS} qubits, got {n}")
        self.n = int(n)
        self.xs = np.asarray(xs, dtype=np.int64).reshape(-1)
        self.zs = np.asarray(zs, dtype=np.int64).reshape(-1)
        self.coeffs = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        if not (len(self.xs) == len(self.zs) == len(self.coeffs)):
            raise DimensionError("term arrays have different lengths")

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, PauliString | str]], n: int | None = None):
        terms = [(c, PauliString.from_label(p) if isinstance(p, str) else p) for c, p in terms]
        if n is None:
            if not terms:
                raise DimensionError("cannot infer n from an empty term list")
            n = terms[0][1].n
        if any(p.n != n for _, p in terms):
            raise DimensionError("all strings in a sum must share n")
        return cls(n, [p.x for _, p in terms], [p.z for _, p in terms], [c for c, _ in terms])

    @classmethod
    def from_labels(cls, mapping: dict[str, complex]) -> "PauliSum":
        return cls.from_terms([(c, lab) for lab, c in mapping.items()])

    @classmethod
    def identity(cls, n: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n, [0], [0], [coeff])

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self) -> Iterator[tuple[complex, PauliString]]:
        for c, x, z in zip(self.coeffs, self.xs, self.zs):
            yield complex(c), PauliString(self.n, int(x), int(z))

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        return list(self)

    def strings(self) -> list[PauliString]:
        return [p for _, p in self]

    def labels(self) -> list[str]:
        return [p.letters for _, p in self]

    def localities(self) -> np.ndarray:
        return _popcount(self.xs | self.zs)

    def max_locality(self) -> int:
        return int(self.localities().max()) if len(self) else 0

    def __repr__(self):
        body = " + ".join(f"({c:.6g}){p}" for c, p in list(self)[:6])
        more = f" + ... [{len(self)} terms]" if len(self) > 6 else ""
        return f"PauliSum({body}{more})"

    def _check(self, other: "PauliSum"):
        if other.n != self.n:
            raise DimensionError(f"{self.n}-qubit sum combined with {other.n}-qubit sum")

    def __add__(self, other: "PauliSum") -> "PauliSum":
        self._check(other)
        return PauliSum(self.n, np.concatenate([self.xs, other.xs]),
                        np.concatenate([self.zs, other.zs]),
                        np.concatenate([self.coeffs, other.coeffs]))

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other * -1

    def __mul__(self, scalar: complex) -> "PauliSum":
        return PauliSum(self.n, self.xs, self.zs, self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "PauliSum":
        return self * (1.0 / scalar)

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        """Operator product, expanded over all term pairs (not simplified)."""
        self._check(other)
        x1, z1 = self.xs[:, None], self.zs[:, None]
        x2, z2 = other.xs[None, :], other.zs[None, :]
        phase = _PHASES[_product_phase(x1, z1, x2, z2)]
        coeffs = self.coeffs[:, None] * other.coeffs[None, :] * phase
        return PauliSum(self.n, (x1 ^ x2).ravel(), (z1 ^ z2).ravel(), coeffs.ravel())

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n, self.xs, self.zs, self.coeffs.conj())

    def simplify(self, tol: float = DROP_TOL) -> "PauliSum":
        return simplify(self, tol)

    def to_dense(self) -> np.ndarray:
        return to_dense(self)

    def is_close(self, other: "PauliSum", tol: float = 1e-10) -> bool:
        a, b = simplify(self, 0.0), simplify(other, 0.0)
        diff = simplify(a - b, tol)
        return len(diff) == 0

    # text form ---------------------------------------------------------
    def to_text(self) -> str:
        return format_pauli_sum(self)

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        return parse_pauli_sum(text)


def simplify(s: PauliSum, tol: float = DROP_TOL) -> PauliSum:
    """Merge duplicate strings, drop terms with ``|c| <= tol`` and sort by label."""
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if len(s) == 0:
        return s
    if s.n <= _INDEX_QUBITS:
        keys = pauli_index(s.n, s.xs, s.zs)
        uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    else:
        uniq, first, inverse = np.unique(_label_keys(s.n, s.xs, s.zs), axis=0,
                                         return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    coeffs = (np.bincount(inverse, weights=s.coeffs.real, minlength=len(uniq))
              + 1j * np.bincount(inverse, weights=s.coeffs.imag, minlength=len(uniq)))
    keep = np.abs(coeffs) > tol
    return PauliSum(s.n, s.xs[first[keep]], s.zs[first[keep]], coeffs[keep])


_INDEX_QUBITS = 31  # 4**31 still fits in int64


def _label_keys(n: int, xs, zs) -> np.ndarray:
    """Per-chunk base-4 indices whose row-wise lexicographic order is label order."""
    xs = np.asarray(xs, dtype=np.int64)
    zs = np.asarray(zs, dtype=np.int64)
    cols = []
    for start in range(0, n, _INDEX_QUBITS):
        width = min(_INDEX_QUBITS, n - start)
        shift = n - start - width
        mask = (1 << width) - 1
        cols.append(pauli_index(width, (xs >> shift) & mask, (zs >> shift) & mask))
    return np.stack(cols, axis=1)


def _check_dense_scale(n: int):
    if n > MAX_DENSE_QUBITS:
        raise ScaleError(f"dense rendering capped at {MAX_DENSE_QUBITS} qubits, got {n}")


def to_dense(s: PauliSum | PauliString) -> np.ndarray:
    """Sum of coefficient-weighted Kronecker products, as a ``2**n`` square matrix."""
    if isinstance(s, PauliString):
        s = PauliSum(s.n, [s.x], [s.z], [1.0])
    _check_dense_scale(s.n)
    dim = 1 << s.n
    cols = np.arange(dim, dtype=np.int64)
    m = np.zeros((dim, dim), dtype=np.complex128)
    for c, x, z in zip(s.coeffs, s.xs, s.zs):
        # P|b> = i^{|x&z|} (-1)^{|z&b|} |b ^ x>
        vals = c * _PHASES[_popcount(int(x & z)) % 4] * (1 - 2 * (_popcount(cols & z) & 1))
        m[cols ^ x, cols] += vals
    return m


def _walsh_hadamard(a: np.ndarray, n: int) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the last axis (length 2**n)."""
    lead = a.shape[:-1]
    a = a.reshape(lead + (2,) * n).astype(np.complex128, copy=True)
    for ax in range(len(lead), len(lead) + n):
        s0 = np.take(a, 0, axis=ax)
        s1 = np.take(a, 1, axis=ax)
        a = np.stack([s0 + s1, s0 - s1], axis=ax)
    return a.reshape(lead + (1 << n,))


def decompose_dense(m: np.ndarray, tol: float = DROP_TOL) -> PauliSum:
    """Hilbert-Schmidt projection ``c_P = Tr(P m) / 2**n`` over all ``4**n`` strings.

    For a fixed X-mask the coefficients over every Z-mask form a Walsh-Hadamard
    transform of the diagonal ``a -> m[a, a ^ x]``, so the full enumeration costs
    ``O(n 4**n)`` instead of ``O(8**n)``.
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    dim = m.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    _check_dense_scale(n)
    rows = np.arange(dim, dtype=np.int64)
    xs = np.arange(dim, dtype=np.int64)
    diag = m[rows[None, :], rows[None, :] ^ xs[:, None]]  # diag[x, a] = m[a, a^x]
    wht = _walsh_hadamard(diag, n)  # wht[x, z] = sum_a (-1)^{z.a} m[a, a^x]
    zs = np.arange(dim, dtype=np.int64)
    phase = _PHASES[_popcount(xs[:, None] & zs[None, :]) % 4]
    coeffs = phase * wht / dim
    X, Z = np.meshgrid(xs, zs, indexing="ij")
    return simplify(PauliSum(n, X.ravel(), Z.ravel(), coeffs.ravel()), tol)


def decompose_dense_bruteforce(m: np.ndarray) -> PauliSum:
    """Reference enumeration: one trace per string. Only sensible for n <= 4."""
    m = np.asarray(m, dtype=np.complex128)
    n = m.shape[0].bit_length() - 1
    terms = []
    for x in range(1 << n):
        for z in range(1 << n):
            p = PauliString(n, x, z)
            c = np.trace(to_dense(p) @ m) / m.shape[0]
            terms.append((c, p))
    return simplify(PauliSum.from_terms(terms, n))


# text form -------------------------------------------------------------

def format_pauli_sum(s: PauliSum) -> str:
    """One ``<re> <im> <LETTERS>`` line per term, floats written with ``repr``."""
    lines = [f"{float(c.real)!r} {float(c.imag)!r} {p.letters}" for c, p in s]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_pauli_sum(text: str, n: int | None = None) -> PauliSum:
    terms = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected '<re> <im> <LETTERS>', got {raw!r}")
        re, im, label = parts
        terms.append((complex(float(re), float(im)), PauliString.from_label(label)))
    if not terms and n is None:
        raise ValueError("empty Pauli sum text and no qubit count given")
    return PauliSum.from_terms(terms, n)

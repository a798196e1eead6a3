"""Parameterized circuit families used as solution ansatzes.

Two families are provided:

* ``hwe`` (hardware efficient): per layer an RX, RY and RZ column on every
  qubit, then a CNOT ring 0->1, 1->2, ..., (n-1)->0. ``3 n`` parameters per layer.
* ``real`` (real amplitude): per layer CNOTs on pairs (0,1), (2,3), ..., an RY
  column on every qubit, CNOTs on the shifted pairs (1,2), (3,4), ..., and RY
  on the qubits those CNOTs touched. For n=4 this is 6 parameters per layer;
  in general ``2 n - 2`` for even n. Only RY and CNOT appear, so prepared
  amplitudes stay real.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .simulator import Gate, apply_cnot, apply_1q, rotation_matrix, zero_state

FAMILIES = ("hwe", "real")


@dataclass(frozen=True)
class AnsatzCircuit:
    n: int
    layers: int
    family: str
    gates: tuple[Gate, ...] = field(repr=False)
    slots: tuple[int | None, ...] = field(repr=False)  # parameter index per gate

    @property
    def param_count(self) -> int:
        return sum(s is not None for s in self.slots)

    def bind(self, params) -> list[Gate]:
        """Concrete gate list with angles filled in."""
        params = self._check(params)
        out = []
        for g, s in zip(self.gates, self.slots):
            out.append(g if s is None else Gate(g.kind, g.targets, angle=float(params[s])))
        return out

    def _check(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float).reshape(-1)
        if params.shape[0] != self.param_count:
            raise ValueError(f"expected {self.param_count} parameters, got {params.shape[0]}")
        return params

    @property
    def depth_proxy(self) -> int:
        """Gate-list length; a qualitative stand-in for circuit depth."""
        return len(self.gates)


def _rot(kind, q):
    return Gate(kind, (q,), angle=0.0)


def build_hardware_efficient(n: int, layers: int) -> AnsatzCircuit:
    if n < 2:
        raise ValueError("hardware-efficient ansatz needs n >= 2")
    if layers < 1:
        raise ValueError("layers must be positive")
    gates, slots = [], []
    k = 0
    for _ in range(layers):
        for kind in ("RX", "RY", "RZ"):
            for q in range(n):
                gates.append(_rot(kind, q))
                slots.append(k)
                k += 1
        for q in range(n):
            gates.append(Gate("CNOT", (q, (q + 1) % n)))
            slots.append(None)
    return AnsatzCircuit(n, layers, "hwe", tuple(gates), tuple(slots))


def build_real_amplitude(n: int, layers: int) -> AnsatzCircuit:
    if n < 2 or n % 2:
        raise ValueError("real-amplitude ansatz is defined for even n >= 2")
    if layers < 1:
        raise ValueError("layers must be positive")
    gates, slots = [], []
    k = 0
    for _ in range(layers):
        for q in range(0, n - 1, 2):
            gates.append(Gate("CNOT", (q, q + 1)))
            slots.append(None)
        for q in range(n):
            gates.append(_rot("RY", q))
            slots.append(k)
            k += 1
        inner = range(1, n - 2, 2)
        for q in inner:
            gates.append(Gate("CNOT", (q, q + 1)))
            slots.append(None)
        for q in inner:
            for t in (q, q + 1):
                gates.append(_rot("RY", t))
                slots.append(k)
                k += 1
    return AnsatzCircuit(n, layers, "real", tuple(gates), tuple(slots))


def build(family: str, n: int, layers: int) -> AnsatzCircuit:
    if family == "hwe":
        return build_hardware_efficient(n, layers)
    if family == "real":
        return build_real_amplitude(n, layers)
    raise ValueError(f"unknown ansatz family {family!r}; choose from {FAMILIES}")


def prepare_state(c: AnsatzCircuit, params) -> np.ndarray:
    """``V(params)|0...0>``."""
    params = c._check(params)
    state = zero_state(c.n)
    for g, s in zip(c.gates, c.slots):
        if g.kind == "CNOT":
            state = apply_cnot(state, *g.targets)
        elif s is not None:
            state = apply_1q(state, rotation_matrix(g.kind, params[s]), g.targets[0])
        else:
            state = apply_1q(state, g.matrix_1q(), g.targets[0])
    return state


def circuit_matrix(c: AnsatzCircuit, params) -> np.ndarray:
    """Dense unitary of the bound circuit, column by column (test oracle)."""
    dim = 1 << c.n
    cols = []
    bound = c.bind(params)
    from .simulator import run_circuit

    for j in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[j] = 1.0
        cols.append(run_circuit(bound, e))
    return np.stack(cols, axis=1)


def init_params(c: AnsatzCircuit, rng: np.random.Generator, sigma: float = 0.01) -> np.ndarray:
    """I.i.d. normal(0, sigma**2) initial parameters."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return np.zeros(c.param_count)
    return rng.normal(0.0, sigma, size=c.param_count)

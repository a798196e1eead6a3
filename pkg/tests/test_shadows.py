import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import kron_label, random_state
from sqls.pauli import PauliString, pauli_index
from sqls.shadows import (
    ClassicalShadow,
    Snapshot,
    batch_means,
    collect,
    collect_histogram,
    default_batches,
    estimate_all,
    estimate_pauli,
    reconstruct_density,
    shadow_size,
    snapshot_estimate,
    snapshot_matrix,
)
from sqls.simulator import expectation, zero_state

BELL = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def test_shadow_size_examples():
    assert shadow_size(2, 1, 1.0, 1) == 3
    assert shadow_size(76, 5, 0.01, 1) == math.ceil(math.log2(76) * 243 * 1e4)
    assert shadow_size(1, 3, 0.1) == 1
    with pytest.raises(ValueError):
        shadow_size(4, 1, 0.0)


def test_budget_quadruples_when_eps_halves():
    assert shadow_size(64, 2, 0.05) == 4 * shadow_size(64, 2, 0.1)


def test_default_batches():
    assert default_batches(1) == 2
    assert default_batches(16) == 10


def test_eigenstate_outcomes(rng):
    s = collect(zero_state(1), 2000, rng)
    assert np.all(s.outcomes[s.bases[:, 0] == 2] == 0)
    s = collect(PLUS, 2000, rng)
    assert np.all(s.outcomes[s.bases[:, 0] == 0] == 0)


def test_basis_letters_uniform(rng):
    s = collect(zero_state(1), 100_000, rng)
    freq = np.bincount(s.bases[:, 0], minlength=3) / 100_000
    sigma = np.sqrt((1 / 3) * (2 / 3) / 100_000)
    assert np.all(np.abs(freq - 1 / 3) < 5 * sigma)


def test_snapshot_estimate_examples():
    z = PauliString.from_label("Z")
    assert snapshot_estimate(Snapshot("Z", (0,)), z) == 3.0
    assert snapshot_estimate(Snapshot("X", (0,)), z) == 0.0


@given(st.text("XYZ", min_size=3, max_size=3), st.tuples(*[st.integers(0, 1)] * 3),
       st.text("IXYZ", min_size=3, max_size=3))
def test_snapshot_estimate_matches_dense(bases, bits, label):
    p = PauliString.from_label(label)
    dense = np.trace(kron_label(label) @ snapshot_matrix(bases, bits)).real
    got = snapshot_estimate(Snapshot(bases, bits), p)
    assert abs(got - dense) < 1e-12
    assert got == 0 or abs(abs(got) - 3 ** p.locality) < 1e-12


def test_identity_estimate_is_exact(rng):
    s = collect(random_state(3, rng), 10, rng)
    assert estimate_pauli(s, PauliString.identity(3), 1) == 1.0


def test_zero_state_z_estimate(rng):
    eps = 0.05
    n_snap = shadow_size(1, 1, eps)
    s = collect(zero_state(1), n_snap, rng)
    assert abs(estimate_pauli(s, PauliString.from_label("Z"), 1) - 1.0) <= eps


def test_bell_zz(rng):
    eps = 0.05
    s = collect(BELL, shadow_size(2, 2, eps), rng)  # M=1 gives a zero budget, so M=2
    assert abs(estimate_pauli(s, PauliString.from_label("ZZ"), 1) - 1.0) <= eps


def test_histogram_and_explicit_paths_agree(rng):
    s = collect(random_state(3, rng), 5000, rng)
    h = s.histogram(4)
    assert h.size == 5000 and h.batches == 4
    p = PauliString.from_label("XZY")
    means = []
    for chunk in np.array_split(np.arange(len(s)), 4):
        vals = [snapshot_estimate(Snapshot("".join("XYZ"[b] for b in s.bases[i]),
                                           tuple(int(o) for o in s.outcomes[i])), p) for i in chunk]
        means.append(np.mean(vals))
    expected = np.clip(np.median(means), -1, 1)
    assert abs(estimate_pauli(h, p) - expected) < 1e-12
    assert np.allclose(batch_means(h)[:, int(pauli_index(3, p.x, p.z))], means)


def test_histogram_draws_are_consistent_in_distribution(rng):
    state = random_state(2, rng)
    exact = expectation(state, PauliString.from_label("XY"))
    idx = int(pauli_index(2, *(lambda p: (p.x, p.z))(PauliString.from_label("XY"))))
    a = [estimate_all(collect_histogram(state, 2000, 1, rng))[idx] for _ in range(300)]
    b = [estimate_all(collect(state, 2000, rng).histogram(1))[idx] for _ in range(300)]
    se = np.sqrt(9 / 2000 / 300)
    assert abs(np.mean(a) - exact) < 5 * se
    assert abs(np.mean(b) - exact) < 5 * se
    assert abs(np.std(a) - np.std(b)) < 0.25 * np.std(b)


def test_unbiased_mean(rng):
    state = random_state(3, rng)
    p = PauliString.from_label("ZXI")
    h = collect_histogram(state, 400_000, 1, rng)
    assert abs(estimate_pauli(h, p) - expectation(state, p)) < 5 * np.sqrt(9 / 400_000)


def test_estimates_clamped(rng):
    est = estimate_all(collect_histogram(zero_state(2), 3, 1, rng))
    assert est.max() <= 1 and est.min() >= -1


def test_batches_validation(rng):
    s = collect(zero_state(1), 3, rng)
    with pytest.raises(ValueError):
        s.histogram(4)
    with pytest.raises(ValueError):
        ClassicalShadow(1, np.zeros((0, 1), np.uint8), np.zeros((0, 1), np.uint8)).histogram(1)


def test_reconstruction_single_snapshot_is_hermitian_unit_trace(rng):
    s = collect(random_state(2, rng), 1, rng)
    rho = reconstruct_density(s)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    assert abs(np.trace(rho) - 1) < 1e-10


def test_reconstruction_converges(rng):
    eps = 0.05
    s = collect(zero_state(1), shadow_size(4, 1, eps) * 4, rng)
    rho = reconstruct_density(s)
    assert abs(np.trace(rho) - 1) < 1e-10
    assert abs(rho[0, 0] - 1) <= eps


def test_plus_state_reconstruction_fidelity(rng):
    eps = 0.05
    s = collect(PLUS, shadow_size(4, 1, eps), rng)
    rho = reconstruct_density(s)
    assert np.vdot(PLUS, rho @ PLUS).real >= 1 - 2 * eps

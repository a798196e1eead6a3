import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqls.pauli import PauliString, PauliSum, to_dense
from sqls.problems import (
    LAPLACE16_DIAG,
    LAPLACE16_OFF,
    PGLS_DIAG,
    PGLS_OFF,
    PROBLEMS,
    InfeasibleKappaError,
    LinearProblem,
    NormError,
    condition_number,
    get_problem,
    grid_matrix,
    ising_base,
    ising_family,
    ising_problem,
    ising_tuned,
    laplace_grid,
    potential_grid_4x4,
    random_k_local_strings,
    random_problem,
    rqlsp1,
    rqlsp2,
    tune_kappa,
    unitary_split,
)


def random_contraction(dim, rng, real=False):
    m = rng.normal(size=(dim, dim))
    if not real:
        m = m + 1j * rng.normal(size=(dim, dim))
    return m / np.linalg.norm(m, 2) * rng.uniform(0.3, 1.0)


def assert_unitary(u, tol=1e-9):
    np.testing.assert_allclose(u.conj().T @ u, np.eye(len(u)), atol=tol)


# fixtures ------------------------------------------------------------------

def test_iqlsp_fixture():
    p = ising_problem()
    assert np.all(p.A.coeffs.imag == 0)
    np.testing.assert_allclose(p.A_dense, p.A_dense.conj().T)
    np.testing.assert_allclose(p.b, np.full(16, 0.25), atol=1e-12)
    p.check(norm_tol=1e-3)


def test_iqlsp_published_kappa_is_a_rounding():
    # the verbatim coefficients give kappa ~ 66.4; tuning the J = 0.1 base to 60 gives
    # coefficients that round to the published three figures
    assert condition_number(ising_problem().A_dense) == pytest.approx(66.39, abs=0.01)
    t = ising_tuned()
    assert abs(t.kappa - 60) < 0.6
    coeffs = dict(zip(t.A.labels(), t.A.coeffs.real))
    assert round(coeffs["IIII"], 3) == 0.508
    assert round(coeffs["XIII"], 3) == 0.123
    assert round(coeffs["ZZII"], 4) == 0.0123


@pytest.mark.parametrize("factory", [rqlsp1, rqlsp2])
def test_rqlsp_fixtures(factory):
    p = factory()
    assert p.n == 4
    p.check(norm_tol=1e-3)
    with pytest.raises(NormError):
        p.check()  # three-figure rounding overshoots the unit norm


def test_check_rejects_norm():
    A = PauliSum.identity(2, 1.5)
    with pytest.raises(NormError):
        LinearProblem(2, A, PauliSum.identity(2), "big").check()


# Ising family --------------------------------------------------------------

def test_ising_family_no_coupling():
    p = ising_family(4, 0.0, 0.0, 4.0)
    assert np.linalg.norm(p.A_dense, 2) <= 1 + 1e-12
    np.testing.assert_allclose(p.A_dense, p.A_dense.conj().T)
    with pytest.raises(ValueError):
        ising_family(1, 0.1, 0, 1)


@given(st.floats(-1, 1), st.floats(0, 2), st.floats(1, 5))
def test_ising_family_hermitian(J, eta, zeta):
    m = ising_family(3, J, eta, zeta).A_dense
    np.testing.assert_allclose(m, m.conj().T, atol=1e-12)


# kappa tuning --------------------------------------------------------------

def test_condition_number_examples():
    assert condition_number(np.eye(4)) == 1
    assert condition_number(np.diag([2.0, 1.0])) == 2
    with pytest.raises(ArithmeticError):
        condition_number(np.diag([1.0, 0.0]))


def test_tune_kappa_ising():
    eta, zeta = tune_kappa(ising_base(4, 0.1), 60)
    m = (to_dense(ising_base(4, 0.1)) + eta * np.eye(16)) / zeta
    assert 59.4 <= condition_number(m) <= 60.6
    assert np.linalg.norm(m, 2) <= 1 + 1e-12


def test_tune_kappa_rejects_unit_target():
    with pytest.raises(InfeasibleKappaError):
        tune_kappa(PauliSum.from_labels({"ZZ": 1.0}), 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_random_problem_hits_kappa(seed):
    p = random_problem(4, 6, 2, 10.0, np.random.default_rng(seed))
    assert 9.9 <= p.kappa <= 10.1
    assert np.linalg.norm(p.A_dense, 2) <= 1 + 1e-9
    assert len(p.A) <= 7 and p.A.max_locality() <= 2
    p.check()


def test_random_problem_single_string():
    p = random_problem(3, 1, 3, 1.5, np.random.default_rng(0))
    assert p.kappa == pytest.approx(1.5, rel=1e-6)


def test_random_strings_are_distinct_and_k_local(rng):
    s = random_k_local_strings(5, 30, 2, rng)
    assert len({(p.x, p.z) for p in s}) == 30
    assert all(p.locality == 2 for p in s)
    with pytest.raises(ValueError):
        random_k_local_strings(2, 10, 2, rng)


# grids -----------------------------------------------------------------------

def test_pgls_values():
    p = potential_grid_4x4()
    m = p.A_dense.real
    assert PGLS_DIAG / PGLS_OFF == pytest.approx(-4, abs=1e-6)
    np.testing.assert_allclose(np.diag(m), PGLS_DIAG, atol=1e-12)
    assert np.linalg.norm(m, 2) <= 1
    np.testing.assert_allclose(p.b, [0.5] * 4 + [0] * 12, atol=1e-12)
    x = np.linalg.solve(grid_matrix(4, PGLS_DIAG, PGLS_OFF), np.r_[np.full(4, 0.5), np.zeros(12)])
    np.testing.assert_allclose(p.exact_solution, x / np.linalg.norm(x), atol=1e-12)


def test_grid_coupling_variants():
    lit, grid = grid_matrix(4, coupling="literal"), grid_matrix(4, coupling="grid")
    assert lit[3, 4] == -1 and grid[3, 4] == 0
    assert np.sum(grid ** 2) == 304
    assert 4 / np.sqrt(np.sum(grid ** 2)) == pytest.approx(PGLS_DIAG, abs=1e-8)
    assert 4 / np.sqrt(np.sum(grid_matrix(16, coupling="grid") ** 2)) == pytest.approx(LAPLACE16_DIAG, abs=1e-7)
    with pytest.raises(ValueError):
        grid_matrix(4, coupling="torus")


@pytest.fixture(scope="module")
def laplace16():
    return laplace_grid(16)


def test_laplace16_values(laplace16):
    p = laplace16
    assert p.n == 8
    assert LAPLACE16_DIAG == pytest.approx(0.0562544) and LAPLACE16_OFF == pytest.approx(-0.0140636)
    np.testing.assert_allclose(p.A_dense, grid_matrix(16, LAPLACE16_DIAG, LAPLACE16_OFF), atol=1e-9)
    b = p.b
    np.testing.assert_allclose(b[:16], 0.25, atol=1e-12)
    np.testing.assert_allclose(b[16:], 0, atol=1e-12)
    p.check()


def test_laplace_split_and_direct_paths_agree():
    a = laplace_grid(4, via_split=True)
    b = laplace_grid(4, via_split=False)
    np.testing.assert_allclose(a.A_dense, b.A_dense, atol=1e-9)
    with pytest.raises(ValueError):
        laplace_grid(8)


def test_problem_registry():
    for name in PROBLEMS:
        if name.startswith("laplace16"):
            continue
        p = get_problem(name)
        np.testing.assert_allclose(to_dense(p.U) @ np.eye(2 ** p.n)[:, 0], p.b)
    with pytest.raises(ValueError):
        get_problem("nope")


def test_save_load_round_trip(tmp_path):
    p = rqlsp2()
    p.save(tmp_path)
    q = LinearProblem.load(tmp_path)
    assert q.label == p.label and q.n == p.n
    assert q.A.is_close(p.A, 0) and q.U.is_close(p.U, 1e-15)
    q.save(tmp_path / "again")
    assert (tmp_path / "again" / "A.pauli").read_text() == (tmp_path / "A.pauli").read_text()


# four-unitary split ----------------------------------------------------------

def test_split_of_z():
    s = unitary_split(np.diag([1.0, -1.0]))
    np.testing.assert_allclose(s.U_B, np.diag([1, -1]), atol=1e-12)
    np.testing.assert_allclose(s.V_B, np.diag([1, -1]), atol=1e-12)
    np.testing.assert_allclose(s.U_C, 1j * np.eye(2), atol=1e-12)
    np.testing.assert_allclose(s.V_C, -1j * np.eye(2), atol=1e-12)


def test_split_of_zero():
    s = unitary_split(np.zeros((2, 2)))
    np.testing.assert_allclose(s.U_B, 1j * np.eye(2))
    np.testing.assert_allclose(s.V_B, -1j * np.eye(2))
    np.testing.assert_allclose(s.reconstruct(), 0)


def test_split_rejects_norm():
    with pytest.raises(NormError):
        unitary_split(2 * np.eye(2))


@given(st.integers(0, 2 ** 31), st.booleans())
def test_split_invariants(seed, real):
    m = random_contraction(8, np.random.default_rng(seed), real)
    s = unitary_split(m)
    for f in s.factors:
        assert_unitary(f)
    np.testing.assert_allclose(s.reconstruct(), m, atol=1e-9)
    np.testing.assert_allclose(s.U_B @ s.V_B, np.eye(8), atol=1e-9)
    np.testing.assert_allclose(s.V_B, s.U_B.conj().T, atol=1e-9)
    np.testing.assert_allclose(s.V_C, s.U_C.conj().T, atol=1e-9)


def test_split_conjugate_relation_for_real_symmetric(rng):
    m = random_contraction(8, rng, real=True)
    s = unitary_split((m + m.T) / 2)
    np.testing.assert_allclose(s.V_B, s.U_B.conj(), atol=1e-9)


def test_split_laplace16():
    m = grid_matrix(16, LAPLACE16_DIAG, LAPLACE16_OFF)
    s = unitary_split(m)
    for f in s.factors:
        assert_unitary(f)
    np.testing.assert_allclose(s.U_B @ s.V_B, np.eye(256), atol=1e-9)
    np.testing.assert_allclose(s.V_B, s.U_B.conj(), atol=1e-9)
    np.testing.assert_allclose(s.reconstruct(), m, atol=1e-9)

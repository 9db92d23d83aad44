import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from msqhr.errors import ValidationError
from msqhr.linalg_core import is_unitary
from msqhr.mirrors import (
    BlockPropagator,
    HouseholderOp,
    assemble_full,
    coupled_mirrors,
    eigenstructure_check,
    householder,
    mirror_phases,
    reflection_condition,
    sum_form,
)
from msqhr.morris_shore import MSDecomposition, decompose
from msqhr.two_state import CayleyKlein, PulseSpec, far_off_phase, resonant_ck, rosen_zener_ck

from conftest import random_complex, random_unitary


def random_ck(rng, delta):
    a = random_complex(rng, ())
    a = complex(a)
    b = math.sqrt(max(0.0, 1 - abs(a) ** 2)) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
    return CayleyKlein(a, b, delta)


def brute_force_propagator(ms, cks, delta):
    """S^dagger U~ S with U~ assembled channel by channel in the MS basis."""
    n, m, r = ms.N, ms.M, ms.rank
    ut = np.zeros((n + m, n + m), dtype=complex)
    e = cmath.exp(-1j * delta)
    for k, ck in enumerate(cks):
        ut[k, k] = ck.a
        ut[k, n + k] = ck.b
        ut[n + k, k] = -ck.b.conjugate() * e
        ut[n + k, n + k] = ck.a.conjugate() * e
    for k in range(r, n):
        ut[k, k] = 1.0
    for k in range(r, m):
        ut[n + k, n + k] = e
    s = ms.S
    return s.conj().T @ ut @ s


# householder

def test_householder_examples():
    assert np.allclose(householder([1, 2j, 3], 0.0), np.eye(3))
    assert np.array_equal(householder([1, 0, 0], math.pi).round(15), np.diag([-1, 1, 1]).astype(complex))
    rng = np.random.default_rng(1)
    nu = random_complex(rng, 5)
    assert abs(np.linalg.det(householder(nu, math.pi / 2)) - 1j) <= 1e-12
    with pytest.raises(ValidationError):
        householder([0, 0], 1.0)


@given(st.integers(1, 6), st.floats(-10, 10), st.integers(0, 2**32 - 1))
def test_householder_properties(n, phi, seed):
    rng = np.random.default_rng(seed)
    nu = random_complex(rng, n) + 1e-3
    m = householder(nu, phi)
    assert is_unitary(m, 1e-12)
    assert abs(np.linalg.det(m) - cmath.exp(1j * phi)) <= 1e-12
    assert np.max(np.abs(m @ householder(nu, -phi) - np.eye(n))) <= 1e-12
    op = HouseholderOp(nu, phi)
    assert abs(np.linalg.norm(op.nu) - 1) <= 1e-12
    assert np.allclose(op.inverse().matrix(), np.linalg.inv(m), atol=1e-12)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_standard_reflection_structure(n, seed):
    rng = np.random.default_rng(seed)
    nu = random_complex(rng, n) + 1e-3
    nu = nu / np.linalg.norm(nu)
    m = householder(nu, math.pi)
    # no residue from exp(i pi): agreement at the level of one rounding in nu
    assert np.max(np.abs(m - (np.eye(n) - 2 * np.outer(nu, nu.conj())))) <= 8 * np.finfo(float).eps
    assert np.max(np.abs(m - m.conj().T)) <= 2 * np.finfo(float).eps


@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_mirrors_with_orthonormal_vectors_commute(n, seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng, n)
    p, q = rng.uniform(-math.pi, math.pi, 2)
    a, b = householder(u[:, 0], p), householder(u[:, 1], q)
    assert np.max(np.abs(a @ b - b @ a)) <= 1e-12


# assemble_full

def test_assemble_identity():
    ms = decompose(np.array([[1.0, 0], [0, 2], [1, 1]]))
    u = assemble_full(ms, [CayleyKlein(1, 0)] * 2, 0.0)
    assert np.allclose(u.full, np.eye(5), atol=1e-15)


def test_assemble_npod_is_householder():
    v = np.array([[1.0], [1j], [2.0]])
    ms = decompose(v)
    phi = 1.234
    u = assemble_full(ms, [CayleyKlein(cmath.exp(1j * phi), 0)])
    assert np.allclose(u.U_N, householder(v[:, 0], phi), atol=1e-14)


@pytest.mark.parametrize("seed", range(30))
def test_assemble_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 5))
    v = random_complex(rng, (n, m))
    ms = decompose(v)
    delta = rng.uniform(-20, 20)
    cks = [random_ck(rng, delta) for _ in range(ms.rank)]
    u = assemble_full(ms, cks)
    assert is_unitary(u.full, 1e-10)
    assert np.max(np.abs(u.full - brute_force_propagator(ms, cks, delta))) <= 1e-10
    # alternate lower-block form, independent of the dark states
    alt = np.eye(n, dtype=complex) + (ms.bright * (np.array([c.a for c in cks]) - 1)) @ ms.bright.conj().T
    assert np.max(np.abs(u.U_N - alt)) <= 1e-12


def test_interaction_picture_toggle(rng):
    ms = decompose(random_complex(rng, (3, 2)))
    cks = [random_ck(rng, 5.0) for _ in range(2)]
    s = assemble_full(ms, cks)
    i = assemble_full(ms, cks, interaction_picture=True)
    assert np.allclose(i.U_M * cmath.exp(-5j), s.U_M) and np.allclose(i.U_N, s.U_N)


def test_assemble_errors(rng):
    ms = decompose(random_complex(rng, (3, 2)))
    with pytest.raises(ValidationError):
        assemble_full(ms, [CayleyKlein(1, 0)])
    with pytest.raises(ValidationError):
        assemble_full(ms, [CayleyKlein(1, 0, 0.0), CayleyKlein(1, 0, 1.0)])


@pytest.mark.parametrize("seed", range(50))
def test_gauge_invariance_of_dark_basis(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(3, 8))
    m = int(rng.integers(1, min(n - 1, 4) + 1))
    v = random_complex(rng, (n, m))
    ms = decompose(v)
    delta = rng.uniform(-10, 10)
    cks = [random_ck(rng, delta) for _ in range(ms.rank)]
    u0 = assemble_full(ms, cks).full
    w = random_unitary(rng, ms.dark.shape[1])
    mixed = MSDecomposition(ms.lambdas, ms.bright, ms.upper, ms.dark @ w, ms.upper_dark)
    assert np.max(np.abs(assemble_full(mixed, cks).full - u0)) <= 1e-10


# reflection condition

def test_reflection_condition_examples():
    assert reflection_condition([CayleyKlein(1, 0), CayleyKlein(-1, 0)])
    p = PulseSpec("sech", 1.0, (-40, 40))
    assert reflection_condition([resonant_ck(p, 1.0), resonant_ck(p, 3.0)], 1e-12)
    assert not reflection_condition([resonant_ck(p, 0.5)])


def test_reflection_implies_small_leakage(rng):
    ms = decompose(random_complex(rng, (4, 2)))
    cks = [rosen_zener_ck(2, 1.3), rosen_zener_ck(1, -0.4)]
    u = assemble_full(ms, cks)
    tol = max(abs(c.b) for c in cks)
    assert reflection_condition(cks, tol)
    assert u.leakage() <= tol**2 + 1e-15


# coupled mirrors

def test_coupled_mirrors_trivial(rng):
    ms = decompose(random_complex(rng, (4, 2)))
    cm = coupled_mirrors(ms, [0.0, 0.0])
    assert np.allclose(cm.U_N, np.eye(4)) and np.allclose(cm.U_M, np.eye(2))
    with pytest.raises(ValidationError):
        coupled_mirrors(ms, [0.0])


def test_coupled_mirrors_orthogonal_vectors_phase_gate():
    v = np.array([[2, 0], [0, 1], [0, 1j]], dtype=complex)
    ms = decompose(v)
    phis, delta = [0.7, -1.1], 3.0
    cm = coupled_mirrors(ms, phis, delta)
    expected_n = householder(v[:, 0], 0.7) @ householder(v[:, 1], -1.1)
    assert np.allclose(cm.U_N, expected_n, atol=1e-14)
    assert np.allclose(cm.U_M, cmath.exp(-1j * delta) * np.diag(np.exp(-1j * np.array(phis))), atol=1e-14)


@pytest.mark.parametrize("seed", range(200))
def test_product_equals_sum_form(seed):
    rng = np.random.default_rng(5000 + seed)
    n = int(rng.integers(1, 8))
    m = int(rng.integers(1, min(n, 4) + 1))
    ms = decompose(random_complex(rng, (n, m)))
    phis = rng.uniform(-math.pi, math.pi, ms.rank)
    delta = rng.uniform(-5, 5)
    cm = coupled_mirrors(ms, phis, delta)
    assert np.max(np.abs(cm.U_N - sum_form(ms.bright, phis))) <= 1e-12
    assert np.max(np.abs(cm.U_M - cmath.exp(-1j * delta) * sum_form(ms.upper, -phis))) <= 1e-12
    # factor order is irrelevant
    rev = np.eye(n, dtype=complex)
    for f in reversed(cm.factors):
        rev = rev @ f.matrix()
    assert np.max(np.abs(rev - cm.U_N)) <= 1e-12
    assert abs(np.linalg.det(cm.U_N) - np.prod(np.exp(1j * phis))) <= 1e-10


def test_coupled_mirrors_match_assemble_full(rng):
    ms = decompose(random_complex(rng, (5, 3)))
    phis = [0.3, 2.0, -1.0]
    cks = [CayleyKlein(cmath.exp(1j * p), 0, 4.0) for p in phis]
    assert np.allclose(coupled_mirrors(ms, phis, 4.0).as_block().full, assemble_full(ms, cks).full, atol=1e-13)
    assert mirror_phases(cks) == pytest.approx(phis)


def test_j32_populations(j32_matrix):
    ms = decompose(j32_matrix)
    p = PulseSpec("sech")
    phis = [far_off_phase(p, lam, 80.0) for lam in ms.lambdas]
    assert phis == pytest.approx([2.65772, 0.954776], abs=1e-5)
    cm = coupled_mirrors(ms, phis)
    pops = np.abs(cm.U_N[:, 0]) ** 2
    assert pops.sum() == pytest.approx(1.0, abs=1e-14)
    assert pops == pytest.approx([0.446687, 0.285246, 0.159284, 0.108783], abs=1e-6)


# eigenstructure

def test_eigenstructure_npod():
    v = np.array([[1.0], [2.0], [3j], [1]])
    ms = decompose(v)
    rep = eigenstructure_check(coupled_mirrors(ms, [1.0]).U_N, ms, [1.0])
    assert rep.fixed_dimension == 3 and rep.ok(1e-10) and rep.cross_alignment is None


def test_eigenstructure_equal_phases(rng):
    ms = decompose(random_complex(rng, (4, 2)))
    u = coupled_mirrors(ms, [0.8, 0.8]).U_N
    c = rng.normal(size=2) + 1j * rng.normal(size=2)
    x = ms.bright @ c
    assert np.linalg.norm(u @ x - cmath.exp(0.8j) * x) <= 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_eigenstructure_random_three_state(seed):
    rng = np.random.default_rng(seed)
    ms = decompose(random_complex(rng, (3, 2)))
    phis = rng.uniform(-math.pi, math.pi, 2)
    rep = eigenstructure_check(coupled_mirrors(ms, phis).U_N, ms, phis)
    assert rep.ok(1e-10)
    assert abs(rep.cross_alignment - 1) <= 1e-10


def test_eigenstructure_detects_wrong_phase(rng):
    ms = decompose(random_complex(rng, (3, 2)))
    rep = eigenstructure_check(coupled_mirrors(ms, [0.1, 0.2]).U_N, ms, [0.1, 0.3])
    assert not rep.ok(1e-10)


def test_block_propagator_apply():
    b = BlockPropagator(np.eye(1), np.zeros((1, 1)), np.zeros((1, 1)), -np.eye(1), 0.0)
    assert b.apply([0.6, 0.8]).tolist() == [0.6, -0.8]
    assert b.leakage() == 0.0

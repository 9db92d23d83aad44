"""Block propagators and generalized quantum Householder reflections (QHRs).

``householder(nu, phi) = I + (e^{i phi} - 1) |nu><nu|``. When every
Morris-Shore channel has ``b_n = 0`` the lower-set propagator is a product
of commuting QHRs along the bright states.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .linalg_core import as_vector

__all__ = [
    "HouseholderOp",
    "BlockPropagator",
    "CoupledMirrors",
    "EigenReport",
    "householder",
    "assemble_full",
    "reflection_condition",
    "coupled_mirrors",
    "eigenstructure_check",
    "sum_form",
    "mirror_phases",
]


def _unit(nu):
    v = as_vector(nu, "nu")
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValidationError("QHR vector must be nonzero")
    return v / n


def householder(nu, phi):
    """Matrix of the generalized QHR ``M(nu; phi)``; ``nu`` is normalized here."""
    v = _unit(nu)
    # exact standard reflection I - 2|nu><nu| (exp(i pi) carries a 1e-16 imaginary residue)
    g = -2.0 if abs(phi) == math.pi else np.exp(1j * phi) - 1.0
    return np.eye(len(v), dtype=complex) + g * np.outer(v, v.conj())


@dataclass(frozen=True)
class HouseholderOp:
    nu: np.ndarray
    phi: float

    def __post_init__(self):
        object.__setattr__(self, "nu", _unit(self.nu))
        object.__setattr__(self, "phi", float(self.phi))

    def matrix(self):
        return householder(self.nu, self.phi)

    def inverse(self):
        return HouseholderOp(self.nu, -self.phi)


@dataclass(frozen=True)
class BlockPropagator:
    """The four blocks of the (N+M)-state propagator and the shared phase delta."""

    U_N: np.ndarray
    U_NM: np.ndarray
    U_MN: np.ndarray
    U_M: np.ndarray
    delta: float = 0.0

    @property
    def full(self):
        return np.block([[self.U_N, self.U_NM], [self.U_MN, self.U_M]])

    def apply(self, c0):
        return self.full @ np.asarray(c0, dtype=complex)

    def leakage(self):
        """Largest lower-to-upper transition probability."""
        return float(np.max(np.abs(self.U_NM)) ** 2) if self.U_NM.size else 0.0


def _shared_delta(cks, delta):
    if delta is not None:
        return float(delta)
    deltas = [ck.delta for ck in cks]
    if not deltas:
        return 0.0
    if max(deltas) - min(deltas) > 1e-12 * max(1.0, max(abs(d) for d in deltas)):
        raise ValidationError(f"channels disagree on the detuning phase: {deltas}")
    return deltas[0]


def assemble_full(ms, cks, delta=None, interaction_picture=False):
    """Propagator in the original basis from per-channel Cayley-Klein parameters.

    Args:
        ms: Morris-Shore decomposition.
        cks: one :class:`CayleyKlein` per coupled channel, in ``ms`` order.
        delta: shared detuning phase; taken from ``cks`` when omitted.
        interaction_picture: drop the ``e^{-i delta}`` factor of the upper rows.

    Raises:
        ValidationError: wrong number of channels or inconsistent delta.
    """
    cks = list(cks)
    if len(cks) != ms.rank:
        raise ValidationError(f"expected {ms.rank} Cayley-Klein sets, got {len(cks)}")
    delta = _shared_delta(cks, delta)
    a = np.array([ck.a for ck in cks], dtype=complex)
    b = np.array([ck.b for ck in cks], dtype=complex)
    e = 1.0 if interaction_picture else np.exp(-1j * delta)
    al, be = ms.bright, ms.upper
    u_n = (al * a) @ al.conj().T + ms.dark @ ms.dark.conj().T
    u_nm = (al * b) @ be.conj().T
    u_mn = -e * (be * b.conj()) @ al.conj().T
    u_m = e * ((be * a.conj()) @ be.conj().T + ms.upper_dark @ ms.upper_dark.conj().T)
    return BlockPropagator(u_n, u_nm, u_mn, u_m, delta)


def reflection_condition(cks, tol=1e-8):
    """True iff every channel has ``|b_n| <= tol``."""
    return all(abs(ck.b) <= tol for ck in cks)


@dataclass(frozen=True)
class CoupledMirrors:
    U_N: np.ndarray
    U_M: np.ndarray
    factors: tuple
    upper_factors: tuple
    delta: float = 0.0

    def as_block(self):
        n, m = self.U_N.shape[0], self.U_M.shape[0]
        z = np.zeros((n, m), dtype=complex)
        return BlockPropagator(self.U_N, z, z.T.copy(), self.U_M, self.delta)


def coupled_mirrors(ms, phis, delta=0.0):
    """Lower and upper propagators as products of commuting QHRs.

    ``U_N = prod M(alpha_n, phi_n)`` and
    ``U_M = e^{-i delta} prod M(beta_n, -phi_n)``. Assumes the reflection
    condition holds.
    """
    phis = [float(p) for p in phis]
    if len(phis) != ms.rank:
        raise ValidationError(f"expected {ms.rank} phases, got {len(phis)}")
    lower = tuple(HouseholderOp(ms.bright[:, k], p) for k, p in enumerate(phis))
    upper = tuple(HouseholderOp(ms.upper[:, k], -p) for k, p in enumerate(phis))
    u_n = np.eye(ms.N, dtype=complex)
    for f in lower:
        u_n = u_n @ f.matrix()
    u_m = np.eye(ms.M, dtype=complex)
    for f in upper:
        u_m = u_m @ f.matrix()
    return CoupledMirrors(u_n, np.exp(-1j * delta) * u_m, lower, upper, float(delta))


def sum_form(vectors, phis):
    """``I + sum (e^{i phi_n} - 1) |v_n><v_n|`` for orthonormal columns ``vectors``."""
    vectors = np.asarray(vectors, dtype=complex)
    g = np.exp(1j * np.asarray(phis, dtype=float)) - 1.0
    return np.eye(vectors.shape[0], dtype=complex) + (vectors * g) @ vectors.conj().T


@dataclass(frozen=True)
class EigenReport:
    bright_residuals: tuple
    fixed_residual: float
    fixed_dimension: int
    cross_alignment: float = None

    def ok(self, tol=1e-10):
        good = max(self.bright_residuals, default=0.0) <= tol and self.fixed_residual <= tol
        if self.cross_alignment is not None:
            good = good and abs(self.cross_alignment - 1.0) <= tol
        return good


def eigenstructure_check(u_n, ms, phis):
    """Check that bright states are eigenvectors of ``U_N`` and the rest is fixed.

    Returns residuals ``|U_N alpha_n - e^{i phi_n} alpha_n|`` and the largest
    ``|U_N v - v|`` over an orthonormal basis of the complement. For N=3 with
    two bright states the fixed direction is compared with the complex cross
    product ``conj(alpha_1 x alpha_2)``, the unique direction orthogonal to
    both; ``cross_alignment`` is ``|<fixed|cross>|`` (1 means parallel).
    """
    u_n = np.asarray(u_n, dtype=complex)
    res = tuple(
        float(np.linalg.norm(u_n @ ms.bright[:, k] - np.exp(1j * p) * ms.bright[:, k]))
        for k, p in enumerate(phis)
    )
    fixed = ms.dark
    fixed_res = max((float(np.linalg.norm(u_n @ fixed[:, k] - fixed[:, k])) for k in range(fixed.shape[1])), default=0.0)
    cross = None
    if ms.N == 3 and ms.rank == 2:
        w = np.cross(ms.bright[:, 0], ms.bright[:, 1]).conj()
        w /= np.linalg.norm(w)
        cross = float(abs(np.vdot(fixed[:, 0], w)))
    return EigenReport(res, fixed_res, fixed.shape[1], cross)


def mirror_phases(cks):
    """Reflection phases ``arg a_n`` of a list of Cayley-Klein sets."""
    return [math.atan2(ck.a.imag, ck.a.real) for ck in cks]

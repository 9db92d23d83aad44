"""Morris-Shore reduction of a degenerate two-level linkage.

A constant interaction matrix ``V`` (lower set N, upper set M) is turned
into ``r = rank(V)`` independent two-state channels ``alpha_n <-> beta_n``
with real couplings ``lambda_n``, plus ``N - r`` lower dark states and
``M - r`` uncoupled upper states.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConsistencyError, ValidationError
from .linalg_core import as_matrix, as_vector, gram_schmidt_complement, hermitian_eig, wrap_phase

__all__ = [
    "InteractionMatrix",
    "MSDecomposition",
    "ThetaSigma",
    "gram_matrices",
    "decompose",
    "m2_theta_sigma",
    "m2_decompose",
]

DEFAULT_RANK_TOL = 1e-10


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class InteractionMatrix:
    """Constant couplings ``V[n, m]`` between lower state n and upper state m.

    Columns are the interaction vectors ``|V_m>``. Units are 1/T (half the
    peak Rabi frequency). Labels are optional display names for the
    sublevels, e.g. magnetic quantum numbers.
    """

    V: np.ndarray
    lower_labels: tuple = ()
    upper_labels: tuple = ()

    def __post_init__(self):
        v = as_matrix(self.V, "V")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ValidationError(f"V must have at least one row and column, got {v.shape}")
        object.__setattr__(self, "V", _frozen(v))
        n, m = v.shape
        lower = tuple(self.lower_labels) or tuple(str(i) for i in range(n))
        upper = tuple(self.upper_labels) or tuple(str(i) for i in range(m))
        if len(lower) != n or len(upper) != m:
            raise ValidationError("label counts do not match V's shape")
        object.__setattr__(self, "lower_labels", lower)
        object.__setattr__(self, "upper_labels", upper)

    @property
    def N(self):
        return self.V.shape[0]

    @property
    def M(self):
        return self.V.shape[1]

    @property
    def norm(self):
        return float(np.linalg.norm(self.V))

    def column(self, m):
        return np.array(self.V[:, m])

    def subsystem(self, lower, upper):
        """Restriction of the linkage to the given lower/upper index lists."""
        lower, upper = list(lower), list(upper)
        return InteractionMatrix(
            self.V[np.ix_(lower, upper)],
            tuple(self.lower_labels[i] for i in lower),
            tuple(self.upper_labels[j] for j in upper),
        )

    def scaled(self, factor):
        return InteractionMatrix(self.V * factor, self.lower_labels, self.upper_labels)


def _as_interaction(v):
    return v if isinstance(v, InteractionMatrix) else InteractionMatrix(v)


@dataclass(frozen=True)
class MSDecomposition:
    """Result of the Morris-Shore transformation.

    Vectors are stored as matrix columns, ordered by descending coupling.

    Attributes:
        lambdas: couplings ``lambda_n > 0`` of the ``r`` coupled channels.
        bright: N x r, columns ``|alpha_n>``.
        upper: M x r, columns ``|beta_n>``.
        dark: N x (N - r), columns ``|gamma_k>``.
        upper_dark: M x (M - r) upper states with no coupling (empty when
            V has full column rank).
    """

    lambdas: np.ndarray
    bright: np.ndarray
    upper: np.ndarray
    dark: np.ndarray
    upper_dark: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), complex))

    def __post_init__(self):
        for name in ("lambdas", "bright", "upper", "dark", "upper_dark"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def N(self):
        return self.bright.shape[0]

    @property
    def M(self):
        return self.upper.shape[0]

    @property
    def rank(self):
        return len(self.lambdas)

    @property
    def A(self):
        """Lower-set transformation; rows are <alpha_1..r|, then <gamma_k|."""
        return np.hstack([self.bright, self.dark]).conj().T

    @property
    def B(self):
        """Upper-set transformation; rows are <beta_1..r|, then uncoupled states."""
        return np.hstack([self.upper, self.upper_dark]).conj().T

    @property
    def S(self):
        n, m = self.N, self.M
        s = np.zeros((n + m, n + m), dtype=complex)
        s[:n, :n] = self.A
        s[n:, n:] = self.B
        return s

    def transformed(self, v):
        """``A V B^dagger``; diagonal-rectangular for the V it came from."""
        return self.A @ _as_interaction(v).V @ self.B.conj().T

    def diagonality_residual(self, v):
        """Largest off-diagonal modulus of ``A V B^dagger``."""
        t = self.transformed(v)
        off = t.copy()
        k = min(off.shape)
        off[range(k), range(k)] = 0.0
        return float(np.max(np.abs(off))) if off.size else 0.0

    def completeness_residual(self):
        """Largest deviation of the two completeness sums from identity."""
        lower = self.bright @ self.bright.conj().T + self.dark @ self.dark.conj().T
        upper = self.upper @ self.upper.conj().T + self.upper_dark @ self.upper_dark.conj().T
        return float(
            max(
                np.max(np.abs(lower - np.eye(self.N))),
                np.max(np.abs(upper - np.eye(self.M))),
            )
        )


def gram_matrices(v):
    """Return ``(V V^dagger, V^dagger V)``."""
    v = _as_interaction(v).V
    return v @ v.conj().T, v.conj().T @ v


def _assemble(v, lams, betas, rank_tol, norm):
    """Split (lambda, beta) pairs into channels and build the bright/dark sets."""
    order = np.argsort(-lams, kind="stable")
    lams, betas = lams[order], betas[:, order]
    keep = lams > rank_tol * norm
    lam_b = lams[keep]
    upper = betas[:, keep]
    bright = (v @ upper) / lam_b if lam_b.size else np.zeros((v.shape[0], 0), complex)
    n, m = v.shape
    dark = gram_schmidt_complement(bright, n)
    upper_dark = betas[:, ~keep]
    if upper_dark.shape[1] == 0:
        upper_dark = np.zeros((m, 0), complex)
    return MSDecomposition(lam_b, bright, upper, dark, upper_dark)


def decompose(v, rank_tol=DEFAULT_RANK_TOL):
    """Morris-Shore decomposition by diagonalizing the Gram matrix V^dagger V.

    Bright states are built as ``V |beta_n> / lambda_n``, which fixes their
    phases so that ``A V B^dagger`` has real nonnegative diagonal. A channel
    whose coupling is at most ``rank_tol * ||V||`` is treated as uncoupled:
    its upper vector goes to ``upper_dark`` and the lower complement absorbs
    the extra dark dimension.

    Raises:
        ConsistencyError: the Gram matrix has a clearly negative eigenvalue.
    """
    im = _as_interaction(v)
    vm = np.array(im.V)
    norm = im.norm
    if norm == 0.0:
        return _assemble(vm, np.zeros(im.M), np.eye(im.M, dtype=complex), rank_tol, 1.0)
    _, g = gram_matrices(im)
    w, x = hermitian_eig(g)
    if w.min() < -1e-10 * norm**2:
        raise ConsistencyError(f"Gram matrix has negative eigenvalue {w.min()}")
    # ||V beta|| is accurate to eps*||V||; sqrt(w) only to sqrt(eps)*||V||
    lams = np.linalg.norm(vm @ x, axis=0)
    return _assemble(vm, lams, x, rank_tol, norm)


class ThetaSigma(NamedTuple):
    theta: float
    sigma: float
    degenerate: bool


def m2_theta_sigma(vp, vpp, tol=1e-14):
    """Mixing angle and phase of the two interaction vectors of an M=2 linkage.

    ``tan 2 theta = 2 |<V'|V''>| / (|V''|^2 - |V'|^2)`` with theta in
    (0, pi/2), and ``sigma = arg <V'|V''>``. If the vectors are orthogonal
    both angles are zero; ``degenerate`` is set when in addition
    ``|V'| == |V''|``, where any orthonormal upper basis diagonalizes
    V^dagger V.
    """
    vp, vpp = as_vector(vp, "V'"), as_vector(vpp, "V''")
    if vp.shape != vpp.shape:
        raise ValidationError("interaction vectors differ in dimension")
    p = float(np.vdot(vp, vp).real)
    q = float(np.vdot(vpp, vpp).real)
    if p == 0.0 and q == 0.0:
        raise ValidationError("both interaction vectors are zero")
    c = complex(np.vdot(vp, vpp))
    if abs(c) <= tol * (p + q):
        return ThetaSigma(0.0, 0.0, abs(p - q) <= tol * (p + q))
    diff = q - p
    if abs(diff) <= 8 * np.finfo(float).eps * (p + q):
        diff = 0.0  # equal norms up to rounding: theta is exactly pi/4
    theta = 0.5 * math.atan2(2.0 * abs(c), diff)
    return ThetaSigma(theta, wrap_phase(math.atan2(c.imag, c.real)), False)


def m2_decompose(vp, vpp, rank_tol=DEFAULT_RANK_TOL):
    """Closed-form Morris-Shore decomposition for two upper states.

    Same contract as :func:`decompose`. The upper vectors are
    ``(cos t, -e^{-i s} sin t)`` and ``(e^{i s} sin t, cos t)``; with t in
    (0, pi/2) the second always carries the larger coupling.
    """
    vp, vpp = as_vector(vp, "V'"), as_vector(vpp, "V''")
    theta, sigma, _ = m2_theta_sigma(vp, vpp)
    v = np.column_stack([vp, vpp])
    p = float(np.vdot(vp, vp).real)
    q = float(np.vdot(vpp, vpp).real)
    c = complex(np.vdot(vp, vpp))
    mean = 0.5 * (p + q)
    root = math.hypot(0.5 * (p - q), abs(c))
    ct, st = math.cos(theta), math.sin(theta)
    b1 = np.array([ct, -np.exp(-1j * sigma) * st])
    b2 = np.array([np.exp(1j * sigma) * st, ct])
    if theta == 0.0:
        l2 = np.array([p, q])
    else:
        # smaller root from det(V^dagger V) = sum_{i<j} |V'_i V''_j - V'_j V''_i|^2,
        # which has no cancellation when the vectors are nearly parallel
        wedge = np.outer(vp, vpp) - np.outer(vpp, vp)
        det = 0.5 * float(np.sum(np.abs(wedge) ** 2))
        big = mean + root
        l2 = np.array([det / big, big])
    lams = np.sqrt(np.maximum(l2, 0.0))
    return _assemble(v, lams, np.column_stack([b1, b2]), rank_tol, float(np.linalg.norm(v)))

"""Dense complex linear algebra and special functions.

Everything here works on plain numpy arrays. Matrices are 2-D complex
arrays, vectors 1-D complex arrays.
"""

import cmath
import math

import numpy as np

from .errors import ConsistencyError, DomainError, ValidationError

__all__ = [
    "as_matrix",
    "as_vector",
    "hermitian_eig",
    "is_unitary",
    "complex_gamma",
    "log_gamma",
    "gram_schmidt_complement",
    "wrap_phase",
]

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-14
CLUSTER_GAP = 1e-9
MAX_SWEEPS = 100


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D complex array (copy)."""
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} has non-finite entries")
    return m


def as_vector(v, name="vector"):
    """Return ``v`` as a finite 1-D complex array (copy)."""
    x = np.array(v, dtype=complex)
    if x.ndim != 1:
        raise ValidationError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError(f"{name} has non-finite entries")
    return x


def _check_square(m, name):
    if m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")


def wrap_phase(phi):
    """Reduce an angle to the half-open interval (-pi, pi]."""
    r = math.remainder(float(phi), 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


def _jacobi_rotate(a, x, p, q):
    apq = a[p, q]
    mag = abs(apq)
    phase = apq / mag
    # P = diag(1, conj(phase)) on (p, q) makes a[p, q] real positive,
    # then a real rotation annihilates it.
    theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    j = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ j
    a[idx, :] = j.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    x[:, idx] = x[:, idx] @ j


def _orthonormalize(cols):
    q = np.array(cols, dtype=complex)
    for k in range(q.shape[1]):
        for _ in range(2):
            for i in range(k):
                q[:, k] -= np.vdot(q[:, i], q[:, k]) * q[:, i]
        q[:, k] /= np.linalg.norm(q[:, k])
    return q


def hermitian_eig(h, herm_tol=HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Args:
        h: square Hermitian matrix.
        herm_tol: allowed Hermiticity defect relative to the Frobenius norm.

    Returns:
        ``(w, x)`` with ``w`` real ascending and ``x`` unitary so that
        ``h @ x == x @ diag(w)``. Each eigenvector's largest-magnitude
        component is real and positive; within a degenerate cluster any
        orthonormal basis may be returned.

    Raises:
        ValidationError: non-square or non-Hermitian input. The message
            names the first offending ``(i, j)`` pair.
    """
    a = as_matrix(h, "H")
    _check_square(a, "H")
    n = a.shape[0]
    norm = np.linalg.norm(a)
    defect = np.abs(a - a.conj().T)
    if norm > 0 and defect.max() > herm_tol * norm:
        i, j = np.unravel_index(np.argmax(defect), defect.shape)
        raise ValidationError(
            f"H is not hermitian: H[{i},{j}]={a[i, j]} vs conj(H[{j},{i}])={a[j, i].conjugate()}"
        )
    a = 0.5 * (a + a.conj().T)
    x = np.eye(n, dtype=complex)

    target = JACOBI_TOL * norm
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(MAX_SWEEPS):
        off = float(np.linalg.norm(a[offdiag]))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > 1e-300 and abs(a[p, q]) > 1e-18 * norm:
                    _jacobi_rotate(a, x, p, q)
    else:
        raise ConsistencyError("Jacobi eigensolver did not converge")

    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    x = x[:, order]

    # re-orthonormalize each near-degenerate cluster
    gap = CLUSTER_GAP * norm
    start = 0
    for k in range(1, n + 1):
        if k == n or w[k] - w[k - 1] > gap:
            if k - start > 1:
                x[:, start:k] = _orthonormalize(x[:, start:k])
            start = k

    for k in range(n):
        i = int(np.argmax(np.abs(x[:, k])))
        x[:, k] *= abs(x[i, k]) / x[i, k]
    return w, x


def is_unitary(m, tol=1e-12):
    """True iff ``max |M^dagger M - I| <= tol``."""
    a = as_matrix(m, "M")
    _check_square(a, "M")
    return bool(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))) <= tol)


# Lanczos approximation, g = 671/128, 14 terms.
_LANCZOS_G = 5.24218750000000000
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS_COEF = (
    57.1562356658629235,
    -59.5979603554754912,
    14.1360979747417471,
    -0.491913816097620199,
    0.339946499848118887e-4,
    0.465236289270485756e-4,
    -0.983744753048795646e-4,
    0.158088703224912494e-3,
    -0.210264441724104883e-3,
    0.217439618115212643e-3,
    -0.164318106536763890e-3,
    0.844182239838527433e-4,
    -0.261908384015814087e-4,
    0.368991826595316234e-5,
)
_SQRT_2PI = 2.5066282746310005


def _is_pole(z):
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _log_gamma_right(z):
    # valid for Re z >= 1/2
    tmp = z + _LANCZOS_G
    tmp = (z + 0.5) * cmath.log(tmp) - tmp
    ser = _LANCZOS_C0
    y = z
    for c in _LANCZOS_COEF:
        y += 1.0
        ser += c / y
    return tmp + cmath.log(_SQRT_2PI * ser / z)


def _log_sin_pi(z):
    # log sin(pi z) without overflow for large |Im z|; branch is arbitrary
    if z.imag == 0.0:
        return cmath.log(complex(math.sin(math.pi * z.real)))
    if z.imag < 0.0:
        return _log_sin_pi(z.conjugate()).conjugate()
    e = cmath.exp(2j * math.pi * z)
    return -1j * math.pi * z + cmath.log(1.0 - e) + cmath.log(0.5j)


def log_gamma(z):
    """A logarithm of Gamma(z).

    The imaginary part is not reduced to the principal branch, so only
    ``exp(log_gamma(z))`` and differences of such values are meaningful.
    """
    z = complex(z)
    if _is_pole(z):
        raise DomainError(f"Gamma has a pole at {z}")
    if z.real >= 0.5:
        return _log_gamma_right(z)
    return math.log(math.pi) - _log_sin_pi(z) - _log_gamma_right(1.0 - z)


def complex_gamma(z):
    """Euler's Gamma function for complex argument.

    Uses the Lanczos approximation for ``Re z >= 1/2`` and the reflection
    formula ``Gamma(z) Gamma(1-z) = pi / sin(pi z)`` otherwise.

    Raises:
        DomainError: ``z`` is zero or a negative integer.
    """
    z = complex(z)
    if _is_pole(z):
        raise DomainError(f"Gamma has a pole at {z}")
    if z.real >= 0.5:
        return cmath.exp(_log_gamma_right(z))
    return math.pi / (cmath.sin(math.pi * z) * cmath.exp(_log_gamma_right(1.0 - z)))


def gram_schmidt_complement(q, n):
    """Orthonormal basis of the complement of span(columns of ``q``) in C^n.

    Seeds are the canonical unit vectors; at each step the seed with the
    largest residual is taken, which makes the result deterministic.
    """
    q = np.asarray(q, dtype=complex).reshape(n, -1)
    basis = [q[:, k] for k in range(q.shape[1])]
    need = n - len(basis)
    out = []
    seeds = np.eye(n, dtype=complex)
    for _ in range(need):
        best, best_norm = None, -1.0
        for i in range(n):
            v = seeds[:, i].copy()
            for _ in range(2):
                for b in basis:
                    v -= np.vdot(b, v) * b
            nv = np.linalg.norm(v)
            if nv > best_norm + 1e-12:
                best, best_norm = v, nv
        v = best / best_norm
        basis.append(v)
        out.append(v)
    if not out:
        return np.zeros((n, 0), dtype=complex)
    return np.column_stack(out)

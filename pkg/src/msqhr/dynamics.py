"""Direct integration of the RWA Schrodinger equation for the full linkage.

``i dC/dt = H(t) C`` with ``H = [[0, V f(t)], [V^dagger f(t), Delta I]]``,
lower set first. Serves as the reference against which every analytic
propagator is checked.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError, ValidationError
from .linalg_core import as_vector
from .morris_shore import InteractionMatrix
from .two_state import DetuningSpec, PulseSpec

__all__ = [
    "SimulationProblem",
    "Trajectory",
    "build_hamiltonian",
    "dopri5",
    "integrate",
    "propagator",
    "compare_analytic",
]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between 5th- and embedded 4th-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension (Hairer & Wanner, DOPRI5)
_D = np.array([
    -12715105075 / 11282082432, 0.0, 87487479700 / 32700410799, -10690763975 / 1880347072,
    701980252875 / 199316789632, -1453857185 / 822651844, 69997945 / 29380423,
])


_A_ROWS = [np.array(r) for r in _A]


def dopri5(fun, t0, t1, y0, rtol=1e-10, atol=None, t_eval=None, h0=None, max_steps=10_000_000):
    """Adaptive Dormand-Prince 5(4) integration of ``y' = fun(t, y)``.

    Works on complex arrays of any shape. Dense output at ``t_eval`` uses
    the 4th-order continuous extension.

    Returns:
        ``(y1, ys, stats)``: the state at ``t1``, an array of states at
        ``t_eval`` (or None) and a dict with step counts.

    Raises:
        IntegrationError: step size underflow or too many steps.
    """
    atol = rtol if atol is None else atol
    y0 = np.array(y0, dtype=complex)
    shape = y0.shape
    y = y0.ravel()
    n = y.size

    def f(t, x):
        return np.asarray(fun(t, x.reshape(shape)), dtype=complex).ravel()

    t = float(t0)
    t1 = float(t1)
    span = t1 - t
    if span <= 0:
        raise ValidationError("integration interval must be increasing")
    next_i = 0
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        ys = np.empty((len(t_eval), n), dtype=complex)
        while next_i < len(t_eval) and t_eval[next_i] <= t:
            ys[next_i] = y
            next_i += 1
    else:
        ys = None

    ks = np.empty((7, n), dtype=complex)
    ks[0] = f(t, y)
    if h0 is None:
        scale = atol + rtol * np.abs(y)
        d0 = math.sqrt(np.mean(np.abs(y / scale) ** 2))
        d1 = math.sqrt(np.mean(np.abs(ks[0] / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h0, span)
    steps = rejected = 0
    while t < t1:
        if steps + rejected > max_steps:
            raise IntegrationError(f"too many steps at t={t}", t)
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t}", t)
        last = t + h >= t1
        if last:
            h = t1 - t
        for i in range(1, 7):
            ks[i] = f(t + _C[i] * h, y + h * (_A_ROWS[i] @ ks[:i]))
        y_new = y + h * (_B @ ks)
        err_vec = h * (_E @ ks)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = math.sqrt(np.mean((np.abs(err_vec) / scale) ** 2))
        if err <= 1.0:
            t_new = t1 if last else t + h
            if ys is not None and next_i < len(t_eval) and t_eval[next_i] <= t_new:
                ydiff = y_new - y
                bspl = h * ks[0] - ydiff
                r4 = ydiff - h * ks[6] - bspl
                r5 = h * (_D @ ks)
                while next_i < len(t_eval) and t_eval[next_i] <= t_new:
                    th = (t_eval[next_i] - t) / h
                    th1 = 1.0 - th
                    ys[next_i] = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)))
                    next_i += 1
            t, y = t_new, y_new
            ks[0] = ks[6]
            steps += 1
            fac = 0.9 * err ** -0.2 if err > 0 else 5.0
            h *= min(5.0, max(0.2, fac))
        else:
            rejected += 1
            h *= max(0.2, 0.9 * err ** -0.2)
    if ys is not None:
        while next_i < len(t_eval):
            ys[next_i] = y
            next_i += 1
        ys = ys.reshape((len(t_eval),) + shape)
    return y.reshape(shape), ys, {"steps": steps, "rejected": rejected}


def _coupling_blocks(v):
    v = v.V if isinstance(v, InteractionMatrix) else np.asarray(v, dtype=complex)
    n, m = v.shape
    k = np.zeros((n + m, n + m), dtype=complex)
    k[:n, n:] = v
    k[n:, :n] = v.conj().T
    return k, n, m


def build_hamiltonian(v, pulse, detuning, t):
    """RWA Hamiltonian at absolute time ``t``."""
    k, n, m = _coupling_blocks(v)
    h = pulse.envelope(t) * k
    h[n:, n:] += detuning(t) * np.eye(m)
    return h


@dataclass(frozen=True)
class SimulationProblem:
    """Full-linkage initial-value problem.

    ``C0`` lists lower amplitudes first, then upper amplitudes. The
    simulation runs over ``pulse.window``.
    """

    V: InteractionMatrix
    pulse: PulseSpec
    detuning: DetuningSpec
    C0: np.ndarray
    sample_count: int = 201

    def __post_init__(self):
        v = self.V if isinstance(self.V, InteractionMatrix) else InteractionMatrix(self.V)
        object.__setattr__(self, "V", v)
        c0 = as_vector(self.C0, "C0")
        if c0.shape != (v.N + v.M,):
            raise ValidationError(f"C0 must have {v.N + v.M} entries, got {c0.shape[0]}")
        if abs(np.linalg.norm(c0) - 1.0) > 1e-12:
            raise ValidationError(f"C0 must be normalized, |C0| = {np.linalg.norm(c0)}")
        if self.sample_count < 2:
            raise ValidationError("sample_count must be at least 2")
        object.__setattr__(self, "C0", c0)

    @property
    def dim(self):
        return self.V.N + self.V.M


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    amplitudes: np.ndarray
    final_state: np.ndarray
    stats: dict

    @property
    def populations(self):
        return np.abs(self.amplitudes) ** 2


def _scalar_envelope(pulse):
    T = pulse.T
    if pulse.shape == "sech":
        return lambda t: 1.0 / math.cosh(t / T) if abs(t / T) < 700 else 0.0
    if pulse.shape == "gaussian":
        return lambda t: math.exp(-(t / T) ** 2)
    if pulse.shape == "constant":
        return lambda t: 1.0
    return pulse.envelope


def _rhs(v, pulse, detuning, rotating=False):
    """Right-hand side of the amplitude equations; returns ``(fun, to_lab)``.

    With ``rotating`` the upper amplitudes are stored as c_u e^{i Delta (t - t_start)}.
    That removes the free oscillation an explicit solver would otherwise have
    to resolve when the upper set is populated, at the cost of making the
    adiabatically following upper amplitudes oscillate when it is not.
    """
    k, n, m = _coupling_blocks(v)
    delta = float(detuning.value)
    t0 = pulse.t_start
    env = _scalar_envelope(pulse)

    if not rotating:
        k = -1j * k
        d = np.zeros(n + m, dtype=complex)
        d[n:] = -1j * delta

        def fun(t, y):
            if y.ndim == 1:
                return env(t) * (k @ y) + d * y
            return env(t) * (k @ y) + d[:, None] * y

        return fun, lambda t, y, samples=False: y

    vl = -1j * k[:n, n:]
    vu = -1j * k[n:, :n]

    def fun(t, y):
        e = cmath.exp(-1j * delta * (t - t0))
        g = env(t)
        out = np.empty_like(y)
        out[:n] = (g * e) * (vl @ y[n:])
        out[n:] = (g * e.conjugate()) * (vu @ y[:n])
        return out

    def to_lab(t, y, samples=False):
        # samples=True: leading axis of y runs over the times in t
        y = np.array(y, dtype=complex)
        ph = np.exp(-1j * delta * (np.asarray(t) - t0))
        if samples:
            y[:, n:] *= ph.reshape((-1,) + (1,) * (y.ndim - 1))
        else:
            y[n:] *= ph
        return y

    return fun, to_lab


def _mostly_upper(c, n):
    """Per column: does the upper set carry most of the weight?"""
    c = np.asarray(c)
    return np.sum(np.abs(c[n:]) ** 2, axis=0) > np.sum(np.abs(c[:n]) ** 2, axis=0)


# Step control runs tighter than the requested tolerance so that the error
# accumulated over thousands of steps stays within ~10 rel_tol.
LOCAL_TOL_FACTOR = 0.05


def _check_tol(rel_tol):
    if not 1e-12 <= rel_tol <= 1e-4:
        raise ValidationError(f"rel_tol must lie in [1e-12, 1e-4], got {rel_tol}")


def integrate(problem, rel_tol=1e-10):
    """Integrate the problem over its pulse window.

    Returns a :class:`Trajectory` sampled at ``sample_count`` evenly spaced
    times (dense output) plus the final state.
    """
    _check_tol(rel_tol)
    p = problem.pulse
    times = np.linspace(p.t_start, p.t_end, problem.sample_count)
    n = problem.V.V.shape[0]
    fun, to_lab = _rhs(problem.V, p, problem.detuning, bool(_mostly_upper(problem.C0, n)))
    y1, ys, stats = dopri5(fun, p.t_start, p.t_end, problem.C0, LOCAL_TOL_FACTOR * rel_tol, t_eval=times)
    return Trajectory(times, to_lab(times, ys, samples=True), to_lab(p.t_end, y1), stats)


def propagator(v, pulse, detuning, rel_tol=1e-10, initial=None):
    """Numerical propagator over the pulse window.

    With ``initial`` (columns = initial states) returns the evolved columns
    instead of the full matrix.
    """
    _check_tol(rel_tol)
    k, n, m = _coupling_blocks(v)
    y0 = np.eye(n + m, dtype=complex) if initial is None else np.asarray(initial, dtype=complex)
    flat = y0.ndim == 1
    y0 = y0[:, None] if flat else y0
    out = np.empty_like(y0)
    upper = _mostly_upper(y0, n)
    for rotating in (False, True):
        cols = np.flatnonzero(upper == rotating)
        if cols.size:
            fun, to_lab = _rhs(v, pulse, detuning, rotating)
            y1, _, _ = dopri5(fun, pulse.t_start, pulse.t_end, y0[:, cols], LOCAL_TOL_FACTOR * rel_tol)
            out[:, cols] = to_lab(pulse.t_end, y1)
    return out[:, 0] if flat else out


def compare_analytic(problem, block, rel_tol=1e-10, initial_states=None):
    """Largest amplitude deviation between integration and an analytic propagator.

    Args:
        problem: supplies V, pulse and detuning.
        block: :class:`BlockPropagator` (or anything with ``.full``) built
            for the same window.
        initial_states: columns of initial states; default all basis states.
    """
    full = block.full if hasattr(block, "full") else np.asarray(block)
    dim = problem.dim
    if full.shape != (dim, dim):
        raise ValidationError(f"propagator shape {full.shape} does not match dimension {dim}")
    c0 = np.eye(dim, dtype=complex) if initial_states is None else np.asarray(initial_states, dtype=complex)
    if c0.ndim == 1:
        c0 = c0[:, None]
    if c0.shape[0] != dim:
        raise ValidationError("initial states have the wrong dimension")
    numeric = propagator(problem.V, problem.pulse, problem.detuning, rel_tol, initial=c0)
    return float(np.max(np.abs(numeric - full @ c0)))
